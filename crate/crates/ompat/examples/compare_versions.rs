//! Diff two parallelizations of the same program: the report lists only
//! sections whose pattern counts differ.
//!
//!     cargo run -p ompat --example compare_versions

use ompat::frontend::parse_str;
use ompat::harness::report::diff_markdown;
use ompat::patterns::{compare_versions, Annotations};

const AUTO: &str = "double a[64][64]; double s;
void solve(void) {
  int k;
  int j;
  for (k = 0; k < 64; k++) {
    #pragma omp parallel for private(j)
    for (j = 0; j < 64; j++) { a[k][j] = k + j; }
  }
  s = 0.0;
  for (k = 0; k < 64; k++) { s = s + a[k][0]; }
}";

const MANUAL: &str = "double a[64][64]; double s;
void solve(void) {
  int k;
  int j;
  #pragma omp parallel for private(k, j) schedule(dynamic)
  for (k = 0; k < 64; k++) {
    for (j = 0; j < 64; j++) { a[k][j] = k + j; }
  }
  s = 0.0;
  for (k = 0; k < 64; k++) { s = s + a[k][0]; }
}";

fn main() {
    let auto = parse_str(AUTO).unwrap();
    let manual = parse_str(MANUAL).unwrap();
    let report = compare_versions(&auto, &manual, &Annotations::default()).unwrap();
    print!("{}", diff_markdown(&report, "solve"));
    println!("\n(positive deltas: pattern present in the manual version only)");
}
