//! Parse a small annotated source, print it back, and show that the reparse
//! is structurally identical.
//!
//!     cargo run -p ompat --example parse_and_print

use ompat::frontend::{parse, parse_str, print};

fn main() {
    let src = "double a[64]; double s;
void axpy(double alpha, double x[], int n) {
  int i;
  #pragma omp parallel for private(i) reduction(+:s)
  for (i = 0; i < n; i++) {
    a[i] = a[i] + alpha * x[i];
    s = s + a[i];
  }
}";
    let ast = parse_str(src).expect("parses");
    let printed = print(&ast);
    println!("--- printed ---\n{}", printed.text);
    let reparsed = parse(&printed).expect("reparses");
    println!(
        "round trip structurally identical: {}",
        ast.structurally_equal(&reparsed)
    );
}
