//! Convert threadprivate data to loop-private clauses and back. Conversion
//! is refused when a per-thread value flows between regions.
//!
//!     cargo run -p ompat --example threadprivate_conversion

use ompat::analysis::live_across_regions;
use ompat::frontend::{parse_str, print};
use ompat::transforms::{convert_threadprivate, TpDirection};

const CONVERTIBLE: &str = "static double buf[4];
#pragma omp threadprivate(buf)
double a[16]; double b[16];
void f(void) {
  int i;
  int m;
  #pragma omp parallel private(i, m)
  {
    for (m = 0; m < 4; m++) { buf[m] = 0.0; }
    #pragma omp for
    for (i = 0; i < 16; i++) { a[i] = buf[0] + i; }
  }
  #pragma omp parallel private(i, m)
  {
    for (m = 0; m < 4; m++) { buf[m] = 1.0; }
    #pragma omp for
    for (i = 0; i < 16; i++) { b[i] = buf[1] * i; }
  }
}";

const PERSISTING: &str = "static double buf[4];
#pragma omp threadprivate(buf)
double a[16]; double b[16];
void f(void) {
  int i;
  int m;
  #pragma omp parallel private(i, m)
  {
    for (m = 0; m < 4; m++) { buf[m] = 0.0; }
    #pragma omp for
    for (i = 0; i < 16; i++) { a[i] = buf[0] + i; }
  }
  #pragma omp parallel private(i)
  {
    #pragma omp for
    for (i = 0; i < 16; i++) { b[i] = buf[1] * i; }
  }
}";

fn main() {
    let ast = parse_str(CONVERTIBLE).unwrap();
    println!(
        "convertible case: live across regions = {}",
        live_across_regions(&ast, "buf")
    );
    let out = convert_threadprivate(&ast, &["buf".to_string()], TpDirection::ToLoopPrivate)
        .expect("conversion succeeds");
    println!("{}", print(&out).text);
    let back = convert_threadprivate(&out, &["buf".to_string()], TpDirection::ToThreadprivate)
        .expect("inverse succeeds");
    println!("--- promoted back ---\n{}", print(&back).text);

    let persisting = parse_str(PERSISTING).unwrap();
    println!(
        "persisting case: live across regions = {}",
        live_across_regions(&persisting, "buf")
    );
    match convert_threadprivate(&persisting, &["buf".to_string()], TpDirection::ToLoopPrivate) {
        Ok(_) => println!("unexpectedly converted"),
        Err(e) => println!("refused as expected: {e}"),
    }
}
