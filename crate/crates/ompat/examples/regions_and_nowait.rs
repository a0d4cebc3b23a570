//! Merge adjacent parallel loops into one region, then drop the barriers the
//! cross-loop conflict analysis proves unnecessary.
//!
//!     cargo run -p ompat --example regions_and_nowait

use ompat::analysis::side_effects::AnalysisConfig;
use ompat::frontend::{parse_str, print};
use ompat::transforms::{run_plan, TransformPlan};

const SRC: &str = "double a[1024]; double b[1024]; double c[1024];
void sweep(void) {
  int i;
  #pragma omp parallel for private(i)
  for (i = 0; i < 1024; i++) { a[i] = i * 0.5; }
  #pragma omp parallel for private(i)
  for (i = 0; i < 1024; i++) { b[i] = a[i] + 1.0; }
  #pragma omp parallel for private(i)
  for (i = 1; i < 1024; i++) { c[i] = b[i - 1] * 2.0; }
}";

fn main() {
    let ast = parse_str(SRC).unwrap();
    let plan = TransformPlan::parse("region,nowait", 10000).unwrap();
    let out = run_plan(&ast, &plan, &AnalysisConfig::default());
    for l in &out.log {
        println!("{l}");
    }
    // The first loop feeds the second at identical subscripts (safe to skip
    // the barrier); the third reads shifted data, so the second keeps its
    // barrier.
    println!("\n{}", print(&out.ast).text);
}
