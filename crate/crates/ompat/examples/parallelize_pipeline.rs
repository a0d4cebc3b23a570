//! Run the whole default pipeline over a serial multi-kernel program and
//! print the change log plus the rewritten source.
//!
//!     cargo run -p ompat --example parallelize_pipeline

use ompat::analysis::side_effects::AnalysisConfig;
use ompat::frontend::{parse_str, print};
use ompat::transforms::{run_plan, TransformPlan};

const SRC: &str = "double a[4096]; double b[4096]; double c[4096]; double s;
void kernels(int n) {
  int i;
  double t;
  for (i = 0; i < 4096; i++) {
    t = a[i] * 0.5;
    b[i] = t + 1.0;
  }
  for (i = 0; i < 4096; i++) {
    c[i] = b[i] * b[i];
  }
  s = 0.0;
  for (i = 0; i < n; i++) {
    s = s + c[i];
  }
}";

fn main() {
    let ast = parse_str(SRC).unwrap();
    let plan = TransformPlan::full(1000);
    let out = run_plan(&ast, &plan, &AnalysisConfig::default());
    println!("--- change log (pass\\tsection\\taction\\treason) ---");
    for l in &out.log {
        println!("{l}");
    }
    for r in &out.refusals {
        println!("{r}");
    }
    println!("\n--- transformed ---\n{}", print(&out.ast).text);
}
