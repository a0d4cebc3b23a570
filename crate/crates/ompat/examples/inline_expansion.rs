//! Inline a call inside a loop nest and show how the outer loop becomes
//! parallelizable once the callee body is visible.
//!
//!     cargo run -p ompat --example inline_expansion

use ompat::analysis::side_effects::AnalysisConfig;
use ompat::frontend::{parse_str, print};
use ompat::transforms::{run_plan, TransformPlan};

const SRC: &str = "double u[32][5];
void point(double q[5], int i) {
  int m;
  for (m = 0; m < 5; m++) { q[m] = i * 0.5 + m; }
}
void init(void) {
  int i;
  int m;
  double t[5];
  for (i = 0; i < 32; i++) {
    point(t, i);
    for (m = 0; m < 5; m++) { u[i][m] = t[m]; }
  }
}";

fn main() {
    let ast = parse_str(SRC).unwrap();
    let cfg = AnalysisConfig::default();

    let without = run_plan(&ast, &TransformPlan::parse("parallelize", 10000).unwrap(), &cfg);
    println!("--- parallelize only ---");
    for r in &without.refusals {
        println!("{r}");
    }
    for l in &without.log {
        println!("{l}");
    }

    let with =
        run_plan(&ast, &TransformPlan::parse("inline,parallelize", 10000).unwrap(), &cfg);
    println!("\n--- inline then parallelize ---");
    for l in &with.log {
        println!("{l}");
    }
    println!("\n{}", print(&with.ast).text);
}
