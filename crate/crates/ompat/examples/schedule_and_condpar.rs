//! Cost-model passes: triangular loops pick up schedule(dynamic), tiny
//! constant workloads serialize, and symbolic workloads get an if guard.
//!
//!     cargo run -p ompat --example schedule_and_condpar

use std::collections::BTreeSet;

use ompat::analysis::side_effects::AnalysisConfig;
use ompat::costmodel::{imbalance_score, is_profitable, workload};
use ompat::frontend::{function_nests, parse_str, print};
use ompat::transforms::{run_plan, TransformPlan};

const SRC: &str = "double a[256][256]; double b[64]; double c[64];
void kernels(int n) {
  int i;
  int j;
  #pragma omp parallel for private(i, j)
  for (i = 0; i < 256; i++) {
    for (j = 0; j < i; j++) { a[i][j] = i + j; }
  }
  #pragma omp parallel for private(i)
  for (i = 0; i < 64; i++) { b[i] = i * 2.0; }
  #pragma omp parallel for private(i)
  for (i = 0; i < n; i++) { c[i] = b[i] + 1.0; c[i] = c[i] * 0.5; }
}";

fn main() {
    let ast = parse_str(SRC).unwrap();
    let f = ast.function("kernels").unwrap();
    for (k, nest) in function_nests(f).iter().enumerate() {
        let loop_ = nest.as_for().unwrap();
        let est = workload(loop_);
        let signal = imbalance_score(loop_, &BTreeSet::new(), &AnalysisConfig::default());
        let decision = match is_profitable(&est, 10000) {
            ompat::costmodel::Decision::Serial => "serial".to_string(),
            ompat::costmodel::Decision::Parallel => "parallel".to_string(),
            ompat::costmodel::Decision::Conditional(e) => {
                format!("if({})", ompat::frontend::printer::expr(&e, 0))
            }
        };
        println!(
            "kernels#{k}: workload {} (evaluable {}), imbalance {:?}, decision {decision}",
            ompat::frontend::printer::expr(&est.expr, 0),
            est.evaluable,
            signal.reasons,
        );
    }
    let plan = TransformPlan::parse("schedule,condpar", 10000).unwrap();
    let out = run_plan(&ast, &plan, &AnalysisConfig::default());
    println!();
    for l in &out.log {
        println!("{l}");
    }
    println!("\n{}", print(&out.ast).text);
}
