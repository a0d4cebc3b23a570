//! Recognize the array reduction in the bundled serial norm kernel and lower
//! it with both strategies, printing the two generated shapes side by side.
//!
//!     cargo run -p ompat --example reductions

use std::path::Path;

use ompat::analysis::side_effects::AnalysisConfig;
use ompat::analysis::recognize_reductions;
use ompat::frontend::{function_nests, parse, print, Origin, SourceUnit};
use ompat::transforms::{run_plan, TransformPlan};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bt_rhs_norm_serial.c");
    let unit = SourceUnit::from_file(&path, Origin::Serial).unwrap();
    let ast = parse(&unit).unwrap();

    let f = ast.function("rhs_norm").unwrap();
    let nest = function_nests(f)[0].as_for().unwrap().clone();
    for c in recognize_reductions(&nest) {
        let shape = if c.is_array() { "array" } else { "scalar" };
        println!(
            "candidate: {} ({shape}, op {}) across {} statement(s)",
            c.variable,
            c.op.symbol(),
            c.statements.len()
        );
    }

    for strategy in ["atomic", "critical"] {
        let plan =
            TransformPlan::parse(&format!("parallelize,reduction={strategy}"), 10000).unwrap();
        let out = run_plan(&ast, &plan, &AnalysisConfig::default());
        println!("\n=== {strategy} lowering ===");
        let text = print(&out.ast).text;
        let from = text.find("void rhs_norm").or_else(|| text.find("static void rhs_norm")).unwrap();
        let to = text[from..].find("\n}\n").map(|i| from + i + 3).unwrap_or(text.len());
        println!("{}", &text[from..to]);
    }
}
