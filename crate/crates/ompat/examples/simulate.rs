//! Execute a fixture under the simulated thread teams and compare outputs
//! across team sizes. Programs whose cross-thread dataflow is confined to
//! same-thread chunks (or synchronized at construct ends the simulator
//! models) agree bit-for-bit up to combine order.
//!
//!     cargo run -p ompat --example simulate

use std::path::Path;

use ompat::frontend::{parse, Origin, SourceUnit};
use ompat::sim;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for stem in ["ep_main", "cg_conj_grad", "is_rank", "bt_rhs_norm_serial"] {
        let unit =
            SourceUnit::from_file(&dir.join(format!("{stem}.c")), Origin::Manual).unwrap();
        let ast = parse(&unit).unwrap();
        print!("{stem}:");
        let reference = sim::run(&ast, 1).unwrap().numbers();
        for threads in [1usize, 2, 4] {
            let out = sim::run(&ast, threads).unwrap().numbers();
            let max_rel = out
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1.0))
                .fold(0.0f64, f64::max);
            print!("  t{threads} max-rel-diff {max_rel:.2e}");
        }
        println!();
        println!("  first outputs: {:?}", &reference[..reference.len().min(3)]);
    }
}
