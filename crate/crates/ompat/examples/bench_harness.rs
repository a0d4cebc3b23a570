//! Time a serial build against a transformed parallel build of the same
//! kernel with the external compiler, then print the timing summary with
//! speedups. Needs a C compiler with OpenMP support on PATH.
//!
//!     cargo run -p ompat --example bench_harness

use ompat::analysis::side_effects::AnalysisConfig;
use ompat::frontend::{parse_str, print};
use ompat::harness::report::timings_csv;
use ompat::harness::{run_bench, speedup_reported, BenchConfig};
use ompat::transforms::{run_plan, strip_directives, TransformPlan};

const SRC: &str = "double a[65536]; double b[65536]; double s;
int main(void) {
  int i;
  int r;
  for (i = 0; i < 65536; i++) { a[i] = i * 0.001; }
  for (r = 0; r < 400; r++) {
    for (i = 0; i < 65536; i++) {
      b[i] = a[i] * a[i] + 0.5 * a[i] + r;
    }
  }
  s = 0.0;
  for (i = 0; i < 65536; i++) { s = s + b[i]; }
  print_val(s);
  return 0;
}";

fn main() {
    let ast = parse_str(SRC).unwrap();
    let serial = print(&strip_directives(&ast)).text;
    let plan = TransformPlan::parse("parallelize", 10000).unwrap();
    let parallel = print(&run_plan(&ast, &plan, &AnalysisConfig::default()).ast).text;

    let dir = tempfile::tempdir().unwrap();
    let serial_path = dir.path().join("serial.c");
    let parallel_path = dir.path().join("parallel.c");
    std::fs::write(&serial_path, serial).unwrap();
    std::fs::write(&parallel_path, parallel).unwrap();

    let mut cfg = BenchConfig::default();
    cfg.variants = vec![
        ("serial".to_string(), serial_path),
        ("parallel".to_string(), parallel_path),
    ];
    cfg.thread_counts = vec![1, 2, 4];
    cfg.runs = 3;

    match run_bench(&cfg) {
        Ok(records) => {
            print!("{}", timings_csv(&records));
            let mean = |v: &str, t: u32| ompat::harness::mean_seconds(&records, v, t).unwrap();
            println!(
                "parallel 1->4 speedup (reported): {}",
                speedup_reported(mean("parallel", 1), mean("parallel", 4))
            );
        }
        Err(e) => eprintln!("bench skipped: {e}"),
    }
}
