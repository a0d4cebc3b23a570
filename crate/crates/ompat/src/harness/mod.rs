//! Benchmark harness: compile program variants with an external system
//! compiler, time them at each requested thread count, and compute the
//! speedup/overhead arithmetic the comparison reports use.

pub mod report;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use thiserror::Error;

pub use report::{emit_report, ProfileRow};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// (label, source path) pairs.
    pub variants: Vec<(String, PathBuf)>,
    pub thread_counts: Vec<u32>,
    pub runs: u32,
    /// Template with `{input}`, `{output}` and `{flags}` placeholders.
    pub compiler_command: String,
    pub flags: String,
    /// Prefer a time the program reports itself over wall clock.
    pub self_timed: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            variants: Vec::new(),
            thread_counts: vec![1, 4],
            runs: 3,
            compiler_command: "cc {flags} -o {output} {input}".to_string(),
            flags: "-O3 -fopenmp".to_string(),
            self_timed: false,
        }
    }
}

impl BenchConfig {
    /// Line-oriented `key = value` text: repeated `variant = label, path`
    /// lines plus `threads`, `runs`, `compiler`, `flags` and `self_timed`.
    pub fn parse(text: &str) -> Result<BenchConfig, String> {
        let mut cfg = BenchConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            let value = value.trim();
            match key.trim() {
                "variant" => {
                    let (label, path) = value
                        .split_once(',')
                        .ok_or_else(|| format!("line {}: variant = label, path", lineno + 1))?;
                    cfg.variants.push((label.trim().to_string(), PathBuf::from(path.trim())));
                }
                "threads" => {
                    cfg.thread_counts = value
                        .split(',')
                        .map(|t| t.trim().parse::<u32>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| format!("line {}: {e}", lineno + 1))?;
                }
                "runs" => {
                    cfg.runs =
                        value.parse().map_err(|e| format!("line {}: {e}", lineno + 1))?;
                }
                "compiler" => cfg.compiler_command = value.to_string(),
                "flags" => cfg.flags = value.to_string(),
                "self_timed" => cfg.self_timed = value == "true" || value == "1",
                other => return Err(format!("line {}: unknown key `{other}`", lineno + 1)),
            }
        }
        if cfg.runs < 1 {
            return Err("runs must be at least 1".to_string());
        }
        if cfg.thread_counts.is_empty() {
            return Err("thread_counts must be non-empty".to_string());
        }
        Ok(cfg)
    }
}

/// One wall-clock (or self-reported) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub variant: String,
    pub threads: u32,
    pub run: u32,
    pub seconds: f64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("compilation of `{variant}` failed:\n{log}")]
    CompileError { variant: String, log: String },
    #[error("run of `{variant}` exited with status {status}")]
    RunError { variant: String, status: i32 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Runtime support compiled in front of subset sources: output helpers the
/// analyzer treats as I/O routines.
pub const C_PRELUDE: &str = "#include <stdio.h>\n#include <math.h>\n\
static void print_val(double x) { printf(\"%.17g\\n\", x); }\n\
static void print_int(long x) { printf(\"%ld\\n\", x); }\n\n";

/// Compile one source file (with the subset prelude prepended) into `out`.
pub fn compile_variant(
    cfg: &BenchConfig,
    label: &str,
    source: &Path,
    out: &Path,
) -> Result<(), BenchError> {
    let text = std::fs::read_to_string(source)?;
    let full = format!("{C_PRELUDE}{text}");
    let c_path = out.with_extension("c");
    std::fs::write(&c_path, full)?;
    let rendered = cfg
        .compiler_command
        .replace("{input}", &c_path.display().to_string())
        .replace("{output}", &out.display().to_string())
        .replace("{flags}", &cfg.flags);
    let mut parts = rendered.split_whitespace();
    let program = parts.next().ok_or_else(|| BenchError::CompileError {
        variant: label.to_string(),
        log: "empty compiler command".to_string(),
    })?;
    let output = Command::new(program).args(parts).output()?;
    if !output.status.success() {
        return Err(BenchError::CompileError {
            variant: label.to_string(),
            log: String::from_utf8_lossy(&output.stderr).into_owned(),
        });
    }
    Ok(())
}

/// Scan program output for a self-reported time: a `Time in seconds = X`
/// line or a `SELFTIMED: X` line.
fn self_reported_seconds(stdout: &str) -> Option<f64> {
    for line in stdout.lines() {
        let lower = line.to_ascii_lowercase();
        if let Some(rest) = lower.split_once("time in seconds =").map(|x| x.1) {
            if let Ok(v) = rest.trim().parse::<f64>() {
                return Some(v);
            }
        }
        if let Some(rest) = line.trim().strip_prefix("SELFTIMED:") {
            if let Ok(v) = rest.trim().parse::<f64>() {
                return Some(v);
            }
        }
    }
    None
}

/// Compile every variant, then execute each (variant, thread count) `runs`
/// times strictly sequentially, exporting OMP_NUM_THREADS.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<TimingRecord>, BenchError> {
    let dir = tempfile::tempdir()?;
    let mut binaries = Vec::new();
    for (label, source) in &cfg.variants {
        let out = dir.path().join(format!("bench_{label}"));
        compile_variant(cfg, label, source, &out)?;
        binaries.push((label.clone(), out));
    }
    let mut records = Vec::new();
    for (label, binary) in &binaries {
        for &threads in &cfg.thread_counts {
            for run in 0..cfg.runs {
                let start = Instant::now();
                let output = Command::new(binary)
                    .env("OMP_NUM_THREADS", threads.to_string())
                    .output()?;
                let wall = start.elapsed().as_secs_f64();
                if !output.status.success() {
                    return Err(BenchError::RunError {
                        variant: label.clone(),
                        status: output.status.code().unwrap_or(-1),
                    });
                }
                let seconds = if cfg.self_timed {
                    self_reported_seconds(&String::from_utf8_lossy(&output.stdout)).unwrap_or(wall)
                } else {
                    wall
                };
                // Wall clocks have finite resolution; zero would poison
                // ratios.
                let seconds = seconds.max(1e-9);
                records.push(TimingRecord { variant: label.clone(), threads, run, seconds });
            }
        }
    }
    Ok(records)
}

/// Parallel speedup: run time of the parallel code on one core divided by
/// the run time on n cores.
pub fn speedup(t_1core: f64, t_ncore: f64) -> f64 {
    assert!(t_1core > 0.0 && t_ncore > 0.0, "times must be positive");
    t_1core / t_ncore
}

/// Speedup as reported: one decimal place.
pub fn speedup_reported(t_1core: f64, t_ncore: f64) -> f64 {
    (speedup(t_1core, t_ncore) * 10.0).round() / 10.0
}

/// Parallel overhead percent: 100 * (t_par1 - t_serial) / t_serial.
pub fn overhead(t_serial: f64, t_par1: f64) -> f64 {
    assert!(t_serial > 0.0 && t_par1 > 0.0, "times must be positive");
    100.0 * (t_par1 - t_serial) / t_serial
}

/// Overhead as reported: rounded to integer percent.
pub fn overhead_reported(t_serial: f64, t_par1: f64) -> i64 {
    overhead(t_serial, t_par1).round() as i64
}

/// Arithmetic mean over exactly the records of one (variant, threads) cell.
pub fn mean_seconds(records: &[TimingRecord], variant: &str, threads: u32) -> Option<f64> {
    let times: Vec<f64> = records
        .iter()
        .filter(|r| r.variant == variant && r.threads == threads)
        .map(|r| r.seconds)
        .collect();
    if times.is_empty() {
        return None;
    }
    Some(times.iter().sum::<f64>() / times.len() as f64)
}
