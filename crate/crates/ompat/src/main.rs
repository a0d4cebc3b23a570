//! Command-line front door: analyze, transform, compare and bench
//! subcommands over the library. Exit codes: 0 success, 1 usage,
//! 2 parse/analysis error, 3 external-compiler failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ompat::analysis::side_effects::AnalysisConfig;
use ompat::frontend::{self, Origin, SourceUnit};
use ompat::harness::{self, report, BenchConfig, BenchError};
use ompat::patterns::{self, Annotations};
use ompat::transforms::{self, TransformPlan};

#[derive(Parser)]
#[command(name = "ompat", version, about = "OpenMP pattern analyzer and transformer")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct ConfigArg {
    /// Analysis config file (key = value; pure_functions = name, ...).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute per-section pattern profiles of one source file.
    Analyze {
        file: PathBuf,
        /// Annotation sidecar: `function#a-#b p9=0|1` lines.
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Output base path; writes <out>.csv and <out>.md (the .csv
        /// extension is stripped first).
        #[arg(long)]
        out: PathBuf,
        /// Also include the program summary row.
        #[arg(long)]
        program_row: bool,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Apply rewrite passes and print the transformed source.
    Transform {
        file: PathBuf,
        /// Comma-separated pass list:
        /// inline,parallelize,region,reduction=atomic|critical,schedule,
        /// condpar,nowait,threadprivate=to_loop_private|to_threadprivate
        #[arg(long)]
        passes: String,
        /// Conditional-parallelization workload threshold.
        #[arg(long, default_value_t = 10000)]
        threshold: i64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Diff the pattern profiles of two versions of the same program.
    Compare {
        auto: PathBuf,
        manual: PathBuf,
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Report format printed to stdout.
        #[arg(long, value_parser = ["md", "csv"], default_value = "md")]
        report: String,
    },
    /// Compile and time program variants with the system compiler.
    Bench {
        /// Bench config file (variant/threads/runs/compiler/flags lines).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's run count.
        #[arg(long)]
        runs: Option<u32>,
        /// Override the config's thread counts, e.g. 1,4.
        #[arg(long)]
        threads: Option<String>,
        /// Prefer self-reported times over wall clock.
        #[arg(long)]
        self_timed: bool,
        /// Raw records CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits; anything else is usage.
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl ToString) -> Self {
        CliError { code: 1, message: message.to_string() }
    }

    fn analysis(message: impl ToString) -> Self {
        CliError { code: 2, message: message.to_string() }
    }

    fn compiler(message: impl ToString) -> Self {
        CliError { code: 3, message: message.to_string() }
    }
}

fn load_unit(path: &PathBuf, origin: Origin) -> Result<(SourceUnit, frontend::Ast), CliError> {
    let unit = SourceUnit::from_file(path, origin)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    match frontend::parse(&unit) {
        Ok(ast) => Ok((unit, ast)),
        Err(e) => Err(CliError::analysis(e.render(&unit))),
    }
}

fn load_annotations(path: &Option<PathBuf>) -> Result<Annotations, CliError> {
    match path {
        None => Ok(Annotations::default()),
        Some(p) => Annotations::load(p)
            .map_err(|e| CliError::analysis(format!("{}: {e}", p.display()))),
    }
}

fn load_config(arg: &ConfigArg) -> Result<AnalysisConfig, CliError> {
    match &arg.config {
        None => Ok(AnalysisConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            AnalysisConfig::parse(&text)
                .map_err(|e| CliError::analysis(format!("{}: {e}", p.display())))
        }
    }
}

fn app_label(path: &PathBuf) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Analyze { file, annotations, out, program_row, config } => {
            let _ = load_config(&config)?;
            let (_, ast) = load_unit(&file, Origin::Manual)?;
            let annotations = load_annotations(&annotations)?;
            let app = app_label(&file);
            let mut rows = Vec::new();
            for section in patterns::unit_sections(&ast, &annotations) {
                let profile = patterns::profile_section(&ast, &section, &annotations)
                    .map_err(|e| CliError::analysis(e.to_string()))?;
                rows.push(report::ProfileRow {
                    app: app.clone(),
                    auto_time: None,
                    manual_time: None,
                    profile,
                });
            }
            if program_row {
                rows.push(report::ProfileRow {
                    app: app.clone(),
                    auto_time: None,
                    manual_time: None,
                    profile: patterns::profile_program(&ast, &annotations),
                });
            }
            let base = out.with_extension("");
            report::emit_report(&rows, None, &[], &base)
                .map_err(|e| CliError::usage(e.to_string()))?;
            println!("wrote {}.csv and {}.md", base.display(), base.display());
            Ok(())
        }
        Cmd::Transform { file, passes, threshold, out, config } => {
            let config = load_config(&config)?;
            let (_, ast) = load_unit(&file, Origin::Serial)?;
            let plan = TransformPlan::parse(&passes, threshold)
                .map_err(|e| CliError::usage(e.to_string()))?;
            let result = transforms::run_plan(&ast, &plan, &config);
            std::fs::write(&out, frontend::print(&result.ast).text)
                .map_err(|e| CliError::usage(format!("{}: {e}", out.display())))?;
            for entry in &result.log {
                println!("{entry}");
            }
            for entry in &result.refusals {
                println!("{entry}");
            }
            Ok(())
        }
        Cmd::Compare { auto, manual, annotations, report: format } => {
            let (_, auto_ast) = load_unit(&auto, Origin::AutoParallelized)?;
            let (_, manual_ast) = load_unit(&manual, Origin::Manual)?;
            let annotations = load_annotations(&annotations)?;
            let diff = patterns::compare_versions(&auto_ast, &manual_ast, &annotations)
                .map_err(|e| CliError::analysis(e.to_string()))?;
            let app = app_label(&manual);
            let text = match format.as_str() {
                "csv" => report::diff_csv(&diff, &app),
                _ => report::diff_markdown(&diff, &app),
            };
            print!("{text}");
            Ok(())
        }
        Cmd::Bench { config, runs, threads, self_timed, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::usage(format!("{}: {e}", config.display())))?;
            let mut cfg = BenchConfig::parse(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", config.display())))?;
            if let Some(runs) = runs {
                if runs < 1 {
                    return Err(CliError::usage("--runs must be at least 1"));
                }
                cfg.runs = runs;
            }
            if let Some(threads) = threads {
                cfg.thread_counts = threads
                    .split(',')
                    .map(|t| t.trim().parse::<u32>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::usage(format!("--threads: {e}")))?;
            }
            if self_timed {
                cfg.self_timed = true;
            }
            let records = harness::run_bench(&cfg).map_err(|e| match e {
                BenchError::CompileError { .. } => CliError::compiler(e.to_string()),
                BenchError::RunError { .. } => CliError::compiler(e.to_string()),
                BenchError::Io(e) => CliError::usage(e.to_string()),
            })?;
            std::fs::write(&out, report::records_csv(&records))
                .map_err(|e| CliError::usage(format!("{}: {e}", out.display())))?;
            print!("{}", report::timings_csv(&records));
            Ok(())
        }
    }
}
