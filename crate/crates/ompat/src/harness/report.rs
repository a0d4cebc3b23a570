//! Report emission: CSV and aligned Markdown tables with the column order
//! App, Loop Name, Auto, Manual, P1..P9, plus a timing summary with per-cell
//! means and speedups. Same inputs produce byte-identical output.

use std::fmt::Write as _;
use std::path::Path;

use crate::patterns::{DiffReport, PatternProfile};

use super::{mean_seconds, speedup, speedup_reported, TimingRecord};

#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub app: String,
    pub auto_time: Option<f64>,
    pub manual_time: Option<f64>,
    pub profile: PatternProfile,
}

const HEADER: [&str; 13] = [
    "App", "Loop Name", "Auto", "Manual", "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9",
];

fn time_cell(t: Option<f64>) -> String {
    match t {
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

fn profile_cells(row: &ProfileRow) -> Vec<String> {
    let mut cells = vec![
        row.app.clone(),
        row.profile.section.to_string(),
        time_cell(row.auto_time),
        time_cell(row.manual_time),
    ];
    cells.extend(row.profile.counts.as_array().iter().map(|v| v.to_string()));
    cells
}

pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::new();
    out.push_str(&HEADER.join(",").to_lowercase().replace(' ', "_"));
    out.push('\n');
    for row in rows {
        out.push_str(&profile_cells(row).join(","));
        out.push('\n');
    }
    out
}

fn markdown_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let fmt_row = |cells: &[String], widths: &[usize]| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}", w = *w))
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    out.push_str(&fmt_row(header, &widths));
    let dashes: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&fmt_row(&dashes, &widths));
    for row in rows {
        out.push_str(&fmt_row(row, &widths));
    }
    out
}

pub fn profile_markdown(rows: &[ProfileRow]) -> String {
    let header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    let cells: Vec<Vec<String>> = rows.iter().map(profile_cells).collect();
    markdown_table(&header, &cells)
}

fn diff_cells(report: &DiffReport, app: &str) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|row| {
            let mut cells = vec![
                app.to_string(),
                row.section.to_string(),
                time_cell(row.timing.map(|t| t.0)),
                time_cell(row.timing.map(|t| t.1)),
            ];
            cells.extend(row.delta.iter().map(|d| {
                if *d > 0 {
                    format!("+{d}")
                } else {
                    d.to_string()
                }
            }));
            cells
        })
        .collect()
}

pub fn diff_csv(report: &DiffReport, app: &str) -> String {
    let mut out = String::new();
    out.push_str(&HEADER.join(",").to_lowercase().replace(' ', "_"));
    out.push('\n');
    for cells in diff_cells(report, app) {
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn diff_markdown(report: &DiffReport, app: &str) -> String {
    let header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    markdown_table(&header, &diff_cells(report, app))
}

/// Timing summary: one row per (variant, threads) with the mean over runs,
/// plus the speedup against that variant's one-core mean.
pub fn timings_csv(records: &[TimingRecord]) -> String {
    let mut out = String::from("variant,threads,runs,mean_seconds,speedup,raw_speedup\n");
    let mut variants: Vec<&str> = records.iter().map(|r| r.variant.as_str()).collect();
    variants.dedup();
    let mut seen = std::collections::BTreeSet::new();
    for variant in variants {
        if !seen.insert(variant) {
            continue;
        }
        let mut threads: Vec<u32> =
            records.iter().filter(|r| r.variant == variant).map(|r| r.threads).collect();
        threads.sort_unstable();
        threads.dedup();
        let base = mean_seconds(records, variant, 1);
        for t in threads {
            let mean = mean_seconds(records, variant, t).unwrap();
            let runs = records.iter().filter(|r| r.variant == variant && r.threads == t).count();
            let (rounded, raw) = match base {
                Some(b) if t != 1 => (
                    format!("{}", speedup_reported(b, mean)),
                    format!("{}", speedup(b, mean)),
                ),
                _ => (String::new(), String::new()),
            };
            writeln!(out, "{variant},{t},{runs},{mean},{rounded},{raw}").unwrap();
        }
    }
    out
}

/// Raw record dump: one line per (variant, threads, run).
pub fn records_csv(records: &[TimingRecord]) -> String {
    let mut out = String::from("variant,threads,run,seconds\n");
    for r in records {
        writeln!(out, "{},{},{},{}", r.variant, r.threads, r.run, r.seconds).unwrap();
    }
    out
}

/// Write CSV and Markdown files next to each other: `<base>.csv` and
/// `<base>.md`. Profile rows, an optional diff, and a timing summary all
/// land in the same pair of files.
pub fn emit_report(
    profiles: &[ProfileRow],
    diff: Option<(&DiffReport, &str)>,
    timings: &[TimingRecord],
    base: &Path,
) -> std::io::Result<()> {
    let mut csv = String::new();
    let mut md = String::new();
    if !profiles.is_empty() {
        csv.push_str(&profile_csv(profiles));
        md.push_str(&profile_markdown(profiles));
    }
    if let Some((report, app)) = diff {
        if !csv.is_empty() {
            csv.push('\n');
            md.push('\n');
        }
        csv.push_str(&diff_csv(report, app));
        md.push_str(&diff_markdown(report, app));
    }
    if !timings.is_empty() {
        if !csv.is_empty() {
            csv.push('\n');
            md.push('\n');
        }
        csv.push_str(&timings_csv(timings));
        md.push_str(&timings_csv(timings).replace(',', " | "));
    }
    std::fs::write(base.with_extension("csv"), csv)?;
    std::fs::write(base.with_extension("md"), md)?;
    Ok(())
}
