//! ompat: a source-to-source OpenMP pattern analyzer and transformer for a
//! C subset.
//!
//! Module organization:
//! - `frontend`: lexer, parser, printer and loop-section naming
//! - `analysis`: dependence testing, privatization, reduction recognition,
//!   side-effect summaries, inline expansion, cross-loop conflict checks and
//!   cross-region liveness, plus the brute-force oracles used to validate them
//! - `patterns`: per-section P1-P9 pattern profiles and version diffing
//! - `transforms`: the rewrite passes (parallelize, region formation, nowait,
//!   array-reduction lowering, scheduling, conditional parallelization,
//!   threadprivate conversion)
//! - `costmodel`: workload estimation, profitability and imbalance signals
//! - `harness`: external compile-and-time benchmarking, speedup/overhead
//!   arithmetic and report emission
//! - `sim`: an interpreter for the subset with simulated thread teams,
//!   used by oracles and tests

pub mod analysis;
pub mod costmodel;
pub mod frontend;
pub mod harness;
pub mod patterns;
pub mod sim;
pub mod transforms;
