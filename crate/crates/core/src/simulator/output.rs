//! CSV artifacts for runs and batches.
//!
//! Floats are written with nine significant digits so that reruns produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::{BatchResults, LinkId, RunMetrics};
use crate::csvfmt::sig9;
use crate::rate_control::Algorithm;

pub const RUN_HEADER: &str = "time_s,link,delivered_bits,distance_m,first_stage_mcs,busy_time_s";
pub const SUMMARY_HEADER: &str =
    "seed,algorithm,link,mean_throughput_bps,delivered_packets,attempts,retry_drops,queue_drops";
pub const TRACE_HEADER: &str = "time_s,link,max_tp,max_tp2,max_prob,mcs_tara,first_stage_mcs";

/// Directory holding the per-run files inside a batch directory.
pub const RUNS_DIR: &str = "runs";
pub const SUMMARY_FILE: &str = "summary.csv";

pub fn run_file_name(seed: u64, algorithm: Algorithm) -> String {
    format!("seed{seed}_{algorithm}.csv")
}

pub fn trace_file_name(seed: u64, algorithm: Algorithm) -> String {
    format!("seed{seed}_{algorithm}_trace.csv")
}

/// One row per (second, link).
pub fn run_csv(run: &RunMetrics) -> String {
    let mut out = String::from(RUN_HEADER);
    out.push('\n');
    let seconds = run.access.delivered_bits.len();
    for s in 0..seconds {
        for link in LinkId::ALL {
            let m = run.link(link);
            writeln!(
                out,
                "{s},{link},{},{},{},{}",
                m.delivered_bits[s],
                sig9(m.distance_m[s]),
                m.first_stage_mcs[s],
                sig9(m.busy_time_s[s]),
            )
            .unwrap();
        }
    }
    out
}

/// The per-τ decision trace; empty cells for absent fields.
pub fn trace_csv(run: &RunMetrics) -> String {
    let cell =
        |m: Option<crate::channel::McsIndex>| m.map(|m| m.get().to_string()).unwrap_or_default();
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for row in &run.trace {
        let s = &row.snapshot;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig9(row.time),
            row.link,
            cell(s.max_tp),
            cell(s.max_tp2),
            cell(s.max_prob),
            cell(s.mcs_tara),
            s.first_stage_mcs.get(),
        )
        .unwrap();
    }
    out
}

pub fn summary_csv(batch: &BatchResults) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for run in batch.values() {
        for link in LinkId::ALL {
            let m = run.link(link);
            writeln!(
                out,
                "{},{},{link},{},{},{},{},{}",
                run.seed,
                run.algorithm,
                sig9(m.mean_throughput_bps()),
                m.delivered_packets,
                m.attempts,
                m.retry_drops,
                m.queue_drops,
            )
            .unwrap();
        }
    }
    out
}

/// Writes `summary.csv` and one file per run (plus traces when recorded)
/// under `dir`. Returns the paths written.
pub fn write_batch(dir: &Path, batch: &BatchResults) -> io::Result<Vec<PathBuf>> {
    let runs = dir.join(RUNS_DIR);
    fs::create_dir_all(&runs)?;
    let mut written = Vec::new();
    for run in batch.values() {
        let path = runs.join(run_file_name(run.seed, run.algorithm));
        fs::write(&path, run_csv(run))?;
        written.push(path);
        if !run.trace.is_empty() {
            let path = runs.join(trace_file_name(run.seed, run.algorithm));
            fs::write(&path, trace_csv(run))?;
            written.push(path);
        }
    }
    let path = dir.join(SUMMARY_FILE);
    fs::write(&path, summary_csv(batch))?;
    written.push(path);
    Ok(written)
}
