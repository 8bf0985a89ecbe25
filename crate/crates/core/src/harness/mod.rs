//! Monte Carlo batches over a parameter grid.
//!
//! An [`ExperimentSpec`] expands into grid cells; each cell runs `trials`
//! sessions with seeds from [`trial_seed`], so every cell sees the same
//! seed sequence and cells can be compared trial by trial. Sessions run in
//! parallel but results are collected in grid order, so the emitted bytes
//! depend only on the spec.

mod emit;
mod spec;
mod stats;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::GuessTally;
use crate::protocol::{run_session, ProtocolError, SessionOutcome, Variant};

pub use emit::{emit_results, format_sig, parse_results, round_sig, write_results, CSV_COLUMNS};
pub use spec::{trial_seed, Cell, ExperimentSpec, OutputFormat, OutputSpec, Sweep, TRIAL_SEED_MULTIPLIER};
pub use stats::{aggregate_records, cell_stats, mean_std, AggregateStats, CellStats, SessionRecord};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
}

/// Runs every trial of every cell and returns the per-session records in
/// grid order, trials ascending within a cell.
pub fn run_records(spec: &ExperimentSpec, keep_keys: bool) -> Result<Vec<SessionRecord>, HarnessError> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .flat_map(|c| (0..spec.trials).map(move |t| (c.index, t)))
        .collect();
    jobs.into_par_iter()
        .map(|(cell, trial)| {
            let config = spec.trial_config(cell, trial)?;
            let outcome = run_session(&config)?;
            Ok(SessionRecord::from_outcome(cell, trial, &config, &outcome, keep_keys))
        })
        .collect()
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<AggregateStats, HarnessError> {
    Ok(aggregate_records(&run_records(spec, false)?))
}

/// Re-runs a single trial, transcript included.
pub fn replay_trial(spec: &ExperimentSpec, cell: usize, trial: usize) -> Result<SessionOutcome, HarnessError> {
    spec.validate()?;
    Ok(run_session(&spec.trial_config(cell, trial)?)?)
}

pub fn emit_dump(records: &[SessionRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

pub fn parse_dump(text: &str) -> Result<Vec<SessionRecord>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| HarnessError::Parse(format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn read_spec(path: &Path) -> Result<ExperimentSpec, HarnessError> {
    let text = read_text(path)?;
    ExperimentSpec::from_toml_str(&text)
}

pub fn read_text(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Eve's information per grid cell, recomputed from a dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveCellAnalysis {
    pub cell: usize,
    pub variant: Variant,
    pub attack: String,
    pub sessions: usize,
    pub completed: usize,
    pub eve_mi_mean: Option<f64>,
    pub eve_mi_std: Option<f64>,
    /// Standard error of `eve_mi_mean`.
    pub eve_mi_se: Option<f64>,
    pub eve_mi_pooled: Option<f64>,
    /// Fraction of sifted bits Eve guessed right, pooled.
    pub eve_agreement: Option<f64>,
}

pub fn analyze_records(records: &[SessionRecord]) -> Vec<EveCellAnalysis> {
    let mut by_cell: std::collections::BTreeMap<usize, Vec<&SessionRecord>> = Default::default();
    for r in records {
        by_cell.entry(r.cell).or_default().push(r);
    }
    by_cell
        .into_iter()
        .map(|(cell, group)| {
            let done: Vec<_> = group.iter().filter(|r| !r.aborted).collect();
            let mis: Vec<f64> = done.iter().filter_map(|r| r.eve_mi).collect();
            let mut pooled = GuessTally::default();
            let tallies: Vec<_> = done.iter().filter_map(|r| r.eve_tally).collect();
            for t in &tallies {
                pooled.merge(t);
            }
            let moments = mean_std(&mis);
            EveCellAnalysis {
                cell,
                variant: group[0].variant,
                attack: group[0].attack.clone(),
                sessions: group.len(),
                completed: done.len(),
                eve_mi_mean: moments.map(|m| m.0),
                eve_mi_std: moments.map(|m| m.1),
                eve_mi_se: moments.map(|m| m.1 / (mis.len() as f64).sqrt()),
                eve_mi_pooled: (!tallies.is_empty()).then(|| pooled.mutual_information()),
                eve_agreement: (!tallies.is_empty()).then(|| pooled.agreement()),
            }
        })
        .collect()
}

pub const ANALYSIS_COLUMNS: [&str; 10] = [
    "cell",
    "variant",
    "attack",
    "sessions",
    "completed",
    "eve_mi_mean",
    "eve_mi_std",
    "eve_mi_se",
    "eve_mi_pooled",
    "eve_agreement",
];

pub fn emit_analysis(rows: &[EveCellAnalysis]) -> String {
    let opt = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ANALYSIS_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.cell.to_string(),
            r.variant.to_string(),
            r.attack.clone(),
            r.sessions.to_string(),
            r.completed.to_string(),
            opt(r.eve_mi_mean),
            opt(r.eve_mi_std),
            opt(r.eve_mi_se),
            opt(r.eve_mi_pooled),
            opt(r.eve_agreement),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}
