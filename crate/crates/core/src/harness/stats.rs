use serde::{Deserialize, Serialize};

use crate::adversary::{session_eve_tally, EveSummary, GuessTally};
use crate::protocol::{SessionConfig, SessionOutcome, Variant};

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// One session as written to a dump file (JSON lines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub cell: usize,
    pub trial: usize,
    pub seed: u64,
    pub variant: Variant,
    pub attack: String,
    pub e_max: f64,
    pub n: usize,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub aborted: bool,
    pub abort_reason: Option<String>,
    pub qber: f64,
    pub sample_error_rate: Option<f64>,
    pub sifted_fraction: f64,
    pub sifted_length: usize,
    pub leaked_bits: usize,
    pub eve_mi: Option<f64>,
    pub eve_tally: Option<GuessTally>,
    pub eve: EveSummary,
    pub chsh_s: Option<f64>,
    /// Alice's sifted key as a `0`/`1` string, when keys are kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    /// Eve's guesses aligned with `key`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eve_guesses: Option<String>,
}

impl SessionRecord {
    pub fn from_outcome(cell: usize, trial: usize, config: &SessionConfig, outcome: &SessionOutcome, keep_keys: bool) -> Self {
        let tally = session_eve_tally(outcome);
        Self {
            cell,
            trial,
            seed: config.seed,
            variant: config.variant,
            attack: config.attack.to_string(),
            e_max: config.e_max,
            n: config.n,
            p_x: config.channel.p_x(),
            p_y: config.channel.p_y(),
            p_z: config.channel.p_z(),
            aborted: outcome.is_aborted(),
            abort_reason: outcome.aborted.map(|r| r.label().to_string()),
            qber: outcome.qber_estimate,
            sample_error_rate: outcome.sample_error_rate,
            sifted_fraction: outcome.sifted_fraction,
            sifted_length: outcome.sifted_key_alice.len(),
            leaked_bits: outcome.leaked_bits,
            eve_mi: tally.map(|t| t.mutual_information()),
            eve_tally: tally,
            eve: outcome.eve_record.summary(),
            chsh_s: outcome.chsh.as_ref().map(|c| c.s),
            key: keep_keys.then(|| bit_string(&outcome.sifted_key_alice)),
            eve_guesses: if keep_keys {
                outcome.eve_guesses.as_deref().map(bit_string)
            } else {
                None
            },
        }
    }
}

/// Aggregates for one grid cell. Means and deviations run over completed
/// sessions only and are `None` when there are none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub cell: usize,
    pub variant: Variant,
    pub attack: String,
    pub e_max: f64,
    pub n: usize,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub trials: usize,
    pub completed: usize,
    pub aborted: usize,
    pub abort_rate: f64,
    pub qber_mean: Option<f64>,
    pub qber_std: Option<f64>,
    pub sifted_fraction_mean: Option<f64>,
    pub sifted_fraction_std: Option<f64>,
    pub eve_mi_mean: Option<f64>,
    pub eve_mi_std: Option<f64>,
    /// Mutual information of the joint counts pooled over the cell.
    pub eve_mi_pooled: Option<f64>,
    pub leaked_bits_mean: Option<f64>,
    pub leaked_bits_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct AggregateStats {
    pub cells: Vec<CellStats>,
}

/// Mean and sample standard deviation (`n − 1`; zero for a single value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

fn split(values: &[f64]) -> (Option<f64>, Option<f64>) {
    match mean_std(values) {
        Some((m, s)) => (Some(m), Some(s)),
        None => (None, None),
    }
}

/// Summarizes the records of one cell. `records` must be nonempty and all
/// belong to the same cell.
pub fn cell_stats(records: &[&SessionRecord]) -> CellStats {
    let first = records[0];
    let done: Vec<&&SessionRecord> = records.iter().filter(|r| !r.aborted).collect();
    let collect = |f: fn(&SessionRecord) -> Option<f64>| -> Vec<f64> { done.iter().filter_map(|r| f(r)).collect() };
    let (qber_mean, qber_std) = split(&collect(|r| Some(r.qber)));
    let (sifted_fraction_mean, sifted_fraction_std) = split(&collect(|r| Some(r.sifted_fraction)));
    let (eve_mi_mean, eve_mi_std) = split(&collect(|r| r.eve_mi));
    let (leaked_bits_mean, leaked_bits_std) = split(&collect(|r| Some(r.leaked_bits as f64)));
    let mut pooled = GuessTally::default();
    let mut any_tally = false;
    for tally in done.iter().filter_map(|r| r.eve_tally.as_ref()) {
        pooled.merge(tally);
        any_tally = true;
    }
    let aborted = records.len() - done.len();
    CellStats {
        cell: first.cell,
        variant: first.variant,
        attack: first.attack.clone(),
        e_max: first.e_max,
        n: first.n,
        p_x: first.p_x,
        p_y: first.p_y,
        p_z: first.p_z,
        trials: records.len(),
        completed: done.len(),
        aborted,
        abort_rate: aborted as f64 / records.len() as f64,
        qber_mean,
        qber_std,
        sifted_fraction_mean,
        sifted_fraction_std,
        eve_mi_mean,
        eve_mi_std,
        eve_mi_pooled: any_tally.then(|| pooled.mutual_information()),
        leaked_bits_mean,
        leaked_bits_std,
    }
}

/// Groups records by cell (ascending) and summarizes each group.
pub fn aggregate_records(records: &[SessionRecord]) -> AggregateStats {
    let mut by_cell: std::collections::BTreeMap<usize, Vec<&SessionRecord>> = Default::default();
    for r in records {
        by_cell.entry(r.cell).or_default().push(r);
    }
    AggregateStats {
        cells: by_cell.values().map(|group| cell_stats(group)).collect(),
    }
}
