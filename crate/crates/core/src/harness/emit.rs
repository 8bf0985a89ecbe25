use std::path::Path;

use super::spec::OutputFormat;
use super::stats::{AggregateStats, CellStats};
use super::HarnessError;

/// CSV column order. Stable across releases; new columns go at the end.
pub const CSV_COLUMNS: [&str; 21] = [
    "cell",
    "variant",
    "attack",
    "e_max",
    "n",
    "p_x",
    "p_y",
    "p_z",
    "trials",
    "completed",
    "aborted",
    "abort_rate",
    "qber_mean",
    "qber_std",
    "sifted_fraction_mean",
    "sifted_fraction_std",
    "eve_mi_mean",
    "eve_mi_std",
    "eve_mi_pooled",
    "leaked_bits_mean",
    "leaked_bits_std",
];

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Six significant digits, `%g` style: fixed notation for exponents in
/// `-4..6`, scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

/// `x` rounded to what [`format_sig`] prints.
pub fn round_sig(x: f64) -> f64 {
    format_sig(x).parse().unwrap_or(x)
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

fn rounded(c: &CellStats) -> CellStats {
    let r = |x: Option<f64>| x.map(round_sig);
    CellStats {
        e_max: round_sig(c.e_max),
        p_x: round_sig(c.p_x),
        p_y: round_sig(c.p_y),
        p_z: round_sig(c.p_z),
        abort_rate: round_sig(c.abort_rate),
        qber_mean: r(c.qber_mean),
        qber_std: r(c.qber_std),
        sifted_fraction_mean: r(c.sifted_fraction_mean),
        sifted_fraction_std: r(c.sifted_fraction_std),
        eve_mi_mean: r(c.eve_mi_mean),
        eve_mi_std: r(c.eve_mi_std),
        eve_mi_pooled: r(c.eve_mi_pooled),
        leaked_bits_mean: r(c.leaked_bits_mean),
        leaked_bits_std: r(c.leaked_bits_std),
        ..c.clone()
    }
}

fn csv_row(c: &CellStats) -> Vec<String> {
    vec![
        c.cell.to_string(),
        c.variant.to_string(),
        c.attack.clone(),
        format_sig(c.e_max),
        c.n.to_string(),
        format_sig(c.p_x),
        format_sig(c.p_y),
        format_sig(c.p_z),
        c.trials.to_string(),
        c.completed.to_string(),
        c.aborted.to_string(),
        format_sig(c.abort_rate),
        opt(c.qber_mean),
        opt(c.qber_std),
        opt(c.sifted_fraction_mean),
        opt(c.sifted_fraction_std),
        opt(c.eve_mi_mean),
        opt(c.eve_mi_std),
        opt(c.eve_mi_pooled),
        opt(c.leaked_bits_mean),
        opt(c.leaked_bits_std),
    ]
}

/// Serializes the table: CSV with a header row, or one JSON object per cell.
pub fn emit_results(stats: &AggregateStats, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_COLUMNS).expect("in-memory write");
            for c in &stats.cells {
                w.write_record(csv_row(c)).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
        }
        OutputFormat::Records => stats
            .cells
            .iter()
            .map(|c| serde_json::to_string(&rounded(c)).expect("stats serialize") + "\n")
            .collect(),
    }
}

pub fn write_results(stats: &AggregateStats, format: OutputFormat, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, emit_results(stats, format)).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_row(row: &csv::StringRecord, line: usize) -> Result<CellStats, HarnessError> {
    let bad = |col: &str, e: String| HarnessError::Parse(format!("line {line}, column {col}: {e}"));
    let field = |i: usize| row.get(i).unwrap_or("");
    let num = |i: usize| -> Result<f64, HarnessError> {
        field(i).parse().map_err(|e: std::num::ParseFloatError| bad(CSV_COLUMNS[i], e.to_string()))
    };
    let int = |i: usize| -> Result<usize, HarnessError> {
        field(i).parse().map_err(|e: std::num::ParseIntError| bad(CSV_COLUMNS[i], e.to_string()))
    };
    let maybe = |i: usize| -> Result<Option<f64>, HarnessError> {
        if field(i).is_empty() {
            Ok(None)
        } else {
            num(i).map(Some)
        }
    };
    Ok(CellStats {
        cell: int(0)?,
        variant: field(1).parse().map_err(|e| bad("variant", e))?,
        attack: field(2).to_string(),
        e_max: num(3)?,
        n: int(4)?,
        p_x: num(5)?,
        p_y: num(6)?,
        p_z: num(7)?,
        trials: int(8)?,
        completed: int(9)?,
        aborted: int(10)?,
        abort_rate: num(11)?,
        qber_mean: maybe(12)?,
        qber_std: maybe(13)?,
        sifted_fraction_mean: maybe(14)?,
        sifted_fraction_std: maybe(15)?,
        eve_mi_mean: maybe(16)?,
        eve_mi_std: maybe(17)?,
        eve_mi_pooled: maybe(18)?,
        leaked_bits_mean: maybe(19)?,
        leaked_bits_std: maybe(20)?,
    })
}

/// Inverse of [`emit_results`], up to print precision.
pub fn parse_results(text: &str, format: OutputFormat) -> Result<AggregateStats, HarnessError> {
    let mut cells = Vec::new();
    match format {
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            let header = r.headers().map_err(|e| HarnessError::Parse(e.to_string()))?;
            if header.iter().ne(CSV_COLUMNS) {
                return Err(HarnessError::Parse("unexpected CSV header".into()));
            }
            for (i, row) in r.records().enumerate() {
                let row = row.map_err(|e| HarnessError::Parse(e.to_string()))?;
                if row.len() != CSV_COLUMNS.len() {
                    return Err(HarnessError::Parse(format!("line {}: {} fields", i + 2, row.len())));
                }
                cells.push(parse_row(&row, i + 2)?);
            }
        }
        OutputFormat::Records => {
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                cells.push(
                    serde_json::from_str(line).map_err(|e| HarnessError::Parse(format!("line {}: {e}", i + 1)))?,
                );
            }
        }
    }
    Ok(AggregateStats { cells })
}
