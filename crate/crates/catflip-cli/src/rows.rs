//! Output rows and their CSV/JSON serialization.
//!
//! Floating-point values are written with 17 significant digits so that
//! every `f64` round-trips exactly and identical configs produce
//! byte-identical files.

/// Reliability classification of one sweep row, ordered by severity.
/// `ok` < `floor` (rate below the measurable floor) < `ambiguous`
/// (eigenvalue selection or route cross-check ambiguous) < `truncation`
/// (cutoff inadequate or not converged).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Reliability {
    Ok,
    Floor,
    Ambiguous,
    Truncation,
}

impl Reliability {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Floor => "floor",
            Self::Ambiguous => "ambiguous",
            Self::Truncation => "truncation",
        }
    }

    /// Keep the more severe of the current and the new classification.
    pub fn degrade(&mut self, new: Reliability) {
        if new > *self {
            *self = new;
        }
    }
}

/// One α² grid point of a rate computation.  Gamma fields are nonnegative
/// when computed and `None` when the corresponding method was not
/// requested (empty CSV cell, JSON `null`).
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub alpha2: f64,
    pub gamma_analytic_first: Option<f64>,
    pub gamma_analytic_second: Option<f64>,
    pub gamma_analytic_total: Option<f64>,
    pub gamma_spectral: Option<f64>,
    pub overlap_score: Option<f64>,
    pub dim_used: Option<usize>,
    pub reliability_flag: Reliability,
}

/// The contractual CSV header.
pub const CSV_HEADER: &str = "alpha2,gamma_analytic_first,gamma_analytic_second,\
gamma_analytic_total,gamma_spectral,overlap_score,dim_used,reliability_flag";

/// 17-significant-digit scientific notation (one integer digit plus
/// sixteen fractional digits); also a valid JSON number.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

fn json_cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => fmt17(x),
        _ => "null".into(),
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt17(r.alpha2),
            csv_cell(r.gamma_analytic_first),
            csv_cell(r.gamma_analytic_second),
            csv_cell(r.gamma_analytic_total),
            csv_cell(r.gamma_spectral),
            csv_cell(r.overlap_score),
            r.dim_used.map(|d| d.to_string()).unwrap_or_default(),
            r.reliability_flag.as_str(),
        ));
    }
    out
}

fn row_to_json_object(r: &SweepRow) -> String {
    format!(
        "{{\"alpha2\":{},\"gamma_analytic_first\":{},\"gamma_analytic_second\":{},\
\"gamma_analytic_total\":{},\"gamma_spectral\":{},\"overlap_score\":{},\
\"dim_used\":{},\"reliability_flag\":\"{}\"}}",
        fmt17(r.alpha2),
        json_cell(r.gamma_analytic_first),
        json_cell(r.gamma_analytic_second),
        json_cell(r.gamma_analytic_total),
        json_cell(r.gamma_spectral),
        json_cell(r.overlap_score),
        r.dim_used.map(|d| d.to_string()).unwrap_or_else(|| "null".into()),
        r.reliability_flag.as_str(),
    )
}

/// JSON array mirroring the CSV columns.
pub fn rows_to_json(rows: &[SweepRow]) -> String {
    let body: Vec<String> = rows.iter().map(row_to_json_object).collect();
    format!("[\n{}\n]\n", body.join(",\n"))
}

/// Single-row JSON object (the `rate` subcommand's natural shape).
pub fn row_to_json(row: &SweepRow) -> String {
    let mut out = row_to_json_object(row);
    out.push('\n');
    out
}

/// Leakage trace serialization: `(t, l(t))` pairs.
pub fn leakage_to_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("t,leakage\n");
    for &(t, l) in points {
        out.push_str(&format!("{},{}\n", fmt17(t), fmt17(l)));
    }
    out
}

pub fn leakage_to_json(points: &[(f64, f64)]) -> String {
    let body: Vec<String> = points
        .iter()
        .map(|&(t, l)| format!("{{\"t\":{},\"leakage\":{}}}", fmt17(t), fmt17(l)))
        .collect();
    format!("[\n{}\n]\n", body.join(",\n"))
}
