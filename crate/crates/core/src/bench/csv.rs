//! CSV emission.

use std::path::Path;

use super::sweep::ConvergenceRecord;
use crate::error::{Error, Result};

pub const HEADER: [&str; 11] = [
    "case",
    "solver",
    "kernel",
    "N",
    "mode",
    "max_error_u",
    "l2_error_u",
    "consistency_residual",
    "condition_estimate",
    "iterations",
    "wall_time_ms",
];

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

/// Records sorted by (case, solver, N).
pub fn sorted(records: &[ConvergenceRecord]) -> Vec<ConvergenceRecord> {
    let mut out = records.to_vec();
    out.sort_by(|a, b| (&a.case, &a.solver, a.n).cmp(&(&b.case, &b.solver, b.n)));
    out
}

pub fn to_csv_string(records: &[ConvergenceRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to write".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(HEADER).map_err(csv_err)?;
    for r in sorted(records) {
        w.write_record([
            r.case.clone(),
            r.solver.clone(),
            r.kernel.clone(),
            r.n.to_string(),
            r.mode.clone(),
            format_float(r.max_error_u),
            format_float(r.l2_error_u),
            r.consistency_residual.map(format_float).unwrap_or_default(),
            format_float(r.condition_estimate),
            r.iterations.to_string(),
            format_float(r.wall_time_ms),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn emit_csv(records: &[ConvergenceRecord], path: &Path) -> Result<()> {
    let text = to_csv_string(records)?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Replace the wall-time column with a fixed marker, for golden comparisons.
pub fn mask_wall_time(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|line| match line.rfind(',') {
            Some(i) if !line.starts_with("case,") => format!("{},<masked>", &line[..i]),
            _ => line.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}
