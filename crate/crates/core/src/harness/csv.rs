use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::runner::RegretTrace;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("no traces to write")]
    Empty,
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Fixed-point rendering with 12 significant digits.
pub fn format_value(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0".to_string() } else { v.to_string() };
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub const HEADER: &str = "t,replicate,loss,cum_loss,comparator_cum,regret";

/// CSV text: header, then every round of replicate 0, then replicate 1, ...
pub fn render_csv(traces: &[RegretTrace]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for tr in traces {
        for t in 0..tr.len() {
            let fields = [
                (t + 1).to_string(),
                tr.replicate.to_string(),
                format_value(tr.losses[t]),
                format_value(tr.cum_losses[t]),
                format_value(tr.comparator_cum[t]),
                format_value(tr.regret[t]),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn emit_csv(traces: &[RegretTrace], path: &Path) -> Result<(), CsvError> {
    if traces.is_empty() {
        return Err(CsvError::Empty);
    }
    fs::write(path, render_csv(traces))
        .map_err(|source| CsvError::Io { path: path.to_path_buf(), source })
}
