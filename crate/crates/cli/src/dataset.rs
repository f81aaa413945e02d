//! One positive number per line, with an optional header line.

use std::path::Path;

use crate::error::{CliError, CliResult};

/// Parses dataset text. A first line that does not parse as a number is
/// taken as a header; blank lines are skipped; for lines with several
/// comma-separated fields only the first is read.
pub fn parse_dataset(text: &str) -> CliResult<Vec<f64>> {
    let mut values = Vec::new();
    let mut first = true;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim().trim_start_matches('\u{feff}');
        if line.is_empty() {
            continue;
        }
        let field = line.split(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(CliError::Input(format!("line {}: value {v} is not a positive finite number", lineno + 1)))
            }
            Err(_) if first => {}
            Err(_) => return Err(CliError::Input(format!("line {}: cannot parse '{field}' as a number", lineno + 1))),
        }
        first = false;
    }
    if values.is_empty() {
        return Err(CliError::Input("dataset contains no observations".into()));
    }
    Ok(values)
}

pub fn read_dataset(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    parse_dataset(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}
