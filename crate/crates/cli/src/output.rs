use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// Serializes `doc` as pretty JSON with a trailing newline.
pub fn json<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Renders flat rows as CSV with a header line.
pub fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
}

/// Joins a vector into one CSV cell, `;`-separated.
pub fn cell(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Writes to `out`, or to standard output when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Input(format!("cannot write to standard output: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        name: &'static str,
        b: String,
        level: f64,
    }

    #[test]
    fn csv_has_header_and_rows() {
        let text = csv_rows(&[
            Row {
                name: "x",
                b: cell(&[1.0, -0.5]),
                level: 0.25,
            },
            Row {
                name: "y",
                b: cell(&[]),
                level: 0.0,
            },
        ])
        .unwrap();
        assert_eq!(text, "name,b,level\nx,1;-0.5,0.25\ny,,0.0\n");
    }
}
