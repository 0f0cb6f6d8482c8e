//! CSV emission: UTF-8, header row, fixed column order, 12 significant
//! digits, `\n` line endings. Identical configuration must produce
//! byte-identical output regardless of worker count.

use std::io::Write;
use std::path::Path;

use gauss_halasz::{Error, Result};

/// Formats a float with 12 significant digits.
pub fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&'static str]) -> Csv {
        Csv {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "column count mismatch");
        for c in &cells {
            assert!(
                !c.contains(',') && !c.contains('\n'),
                "cell `{c}` would corrupt the CSV structure"
            );
        }
        self.rows.push(cells);
    }

    pub fn to_text(&self) -> Result<String> {
        if self.rows.is_empty() {
            return Err(Error::InvalidArgument(
                "refusing to emit an empty report".into(),
            ));
        }
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    /// Writes to `path`, or to stdout when no path is given. On error no
    /// file is created.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        let text = self.to_text()?;
        match path {
            Some(p) => std::fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_an_error() {
        let csv = Csv::new(&["a", "b"]);
        assert!(csv.to_text().is_err());
    }

    #[test]
    fn formatting_round_trips_to_1e10() {
        for &x in &[std::f64::consts::PI, -1.234567890123e-7, 6.02e23] {
            let back: f64 = sig(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-10);
        }
    }

    #[test]
    fn single_row_layout() {
        let mut csv = Csv::new(&["x", "v"]);
        csv.row(vec!["1".into(), sig(0.5)]);
        let text = csv.to_text().unwrap();
        assert_eq!(text, "x,v\n1,5.00000000000e-1\n");
    }
}
