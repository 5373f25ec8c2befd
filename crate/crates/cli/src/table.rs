//! CSV tables with a header row and 17 significant digits.

use std::io::Write;
use std::path::Path;

use ttedopa::TimeSeries;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Round-trips through `str::parse` exactly.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: vec![] }
    }

    pub fn from_series(series: &TimeSeries) -> Self {
        let mut header = vec!["t_ps".to_string()];
        header.extend(series.columns.iter().cloned());
        header.push("discarded_weight".into());
        header.push("max_bond_dim".into());
        let rows = (0..series.len())
            .map(|i| {
                let mut row = vec![series.times[i]];
                row.extend(&series.values[i]);
                row.push(series.discarded_weight[i]);
                row.push(series.max_bond_dim[i] as f64);
                row
            })
            .collect();
        Self { header, rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| format_value(x)))?;
        }
        w.flush().map_err(|e| CliError::Csv(e.into()))?;
        Ok(())
    }

    /// Writes to `path`, or stdout when `path` is `None`.
    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                }
                let f = std::fs::File::create(p).map_err(|e| CliError::io(p, e))?;
                self.write_to(std::io::BufWriter::new(f))
            }
            None => self.write_to(std::io::stdout().lock()),
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Validation(format!("{}: bad number {s:?}: {e}", path.display())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

/// Largest `|a − b|` of one column and the time where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Difference {
    pub max_abs: f64,
    pub at_time: f64,
}

pub fn compare(a: &Table, b: &Table, column: &str) -> Result<Difference, CliError> {
    let missing = |which: &str| CliError::Validation(format!("column {column:?} missing from {which}"));
    let ta = a.column("t_ps").ok_or_else(|| missing("first table's t_ps"))?;
    let tb = b.column("t_ps").ok_or_else(|| missing("second table's t_ps"))?;
    let ca = a.column(column).ok_or_else(|| missing("first table"))?;
    let cb = b.column(column).ok_or_else(|| missing("second table"))?;
    if ta.len() != tb.len() || ta.iter().zip(&tb).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(CliError::Validation("time grids differ".into()));
    }
    let mut diff = Difference {
        max_abs: 0.0,
        at_time: ta.first().copied().unwrap_or(0.0),
    };
    for ((&t, &x), &y) in ta.iter().zip(&ca).zip(&cb) {
        let d = (x - y).abs();
        if d > diff.max_abs || d.is_nan() {
            diff = Difference { max_abs: d, at_time: t };
        }
    }
    Ok(diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -1e-300, 0.0, 2.5e-4 * 7.0] {
            assert_eq!(format_value(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn compare_rejects_other_grid() {
        let mut a = Table::new(vec!["t_ps".into(), "x".into()]);
        a.rows = vec![vec![0.0, 1.0], vec![0.1, 2.0]];
        let mut b = a.clone();
        assert_eq!(compare(&a, &b, "x").unwrap().max_abs, 0.0);
        b.rows[1][1] = 2.5;
        let d = compare(&a, &b, "x").unwrap();
        assert_eq!((d.max_abs, d.at_time), (0.5, 0.1));
        b.rows[1][0] = 0.2;
        assert!(compare(&a, &b, "x").is_err());
    }
}
