use std::fs;
use std::path::{Path, PathBuf};

use crate::Result;

pub const CSV_HEADER: [&str; 6] = ["t", "grid_n", "measure", "numeric", "analytic", "abs_error"];

/// One CSV line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub t: f64,
    pub grid_n: usize,
    pub numeric: f64,
    pub analytic: f64,
    pub abs_error: f64,
}

impl Row {
    pub fn new(t: f64, grid_n: usize, numeric: f64, analytic: f64) -> Self {
        Row {
            t,
            grid_n,
            numeric,
            analytic,
            abs_error: (numeric - analytic).abs(),
        }
    }
}

/// All rows of one measure, ordered by `(t, grid_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub measure: String,
    pub rows: Vec<Row>,
}

impl Series {
    pub fn for_grid(&self, grid_n: usize) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.grid_n == grid_n)
    }

    pub fn max_abs_error(&self, grid_n: usize) -> f64 {
        self.for_grid(grid_n).map(|r| r.abs_error).fold(0.0, f64::max)
    }

    pub fn grids(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.rows.iter().map(|r| r.grid_n).collect();
        g.sort_unstable();
        g.dedup();
        g
    }
}

/// Per `(measure, grid_n)` digest of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub measure: String,
    pub grid_n: usize,
    pub max_abs_error: f64,
    pub island_converged: bool,
    pub max_boundary_magnitude: f64,
}

/// 17 significant digits in scientific notation.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

pub fn write_series(path: &Path, series: &Series) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(CSV_HEADER)?;
    for r in &series.rows {
        w.write_record([
            format_f64(r.t),
            r.grid_n.to_string(),
            series.measure.clone(),
            format_f64(r.numeric),
            format_f64(r.analytic),
            format_f64(r.abs_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &[SummaryEntry]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["measure", "grid_n", "max_abs_error", "island_converged", "max_boundary_magnitude"])?;
    for e in summary {
        w.write_record([
            e.measure.clone(),
            e.grid_n.to_string(),
            format_f64(e.max_abs_error),
            e.island_converged.to_string(),
            format_f64(e.max_boundary_magnitude),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<measure>.csv` per series plus `<summary_name>`, returning the
/// paths in write order.
pub fn write_all(dir: &Path, series: &[Series], summary: &[SummaryEntry], summary_name: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(series.len() + 1);
    for s in series {
        let path = dir.join(format!("{}.csv", s.measure));
        write_series(&path, s)?;
        paths.push(path);
    }
    let path = dir.join(summary_name);
    write_summary(&path, summary)?;
    paths.push(path);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(0.0), "0.0000000000000000e0");
        assert_eq!(format_f64(-0.25), "-2.5000000000000000e-1");
        for x in [0.1, 1.0 / 3.0, 2.0_f64.sqrt(), 1e-300, 6.02e23] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let s = Series {
            measure: "linear".into(),
            rows: vec![Row::new(0.0, 5, 0.25, 0.5)],
        };
        write_series(&path, &s).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "t,grid_n,measure,numeric,analytic,abs_error\n\
             0.0000000000000000e0,5,linear,2.5000000000000000e-1,5.0000000000000000e-1,2.5000000000000000e-1\n"
        );
    }
}
