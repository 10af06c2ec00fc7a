use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::ordered_map;
use super::output::{write_all, Row, Series, SummaryEntry};
use crate::covariance::{
    covariance_oracle, sigma_p1p2, sigma_pp, sigma_qp, sigma_qq, CovarianceMatrix, Quadrature,
};
use crate::densmat::{partial_trace, Mode};
use crate::discretizer::{auto_grid, discretize, Discretization, GridSpec, IslandReport};
use crate::gaussian_state::{eta_at, AmplifierParams, SqueezeParams, TwoModeGaussian};
use crate::measures::{analytic_measure, entropy, log_negativity, MeasureKind};
use crate::Result;

/// In-memory result of a sweep, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub series: Vec<Series>,
    pub summary: Vec<SummaryEntry>,
    pub grids: BTreeMap<usize, GridSpec>,
}

impl SweepResult {
    pub fn series(&self, measure: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.measure == measure)
    }
}

/// Grid for `points` per mode, wide enough for the whole window of `config`.
pub fn sweep_grid(config: &ExperimentConfig, points: usize) -> Result<GridSpec> {
    let params = config.params()?;
    let squeeze = config.squeeze_params()?;
    let times = config.times()?;
    let t_max = times.iter().fold(0.0_f64, |m, &t| m.max(t.abs()));
    auto_grid(&params, &squeeze, t_max, points, config.coverage_sigmas)
}

/// Samples the kernel of the state at `t` on `grid`.
pub fn discretize_at(
    params: &AmplifierParams,
    squeeze: &SqueezeParams,
    t: f64,
    grid: &GridSpec,
    epsilon: f64,
) -> Result<Discretization> {
    let g = TwoModeGaussian::at(params, squeeze, t)?;
    discretize(|a, b, c, d| g.kernel(a, b, c, d), grid, epsilon)
}

struct PointResult {
    entropies: Vec<f64>,
    log_negativity: Option<f64>,
    island: IslandReport,
}

fn grid_table(config: &ExperimentConfig, points: &[usize]) -> Result<BTreeMap<usize, GridSpec>> {
    points.iter().map(|&n| Ok((n, sweep_grid(config, n)?))).collect()
}

fn merge_islands(reports: impl Iterator<Item = IslandReport>) -> (bool, f64) {
    reports.fold((true, 0.0_f64), |(ok, m), r| (ok && r.converged, m.max(r.max_boundary_magnitude)))
}

fn warn_islands(islands: &BTreeMap<usize, (bool, f64)>, epsilon: f64) {
    for (n, (converged, magnitude)) in islands {
        if !converged {
            log::warn!(
                "grid with {n} points per mode: boundary density {magnitude:.3e} exceeds epsilon {epsilon:.1e}; widen the grid"
            );
        }
    }
}

/// Entropies on `config.grids` and, if requested, log negativity on the
/// negativity grids, for every configured time.
///
/// Points are computed in parallel and assembled in `(t, grid_n)` order,
/// so the result does not depend on scheduling.
pub fn compute_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let params = config.params()?;
    let squeeze = config.squeeze_params()?;
    let times = config.times()?;
    let entropies: Vec<MeasureKind> = config.measures.iter().copied().filter(MeasureKind::is_entropy).collect();
    let want_ln = config.measures.contains(&MeasureKind::LogNegativity);

    let mut points: Vec<usize> = Vec::new();
    if !entropies.is_empty() {
        points.extend(&config.grids);
    }
    if want_ln {
        points.extend(config.negativity_grids());
    }
    points.sort_unstable();
    points.dedup();
    let grids = grid_table(config, &points)?;

    let tasks: Vec<(usize, usize)> = (0..times.len()).flat_map(|i| points.iter().map(move |&n| (i, n))).collect();
    let results = ordered_map(&tasks, |&(i, n)| -> Result<PointResult> {
        let grid = &grids[&n];
        let disc = discretize_at(&params, &squeeze, times[i], grid, config.epsilon_island)?;
        let mut values = Vec::new();
        if !entropies.is_empty() && config.grids.contains(&n) {
            let spectrum = partial_trace(&disc.rho, Mode::First)?.spectrum();
            for &kind in &entropies {
                values.push(entropy(kind, &spectrum)?);
            }
        }
        let ln = if want_ln && config.negativity_grids().contains(&n) {
            Some(log_negativity(&disc.rho, Mode::Second)?)
        } else {
            None
        };
        Ok(PointResult {
            entropies: values,
            log_negativity: ln,
            island: disc.island,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let eta_abs: Vec<f64> = times
        .iter()
        .map(|&t| eta_at(&params, &squeeze, t).map(|e| e.norm()))
        .collect::<Result<_>>()?;

    let mut kinds = entropies.clone();
    if want_ln {
        kinds.push(MeasureKind::LogNegativity);
    }
    let mut series: Vec<Series> = kinds
        .iter()
        .map(|k| Series {
            measure: k.label(),
            rows: Vec::new(),
        })
        .collect();
    for (&(i, n), point) in tasks.iter().zip(&results) {
        for (k, &kind) in entropies.iter().enumerate() {
            if let Some(&value) = point.entropies.get(k) {
                series[k].rows.push(Row::new(times[i], n, value, analytic_measure(kind, eta_abs[i])?));
            }
        }
        if let Some(value) = point.log_negativity {
            let last = series.len() - 1;
            let analytic = analytic_measure(MeasureKind::LogNegativity, eta_abs[i])?;
            series[last].rows.push(Row::new(times[i], n, value, analytic));
        }
    }

    let islands: BTreeMap<usize, (bool, f64)> = points
        .iter()
        .map(|&n| {
            let reports = tasks.iter().zip(&results).filter(|((_, m), _)| *m == n).map(|(_, r)| r.island);
            (n, merge_islands(reports))
        })
        .collect();
    warn_islands(&islands, config.epsilon_island);

    Ok(SweepResult {
        summary: summarize(&series, &islands),
        series,
        grids,
    })
}

fn summarize(series: &[Series], islands: &BTreeMap<usize, (bool, f64)>) -> Vec<SummaryEntry> {
    series
        .iter()
        .flat_map(|s| {
            s.grids().into_iter().map(move |n| {
                let (island_converged, max_boundary_magnitude) = islands[&n];
                SummaryEntry {
                    measure: s.measure.clone(),
                    grid_n: n,
                    max_abs_error: s.max_abs_error(n),
                    island_converged,
                    max_boundary_magnitude,
                }
            })
        })
        .collect()
}

/// Runs [`compute_sweep`] and writes one CSV per measure plus
/// `summary.csv` into `out_dir` (default: `config.output_dir`).
pub fn run_sweep(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<(SweepResult, Vec<PathBuf>)> {
    let result = compute_sweep(config)?;
    let dir = out_dir.unwrap_or(&config.output_dir);
    let paths = write_all(dir, &result.series, &result.summary, "summary.csv")?;
    Ok((result, paths))
}

/// Covariance elements reported by the covariance sweep.
pub const COVARIANCE_ELEMENTS: [(&str, Quadrature, Quadrature); 7] = [
    ("sigma_q1q1", Quadrature::Q1, Quadrature::Q1),
    ("sigma_p1p1", Quadrature::P1, Quadrature::P1),
    ("sigma_q1p1", Quadrature::Q1, Quadrature::P1),
    ("sigma_q2q2", Quadrature::Q2, Quadrature::Q2),
    ("sigma_p2p2", Quadrature::P2, Quadrature::P2),
    ("sigma_q2p2", Quadrature::Q2, Quadrature::P2),
    ("sigma_p1p2", Quadrature::P1, Quadrature::P2),
];

/// The seven finite-difference estimates in [`COVARIANCE_ELEMENTS`] order.
pub fn covariance_estimates(disc: &Discretization, grid: &GridSpec) -> Result<[f64; 7]> {
    let r1 = partial_trace(&disc.rho, Mode::First)?;
    let r2 = partial_trace(&disc.rho, Mode::Second)?;
    Ok([
        sigma_qq(&r1, grid, Mode::First)?,
        sigma_pp(&r1, grid, Mode::First)?,
        sigma_qp(&r1, grid, Mode::First)?,
        sigma_qq(&r2, grid, Mode::Second)?,
        sigma_pp(&r2, grid, Mode::Second)?,
        sigma_qp(&r2, grid, Mode::Second)?,
        sigma_p1p2(&disc.rho, grid)?,
    ])
}

/// Finite-difference covariance elements on `config.grids` against the
/// quadrature oracle, in the same CSV layout as [`compute_sweep`].
pub fn compute_covariance_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let params = config.params()?;
    let squeeze = config.squeeze_params()?;
    let times = config.times()?;
    let grids = grid_table(config, &config.grids)?;
    let points: Vec<usize> = grids.keys().copied().collect();

    let oracles: Vec<CovarianceMatrix> = ordered_map(&times, |&t| covariance_oracle(&params, &squeeze, t))
        .into_iter()
        .collect::<Result<_>>()?;
    let tasks: Vec<(usize, usize)> = (0..times.len()).flat_map(|i| points.iter().map(move |&n| (i, n))).collect();
    let results = ordered_map(&tasks, |&(i, n)| -> Result<([f64; 7], IslandReport)> {
        let grid = &grids[&n];
        let disc = discretize_at(&params, &squeeze, times[i], grid, config.epsilon_island)?;
        Ok((covariance_estimates(&disc, grid)?, disc.island))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let series = COVARIANCE_ELEMENTS
        .iter()
        .enumerate()
        .map(|(k, &(name, a, b))| Series {
            measure: name.to_string(),
            rows: tasks
                .iter()
                .zip(&results)
                .map(|(&(i, n), (values, _))| Row::new(times[i], n, values[k], oracles[i].get(a, b)))
                .collect(),
        })
        .collect::<Vec<_>>();
    let islands: BTreeMap<usize, (bool, f64)> = points
        .iter()
        .map(|&n| {
            let reports = tasks.iter().zip(&results).filter(|((_, m), _)| *m == n).map(|(_, (_, r))| *r);
            (n, merge_islands(reports))
        })
        .collect();
    warn_islands(&islands, config.epsilon_island);
    Ok(SweepResult {
        summary: summarize(&series, &islands),
        series,
        grids,
    })
}

/// Runs [`compute_covariance_sweep`] and writes one CSV per element plus
/// `covariance_summary.csv`.
pub fn run_covariance_sweep(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<(SweepResult, Vec<PathBuf>)> {
    let result = compute_covariance_sweep(config)?;
    let dir = out_dir.unwrap_or(&config.output_dir);
    let paths = write_all(dir, &result.series, &result.summary, "covariance_summary.csv")?;
    Ok((result, paths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::SqueezeConfig;

    fn small() -> ExperimentConfig {
        let mut c = ExperimentConfig::reference();
        c.grids = vec![5, 9];
        c.negativity_grids = vec![5];
        c.time.samples = 4;
        c
    }

    #[test]
    fn sweep_layout() {
        let c = small();
        let r = compute_sweep(&c).unwrap();
        let labels: Vec<&str> = r.series.iter().map(|s| s.measure.as_str()).collect();
        assert_eq!(labels, ["tsallis_q5", "von_neumann", "linear", "log_negativity"]);
        let vn = r.series("von_neumann").unwrap();
        assert_eq!(vn.rows.len(), 8);
        let order: Vec<(f64, usize)> = vn.rows.iter().map(|row| (row.t, row.grid_n)).collect();
        let mut sorted = order.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(order, sorted);
        assert_eq!(r.series("log_negativity").unwrap().rows.len(), 4);
        assert_eq!(r.summary.len(), 3 * 2 + 1);
    }

    #[test]
    fn analytic_column_ignores_the_grid() {
        let r = compute_sweep(&small()).unwrap();
        for s in &r.series {
            for pair in s.rows.chunks(2).filter(|c| c.len() == 2) {
                if pair[0].t == pair[1].t {
                    assert_eq!(pair[0].analytic, pair[1].analytic);
                }
            }
        }
    }

    #[test]
    fn unsqueezed_start_is_squeezed_by_the_amplifier() {
        let mut c = small();
        c.squeeze = SqueezeConfig {
            beta: Some(0.0),
            ..SqueezeConfig::default()
        };
        let r = compute_sweep(&c).unwrap();
        for s in &r.series {
            for row in s.rows.iter().filter(|row| row.t == 0.0) {
                assert!(row.analytic.abs() < 1e-14, "{} {}", s.measure, row.analytic);
                assert!(row.numeric.abs() < 1e-9, "{} {}", s.measure, row.numeric);
            }
            assert!(s.rows.iter().any(|row| row.analytic > 1e-3), "{}", s.measure);
        }
    }

    #[test]
    fn written_files_are_deterministic() {
        let c = small();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let (_, pa) = run_sweep(&c, Some(a.path())).unwrap();
        let (_, pb) = run_sweep(&c, Some(b.path())).unwrap();
        assert_eq!(pa.len(), 5);
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }

    #[test]
    fn covariance_sweep_layout() {
        let mut c = small();
        c.grids = vec![9];
        let r = compute_covariance_sweep(&c).unwrap();
        assert_eq!(r.series.len(), 7);
        for s in &r.series {
            assert_eq!(s.rows.len(), 4);
            assert!(s.rows.iter().all(|row| row.numeric.is_finite()));
        }
    }
}
