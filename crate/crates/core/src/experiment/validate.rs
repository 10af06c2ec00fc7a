use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::ordered_map;
use super::output::Series;
use super::qutrit::run_qutrit_demo;
use super::sweep::{compute_covariance_sweep, compute_sweep, discretize_at, sweep_grid, SweepResult};
use crate::covariance::{covariance_oracle, mean_p, mean_q, sigma_pp, sigma_qq, FirstDifference, Quadrature};
use crate::cutmap::{cut, even_map, odd_map, projector_cut, CutSpec};
use crate::densmat::{
    hermitian_eigenvalues, partial_trace, partial_transpose, relative_asymmetry, transpose_subsystem, ComplexMatrix,
    DensityMatrix, Mode,
};
use crate::discretizer::{discretize, discretize_reduced, GridSpec};
use crate::gaussian_state::{eta_at, AmplifierParams, SqueezeParams, TwoModeGaussian};
use crate::measures::{analytic_measure, entropy, linear_entropy, log_negativity, von_neumann_entropy, MeasureKind};
use crate::Result;

/// One checked property.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub module: &'static str,
    pub property: String,
    pub observed: String,
    pub expected: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub items: Vec<CheckItem>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.passed)
    }

    fn push(&mut self, module: &'static str, property: impl Into<String>, observed: impl fmt::Display, expected: impl Into<String>, passed: bool) {
        self.items.push(CheckItem {
            module,
            property: property.into(),
            observed: observed.to_string(),
            expected: expected.into(),
            passed,
        });
    }

    fn at_most(&mut self, module: &'static str, property: impl Into<String>, observed: f64, bound: f64) {
        self.push(module, property, format!("{observed:.3e}"), format!("<= {bound:.1e}"), observed <= bound);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.items {
            let tag = if i.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} [{}] {}: observed {}, expected {}", i.module, i.property, i.observed, i.expected)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {failed} failed", self.items.len())
    }
}

const ENTROPY_TOL: f64 = 5e-3;
const LN_TOL: f64 = 1e-2;

struct Setup {
    params: AmplifierParams,
    squeeze: SqueezeParams,
    period: f64,
    times: Vec<f64>,
    step: f64,
}

/// Runs the invariant suite and the reproduction checks for `config`.
///
/// Grid-dependent checks use the finest configured grid. Spot values at
/// `t = 0` are checked only for the reference physics of
/// [`ExperimentConfig::reference`].
pub fn run_validate(config: &ExperimentConfig) -> Result<ValidationReport> {
    config.validate()?;
    let params = config.params()?;
    let times = config.times()?;
    let setup = Setup {
        params,
        squeeze: config.squeeze_params()?,
        period: params.period(),
        step: times[1] - times[0],
        times,
    };
    let mut report = ValidationReport::default();
    let sweep = compute_sweep(config)?;
    check_accuracy(&mut report, &sweep);
    check_coarse_periodicity(&mut report, config, &setup)?;
    check_periodicity(&mut report, config, &setup, &sweep)?;
    check_spot_values(&mut report, &setup, &sweep)?;
    check_cut_maps(&mut report)?;
    check_parity_maps(&mut report, config, &setup)?;
    check_covariance(&mut report, config, &setup)?;
    check_positive_map(&mut report, config, &setup)?;
    check_structure(&mut report, config, &setup)?;
    Ok(report)
}

fn entropy_kinds(config: &ExperimentConfig) -> Vec<MeasureKind> {
    config.measures.iter().copied().filter(MeasureKind::is_entropy).collect()
}

fn finest(series: &Series) -> usize {
    *series.grids().last().expect("series has rows")
}

fn check_accuracy(report: &mut ValidationReport, sweep: &SweepResult) {
    for s in &sweep.series {
        let is_ln = s.measure == MeasureKind::LogNegativity.label();
        let tol = if is_ln { LN_TOL } else { ENTROPY_TOL };
        let n = finest(s);
        report.at_most("measures", format!("{} max error over the window at {n} points", s.measure), s.max_abs_error(n), tol);
        let grids = s.grids();
        let errors: Vec<f64> = grids.iter().map(|&n| s.max_abs_error(n)).collect();
        let ordered = errors.windows(2).all(|w| w[1] <= w[0]);
        report.push(
            "measures",
            format!("{} max error non-increasing over grids {grids:?}", s.measure),
            sci_list(&errors),
            "non-increasing",
            ordered,
        );
    }
}

fn sci_list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn entropy_curve(setup: &Setup, grid: &GridSpec, kind: MeasureKind, times: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    ordered_map(times, |&t| -> Result<f64> {
        let d = discretize_at(&setup.params, &setup.squeeze, t, grid, epsilon)?;
        entropy(kind, &partial_trace(&d.rho, Mode::First)?.spectrum())
    })
    .into_iter()
    .collect()
}

/// Index of the smallest value in each of `chunks` consecutive windows of
/// `per_window` samples (the last window also takes the final sample).
fn window_minima(v: &[f64], per_window: usize, chunks: usize) -> Vec<usize> {
    (0..chunks)
        .map(|c| {
            let lo = c * per_window;
            let hi = if c + 1 == chunks { v.len() } else { lo + per_window };
            (lo..hi).fold(lo, |best, i| if v[i] < v[best] { i } else { best })
        })
        .collect()
}

/// Two periods on the coarsest grid: the lowest point of each window
/// `[m pi/nu - pi/(2 nu), m pi/nu + pi/(2 nu)]` must sit at `m pi/nu`.
fn check_coarse_periodicity(report: &mut ValidationReport, config: &ExperimentConfig, setup: &Setup) -> Result<()> {
    let n = *config.grids.iter().min().expect("grids validated nonempty");
    let grid = sweep_grid(config, n)?;
    let per_period = config.time.samples - 1;
    let start = setup.period / 2.0;
    let times: Vec<f64> = (0..=2 * per_period).map(|k| start + setup.period * k as f64 / per_period as f64).collect();
    let step = setup.period / per_period as f64;
    for kind in entropy_kinds(config) {
        let curve = entropy_curve(setup, &grid, kind, &times, config.epsilon_island)?;
        let minima: Vec<f64> = window_minima(&curve, per_period, 2).iter().map(|&i| times[i]).collect();
        let located = minima
            .iter()
            .zip([setup.period, 2.0 * setup.period])
            .all(|(t, target)| (t - target).abs() <= step * (1.0 + 1e-9));
        report.push(
            "measures",
            format!("{kind} at {n} points: per-period minima over two periods"),
            format!("{minima:.4?}"),
            format!("within {step:.4} of {:.4} and {:.4}", setup.period, 2.0 * setup.period),
            located,
        );
    }
    Ok(())
}

fn numeric_at(config: &ExperimentConfig, setup: &Setup, kind: MeasureKind, n: usize, t: f64) -> Result<f64> {
    let grid = sweep_grid(config, n)?;
    let d = discretize_at(&setup.params, &setup.squeeze, t, &grid, config.epsilon_island)?;
    match kind {
        MeasureKind::LogNegativity => log_negativity(&d.rho, Mode::Second),
        _ => entropy(kind, &partial_trace(&d.rho, Mode::First)?.spectrum()),
    }
}

fn kind_of(config: &ExperimentConfig, label: &str) -> MeasureKind {
    *config.measures.iter().find(|k| k.label() == label).expect("series label comes from config")
}

fn check_periodicity(report: &mut ValidationReport, config: &ExperimentConfig, setup: &Setup, sweep: &SweepResult) -> Result<()> {
    const PROBES: usize = 8;
    let eta_abs = |t: f64| eta_at(&setup.params, &setup.squeeze, t).map(|e| e.norm());
    for s in &sweep.series {
        let kind = kind_of(config, &s.measure);
        let mut worst = 0.0_f64;
        for &t in &setup.times {
            let a = analytic_measure(kind, eta_abs(t)?)?;
            let b = analytic_measure(kind, eta_abs(t + setup.period)?)?;
            worst = worst.max((a - b).abs());
        }
        report.at_most("measures", format!("{} analytic |f(t) - f(t + pi/nu)|", s.measure), worst, 1e-6);

        let n = finest(s);
        let rows: Vec<_> = s.for_grid(n).copied().collect();
        let probes: Vec<usize> = (0..PROBES).map(|k| k * (rows.len() - 1) / (PROBES - 1)).collect();
        let shifted = ordered_map(&probes, |&i| numeric_at(config, setup, kind, n, rows[i].t + setup.period))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let worst = probes.iter().zip(&shifted).map(|(&i, v)| (rows[i].numeric - v).abs()).fold(0.0, f64::max);
        report.at_most("measures", format!("{} numeric |f(t) - f(t + pi/nu)| at {n} points", s.measure), worst, ENTROPY_TOL);

        let (imax, _) = rows.iter().enumerate().fold((0, f64::MIN), |acc, (i, r)| if r.numeric > acc.1 { (i, r.numeric) } else { acc });
        let (imin, _) = rows.iter().enumerate().fold((0, f64::MAX), |acc, (i, r)| if r.numeric < acc.1 { (i, r.numeric) } else { acc });
        let half = setup.period / 2.0;
        let t_max = rows[imax].t;
        let max_target = (((t_max / half) - 1.0) / 2.0).round() * setup.period + half;
        let t_min = rows[imin].t;
        let min_target = (t_min / setup.period).round() * setup.period;
        let tol = setup.step * (1.0 + 1e-9);
        report.push(
            "measures",
            format!("{} numeric maximum at (2m+1) pi/(2 nu)", s.measure),
            format!("t = {t_max:.5}"),
            format!("within {:.4} of {max_target:.5}", setup.step),
            (t_max - max_target).abs() <= tol,
        );
        report.push(
            "measures",
            format!("{} numeric minimum at m pi/nu", s.measure),
            format!("t = {t_min:.5}"),
            format!("within {:.4} of {min_target:.5}", setup.step),
            (t_min - min_target).abs() <= tol,
        );
    }
    Ok(())
}

fn is_reference_physics(setup: &Setup) -> bool {
    setup.params == AmplifierParams::reference() && (setup.squeeze.beta() - Complex64::new(0.05, 0.0)).norm() < 1e-15
}

fn check_spot_values(report: &mut ValidationReport, setup: &Setup, sweep: &SweepResult) -> Result<()> {
    if !is_reference_physics(setup) || setup.times[0] != 0.0 {
        return Ok(());
    }
    let eta0 = eta_at(&setup.params, &setup.squeeze, 0.0)?.norm();
    let targets = [
        (MeasureKind::Linear, 4.9875e-3, 1e-6),
        (MeasureKind::VonNeumann, 1.752e-2, 1e-5),
        (MeasureKind::Tsallis { q: 5.0 }, 3.110e-3, 1e-6),
        (MeasureKind::LogNegativity, 0.14439, 1e-5),
    ];
    for (kind, target, tol) in targets {
        let Some(s) = sweep.series(&kind.label()) else { continue };
        let a = analytic_measure(kind, eta0)?;
        report.push(
            "measures",
            format!("{kind} analytic at t = 0"),
            format!("{a:.6e}"),
            format!("{target:e} +- {tol:e}"),
            (a - target).abs() <= tol,
        );
        let n = finest(s);
        let row = s.for_grid(n).next().expect("t = 0 row");
        let tol = if kind == MeasureKind::LogNegativity { LN_TOL } else { ENTROPY_TOL };
        report.at_most("measures", format!("{kind} numeric at t = 0, {n} points"), row.abs_error, tol);
    }
    Ok(())
}

/// Random density matrix of random rank, exactly hermitian.
pub(crate) fn random_density_matrix(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    let rank = rng.gen_range(1..=dim);
    let a = ComplexMatrix::from_fn(dim, rank, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let g = &a * a.adjoint();
    let mut m = ComplexMatrix::from_fn(dim, dim, |i, j| if i >= j { g[(i, j)] } else { g[(j, i)].conj() });
    for i in 0..dim {
        m[(i, i)].im = 0.0;
    }
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    m.iter_mut().for_each(|z| *z /= tr);
    DensityMatrix::single_mode(m).expect("Gram matrices are density matrices")
}

fn all_small_cuts(dim: usize) -> Vec<CutSpec> {
    let mut specs = Vec::new();
    for i in 0..dim {
        specs.push(CutSpec::new(dim, [i]).expect("valid"));
        for j in i + 1..dim {
            specs.push(CutSpec::new(dim, [i, j]).expect("valid"));
        }
    }
    specs
}

fn check_cut_maps(report: &mut ValidationReport) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_herm, mut worst_trace, mut worst_eig) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut projector_mismatches = 0;
    let mut total = 0;
    for _ in 0..200 {
        let dim = rng.gen_range(3..=32);
        let rho = random_density_matrix(&mut rng, dim);
        for spec in all_small_cuts(dim) {
            total += 1;
            let out = cut(&rho, &spec, true)?;
            worst_herm = worst_herm.max(relative_asymmetry(out.matrix()));
            worst_trace = worst_trace.max((out.trace() - 1.0).abs());
            worst_eig = worst_eig.min(hermitian_eigenvalues(out.matrix())?.min());
            if cut(&rho, &spec, false)?.matrix() != projector_cut(&rho, &spec)?.matrix() {
                projector_mismatches += 1;
            }
        }
    }
    report.at_most("cutmap", format!("hermiticity over {total} cuts"), worst_herm, 1e-12);
    report.at_most("cutmap", format!("|trace - 1| over {total} cuts"), worst_trace, 1e-12);
    report.push("cutmap", format!("min eigenvalue over {total} cuts"), format!("{worst_eig:.3e}"), ">= -1e-9", worst_eig >= -1e-9);
    report.push("cutmap", "projector form equals index form", format!("{projector_mismatches} mismatches"), "bit-exact", projector_mismatches == 0);
    let qutrit = run_qutrit_demo()?;
    report.push(
        "cutmap",
        "qutrit cuts equal the closed forms",
        if qutrit.passed() { "all equal" } else { "mismatch" },
        "bit-exact",
        qutrit.passed(),
    );
    Ok(())
}

fn check_parity_maps(report: &mut ValidationReport, config: &ExperimentConfig, setup: &Setup) -> Result<()> {
    const POINTS: usize = 65;
    let grid = sweep_grid(config, POINTS)?;
    for t in [0.0, setup.period / 2.0] {
        let g = TwoModeGaussian::at(&setup.params, &setup.squeeze, t)?;
        let rho = discretize_reduced(|a, b, c, d| g.kernel(a, b, c, d), &grid, Mode::First)?;
        let s = rho.spectrum();
        for (name, mapped) in [("odd", odd_map(&rho)?), ("even", even_map(&rho)?)] {
            let m = mapped.spectrum();
            let dvn = (von_neumann_entropy(&s) - von_neumann_entropy(&m)).abs();
            let dl = (linear_entropy(&s) - linear_entropy(&m)).abs();
            report.push("cutmap", format!("{name} map preserves von Neumann entropy at t = {t:.4}, {POINTS} points"), format!("{dvn:.3e}"), "< 1e-2", dvn < 1e-2);
            report.push("cutmap", format!("{name} map preserves linear entropy at t = {t:.4}, {POINTS} points"), format!("{dl:.3e}"), "< 1e-2", dl < 1e-2);
        }
    }
    Ok(())
}

fn fitted_order(steps: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn check_covariance(report: &mut ValidationReport, config: &ExperimentConfig, setup: &Setup) -> Result<()> {
    let t = setup.period / 4.0;
    let oracle = covariance_oracle(&setup.params, &setup.squeeze, t)?;
    let width = sweep_grid(config, 3)?.half_width(Mode::First);
    let g = TwoModeGaussian::at(&setup.params, &setup.squeeze, t)?;
    let mut steps = Vec::new();
    let (mut eq, mut ep) = (Vec::new(), Vec::new());
    for n in [17, 33, 65] {
        let grid = GridSpec::symmetric(n, width)?;
        let r = discretize_reduced(|a, b, c, d| g.kernel(a, b, c, d), &grid, Mode::First)?;
        steps.push(grid.step(Mode::First));
        eq.push((sigma_qq(&r, &grid, Mode::First)? - oracle.get(Quadrature::Q1, Quadrature::Q1)).abs());
        ep.push((sigma_pp(&r, &grid, Mode::First)? - oracle.get(Quadrature::P1, Quadrature::P1)).abs());
    }
    for (name, errors) in [("sigma_q1q1", &eq), ("sigma_p1p1", &ep)] {
        let order = fitted_order(&steps, errors);
        report.push(
            "covariance",
            format!("{name} convergence order over 17/33/65 points at t = {t:.4}"),
            format!("{order:.3} (errors {})", sci_list(errors)),
            "2 +- 0.3",
            (order - 2.0).abs() <= 0.3,
        );
    }

    let cov = compute_covariance_sweep(config)?;
    let qq = cov.series("sigma_q1q1").expect("element present");
    let pp = cov.series("sigma_p1p1").expect("element present");
    for n in qq.grids() {
        let (a, b) = (qq.max_abs_error(n), pp.max_abs_error(n));
        report.push(
            "covariance",
            format!("sigma_p1p1 error exceeds sigma_q1q1 error at {n} points"),
            format!("{b:.3e} vs {a:.3e}"),
            "pp > qq",
            b > a,
        );
    }

    let mut worst = f64::INFINITY;
    for &t in &setup.times {
        let c = covariance_oracle(&setup.params, &setup.squeeze, t)?;
        worst = worst.min(c.uncertainty_product(Mode::First)).min(c.uncertainty_product(Mode::Second));
    }
    report.push("covariance", "oracle uncertainty product over the window", format!("{worst:.12}"), ">= 0.25 - 1e-9", worst >= 0.25 - 1e-9);

    let n = *config.grids.iter().max().expect("grids validated nonempty");
    let grid = sweep_grid(config, n)?;
    let mut worst = 0.0_f64;
    for &t in &setup.times {
        let d = discretize_at(&setup.params, &setup.squeeze, t, &grid, config.epsilon_island)?;
        for mode in [Mode::First, Mode::Second] {
            let r = partial_trace(&d.rho, mode)?;
            worst = worst
                .max(mean_q(&r, &grid, mode)?.abs())
                .max(mean_p(&r, &grid, mode, FirstDifference::Central)?.abs());
        }
    }
    report.at_most("covariance", format!("|<q>|, |<p>| over the window at {n} points"), worst, 1e-8);
    Ok(())
}

fn check_positive_map(report: &mut ValidationReport, config: &ExperimentConfig, setup: &Setup) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = 0;
    for _ in 0..50 {
        let t = rng.gen_range(0.0..setup.period);
        let n = 2 * rng.gen_range(1..=12) + 1;
        let grid = sweep_grid(config, n)?;
        match discretize_at(&setup.params, &setup.squeeze, t, &grid, config.epsilon_island) {
            Ok(d) if d.rho.validate().is_ok() => {}
            _ => failures += 1,
        }
    }
    report.push("discretizer", "50 random discretizations are density matrices", format!("{failures} failures"), "0 failures", failures == 0);

    let grid = sweep_grid(config, 9)?;
    let g = TwoModeGaussian::at(&setup.params, &setup.squeeze, setup.period / 4.0)?;
    let base = discretize(|a, b, c, d| g.kernel(a, b, c, d), &grid, config.epsilon_island)?;
    for lambda in [0.5, 2.0, 10.0] {
        let scaled = discretize(|a, b, c, d| g.kernel(a, b, c, d) * lambda, &grid, config.epsilon_island)?;
        let differing = base.rho.matrix().iter().zip(scaled.rho.matrix().iter()).filter(|(a, b)| a != b).count();
        report.push(
            "discretizer",
            format!("discretize({lambda} * kernel) = discretize(kernel)"),
            format!("{differing} differing entries"),
            "bit-exact",
            differing == 0,
        );
    }
    Ok(())
}

fn check_structure(report: &mut ValidationReport, config: &ExperimentConfig, setup: &Setup) -> Result<()> {
    let n = *config.grids.iter().max().expect("grids validated nonempty");
    let grid = sweep_grid(config, n)?;
    let d = discretize_at(&setup.params, &setup.squeeze, setup.period / 4.0, &grid, config.epsilon_island)?;
    let s1 = partial_trace(&d.rho, Mode::First)?.spectrum();
    let s2 = partial_trace(&d.rho, Mode::Second)?.spectrum();
    let gap = s1.eigenvalues().iter().zip(s2.eigenvalues()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report.at_most("densmat", format!("reduced spectra of both modes agree at {n} points"), gap, 1e-10);

    let once = partial_transpose(&d.rho, Mode::Second)?;
    let twice = transpose_subsystem(&once, n, n, Mode::Second)?;
    report.push("densmat", "partial transpose is an involution", if &twice == d.rho.matrix() { "equal" } else { "differs" }, "bit-exact", &twice == d.rho.matrix());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_minima_pick_one_per_window() {
        let v = [3.0, 1.0, 2.0, 5.0, 4.0, 0.5, 2.0];
        assert_eq!(window_minima(&v, 3, 2), vec![1, 5]);
    }

    #[test]
    fn fitted_order_of_exact_power_law() {
        let steps = [0.4, 0.2, 0.1];
        let errors: Vec<f64> = steps.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((fitted_order(&steps, &errors) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_density_matrices_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [3, 7, 32] {
            let rho = random_density_matrix(&mut rng, dim);
            assert_eq!(rho.dim(), dim);
            assert_eq!(relative_asymmetry(rho.matrix()), 0.0);
        }
    }

    #[test]
    fn report_formatting() {
        let mut r = ValidationReport::default();
        r.at_most("m", "small", 1e-3, 1e-2);
        r.at_most("m", "large", 1.0, 1e-2);
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
        let text = r.to_string();
        assert!(text.starts_with("PASS [m] small"));
        assert!(text.ends_with("2 checks, 1 failed"));
    }
}
