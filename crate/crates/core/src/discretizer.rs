//! Sampling a continuous two-mode kernel `rho(x, y; x', y')` on a uniform
//! grid and normalizing it into a finite density matrix.
//!
//! Entries are collocation samples scaled by the cell area,
//! `R[(i,j),(k,l)] = rho(x_i, y_j; x_k, y_l) dx dy / sum_{ij} rho(x_i, y_j; x_i, y_j) dx dy`,
//! so the normalization absorbs any overall scale of the kernel and the map
//! is not linear.

use num_complex::Complex64;

use crate::densmat::{partial_trace, ComplexMatrix, DensityMatrix, Mode, Structure};
use crate::gaussian_state::{AmplifierParams, SqueezeParams, TwoModeGaussian};
use crate::{Error, Result};

/// Default island threshold.
pub const DEFAULT_EPSILON: f64 = 1e-8;
/// Default grid half-width in marginal standard deviations.
pub const DEFAULT_COVERAGE_SIGMAS: f64 = 6.0;
/// Largest tolerated relative asymmetry of raw kernel samples.
pub const MAX_SAMPLING_ASYMMETRY: f64 = 1e-12;

/// Uniform per-mode grid with `2M + 1` points on `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    points: usize,
    half_width: [f64; 2],
}

impl GridSpec {
    pub fn new(points: usize, half_width_x: f64, half_width_y: f64) -> Result<Self> {
        if points < 3 || points.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "points per mode must be odd and >= 3, got {points}"
            )));
        }
        for l in [half_width_x, half_width_y] {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidParameter(format!("half width must be finite and > 0, got {l}")));
            }
        }
        Ok(GridSpec {
            points,
            half_width: [half_width_x, half_width_y],
        })
    }

    /// Same extent for both modes.
    pub fn symmetric(points: usize, half_width: f64) -> Result<Self> {
        Self::new(points, half_width, half_width)
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// `M` in `i = -M..=M`.
    pub fn max_index(&self) -> usize {
        (self.points - 1) / 2
    }

    pub fn half_width(&self, mode: Mode) -> f64 {
        self.half_width[mode_slot(mode)]
    }

    pub fn step(&self, mode: Mode) -> f64 {
        self.half_width(mode) / self.max_index() as f64
    }

    /// Node coordinates `i * step` for `i = -M..=M`.
    pub fn axis(&self, mode: Mode) -> Vec<f64> {
        let m = self.max_index() as i64;
        let h = self.step(mode);
        (-m..=m).map(|i| i as f64 * h).collect()
    }

    pub fn bipartite_dim(&self) -> usize {
        self.points * self.points
    }
}

fn mode_slot(mode: Mode) -> usize {
    match mode {
        Mode::First => 0,
        Mode::Second => 1,
    }
}

/// Whether the discretized state has decayed at the grid edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IslandReport {
    pub epsilon: f64,
    /// Largest reduced density `rho^(k)(z, z)` at `z = -L` or `z = L`,
    /// over both modes, in inverse quadrature units.
    pub max_boundary_magnitude: f64,
    pub converged: bool,
}

/// Result of [`discretize`].
#[derive(Debug, Clone)]
pub struct Discretization {
    pub rho: DensityMatrix,
    pub island: IslandReport,
    /// Relative asymmetry of the raw samples before re-hermitization.
    pub sampling_asymmetry: f64,
}

#[cfg(feature = "parallel")]
fn fill_columns(dim: usize, column: impl Fn(usize, &mut [Complex64]) + Sync) -> Vec<Complex64> {
    use rayon::prelude::*;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(c, col)| column(c, col));
    data
}

#[cfg(not(feature = "parallel"))]
fn fill_columns(dim: usize, column: impl Fn(usize, &mut [Complex64]) + Sync) -> Vec<Complex64> {
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    data.chunks_mut(dim).enumerate().for_each(|(c, col)| column(c, col));
    data
}

fn first_non_finite(m: &ComplexMatrix, n: usize) -> Option<(usize, usize, usize, usize)> {
    let dim = m.nrows();
    for col in 0..dim {
        for row in 0..dim {
            if !m[(row, col)].is_finite() {
                return Some((row / n, row % n, col / n, col % n));
            }
        }
    }
    None
}

/// Replaces `m` by `(m + m^dagger) / 2` and returns the relative asymmetry
/// it had. The result is exactly hermitian.
fn hermitize(m: &mut ComplexMatrix) -> f64 {
    let asym = crate::densmat::relative_asymmetry(m);
    let dim = m.nrows();
    for j in 0..dim {
        m[(j, j)] = Complex64::new(m[(j, j)].re, 0.0);
        for k in (j + 1)..dim {
            let upper = (m[(j, k)] + m[(k, j)].conj()) / 2.0;
            m[(j, k)] = upper;
            m[(k, j)] = upper.conj();
        }
    }
    asym
}

/// Divides by the diagonal sum and then folds the last few ulps of
/// rounding residue into the largest diagonal entry so that the trace,
/// summed in index order, is exactly 1.
fn normalize_trace(m: &mut ComplexMatrix) -> std::result::Result<(), f64> {
    let dim = m.nrows();
    let total: f64 = (0..dim).map(|j| m[(j, j)].re).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(total);
    }
    m.iter_mut().for_each(|z| *z /= total);
    let pivot = (0..dim)
        .max_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re))
        .unwrap_or(0);
    for _ in 0..4 {
        let tr: f64 = (0..dim).map(|j| m[(j, j)].re).sum();
        if tr == 1.0 {
            break;
        }
        m[(pivot, pivot)].re += 1.0 - tr;
    }
    Ok(())
}

/// Maps a continuous kernel onto a bipartite `(n n) x (n n)` density matrix.
///
/// Combined indices follow the densmat convention: `(i, j) -> i * n + j`
/// where `i` indexes the first mode's axis and `j` the second's.
pub fn discretize<K>(kernel: K, grid: &GridSpec, epsilon: f64) -> Result<Discretization>
where
    K: Fn(f64, f64, f64, f64) -> Complex64 + Sync,
{
    let n = grid.points();
    let dim = grid.bipartite_dim();
    let xs = grid.axis(Mode::First);
    let ys = grid.axis(Mode::Second);
    let cell = grid.step(Mode::First) * grid.step(Mode::Second);

    let data = fill_columns(dim, |col, out| {
        let (k, l) = (col / n, col % n);
        for (row, slot) in out.iter_mut().enumerate() {
            let (i, j) = (row / n, row % n);
            *slot = kernel(xs[i], ys[j], xs[k], ys[l]) * cell;
        }
    });
    let mut m = ComplexMatrix::from_vec(dim, dim, data);

    if let Some((i, j, k, l)) = first_non_finite(&m, n) {
        return Err(Error::Discretization {
            i,
            j,
            k,
            l,
            reason: "non-finite kernel sample".into(),
        });
    }
    let asym = hermitize(&mut m);
    log::debug!("kernel sampling asymmetry before hermitization: {asym:e}");
    if asym > MAX_SAMPLING_ASYMMETRY {
        return Err(Error::Discretization {
            i: 0,
            j: 0,
            k: 0,
            l: 0,
            reason: format!("kernel is not hermitian: relative asymmetry {asym:e}"),
        });
    }
    normalize_trace(&mut m).map_err(|total| Error::Discretization {
        i: 0,
        j: 0,
        k: 0,
        l: 0,
        reason: format!("diagonal sum is {total:e}"),
    })?;

    let rho = DensityMatrix::from_trusted(m, Structure::Bipartite(n, n));
    let island = check_island(&rho, grid, epsilon)?;
    if !island.converged {
        log::debug!(
            "grid with {n} points and half widths {:?} is not converged: boundary density {:e} >= {epsilon:e}",
            grid.half_width,
            island.max_boundary_magnitude
        );
    }
    Ok(Discretization {
        rho,
        island,
        sampling_asymmetry: asym,
    })
}

/// Discretizes straight to the reduced density matrix of `keep`, summing
/// the traced-out mode on the fly. Equivalent to `partial_trace(discretize(..))`
/// up to rounding, but needs only `n^3` kernel samples and `n^2` storage.
pub fn discretize_reduced<K>(kernel: K, grid: &GridSpec, keep: Mode) -> Result<DensityMatrix>
where
    K: Fn(f64, f64, f64, f64) -> Complex64 + Sync,
{
    let n = grid.points();
    let kept = grid.axis(keep);
    let traced = grid.axis(keep.other());
    let cell = grid.step(Mode::First) * grid.step(Mode::Second);
    let data = fill_columns(n, |k, out| {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = traced
                .iter()
                .map(|&y| match keep {
                    Mode::First => kernel(kept[i], y, kept[k], y),
                    Mode::Second => kernel(y, kept[i], y, kept[k]),
                })
                .sum::<Complex64>()
                * cell;
        }
    });
    let mut m = ComplexMatrix::from_vec(n, n, data);
    if let Some((i, _, k, _)) = first_non_finite(&m, 1) {
        return Err(Error::Discretization {
            i,
            j: 0,
            k,
            l: 0,
            reason: "non-finite reduced kernel sample".into(),
        });
    }
    let asym = hermitize(&mut m);
    if asym > MAX_SAMPLING_ASYMMETRY {
        return Err(Error::Discretization {
            i: 0,
            j: 0,
            k: 0,
            l: 0,
            reason: format!("kernel is not hermitian: relative asymmetry {asym:e}"),
        });
    }
    normalize_trace(&mut m).map_err(|total| Error::Discretization {
        i: 0,
        j: 0,
        k: 0,
        l: 0,
        reason: format!("diagonal sum is {total:e}"),
    })?;
    Ok(DensityMatrix::from_trusted(m, Structure::SingleMode(n)))
}

fn boundary_density(reduced: &DensityMatrix, step: f64) -> f64 {
    let m = reduced.matrix();
    let last = m.nrows() - 1;
    m[(0, 0)].norm().max(m[(last, last)].norm()) / step
}

/// Compares the reduced densities at the grid edge against `epsilon`.
///
/// Bipartite inputs are reduced to both modes; a single-mode input is read
/// on the first-mode axis of `grid`.
pub fn check_island(rho: &DensityMatrix, grid: &GridSpec, epsilon: f64) -> Result<IslandReport> {
    let max_boundary_magnitude = match rho.structure() {
        Structure::Bipartite(n1, n2) => {
            if n1 != grid.points() || n2 != grid.points() {
                return Err(Error::DimensionMismatch(format!(
                    "bipartite {n1} x {n2} matrix on a {}-point grid",
                    grid.points()
                )));
            }
            let r1 = partial_trace(rho, Mode::First)?;
            let r2 = partial_trace(rho, Mode::Second)?;
            boundary_density(&r1, grid.step(Mode::First)).max(boundary_density(&r2, grid.step(Mode::Second)))
        }
        Structure::SingleMode(n) => {
            if n != grid.points() {
                return Err(Error::DimensionMismatch(format!(
                    "{n}-dimensional matrix on a {}-point grid",
                    grid.points()
                )));
            }
            boundary_density(rho, grid.step(Mode::First))
        }
    };
    Ok(IslandReport {
        epsilon,
        max_boundary_magnitude,
        converged: max_boundary_magnitude < epsilon,
    })
}

/// Number of time samples used by [`auto_grid`] to find the widest state.
const AUTO_GRID_SAMPLES: usize = 1024;

/// Picks a symmetric grid whose half-width is `coverage_sigmas` times the
/// largest position standard deviation of `|psi|^2` (either mode) over
/// `t in [0, t_max]`.
pub fn auto_grid(
    params: &AmplifierParams,
    squeeze: &SqueezeParams,
    t_max: f64,
    points: usize,
    coverage_sigmas: f64,
) -> Result<GridSpec> {
    if !(coverage_sigmas > 0.0) || !coverage_sigmas.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "coverage_sigmas must be finite and > 0, got {coverage_sigmas}"
        )));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!("t_max must be finite and >= 0, got {t_max}")));
    }
    let mut widest = 0.0_f64;
    for s in 0..=AUTO_GRID_SAMPLES {
        let t = t_max * s as f64 / AUTO_GRID_SAMPLES as f64;
        let g = TwoModeGaussian::at(params, squeeze, t)?;
        let [s1, s2] = g.marginal_std_devs();
        widest = widest.max(s1).max(s2);
        if t_max == 0.0 {
            break;
        }
    }
    GridSpec::symmetric(points, coverage_sigmas * widest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densmat::hermitian_eigenvalues;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn vacuum() -> TwoModeGaussian {
        TwoModeGaussian::new(Complex64::new(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn grid_axes() {
        let g = GridSpec::new(5, 2.0, 4.0).unwrap();
        assert_eq!(g.axis(Mode::First), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(g.axis(Mode::Second), vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        assert!(GridSpec::symmetric(4, 1.0).is_err());
        assert!(GridSpec::symmetric(1, 1.0).is_err());
        assert!(GridSpec::symmetric(5, 0.0).is_err());
    }

    #[test]
    fn vacuum_has_pure_marginals() {
        let g = vacuum();
        let grid = GridSpec::symmetric(33, 6.0).unwrap();
        let d = discretize(|a, b, c, e| g.kernel(a, b, c, e), &grid, DEFAULT_EPSILON).unwrap();
        let r1 = partial_trace(&d.rho, Mode::First).unwrap();
        let s = hermitian_eigenvalues(r1.matrix()).unwrap();
        assert_abs_diff_eq!(s.eigenvalues()[0], 1.0, epsilon = 1e-6);
        assert!(s.eigenvalues()[1..].iter().all(|e| e.abs() < 1e-6));
        assert_eq!(d.rho.trace(), 1.0);
        assert!(d.island.converged);
    }

    #[test]
    fn rejects_non_finite_and_empty_kernels() {
        let grid = GridSpec::symmetric(3, 1.0).unwrap();
        let bad = discretize(
            |a, _, _, _| {
                if a > 0.5 {
                    Complex64::new(f64::NAN, 0.0)
                } else {
                    Complex64::new(1.0, 0.0)
                }
            },
            &grid,
            DEFAULT_EPSILON,
        );
        match bad {
            Err(Error::Discretization { i, .. }) => assert_eq!(i, 2),
            other => panic!("unexpected {other:?}"),
        }
        let zero = discretize(|_, _, _, _| Complex64::new(0.0, 0.0), &grid, DEFAULT_EPSILON);
        assert!(matches!(zero, Err(Error::Discretization { .. })));
    }

    #[test]
    fn rejects_non_hermitian_kernel() {
        let grid = GridSpec::symmetric(3, 1.0).unwrap();
        let r = discretize(|a, _, c, _| Complex64::new(1.0, a - 2.0 * c), &grid, DEFAULT_EPSILON);
        assert!(matches!(r, Err(Error::Discretization { .. })));
    }

    #[test]
    fn island_checks() {
        let g = vacuum();
        let k = |a, b, c, e| g.kernel(a, b, c, e);
        let wide = GridSpec::symmetric(33, 8.0 * FRAC_1_SQRT_2).unwrap();
        let d = discretize(k, &wide, 1e-8).unwrap();
        assert!(d.island.converged);
        // edge density of the vacuum marginal: exp(-L^2) / sqrt(pi)
        let expected = (-(8.0 * FRAC_1_SQRT_2).powi(2)).exp() / PI.sqrt();
        assert!((d.island.max_boundary_magnitude - expected).abs() < 1e-3 * expected);

        let narrow = GridSpec::symmetric(33, 1.0).unwrap();
        let d = discretize(k, &narrow, 1e-8).unwrap();
        assert!(!d.island.converged);
        let inf = check_island(&d.rho, &narrow, f64::INFINITY).unwrap();
        assert!(inf.converged);
    }

    #[test]
    fn reduced_path_matches_full_path() {
        let p = AmplifierParams::reference();
        let s = SqueezeParams::new(0.05_f64.atanh(), 0.0).unwrap();
        let g = TwoModeGaussian::at(&p, &s, 0.31).unwrap();
        let grid = GridSpec::symmetric(11, 4.0).unwrap();
        let k = |a, b, c, e| g.kernel(a, b, c, e);
        let full = discretize(k, &grid, DEFAULT_EPSILON).unwrap();
        for mode in [Mode::First, Mode::Second] {
            let a = partial_trace(&full.rho, mode).unwrap();
            let b = discretize_reduced(k, &grid, mode).unwrap();
            for (x, y) in a.matrix().iter().zip(b.matrix().iter()) {
                assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn auto_grid_for_vacuum() {
        let p = AmplifierParams::with_overrides(1.0, 1.0, 5.0, 2.0, Some(9.0), None).unwrap();
        let g = auto_grid(&p, &SqueezeParams::vacuum(), 0.0, 33, 6.0).unwrap();
        assert_abs_diff_eq!(g.half_width(Mode::First), 6.0 * FRAC_1_SQRT_2, epsilon = 1e-12);
        let g2 = auto_grid(&p, &SqueezeParams::vacuum(), 0.0, 33, 12.0).unwrap();
        assert_abs_diff_eq!(g2.half_width(Mode::First), 2.0 * g.half_width(Mode::First), epsilon = 1e-12);
        assert!(auto_grid(&p, &SqueezeParams::vacuum(), 0.0, 33, 0.0).is_err());
    }
}
