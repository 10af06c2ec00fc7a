//! Covariance-matrix elements `sigma_xy = <{x, y}>/2 - <x><y>` estimated
//! from discretized density matrices, and a quadrature oracle built on the
//! analytic wavefunction.
//!
//! Position moments are plain sums over the diagonal. Momentum enters
//! through `p = -i d/dz`, so momentum moments are central finite
//! differences of neighbouring matrix entries:
//!
//! ```text
//! <p>   = -i sum_i (R[i+1,i] - R[i-1,i]) / (2 dz)
//! <p^2> =   -sum_i (R[i+1,i] - 2 R[i,i] + R[i-1,i]) / dz^2
//! ```
//!
//! `R` carries one factor of `dz` (unit trace), entries outside the grid
//! are zero, and the estimators are second-order accurate in `dz`.

use num_complex::Complex64;

use crate::densmat::{partial_trace, DensityMatrix, Mode, Structure};
use crate::discretizer::GridSpec;
use crate::gaussian_state::{AmplifierParams, SqueezeParams, TwoModeGaussian};
use crate::{Error, Result};

/// Quadrature basis order of [`CovarianceMatrix`]: `(p1, p2, q1, q2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    P1 = 0,
    P2 = 1,
    Q1 = 2,
    Q2 = 3,
}

/// Real symmetric 4x4 matrix over `(p1, p2, q1, q2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    entries: [[f64; 4]; 4],
}

impl CovarianceMatrix {
    /// Builds from the upper triangle; the lower one is mirrored.
    pub fn from_upper(f: impl Fn(usize, usize) -> f64) -> Self {
        let entries = std::array::from_fn(|a| std::array::from_fn(|b| if a <= b { f(a, b) } else { f(b, a) }));
        CovarianceMatrix { entries }
    }

    pub fn get(&self, a: Quadrature, b: Quadrature) -> f64 {
        self.entries[a as usize][b as usize]
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.entries
    }

    /// `sigma_qq sigma_pp - sigma_qp^2` for one mode; at least 1/4 for any
    /// physical state.
    pub fn uncertainty_product(&self, mode: Mode) -> f64 {
        let (q, p) = match mode {
            Mode::First => (Quadrature::Q1, Quadrature::P1),
            Mode::Second => (Quadrature::Q2, Quadrature::P2),
        };
        self.get(q, q) * self.get(p, p) - self.get(q, p).powi(2)
    }
}

/// Stencil for first derivatives in the `<p>` estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstDifference {
    /// `(f(z + dz) - f(z - dz)) / (2 dz)`, second order.
    #[default]
    Central,
    /// `(f(z + dz) - f(z)) / dz`, first order.
    Forward,
}

struct Reduced<'a> {
    rho: &'a DensityMatrix,
    axis: Vec<f64>,
    step: f64,
}

impl Reduced<'_> {
    fn at(&self, i: isize, k: isize) -> Complex64 {
        let n = self.axis.len() as isize;
        if i < 0 || k < 0 || i >= n || k >= n {
            Complex64::new(0.0, 0.0)
        } else {
            self.rho.matrix()[(i as usize, k as usize)]
        }
    }

    fn len(&self) -> isize {
        self.axis.len() as isize
    }
}

fn reduced<'a>(rho: &'a DensityMatrix, grid: &GridSpec, mode: Mode) -> Result<Reduced<'a>> {
    match rho.structure() {
        Structure::SingleMode(n) if n == grid.points() => {}
        Structure::SingleMode(n) => {
            return Err(Error::DimensionMismatch(format!(
                "{n}-dimensional reduced matrix on a {}-point grid",
                grid.points()
            )))
        }
        Structure::Bipartite(..) => {
            return Err(Error::InvalidParameter("expected a reduced (single-mode) density matrix".into()))
        }
    }
    Ok(Reduced {
        rho,
        axis: grid.axis(mode),
        step: grid.step(mode),
    })
}

fn real_part(z: Complex64, what: &str) -> f64 {
    if z.im.abs() > 1e-10 * z.re.abs().max(1.0) {
        log::warn!("{what}: discarding imaginary residue {:e}", z.im);
    }
    z.re
}

/// `<q>` of a reduced matrix.
pub fn mean_q(rho: &DensityMatrix, grid: &GridSpec, mode: Mode) -> Result<f64> {
    let r = reduced(rho, grid, mode)?;
    Ok(r.axis.iter().enumerate().map(|(i, z)| r.rho.matrix()[(i, i)].re * z).sum())
}

/// `<p>` of a reduced matrix.
pub fn mean_p(rho: &DensityMatrix, grid: &GridSpec, mode: Mode, stencil: FirstDifference) -> Result<f64> {
    let r = reduced(rho, grid, mode)?;
    Ok(mean_p_of(&r, stencil))
}

fn mean_p_of(r: &Reduced<'_>, stencil: FirstDifference) -> f64 {
    let minus_i = Complex64::new(0.0, -1.0);
    let sum: Complex64 = (0..r.len())
        .map(|i| match stencil {
            FirstDifference::Central => (r.at(i + 1, i) - r.at(i - 1, i)) / (2.0 * r.step),
            FirstDifference::Forward => (r.at(i + 1, i) - r.at(i, i)) / r.step,
        })
        .sum();
    let value = minus_i * sum;
    match stencil {
        FirstDifference::Central => real_part(value, "<p>"),
        // the forward stencil's imaginary part is an O(dz) artefact
        FirstDifference::Forward => value.re,
    }
}

fn check_stencil(grid: &GridSpec) -> Result<()> {
    if grid.points() < 3 {
        return Err(Error::InvalidParameter("finite differences need at least 3 points".into()));
    }
    Ok(())
}

/// `sum_i R[i,i] z_i^2 - (sum_i R[i,i] z_i)^2`.
pub fn sigma_qq(rho: &DensityMatrix, grid: &GridSpec, mode: Mode) -> Result<f64> {
    let r = reduced(rho, grid, mode)?;
    let (m1, m2) = r.axis.iter().enumerate().fold((0.0, 0.0), |(m1, m2), (i, &z)| {
        let w = r.rho.matrix()[(i, i)].re;
        (m1 + w * z, m2 + w * z * z)
    });
    Ok(m2 - m1 * m1)
}

/// `<p^2> - <p>^2` with central differences.
pub fn sigma_pp(rho: &DensityMatrix, grid: &GridSpec, mode: Mode) -> Result<f64> {
    sigma_pp_with(rho, grid, mode, FirstDifference::Central)
}

/// `<p^2> - <p>^2`, choosing the stencil for `<p>`. The second-difference
/// stencil for `<p^2>` is always symmetric.
pub fn sigma_pp_with(rho: &DensityMatrix, grid: &GridSpec, mode: Mode, stencil: FirstDifference) -> Result<f64> {
    check_stencil(grid)?;
    let r = reduced(rho, grid, mode)?;
    let second: Complex64 = (0..r.len())
        .map(|i| r.at(i + 1, i) - 2.0 * r.at(i, i) + r.at(i - 1, i))
        .sum::<Complex64>()
        / (r.step * r.step);
    let p2 = real_part(-second, "<p^2>");
    let p = mean_p_of(&r, stencil);
    Ok(p2 - p * p)
}

/// Symmetrized `<qp + pq>/2 - <q><p>`.
///
/// `(qp + pq)/2` acts on the kernel as `-i/2 (d/dz - d/dz') rho(z, z')`,
/// evaluated on the diagonal.
pub fn sigma_qp(rho: &DensityMatrix, grid: &GridSpec, mode: Mode) -> Result<f64> {
    check_stencil(grid)?;
    let r = reduced(rho, grid, mode)?;
    let minus_half_i = Complex64::new(0.0, -0.5);
    let sym: Complex64 = (0..r.len())
        .map(|i| {
            let d_left = r.at(i + 1, i) - r.at(i - 1, i);
            let d_right = r.at(i, i + 1) - r.at(i, i - 1);
            (d_left - d_right) * r.axis[i as usize]
        })
        .sum::<Complex64>()
        * minus_half_i
        / (2.0 * r.step);
    let sym = real_part(sym, "<qp + pq>/2");
    let q: f64 = r.axis.iter().enumerate().map(|(i, z)| r.rho.matrix()[(i, i)].re * z).sum();
    Ok(sym - q * mean_p_of(&r, FirstDifference::Central))
}

/// `<p1 p2> - <p1><p2>` from a bipartite matrix, with
/// `<p1 p2> = -sum d^2 rho / (dx dy)` on the diagonal via the four-point
/// mixed central difference.
pub fn sigma_p1p2(rho: &DensityMatrix, grid: &GridSpec) -> Result<f64> {
    check_stencil(grid)?;
    let n = match rho.structure() {
        Structure::Bipartite(n1, n2) if n1 == grid.points() && n2 == grid.points() => n1 as isize,
        Structure::Bipartite(n1, n2) => {
            return Err(Error::DimensionMismatch(format!(
                "bipartite {n1} x {n2} matrix on a {}-point grid",
                grid.points()
            )))
        }
        Structure::SingleMode(_) => return Err(Error::NotBipartite),
    };
    let m = rho.matrix();
    let at = |i: isize, j: isize, k: isize, l: isize| -> Complex64 {
        if [i, j, k, l].iter().any(|&v| v < 0 || v >= n) {
            Complex64::new(0.0, 0.0)
        } else {
            m[((i * n + j) as usize, (k * n + l) as usize)]
        }
    };
    let mut mixed = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            mixed += at(i + 1, j + 1, i, j) - at(i + 1, j - 1, i, j) - at(i - 1, j + 1, i, j) + at(i - 1, j - 1, i, j);
        }
    }
    let p1p2 = -mixed.re / (4.0 * grid.step(Mode::First) * grid.step(Mode::Second));
    let r1 = partial_trace(rho, Mode::First)?;
    let r2 = partial_trace(rho, Mode::Second)?;
    let p1 = mean_p(&r1, grid, Mode::First, FirstDifference::Central)?;
    let p2 = mean_p(&r2, grid, Mode::Second, FirstDifference::Central)?;
    Ok(p1p2 - p1 * p2)
}

/// Midpoint-rule settings for [`covariance_oracle_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleQuadrature {
    /// Cells per axis.
    pub cells: usize,
    /// Half-widths in units of each mode's position standard deviation.
    pub half_width_sigmas: f64,
    /// Largest entry change tolerated when the cell count is doubled.
    pub refinement_tol: f64,
}

impl Default for OracleQuadrature {
    /// Eight times a 33-point working grid, over 1.5 times its 6-sigma extent.
    fn default() -> Self {
        OracleQuadrature {
            cells: 8 * 33,
            half_width_sigmas: 1.5 * 6.0,
            refinement_tol: 1e-8,
        }
    }
}

fn quadrature_moments(g: &TwoModeGaussian, half: [f64; 2], cells: usize) -> CovarianceMatrix {
    let h = [2.0 * half[0] / cells as f64, 2.0 * half[1] / cells as f64];
    let minus_i = Complex64::new(0.0, -1.0);
    // sums over cells of: weight, q1, q2, <p1>, <p2>, and the 10 second moments
    let mut norm = 0.0;
    let mut first = [0.0; 4];
    let mut second = [[0.0; 4]; 4];
    for a in 0..cells {
        let x1 = -half[0] + (a as f64 + 0.5) * h[0];
        for b in 0..cells {
            let x2 = -half[1] + (b as f64 + 0.5) * h[1];
            let psi = g.psi(x1, x2);
            let (g1, g2) = g.gradient(x1, x2);
            let dens = psi.norm_sqr();
            // momentum amplitudes: p_k psi = -i d_k psi
            let p = [minus_i * g1, minus_i * g2];
            let cpsi = psi.conj();
            norm += dens;
            first[Quadrature::P1 as usize] += (cpsi * p[0]).re;
            first[Quadrature::P2 as usize] += (cpsi * p[1]).re;
            first[Quadrature::Q1 as usize] += dens * x1;
            first[Quadrature::Q2 as usize] += dens * x2;

            second[0][0] += p[0].norm_sqr();
            second[1][1] += p[1].norm_sqr();
            second[0][1] += (p[0].conj() * p[1]).re;
            second[2][2] += dens * x1 * x1;
            second[3][3] += dens * x2 * x2;
            second[2][3] += dens * x1 * x2;
            // Re <psi| q_a p_b |psi> is the symmetrized moment
            second[0][2] += (cpsi * x1 * p[0]).re;
            second[0][3] += (cpsi * x2 * p[0]).re;
            second[1][2] += (cpsi * x1 * p[1]).re;
            second[1][3] += (cpsi * x2 * p[1]).re;
        }
    }
    CovarianceMatrix::from_upper(|a, b| second[a][b] / norm - (first[a] / norm) * (first[b] / norm))
}

/// Covariance matrix of the analytic state at time `t` by 2-D midpoint
/// quadrature, with the default [`OracleQuadrature`].
pub fn covariance_oracle(params: &AmplifierParams, squeeze: &SqueezeParams, t: f64) -> Result<CovarianceMatrix> {
    covariance_oracle_with(params, squeeze, t, OracleQuadrature::default())
}

/// Position moments come from `|psi|^2`; momentum moments from the
/// analytic gradient of the Gaussian exponent. The result is accepted only
/// if doubling the cell count changes no entry by more than
/// `refinement_tol`.
pub fn covariance_oracle_with(
    params: &AmplifierParams,
    squeeze: &SqueezeParams,
    t: f64,
    quad: OracleQuadrature,
) -> Result<CovarianceMatrix> {
    let g = TwoModeGaussian::at(params, squeeze, t)?;
    let [s1, s2] = g.marginal_std_devs();
    let half = [quad.half_width_sigmas * s1, quad.half_width_sigmas * s2];
    let coarse = quadrature_moments(&g, half, quad.cells);
    let fine = quadrature_moments(&g, half, 2 * quad.cells);
    let change = coarse
        .entries
        .iter()
        .flatten()
        .zip(fine.entries.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(change < quad.refinement_tol) {
        return Err(Error::QuadratureNotConverged {
            quantity: "covariance entry",
            change,
        });
    }
    Ok(fine)
}
