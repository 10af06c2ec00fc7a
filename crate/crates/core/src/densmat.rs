//! Finite complex hermitian matrices and density matrices.
//!
//! Bipartite matrices use a fixed combined-index layout: mode-1 index `a`
//! and mode-2 index `b` map to row `a * n2 + b` (mode-1 major). Every other
//! module relies on this convention.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

/// Dense square complex matrix.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Hermiticity tolerance, relative to the largest entry magnitude.
pub const TAU_HERM: f64 = 1e-10;
/// Absolute tolerance on `|Tr - 1|`.
pub const TAU_TRACE: f64 = 1e-8;
/// Eigenvalues down to `-TAU_PSD` count as round-off.
pub const TAU_PSD: f64 = 1e-9;

/// Which subsystem of a bipartite matrix an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    First,
    Second,
}

impl Mode {
    pub fn other(self) -> Mode {
        match self {
            Mode::First => Mode::Second,
            Mode::Second => Mode::First,
        }
    }
}

/// Index structure of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    SingleMode(usize),
    Bipartite(usize, usize),
}

impl Structure {
    pub fn dim(self) -> usize {
        match self {
            Structure::SingleMode(n) => n,
            Structure::Bipartite(n1, n2) => n1 * n2,
        }
    }
}

/// Largest `|m(j,k) - conj(m(k,j))|` divided by the largest `|m(j,k)|`.
pub fn relative_asymmetry(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut max_entry = 0.0_f64;
    let mut max_diff = 0.0_f64;
    for j in 0..n {
        for k in 0..n {
            max_entry = max_entry.max(m[(j, k)].norm());
            if k >= j {
                max_diff = max_diff.max((m[(j, k)] - m[(k, j)].conj()).norm());
            }
        }
    }
    if max_entry == 0.0 {
        0.0
    } else {
        max_diff / max_entry
    }
}

fn check_square(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    check_square(m)?;
    let asym = relative_asymmetry(m);
    if asym > TAU_HERM {
        return Err(Error::NotHermitian {
            max_asymmetry: asym,
        });
    }
    Ok(())
}

/// Cholesky factorization of `m + shift * I` from its lower triangle,
/// stopping at the first non-positive pivot. The factor is stored as
/// `U = L^H` so the inner products run down contiguous columns.
fn cholesky_succeeds(m: &ComplexMatrix, shift: f64) -> bool {
    let n = m.nrows();
    let mut u = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let col_j = u.column(j);
        let pivot = m[(j, j)].re + shift - col_j.rows(0, j).iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !(pivot > 0.0) {
            return false;
        }
        let d = pivot.sqrt();
        u[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= u[(k, i)].conj() * u[(k, j)];
            }
            u[(j, i)] = v.conj() / d;
        }
    }
    true
}

/// Real part of the trace, summed in index order.
pub fn real_trace(m: &ComplexMatrix) -> f64 {
    (0..m.nrows()).map(|j| m[(j, j)].re).sum()
}

/// A hermitian, positive semi-definite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    structure: Structure,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    ///
    /// Positivity is certified by a Cholesky factorization of
    /// `mat + TAU_PSD * I`, which exists exactly when every eigenvalue of
    /// `mat` is above `-TAU_PSD`.
    pub fn new(mat: ComplexMatrix, structure: Structure) -> Result<Self> {
        check_hermitian(&mat)?;
        if mat.nrows() != structure.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {0}x{0} but structure {structure:?} needs {1}",
                mat.nrows(),
                structure.dim()
            )));
        }
        let dm = DensityMatrix { mat, structure };
        dm.validate()?;
        Ok(dm)
    }

    pub fn single_mode(mat: ComplexMatrix) -> Result<Self> {
        let n = mat.nrows();
        Self::new(mat, Structure::SingleMode(n))
    }

    pub fn bipartite(mat: ComplexMatrix, n1: usize, n2: usize) -> Result<Self> {
        Self::new(mat, Structure::Bipartite(n1, n2))
    }

    /// For matrices whose invariants hold by construction.
    pub(crate) fn from_trusted(mat: ComplexMatrix, structure: Structure) -> Self {
        debug_assert_eq!(mat.nrows(), structure.dim());
        DensityMatrix { mat, structure }
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn from_pure_state(psi: &[Complex64], structure: Structure) -> Result<Self> {
        if psi.len() != structure.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} components, structure needs {}",
                psi.len(),
                structure.dim()
            )));
        }
        let norm2: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero norm".into()));
        }
        let n = psi.len();
        let mat = ComplexMatrix::from_fn(n, n, |j, k| psi[j] * psi[k].conj() / norm2);
        Ok(Self::from_trusted(mat, structure))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let mat = ComplexMatrix::from_fn(n, n, |j, k| {
            if j == k {
                Complex64::new(1.0 / n as f64, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::from_trusted(mat, Structure::SingleMode(n))
    }

    /// Product state `a (x) b` in the combined-index layout.
    pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        let mat = a.mat.kronecker(&b.mat);
        Self::from_trusted(mat, Structure::Bipartite(a.dim(), b.dim()))
    }

    /// Re-checks all invariants.
    pub fn validate(&self) -> Result<()> {
        check_hermitian(&self.mat)?;
        let tr = real_trace(&self.mat);
        if (tr - 1.0).abs() > TAU_TRACE {
            return Err(Error::NotNormalized { trace: tr });
        }
        if !cholesky_succeeds(&self.mat, TAU_PSD) {
            return Err(Error::NotPositive { tolerance: TAU_PSD });
        }
        Ok(())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        real_trace(&self.mat)
    }

    pub fn spectrum(&self) -> Spectrum {
        eigenvalues_unchecked(&self.mat)
    }
}

/// Real eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Sorts the values into descending order.
    pub fn new(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Spectrum { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// Eigenvalues with negative entries set to zero.
    pub fn clamped(&self) -> Vec<f64> {
        let mut roundoff = 0usize;
        let out = self
            .eigenvalues
            .iter()
            .map(|&e| {
                if e < 0.0 {
                    if e < -TAU_PSD {
                        log::warn!("clamping eigenvalue {e:e} below -{TAU_PSD:e}");
                    } else {
                        roundoff += 1;
                    }
                    0.0
                } else {
                    e
                }
            })
            .collect();
        if roundoff > 0 {
            log::debug!("clamped {roundoff} round-off negative eigenvalues to 0");
        }
        out
    }
}

fn eigenvalues_unchecked(m: &ComplexMatrix) -> Spectrum {
    Spectrum::new(m.clone().symmetric_eigenvalues().iter().copied().collect())
}

/// Eigenvalues of a hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Spectrum> {
    check_hermitian(m)?;
    Ok(eigenvalues_unchecked(m))
}

/// Full eigendecomposition of a hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Unsorted, paired with the columns of `vectors`.
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        check_hermitian(m)?;
        let eig = SymmetricEigen::new(m.clone());
        Ok(HermitianEigen {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        })
    }

    /// `V diag(f(values)) V^dagger`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.nrows();
        let fv: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        ComplexMatrix::from_fn(n, n, |j, k| {
            (0..n)
                .map(|i| self.vectors[(j, i)] * self.vectors[(k, i)].conj() * fv[i])
                .sum()
        })
    }
}

fn bipartite_dims(rho: &DensityMatrix) -> Result<(usize, usize)> {
    match rho.structure {
        Structure::Bipartite(n1, n2) => Ok((n1, n2)),
        Structure::SingleMode(_) => Err(Error::NotBipartite),
    }
}

/// Reduced density matrix of the `keep` mode.
pub fn partial_trace(rho: &DensityMatrix, keep: Mode) -> Result<DensityMatrix> {
    let (n1, n2) = bipartite_dims(rho)?;
    let m = &rho.mat;
    let out = match keep {
        Mode::First => ComplexMatrix::from_fn(n1, n1, |a, ap| {
            (0..n2).map(|b| m[(a * n2 + b, ap * n2 + b)]).sum()
        }),
        Mode::Second => ComplexMatrix::from_fn(n2, n2, |b, bp| {
            (0..n1).map(|a| m[(a * n2 + b, a * n2 + bp)]).sum()
        }),
    };
    let n = out.nrows();
    Ok(DensityMatrix::from_trusted(out, Structure::SingleMode(n)))
}

/// Transposes the indices of one subsystem of an `(n1 n2) x (n1 n2)` matrix.
///
/// For `Mode::Second`: `out[(i,j),(k,l)] = m[(i,l),(k,j)]`.
/// For `Mode::First`: `out[(i,j),(k,l)] = m[(k,j),(i,l)]`.
pub fn transpose_subsystem(m: &ComplexMatrix, n1: usize, n2: usize, mode: Mode) -> Result<ComplexMatrix> {
    check_square(m)?;
    if m.nrows() != n1 * n2 {
        return Err(Error::DimensionMismatch(format!(
            "{0}x{0} matrix cannot be split as {n1} x {n2}",
            m.nrows()
        )));
    }
    let dim = n1 * n2;
    Ok(ComplexMatrix::from_fn(dim, dim, |row, col| {
        let (i, j) = (row / n2, row % n2);
        let (k, l) = (col / n2, col % n2);
        match mode {
            Mode::Second => m[(i * n2 + l, k * n2 + j)],
            Mode::First => m[(k * n2 + j, i * n2 + l)],
        }
    }))
}

/// Partial transpose with respect to `mode`.
pub fn partial_transpose(rho: &DensityMatrix, mode: Mode) -> Result<ComplexMatrix> {
    let (n1, n2) = bipartite_dims(rho)?;
    transpose_subsystem(&rho.mat, n1, n2, mode)
}
