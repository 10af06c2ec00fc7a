//! Cut maps: zero a set of rows and columns of a density matrix and
//! renormalize by the remaining trace, `rho -> P rho P / Tr(P rho P)` with
//! `P` a diagonal 0/1 projector.
//!
//! The renormalization makes these maps positive but not linear.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::densmat::{real_trace, ComplexMatrix, DensityMatrix, HermitianEigen, Structure};
use crate::{Error, Result};

/// Projected traces at or below this magnitude make a cut degenerate.
pub const DEGENERATE_TRACE: f64 = 1e-14;
/// Eigenvalues at or below this are outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// The indices a cut removes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSpec {
    dim: usize,
    removed: Vec<usize>,
}

impl CutSpec {
    /// `removed` must be a nonempty proper subset of `0..dim`, without repeats.
    pub fn new(dim: usize, removed: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for r in removed {
            if r >= dim {
                return Err(Error::InvalidParameter(format!("index {r} out of range for dimension {dim}")));
            }
            if !set.insert(r) {
                return Err(Error::InvalidParameter(format!("index {r} removed twice")));
            }
        }
        if set.is_empty() || set.len() >= dim {
            return Err(Error::InvalidParameter(format!(
                "must remove between 1 and {} of {dim} indices, got {}",
                dim.saturating_sub(1),
                set.len()
            )));
        }
        Ok(CutSpec {
            dim,
            removed: set.into_iter().collect(),
        })
    }

    /// Removes every combined index `(a, b)` with `a` in `removed_first` or
    /// `b` in `removed_second`, so that the kept set is a product and the
    /// compact result is again bipartite.
    pub fn product(n1: usize, n2: usize, removed_first: &[usize], removed_second: &[usize]) -> Result<Self> {
        let a: BTreeSet<usize> = removed_first.iter().copied().collect();
        let b: BTreeSet<usize> = removed_second.iter().copied().collect();
        if a.iter().any(|&x| x >= n1) || b.iter().any(|&x| x >= n2) {
            return Err(Error::InvalidParameter("per-mode index out of range".into()));
        }
        let removed = (0..n1 * n2).filter(|idx| a.contains(&(idx / n2)) || b.contains(&(idx % n2)));
        Self::new(n1 * n2, removed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn removed(&self) -> &[usize] {
        &self.removed
    }

    pub fn keep_count(&self) -> usize {
        self.dim - self.removed.len()
    }

    pub fn kept(&self) -> Vec<usize> {
        (0..self.dim).filter(|i| self.removed.binary_search(i).is_err()).collect()
    }

    /// Diagonal projector onto the kept indices, rank `keep_count`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim, self.dim, |j, k| {
            if j == k && self.removed.binary_search(&j).is_err() {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// If the removed set is a product removal on an `n1 x n2` index space,
    /// the per-mode kept counts.
    fn product_shape(&self, n1: usize, n2: usize) -> Option<(usize, usize)> {
        let removed: BTreeSet<usize> = self.removed.iter().copied().collect();
        let rows: Vec<usize> = (0..n1).filter(|&a| (0..n2).all(|b| removed.contains(&(a * n2 + b)))).collect();
        let cols: Vec<usize> = (0..n2).filter(|&b| (0..n1).all(|a| removed.contains(&(a * n2 + b)))).collect();
        let expected = CutSpec::product(n1, n2, &rows, &cols).ok()?;
        (expected.removed == self.removed).then(|| (n1 - rows.len(), n2 - cols.len()))
    }
}

fn check_dim(rho: &DensityMatrix, spec: &CutSpec) -> Result<()> {
    if rho.dim() != spec.dim {
        return Err(Error::DimensionMismatch(format!(
            "cut for dimension {} applied to a {}-dimensional matrix",
            spec.dim,
            rho.dim()
        )));
    }
    Ok(())
}

fn divide_by_trace(mut m: ComplexMatrix) -> Result<ComplexMatrix> {
    let trace = real_trace(&m);
    if trace.abs() <= DEGENERATE_TRACE {
        return Err(Error::CutDegenerate { trace });
    }
    m.iter_mut().for_each(|z| *z /= trace);
    Ok(m)
}

/// Applies the cut map.
///
/// With `compact = false` the result keeps dimension `N` with zeroed rows
/// and columns. With `compact = true` those rows and columns are dropped.
/// A compact cut of a bipartite matrix stays bipartite only when the
/// removal is a product removal (see [`CutSpec::product`]); otherwise the
/// subsystem structure is lost and the result is single-mode.
pub fn cut(rho: &DensityMatrix, spec: &CutSpec, compact: bool) -> Result<DensityMatrix> {
    check_dim(rho, spec)?;
    let m = rho.matrix();
    if compact {
        let kept = spec.kept();
        let k = kept.len();
        let sub = ComplexMatrix::from_fn(k, k, |a, b| m[(kept[a], kept[b])]);
        let out = divide_by_trace(sub)?;
        let structure = match rho.structure() {
            Structure::Bipartite(n1, n2) => match spec.product_shape(n1, n2) {
                Some((k1, k2)) => Structure::Bipartite(k1, k2),
                None => {
                    log::warn!("cut removes a non-product index set; result loses its bipartite structure");
                    Structure::SingleMode(k)
                }
            },
            Structure::SingleMode(_) => Structure::SingleMode(k),
        };
        Ok(DensityMatrix::from_trusted(out, structure))
    } else {
        let mut zeroed = m.clone();
        for &r in &spec.removed {
            zeroed.row_mut(r).fill(Complex64::new(0.0, 0.0));
            zeroed.column_mut(r).fill(Complex64::new(0.0, 0.0));
        }
        let out = divide_by_trace(zeroed)?;
        Ok(DensityMatrix::from_trusted(out, rho.structure()))
    }
}

/// `P rho P / Tr(P rho P)` evaluated with explicit matrix products.
pub fn projector_cut(rho: &DensityMatrix, spec: &CutSpec) -> Result<DensityMatrix> {
    check_dim(rho, spec)?;
    let p = spec.projector();
    let projected = &p * rho.matrix() * &p;
    Ok(DensityMatrix::from_trusted(divide_by_trace(projected)?, rho.structure()))
}

fn parity_cut(rho: &DensityMatrix, remove_parity: usize) -> Result<DensityMatrix> {
    let spec = CutSpec::new(rho.dim(), (0..rho.dim()).filter(|i| i % 2 == remove_parity))?;
    cut(rho, &spec, true)
}

/// Keeps the odd indices `1, 3, 5, ...` (compact, renormalized).
pub fn odd_map(rho: &DensityMatrix) -> Result<DensityMatrix> {
    parity_cut(rho, 0)
}

/// Keeps the even indices `0, 2, 4, ...` (compact, renormalized).
pub fn even_map(rho: &DensityMatrix) -> Result<DensityMatrix> {
    parity_cut(rho, 1)
}

/// How much of a state survives a cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreservationReport {
    pub q: f64,
    /// `S(rho) - S(rho'')`, von Neumann.
    pub delta_vn: f64,
    /// `(Tr rho^q - Tr rho''^q) / (1 - q)`.
    pub delta_tsallis: f64,
    /// `Tr(rho^q rho''^(1-q)) / (1 - q)`. Has no `-1` term, so it does not
    /// vanish at `rho'' = rho`.
    pub relative_q_entropy: f64,
    /// `Tr(rho ln rho) - Tr(rho ln rho'')`; `+inf` when the support of `rho`
    /// is not inside the support of `rho''`.
    pub relative_vn: f64,
}

fn xlnx(x: f64) -> f64 {
    if x <= SUPPORT_TOL {
        0.0
    } else {
        x * x.ln()
    }
}

/// Power on the support; eigenvalues at or below [`SUPPORT_TOL`] map to 0.
fn support_pow(x: f64, s: f64) -> f64 {
    if x <= SUPPORT_TOL {
        0.0
    } else {
        x.powf(s)
    }
}

/// Compares `rho` with its non-compact cut `rho_cut` (same dimension).
pub fn preservation_report(rho: &DensityMatrix, rho_cut: &DensityMatrix, q: f64) -> Result<PreservationReport> {
    if rho.dim() != rho_cut.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cut matrix must be given in non-compact form: {} vs {}",
            rho.dim(),
            rho_cut.dim()
        )));
    }
    if q == 1.0 {
        return Err(Error::TsallisAtUnity);
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("q must be finite and > 0, got {q}")));
    }
    let a = HermitianEigen::new(rho.matrix())?;
    let b = HermitianEigen::new(rho_cut.matrix())?;
    // overlaps[(i, j)] = |<u_i|v_j>|^2
    let overlaps = (a.vectors.adjoint() * &b.vectors).map(|z| z.norm_sqr());
    let n = rho.dim();

    let s_a: f64 = -a.values.iter().map(|&x| xlnx(x)).sum::<f64>();
    let s_b: f64 = -b.values.iter().map(|&x| xlnx(x)).sum::<f64>();
    let tr_a_q: f64 = a.values.iter().map(|&x| support_pow(x, q)).sum();
    let tr_b_q: f64 = b.values.iter().map(|&x| support_pow(x, q)).sum();

    let mut mixed_q = 0.0;
    let mut cross_log = 0.0;
    let mut weight_outside = 0.0;
    for i in 0..n {
        let la = a.values[i].max(0.0);
        for j in 0..n {
            let w = overlaps[(i, j)];
            let lb = b.values[j];
            mixed_q += support_pow(la, q) * support_pow(lb, 1.0 - q) * w;
            if lb > SUPPORT_TOL {
                cross_log += la * lb.ln() * w;
            } else {
                weight_outside += la * w;
            }
        }
    }
    let relative_vn = if weight_outside > SUPPORT_TOL {
        f64::INFINITY
    } else {
        -s_a - cross_log
    };
    Ok(PreservationReport {
        q,
        delta_vn: s_a - s_b,
        delta_tsallis: (tr_a_q - tr_b_q) / (1.0 - q),
        relative_q_entropy: mixed_q / (1.0 - q),
        relative_vn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densmat::hermitian_eigenvalues;
    use approx::assert_abs_diff_eq;

    fn qutrit() -> DensityMatrix {
        let e = [
            [0.5, 0.1, 0.05],
            [0.1, 0.3, 0.02],
            [0.05, 0.02, 0.2],
        ];
        let mut m = ComplexMatrix::from_fn(3, 3, |j, k| Complex64::new(e[j][k], 0.0));
        m[(0, 1)].im = 0.04;
        m[(1, 0)].im = -0.04;
        DensityMatrix::single_mode(m).unwrap()
    }

    #[test]
    fn cut_spec_validation() {
        assert!(CutSpec::new(3, []).is_err());
        assert!(CutSpec::new(3, [0, 1, 2]).is_err());
        assert!(CutSpec::new(3, [3]).is_err());
        assert!(CutSpec::new(3, [1, 1]).is_err());
        let s = CutSpec::new(4, [3, 1]).unwrap();
        assert_eq!(s.removed(), &[1, 3]);
        assert_eq!(s.kept(), vec![0, 2]);
        assert_eq!(s.keep_count(), 2);
    }

    #[test]
    fn qutrit_compact_cut_matches_closed_form() {
        let rho = qutrit();
        let m = rho.matrix();
        let out = cut(&rho, &CutSpec::new(3, [0]).unwrap(), true).unwrap();
        let norm = m[(1, 1)].re + m[(2, 2)].re;
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(out.matrix()[(a, b)], m[(a + 1, b + 1)] / norm);
        }
    }

    #[test]
    fn two_removed_gives_unit_entry() {
        let out = cut(&qutrit(), &CutSpec::new(3, [1, 2]).unwrap(), false).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let expected = if (j, k) == (0, 0) { 1.0 } else { 0.0 };
                assert_eq!(out.matrix()[(j, k)], Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn maximally_mixed_stays_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(6);
        let out = cut(&rho, &CutSpec::new(6, [0, 4]).unwrap(), true).unwrap();
        assert_eq!(out, DensityMatrix::maximally_mixed(4));
    }

    #[test]
    fn degenerate_cut() {
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        let rho = DensityMatrix::single_mode(m).unwrap();
        assert!(matches!(
            cut(&rho, &CutSpec::new(3, [0]).unwrap(), true),
            Err(Error::CutDegenerate { .. })
        ));
    }

    #[test]
    fn odd_even_maps() {
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(1, 1)] = Complex64::new(0.25, 0.0);
        m[(2, 2)] = Complex64::new(0.25, 0.0);
        let rho = DensityMatrix::single_mode(m).unwrap();
        let odd = odd_map(&rho).unwrap();
        assert_eq!(odd.dim(), 1);
        assert_eq!(odd.matrix()[(0, 0)].re, 1.0);
        let even = even_map(&rho).unwrap();
        assert_eq!(even.dim(), 2);
        assert_eq!(even.matrix()[(0, 0)].re, 0.5 / 0.75);
        assert!(odd_map(&DensityMatrix::maximally_mixed(1)).is_err());
    }

    #[test]
    fn product_cut_keeps_bipartite_structure() {
        let a = DensityMatrix::maximally_mixed(3);
        let b = DensityMatrix::maximally_mixed(4);
        let ab = DensityMatrix::tensor(&a, &b);
        let spec = CutSpec::product(3, 4, &[1], &[0, 2]).unwrap();
        let out = cut(&ab, &spec, true).unwrap();
        assert_eq!(out.structure(), Structure::Bipartite(2, 2));
        let arbitrary = CutSpec::new(12, [0]).unwrap();
        let out = cut(&ab, &arbitrary, true).unwrap();
        assert_eq!(out.structure(), Structure::SingleMode(11));
    }

    #[test]
    fn nonlinearity_witness() {
        let rho1 = qutrit();
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(0, 0)] = Complex64::new(0.9, 0.0);
        m[(2, 2)] = Complex64::new(0.1, 0.0);
        let rho2 = DensityMatrix::single_mode(m).unwrap();
        let lam = 0.5;
        let mixed = DensityMatrix::single_mode(rho1.matrix() * Complex64::new(lam, 0.0) + rho2.matrix() * Complex64::new(1.0 - lam, 0.0)).unwrap();
        let spec = CutSpec::new(3, [0]).unwrap();
        let lhs = cut(&mixed, &spec, true).unwrap();
        let rhs = cut(&rho1, &spec, true).unwrap().matrix() * Complex64::new(lam, 0.0)
            + cut(&rho2, &spec, true).unwrap().matrix() * Complex64::new(1.0 - lam, 0.0);
        let diff = (lhs.matrix() - rhs).map(|z| z.norm()).max();
        assert!(diff > 0.05, "cut map behaved linearly: diff {diff}");
    }

    #[test]
    fn identical_arguments_have_zero_preservation_loss() {
        // block-diagonal state with no weight on index 0
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(1, 1)] = Complex64::new(0.6, 0.0);
        m[(2, 2)] = Complex64::new(0.4, 0.0);
        m[(1, 2)] = Complex64::new(0.1, 0.1);
        m[(2, 1)] = Complex64::new(0.1, -0.1);
        let rho = DensityMatrix::single_mode(m).unwrap();
        let cutted = cut(&rho, &CutSpec::new(3, [0]).unwrap(), false).unwrap();
        let r = preservation_report(&rho, &cutted, 2.0).unwrap();
        assert_abs_diff_eq!(r.delta_vn, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.relative_vn, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.delta_tsallis, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn maximally_mixed_preservation() {
        let rho = DensityMatrix::maximally_mixed(4);
        let c = cut(&rho, &CutSpec::new(4, [0, 3]).unwrap(), false).unwrap();
        let r = preservation_report(&rho, &c, 2.0).unwrap();
        assert_abs_diff_eq!(r.delta_vn, 2f64.ln(), epsilon = 1e-12);
        // Tr rho^2 = 1/4, Tr rho''^2 = 1/2
        assert_abs_diff_eq!(r.delta_tsallis, (0.25 - 0.5) / (1.0 - 2.0), epsilon = 1e-12);
        assert_eq!(r.relative_vn, f64::INFINITY);
        assert!(matches!(preservation_report(&rho, &c, 1.0), Err(Error::TsallisAtUnity)));
        let compact = cut(&rho, &CutSpec::new(4, [0, 3]).unwrap(), true).unwrap();
        assert!(matches!(preservation_report(&rho, &compact, 2.0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn relative_q_entropy_verbatim() {
        // rho = rho'' = diag(0.5, 0.5): Tr(rho^q rho^(1-q)) = Tr rho = 1
        let rho = DensityMatrix::maximally_mixed(2);
        let r = preservation_report(&rho, &rho, 3.0).unwrap();
        assert_abs_diff_eq!(r.relative_q_entropy, 1.0 / (1.0 - 3.0), epsilon = 1e-12);
    }

    #[test]
    fn cut_outputs_are_density_matrices() {
        let out = cut(&qutrit(), &CutSpec::new(3, [2]).unwrap(), true).unwrap();
        out.validate().unwrap();
        assert!(hermitian_eigenvalues(out.matrix()).unwrap().min() >= -1e-12);
    }
}
