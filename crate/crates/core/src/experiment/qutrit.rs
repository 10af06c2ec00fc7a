use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutmap::{cut, CutSpec};
use crate::densmat::{ComplexMatrix, DensityMatrix};
use crate::Result;

/// Result of removing one level from a qutrit.
#[derive(Debug, Clone, PartialEq)]
pub struct QutritCut {
    /// 1-based label of the removed level.
    pub removed: usize,
    pub output: ComplexMatrix,
    /// Kept block divided by the in-order sum of the kept diagonal.
    pub closed_form: ComplexMatrix,
    pub valid: bool,
    pub bit_exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QutritCase {
    pub name: String,
    pub input: ComplexMatrix,
    pub cuts: Vec<QutritCut>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QutritReport {
    pub cases: Vec<QutritCase>,
}

impl QutritReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().flat_map(|c| &c.cuts).all(|c| c.valid && c.bit_exact)
    }
}

fn closed_form(m: &ComplexMatrix, removed: usize) -> ComplexMatrix {
    let kept: Vec<usize> = (0..3).filter(|&i| i != removed).collect();
    let norm = m[(kept[0], kept[0])].re + m[(kept[1], kept[1])].re;
    ComplexMatrix::from_fn(2, 2, |a, b| m[(kept[a], kept[b])] / norm)
}

fn random_qutrit(seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = ComplexMatrix::from_fn(3, 3, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let g = &a * a.adjoint();
    let tr: f64 = (0..3).map(|i| g[(i, i)].re).sum();
    let mut m = g.map(|z| z / tr);
    // exact hermiticity after rounding
    for i in 0..3 {
        m[(i, i)].im = 0.0;
        for j in 0..i {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
    m
}

fn real_diag(d: &[f64]) -> ComplexMatrix {
    DMatrix::from_fn(d.len(), d.len(), |i, j| Complex64::new(if i == j { d[i] } else { 0.0 }, 0.0))
}

/// Cuts each level out of three sample qutrits and compares every output
/// with the closed form entry by entry.
pub fn run_qutrit_demo() -> Result<QutritReport> {
    let inputs = [
        ("maximally mixed", DensityMatrix::maximally_mixed(3).into_matrix()),
        ("diag(0.5, 0.3, 0.2)", real_diag(&[0.5, 0.3, 0.2])),
        ("random (seed 7)", random_qutrit(7)),
    ];
    let mut cases = Vec::new();
    for (name, m) in inputs {
        let rho = DensityMatrix::single_mode(m.clone())?;
        let mut cuts = Vec::new();
        for removed in 0..3 {
            let out = cut(&rho, &CutSpec::new(3, [removed])?, true)?;
            let expected = closed_form(&m, removed);
            cuts.push(QutritCut {
                removed: removed + 1,
                valid: out.validate().is_ok(),
                bit_exact: out.matrix() == &expected,
                output: out.into_matrix(),
                closed_form: expected,
            });
        }
        cases.push(QutritCase {
            name: name.to_string(),
            input: m,
            cuts,
        });
    }
    Ok(QutritReport { cases })
}

fn write_matrix(f: &mut fmt::Formatter<'_>, m: &ComplexMatrix, indent: &str) -> fmt::Result {
    for i in 0..m.nrows() {
        write!(f, "{indent}[")?;
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            write!(f, " {:>9.6}{:+.6}i", z.re, z.im)?;
        }
        writeln!(f, " ]")?;
    }
    Ok(())
}

impl fmt::Display for QutritReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for case in &self.cases {
            writeln!(f, "qutrit: {}", case.name)?;
            write_matrix(f, &case.input, "  ")?;
            for c in &case.cuts {
                let status = if c.valid && c.bit_exact { "ok" } else { "MISMATCH" };
                writeln!(f, "  rho_{} (level {} removed): {status}", c.removed, c.removed)?;
                write_matrix(f, &c.output, "    ")?;
            }
        }
        write!(f, "{}", if self.passed() { "all cuts match the closed forms" } else { "some cuts differ from the closed forms" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_passes() {
        let r = run_qutrit_demo().unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.cases.len(), 3);
    }

    #[test]
    fn maximally_mixed_gives_half_identity() {
        let r = run_qutrit_demo().unwrap();
        for c in &r.cases[0].cuts {
            assert_eq!(c.output, real_diag(&[0.5, 0.5]));
        }
    }

    #[test]
    fn diagonal_example() {
        let r = run_qutrit_demo().unwrap();
        let rho3 = &r.cases[1].cuts[2].output;
        assert!((rho3[(0, 0)].re - 0.625).abs() <= f64::EPSILON);
        assert!((rho3[(1, 1)].re - 0.375).abs() <= f64::EPSILON);
    }
}
