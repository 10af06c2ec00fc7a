//! Entanglement measures: the numerical path works on spectra of
//! discretized matrices, the analytic path on the squeezing modulus `|eta|`.
//!
//! For the two-mode squeezed vacuum the reduced spectrum is geometric,
//! `e_i = (1 - |eta|^2) |eta|^(2i)`, which gives every closed form below.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::densmat::{hermitian_eigenvalues, partial_transpose, DensityMatrix, Mode, Spectrum};
use crate::{Error, Result};

/// Negative partial-transpose eigenvalues smaller than this in magnitude
/// are treated as round-off, not negativity.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;
/// The analytic geometric spectrum is cut once terms fall below this.
pub const GEOMETRIC_TRUNCATION: f64 = 1e-18;

/// Serialized as a table `{ kind = "tsallis", q = 5.0 }`; `q` is required
/// for Tsallis and rejected otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureTable", into = "MeasureTable")]
pub enum MeasureKind {
    Tsallis { q: f64 },
    VonNeumann,
    Linear,
    LogNegativity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MeasureTag {
    Tsallis,
    VonNeumann,
    Linear,
    LogNegativity,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureTable {
    kind: MeasureTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
}

impl TryFrom<MeasureTable> for MeasureKind {
    type Error = String;

    fn try_from(t: MeasureTable) -> std::result::Result<Self, String> {
        match (t.kind, t.q) {
            (MeasureTag::Tsallis, Some(q)) => Ok(MeasureKind::Tsallis { q }),
            (MeasureTag::Tsallis, None) => Err("tsallis needs a q value".into()),
            (_, Some(_)) => Err(format!("q is only valid for tsallis, not {:?}", t.kind)),
            (MeasureTag::VonNeumann, None) => Ok(MeasureKind::VonNeumann),
            (MeasureTag::Linear, None) => Ok(MeasureKind::Linear),
            (MeasureTag::LogNegativity, None) => Ok(MeasureKind::LogNegativity),
        }
    }
}

impl From<MeasureKind> for MeasureTable {
    fn from(k: MeasureKind) -> Self {
        let (kind, q) = match k {
            MeasureKind::Tsallis { q } => (MeasureTag::Tsallis, Some(q)),
            MeasureKind::VonNeumann => (MeasureTag::VonNeumann, None),
            MeasureKind::Linear => (MeasureTag::Linear, None),
            MeasureKind::LogNegativity => (MeasureTag::LogNegativity, None),
        };
        MeasureTable { kind, q }
    }
}

impl MeasureKind {
    pub fn validate(&self) -> Result<()> {
        if let MeasureKind::Tsallis { q } = *self {
            if q == 1.0 {
                return Err(Error::TsallisAtUnity);
            }
            if !(q > 0.0) || !q.is_finite() {
                return Err(Error::InvalidParameter(format!("Tsallis q must be finite and > 0, got {q}")));
            }
        }
        Ok(())
    }

    /// Stable label used in CSV output, e.g. `tsallis_q5`.
    pub fn label(&self) -> String {
        match self {
            MeasureKind::Tsallis { q } => format!("tsallis_q{q}"),
            MeasureKind::VonNeumann => "von_neumann".into(),
            MeasureKind::Linear => "linear".into(),
            MeasureKind::LogNegativity => "log_negativity".into(),
        }
    }

    pub fn is_entropy(&self) -> bool {
        !matches!(self, MeasureKind::LogNegativity)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One numerical value next to its closed-form counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub t: f64,
    pub grid_n: usize,
    pub kind: MeasureKind,
    pub numeric: f64,
    pub analytic: f64,
    pub abs_error: f64,
}

impl MeasureReport {
    pub fn new(t: f64, grid_n: usize, kind: MeasureKind, numeric: f64, analytic: f64) -> Self {
        MeasureReport {
            t,
            grid_n,
            kind,
            numeric,
            analytic,
            abs_error: (numeric - analytic).abs(),
        }
    }
}

/// `(sum_k e_k^q - 1) / (1 - q)`.
pub fn tsallis_entropy(spectrum: &Spectrum, q: f64) -> Result<f64> {
    MeasureKind::Tsallis { q }.validate()?;
    let power_sum: f64 = spectrum
        .clamped()
        .iter()
        .filter(|&&e| e > 0.0)
        .map(|&e| e.powf(q))
        .sum();
    Ok((power_sum - 1.0) / (1.0 - q))
}

/// `-sum_k e_k ln e_k` with `0 ln 0 = 0`.
pub fn von_neumann_entropy(spectrum: &Spectrum) -> f64 {
    -spectrum
        .clamped()
        .iter()
        .filter(|&&e| e > 0.0)
        .map(|&e| e * e.ln())
        .sum::<f64>()
}

/// `1 - sum_k e_k^2`.
pub fn linear_entropy(spectrum: &Spectrum) -> f64 {
    1.0 - spectrum.clamped().iter().map(|e| e * e).sum::<f64>()
}

/// Entropy of a spectrum for an entropy-type measure.
pub fn entropy(kind: MeasureKind, spectrum: &Spectrum) -> Result<f64> {
    match kind {
        MeasureKind::Tsallis { q } => tsallis_entropy(spectrum, q),
        MeasureKind::VonNeumann => Ok(von_neumann_entropy(spectrum)),
        MeasureKind::Linear => Ok(linear_entropy(spectrum)),
        MeasureKind::LogNegativity => Err(Error::InvalidParameter(
            "log negativity needs the bipartite matrix, not a reduced spectrum".into(),
        )),
    }
}

/// Sum of `|e|` over the negative eigenvalues of a partial transpose.
pub fn negativity(pt_spectrum: &Spectrum) -> f64 {
    pt_spectrum
        .eigenvalues()
        .iter()
        .filter(|&&e| e < -NEGATIVITY_FLOOR)
        .map(|e| -e)
        .sum()
}

/// `log2(2 N + 1)` where `N` is the negativity of the partial transpose
/// taken with respect to `mode`.
pub fn log_negativity(rho: &DensityMatrix, mode: Mode) -> Result<f64> {
    let pt = partial_transpose(rho, mode)?;
    let spectrum = hermitian_eigenvalues(&pt)?;
    Ok((2.0 * negativity(&spectrum) + 1.0).log2())
}

/// `(1 - |eta|^2) |eta|^(2i)` for `i = 0, 1, ...` until a term drops below
/// [`GEOMETRIC_TRUNCATION`]. The dropped tail is negligible for entropies
/// with `q >= 1`; for `q < 1` use [`analytic_measure`].
pub fn geometric_spectrum(eta_abs: f64) -> Result<Spectrum> {
    check_eta(eta_abs)?;
    let x = eta_abs * eta_abs;
    let mut values = vec![1.0 - x];
    if x > 0.0 {
        loop {
            let next = values[values.len() - 1] * x;
            if next < GEOMETRIC_TRUNCATION {
                break;
            }
            values.push(next);
        }
    }
    Ok(Spectrum::new(values))
}

fn check_eta(eta_abs: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eta_abs) {
        return Err(Error::NotNormalizable { eta_abs });
    }
    Ok(())
}

/// Closed-form value of `kind` for the two-mode squeezed vacuum with
/// squeezing modulus `eta_abs`.
pub fn analytic_measure(kind: MeasureKind, eta_abs: f64) -> Result<f64> {
    check_eta(eta_abs)?;
    kind.validate()?;
    let x = eta_abs * eta_abs;
    Ok(match kind {
        MeasureKind::Tsallis { q } => ((1.0 - x).powf(q) / (1.0 - x.powf(q)) - 1.0) / (1.0 - q),
        MeasureKind::VonNeumann => {
            if x == 0.0 {
                0.0
            } else {
                -(1.0 - x).ln() - x * x.ln() / (1.0 - x)
            }
        }
        MeasureKind::Linear => 2.0 * x / (1.0 + x),
        MeasureKind::LogNegativity => ((1.0 + eta_abs) / (1.0 - eta_abs)).log2(),
    })
}
