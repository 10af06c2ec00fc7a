//! Two-mode squeezed vacuum in a parametric amplifier.
//!
//! The state stays a two-mode squeezed vacuum for all times; its only
//! time-dependent parameter is the complex amplitude `eta(t)`. In the
//! position representation it is the Gaussian
//!
//! ```text
//! psi(x1, x2) = wb^(1/4)/sqrt(pi) * sqrt((1-|eta|^2)/(1-eta^2))
//!             * exp{ (2 sqrt(wb) eta x1 x2 - (1+eta^2)/2 (x1^2 + wb x2^2)) / (1-eta^2) }
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Denominators of `eta(t)` below this magnitude are treated as singular.
pub const ETA_SINGULARITY: f64 = 1e-12;

/// Physical parameters of the amplifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplifierParams {
    omega_a: f64,
    omega_b: f64,
    omega_pump: f64,
    kappa: f64,
    detuning: f64,
    nu: f64,
    gamma: Complex64,
}

impl AmplifierParams {
    /// Derives `detuning = omega_pump - omega_a - omega_b` and
    /// `nu = sqrt(detuning^2/4 - kappa^2)`.
    pub fn new(omega_a: f64, omega_b: f64, omega_pump: f64, kappa: f64) -> Result<Self> {
        Self::with_overrides(omega_a, omega_b, omega_pump, kappa, None, None)
    }

    /// Like [`AmplifierParams::new`], but either derived frequency may be
    /// given explicitly. An overridden detuning still feeds the derived `nu`
    /// unless `nu` is overridden too.
    pub fn with_overrides(
        omega_a: f64,
        omega_b: f64,
        omega_pump: f64,
        kappa: f64,
        detuning: Option<f64>,
        nu: Option<f64>,
    ) -> Result<Self> {
        for (name, v) in [
            ("omega_a", omega_a),
            ("omega_b", omega_b),
            ("omega_pump", omega_pump),
            ("kappa", kappa),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!("kappa must be > 0, got {kappa}")));
        }
        if omega_b <= 0.0 {
            return Err(Error::InvalidParameter(format!("omega_b must be > 0, got {omega_b}")));
        }
        let detuning = detuning.unwrap_or(omega_pump - omega_a - omega_b);
        if !detuning.is_finite() {
            return Err(Error::InvalidParameter("detuning must be finite".into()));
        }
        let nu = match nu {
            Some(nu) => nu,
            None => {
                let nu2 = detuning * detuning / 4.0 - kappa * kappa;
                if nu2 <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "nu^2 = detuning^2/4 - kappa^2 = {nu2} is not positive; \
                         override the detuning or nu"
                    )));
                }
                nu2.sqrt()
            }
        };
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!("nu must be finite and > 0, got {nu}")));
        }
        let ratio = detuning / (2.0 * nu);
        if (ratio.abs() - 1.0).abs() < f64::EPSILON {
            return Err(Error::InvalidParameter(
                "detuning / (2 nu) = +-1 makes gamma infinite".into(),
            ));
        }
        let gamma = Complex64::new(ratio, 0.0).atanh();
        Ok(AmplifierParams {
            omega_a,
            omega_b,
            omega_pump,
            kappa,
            detuning,
            nu,
            gamma,
        })
    }

    /// `omega_a = 1, omega_b = 3, omega_pump = 5, kappa = 2` with the
    /// detuning set to 9, which gives `nu = sqrt(65)/2`.
    pub fn reference() -> Self {
        Self::with_overrides(1.0, 3.0, 5.0, 2.0, Some(9.0), None).expect("reference parameters are valid")
    }

    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }
    pub fn omega_b(&self) -> f64 {
        self.omega_b
    }
    pub fn omega_pump(&self) -> f64 {
        self.omega_pump
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn detuning(&self) -> f64 {
        self.detuning
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    /// `atanh(detuning / 2 nu)`, principal branch; complex whenever the
    /// ratio exceeds one.
    pub fn gamma(&self) -> Complex64 {
        self.gamma
    }

    /// Period of `|eta(t)|`: `pi / nu`.
    pub fn period(&self) -> f64 {
        PI / self.nu
    }
}

/// Input squeezing: `beta = -exp(i phi) tanh r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    r: f64,
    phi: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "squeezing needs finite r >= 0 and finite phi, got r = {r}, phi = {phi}"
            )));
        }
        Ok(SqueezeParams { r, phi })
    }

    /// Inverts `beta = -exp(i phi) tanh r`; requires `|beta| < 1`.
    pub fn from_beta(beta: Complex64) -> Result<Self> {
        let m = beta.norm();
        if !(m < 1.0) {
            return Err(Error::NotNormalizable { eta_abs: m });
        }
        let phi = if m == 0.0 { 0.0 } else { (-beta).arg() };
        Self::new(m.atanh(), phi)
    }

    pub fn vacuum() -> Self {
        SqueezeParams { r: 0.0, phi: 0.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn beta(&self) -> Complex64 {
        -Complex64::from_polar(1.0, self.phi) * self.r.tanh()
    }
}

/// Squeezing amplitude `eta(t)` of the evolved state.
///
/// At `r = 0` the `4 kappa^2 / (... - 2 kappa coth r ...)` term is dropped,
/// which is its limit as `r -> 0`.
pub fn eta_at(params: &AmplifierParams, squeeze: &SqueezeParams, t: f64) -> Result<Complex64> {
    let kappa = params.kappa;
    let nu = params.nu;
    let detuning = params.detuning;
    let nt = nu * t;
    let tan_term = (Complex64::new(nt, 0.0) + I * params.gamma).tan();
    let tail = -2.0 * I * nu * tan_term - detuning;

    let inner = if squeeze.r == 0.0 {
        tail
    } else {
        let coth_r = 1.0 / squeeze.r.tanh();
        let denom = detuning - 2.0 * kappa * coth_r + 2.0 * I * nu * tan_term;
        if denom.norm() < ETA_SINGULARITY {
            return Err(Error::EtaSingular {
                t,
                magnitude: denom.norm(),
            });
        }
        let base = Complex64::new(nt.cos(), 0.0) - I * nt.sin() * params.gamma.tanh();
        let growth = (-2.0 * base.ln()).exp();
        4.0 * kappa * kappa * growth / denom + tail
    };
    let eta = Complex64::from_polar(1.0, -params.omega_pump * t) * inner / (2.0 * kappa);
    if !eta.is_finite() {
        return Err(Error::EtaSingular { t, magnitude: 0.0 });
    }
    if !(eta.norm() < 1.0) {
        return Err(Error::NotNormalizable { eta_abs: eta.norm() });
    }
    Ok(eta)
}

/// Sampled `eta(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaTrajectory {
    pub times: Vec<f64>,
    pub eta_values: Vec<Complex64>,
}

impl EtaTrajectory {
    pub fn sample(params: &AmplifierParams, squeeze: &SqueezeParams, times: &[f64]) -> Result<Self> {
        let eta_values = times
            .iter()
            .map(|&t| eta_at(params, squeeze, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(EtaTrajectory {
            times: times.to_vec(),
            eta_values,
        })
    }

    /// Indices `k` where `|eta|` jumps by more than 0.1 between samples `k`
    /// and `k + 1` although they are at most `period / 1000` apart. A jump
    /// that large on such a fine mesh means a logarithm branch was crossed.
    pub fn branch_jumps(&self, period: f64) -> Vec<usize> {
        self.times
            .windows(2)
            .zip(self.eta_values.windows(2))
            .enumerate()
            .filter(|(_, (t, e))| (t[1] - t[0]).abs() <= period / 1000.0 && (e[1].norm() - e[0].norm()).abs() > 0.1)
            .map(|(k, _)| k)
            .collect()
    }
}

/// The Gaussian wavefunction for a fixed `eta`, written as
/// `prefactor * exp(a x1^2 + b x2^2 + c x1 x2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeGaussian {
    eta: Complex64,
    omega_b: f64,
    prefactor: Complex64,
    a: Complex64,
    b: Complex64,
    c: Complex64,
}

impl TwoModeGaussian {
    pub fn new(eta: Complex64, omega_b: f64) -> Result<Self> {
        if !(eta.norm() < 1.0) {
            return Err(Error::NotNormalizable { eta_abs: eta.norm() });
        }
        if !(omega_b > 0.0) {
            return Err(Error::InvalidParameter(format!("omega_b must be > 0, got {omega_b}")));
        }
        let one_minus = 1.0 - eta * eta;
        if one_minus.norm() < 1e-12 {
            return Err(Error::NotNormalizable { eta_abs: eta.norm() });
        }
        let inv = 1.0 / one_minus;
        let a = -(1.0 + eta * eta) / 2.0 * inv;
        let b = a * omega_b;
        let c = 2.0 * omega_b.sqrt() * eta * inv;
        let prefactor = omega_b.powf(0.25) / PI.sqrt() * ((1.0 - eta.norm_sqr()) * inv).sqrt();
        Ok(TwoModeGaussian {
            eta,
            omega_b,
            prefactor,
            a,
            b,
            c,
        })
    }

    pub fn at(params: &AmplifierParams, squeeze: &SqueezeParams, t: f64) -> Result<Self> {
        Self::new(eta_at(params, squeeze, t)?, params.omega_b)
    }

    pub fn eta(&self) -> Complex64 {
        self.eta
    }

    pub fn omega_b(&self) -> f64 {
        self.omega_b
    }

    /// Coefficients `(a, b, c)` of the exponent.
    pub fn exponent_coefficients(&self) -> (Complex64, Complex64, Complex64) {
        (self.a, self.b, self.c)
    }

    pub fn psi(&self, x1: f64, x2: f64) -> Complex64 {
        self.prefactor * (self.a * x1 * x1 + self.b * x2 * x2 + self.c * x1 * x2).exp()
    }

    /// `(d psi / d x1, d psi / d x2)`.
    pub fn gradient(&self, x1: f64, x2: f64) -> (Complex64, Complex64) {
        let p = self.psi(x1, x2);
        ((2.0 * self.a * x1 + self.c * x2) * p, (2.0 * self.b * x2 + self.c * x1) * p)
    }

    /// `psi(x1, x2) * conj(psi(x1p, x2p))`.
    pub fn kernel(&self, x1: f64, x2: f64, x1p: f64, x2p: f64) -> Complex64 {
        self.psi(x1, x2) * self.psi(x1p, x2p).conj()
    }

    /// Standard deviations of the position marginals of `|psi|^2`.
    ///
    /// `|psi|^2` is a real Gaussian with precision matrix
    /// `[[-4 Re a, -2 Re c], [-2 Re c, -4 Re b]]`.
    pub fn marginal_std_devs(&self) -> [f64; 2] {
        let p11 = -4.0 * self.a.re;
        let p22 = -4.0 * self.b.re;
        let p12 = -2.0 * self.c.re;
        let det = p11 * p22 - p12 * p12;
        [(p22 / det).sqrt(), (p11 / det).sqrt()]
    }
}

pub fn wavefunction(params: &AmplifierParams, squeeze: &SqueezeParams, t: f64, x1: f64, x2: f64) -> Result<Complex64> {
    Ok(TwoModeGaussian::at(params, squeeze, t)?.psi(x1, x2))
}

/// Pure-state position kernel `rho(x1, x2; x1p, x2p)`.
#[allow(clippy::too_many_arguments)]
pub fn kernel(
    params: &AmplifierParams,
    squeeze: &SqueezeParams,
    t: f64,
    x1: f64,
    x2: f64,
    x1p: f64,
    x2p: f64,
) -> Result<Complex64> {
    Ok(TwoModeGaussian::at(params, squeeze, t)?.kernel(x1, x2, x1p, x2p))
}
