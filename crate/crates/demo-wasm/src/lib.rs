//! Browser demo: squeezing curves, numeric-vs-analytic entropies and the
//! position density of the two-mode state, for the reference amplifier.
//!
//! Every export returns a flat `Float64Array`; the row layout is given on
//! each function. The plain-Rust versions are public for native use.

use cvmaps::densmat::Mode;
use cvmaps::discretizer::{auto_grid, discretize_reduced};
use cvmaps::gaussian_state::{eta_at, AmplifierParams, SqueezeParams, TwoModeGaussian};
use cvmaps::measures::{analytic_measure, entropy, MeasureKind};
use cvmaps::{Complex64, Result};
use wasm_bindgen::prelude::*;

pub const ANALYTIC_COLUMNS: usize = 6;
pub const COMPARISON_COLUMNS: usize = 5;

const COVERAGE_SIGMAS: f64 = 6.0;
const MAX_POINTS: usize = 65;
const MAX_PIXELS: usize = 512;

fn squeeze(beta: f64) -> Result<SqueezeParams> {
    SqueezeParams::from_beta(Complex64::new(beta, 0.0))
}

fn period_times(samples: usize) -> Vec<f64> {
    let period = AmplifierParams::reference().period();
    let last = samples.max(2) - 1;
    (0..=last).map(|k| period * k as f64 / last as f64).collect()
}

/// Rows `[t, |eta|, linear, von_neumann, tsallis_q5, log_negativity]` over
/// one period.
pub fn analytic_curves(beta: f64, samples: usize) -> Result<Vec<f64>> {
    let params = AmplifierParams::reference();
    let squeeze = squeeze(beta)?;
    let mut out = Vec::with_capacity(samples * ANALYTIC_COLUMNS);
    for t in period_times(samples) {
        let eta = eta_at(&params, &squeeze, t)?.norm();
        out.push(t);
        out.push(eta);
        for kind in [
            MeasureKind::Linear,
            MeasureKind::VonNeumann,
            MeasureKind::Tsallis { q: 5.0 },
            MeasureKind::LogNegativity,
        ] {
            out.push(analytic_measure(kind, eta)?);
        }
    }
    Ok(out)
}

/// Rows `[t, numeric_vn, analytic_vn, numeric_linear, analytic_linear]`
/// with `points` per mode (odd, 3..=65).
pub fn entropy_comparison(beta: f64, points: usize, samples: usize) -> Result<Vec<f64>> {
    if points > MAX_POINTS {
        return Err(cvmaps::Error::InvalidParameter(format!("at most {MAX_POINTS} points per mode")));
    }
    let params = AmplifierParams::reference();
    let squeeze = squeeze(beta)?;
    let grid = auto_grid(&params, &squeeze, params.period(), points, COVERAGE_SIGMAS)?;
    let mut out = Vec::with_capacity(samples * COMPARISON_COLUMNS);
    for t in period_times(samples) {
        let g = TwoModeGaussian::at(&params, &squeeze, t)?;
        let reduced = discretize_reduced(|a, b, c, d| g.kernel(a, b, c, d), &grid, Mode::First)?;
        let spectrum = reduced.spectrum();
        let eta = g.eta().norm();
        out.push(t);
        for kind in [MeasureKind::VonNeumann, MeasureKind::Linear] {
            out.push(entropy(kind, &spectrum)?);
            out.push(analytic_measure(kind, eta)?);
        }
    }
    Ok(out)
}

/// `[half_width, peak, rho...]`: `|psi(x1, x2)|^2` on a `pixels x pixels`
/// grid over `[-half_width, half_width]^2`, row `i` at `x2`, column `j` at `x1`.
pub fn density_image(beta: f64, t: f64, pixels: usize) -> Result<Vec<f64>> {
    if !(2..=MAX_PIXELS).contains(&pixels) {
        return Err(cvmaps::Error::InvalidParameter(format!("pixels must be in 2..={MAX_PIXELS}")));
    }
    let params = AmplifierParams::reference();
    let squeeze = squeeze(beta)?;
    let half_width = auto_grid(&params, &squeeze, params.period(), 3, 4.0)?.half_width(Mode::First);
    let g = TwoModeGaussian::at(&params, &squeeze, t)?;
    let axis: Vec<f64> = (0..pixels)
        .map(|j| -half_width + 2.0 * half_width * j as f64 / (pixels - 1) as f64)
        .collect();
    let mut out = Vec::with_capacity(2 + pixels * pixels);
    out.push(half_width);
    out.push(0.0);
    let mut peak = 0.0_f64;
    for &x2 in &axis {
        for &x1 in &axis {
            let v = g.psi(x1, x2).norm_sqr();
            peak = peak.max(v);
            out.push(v);
        }
    }
    out[1] = peak;
    Ok(out)
}

fn js(e: cvmaps::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = analyticCurves)]
pub fn analytic_curves_js(beta: f64, samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    analytic_curves(beta, samples).map_err(js)
}

#[wasm_bindgen(js_name = entropyComparison)]
pub fn entropy_comparison_js(beta: f64, points: usize, samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    entropy_comparison(beta, points, samples).map_err(js)
}

#[wasm_bindgen(js_name = densityImage)]
pub fn density_image_js(beta: f64, t: f64, pixels: usize) -> std::result::Result<Vec<f64>, JsError> {
    density_image(beta, t, pixels).map_err(js)
}

#[wasm_bindgen(js_name = period)]
pub fn period_js() -> f64 {
    AmplifierParams::reference().period()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_start_at_the_initial_squeezing() {
        let c = analytic_curves(0.05, 16).unwrap();
        assert_eq!(c.len(), 16 * ANALYTIC_COLUMNS);
        assert_eq!(c[0], 0.0);
        assert!((c[1] - 0.05).abs() < 1e-12);
        assert!((c[2] - 4.9875e-3).abs() < 1e-6);
    }

    #[test]
    fn comparison_agrees_at_33_points() {
        let c = entropy_comparison(0.05, 33, 5).unwrap();
        for row in c.chunks(COMPARISON_COLUMNS) {
            assert!((row[1] - row[2]).abs() < 5e-3, "{row:?}");
            assert!((row[3] - row[4]).abs() < 5e-3, "{row:?}");
        }
        assert!(entropy_comparison(0.05, 67, 5).is_err());
    }

    #[test]
    fn image_is_symmetric_and_normalized_to_its_peak() {
        let img = density_image(0.05, 0.3, 41).unwrap();
        let (h, peak, pixels) = (img[0], img[1], &img[2..]);
        assert!(h > 0.0);
        assert_eq!(pixels.len(), 41 * 41);
        assert_eq!(pixels.iter().cloned().fold(0.0, f64::max), peak);
        // |psi(x, y)| = |psi(-x, -y)|
        for i in 0..41 {
            for j in 0..41 {
                let a = pixels[i * 41 + j];
                let b = pixels[(40 - i) * 41 + (40 - j)];
                assert!((a - b).abs() <= 1e-15 * peak);
            }
        }
        assert!(density_image(0.05, 0.3, 1).is_err());
    }
}
