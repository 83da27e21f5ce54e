//! Two-photon amplitude on the back focal plane of the 2f lens.
//!
//! Stage S0 integrates the pump overlap times the phase-matching sinc over
//! the pump transverse momentum k₃⊥ directly. Stage S1 is the parameter form
//! left after representing the sinc as ½∫₋₁¹e^{itx}dt and doing the Gaussian
//! k₃⊥ integral analytically, with exact complex coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{DerivedParams, ExperimentConfig};
use crate::error::Result;
use crate::phasematch::{PhaseMismatch, TransverseVector};
use crate::quadrature::{integrate_gaussian_plane, QuadratureRule};

/// A pair of screen positions (meters) with their scaled radii x = |r|/w.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScreenPoint {
    pub r1: [f64; 2],
    pub r2: [f64; 2],
    pub x1: f64,
    pub x2: f64,
}

impl ScreenPoint {
    pub fn new(r1: [f64; 2], r2: [f64; 2], params: &DerivedParams) -> Self {
        Self {
            r1,
            r2,
            x1: r1[0].hypot(r1[1]) / params.w1,
            x2: r2[0].hypot(r2[1]) / params.w2,
        }
    }

    /// Builds a point from scaled coordinates u = r/w.
    pub fn from_scaled(u1: [f64; 2], u2: [f64; 2], params: &DerivedParams) -> Self {
        Self::new(
            [u1[0] * params.w1, u1[1] * params.w1],
            [u2[0] * params.w2, u2[1] * params.w2],
            params,
        )
    }

    pub fn scaled(&self, params: &DerivedParams) -> ([f64; 2], [f64; 2]) {
        (
            [self.r1[0] / params.w1, self.r1[1] / params.w1],
            [self.r2[0] / params.w2, self.r2[1] / params.w2],
        )
    }

    pub fn negated(&self) -> Self {
        Self {
            r1: [-self.r1[0], -self.r1[1]],
            r2: [-self.r2[0], -self.r2[1]],
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StageCoefficients {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

pub fn stage_coefficients(t: f64, params: &DerivedParams) -> StageCoefficients {
    let slope = |k: f64| Complex64::new(1.0, -t * params.tau * k);
    let alpha = slope(params.alpha_slope);
    let beta = slope(params.beta_slope);
    let gamma = slope(params.sec4);
    let delta = Complex64::new(1.0 + params.s, -t * params.tau * params.a);
    let shared = gamma * gamma / delta;
    StageCoefficients {
        alpha,
        beta,
        gamma,
        delta,
        a: alpha - shared,
        b: beta - shared,
        c: gamma - shared,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AmplitudeStage {
    S0,
    S1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Amplitude {
    pub value: Complex64,
    pub stage: AmplitudeStage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pump {
    Three,
    Four,
}

/// √(2π)·w·e^{−w²|k−q|²}; the shift q lies along +x with magnitude (2π/λ)sinθ.
pub fn pump_momentum_profile(which: Pump, kperp: TransverseVector, params: &DerivedParams) -> f64 {
    let (w, q) = match which {
        Pump::Three => (params.w3, params.q3),
        Pump::Four => (params.w4, params.q4),
    };
    let offset = kperp - TransverseVector::new(q, 0.0);
    (2.0 * PI).sqrt() * w * (-w * w * offset.norm_sq()).exp()
}

/// Screen position to transverse wave vector, k⊥ = 2πr/(λf).
pub fn lens_map(r: [f64; 2], lambda: f64, focal_length: f64) -> TransverseVector {
    let scale = 2.0 * PI / (lambda * focal_length);
    TransverseVector::new(r[0] * scale, r[1] * scale)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Direct k₃⊥ integral with the critical mismatch inside the sinc, including
/// the lens prefactor 1/(λ₁λ₂f²). Normalization N = 1.
pub fn amplitude_s0(
    pt: &ScreenPoint,
    cfg: &ExperimentConfig,
    params: &DerivedParams,
    tol: f64,
) -> Result<Amplitude> {
    let mismatch = PhaseMismatch::new(cfg)?;
    let k1 = lens_map(pt.r1, cfg.lambda1, cfg.focal_length);
    let k2 = lens_map(pt.r2, cfg.lambda2, cfg.focal_length);
    let k_sum = k1 + k2;
    let half_length = 0.5 * cfg.length;

    let integrand = |k3: TransverseVector| {
        let k4 = k_sum - k3;
        let pumps = pump_momentum_profile(Pump::Three, k3, params)
            * pump_momentum_profile(Pump::Four, k4, params);
        let dk = mismatch.evaluate(k1, k2, k3).total;
        Complex64::new(pumps * sinc(half_length * dk), 0.0)
    };

    // The pump product is a Gaussian in k₃ of width √(w₃² + w₄²) centred
    // between the two shifted pump centres.
    let (w3s, w4s) = (params.w3 * params.w3, params.w4 * params.w4);
    let q3 = TransverseVector::new(params.q3, 0.0);
    let q4 = TransverseVector::new(params.q4, 0.0);
    let center = (q3 * w3s + (k_sum - q4) * w4s) * (1.0 / (w3s + w4s));
    let decay = (w3s + w4s).sqrt();

    let integral = integrate_gaussian_plane(integrand, center, decay, tol)?;
    let prefactor = 1.0 / ((2.0 * PI).powi(2) * cfg.lambda1 * cfg.lambda2 * cfg.focal_length.powi(2));
    Ok(Amplitude {
        value: integral.value * prefactor,
        stage: AmplitudeStage::S0,
    })
}

/// Constant relating the two amplitude forms for pumps without a transverse
/// offset: S0 = ratio × S1.
pub fn s0_over_s1(cfg: &ExperimentConfig, params: &DerivedParams) -> f64 {
    0.25 * params.w3 * params.w4 / (cfg.lambda1 * cfg.lambda2 * cfg.focal_length.powi(2))
}

/// (1/w₄²)∫₋₁¹ e^{½iLΘt + Q(t)}/δ(t) dt with
/// Q = −A x₁² − B x₂² − 2C (r₁/w₁)·(r₂/w₂).
pub fn amplitude_s1(pt: &ScreenPoint, params: &DerivedParams, rule: &QuadratureRule) -> Amplitude {
    let (u1, u2) = pt.scaled(params);
    let x1sq = u1[0] * u1[0] + u1[1] * u1[1];
    let x2sq = u2[0] * u2[0] + u2[1] * u2[1];
    let cross = u1[0] * u2[0] + u1[1] * u2[1];
    let half_phase = params.half_phase();
    let value = rule.integrate(|t| {
        let k = stage_coefficients(t, params);
        let q = -k.a * x1sq - k.b * x2sq - k.c * (2.0 * cross);
        (Complex64::new(0.0, half_phase * t) + q).exp() / k.delta
    });
    Amplitude {
        value: value / (params.w4 * params.w4),
        stage: AmplitudeStage::S1,
    }
}
