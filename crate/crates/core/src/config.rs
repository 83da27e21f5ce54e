//! Physical scenario, validation, derived parameters and the energy closure.
//!
//! Beams 1 and 2 are the outgoing signal/idler photons, beams 3 and 4 the
//! incoming pumps. Wavelengths are in-medium wavelengths in meters, so the
//! refractive index never appears explicitly. Angles are stored in radians.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Paraxial validity gate on every beam angle.
pub const MAX_ANGLE_DEG: f64 = 15.0;
pub const MIN_WAVELENGTH: f64 = 100e-9;
pub const MAX_WAVELENGTH: f64 = 10e-6;
/// Above this the first-order thin-crystal expansion is suspect.
pub const TAU_WARN: f64 = 1e-2;

/// Nominal wavelength of the reference scenario.
pub const REFERENCE_WAVELENGTH: f64 = 633e-9;
/// Screen width w₂ used to fix the default focal length.
pub const REFERENCE_SCREEN_WIDTH: f64 = 1e-3;
pub const REFERENCE_WAIST: f64 = 1e-3;
pub const REFERENCE_LENGTH: f64 = 2e-3;

/// Focal length giving w₂ = 1 mm for a 1 mm pump waist at 633 nm (about 9.93 m).
pub fn reference_focal_length() -> f64 {
    2.0 * PI * REFERENCE_WAIST * REFERENCE_SCREEN_WIDTH / REFERENCE_WAVELENGTH
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// Solve the energy constraint for λ₄.
    SolveLambda4,
    /// Degenerate pair: θ₂ = θ₁, λ₁ = λ₂, solve for the common λ.
    SolveSignalPair,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    /// Crystal length L.
    pub length: f64,
    pub w3: f64,
    pub w4: f64,
    pub focal_length: f64,
    pub closure: Closure,
}

impl ExperimentConfig {
    /// Degenerate collinear reference: all wavelengths 633 nm, all angles 0,
    /// L = 2 mm, w₃ = w₄ = 1 mm, f from [`reference_focal_length`].
    pub fn reference() -> Self {
        Self {
            lambda1: REFERENCE_WAVELENGTH,
            lambda2: REFERENCE_WAVELENGTH,
            lambda3: REFERENCE_WAVELENGTH,
            lambda4: REFERENCE_WAVELENGTH,
            theta1: 0.0,
            theta2: 0.0,
            theta3: 0.0,
            theta4: 0.0,
            length: REFERENCE_LENGTH,
            w3: REFERENCE_WAIST,
            w4: REFERENCE_WAIST,
            focal_length: reference_focal_length(),
            closure: Closure::SolveSignalPair,
        }
    }

    /// Sets all four angles from degrees.
    pub fn with_angles_deg(mut self, degrees: [f64; 4]) -> Self {
        self.theta1 = degrees[0].to_radians();
        self.theta2 = degrees[1].to_radians();
        self.theta3 = degrees[2].to_radians();
        self.theta4 = degrees[3].to_radians();
        self
    }

    pub fn wavelengths(&self) -> [f64; 4] {
        [self.lambda1, self.lambda2, self.lambda3, self.lambda4]
    }

    pub fn angles(&self) -> [f64; 4] {
        [self.theta1, self.theta2, self.theta3, self.theta4]
    }

    /// Applies the configured closure, or returns a copy when there is none.
    pub fn resolved(&self) -> Result<Self> {
        match self.closure {
            Closure::None => Ok(self.clone()),
            _ => close_conservation(self),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.to_string(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.field, v.message))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub fn validate_config(cfg: &ExperimentConfig) -> ValidationReport {
    let mut report = ValidationReport::default();

    let wavelengths = [
        ("lambda1", cfg.lambda1),
        ("lambda2", cfg.lambda2),
        ("lambda3", cfg.lambda3),
        ("lambda4", cfg.lambda4),
    ];
    for (name, lambda) in wavelengths {
        if !(lambda > MIN_WAVELENGTH && lambda < MAX_WAVELENGTH) {
            report.push(name, format!("{lambda:e} m outside (100 nm, 10 um)"));
        }
    }

    let positives = [
        ("L", cfg.length),
        ("w3", cfg.w3),
        ("w4", cfg.w4),
        ("f", cfg.focal_length),
    ];
    for (name, value) in positives {
        if !(value.is_finite() && value > 0.0) {
            report.push(name, format!("{name} must be positive"));
        }
    }

    let angles = [
        ("theta1", cfg.theta1),
        ("theta2", cfg.theta2),
        ("theta3", cfg.theta3),
        ("theta4", cfg.theta4),
    ];
    for (name, theta) in angles {
        if !(theta.is_finite() && theta.abs().to_degrees() < MAX_ANGLE_DEG) {
            report.push(
                name,
                format!(
                    "{:.4} deg violates the paraxial gate (|theta| < {MAX_ANGLE_DEG} deg)",
                    theta.to_degrees()
                ),
            );
        }
    }

    report
}

fn ensure_valid(cfg: &ExperimentConfig) -> Result<()> {
    let report = validate_config(cfg);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(report))
    }
}

/// Every scalar needed by the amplitude and probability stages.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub s: f64,
    pub a: f64,
    pub tau: f64,
    /// Angular part of the mismatch Θ (1/m).
    pub theta_mismatch: f64,
    pub z_r: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Printed peak location R̃₀² = ¼ L Θ cos θ₄.
    pub r0sq: f64,
    pub q3: f64,
    pub q4: f64,
    pub length: f64,
    pub sec4: f64,
    /// secθ₄ − (λ₁/λ₄)secθ₁, the t-slope of α in units of τ.
    pub alpha_slope: f64,
    /// secθ₄ − (λ₂/λ₄)secθ₂.
    pub beta_slope: f64,
}

impl DerivedParams {
    /// Half the constant phase ½LΘ multiplying t in the parameter integrals.
    pub fn half_phase(&self) -> f64 {
        0.5 * self.length * self.theta_mismatch
    }

    pub fn thin_crystal_warning(&self) -> Option<String> {
        (self.tau > TAU_WARN).then(|| {
            format!(
                "tau = {:.3e} exceeds {TAU_WARN:e}; first-order thin-crystal stages are unreliable",
                self.tau
            )
        })
    }
}

/// Θ = Σ ± π sin²θ/(λ cosθ), signs (+, +, −, −).
pub fn angle_mismatch(cfg: &ExperimentConfig) -> f64 {
    let term = |theta: f64, lambda: f64| PI * theta.sin().powi(2) / (lambda * theta.cos());
    term(cfg.theta1, cfg.lambda1) + term(cfg.theta2, cfg.lambda2)
        - term(cfg.theta3, cfg.lambda3)
        - term(cfg.theta4, cfg.lambda4)
}

pub fn derive_params(cfg: &ExperimentConfig) -> Result<DerivedParams> {
    ensure_valid(cfg)?;

    let sec = |theta: f64| 1.0 / theta.cos();
    let (sec1, sec2, sec3, sec4) = (sec(cfg.theta1), sec(cfg.theta2), sec(cfg.theta3), sec(cfg.theta4));

    let w1 = cfg.focal_length * cfg.lambda1 / (2.0 * PI * cfg.w4);
    let w2 = cfg.focal_length * cfg.lambda2 / (2.0 * PI * cfg.w3);
    let s = (cfg.w3 / cfg.w4).powi(2);
    let a = sec4 + cfg.lambda3 / cfg.lambda4 * sec3;
    let z_r = PI * cfg.w4 * cfg.w4 / cfg.lambda4;
    let tau = cfg.length / (8.0 * z_r);
    let theta_mismatch = angle_mismatch(cfg);

    let c1 = s / (1.0 + s);
    let c2 = sec4 * (1.0 - s * s) / ((1.0 + s) * (1.0 + s));
    let c3 = c2 + cfg.lambda1 / cfg.lambda4 * sec1;
    let c4 = c2 + cfg.lambda2 / cfg.lambda4 * sec2;

    Ok(DerivedParams {
        w1,
        w2,
        w3: cfg.w3,
        w4: cfg.w4,
        s,
        a,
        tau,
        theta_mismatch,
        z_r,
        c1,
        c2,
        c3,
        c4,
        r0sq: 0.25 * cfg.length * theta_mismatch * cfg.theta4.cos(),
        q3: 2.0 * PI / cfg.lambda3 * cfg.theta3.sin(),
        q4: 2.0 * PI / cfg.lambda4 * cfg.theta4.sin(),
        length: cfg.length,
        sec4,
        alpha_slope: sec4 - cfg.lambda1 / cfg.lambda4 * sec1,
        beta_slope: sec4 - cfg.lambda2 / cfg.lambda4 * sec2,
    })
}

/// Relative residual of cosθ₁/λ₁ + cosθ₂/λ₂ − cosθ₃/λ₃ − cosθ₄/λ₄ = 0,
/// scaled by the outgoing sum.
pub fn conservation_residual(cfg: &ExperimentConfig) -> f64 {
    let outgoing = cfg.theta1.cos() / cfg.lambda1 + cfg.theta2.cos() / cfg.lambda2;
    let incoming = cfg.theta3.cos() / cfg.lambda3 + cfg.theta4.cos() / cfg.lambda4;
    ((outgoing - incoming) / outgoing).abs()
}

pub fn close_conservation(cfg: &ExperimentConfig) -> Result<ExperimentConfig> {
    let mut out = cfg.clone();
    match cfg.closure {
        Closure::None => return Err(Error::NoClosure),
        Closure::SolveLambda4 => {
            // λ₄ = cosθ₄ λ₁λ₂λ₃ / (cosθ₁λ₂λ₃ + cosθ₂λ₁λ₃ − cosθ₃λ₁λ₂)
            let (l1, l2, l3) = (cfg.lambda1, cfg.lambda2, cfg.lambda3);
            let denominator = cfg.theta1.cos() * l2 * l3 + cfg.theta2.cos() * l1 * l3
                - cfg.theta3.cos() * l1 * l2;
            if !(denominator > 0.0) {
                return Err(Error::NoPhysicalSolution { denominator });
            }
            out.lambda4 = cfg.theta4.cos() * (l1 * l2 * l3) / denominator;
        }
        Closure::SolveSignalPair => {
            let (l3, l4) = (cfg.lambda3, cfg.lambda4);
            let denominator = cfg.theta3.cos() * l4 + cfg.theta4.cos() * l3;
            if !(denominator > 0.0) {
                return Err(Error::NoPhysicalSolution { denominator });
            }
            let lambda = 2.0 * cfg.theta1.cos() * (l3 * l4) / denominator;
            out.lambda1 = lambda;
            out.lambda2 = lambda;
            out.theta2 = cfg.theta1;
        }
    }
    Ok(out)
}

/// On-disk configuration: wavelengths in nm, angles in degrees, L and
/// waists in mm, focal length in m. Values solved by the closure may be
/// omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2_nm: Option<f64>,
    pub lambda3_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda4_nm: Option<f64>,
    pub theta1_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta2_deg: Option<f64>,
    pub theta3_deg: f64,
    pub theta4_deg: f64,
    #[serde(rename = "L_mm")]
    pub length_mm: f64,
    pub w3_mm: f64,
    pub w4_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_m: Option<f64>,
    pub closure: Closure,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigFile(e.to_string()))
    }

    /// Builds the configuration and applies its closure.
    pub fn into_config(&self) -> Result<ExperimentConfig> {
        let need = |value: Option<f64>, key: &str| {
            value.ok_or_else(|| Error::ConfigFile(format!("missing key '{key}' for closure {:?}", self.closure)))
        };
        let solved = f64::NAN;
        let (lambda1_nm, lambda2_nm, lambda4_nm, theta2_deg) = match self.closure {
            Closure::SolveSignalPair => (
                solved,
                solved,
                need(self.lambda4_nm, "lambda4_nm")?,
                self.theta1_deg,
            ),
            Closure::SolveLambda4 => (
                need(self.lambda1_nm, "lambda1_nm")?,
                need(self.lambda2_nm, "lambda2_nm")?,
                solved,
                need(self.theta2_deg, "theta2_deg")?,
            ),
            Closure::None => (
                need(self.lambda1_nm, "lambda1_nm")?,
                need(self.lambda2_nm, "lambda2_nm")?,
                need(self.lambda4_nm, "lambda4_nm")?,
                need(self.theta2_deg, "theta2_deg")?,
            ),
        };
        let cfg = ExperimentConfig {
            lambda1: lambda1_nm * 1e-9,
            lambda2: lambda2_nm * 1e-9,
            lambda3: self.lambda3_nm * 1e-9,
            lambda4: lambda4_nm * 1e-9,
            theta1: self.theta1_deg.to_radians(),
            theta2: theta2_deg.to_radians(),
            theta3: self.theta3_deg.to_radians(),
            theta4: self.theta4_deg.to_radians(),
            length: self.length_mm * 1e-3,
            w3: self.w3_mm * 1e-3,
            w4: self.w4_mm * 1e-3,
            focal_length: self.f_m.unwrap_or_else(reference_focal_length),
            closure: self.closure,
        };
        let cfg = cfg.resolved()?;
        ensure_valid(&cfg)?;
        Ok(cfg)
    }
}
