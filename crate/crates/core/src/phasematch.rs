//! Paraxial longitudinal wave vectors and the critical phase mismatch.
//!
//! With the energy constraint closed, the constant part of Δk_z cancels and
//! what remains is a quadratic form in the transverse wave vectors of beams
//! 1–3 (beam 4 eliminated by transverse momentum conservation) plus the
//! angular offset Θ.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::config::{angle_mismatch, conservation_residual, ExperimentConfig, MAX_ANGLE_DEG};
use crate::error::{Error, Result};

/// Relative energy residual below which the constant mismatch is treated as absorbed.
pub const CONSERVATION_TOL: f64 = 1e-6;

/// Transverse wave vector in 1/m.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TransverseVector {
    pub kx: f64,
    pub ky: f64,
}

impl TransverseVector {
    pub const ZERO: Self = Self { kx: 0.0, ky: 0.0 };

    pub fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    pub fn polar(magnitude: f64, angle: f64) -> Self {
        Self::new(magnitude * angle.cos(), magnitude * angle.sin())
    }

    pub fn dot(self, other: Self) -> f64 {
        self.kx * other.kx + self.ky * other.ky
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.kx.hypot(self.ky)
    }

    pub fn is_finite(self) -> bool {
        self.kx.is_finite() && self.ky.is_finite()
    }
}

impl Add for TransverseVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.kx + rhs.kx, self.ky + rhs.ky)
    }
}

impl Sub for TransverseVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.kx - rhs.kx, self.ky - rhs.ky)
    }
}

impl Neg for TransverseVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.kx, -self.ky)
    }
}

impl Mul<f64> for TransverseVector {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.kx * rhs, self.ky * rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MismatchBreakdown {
    pub quadratic_part: f64,
    pub angle_part: f64,
    pub total: f64,
}

/// √((2π/λ)² − |k⊥|²).
pub fn kz_exact(lambda: f64, kperp: TransverseVector) -> Result<f64> {
    let k0 = 2.0 * PI / lambda;
    let kperp_norm = kperp.norm();
    if !(kperp_norm < k0) {
        return Err(Error::Evanescent {
            kperp: kperp_norm,
            k0,
        });
    }
    Ok((k0 * k0 - kperp.norm_sq()).sqrt())
}

/// Second-order expansion of k_z about the tilted direction θ.
pub fn kz_paraxial(lambda: f64, theta: f64, kperp: TransverseVector) -> Result<f64> {
    if !(theta.abs().to_degrees() < MAX_ANGLE_DEG) {
        return Err(Error::ParaxialGate {
            degrees: theta.to_degrees(),
        });
    }
    let k0 = 2.0 * PI / lambda;
    let (sin, cos) = theta.sin_cos();
    Ok(k0 * cos - 0.5 * (kperp.norm_sq() / (k0 * cos) - k0 * sin * sin / cos))
}

/// Coefficients of the critical mismatch for one closed configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseMismatch {
    /// (λ₄secθ₄ − λ₁secθ₁)/4π
    pub k1_sq: f64,
    /// (λ₄secθ₄ − λ₂secθ₂)/4π
    pub k2_sq: f64,
    /// (λ₃secθ₃ + λ₄secθ₄)/4π
    pub k3_sq: f64,
    /// λ₄secθ₄/2π, multiplying k₁·k₂ − k₁·k₃ − k₂·k₃
    pub cross: f64,
    /// Θ
    pub angle_part: f64,
}

impl PhaseMismatch {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let residual = conservation_residual(cfg);
        if !(residual <= CONSERVATION_TOL) {
            return Err(Error::ConservationResidual { residual });
        }
        let reduced = |lambda: f64, theta: f64| lambda / theta.cos();
        let (r1, r2, r3, r4) = (
            reduced(cfg.lambda1, cfg.theta1),
            reduced(cfg.lambda2, cfg.theta2),
            reduced(cfg.lambda3, cfg.theta3),
            reduced(cfg.lambda4, cfg.theta4),
        );
        let four_pi = 4.0 * PI;
        Ok(Self {
            k1_sq: (r4 - r1) / four_pi,
            k2_sq: (r4 - r2) / four_pi,
            k3_sq: (r3 + r4) / four_pi,
            cross: r4 / (2.0 * PI),
            angle_part: angle_mismatch(cfg),
        })
    }

    pub fn evaluate(
        &self,
        k1: TransverseVector,
        k2: TransverseVector,
        k3: TransverseVector,
    ) -> MismatchBreakdown {
        let quadratic_part = self.k1_sq * k1.norm_sq()
            + self.k2_sq * k2.norm_sq()
            + self.k3_sq * k3.norm_sq()
            + self.cross * (k1.dot(k2) - k1.dot(k3) - k2.dot(k3));
        MismatchBreakdown {
            quadratic_part,
            angle_part: self.angle_part,
            total: quadratic_part + self.angle_part,
        }
    }
}

/// Critical Δk_z with k₄⊥ = k₁⊥ + k₂⊥ − k₃⊥.
pub fn delta_kz_crit(
    cfg: &ExperimentConfig,
    k1: TransverseVector,
    k2: TransverseVector,
    k3: TransverseVector,
) -> Result<MismatchBreakdown> {
    Ok(PhaseMismatch::new(cfg)?.evaluate(k1, k2, k3))
}
