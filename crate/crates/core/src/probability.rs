//! Single-photon detection probability P(x) as a function of the scaled
//! screen radius x = |r₁|/w₁, at four fidelity stages:
//!
//! * `S1` – double parameter integral over (t₁, t₂) ∈ [−1, 1]² with exact
//!   complex coefficients, after the r₂ marginal has been done analytically.
//! * `S2` – the same integral with the first-order coefficients U, V, W and
//!   the prefactor and exponent expanded to first order in τ.
//! * `S3Printed` – the closed sinc² form with R̃₀² = ¼LΘcosθ₄.
//! * `S3Reduced` – the closed form of the S2 integral, derived below.
//!
//! To first order the exponent of the S2 integrand is iφ(t₁ − t₂) with
//! φ(x) = ½LΘ − τ(c₃ + c₄ − 2c₂)x², and the prefactor is
//! K[1 + iτκ(t₁ − t₂)] with K = 1/((1+s)²·2c₁), κ = a/(1+s) − c₄/(2c₁).
//! Integrating over the square gives K[4sinc²φ + 8τκ·sincφ·sinc′φ].
//!
//! S1 and S2 omit the constant πw₂²/w₄⁴ from the r₂ marginal; see
//! [`r2_marginal_prefactor`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::amplitude::stage_coefficients;
use crate::config::DerivedParams;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Smallest |V| tolerated on the quadrature grid.
pub const V_GUARD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityStage {
    S1,
    S2,
    S3Printed,
    S3Reduced,
}

impl ProbabilityStage {
    /// Fixed emission order.
    pub const ALL: [ProbabilityStage; 4] = [
        ProbabilityStage::S1,
        ProbabilityStage::S2,
        ProbabilityStage::S3Printed,
        ProbabilityStage::S3Reduced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProbabilityStage::S1 => "s1",
            ProbabilityStage::S2 => "s2",
            ProbabilityStage::S3Printed => "s3_printed",
            ProbabilityStage::S3Reduced => "s3_reduced",
        }
    }
}

impl fmt::Display for ProbabilityStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbabilityStage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "s1" => Ok(ProbabilityStage::S1),
            "s2" => Ok(ProbabilityStage::S2),
            "s3p" | "s3_printed" => Ok(ProbabilityStage::S3Printed),
            "s3r" | "s3_reduced" => Ok(ProbabilityStage::S3Reduced),
            other => Err(format!("unknown stage '{other}' (expected s1, s2, s3p, s3r)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FirstOrderCoeffs {
    pub u: Complex64,
    pub v: Complex64,
    pub w: Complex64,
}

/// U = 2c₁ + iτc₃(t₁−t₂), V = 2c₁ + iτc₄(t₁−t₂), W = 2c₁ + iτc₂(t₁−t₂).
pub fn first_order_coeffs(t1: f64, t2: f64, params: &DerivedParams) -> FirstOrderCoeffs {
    let d = params.tau * (t1 - t2);
    let two_c1 = 2.0 * params.c1;
    FirstOrderCoeffs {
        u: Complex64::new(two_c1, d * params.c3),
        v: Complex64::new(two_c1, d * params.c4),
        w: Complex64::new(two_c1, d * params.c2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbabilityValue {
    pub x: f64,
    pub value: f64,
    pub stage: ProbabilityStage,
}

/// πw₂²/w₄⁴: the constant relating the S1 integral to ∫|ψ|² d²r₂.
pub fn r2_marginal_prefactor(params: &DerivedParams) -> f64 {
    PI * params.w2 * params.w2 / params.w4.powi(4)
}

/// Exact-coefficient integrand of the S1 double integral at (t₁, t₂).
pub fn s1_integrand(t1: f64, t2: f64, x: f64, params: &DerivedParams) -> Result<Complex64> {
    let (pref, exponent) = s1_terms(t1, t2, params)?;
    Ok(pref * (-exponent * (x * x)).exp())
}

fn s1_terms(t1: f64, t2: f64, params: &DerivedParams) -> Result<(Complex64, Complex64)> {
    let k1 = stage_coefficients(t1, params);
    let k2 = stage_coefficients(t2, params);
    let u = k1.a + k2.a.conj();
    let v = k1.b + k2.b.conj();
    let w = k1.c + k2.c.conj();
    if v.norm() < V_GUARD {
        return Err(Error::NearSingular(v.norm()));
    }
    let phase = Complex64::new(0.0, params.half_phase() * (t1 - t2)).exp();
    Ok((phase / (k1.delta * k2.delta.conj() * v), u - w * w / v))
}

fn s2_kappa(params: &DerivedParams) -> f64 {
    params.a / (1.0 + params.s) - params.c4 / (2.0 * params.c1)
}

fn s2_constant(params: &DerivedParams) -> f64 {
    1.0 / ((1.0 + params.s).powi(2) * 2.0 * params.c1)
}

/// Coefficient of x² in the first-order phase φ(x).
fn reduced_chirp(params: &DerivedParams) -> f64 {
    params.tau * (params.c3 + params.c4 - 2.0 * params.c2)
}

/// First-order integrand of the S2 double integral at (t₁, t₂).
pub fn s2_integrand(t1: f64, t2: f64, x: f64, params: &DerivedParams) -> Result<Complex64> {
    let (pref, exponent) = s2_terms(t1, t2, params)?;
    Ok(pref * (-exponent * (x * x)).exp())
}

fn s2_terms(t1: f64, t2: f64, params: &DerivedParams) -> Result<(Complex64, Complex64)> {
    let coeffs = first_order_coeffs(t1, t2, params);
    if coeffs.v.norm() < V_GUARD {
        return Err(Error::NearSingular(coeffs.v.norm()));
    }
    let d = t1 - t2;
    let pref = Complex64::new(1.0, params.tau * s2_kappa(params) * d)
        * s2_constant(params)
        * Complex64::new(0.0, params.half_phase() * d).exp();
    // U − W²/V to first order in τ.
    let exponent = Complex64::new(0.0, reduced_chirp(params) * d);
    Ok((pref, exponent))
}

/// Tabulated (t₁, t₂) grid for one of the two parameter-integral stages;
/// evaluating at a new x costs one complex exponential per node pair.
#[derive(Clone, Debug)]
pub struct ParameterIntegral {
    stage: ProbabilityStage,
    terms: Vec<(Complex64, Complex64)>,
}

impl ParameterIntegral {
    pub fn new(stage: ProbabilityStage, params: &DerivedParams, rule: &QuadratureRule) -> Result<Self> {
        let terms_at: fn(f64, f64, &DerivedParams) -> Result<(Complex64, Complex64)> = match stage {
            ProbabilityStage::S1 => s1_terms,
            ProbabilityStage::S2 => s2_terms,
            other => panic!("{other} is a closed form, not a parameter integral"),
        };
        let mut terms = Vec::with_capacity(rule.len() * rule.len());
        for (&t1, &w1) in rule.nodes.iter().zip(&rule.weights) {
            for (&t2, &w2) in rule.nodes.iter().zip(&rule.weights) {
                let (pref, exponent) = terms_at(t1, t2, params)?;
                terms.push((pref * (w1 * w2), exponent));
            }
        }
        Ok(Self { stage, terms })
    }

    /// The complex double integral; its imaginary part vanishes up to rounding.
    pub fn raw(&self, x: f64) -> Complex64 {
        let xsq = x * x;
        self.terms
            .iter()
            .map(|&(pref, exponent)| pref * (-exponent * xsq).exp())
            .sum()
    }

    pub fn evaluate(&self, x: f64) -> Result<ProbabilityValue> {
        let raw = self.raw(x);
        if !(raw.re.is_finite() && raw.im.is_finite()) {
            return Err(Error::NonFinite(x, raw.re));
        }
        Ok(ProbabilityValue {
            x,
            value: raw.re.max(0.0),
            stage: self.stage,
        })
    }
}

pub fn prob_s1(x: f64, params: &DerivedParams, rule: &QuadratureRule) -> Result<ProbabilityValue> {
    ParameterIntegral::new(ProbabilityStage::S1, params, rule)?.evaluate(x)
}

pub fn prob_s2(x: f64, params: &DerivedParams, rule: &QuadratureRule) -> Result<ProbabilityValue> {
    ParameterIntegral::new(ProbabilityStage::S2, params, rule)?.evaluate(x)
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn sinc_derivative(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        -x / 3.0 + x.powi(3) / 30.0
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

/// [2w₂²/(w₃²(w₃²+w₄²))]·sinc²[2secθ₄·τ·(x² − R̃₀²)].
pub fn prob_s3_printed(x: f64, params: &DerivedParams) -> ProbabilityValue {
    let (w3sq, w4sq) = (params.w3 * params.w3, params.w4 * params.w4);
    let prefactor = 2.0 * params.w2 * params.w2 / (w3sq * (w3sq + w4sq));
    let arg = 2.0 * params.sec4 * params.tau * (x * x - params.r0sq);
    ProbabilityValue {
        x,
        value: prefactor * sinc(arg).powi(2),
        stage: ProbabilityStage::S3Printed,
    }
}

/// Phase φ(x) = ½LΘ − τ(c₃ + c₄ − 2c₂)x² of the reduced form.
pub fn reduced_phase(x: f64, params: &DerivedParams) -> f64 {
    params.half_phase() - reduced_chirp(params) * x * x
}

/// K[4sinc²φ + 8τκ·sincφ·sinc′φ]. The first-order correction can push the
/// value a hair below zero next to the nodes of sinc φ; it is clamped there.
pub fn prob_s3_reduced(x: f64, params: &DerivedParams) -> ProbabilityValue {
    let phi = reduced_phase(x, params);
    let s = sinc(phi);
    let value = s2_constant(params)
        * (4.0 * s * s + 8.0 * params.tau * s2_kappa(params) * s * sinc_derivative(phi));
    ProbabilityValue {
        x,
        value: value.max(0.0),
        stage: ProbabilityStage::S3Reduced,
    }
}

/// Leading-order ring location of the reduced form, x² with φ(x) = 0.
pub fn reduced_peak_xsq(params: &DerivedParams) -> f64 {
    let chirp = reduced_chirp(params);
    if chirp > 0.0 && params.half_phase() > 0.0 {
        params.half_phase() / chirp
    } else {
        0.0
    }
}

/// Evaluates any stage; parameter-integral tables are built once.
pub struct StageEvaluator {
    params: DerivedParams,
    s1: Option<ParameterIntegral>,
    s2: Option<ParameterIntegral>,
}

impl StageEvaluator {
    pub fn new(params: &DerivedParams, stages: &[ProbabilityStage], rule: &QuadratureRule) -> Result<Self> {
        let build = |stage| -> Result<Option<ParameterIntegral>> {
            if stages.contains(&stage) {
                Ok(Some(ParameterIntegral::new(stage, params, rule)?))
            } else {
                Ok(None)
            }
        };
        Ok(Self {
            params: params.clone(),
            s1: build(ProbabilityStage::S1)?,
            s2: build(ProbabilityStage::S2)?,
        })
    }

    pub fn params(&self) -> &DerivedParams {
        &self.params
    }

    pub fn evaluate(&self, stage: ProbabilityStage, x: f64) -> Result<ProbabilityValue> {
        let table = |t: &Option<ParameterIntegral>| {
            t.as_ref()
                .expect("stage evaluator was built without this stage")
                .evaluate(x)
        };
        match stage {
            ProbabilityStage::S1 => table(&self.s1),
            ProbabilityStage::S2 => table(&self.s2),
            ProbabilityStage::S3Printed => Ok(prob_s3_printed(x, &self.params)),
            ProbabilityStage::S3Reduced => Ok(prob_s3_reduced(x, &self.params)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairDeviation {
    pub a: ProbabilityStage,
    pub b: ProbabilityStage,
    /// max |a − b| over the grid after scaling each profile to unit peak.
    pub max_relative_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub grid_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub tau: f64,
    pub pairs: Vec<PairDeviation>,
    pub printed_r0sq: f64,
    pub printed_argmax_x: f64,
    pub reduced_argmax_x: f64,
    pub reduced_argmax_xsq: f64,
    /// x*²(reduced)/R̃₀²(printed), NaN when R̃₀² ≤ 0.
    pub reduced_over_printed_xsq: f64,
    /// Printed and reduced ring radii differ by more than 1% of R̃₀.
    pub argmax_disagreement: bool,
}

fn normalized(values: &[f64]) -> Vec<f64> {
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        values.iter().map(|v| v / peak).collect()
    } else {
        values.to_vec()
    }
}

/// Dense scan of a profile on [0, xmax] with parabolic refinement of the maximum.
pub fn argmax_scan(f: impl Fn(f64) -> f64, xmax: f64, points: usize) -> f64 {
    let h = xmax / (points - 1) as f64;
    let values: Vec<f64> = (0..points).map(|i| f(i as f64 * h)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if best == 0 || best == points - 1 {
        return best as f64 * h;
    }
    let (l, c, r) = (values[best - 1], values[best], values[best + 1]);
    let denom = l - 2.0 * c + r;
    let offset = if denom < 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    (best as f64 + offset) * h
}

pub fn stage_report(params: &DerivedParams, grid: &[f64], rule: &QuadratureRule) -> Result<DiscrepancyReport> {
    if grid.is_empty() {
        return Err(Error::InvalidScan("report grid is empty".into()));
    }
    let evaluator = StageEvaluator::new(params, &ProbabilityStage::ALL, rule)?;
    let mut profiles = Vec::new();
    for stage in ProbabilityStage::ALL {
        let values = grid
            .iter()
            .map(|&x| evaluator.evaluate(stage, x).map(|v| v.value))
            .collect::<Result<Vec<f64>>>()?;
        profiles.push((stage, normalized(&values)));
    }

    let mut pairs = Vec::new();
    for i in 0..profiles.len() {
        for j in (i + 1)..profiles.len() {
            let (a, va) = &profiles[i];
            let (b, vb) = &profiles[j];
            let dev = va
                .iter()
                .zip(vb)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            pairs.push(PairDeviation {
                a: *a,
                b: *b,
                max_relative_deviation: dev,
            });
        }
    }

    let printed_radius = params.r0sq.max(0.0).sqrt();
    let lead = reduced_peak_xsq(params).sqrt();
    let span = 1.5 * printed_radius.max(lead).max(1.0);
    let reduced_argmax_x = argmax_scan(|x| prob_s3_reduced(x, params).value, span, 20_001);
    let printed_argmax_x = argmax_scan(|x| prob_s3_printed(x, params).value, 1.5 * printed_radius.max(1.0), 20_001);

    let reduced_argmax_xsq = reduced_argmax_x * reduced_argmax_x;
    Ok(DiscrepancyReport {
        grid_points: grid.len(),
        x_min: grid[0],
        x_max: grid[grid.len() - 1],
        tau: params.tau,
        pairs,
        printed_r0sq: params.r0sq,
        printed_argmax_x,
        reduced_argmax_x,
        reduced_argmax_xsq,
        reduced_over_printed_xsq: if params.r0sq > 0.0 {
            reduced_argmax_xsq / params.r0sq
        } else {
            f64::NAN
        },
        argmax_disagreement: (reduced_argmax_x - printed_argmax_x).abs() > 0.01 * printed_radius,
    })
}
