//! Independent reference computations shared by the integration and
//! acceptance suites.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use kerr_rings::amplitude::{amplitude_s0, amplitude_s1, ScreenPoint};
use kerr_rings::phasematch::{delta_kz_crit, kz_paraxial, TransverseVector};
use kerr_rings::probability::{prob_s1, prob_s2, prob_s3_reduced, r2_marginal_prefactor};
use kerr_rings::profile::{
    find_peaks, scan_member, scenario, Peak, ScanOptions, ScenarioMember, DEFAULT_PROMINENCE,
};
use kerr_rings::quadrature::{gauss_legendre, QuadratureRule, DEFAULT_RULE};
use kerr_rings::{derive_params, DerivedParams, ExperimentConfig, ProbabilityStage};

pub fn rule() -> std::sync::Arc<QuadratureRule> {
    gauss_legendre(DEFAULT_RULE).unwrap()
}

pub fn one_degree() -> ExperimentConfig {
    scenario("fig2").unwrap()[2].config.clone()
}

pub fn collinear() -> ExperimentConfig {
    scenario("fig2").unwrap()[0].config.clone()
}

pub fn all_scenario_configs() -> Vec<ExperimentConfig> {
    ["fig2", "fig3"]
        .iter()
        .flat_map(|n| scenario(n).unwrap())
        .map(|m| m.config)
        .collect()
}

/// k₁z + k₂z − k₃z − k₄z from the paraxial expansion of each beam, with
/// k₄ fixed by transverse momentum conservation. Returns the largest relative
/// deviation from the critical form over `samples` random draws.
pub fn recomposition_error(cfg: &ExperimentConfig, samples: usize, seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let span = 2e5;
    for _ in 0..samples {
        let mut draw = || TransverseVector::new(rng.gen_range(-span..span), rng.gen_range(-span..span));
        let (k1, k2, k3) = (draw(), draw(), draw());
        let k4 = k1 + k2 - k3;
        let direct = kz_paraxial(cfg.lambda1, cfg.theta1, k1).unwrap()
            + kz_paraxial(cfg.lambda2, cfg.theta2, k2).unwrap()
            - kz_paraxial(cfg.lambda3, cfg.theta3, k3).unwrap()
            - kz_paraxial(cfg.lambda4, cfg.theta4, k4).unwrap();
        let crit = delta_kz_crit(cfg, k1, k2, k3).unwrap().total;
        worst = worst.max((direct - crit).abs() / crit.abs());
    }
    worst
}

pub const SCREEN_POINTS: [([f64; 2], [f64; 2]); 5] = [
    ([0.0, 0.0], [0.0, 0.0]),
    ([0.5, 0.0], [0.0, 0.3]),
    ([1.0, 0.2], [-0.3, 0.4]),
    ([0.0, 1.2], [0.7, 0.0]),
    ([2.0, 0.0], [1.0, 1.0]),
];

/// Least-squares complex constant c with S0 ≈ c·S1 over the screen points,
/// and the largest relative residual |S0 − c·S1|/|S0|.
pub fn s0_s1_fit(cfg: &ExperimentConfig) -> (Complex64, f64) {
    let params = derive_params(cfg).unwrap();
    let rule = rule();
    let pairs: Vec<(Complex64, Complex64)> = SCREEN_POINTS
        .iter()
        .map(|&(u1, u2)| {
            let pt = ScreenPoint::from_scaled(u1, u2, &params);
            (
                amplitude_s0(&pt, cfg, &params, 1e-8).unwrap().value,
                amplitude_s1(&pt, &params, &rule).value,
            )
        })
        .collect();
    let num: Complex64 = pairs.iter().map(|(s0, s1)| s0 * s1.conj()).sum();
    let den: f64 = pairs.iter().map(|(_, s1)| s1.norm_sqr()).sum();
    let c = num / den;
    let residual = pairs
        .iter()
        .map(|(s0, s1)| (s0 - c * s1).norm() / s0.norm())
        .fold(0.0, f64::max);
    (c, residual)
}

/// ∫|ψ(r₁, r₂)|² d²r₂ by the trapezoid rule on a square in u₂ = r₂/w₂ centred
/// on the conditional maximum u₂ ≈ −u₁.
pub fn brute_r2_marginal(x: f64, params: &DerivedParams, n: usize, half_width: f64) -> f64 {
    let rule = rule();
    let h = 2.0 * half_width / (n - 1) as f64;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let u2 = [-x - half_width + i as f64 * h, -half_width + j as f64 * h];
            let pt = ScreenPoint::from_scaled([x, 0.0], u2, params);
            sum += amplitude_s1(&pt, params, &rule).value.norm_sqr();
        }
    }
    sum * h * h * params.w2 * params.w2
}

pub fn r2_marginal_error(cfg: &ExperimentConfig, xs: &[f64]) -> f64 {
    let params = derive_params(cfg).unwrap();
    let rule = rule();
    xs.iter()
        .map(|&x| {
            let brute = brute_r2_marginal(x, &params, 161, 8.0);
            let fast = prob_s1(x, &params, &rule).unwrap().value * r2_marginal_prefactor(&params);
            (brute - fast).abs() / fast
        })
        .fold(0.0, f64::max)
}

/// max |S2 − S1|/S1 on `points` samples of [0, xmax].
pub fn truncation_deviation(cfg: &ExperimentConfig, xmax: f64, points: usize) -> f64 {
    let params = derive_params(cfg).unwrap();
    let rule = rule();
    (0..points)
        .map(|i| {
            let x = xmax * i as f64 / (points - 1) as f64;
            let s1 = prob_s1(x, &params, &rule).unwrap().value;
            let s2 = prob_s2(x, &params, &rule).unwrap().value;
            ((s2 - s1) / s1).abs()
        })
        .fold(0.0, f64::max)
}

/// max |S3r − S2| relative to S2 on the midpoints of `points` equal cells of
/// [0, xmax]. Both forms vanish at the sinc nodes, so the denominator is
/// floored at 10⁻⁸ of the largest sampled S2.
pub fn closed_form_deviation(cfg: &ExperimentConfig, xmax: f64, points: usize) -> f64 {
    let params = derive_params(cfg).unwrap();
    let rule = rule();
    let samples: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let x = xmax * (i as f64 + 0.5) / points as f64;
            (
                prob_s2(x, &params, &rule).unwrap().value,
                prob_s3_reduced(x, &params).value,
            )
        })
        .collect();
    let floor = 1e-8 * samples.iter().map(|s| s.0).fold(0.0, f64::max);
    samples
        .iter()
        .map(|&(s2, s3)| (s3 - s2).abs() / s2.abs().max(floor))
        .fold(0.0, f64::max)
}

/// Grid fine enough to place the printed ring (x ~ 1) and wide enough to
/// contain its half-height crossing (x ~ 10²).
pub const TREND_XMAX: f64 = 300.0;
pub const TREND_POINTS: usize = 300_001;

/// Dominant printed-form peak for each member.
pub fn printed_peaks(members: &[ScenarioMember]) -> Vec<Peak> {
    members
        .iter()
        .map(|m| {
            let mut opts = ScanOptions::new(&[ProbabilityStage::S3Printed], TREND_XMAX);
            opts.npoints = TREND_POINTS;
            let p = scan_member(m, &opts).unwrap();
            *find_peaks(&p, ProbabilityStage::S3Printed, DEFAULT_PROMINENCE)
                .dominant()
                .unwrap()
        })
        .collect()
}

pub fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}
