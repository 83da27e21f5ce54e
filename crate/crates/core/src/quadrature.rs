//! Complex-valued quadrature: Gauss–Legendre rules on [−1, 1], tensor
//! products on [−1, 1]², and adaptive integration of Gaussian-weighted
//! fields over the plane.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phasematch::TransverseVector;

pub const MIN_RULE: usize = 2;
pub const MAX_RULE: usize = 512;
/// Default order for the parameter integrals.
pub const DEFAULT_RULE: usize = 64;
/// The plane integrator truncates at this many decay lengths.
pub const GAUSSIAN_TRUNCATION: f64 = 6.0;
pub const PLANE_BUDGET: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F>(&self, mut f: F) -> Complex64
    where
        F: FnMut(f64) -> Complex64,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| f(t) * w)
            .sum()
    }

    /// Integrates a real function over [a, b].
    pub fn integrate_real_on<F>(&self, a: f64, b: f64, mut f: F) -> f64
    where
        F: FnMut(f64) -> f64,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

fn compute_rule(n: usize) -> QuadratureRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            derivative = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, dp) = legendre_with_derivative(n, x);
                derivative = dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        // x decreases with i; fill from both ends to keep exact symmetry.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// n-point Gauss–Legendre rule on [−1, 1], cached per n.
pub fn gauss_legendre(n: usize) -> Result<Arc<QuadratureRule>> {
    if !(MIN_RULE..=MAX_RULE).contains(&n) {
        return Err(Error::RuleSize(n));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    Ok(guard
        .entry(n)
        .or_insert_with(|| Arc::new(compute_rule(n)))
        .clone())
}

fn tensor_sum<F>(f: &mut F, rule: &QuadratureRule) -> Result<Complex64>
where
    F: FnMut(f64, f64) -> Complex64,
{
    let mut total = Complex64::new(0.0, 0.0);
    for (&t1, &w1) in rule.nodes.iter().zip(&rule.weights) {
        let mut row = Complex64::new(0.0, 0.0);
        for (&t2, &w2) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(t1, t2);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite(t1, t2));
            }
            row += v * w2;
        }
        total += row * w1;
    }
    Ok(total)
}

/// Tensor-product rule on [−1, 1]². The error estimate compares against the
/// rule of half the size (or n + 1 below n = 4).
pub fn integrate_box2<F>(mut f: F, rule: &QuadratureRule) -> Result<QuadResult>
where
    F: FnMut(f64, f64) -> Complex64,
{
    let n = rule.len();
    let coarse_n = if n >= 4 { n / 2 } else { n + 1 };
    let coarse = gauss_legendre(coarse_n)?;
    let value = tensor_sum(&mut f, rule)?;
    let reference = tensor_sum(&mut f, &coarse)?;
    Ok(QuadResult {
        value,
        error_estimate: (value - reference).norm(),
        evaluations: n * n + coarse_n * coarse_n,
    })
}

const PANEL_ORDER: usize = 8;

#[derive(Clone, Copy, Debug)]
struct Panel {
    r0: f64,
    r1: f64,
    phi0: f64,
    phi1: f64,
    value: Complex64,
    magnitude: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.r0.total_cmp(&self.r0))
            .then(other.phi0.total_cmp(&self.phi0))
    }
}

struct PlaneIntegrator<'a, F> {
    f: F,
    center: TransverseVector,
    rule: &'a QuadratureRule,
    evaluations: usize,
}

impl<F> PlaneIntegrator<'_, F>
where
    F: FnMut(TransverseVector) -> Complex64,
{
    /// Tensor rule on a polar rectangle; returns (∫, ∫|·|).
    fn rect(&mut self, r0: f64, r1: f64, phi0: f64, phi1: f64) -> Result<(Complex64, f64)> {
        let (hr, mr) = (0.5 * (r1 - r0), 0.5 * (r1 + r0));
        let (hp, mp) = (0.5 * (phi1 - phi0), 0.5 * (phi1 + phi0));
        let mut total = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        for (&u, &wu) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let r = mr + hr * u;
            for (&v, &wv) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let phi = mp + hp * v;
                let k = self.center + TransverseVector::polar(r, phi);
                let sample = (self.f)(k);
                if !(sample.re.is_finite() && sample.im.is_finite()) {
                    return Err(Error::NonFinite(k.kx, k.ky));
                }
                let weight = wu * wv * r;
                total += sample * weight;
                magnitude += sample.norm() * weight;
            }
        }
        self.evaluations += self.rule.len() * self.rule.len();
        let jacobian = hr * hp;
        Ok((total * jacobian, magnitude * jacobian))
    }

    fn panel(&mut self, r0: f64, r1: f64, phi0: f64, phi1: f64) -> Result<Panel> {
        let (coarse, _) = self.rect(r0, r1, phi0, phi1)?;
        let (rm, pm) = (0.5 * (r0 + r1), 0.5 * (phi0 + phi1));
        let mut value = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        for (a, b, c, d) in [
            (r0, rm, phi0, pm),
            (r0, rm, pm, phi1),
            (rm, r1, phi0, pm),
            (rm, r1, pm, phi1),
        ] {
            let (v, m) = self.rect(a, b, c, d)?;
            value += v;
            magnitude += m;
        }
        Ok(Panel {
            r0,
            r1,
            phi0,
            phi1,
            value,
            magnitude,
            error: (value - coarse).norm(),
        })
    }
}

/// Integrates `f` over the disk of radius 6/decay_width around `center`
/// using adaptive polar panels, refining the worst panel until the summed
/// error estimate is within `tol` of |value|. The returned sum runs over
/// panels in a fixed geometric order, so results are reproducible.
pub fn integrate_gaussian_plane<F>(
    f: F,
    center: TransverseVector,
    decay_width: f64,
    tol: f64,
) -> Result<QuadResult>
where
    F: FnMut(TransverseVector) -> Complex64,
{
    let rule = gauss_legendre(PANEL_ORDER)?;
    let mut integrator = PlaneIntegrator {
        f,
        center,
        rule: &rule,
        evaluations: 0,
    };
    let radius = GAUSSIAN_TRUNCATION / decay_width;

    const RADIAL: usize = 4;
    const ANGULAR: usize = 8;
    let mut heap = BinaryHeap::new();
    for i in 0..RADIAL {
        let r0 = radius * i as f64 / RADIAL as f64;
        let r1 = radius * (i + 1) as f64 / RADIAL as f64;
        for j in 0..ANGULAR {
            let phi0 = 2.0 * PI * j as f64 / ANGULAR as f64;
            let phi1 = 2.0 * PI * (j + 1) as f64 / ANGULAR as f64;
            heap.push(integrator.panel(r0, r1, phi0, phi1)?);
        }
    }

    loop {
        let value: Complex64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        let magnitude: f64 = heap.iter().map(|p| p.magnitude).sum();
        // Rounding floor: relative accuracy beyond ~1e-14 of ∫|f| is not resolvable.
        if error <= tol * value.norm() || error <= 1e-14 * magnitude {
            let mut panels = heap.into_vec();
            panels.sort_by(|a, b| a.r0.total_cmp(&b.r0).then(a.phi0.total_cmp(&b.phi0)));
            let value = panels.iter().map(|p| p.value).sum();
            return Ok(QuadResult {
                value,
                error_estimate: error,
                evaluations: integrator.evaluations,
            });
        }
        if integrator.evaluations >= PLANE_BUDGET {
            return Err(Error::QuadratureBudget {
                budget: PLANE_BUDGET,
                achieved: error / value.norm(),
            });
        }
        let worst = heap.pop().expect("panel heap is never empty");
        let rm = 0.5 * (worst.r0 + worst.r1);
        let pm = 0.5 * (worst.phi0 + worst.phi1);
        for (a, b, c, d) in [
            (worst.r0, rm, worst.phi0, pm),
            (worst.r0, rm, pm, worst.phi1),
            (rm, worst.r1, worst.phi0, pm),
            (rm, worst.r1, pm, worst.phi1),
        ] {
            heap.push(integrator.panel(a, b, c, d)?);
        }
    }
}
