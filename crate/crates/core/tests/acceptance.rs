//! Acceptance run: one PASS/FAIL line per criterion, each with its measured
//! value and wall time against the allowed budget.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use common::*;
use kerr_rings::config::{close_conservation, conservation_residual, Closure};
use kerr_rings::probability::stage_report;
use kerr_rings::profile::{default_xmax, find_peaks, scan_member, scenario, ScanOptions, DEFAULT_PROMINENCE};
use kerr_rings::quadrature::{gauss_legendre, integrate_box2};
use kerr_rings::{derive_params, ExperimentConfig, ProbabilityStage};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn recomposition() -> Outcome {
    let err = recomposition_error(&one_degree(), 1000, 2024);
    outcome(err <= 1e-9, format!("max relative error {err:.2e} (limit 1e-9)"))
}

fn closure() -> Outcome {
    let mut cfg = ExperimentConfig::reference();
    cfg.closure = Closure::SolveLambda4;
    let lambda4 = close_conservation(&cfg).map(|c| c.lambda4).unwrap_or(f64::NAN);
    let residual = all_scenario_configs()
        .iter()
        .map(conservation_residual)
        .fold(0.0, f64::max);
    outcome(
        lambda4 == 633e-9 && residual <= 1e-12,
        format!("lambda4 = {:.6} nm, max residual {residual:.2e} (limit 1e-12)", lambda4 * 1e9),
    )
}

fn ladder_s0_s1() -> Outcome {
    let (c, residual) = s0_s1_fit(&collinear());
    outcome(
        residual <= 1e-3,
        format!("constant {c:.6e}, max residual {residual:.2e} (limit 1e-3)"),
    )
}

fn ladder_r2() -> Outcome {
    let err = r2_marginal_error(&one_degree(), &[0.0, 0.7, 1.3, 2.5, 6.0]);
    outcome(err <= 1e-4, format!("max relative error {err:.2e} (limit 1e-4)"))
}

fn ladder_truncation() -> Outcome {
    let cfg = one_degree();
    let params = derive_params(&cfg).unwrap();
    let span = 2.0 * params.r0sq.sqrt();
    let full = truncation_deviation(&cfg, span, 201);
    let mut half = cfg.clone();
    half.length *= 0.5;
    let halved = truncation_deviation(&half, span, 201);
    let order = (full / halved).log2();
    outcome(
        full <= 10.0 * params.tau && order >= 1.5,
        format!(
            "max |S2-S1|/S1 = {full:.3e} = {:.2} tau (limit 10 tau), order {order:.2} (limit 1.5)",
            full / params.tau
        ),
    )
}

fn closed_form() -> Outcome {
    let worst = all_scenario_configs()
        .iter()
        .map(|cfg| {
            let xmax = default_xmax(std::slice::from_ref(cfg)).unwrap();
            closed_form_deviation(cfg, xmax, 50)
        })
        .fold(0.0, f64::max);
    outcome(worst <= 1e-6, format!("max relative deviation {worst:.2e} (limit 1e-6)"))
}

fn printed_trends() -> Outcome {
    let fig2 = scenario("fig2").unwrap();
    let mut opts = ScanOptions::new(&[ProbabilityStage::S3Printed], TREND_XMAX);
    opts.npoints = TREND_POINTS;
    let collinear = scan_member(&fig2[0], &opts).unwrap();
    let central = find_peaks(&collinear, ProbabilityStage::S3Printed, DEFAULT_PROMINENCE);
    let blob = central.peaks.len() == 1 && central.peaks[0].radius == 0.0;

    let p2 = printed_peaks(&fig2);
    let p3 = printed_peaks(&scenario("fig3").unwrap());
    let radii = |p: &[kerr_rings::profile::Peak]| p.iter().map(|p| p.radius).collect::<Vec<_>>();
    let widths = |p: &[kerr_rings::profile::Peak]| {
        p.iter().map(|p| p.fwhm.unwrap_or(f64::NAN)).collect::<Vec<_>>()
    };
    let (r2, w2, r3, w3) = (radii(&p2), widths(&p2), radii(&p3), widths(&p3));
    let ok = blob
        && strictly_increasing(&r2)
        && strictly_decreasing(&w2)
        && strictly_decreasing(&r3)
        && strictly_increasing(&w3);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    outcome(
        ok,
        format!(
            "theta1=0 single central peak: {blob}; fig2 radii [{}] fwhm [{}]; fig3 radii [{}] fwhm [{}]",
            fmt(&r2),
            fmt(&w2),
            fmt(&r3),
            fmt(&w3)
        ),
    )
}

fn report() -> Outcome {
    let cfg = one_degree();
    let params = derive_params(&cfg).unwrap();
    let xmax = default_xmax(std::slice::from_ref(&cfg)).unwrap();
    let grid: Vec<f64> = (0..2001).map(|i| xmax * i as f64 / 2000.0).collect();
    match stage_report(&params, &grid, &rule()) {
        Ok(r) => outcome(
            true,
            format!(
                "printed R0sq {:.4}, printed argmax x {:.4}, reduced argmax x {:.2} (x^2 {:.4e}, ratio {:.3e}), disagreement {}",
                r.printed_r0sq,
                r.printed_argmax_x,
                r.reduced_argmax_x,
                r.reduced_argmax_xsq,
                r.reduced_over_printed_xsq,
                r.argmax_disagreement
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn quadrature() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [2, 4, 8, 16] {
        let rule = gauss_legendre(n).unwrap();
        for degree in 0..2 * n {
            let got = rule.integrate_real_on(-1.0, 1.0, |t| t.powi(degree as i32));
            let exact = if degree % 2 == 1 { 0.0 } else { 2.0 / (degree as f64 + 1.0) };
            worst = worst.max((got - exact).abs());
        }
    }
    let oscillatory = integrate_box2(
        |t1, t2| Complex64::new(0.0, t1 - t2).exp(),
        &gauss_legendre(32).unwrap(),
    )
    .unwrap()
    .value;
    let exact = 4.0 * 1f64.sin().powi(2);
    let err = (oscillatory - exact).norm();
    outcome(
        worst <= 1e-13 && err <= 1e-10,
        format!("polynomial error {worst:.2e} (limit 1e-13), 4 sinc^2(1) error {err:.2e} (limit 1e-10)"),
    )
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut trees = Vec::new();
    for name in ["first", "second"] {
        let out = tmp.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_kerr-rings"))
            .args(["run", "--scenario", "fig2", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        if !status.success() {
            return outcome(false, format!("run exited with {status}"));
        }
        trees.push(tree(&out));
    }
    let files = trees[0].len();
    outcome(
        files > 0 && trees[0] == trees[1],
        format!("{files} files compared byte for byte"),
    )
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("phase-mismatch recomposition", 5, recomposition),
        ("conservation closure", 1, closure),
        ("direct vs reduced amplitude", 60, ladder_s0_s1),
        ("analytic r2 marginal", 60, ladder_r2),
        ("first-order truncation", 30, ladder_truncation),
        ("reduced closed form vs first-order integral", 10, closed_form),
        ("printed-form ring trends", 5, printed_trends),
        ("stage discrepancy report", 10, report),
        ("quadrature", 1, quadrature),
        ("end-to-end determinism", 30, determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let passed = result.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2} s / {budget} s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
