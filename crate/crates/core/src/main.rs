use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use kerr_rings::amplitude::{amplitude_s0, amplitude_s1, s0_over_s1, ScreenPoint};
use kerr_rings::config::ConfigFile;
use kerr_rings::emit::{emit, Artifact, Format};
use kerr_rings::probability::stage_report;
use kerr_rings::profile::{
    default_xmax, find_peaks, scan_member, scenario_with, PeakSet, PumpGeometry, ScanOptions,
    ScenarioMember, ScenarioOptions, DEFAULT_POINTS, DEFAULT_PROMINENCE,
};
use kerr_rings::quadrature::{gauss_legendre, DEFAULT_RULE};
use kerr_rings::{derive_params, Error, ProbabilityStage, Result};

const THREADS_ENV: &str = "KERR_RINGS_THREADS";
/// Relative S0/S1 residual tolerated by `--oracle-checks`.
const ORACLE_TOL: f64 = 1e-3;

#[derive(Parser)]
#[command(name = "kerr-rings", version, about = "Ring profiles of photon pairs from four-wave mixing in a Kerr medium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan radial detection-probability profiles and write them to disk.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario: fig2 or fig3.
    #[arg(long)]
    scenario: Option<String>,
    /// Comma-separated stages (s1, s2, s3p, s3r).
    #[arg(long, value_delimiter = ',', default_value = "s1,s2,s3p,s3r")]
    stages: Vec<ProbabilityStage>,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Largest scaled radius; chosen from the ring positions when omitted.
    #[arg(long)]
    xmax: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Keep absolute values instead of scaling each stage to unit peak.
    #[arg(long)]
    raw_scale: bool,
    /// Also write the stage discrepancy report for each configuration.
    #[arg(long)]
    report: bool,
    /// Spot-check the reduced amplitude against the direct k-space integral.
    #[arg(long)]
    oracle_checks: bool,
    /// fig3: steer both pumps to θ₄ instead of holding θ₃ = 0.
    #[arg(long)]
    symmetric_pumps: bool,
    /// Peaks below this fraction of the maximum are not reported.
    #[arg(long, default_value_t = DEFAULT_PROMINENCE)]
    prominence: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    let Command::Run(args) = cli.command;
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Stage { source, .. } => exit_code(source),
        Error::Io { .. } | Error::Json(_) => 1,
        e if e.is_validation() => 2,
        _ => 3,
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn members(args: &RunArgs) -> Result<(String, Vec<ScenarioMember>)> {
    let mut options = ScenarioOptions {
        fig3_pumps: if args.symmetric_pumps {
            PumpGeometry::Symmetric
        } else {
            PumpGeometry::HoldTheta3Zero
        },
        custom: None,
    };
    let name = match (&args.config, &args.scenario) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let cfg = ConfigFile::from_json(&text)?.into_config()?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "custom".into());
            options.custom = Some((label, cfg));
            "custom".to_string()
        }
        (None, Some(name)) => name.clone(),
        (None, None) => return Err(Error::UnknownScenario(String::new())),
    };
    let list = scenario_with(&name, &options)?;
    Ok((name, list))
}

fn run(args: &RunArgs) -> Result<()> {
    if args.stages.is_empty() {
        return Err(Error::InvalidScan("no stages requested".into()));
    }
    if !(args.prominence >= 0.0 && args.prominence <= 1.0) {
        return Err(Error::InvalidScan(format!(
            "prominence must lie in [0, 1], got {}",
            args.prominence
        )));
    }
    let (name, list) = members(args)?;
    let configs: Vec<_> = list.iter().map(|m| m.config.clone()).collect();
    let xmax = match args.xmax {
        Some(x) => x,
        None => default_xmax(&configs)?,
    };
    let options = ScanOptions {
        stages: args.stages.clone(),
        xmax,
        npoints: args.points,
        normalization: if args.raw_scale {
            kerr_rings::profile::Normalization::Raw
        } else {
            kerr_rings::profile::Normalization::PeakUnit
        },
        rule_order: DEFAULT_RULE,
    };

    std::fs::create_dir_all(&args.out).map_err(|source| Error::Io {
        path: args.out.clone(),
        source,
    })?;
    let file = |stem: &str| args.out.join(format!("{stem}.{}", args.format.extension()));

    let mut peaks: Vec<PeakSet> = Vec::new();
    for member in &list {
        if let Some(warning) = derive_params(&member.config)?.thin_crystal_warning() {
            eprintln!("warning: {}: {warning}", member.label);
        }
        let profile = scan_member(member, &options)?;
        emit(Artifact::Profile(&profile), &file(&member.label), args.format)?;
        for s in &profile.stages {
            peaks.push(find_peaks(&profile, s.stage, args.prominence));
        }
        if args.report {
            let params = derive_params(&member.config)?;
            let rule = gauss_legendre(DEFAULT_RULE)?;
            let report = stage_report(&params, &profile.grid, &rule)?;
            emit(
                Artifact::Report {
                    label: &member.label,
                    config: &member.config,
                    report: &report,
                },
                &file(&format!("{}_report", member.label)),
                args.format,
            )?;
        }
    }
    emit(Artifact::Peaks(&peaks), &file(&format!("{name}_peaks")), args.format)?;

    if args.oracle_checks {
        oracle_checks(&list, &args.out.join(format!("{name}_oracle_checks.json")))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleCheck {
    label: String,
    /// Skipped when the pumps are tilted: the reduced amplitude assumes
    /// collinear pumps.
    skipped: bool,
    max_relative_residual: Option<f64>,
    passed: bool,
}

/// Scaled screen points (r₁/w₁, r₂/w₂) used for the spot checks.
const ORACLE_POINTS: [([f64; 2], [f64; 2]); 5] = [
    ([0.0, 0.0], [0.0, 0.0]),
    ([0.5, 0.0], [0.0, 0.3]),
    ([1.0, 0.2], [-0.3, 0.4]),
    ([0.0, 1.2], [0.7, 0.0]),
    ([2.0, 0.0], [1.0, 1.0]),
];

fn oracle_checks(list: &[ScenarioMember], path: &Path) -> Result<()> {
    let rule = gauss_legendre(DEFAULT_RULE)?;
    let mut checks = Vec::new();
    for member in list {
        let cfg = &member.config;
        if cfg.theta3 != 0.0 || cfg.theta4 != 0.0 {
            checks.push(OracleCheck {
                label: member.label.clone(),
                skipped: true,
                max_relative_residual: None,
                passed: true,
            });
            continue;
        }
        let params = derive_params(cfg)?;
        let ratio = s0_over_s1(cfg, &params);
        let mut worst: f64 = 0.0;
        for (u1, u2) in ORACLE_POINTS {
            let pt = ScreenPoint::from_scaled(u1, u2, &params);
            let direct = amplitude_s0(&pt, cfg, &params, 1e-8)?.value;
            let reduced = amplitude_s1(&pt, &params, &rule).value * ratio;
            worst = worst.max((direct - reduced).norm() / direct.norm());
        }
        checks.push(OracleCheck {
            label: member.label.clone(),
            skipped: false,
            max_relative_residual: Some(worst),
            passed: worst <= ORACLE_TOL,
        });
    }
    let mut text = serde_json::to_string_pretty(&checks)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    for c in &checks {
        match c.max_relative_residual {
            Some(r) => eprintln!("oracle {}: S0/S1 residual {r:.2e}", c.label),
            None => eprintln!("oracle {}: skipped (tilted pumps)", c.label),
        }
    }
    match checks.iter().find(|c| !c.passed) {
        Some(c) => Err(Error::OracleMismatch {
            label: c.label.clone(),
            residual: c.max_relative_residual.unwrap_or(f64::NAN),
        }),
        None => Ok(()),
    }
}
