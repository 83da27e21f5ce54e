//! CSV / JSON serialization of profiles, peak lists and stage reports.
//!
//! Floats in CSV carry 17 significant digits so values round-trip exactly;
//! line endings are LF on every platform.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::probability::DiscrepancyReport;
use crate::profile::{PeakSet, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Artifact<'a> {
    Profile(&'a Profile),
    Peaks(&'a [PeakSet]),
    Report {
        label: &'a str,
        config: &'a ExperimentConfig,
        report: &'a DiscrepancyReport,
    },
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn render(artifact: Artifact<'_>, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(render_csv(artifact)),
        Format::Json => {
            let mut s = match artifact {
                Artifact::Profile(p) => serde_json::to_string_pretty(&ProfileJson::from(p))?,
                Artifact::Peaks(sets) => serde_json::to_string_pretty(sets)?,
                Artifact::Report { label, config, report } => {
                    serde_json::to_string_pretty(&ReportJson { label, config, report })?
                }
            };
            s.push('\n');
            Ok(s)
        }
    }
}

fn render_csv(artifact: Artifact<'_>) -> String {
    let mut out = String::new();
    match artifact {
        Artifact::Profile(p) => {
            out.push('x');
            for s in &p.stages {
                out.push(',');
                out.push_str(s.stage.name());
            }
            out.push('\n');
            for (i, &x) in p.grid.iter().enumerate() {
                out.push_str(&num(x));
                for s in &p.stages {
                    out.push(',');
                    out.push_str(&num(s.values[i]));
                }
                out.push('\n');
            }
        }
        Artifact::Peaks(sets) => {
            out.push_str("label,stage,radius,height,fwhm\n");
            for set in sets {
                for peak in &set.peaks {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        set.label,
                        set.stage.name(),
                        num(peak.radius),
                        num(peak.height),
                        opt(peak.fwhm)
                    );
                }
            }
        }
        Artifact::Report { label, report, .. } => {
            out.push_str("quantity,value\n");
            let mut row = |k: &str, v: String| {
                let _ = writeln!(out, "{k},{v}");
            };
            row("label", label.to_string());
            row("grid_points", report.grid_points.to_string());
            row("x_min", num(report.x_min));
            row("x_max", num(report.x_max));
            row("tau", num(report.tau));
            for pair in &report.pairs {
                row(
                    &format!("max_dev_{}_{}", pair.a.name(), pair.b.name()),
                    num(pair.max_relative_deviation),
                );
            }
            row("printed_r0sq", num(report.printed_r0sq));
            row("printed_argmax_x", num(report.printed_argmax_x));
            row("reduced_argmax_x", num(report.reduced_argmax_x));
            row("reduced_argmax_xsq", num(report.reduced_argmax_xsq));
            row("reduced_over_printed_xsq", num(report.reduced_over_printed_xsq));
            row("argmax_disagreement", report.argmax_disagreement.to_string());
        }
    }
    out
}

pub fn emit(artifact: Artifact<'_>, path: &Path, format: Format) -> Result<()> {
    let text = render(artifact, format)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Serialize)]
struct ProfileJson<'a> {
    scenario: &'a str,
    label: &'a str,
    normalization: crate::profile::Normalization,
    config: &'a ExperimentConfig,
    grid: &'a [f64],
    stages: Vec<StageJson<'a>>,
}

#[derive(Serialize)]
struct StageJson<'a> {
    stage: &'static str,
    raw_peak: f64,
    values: &'a [f64],
}

impl<'a> From<&'a Profile> for ProfileJson<'a> {
    fn from(p: &'a Profile) -> Self {
        Self {
            scenario: &p.scenario,
            label: &p.label,
            normalization: p.normalization,
            config: &p.config,
            grid: &p.grid,
            stages: p
                .stages
                .iter()
                .map(|s| StageJson {
                    stage: s.stage.name(),
                    raw_peak: s.raw_peak,
                    values: &s.values,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    label: &'a str,
    config: &'a ExperimentConfig,
    report: &'a DiscrepancyReport,
}
