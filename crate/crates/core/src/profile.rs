//! Scenario presets, radial profile scans and ring-peak extraction.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{derive_params, ExperimentConfig};
use crate::error::{Error, Result};
use crate::probability::{reduced_peak_xsq, ProbabilityStage, StageEvaluator};
use crate::quadrature::{gauss_legendre, DEFAULT_RULE};

pub const DEFAULT_POINTS: usize = 2001;
pub const MIN_POINTS: usize = 16;
/// Peaks below this fraction of the global maximum are ignored by default.
pub const DEFAULT_PROMINENCE: f64 = 0.1;
const FIG2_THETA1_DEG: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];
const FIG3_THETA4_DEG: [f64; 4] = [0.0, 0.5, 1.0, 1.5];
const FIG3_THETA1_DEG: f64 = 1.0;

/// How the second pump is steered when θ₄ is varied in fig3.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpGeometry {
    /// θ₃ = 0 while θ₄ varies.
    #[default]
    HoldTheta3Zero,
    /// θ₃ = θ₄.
    Symmetric,
}

#[derive(Clone, Debug, Default)]
pub struct ScenarioOptions {
    pub fig3_pumps: PumpGeometry,
    /// Configuration used by the `custom` scenario.
    pub custom: Option<(String, ExperimentConfig)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioMember {
    pub scenario: String,
    /// File-name stem, e.g. `fig2_theta1_0p5`.
    pub label: String,
    /// Value of the swept angle in degrees, if any.
    pub swept_deg: Option<f64>,
    pub config: ExperimentConfig,
}

fn angle_tag(degrees: f64) -> String {
    format!("{degrees}").replace('.', "p").replace('-', "m")
}

pub fn scenario(name: &str) -> Result<Vec<ScenarioMember>> {
    scenario_with(name, &ScenarioOptions::default())
}

/// Resolved configurations for a named scenario. fig2 sweeps the signal angle
/// θ₁ with collinear pumps; fig3 fixes θ₁ = 1° and sweeps the pump angle θ₄.
/// Both use the degenerate signal-pair closure.
pub fn scenario_with(name: &str, options: &ScenarioOptions) -> Result<Vec<ScenarioMember>> {
    let member = |scenario: &str, tag: &str, swept: f64, angles: [f64; 4]| -> Result<ScenarioMember> {
        let config = ExperimentConfig::reference().with_angles_deg(angles).resolved()?;
        Ok(ScenarioMember {
            scenario: scenario.to_string(),
            label: format!("{scenario}_{tag}_{}", angle_tag(swept)),
            swept_deg: Some(swept),
            config,
        })
    };
    match name {
        "fig2" => FIG2_THETA1_DEG
            .iter()
            .map(|&t1| member("fig2", "theta1", t1, [t1, t1, 0.0, 0.0]))
            .collect(),
        "fig3" => FIG3_THETA4_DEG
            .iter()
            .map(|&t4| {
                let t3 = match options.fig3_pumps {
                    PumpGeometry::HoldTheta3Zero => 0.0,
                    PumpGeometry::Symmetric => t4,
                };
                member("fig3", "theta4", t4, [FIG3_THETA1_DEG, FIG3_THETA1_DEG, t3, t4])
            })
            .collect(),
        "custom" => {
            let (label, cfg) = options
                .custom
                .clone()
                .ok_or_else(|| Error::ConfigFile("the custom scenario needs a configuration file".into()))?;
            Ok(vec![ScenarioMember {
                scenario: "custom".into(),
                label,
                swept_deg: None,
                config: cfg.resolved()?,
            }])
        }
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// 1.5× the largest ring radius over the set, taking for each member the
/// larger of the printed (√R̃₀²) and reduced (φ = 0) locations so both rings
/// are in frame. When every ring sits at the origin the frame ends at the
/// first node of the printed sinc, keeping side lobes out.
pub fn default_xmax(configs: &[ExperimentConfig]) -> Result<f64> {
    let mut radius: f64 = 0.0;
    let mut fallback: f64 = 0.0;
    for cfg in configs {
        let p = derive_params(cfg)?;
        radius = radius
            .max(p.r0sq.max(0.0).sqrt())
            .max(reduced_peak_xsq(&p).sqrt());
        fallback = fallback.max((std::f64::consts::PI / (2.0 * p.sec4 * p.tau)).sqrt());
    }
    Ok(if radius > 0.0 { 1.5 * radius } else { fallback })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    PeakUnit,
    Raw,
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub stages: Vec<ProbabilityStage>,
    pub xmax: f64,
    pub npoints: usize,
    pub normalization: Normalization,
    pub rule_order: usize,
}

impl ScanOptions {
    pub fn new(stages: &[ProbabilityStage], xmax: f64) -> Self {
        Self {
            stages: stages.to_vec(),
            xmax,
            npoints: DEFAULT_POINTS,
            normalization: Normalization::PeakUnit,
            rule_order: DEFAULT_RULE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageProfile {
    pub stage: ProbabilityStage,
    pub values: Vec<f64>,
    /// Raw-scale maximum before normalization.
    pub raw_peak: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub scenario: String,
    pub label: String,
    pub config: ExperimentConfig,
    pub grid: Vec<f64>,
    pub stages: Vec<StageProfile>,
    pub normalization: Normalization,
}

impl Profile {
    pub fn values(&self, stage: ProbabilityStage) -> Option<&[f64]> {
        self.stages
            .iter()
            .find(|s| s.stage == stage)
            .map(|s| s.values.as_slice())
    }

    pub fn spacing(&self) -> f64 {
        if self.grid.len() < 2 {
            0.0
        } else {
            self.grid[1] - self.grid[0]
        }
    }
}

pub fn scan_profile(cfg: &ExperimentConfig, options: &ScanOptions) -> Result<Profile> {
    scan_member(
        &ScenarioMember {
            scenario: "custom".into(),
            label: "custom".into(),
            swept_deg: None,
            config: cfg.clone(),
        },
        options,
    )
}

/// Uniform grid on [0, xmax]; stages are evaluated in the fixed order of
/// [`ProbabilityStage::ALL`] regardless of the order requested.
pub fn scan_member(member: &ScenarioMember, options: &ScanOptions) -> Result<Profile> {
    if options.npoints < MIN_POINTS {
        return Err(Error::InvalidScan(format!(
            "need at least {MIN_POINTS} points, got {}",
            options.npoints
        )));
    }
    if !(options.xmax > 0.0 && options.xmax.is_finite()) {
        return Err(Error::InvalidScan(format!("xmax must be positive, got {}", options.xmax)));
    }
    let params = derive_params(&member.config)?;
    let rule = gauss_legendre(options.rule_order)?;
    let stages: Vec<ProbabilityStage> = ProbabilityStage::ALL
        .into_iter()
        .filter(|s| options.stages.contains(s))
        .collect();
    let evaluator = StageEvaluator::new(&params, &stages, &rule)?;

    let step = options.xmax / (options.npoints - 1) as f64;
    let grid: Vec<f64> = (0..options.npoints).map(|i| i as f64 * step).collect();

    let mut profiles = Vec::with_capacity(stages.len());
    for stage in stages {
        let values = grid
            .par_iter()
            .map(|&x| {
                evaluator
                    .evaluate(stage, x)
                    .map(|v| v.value)
                    .map_err(|e| Error::Stage {
                        stage: stage.name().to_string(),
                        x,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        let raw_peak = values.iter().cloned().fold(0.0, f64::max);
        let values = match options.normalization {
            Normalization::PeakUnit if raw_peak > 0.0 => values.iter().map(|v| v / raw_peak).collect(),
            _ => values,
        };
        profiles.push(StageProfile {
            stage,
            values,
            raw_peak,
        });
    }

    Ok(Profile {
        scenario: member.scenario.clone(),
        label: member.label.clone(),
        config: member.config.clone(),
        grid,
        stages: profiles,
        normalization: options.normalization,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    /// Grid index of the sampled maximum.
    pub index: usize,
    /// Parabolically refined radius.
    pub radius: f64,
    pub height: f64,
    /// Full width at half maximum; when only one half-height crossing lies
    /// on the grid, twice the half width on that side. `None` when neither does.
    pub fwhm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeakSet {
    pub label: String,
    pub stage: ProbabilityStage,
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    /// The highest peak.
    pub fn dominant(&self) -> Option<&Peak> {
        self.peaks
            .iter()
            .max_by(|a, b| a.height.total_cmp(&b.height))
    }
}

/// Local maxima of one stage at or above `prominence` × global maximum.
/// The first sample counts as a maximum when the profile falls away from
/// it, since P is radial. Plateaus report their centre sample.
pub fn find_peaks(profile: &Profile, stage: ProbabilityStage, prominence: f64) -> PeakSet {
    let mut set = PeakSet {
        label: profile.label.clone(),
        stage,
        peaks: Vec::new(),
    };
    let Some(values) = profile.values(stage) else {
        return set;
    };
    let grid = &profile.grid;
    let n = values.len();
    if n < 2 {
        return set;
    }
    let global = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(global > 0.0) {
        return set;
    }
    let threshold = prominence * global;

    let mut i = 0;
    while i < n {
        // Extent of the run of equal values starting at i.
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let rises_into = i == 0 || values[i - 1] < values[i];
        let falls_after = j + 1 < n && values[j + 1] < values[j];
        if rises_into && falls_after && values[i] >= threshold {
            // A plateau touching the axis is centred on it by symmetry.
            let index = if i == 0 { 0 } else { (i + j) / 2 };
            set.peaks.push(refine(grid, values, index));
        }
        i = j + 1;
    }
    set
}

fn refine(grid: &[f64], values: &[f64], index: usize) -> Peak {
    let h = if grid.len() > 1 { grid[1] - grid[0] } else { 0.0 };
    let c = values[index];
    let (radius, height) = if index > 0 && index + 1 < values.len() {
        let (l, r) = (values[index - 1], values[index + 1]);
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            let offset = 0.5 * (l - r) / denom;
            (grid[index] + offset * h, c - 0.25 * (l - r) * offset)
        } else {
            (grid[index], c)
        }
    } else {
        (grid[index], c)
    };

    let half = 0.5 * height;
    let crossing = |k: usize| {
        // Linear interpolation between samples k and k+1 straddling `half`.
        let (a, b) = (values[k], values[k + 1]);
        grid[k] + (half - a) / (b - a) * h
    };
    let left = (0..index).rev().find(|&k| values[k] < half).map(crossing);
    let right = (index..values.len() - 1)
        .find(|&k| values[k + 1] < half)
        .map(crossing);
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => Some(r - l),
        (None, Some(r)) => Some(2.0 * (r - radius)),
        (Some(l), None) => Some(2.0 * (radius - l)),
        (None, None) => None,
    };
    Peak {
        index,
        radius,
        height,
        fwhm,
    }
}
