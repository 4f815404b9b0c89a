//! Run manifest: every resolved parameter plus the outcome.

use anyhow::{Context, Result};
use congest_core::scenario::{Scenario, ScenarioKind, ScenarioResult};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub run: RunInfo,
    pub scenario: ScenarioInfo,
    pub scheme: SchemeInfo,
    pub law: LawInfo,
    pub output: OutputInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub errors: Option<L1Errors>,
}

#[derive(Debug, Serialize)]
pub struct RunInfo {
    pub command: String,
    pub version: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ScenarioInfo {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    pub nx: usize,
    pub ny: usize,
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_interval: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct SchemeInfo {
    pub kind: String,
    pub space_order: u8,
    pub time_order: u8,
    pub dt_factor: f64,
    pub dt: f64,
    pub sl_r: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LawInfo {
    pub eps: f64,
    pub alpha: f64,
    pub gamma: f64,
}

#[derive(Debug, Serialize)]
pub struct OutputInfo {
    pub dir: PathBuf,
    pub format: String,
    pub files: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Stats {
    pub steps: usize,
    pub newton_solves: usize,
    pub max_newton_iterations: usize,
    pub switched_steps: usize,
    pub floored_cells: usize,
    pub max_z: f64,
    pub initial_mass: f64,
    pub final_mass: f64,
    pub max_cfl: f64,
}

#[derive(Debug, Serialize)]
pub struct L1Errors {
    pub rho: f64,
    pub q: f64,
    pub z: f64,
    pub rho_star: f64,
}

impl From<[f64; 4]> for L1Errors {
    fn from(e: [f64; 4]) -> Self {
        Self {
            rho: e[0],
            q: e[1],
            z: e[2],
            rho_star: e[3],
        }
    }
}

impl Stats {
    pub fn from_result(r: &ScenarioResult) -> Self {
        Self {
            steps: r.steps,
            newton_solves: r.newton_solves,
            max_newton_iterations: r.max_newton_iterations,
            switched_steps: r.switched_steps,
            floored_cells: r.floored_cells,
            max_z: r.max_z,
            initial_mass: r.mass_history.first().map_or(0.0, |m| m.1),
            final_mass: r.mass_history.last().map_or(0.0, |m| m.1),
            max_cfl: r.cfl_history.iter().copied().fold(0.0, f64::max),
        }
    }
}

impl Manifest {
    pub fn new(command: &str, s: &Scenario, dt: f64, out_dir: &Path, format: &str, config: Option<PathBuf>) -> Self {
        let (case, profile) = match s.kind {
            ScenarioKind::Collide2d { case } => (Some(case), None),
            ScenarioKind::Evacuate2d { profile } => (None, Some(profile.to_string())),
            _ => (None, None),
        };
        Self {
            run: RunInfo {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                status: "running".to_string(),
                config,
                failed_step: None,
                failed_time: None,
                error: None,
            },
            scenario: ScenarioInfo {
                kind: s.kind.name().to_string(),
                case,
                profile,
                nx: s.nx,
                ny: s.ny,
                t_end: s.t_end,
                frame_interval: s.frame_interval,
                seed: s.seed,
            },
            scheme: SchemeInfo {
                kind: s.scheme.to_string(),
                space_order: s.space_order,
                time_order: s.time_order,
                dt_factor: s.dt_factor,
                dt,
                sl_r: s.sl_r,
                beta: matches!(s.kind, ScenarioKind::Evacuate2d { .. }).then_some(s.beta),
            },
            law: LawInfo {
                eps: s.eps,
                alpha: s.alpha,
                gamma: s.gamma,
            },
            output: OutputInfo {
                dir: out_dir.to_path_buf(),
                format: format.to_string(),
                files: Vec::new(),
            },
            stats: None,
            errors: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let text = toml::to_string(self).context("serializing manifest")?;
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
