//! Config files and flag overrides.
//!
//! A config file is TOML with optional `[scenario]`, `[scheme]`, `[law]`,
//! `[output]` and `[convergence]` tables. Every key is optional; flags win
//! over the file, the file wins over the built-in defaults.

use anyhow::{bail, Context, Result};
use clap::Args;
use congest_core::output::FrameFormat;
use congest_core::scenario::{EvacuationProfile, Scenario, SchemeKind};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub law: LawSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub t_end: Option<f64>,
    pub frame_interval: Option<f64>,
    pub case: Option<u8>,
    pub profile: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: Option<String>,
    pub order: Option<u8>,
    pub space_order: Option<u8>,
    pub time_order: Option<u8>,
    pub dt_factor: Option<f64>,
    pub dt: Option<f64>,
    pub sl_r: Option<u8>,
    pub beta: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LawSection {
    pub eps: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub nxs: Option<Vec<usize>>,
    pub reference_nx: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML config file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = ["zq", "sl"])]
    pub scheme: Option<String>,
    /// Order in space and time.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub order: Option<u8>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Time step as a multiple of the mesh size.
    #[arg(long)]
    pub dt_factor: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Time between written frames (default: initial and final only).
    #[arg(long)]
    pub frame_interval: Option<f64>,
    /// Output directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "vtk"])]
    pub format: Option<String>,
    /// Semi-Lagrangian stencil half-width.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub sl_r: Option<u8>,
    /// Relaxation time toward the exit.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub format: FrameFormat,
    pub config_path: Option<PathBuf>,
}

fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

impl CommonArgs {
    pub fn file(&self) -> Result<ConfigFile> {
        match &self.config {
            Some(p) => ConfigFile::load(p),
            None => Ok(ConfigFile::default()),
        }
    }

    /// Applies the config file and flags to `base`.
    pub fn resolve(&self, mut s: Scenario, file: &ConfigFile, default_out: &str) -> Result<Resolved> {
        let sc = &file.scenario;
        let sh = &file.scheme;
        let law = &file.law;
        if let Some(nx) = pick(&self.nx, &sc.nx) {
            s.nx = nx;
            if s.kind.is_2d() {
                s.ny = nx;
            }
        }
        if let Some(ny) = pick(&self.ny, &sc.ny) {
            if !s.kind.is_2d() && ny != 1 {
                bail!("--ny only applies to 2D scenarios");
            }
            s.ny = ny;
        }
        if let Some(k) = pick(&self.scheme, &sh.kind) {
            s.scheme = k.parse::<SchemeKind>()?;
        }
        if let Some(o) = pick(&self.order, &sh.order) {
            s = s.with_order(o);
        }
        if self.order.is_none() {
            if let Some(o) = sh.space_order {
                s.space_order = o;
            }
            if let Some(o) = sh.time_order {
                s.time_order = o;
            }
        }
        if let Some(v) = pick(&self.eps, &law.eps) {
            s.eps = v;
        }
        if let Some(v) = pick(&self.alpha, &law.alpha) {
            s.alpha = v;
        }
        if let Some(v) = pick(&self.gamma, &law.gamma) {
            s.gamma = v;
        }
        if let Some(v) = pick(&self.dt_factor, &sh.dt_factor) {
            s.dt_factor = v;
        }
        if self.dt_factor.is_none() && sh.dt.is_some() {
            s.dt = sh.dt;
        }
        if let Some(v) = pick(&self.t_end, &sc.t_end) {
            s.t_end = v;
        }
        if let Some(v) = pick(&self.frame_interval, &sc.frame_interval) {
            s.frame_interval = Some(v);
        }
        if let Some(v) = pick(&self.sl_r, &sh.sl_r) {
            s.sl_r = v;
        }
        if let Some(v) = pick(&self.beta, &sh.beta) {
            s.beta = v;
        }
        if let Some(v) = pick(&self.seed, &sc.seed) {
            s.seed = v;
        }
        s.validate()?;
        let format = match pick(&self.format, &file.output.format) {
            Some(f) => f.parse::<FrameFormat>()?,
            None => FrameFormat::Csv,
        };
        Ok(Resolved {
            scenario: s,
            out_dir: pick(&self.out, &file.output.dir).unwrap_or_else(|| PathBuf::from(default_out)),
            format,
            config_path: self.config.clone(),
        })
    }
}

pub fn parse_profile(s: &str) -> Result<EvacuationProfile> {
    Ok(s.parse::<EvacuationProfile>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let file: ConfigFile = toml::from_str(
            "[scenario]\nnx = 200\nt_end = 0.05\n[law]\neps = 0.001\n[scheme]\norder = 2\n",
        )
        .unwrap();
        let args = CommonArgs {
            nx: Some(100),
            ..Default::default()
        };
        let r = args.resolve(Scenario::riemann1d(), &file, "out").unwrap();
        assert_eq!(r.scenario.nx, 100);
        assert_eq!(r.scenario.t_end, 0.05);
        assert_eq!(r.scenario.eps, 1e-3);
        assert_eq!((r.scenario.space_order, r.scenario.time_order), (2, 2));
        assert_eq!(r.scenario.alpha, 2.0);
        assert_eq!(r.format, FrameFormat::Csv);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ConfigFile>("[law]\nepsilon = 1.0\n").is_err());
    }

    #[test]
    fn nx_sets_both_axes_in_2d() {
        let args = CommonArgs {
            nx: Some(32),
            ..Default::default()
        };
        let r = args.resolve(Scenario::collide2d(1), &ConfigFile::default(), "out").unwrap();
        assert_eq!((r.scenario.nx, r.scenario.ny), (32, 32));
    }

    #[test]
    fn invalid_values_fail_resolution() {
        let args = CommonArgs {
            eps: Some(-1.0),
            ..Default::default()
        };
        assert!(args.resolve(Scenario::riemann1d(), &ConfigFile::default(), "out").is_err());
    }
}
