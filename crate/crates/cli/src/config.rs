//! Flat JSON run configuration. Every key is optional; missing keys take the
//! library defaults, and command-line flags override both.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vrabi::analysis::{default_placements, DEFAULT_RATIOS};
use vrabi::{IntegratorConfig, ModelParams};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub version: Option<String>,

    pub omega_ab: Option<f64>,
    pub omega_ac: Option<f64>,
    pub omega_0: Option<f64>,
    pub g_ab: Option<f64>,
    pub g_ac: Option<f64>,
    pub n_bar: Option<f64>,
    pub alpha_phase: Option<f64>,
    pub n_max: Option<usize>,

    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_every: Option<f64>,
    pub norm_tol: Option<f64>,
    pub tail_tol: Option<f64>,

    pub output_dir: Option<PathBuf>,
    pub emit_svg: Option<bool>,

    pub ratios: Option<Vec<f64>>,
    pub placements: Option<Vec<f64>>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }

    /// Keys set in `other` win.
    pub fn overlay(self, other: ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($($field:ident),*) => {
                ConfigFile { $($field: other.$field.or(self.$field)),* }
            };
        }
        pick!(
            command, version, omega_ab, omega_ac, omega_0, g_ab, g_ac, n_bar, alpha_phase, n_max, dt,
            t_end, sample_every, norm_tol, tail_tol, output_dir, emit_svg, ratios, placements, workers
        )
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub integrator: IntegratorConfig,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    pub ratios: Vec<f64>,
    pub placements: Vec<f64>,
    /// Sweep worker threads; 0 lets rayon pick.
    pub workers: usize,
}

impl RunConfig {
    pub fn resolve(file: ConfigFile) -> Result<Self, CliError> {
        let m = ModelParams::default();
        let model = ModelParams {
            omega_ab: file.omega_ab.unwrap_or(m.omega_ab),
            omega_ac: file.omega_ac.unwrap_or(m.omega_ac),
            omega_0: file.omega_0.unwrap_or(m.omega_0),
            g_ab: file.g_ab.unwrap_or(m.g_ab),
            g_ac: file.g_ac.unwrap_or(m.g_ac),
            n_bar: file.n_bar.unwrap_or(m.n_bar),
            alpha_phase: file.alpha_phase.unwrap_or(m.alpha_phase),
            n_max: file.n_max.unwrap_or(m.n_max),
        };
        let i = IntegratorConfig::default();
        let integrator = IntegratorConfig {
            dt: file.dt.unwrap_or(i.dt),
            t_end: file.t_end.unwrap_or(i.t_end),
            sample_every: file.sample_every.unwrap_or(i.sample_every),
            norm_tol: file.norm_tol.unwrap_or(i.norm_tol),
            tail_tol: file.tail_tol.unwrap_or(i.tail_tol),
        };
        model.validate()?;
        integrator.validate()?;
        let output_dir = file
            .output_dir
            .ok_or_else(|| CliError::Validation("no output directory: pass --out or set output_dir".into()))?;
        Ok(RunConfig {
            model,
            integrator,
            output_dir,
            emit_svg: file.emit_svg.unwrap_or(false),
            ratios: file.ratios.unwrap_or_else(|| DEFAULT_RATIOS.to_vec()),
            placements: file.placements.unwrap_or_else(default_placements),
            workers: file.workers.unwrap_or(0),
        })
    }

    /// The resolved settings as a config file, for `run.json`.
    pub fn echo(&self, command: &str) -> ConfigFile {
        ConfigFile {
            command: Some(command.to_string()),
            version: Some(env!("CARGO_PKG_VERSION").to_string()),
            omega_ab: Some(self.model.omega_ab),
            omega_ac: Some(self.model.omega_ac),
            omega_0: Some(self.model.omega_0),
            g_ab: Some(self.model.g_ab),
            g_ac: Some(self.model.g_ac),
            n_bar: Some(self.model.n_bar),
            alpha_phase: Some(self.model.alpha_phase),
            n_max: Some(self.model.n_max),
            dt: Some(self.integrator.dt),
            t_end: Some(self.integrator.t_end),
            sample_every: Some(self.integrator.sample_every),
            norm_tol: Some(self.integrator.norm_tol),
            tail_tol: Some(self.integrator.tail_tol),
            output_dir: Some(self.output_dir.clone()),
            emit_svg: Some(self.emit_svg),
            ratios: Some(self.ratios.clone()),
            placements: Some(self.placements.clone()),
            workers: Some(self.workers),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let file = ConfigFile { output_dir: Some("out".into()), ..Default::default() };
        let run = RunConfig::resolve(file).unwrap();
        assert_eq!(run.model, ModelParams::default());
        assert_eq!(run.integrator, IntegratorConfig::default());
        assert_eq!(run.ratios, vec![0.1, 0.5, 1.0]);
        assert_eq!(run.placements.len(), 19);
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = ConfigFile { g_ab: Some(0.05), g_ac: Some(0.01), ..Default::default() };
        let flags = ConfigFile { g_ac: Some(0.02), ..Default::default() };
        let merged = file.overlay(flags);
        assert_eq!(merged.g_ab, Some(0.05));
        assert_eq!(merged.g_ac, Some(0.02));
    }

    #[test]
    fn echo_round_trips() {
        let file = ConfigFile { output_dir: Some("x".into()), n_bar: Some(3.0), ..Default::default() };
        let run = RunConfig::resolve(file).unwrap();
        let json = serde_json::to_string(&run.echo("simulate")).unwrap();
        let back: ConfigFile = serde_json::from_str(&json).unwrap();
        assert_eq!(RunConfig::resolve(back).unwrap(), run);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"gab": 0.1}"#).is_err());
        let bad = ConfigFile { output_dir: Some("x".into()), g_ab: Some(-1.0), ..Default::default() };
        assert!(matches!(RunConfig::resolve(bad), Err(CliError::Validation(_))));
        assert!(matches!(RunConfig::resolve(ConfigFile::default()), Err(CliError::Validation(_))));
    }
}
