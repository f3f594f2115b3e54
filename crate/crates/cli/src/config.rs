//! Run configuration. One TOML file drives every subcommand; unknown keys
//! are rejected so typos fail loudly instead of silently using defaults.
//! Every section and every key is optional and falls back to the library
//! defaults, so an empty file is a valid configuration.

use serde::Deserialize;
use skiff_core::controller::ControllerKind;
use skiff_core::hydro::{CurrentField, HydroModel, VesselParams};
use skiff_core::mpc::MpcWeights;
use skiff_core::qp::AdmmConfig;
use skiff_core::sim::{
    ControllerFactory, EpisodeConfig, MonteCarloConfig, ReferenceProfile, SweepConfig,
};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Parameters of the vessel shipped with the repository, compiled in so
/// the binary runs without any files on disk.
pub const DEFAULT_VESSEL_TOML: &str = include_str!("../../../params/otter.toml");

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("configuration syntax: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("vessel parameters: {0}")]
    Vessel(#[from] skiff_core::hydro::ParamsError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub vessel: VesselSection,
    pub controller: ControllerSection,
    pub episode: EpisodeSection,
    pub sweep: SweepSection,
    /// Output directory; the --out flag and SKIFF_OUT_DIR can override.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VesselSection {
    /// Vessel parameter file, resolved relative to the configuration file.
    /// Absent means the built-in vessel.
    pub params_path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSection {
    /// "error-state" (alias "proposed"), "nmpc", or "nmpc-simple"
    /// (alias "nmpc-no-restoring").
    pub kind: String,
    /// Prediction horizon in control intervals.
    pub horizon_steps: usize,
    /// Per-propeller force box override [min, max] (N); absent uses the
    /// vessel's thrust limits.
    pub input_bounds: Option<[f64; 2]>,
    pub qp_tolerance: f64,
    pub qp_max_iterations: usize,
    pub sqp_max_iterations: usize,
    pub sqp_tolerance: f64,
    pub weights: WeightsSection,
}

impl Default for ControllerSection {
    fn default() -> Self {
        let qp = AdmmConfig::control();
        let sqp = skiff_core::nmpc::NlpConfig::default();
        ControllerSection {
            kind: "error-state".into(),
            horizon_steps: 100,
            input_bounds: None,
            qp_tolerance: qp.eps_abs,
            qp_max_iterations: qp.max_iterations,
            sqp_max_iterations: sqp.max_iterations,
            sqp_tolerance: sqp.tolerance,
            weights: WeightsSection::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsSection {
    pub attitude: f64,
    pub position: f64,
    pub rate_angular: f64,
    pub rate_linear: f64,
    pub terminal_scale: f64,
    pub input: f64,
}

impl Default for WeightsSection {
    fn default() -> Self {
        let w = MpcWeights::default_tracking();
        WeightsSection {
            attitude: w.attitude,
            position: w.position,
            rate_angular: w.rate_angular,
            rate_linear: w.rate_linear,
            terminal_scale: w.terminal_scale,
            input: w.input,
        }
    }
}

impl WeightsSection {
    pub fn to_weights(&self) -> MpcWeights {
        MpcWeights {
            attitude: self.attitude,
            position: self.position,
            rate_angular: self.rate_angular,
            rate_linear: self.rate_linear,
            terminal_scale: self.terminal_scale,
            input: self.input,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeSection {
    /// "turning" or "zigzag".
    pub profile: ReferenceProfile,
    pub duration_s: f64,
    pub control_rate_hz: f64,
    pub plant_substeps: usize,
    pub episodes: usize,
    pub seed: u64,
    pub init_radius_m: f64,
    pub heading_range_rad: f64,
    pub current_speed_mps: f64,
    /// Direction the current flows toward, rad from north.
    pub current_angle_rad: f64,
}

impl Default for EpisodeSection {
    fn default() -> Self {
        let episode = EpisodeConfig::default();
        let mc = MonteCarloConfig::default();
        EpisodeSection {
            profile: ReferenceProfile::Turning,
            duration_s: episode.duration_s,
            control_rate_hz: episode.control_rate_hz,
            plant_substeps: episode.plant_substeps,
            episodes: mc.episodes,
            seed: mc.seed,
            init_radius_m: mc.init_radius_m,
            heading_range_rad: mc.heading_range_rad,
            current_speed_mps: 0.0,
            current_angle_rad: 0.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub speeds_mps: Vec<f64>,
    pub angle_count: usize,
    pub episodes: usize,
    pub controllers: Vec<String>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            speeds_mps: vec![0.0, 0.5],
            angle_count: 12,
            episodes: 3,
            controllers: vec!["error-state".into(), "nmpc".into(), "nmpc-simple".into()],
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Load the vessel and build its dynamics model. `config_dir` anchors a
    /// relative `params_path`; pass the configuration file's directory.
    pub fn build_model(&self, config_dir: &Path) -> Result<HydroModel, ConfigError> {
        let params = match &self.vessel.params_path {
            Some(p) => {
                let resolved = if p.is_absolute() {
                    p.clone()
                } else {
                    config_dir.join(p)
                };
                VesselParams::load(resolved)?
            }
            None => VesselParams::from_toml_str(DEFAULT_VESSEL_TOML)?,
        };
        HydroModel::new(params).map_err(ConfigError::Vessel)
    }

    fn qp_config(&self) -> AdmmConfig {
        AdmmConfig {
            eps_abs: self.controller.qp_tolerance,
            eps_rel: self.controller.qp_tolerance,
            max_iterations: self.controller.qp_max_iterations,
            ..AdmmConfig::control()
        }
    }

    /// Factory for one controller kind using this configuration's solver
    /// settings and weights.
    pub fn factory_for(&self, kind_name: &str) -> Result<ControllerFactory, ConfigError> {
        let kind = ControllerKind::from_str(kind_name).map_err(ConfigError::Invalid)?;
        Ok(ControllerFactory {
            kind,
            weights: self.controller.weights.to_weights(),
            qp: self.qp_config(),
            sqp_max_iterations: self.controller.sqp_max_iterations,
            sqp_tolerance: self.controller.sqp_tolerance,
            input_bounds: self.controller.input_bounds,
        })
    }

    pub fn controller_factory(&self) -> Result<ControllerFactory, ConfigError> {
        self.factory_for(&self.controller.kind)
    }

    pub fn current(&self) -> CurrentField {
        CurrentField::from_speed_angle(
            self.episode.current_speed_mps,
            self.episode.current_angle_rad,
        )
    }

    pub fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            duration_s: self.episode.duration_s,
            control_rate_hz: self.episode.control_rate_hz,
            plant_substeps: self.episode.plant_substeps,
            horizon_steps: self.controller.horizon_steps,
            current: self.current(),
            ..EpisodeConfig::default()
        }
    }

    pub fn monte_carlo_config(&self) -> MonteCarloConfig {
        MonteCarloConfig {
            episodes: self.episode.episodes,
            seed: self.episode.seed,
            init_radius_m: self.episode.init_radius_m,
            heading_range_rad: self.episode.heading_range_rad,
            base: self.episode_config(),
        }
    }

    /// Factories and grid for the sweep subcommand, in configured order.
    pub fn sweep_plan(&self) -> Result<(Vec<ControllerFactory>, SweepConfig), ConfigError> {
        if self.sweep.controllers.is_empty() {
            return Err(ConfigError::Invalid(
                "sweep.controllers must name at least one controller".into(),
            ));
        }
        let factories = self
            .sweep
            .controllers
            .iter()
            .map(|name| self.factory_for(name))
            .collect::<Result<Vec<_>, _>>()?;
        let mut monte_carlo = self.monte_carlo_config();
        monte_carlo.episodes = self.sweep.episodes;
        Ok((
            factories,
            SweepConfig {
                speeds_mps: self.sweep.speeds_mps.clone(),
                angle_count: self.sweep.angle_count,
                monte_carlo,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_the_default_configuration() {
        let config = RunConfig::from_toml_str("").unwrap();
        assert_eq!(config.controller.kind, "error-state");
        assert_eq!(config.controller.horizon_steps, 100);
        assert_eq!(config.episode.profile, ReferenceProfile::Turning);
        assert_eq!(config.episode.episodes, 10);
        assert!(config.vessel.params_path.is_none());
        assert!(config.out_dir.is_none());
        assert_eq!(config.sweep.controllers.len(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected_with_the_key_name() {
        let err = RunConfig::from_toml_str("[controller]\nhorizon = 10\n").unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
        let err = RunConfig::from_toml_str("[episod]\nduration_s = 5.0\n").unwrap_err();
        assert!(err.to_string().contains("episod"), "{err}");
    }

    #[test]
    fn the_built_in_vessel_parses_and_builds() {
        let config = RunConfig::default();
        let model = config.build_model(Path::new(".")).unwrap();
        assert!(model.params().mass > 0.0);
    }

    #[test]
    fn controller_aliases_resolve() {
        let config =
            RunConfig::from_toml_str("[controller]\nkind = \"proposed\"\n").unwrap();
        let factory = config.controller_factory().unwrap();
        assert_eq!(factory.kind, ControllerKind::ErrorState);
        let bad = RunConfig::from_toml_str("[controller]\nkind = \"pid\"\n").unwrap();
        assert!(bad.controller_factory().is_err());
    }

    #[test]
    fn solver_settings_flow_into_the_factory() {
        let text = r#"
[controller]
kind = "nmpc-simple"
horizon_steps = 40
qp_tolerance = 1e-7
qp_max_iterations = 900
sqp_max_iterations = 12
sqp_tolerance = 1e-3
input_bounds = [-30.0, 60.0]

[controller.weights]
position = 50.0
"#;
        let config = RunConfig::from_toml_str(text).unwrap();
        let factory = config.controller_factory().unwrap();
        assert_eq!(factory.kind, ControllerKind::NmpcSimple);
        assert_eq!(factory.qp.eps_abs, 1e-7);
        assert_eq!(factory.qp.max_iterations, 900);
        assert_eq!(factory.sqp_max_iterations, 12);
        assert_eq!(factory.sqp_tolerance, 1e-3);
        assert_eq!(factory.input_bounds, Some([-30.0, 60.0]));
        // Partial weights override only what they name.
        assert_eq!(factory.weights.position, 50.0);
        assert_eq!(factory.weights.attitude, MpcWeights::default_tracking().attitude);
        assert_eq!(config.episode_config().horizon_steps, 40);
    }

    #[test]
    fn sweep_plan_reflects_the_section() {
        let text = r#"
[sweep]
speeds_mps = [0.0, 0.25]
angle_count = 4
episodes = 2
controllers = ["error-state", "nmpc"]
"#;
        let config = RunConfig::from_toml_str(text).unwrap();
        let (factories, sweep) = config.sweep_plan().unwrap();
        assert_eq!(factories.len(), 2);
        assert_eq!(sweep.angle_count, 4);
        assert_eq!(sweep.monte_carlo.episodes, 2);
        assert_eq!(sweep.speeds_mps, vec![0.0, 0.25]);
    }

    #[test]
    fn current_settings_build_the_field() {
        let text = "[episode]\ncurrent_speed_mps = 0.5\ncurrent_angle_rad = 1.5707963267948966\n";
        let config = RunConfig::from_toml_str(text).unwrap();
        let current = config.current();
        assert!((current.v_ned[1] - 0.5).abs() < 1e-12);
        assert!(current.v_ned[0].abs() < 1e-12);
    }
}
