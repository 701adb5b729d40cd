//! Layered settings: built-in defaults, then the TOML file named by
//! `MVP_CONFIG`, then command-line flags. File keys are the flag names
//! without the leading dashes; a `[params]` table may set any scenario
//! config key directly.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use micromvp::math::Arena;
use micromvp::orchestrator::{ScenarioConfig, ScenarioKind};
use serde::Deserialize;

pub const CONFIG_ENV: &str = "MVP_CONFIG";

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    pub scenario: Option<String>,
    pub vehicles: Option<usize>,
    pub hz: Option<f64>,
    pub seed: Option<u64>,
    pub drop: Option<f64>,
    pub sigma_xy: Option<f64>,
    pub real_time: Option<bool>,
    pub out: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub telemetry_port: Option<u16>,
    pub command_port: Option<u16>,
    pub ws_port: Option<u16>,
    pub workspace: Option<String>,
    pub robots: Option<usize>,
    pub params: Option<toml::Table>,
}

impl Settings {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// The file named by `MVP_CONFIG`, or nothing.
    pub fn from_env() -> anyhow::Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    /// Field by field, `flags` wins where it has a value.
    pub fn overlay(self, flags: Settings) -> Settings {
        Settings {
            scenario: flags.scenario.or(self.scenario),
            vehicles: flags.vehicles.or(self.vehicles),
            hz: flags.hz.or(self.hz),
            seed: flags.seed.or(self.seed),
            drop: flags.drop.or(self.drop),
            sigma_xy: flags.sigma_xy.or(self.sigma_xy),
            real_time: flags.real_time.or(self.real_time),
            out: flags.out.or(self.out),
            log: flags.log.or(self.log),
            telemetry_port: flags.telemetry_port.or(self.telemetry_port),
            command_port: flags.command_port.or(self.command_port),
            ws_port: flags.ws_port.or(self.ws_port),
            workspace: flags.workspace.or(self.workspace),
            robots: flags.robots.or(self.robots),
            params: flags.params.or(self.params),
        }
    }

    /// Builds and validates the scenario config. `fallback` names the
    /// scenario when none is given.
    pub fn scenario_config(&self, fallback: ScenarioKind) -> anyhow::Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::new(fallback, 1);
        if let Some(params) = &self.params {
            let patch = serde_json::to_value(params)?;
            cfg = cfg.with_overrides(&patch)?;
        }
        if let Some(s) = &self.scenario {
            cfg.scenario = s.parse()?;
        }
        if let Some(n) = self.vehicles {
            cfg.vehicle_count = n;
        }
        if let Some(hz) = self.hz {
            cfg.loop_hz = hz;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(p) = self.drop {
            cfg.link.drop_probability = p;
        }
        if let Some(s) = self.sigma_xy {
            cfg.sensor.sigma_xy = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `WxH` in meters, e.g. `1.5x0.9`.
pub fn parse_workspace(s: &str) -> anyhow::Result<Arena> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("workspace '{s}' is not WxH"))?;
    let width: f64 = w.trim().parse().with_context(|| format!("workspace width '{w}'"))?;
    let height: f64 = h.trim().parse().with_context(|| format!("workspace height '{h}'"))?;
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        bail!("workspace must have positive size, got {width}x{height}");
    }
    Ok(Arena { width, height })
}
