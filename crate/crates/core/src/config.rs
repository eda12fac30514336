//! Run configuration: plant size, scheduler and dispatch knobs, simulation
//! horizon. Loaded from TOML; every field has a default so a missing section
//! or an empty file is a valid configuration.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::plant::PlantParams;

// ==================================================================
// sections
// ==================================================================

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    /// Number of stacks on the shared bus.
    pub n_stacks: usize,
    /// Per-rectifier compensation bank, Mvar.
    pub qc_stack_mvar: f64,
    /// Bus compensation per energized stack, Mvar.
    pub qc_bus_per_stack_mvar: f64,
}

impl Default for PlantSection {
    fn default() -> Self {
        Self { n_stacks: 2, qc_stack_mvar: 0.21, qc_bus_per_stack_mvar: 0.06 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerSection {
    /// Look-ahead window, hours (first hour is applied).
    pub horizon_hours: usize,
    /// Instruction deviation fraction guarded by the robust rows (0 = off).
    pub alpha: f64,
    /// Piecewise current segments per stack-hour.
    pub current_segments: usize,
    /// Temperature bands per stack-hour.
    pub temp_bands: usize,
    /// Bus power-factor floor enforced by the plant row.
    pub pf_min: f64,
    /// Extra power-factor margin on top of the floor; negative means "use
    /// the margin stored in the fit artifact".
    pub pf_margin: f64,
    /// Branch-and-bound relative gap.
    pub gap: f64,
    /// Wall-clock budget per scheduling solve, seconds.
    pub time_limit_s: f64,
    /// Production-equivalent penalty per status switch, kg.
    pub switch_penalty_kg: f64,
    /// Spread commitment across rested stacks (tiny objective bonus).
    pub wear_leveling: bool,
}

impl Default for SchedulerSection {
    fn default() -> Self {
        Self {
            horizon_hours: 4,
            alpha: 0.05,
            current_segments: 5,
            temp_bands: 2,
            pf_min: 0.9,
            pf_margin: -1.0,
            gap: 1e-6,
            time_limit_s: 120.0,
            switch_penalty_kg: 0.05,
            wear_leveling: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispatchSection {
    /// Intra-hour step, minutes (must divide 60).
    pub dt_minutes: u32,
    /// Fixed-point iterations allowed per dispatch step.
    pub max_iters: usize,
    /// Power-tracking residual target, W.
    pub tolerance_w: f64,
}

impl Default for DispatchSection {
    fn default() -> Self {
        Self { dt_minutes: 15, max_iters: 20, tolerance_w: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// Scenario length, hours.
    pub hours: usize,
    /// RNG seed for fuzzed instruction traces.
    pub seed: u64,
    /// Instruction profile: "day" (two-stack day shape) or "preset".
    pub profile: String,
    /// Preset level as percent of nameplate, used when profile = "preset".
    pub preset_pct: u32,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { hours: 24, seed: 42, profile: "day".to_string(), preset_pct: 50 }
    }
}

// ==================================================================
// top level
// ==================================================================

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub plant: PlantSection,
    pub scheduler: SchedulerSection,
    pub dispatch: DispatchSection,
    pub sim: SimSection,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(toml::de::Error),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "cannot parse config: {e}"),
            ConfigError::Invalid(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(ConfigError::Parse)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        if self.plant.n_stacks == 0 {
            return fail("plant.n_stacks must be at least 1".into());
        }
        if self.scheduler.horizon_hours == 0 {
            return fail("scheduler.horizon_hours must be at least 1".into());
        }
        if !(0.0..=0.5).contains(&self.scheduler.alpha) {
            return fail(format!("scheduler.alpha {} outside [0, 0.5]", self.scheduler.alpha));
        }
        if !(1..=8).contains(&self.scheduler.current_segments) {
            return fail("scheduler.current_segments must be in 1..=8".into());
        }
        if !(1..=4).contains(&self.scheduler.temp_bands) {
            return fail("scheduler.temp_bands must be in 1..=4".into());
        }
        if !(0.5..1.0).contains(&self.scheduler.pf_min) {
            return fail(format!("scheduler.pf_min {} outside [0.5, 1)", self.scheduler.pf_min));
        }
        if self.dispatch.dt_minutes == 0 || 60 % self.dispatch.dt_minutes != 0 {
            return fail(format!("dispatch.dt_minutes {} must divide 60", self.dispatch.dt_minutes));
        }
        if self.sim.hours == 0 {
            return fail("sim.hours must be at least 1".into());
        }
        match self.sim.profile.as_str() {
            "day" | "preset" | "fuzz" => {}
            other => return fail(format!("sim.profile '{other}' (expected day, preset or fuzz)")),
        }
        if self.sim.profile == "preset" && !(1..=100).contains(&self.sim.preset_pct) {
            return fail(format!("sim.preset_pct {} outside 1..=100", self.sim.preset_pct));
        }
        Ok(())
    }

    /// Materialize the physical plant parameters.
    pub fn plant_params(&self) -> PlantParams {
        PlantParams {
            n_stacks: self.plant.n_stacks,
            qc_stack: self.plant.qc_stack_mvar * 1.0e6,
            qc_bus_per_stack: self.plant.qc_bus_per_stack_mvar * 1.0e6,
            ..PlantParams::default()
        }
    }

    /// Stable content hash of the canonical serialized form (FNV-1a 64).
    pub fn content_hash(&self) -> u64 {
        let canon = toml::to_string(self).expect("config serializes");
        fnv1a(canon.as_bytes())
    }
}

/// FNV-1a 64-bit hash.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

// ==================================================================
// tests
// ==================================================================
