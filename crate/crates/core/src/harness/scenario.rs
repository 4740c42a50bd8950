use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dwa::DwaConfig;
use crate::error::{Error, Result};
use crate::hybrid::RewardConfig;
use crate::lidar::SensorConfig;
use crate::td3::Td3Config;
use crate::world::WorldSpec;

pub const SCHEMA_VERSION: u32 = 1;

const ARENA_10X15: &str = include_str!("../../scenarios/arena_10x15.json");
const ARENA_25X25: &str = include_str!("../../scenarios/arena_25x25.json");

/// Names accepted by [`ScenarioFile::load`] in place of a path.
pub const BUILTIN_SCENARIOS: [&str; 2] = ["arena_10x15", "arena_25x25"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub episodes: usize,
    /// Step cap per episode or evaluation trial.
    pub max_steps: usize,
    pub pose_reshuffle_every: usize,
    /// When false every episode and trial starts from `world.start`.
    pub randomize_start: bool,
    /// Grid pitch of the candidate start cells.
    pub start_cell_size: f64,
    /// Required free space around a sampled start, beyond the robot radius.
    pub start_clearance: f64,
    pub start_min_goal_distance: f64,
    /// Dynamic obstacles are pre-advanced by a uniform number of steps in
    /// `[0, obstacle_phase_steps)` at the start of each episode or trial.
    pub obstacle_phase_steps: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            episodes: 3300,
            max_steps: 300,
            pose_reshuffle_every: 20,
            randomize_start: true,
            start_cell_size: 0.5,
            start_clearance: 0.3,
            start_min_goal_distance: 1.0,
            obstacle_phase_steps: 200,
        }
    }
}

/// Everything one experiment needs, as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub world: WorldSpec<f64>,
    #[serde(default)]
    pub sensor: SensorConfig<f64>,
    #[serde(default)]
    pub dwa: DwaConfig<f64>,
    #[serde(default)]
    pub td3: Td3Config<f64>,
    #[serde(default)]
    pub reward: RewardConfig<f64>,
    #[serde(default)]
    pub training: TrainingConfig,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: ScenarioFile = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// Loads a bundled scenario by name, or a JSON file by path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Some(text) = builtin(name_or_path) {
            return Self::from_json(text);
        }
        let path = Path::new(name_or_path);
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let text = builtin(name).ok_or_else(|| Error::InvalidConfig(format!("no bundled scenario `{name}`")))?;
        Self::from_json(text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.world.validate()?;
        self.sensor.validate()?;
        self.dwa.validate()?;
        self.td3.validate()?;
        self.reward.validate()?;
        let t = &self.training;
        if t.max_steps == 0 || t.pose_reshuffle_every == 0 {
            return Err(Error::InvalidConfig(
                "training: max_steps and pose_reshuffle_every must be >= 1".into(),
            ));
        }
        if !(t.start_cell_size > 0.0 && t.start_clearance >= 0.0 && t.start_min_goal_distance >= 0.0) {
            return Err(Error::InvalidConfig("training: bad start sampling parameters".into()));
        }
        Ok(())
    }
}

fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "arena_10x15" => Some(ARENA_10X15),
        "arena_25x25" => Some(ARENA_25X25),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_load() {
        for name in BUILTIN_SCENARIOS {
            let s = ScenarioFile::builtin(name).unwrap();
            assert_eq!(s.name, name);
            let dynamic = s
                .world
                .obstacles
                .iter()
                .filter(|o| matches!(o.kind, crate::world::ObstacleKind::Dynamic { .. }))
                .count();
            assert_eq!(dynamic, 3);
            assert_eq!(s.world.limits.v_max, 1.2);
            assert_eq!(s.world.limits.omega_max, 1.57);
        }
        let s = ScenarioFile::builtin("arena_25x25").unwrap();
        assert_eq!((s.world.bounds.x, s.world.bounds.y), (25.0, 25.0));
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let text = r#"{
            "schema_version": 1,
            "world": {
                "bounds": [10.0, 15.0],
                "start": {"x": 1.0, "y": 1.0, "theta": 0.0},
                "goal": [8.0, 13.0],
                "goal_radius": 0.3
            }
        }"#;
        let s = ScenarioFile::from_json(text).unwrap();
        assert_eq!(s.training.episodes, 3300);
        assert_eq!(s.training.max_steps, 300);
        assert_eq!(s.training.pose_reshuffle_every, 20);
        assert_eq!(s.td3.eps_decay, 0.992);
        assert_eq!(s.td3.eps_min, 0.05);
        assert_eq!(s.sensor.n_beams, 20);
        assert_eq!((s.dwa.n_v, s.dwa.n_w), (7, 11));
        assert_eq!(s.world.dt, 0.1);
        assert_eq!(s.world.robot_radius, 0.2);
    }

    #[test]
    fn strict_parsing() {
        let base = ScenarioFile::builtin("arena_10x15").unwrap().to_json().unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&base).unwrap();
        v["training"]["episodez"] = 3.into();
        assert!(ScenarioFile::from_json(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&base).unwrap();
        v["schema_version"] = 2.into();
        assert!(ScenarioFile::from_json(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&base).unwrap();
        v["dwa"]["n_v"] = 1.into();
        assert!(ScenarioFile::from_json(&v.to_string()).is_err());

        assert!(ScenarioFile::load("/definitely/not/here.json").is_err());
    }
}
