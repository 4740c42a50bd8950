//! Episode setup and the closed-loop environment step shared by training
//! and evaluation.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::harness::scenario::{ScenarioFile, TrainingConfig};
use crate::hybrid::Outcome;
use crate::scalar::normalize_angle;
use crate::world::{check_collision, goal_reached, step_kinematics, ObstacleKind, RobotState, VelocityCommand, World, WorldSpec};

const PHASE_ATTEMPTS: usize = 64;

/// Centers of grid cells that are clear of walls and static obstacles and
/// far enough from the goal.
pub fn start_cells(spec: &WorldSpec<f64>, training: &TrainingConfig) -> Vec<Vec2<f64>> {
    let mut statics = spec.clone();
    statics.obstacles.retain(|o| matches!(o.kind, ObstacleKind::Static));
    let world = World::new_unchecked(Arc::new(statics));
    let need = spec.robot_radius + training.start_clearance;
    let h = training.start_cell_size;
    let nx = (spec.bounds.x / h).floor() as usize;
    let ny = (spec.bounds.y / h).floor() as usize;
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let p = Vec2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if world.point_clearance(p) >= need && p.distance(spec.goal) >= training.start_min_goal_distance {
                cells.push(p);
            }
        }
    }
    cells
}

/// Samples a start pose: a uniform free cell with a uniform heading.
pub fn sample_start<R: Rng + ?Sized>(cells: &[Vec2<f64>], rng: &mut R) -> Result<RobotState<f64>> {
    if cells.is_empty() {
        return Err(Error::InvalidConfig("scenario has no free start cells".into()));
    }
    let p = cells[rng.random_range(0..cells.len())];
    let theta = normalize_angle(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
    Ok(RobotState::at_rest(p.x, p.y, theta))
}

/// Builds the world with dynamic obstacles pre-advanced by a random number
/// of steps, retrying until the start pose has the required clearance.
/// Falls back to the best phase seen.
pub fn phased_world<R: Rng + ?Sized>(
    spec: &Arc<WorldSpec<f64>>,
    start: &RobotState<f64>,
    training: &TrainingConfig,
    rng: &mut R,
) -> World<f64> {
    let need = spec.robot_radius + training.start_clearance;
    let mut best: Option<(f64, World<f64>)> = None;
    for _ in 0..PHASE_ATTEMPTS {
        let steps = if training.obstacle_phase_steps == 0 {
            0
        } else {
            rng.random_range(0..training.obstacle_phase_steps)
        };
        let mut world = World::new_unchecked(Arc::clone(spec));
        for _ in 0..steps {
            world.advance(spec.dt);
        }
        world.time = 0.0;
        let clearance = world.point_clearance(start.position());
        if clearance >= need {
            return world;
        }
        if best.as_ref().is_none_or(|(c, _)| clearance > *c) {
            best = Some((clearance, world));
        }
        if training.obstacle_phase_steps == 0 {
            break;
        }
    }
    best.map(|(_, w)| w).unwrap_or_else(|| World::new_unchecked(Arc::clone(spec)))
}

/// How an episode or trial ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Goal,
    Collision,
    Timeout,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Goal => "goal",
            Termination::Collision => "collision",
            Termination::Timeout => "timeout",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Robot plus world, advanced one control step at a time.
#[derive(Clone, Debug)]
pub struct Episode {
    pub world: World<f64>,
    pub state: RobotState<f64>,
    pub steps: usize,
}

impl Episode {
    pub fn new(world: World<f64>, state: RobotState<f64>) -> Self {
        Episode { world, state, steps: 0 }
    }

    /// Applies `cmd` for one `dt`, moves the obstacles, then checks
    /// collision before the goal.
    pub fn step(&mut self, cmd: &VelocityCommand<f64>) -> Result<Outcome> {
        let dt = self.world.spec.dt;
        self.state = step_kinematics(&self.state, cmd, dt)?;
        self.world.advance(dt);
        self.steps += 1;
        Ok(if check_collision(&self.state, &self.world) {
            Outcome::Collision
        } else if goal_reached(&self.state, &self.world.spec) {
            Outcome::Goal
        } else {
            Outcome::Ongoing
        })
    }
}

/// Start pose for episode or trial setups: the scenario's own start unless
/// randomization is enabled.
pub fn choose_start<R: Rng + ?Sized>(scenario: &ScenarioFile, cells: &[Vec2<f64>], rng: &mut R) -> Result<RobotState<f64>> {
    if scenario.training.randomize_start {
        sample_start(cells, rng)
    } else {
        Ok(scenario.world.start)
    }
}
