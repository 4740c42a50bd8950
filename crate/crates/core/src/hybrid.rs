//! Policy-augmented DWA: the actor's command joins the sampled grid as one
//! more candidate and competes under the same cost, with collision checking
//! as a hard filter.

use serde::{Deserialize, Serialize};

use crate::dwa::{
    best_feasible, compute_window, cost_terms, grid_rollouts, recovery_command, rollout, select_best, total_cost, DwaConfig,
    Plan, PlanSource,
};
use crate::error::{Error, Result};
use crate::lidar::{LidarScan, SensorConfig};
use crate::nn::Mlp;
use crate::scalar::{normalize_angle, Real};
use crate::world::{Limits, RobotState, VelocityCommand, World, WorldSpec};

/// Policy input: normalized scan, goal distance and bearing, velocities.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation<T> {
    /// Ranges divided by the sensor's max range, in `(0, 1]`.
    pub beams: Vec<T>,
    /// Distance to goal over the world diagonal.
    pub goal_dist: T,
    /// Bearing error over pi, in `[-1, 1]`.
    pub goal_bearing_error: T,
    pub v_norm: T,
    pub w_norm: T,
}

impl<T: Real> Observation<T> {
    pub fn len(&self) -> usize {
        self.beams.len() + 4
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_vec(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.beams);
        v.extend([self.goal_dist, self.goal_bearing_error, self.v_norm, self.w_norm]);
        v
    }
}

/// Observation length for a given beam count.
pub fn observation_len(n_beams: usize) -> usize {
    n_beams + 4
}

pub fn build_observation<T: Real>(
    scan: &LidarScan<T>,
    state: &RobotState<T>,
    spec: &WorldSpec<T>,
    sensor: &SensorConfig<T>,
) -> Observation<T> {
    let to_goal = spec.goal - state.position();
    let bearing = normalize_angle(to_goal.y.atan2(to_goal.x) - state.theta);
    Observation {
        beams: scan.ranges.iter().map(|&r| r / sensor.max_range).collect(),
        goal_dist: (to_goal.norm() / spec.diagonal()).min(T::one()),
        goal_bearing_error: bearing / T::PI(),
        v_norm: state.v / spec.limits.v_max,
        w_norm: state.omega / spec.limits.omega_max,
    }
}

/// Maps `[-1, 1]^2` onto `[0, v_max] x [-omega_max, omega_max]`.
pub fn scale_action<T: Real>(a: &[T], limits: &Limits<T>) -> VelocityCommand<T> {
    let half = T::lit(0.5);
    let a0 = a[0].max(-T::one()).min(T::one());
    let a1 = a[1].max(-T::one()).min(T::one());
    VelocityCommand {
        v: (a0 + T::one()) * half * limits.v_max,
        omega: a1 * limits.omega_max,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct RewardConfig<T> {
    pub r_goal: T,
    pub r_collision: T,
    /// Reward per meter of progress toward the goal.
    pub progress_scale: T,
    /// Added on every non-terminal step (negative).
    pub step_penalty: T,
}

impl<T: Real> Default for RewardConfig<T> {
    fn default() -> Self {
        RewardConfig {
            r_goal: T::lit(100.0),
            r_collision: T::lit(-100.0),
            progress_scale: T::lit(10.0),
            step_penalty: T::lit(-0.05),
        }
    }
}

impl<T: Real> RewardConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_goal > T::zero() && T::zero() > self.r_collision) {
            return Err(Error::InvalidConfig("reward: need r_goal > 0 > r_collision".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Collision,
    Goal,
    Ongoing,
}

pub fn compute_reward<T: Real>(
    prev: &RobotState<T>,
    next: &RobotState<T>,
    spec: &WorldSpec<T>,
    outcome: Outcome,
    config: &RewardConfig<T>,
) -> T {
    match outcome {
        Outcome::Collision => config.r_collision,
        Outcome::Goal => config.r_goal,
        Outcome::Ongoing => {
            let before = prev.position().distance(spec.goal);
            let after = next.position().distance(spec.goal);
            config.progress_scale * (before - after) + config.step_penalty
        }
    }
}

/// Result of one hybrid planning call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridPlan<T> {
    pub command: VelocityCommand<T>,
    pub source: PlanSource,
    /// The policy's command after clamping into the dynamic window.
    pub policy_command: VelocityCommand<T>,
}

impl<T: Real> From<HybridPlan<T>> for Plan<T> {
    fn from(p: HybridPlan<T>) -> Self {
        Plan {
            command: p.command,
            source: p.source,
        }
    }
}

/// One planning step of the fused planner.
pub fn plan_hybrid<T: Real>(
    state: &RobotState<T>,
    world: &World<T>,
    scan: &LidarScan<T>,
    actor: &Mlp<T>,
    sensor: &SensorConfig<T>,
    config: &DwaConfig<T>,
) -> Result<HybridPlan<T>> {
    let spec = &world.spec;
    let obs = build_observation(scan, state, spec, sensor).to_vec();
    let action = actor.predict(&obs)?;
    if action.len() != 2 {
        return Err(Error::ShapeMismatch {
            expected: 2,
            got: action.len(),
        });
    }
    let window = compute_window(state, &spec.limits, spec.dt);
    let policy_command = window.clamp(scale_action(&action, &spec.limits));
    let policy = rollout(state, policy_command, world, config.horizon, spec.dt, config.safety_margin);
    let grid = grid_rollouts(state, world, config);

    if !policy.feasible {
        return Ok(match best_feasible(&grid, world, &config.weights) {
            Some(i) => HybridPlan {
                command: grid[i].command,
                source: PlanSource::DwaFallback,
                policy_command,
            },
            None => HybridPlan {
                command: recovery_command(state, world),
                source: PlanSource::Recovery,
                policy_command,
            },
        });
    }

    let feasible: Vec<usize> = (0..grid.len()).filter(|&i| grid[i].feasible).collect();
    let mut terms = Vec::with_capacity(feasible.len() + 1);
    for &i in &feasible {
        terms.push(cost_terms(&grid[i], world)?);
    }
    terms.push(cost_terms(&policy, world)?);
    let costs = total_cost(&terms, &config.weights)?;
    let (grid_costs, policy_cost) = costs.split_at(feasible.len());
    let policy_cost = policy_cost[0];
    let commands: Vec<VelocityCommand<T>> = feasible.iter().map(|&i| grid[i].command).collect();

    // ties go to the policy
    let grid_wins = select_best(grid_costs, &commands).filter(|&k| {
        let g = grid_costs[k];
        let tol = T::epsilon().sqrt() * g.abs().max(policy_cost.abs());
        g < policy_cost - tol
    });
    Ok(match grid_wins {
        Some(k) => HybridPlan {
            command: commands[k],
            source: PlanSource::Dwa,
            policy_command,
        },
        None => HybridPlan {
            command: policy_command,
            source: PlanSource::Policy,
            policy_command,
        },
    })
}
