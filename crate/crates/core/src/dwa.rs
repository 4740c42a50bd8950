//! Dynamic Window Approach: velocity window under acceleration limits,
//! constant-velocity rollouts, normalized three-term cost and argmin.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{normalize_angle, Real};
use crate::world::{check_collision, Limits, RobotState, VelocityCommand, World};

/// Guards the pole of the inverse-clearance term.
const CLEARANCE_EPS: f64 = 0.1;

/// Velocities reachable within one control interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicWindow<T> {
    pub v_lo: T,
    pub v_hi: T,
    pub w_lo: T,
    pub w_hi: T,
}

impl<T: Real> DynamicWindow<T> {
    pub fn contains(&self, cmd: &VelocityCommand<T>) -> bool {
        cmd.v >= self.v_lo && cmd.v <= self.v_hi && cmd.omega >= self.w_lo && cmd.omega <= self.w_hi
    }

    pub fn clamp(&self, cmd: VelocityCommand<T>) -> VelocityCommand<T> {
        VelocityCommand {
            v: cmd.v.max(self.v_lo).min(self.v_hi),
            omega: cmd.omega.max(self.w_lo).min(self.w_hi),
        }
    }

    /// Uniform `n_v x n_w` grid, linear speed in the outer loop. Endpoints
    /// are hit exactly.
    pub fn samples(&self, n_v: usize, n_w: usize) -> Vec<VelocityCommand<T>> {
        let axis = |lo: T, hi: T, n: usize| -> Vec<T> {
            (0..n)
                .map(|i| {
                    if i + 1 == n && n > 1 {
                        hi
                    } else if n == 1 {
                        lo
                    } else {
                        let t = T::lit(i as f64) / T::lit((n - 1) as f64);
                        lo + (hi - lo) * t
                    }
                })
                .collect()
        };
        let vs = axis(self.v_lo, self.v_hi, n_v);
        let ws = axis(self.w_lo, self.w_hi, n_w);
        vs.iter()
            .flat_map(|&v| ws.iter().map(move |&omega| VelocityCommand { v, omega }))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CostWeights<T> {
    pub alpha: T,
    pub beta: T,
    /// Weight of the speed term (not the discount factor).
    pub gamma_w: T,
}

impl<T: Real> Default for CostWeights<T> {
    fn default() -> Self {
        CostWeights {
            alpha: T::one(),
            beta: T::one(),
            gamma_w: T::lit(0.5),
        }
    }
}

impl<T: Real> CostWeights<T> {
    pub fn scaled(&self, c: T) -> Self {
        CostWeights {
            alpha: self.alpha * c,
            beta: self.beta * c,
            gamma_w: self.gamma_w * c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct DwaConfig<T> {
    pub n_v: usize,
    pub n_w: usize,
    /// Rollout length in control steps.
    pub horizon: usize,
    pub weights: CostWeights<T>,
    /// Extra clearance a rollout must keep to count as feasible.
    pub safety_margin: T,
}

impl<T: Real> Default for DwaConfig<T> {
    fn default() -> Self {
        DwaConfig {
            n_v: 7,
            n_w: 11,
            horizon: 20,
            weights: CostWeights::default(),
            safety_margin: T::zero(),
        }
    }
}

impl<T: Real> DwaConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_v < 2 || self.n_w < 2 {
            return Err(Error::InvalidConfig("n_v and n_w must be >= 2".into()));
        }
        if self.horizon < 1 {
            return Err(Error::InvalidConfig("horizon must be >= 1".into()));
        }
        let w = &self.weights;
        if !(w.alpha >= T::zero() && w.beta >= T::zero() && w.gamma_w >= T::zero()) {
            return Err(Error::InvalidConfig("cost weights must be >= 0".into()));
        }
        if !(w.alpha + w.beta + w.gamma_w > T::zero()) {
            return Err(Error::InvalidConfig("cost weights must not all be zero".into()));
        }
        if !(self.safety_margin >= T::zero()) {
            return Err(Error::InvalidConfig("safety_margin must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRollout<T> {
    pub command: VelocityCommand<T>,
    /// `horizon + 1` poses starting with the current state.
    pub poses: Vec<RobotState<T>>,
    pub feasible: bool,
    /// Minimum over the poses of (nearest obstacle surface distance - robot
    /// radius), floored at zero. Walls are left to the feasibility check, so
    /// this is infinite in a world without obstacles.
    pub clearance: T,
}

/// Unnormalized cost terms of one candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostTerms<T> {
    pub dist: T,
    pub heading: T,
    pub vel: T,
}

/// Where a returned command came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlanSource {
    /// The learned policy's candidate won (or tied) the cost comparison.
    Policy,
    /// A grid candidate won the cost comparison.
    Dwa,
    /// The policy candidate collided; best grid candidate used instead.
    DwaFallback,
    /// Nothing feasible; rotate in place.
    Recovery,
}

impl PlanSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlanSource::Policy => "policy",
            PlanSource::Dwa => "dwa",
            PlanSource::DwaFallback => "dwa-fallback",
            PlanSource::Recovery => "recovery",
        }
    }
}

impl fmt::Display for PlanSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PlanSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "policy" => PlanSource::Policy,
            "dwa" => PlanSource::Dwa,
            "dwa-fallback" => PlanSource::DwaFallback,
            "recovery" => PlanSource::Recovery,
            other => return Err(Error::InvalidConfig(format!("unknown plan source `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plan<T> {
    pub command: VelocityCommand<T>,
    pub source: PlanSource,
}

pub fn compute_window<T: Real>(state: &RobotState<T>, limits: &Limits<T>, dt: T) -> DynamicWindow<T> {
    let dv = limits.a_max * dt;
    let dw = limits.alpha_max * dt;
    DynamicWindow {
        v_lo: (state.v - dv).max(T::zero()),
        v_hi: (state.v + dv).min(limits.v_max),
        w_lo: (state.omega - dw).max(-limits.omega_max),
        w_hi: (state.omega + dw).min(limits.omega_max),
    }
}

fn collides_with_margin<T: Real>(state: &RobotState<T>, world: &World<T>, margin: T) -> bool {
    check_collision(state, world)
        || (margin > T::zero() && world.point_clearance(state.position()) - world.spec.robot_radius <= margin)
}

fn integrate<T: Real>(s: &RobotState<T>, cmd: &VelocityCommand<T>, dt: T) -> RobotState<T> {
    let (sin, cos) = s.theta.sin_cos();
    RobotState {
        x: s.x + cmd.v * cos * dt,
        y: s.y + cmd.v * sin * dt,
        theta: normalize_angle(s.theta + cmd.omega * dt),
        v: cmd.v,
        omega: cmd.omega,
    }
}

/// Forward-simulates a constant command, propagating obstacles in lockstep.
pub fn rollout<T: Real>(
    state: &RobotState<T>,
    cmd: VelocityCommand<T>,
    world: &World<T>,
    horizon: usize,
    dt: T,
    safety_margin: T,
) -> TrajectoryRollout<T> {
    let radius = world.spec.robot_radius;
    let mut w = world.clone();
    let mut s = *state;
    let mut poses = Vec::with_capacity(horizon + 1);
    let mut feasible = s.is_finite() && !collides_with_margin(&s, &w, safety_margin);
    let mut clearance = w.obstacle_clearance(s.position()) - radius;
    poses.push(s);
    for _ in 0..horizon {
        s = integrate(&s, &cmd, dt);
        w.advance(dt);
        feasible = feasible && s.is_finite() && !collides_with_margin(&s, &w, safety_margin);
        clearance = clearance.min(w.obstacle_clearance(s.position()) - radius);
        poses.push(s);
    }
    TrajectoryRollout {
        command: cmd,
        poses,
        feasible,
        clearance: clearance.max(T::zero()),
    }
}

pub fn cost_terms<T: Real>(traj: &TrajectoryRollout<T>, world: &World<T>) -> Result<CostTerms<T>> {
    if !traj.feasible {
        return Err(Error::ContractViolation("cost_terms called on an infeasible rollout".into()));
    }
    let last = traj
        .poses
        .last()
        .ok_or_else(|| Error::ContractViolation("empty rollout".into()))?;
    let to_goal = world.spec.goal - last.position();
    let bearing = to_goal.y.atan2(to_goal.x);
    Ok(CostTerms {
        dist: T::one() / (traj.clearance + T::lit(CLEARANCE_EPS)),
        heading: normalize_angle(bearing - last.theta).abs(),
        vel: world.spec.limits.v_max - traj.command.v,
    })
}

/// Sum-normalizes each term over the candidate set and combines them with
/// the weights. A term whose sum is zero contributes zero everywhere.
pub fn total_cost<T: Real>(candidates: &[CostTerms<T>], weights: &CostWeights<T>) -> Result<Vec<T>> {
    if candidates.is_empty() {
        return Err(Error::NoFeasibleTrajectory);
    }
    let norm = |sum: T| if sum == T::zero() { T::zero() } else { T::one() / sum };
    let dist = norm(candidates.iter().map(|c| c.dist).sum());
    let heading = norm(candidates.iter().map(|c| c.heading).sum());
    let vel = norm(candidates.iter().map(|c| c.vel).sum());
    Ok(candidates
        .iter()
        .map(|c| weights.alpha * (c.dist * dist) + weights.beta * (c.heading * heading) + weights.gamma_w * (c.vel * vel))
        .collect())
}

/// Index of the preferred candidate: lowest cost, then lowest `|omega|`,
/// then highest `v`, then earliest position. Costs within a relative
/// `sqrt(eps)` of each other are treated as equal so the choice does not
/// depend on rounding.
pub fn select_best<T: Real>(costs: &[T], commands: &[VelocityCommand<T>]) -> Option<usize> {
    let tol = T::epsilon().sqrt();
    let mut best: Option<usize> = None;
    for i in 0..costs.len() {
        let Some(b) = best else {
            best = Some(i);
            continue;
        };
        let (g, gb) = (costs[i], costs[b]);
        let tie = (g - gb).abs() <= tol * g.abs().max(gb.abs());
        let better = if tie {
            let (c, cb) = (&commands[i], &commands[b]);
            c.omega.abs() < cb.omega.abs() || (c.omega.abs() == cb.omega.abs() && c.v > cb.v)
        } else {
            g < gb
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// All grid rollouts for the current window, in grid order.
pub fn grid_rollouts<T: Real>(state: &RobotState<T>, world: &World<T>, config: &DwaConfig<T>) -> Vec<TrajectoryRollout<T>> {
    let dt = world.spec.dt;
    compute_window(state, &world.spec.limits, dt)
        .samples(config.n_v, config.n_w)
        .into_iter()
        .map(|cmd| rollout(state, cmd, world, config.horizon, dt, config.safety_margin))
        .collect()
}

/// Command used when every candidate collides.
pub fn recovery_command<T: Real>(state: &RobotState<T>, world: &World<T>) -> VelocityCommand<T> {
    let window = compute_window(state, &world.spec.limits, world.spec.dt);
    VelocityCommand::new(T::zero(), window.w_hi)
}

/// Scores feasible rollouts and returns the index (into `rollouts`) of the
/// winner, or `None` if nothing is feasible.
pub fn best_feasible<T: Real>(rollouts: &[TrajectoryRollout<T>], world: &World<T>, weights: &CostWeights<T>) -> Option<usize> {
    let feasible: Vec<usize> = (0..rollouts.len()).filter(|&i| rollouts[i].feasible).collect();
    let terms: Vec<CostTerms<T>> = feasible
        .iter()
        .filter_map(|&i| cost_terms(&rollouts[i], world).ok())
        .collect();
    let costs = total_cost(&terms, weights).ok()?;
    let commands: Vec<VelocityCommand<T>> = feasible.iter().map(|&i| rollouts[i].command).collect();
    select_best(&costs, &commands).map(|k| feasible[k])
}

/// Classic DWA step.
pub fn plan_dwa<T: Real>(state: &RobotState<T>, world: &World<T>, config: &DwaConfig<T>) -> Plan<T> {
    let rollouts = grid_rollouts(state, world, config);
    match best_feasible(&rollouts, world, &config.weights) {
        Some(i) => Plan {
            command: rollouts[i].command,
            source: PlanSource::Dwa,
        },
        None => Plan {
            command: recovery_command(state, world),
            source: PlanSource::Recovery,
        },
    }
}
