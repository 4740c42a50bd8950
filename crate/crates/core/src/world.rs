//! Deterministic 2D world: unicycle kinematics, waypoint-following
//! obstacles, collision and goal tests.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{point_rect_distance, Vec2};
use crate::scalar::{normalize_angle, Real};

/// Pose and velocities of the differential-drive robot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct RobotState<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
    #[serde(default)]
    pub v: T,
    #[serde(default)]
    pub omega: T,
}

impl<T: Real> RobotState<T> {
    pub fn at_rest(x: T, y: T, theta: T) -> Self {
        RobotState {
            x,
            y,
            theta: normalize_angle(theta),
            v: T::zero(),
            omega: T::zero(),
        }
    }

    pub fn position(&self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite() && self.v.is_finite() && self.omega.is_finite()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct VelocityCommand<T> {
    pub v: T,
    pub omega: T,
}

impl<T: Real> VelocityCommand<T> {
    pub fn new(v: T, omega: T) -> Self {
        VelocityCommand { v, omega }
    }

    /// Clamps into `[0, v_max] x [-omega_max, omega_max]`.
    pub fn clamped(self, limits: &Limits<T>) -> Self {
        VelocityCommand {
            v: self.v.max(T::zero()).min(limits.v_max),
            omega: self.omega.max(-limits.omega_max).min(limits.omega_max),
        }
    }
}

/// Velocity and acceleration limits of the robot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Limits<T> {
    pub v_max: T,
    pub omega_max: T,
    pub a_max: T,
    pub alpha_max: T,
}

impl<T: Real> Default for Limits<T> {
    fn default() -> Self {
        Limits {
            v_max: T::lit(1.2),
            omega_max: T::lit(1.57),
            a_max: T::lit(1.0),
            alpha_max: T::lit(3.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub enum Shape<T> {
    Circle { center: Vec2<T>, radius: T },
    Rect { min: Vec2<T>, max: Vec2<T> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub enum ObstacleKind<T> {
    Static,
    /// Constant-speed motion along a waypoint polyline starting at the first
    /// waypoint.
    Dynamic {
        waypoints: Vec<Vec2<T>>,
        speed: T,
        #[serde(rename = "loop")]
        looped: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Obstacle<T> {
    pub shape: Shape<T>,
    pub kind: ObstacleKind<T>,
}

impl<T: Real> Obstacle<T> {
    pub fn circle(center: Vec2<T>, radius: T) -> Self {
        Obstacle {
            shape: Shape::Circle { center, radius },
            kind: ObstacleKind::Static,
        }
    }

    pub fn rect(min: Vec2<T>, max: Vec2<T>) -> Self {
        Obstacle {
            shape: Shape::Rect { min, max },
            kind: ObstacleKind::Static,
        }
    }

    /// Disc pedestrian that starts on `waypoints[0]`.
    pub fn pedestrian(radius: T, waypoints: Vec<Vec2<T>>, speed: T, looped: bool) -> Self {
        let center = waypoints.first().copied().unwrap_or_default();
        Obstacle {
            shape: Shape::Circle { center, radius },
            kind: ObstacleKind::Dynamic {
                waypoints,
                speed,
                looped,
            },
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("obstacle {index}: {msg}")));
        match &self.shape {
            Shape::Circle { center, radius } => {
                if !center.is_finite() || !(radius.is_finite() && *radius > T::zero()) {
                    return bad("circle needs a finite center and radius > 0");
                }
            }
            Shape::Rect { min, max } => {
                if !min.is_finite() || !max.is_finite() || !(min.x < max.x && min.y < max.y) {
                    return bad("rectangle needs min < max componentwise");
                }
            }
        }
        if let ObstacleKind::Dynamic { waypoints, speed, .. } = &self.kind {
            if waypoints.len() < 2 {
                return bad("dynamic obstacle needs at least 2 waypoints");
            }
            if !(speed.is_finite() && *speed > T::zero()) {
                return bad("dynamic obstacle speed must be > 0");
            }
            if waypoints.iter().any(|w| !w.is_finite()) {
                return bad("non-finite waypoint");
            }
            match &self.shape {
                Shape::Circle { center, .. } if *center == waypoints[0] => {}
                Shape::Circle { .. } => return bad("dynamic circle must start on its first waypoint"),
                Shape::Rect { .. } => return bad("dynamic obstacles must be circles"),
            }
        }
        Ok(())
    }
}

/// Static description of a navigation scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct WorldSpec<T> {
    /// Width and height; the world spans `[0, width] x [0, height]`.
    pub bounds: Vec2<T>,
    pub start: RobotState<T>,
    pub goal: Vec2<T>,
    pub goal_radius: T,
    #[serde(default)]
    pub obstacles: Vec<Obstacle<T>>,
    #[serde(default = "default_robot_radius")]
    pub robot_radius: T,
    #[serde(default)]
    pub limits: Limits<T>,
    #[serde(default = "default_dt")]
    pub dt: T,
}

fn default_robot_radius<T: Real>() -> T {
    T::lit(0.2)
}

fn default_dt<T: Real>() -> T {
    T::lit(0.1)
}

impl<T: Real> WorldSpec<T> {
    /// Obstacle-free world with default limits, radius and step.
    pub fn empty(width: T, height: T, start: RobotState<T>, goal: Vec2<T>) -> Self {
        WorldSpec {
            bounds: Vec2::new(width, height),
            start,
            goal,
            goal_radius: T::lit(0.3),
            obstacles: Vec::new(),
            robot_radius: default_robot_radius(),
            limits: Limits::default(),
            dt: default_dt(),
        }
    }

    pub fn diagonal(&self) -> T {
        self.bounds.norm()
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        p.x > T::zero() && p.y > T::zero() && p.x < self.bounds.x && p.y < self.bounds.y
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.bounds.x > T::zero() && self.bounds.y > T::zero()) || !self.bounds.is_finite() {
            return bad("bounds must be positive".into());
        }
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return bad("dt must be > 0".into());
        }
        if !(self.goal_radius >= T::zero() && self.goal_radius.is_finite()) {
            return bad("goal_radius must be >= 0".into());
        }
        if !(self.robot_radius > T::zero() && self.robot_radius.is_finite()) {
            return bad("robot_radius must be > 0".into());
        }
        let l = &self.limits;
        if !(l.v_max > T::zero() && l.omega_max > T::zero() && l.a_max > T::zero() && l.alpha_max > T::zero()) {
            return bad("limits must be positive".into());
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate(i)?;
        }
        let s = &self.start;
        if !s.is_finite() || s.v < T::zero() || s.v > l.v_max || s.omega.abs() > l.omega_max {
            return bad("start state outside limits".into());
        }
        if !self.contains(s.position()) || !self.contains(self.goal) {
            return bad("start and goal must lie inside bounds".into());
        }
        let world = World::new_unchecked(Arc::new(self.clone()));
        if check_collision(s, &world) {
            return bad("start pose is in collision".into());
        }
        if world.point_clearance(self.goal) <= T::zero() {
            return bad("goal lies inside an obstacle".into());
        }
        Ok(())
    }
}

/// Runtime position of one obstacle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObstacleState<T> {
    /// Current center; only meaningful for circles.
    pub center: Vec2<T>,
    /// Index of the waypoint currently targeted.
    pub target: usize,
    /// Set once a non-looping obstacle reaches its last waypoint.
    pub halted: bool,
}

/// A [`WorldSpec`] together with the current obstacle positions.
#[derive(Clone, Debug)]
pub struct World<T> {
    pub spec: Arc<WorldSpec<T>>,
    pub obstacles: Vec<ObstacleState<T>>,
    pub time: T,
}

impl<T: Real> World<T> {
    pub fn new(spec: WorldSpec<T>) -> Result<Self> {
        spec.validate()?;
        Ok(Self::new_unchecked(Arc::new(spec)))
    }

    pub fn from_shared(spec: Arc<WorldSpec<T>>) -> Result<Self> {
        spec.validate()?;
        Ok(Self::new_unchecked(spec))
    }

    pub(crate) fn new_unchecked(spec: Arc<WorldSpec<T>>) -> Self {
        let obstacles = spec
            .obstacles
            .iter()
            .map(|o| {
                let center = match o.shape {
                    Shape::Circle { center, .. } => center,
                    Shape::Rect { min, max } => (min + max) * T::lit(0.5),
                };
                ObstacleState {
                    center,
                    target: 1,
                    halted: !matches!(o.kind, ObstacleKind::Dynamic { .. }),
                }
            })
            .collect();
        World {
            spec,
            obstacles,
            time: T::zero(),
        }
    }

    /// Moves every dynamic obstacle by one step of length `speed * dt`.
    pub fn advance(&mut self, dt: T) {
        advance_obstacles(&self.spec, &mut self.obstacles, dt);
        self.time = self.time + dt;
    }

    /// Iterates `(shape, current center)` pairs.
    pub fn bodies(&self) -> impl Iterator<Item = Body<T>> + '_ {
        self.spec.obstacles.iter().zip(&self.obstacles).map(|(o, s)| match o.shape {
            Shape::Circle { radius, .. } => Body::Circle {
                center: s.center,
                radius,
            },
            Shape::Rect { min, max } => Body::Rect { min, max },
        })
    }

    /// Distance from a point to the nearest obstacle surface, ignoring walls.
    /// Infinite when there are no obstacles.
    pub fn obstacle_clearance(&self, p: Vec2<T>) -> T {
        self.bodies().fold(T::infinity(), |d, body| d.min(body.surface_distance(p)))
    }

    /// Distance from a point to the nearest obstacle surface or wall.
    /// Zero or negative inside an obstacle.
    pub fn point_clearance(&self, p: Vec2<T>) -> T {
        let b = self.spec.bounds;
        let mut d = p.x.min(p.y).min(b.x - p.x).min(b.y - p.y);
        for body in self.bodies() {
            d = d.min(body.surface_distance(p));
        }
        d
    }
}

/// Obstacle geometry at its current position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Body<T> {
    Circle { center: Vec2<T>, radius: T },
    Rect { min: Vec2<T>, max: Vec2<T> },
}

impl<T: Real> Body<T> {
    pub fn surface_distance(&self, p: Vec2<T>) -> T {
        match *self {
            Body::Circle { center, radius } => p.distance(center) - radius,
            Body::Rect { min, max } => point_rect_distance(p, min, max),
        }
    }
}

/// One explicit-Euler step of the unicycle model.
pub fn step_kinematics<T: Real>(state: &RobotState<T>, cmd: &VelocityCommand<T>, dt: T) -> Result<RobotState<T>> {
    if !state.is_finite() || !cmd.v.is_finite() || !cmd.omega.is_finite() || !dt.is_finite() {
        return Err(Error::InvalidState("non-finite state, command or dt".into()));
    }
    if dt <= T::zero() {
        return Err(Error::InvalidState("dt must be > 0".into()));
    }
    let (s, c) = state.theta.sin_cos();
    Ok(RobotState {
        x: state.x + cmd.v * c * dt,
        y: state.y + cmd.v * s * dt,
        theta: normalize_angle(state.theta + cmd.omega * dt),
        v: cmd.v,
        omega: cmd.omega,
    })
}

/// Advances dynamic obstacles toward their current waypoint. An obstacle
/// within `speed * dt` of its waypoint snaps onto it and retargets the next
/// one; non-looping obstacles stop at the final waypoint.
pub fn advance_obstacles<T: Real>(spec: &WorldSpec<T>, states: &mut [ObstacleState<T>], dt: T) {
    for (o, s) in spec.obstacles.iter().zip(states.iter_mut()) {
        let ObstacleKind::Dynamic {
            waypoints,
            speed,
            looped,
        } = &o.kind
        else {
            continue;
        };
        if s.halted {
            continue;
        }
        let step = *speed * dt;
        let target = waypoints[s.target];
        let to = target - s.center;
        let dist = to.norm();
        if dist <= step {
            s.center = target;
            if s.target + 1 < waypoints.len() {
                s.target += 1;
            } else if *looped {
                s.target = 0;
            } else {
                s.halted = true;
            }
        } else {
            s.center = s.center + to * (step / dist);
        }
    }
}

/// True iff the robot disc touches or overlaps an obstacle or leaves the
/// bounds.
pub fn check_collision<T: Real>(state: &RobotState<T>, world: &World<T>) -> bool {
    let r = world.spec.robot_radius;
    let p = state.position();
    let b = world.spec.bounds;
    if p.x - r <= T::zero() || p.y - r <= T::zero() || p.x + r >= b.x || p.y + r >= b.y {
        return true;
    }
    world.bodies().any(|body| match body {
        Body::Circle { center, radius } => p.distance(center) <= r + radius,
        Body::Rect { min, max } => point_rect_distance(p, min, max) <= r,
    })
}

pub fn goal_reached<T: Real>(state: &RobotState<T>, spec: &WorldSpec<T>) -> bool {
    state.position().distance(spec.goal) <= spec.goal_radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn big_world() -> WorldSpec<f64> {
        WorldSpec::empty(100.0, 100.0, RobotState::at_rest(50.0, 50.0, 0.0), Vec2::new(90.0, 50.0))
    }

    fn with_origin_obstacles(obstacles: Vec<Obstacle<f64>>) -> World<f64> {
        // shift the frame so that tests can think around the origin
        let mut spec = big_world();
        spec.obstacles = obstacles;
        World::new_unchecked(Arc::new(spec))
    }

    #[test]
    fn zero_command_is_identity() {
        let s = RobotState::at_rest(0.0, 0.0, 0.0);
        let n = step_kinematics(&s, &VelocityCommand::new(0.0, 0.0), 0.1).unwrap();
        assert_eq!((n.x, n.y, n.theta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn straight_line_step() {
        let s = RobotState::at_rest(0.0, 0.0, 0.0);
        let n = step_kinematics(&s, &VelocityCommand::new(1.0, 0.0), 0.1).unwrap();
        assert_eq!((n.x, n.y, n.theta), (0.1, 0.0, 0.0));
        assert_eq!((n.v, n.omega), (1.0, 0.0));
    }

    #[test]
    fn turning_step_matches_scalar_euler() {
        let s = RobotState::at_rest(0.0, 0.0, FRAC_PI_2);
        let n = step_kinematics(&s, &VelocityCommand::new(1.0, 0.5), 0.1).unwrap();
        assert!(n.x.abs() < 1e-15);
        assert!((n.y - 0.1).abs() < 1e-15);
        assert!((n.theta - (FRAC_PI_2 + 0.05)).abs() < 1e-15);
    }

    #[test]
    fn non_finite_input_rejected() {
        let s = RobotState::at_rest(f64::NAN, 0.0, 0.0);
        assert!(matches!(
            step_kinematics(&s, &VelocityCommand::new(0.0, 0.0), 0.1),
            Err(Error::InvalidState(_))
        ));
        let s = RobotState::at_rest(0.0, 0.0, 0.0);
        assert!(step_kinematics(&s, &VelocityCommand::new(f64::INFINITY, 0.0), 0.1).is_err());
    }

    #[test]
    fn static_obstacles_do_not_move() {
        let mut w = with_origin_obstacles(vec![Obstacle::circle(Vec2::new(10.0, 10.0), 1.0)]);
        let before = w.obstacles.clone();
        for _ in 0..10 {
            w.advance(0.1);
        }
        assert_eq!(before, w.obstacles);
    }

    #[test]
    fn pedestrian_moves_linearly() {
        let mut w = with_origin_obstacles(vec![Obstacle::pedestrian(
            0.3,
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)],
            1.0,
            true,
        )]);
        w.advance(0.1);
        assert_eq!(w.obstacles[0].center, Vec2::new(0.1, 0.0));
        assert_eq!(w.obstacles[0].target, 1);
    }

    #[test]
    fn pedestrian_snaps_and_retargets() {
        let mut w = with_origin_obstacles(vec![Obstacle::pedestrian(
            0.3,
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)],
            1.0,
            true,
        )]);
        w.obstacles[0].center = Vec2::new(0.95, 0.0);
        w.advance(0.1);
        assert_eq!(w.obstacles[0].center, Vec2::new(1.0, 0.0));
        assert_eq!(w.obstacles[0].target, 2);
        w.advance(0.1);
        assert!((w.obstacles[0].center.y - 0.1).abs() < 1e-15);
    }

    #[test]
    fn looping_and_halting() {
        let wps = vec![Vec2::new(0.0, 0.0), Vec2::new(0.1, 0.0)];
        let mut looped = with_origin_obstacles(vec![Obstacle::pedestrian(0.1, wps.clone(), 1.0, true)]);
        let mut once = with_origin_obstacles(vec![Obstacle::pedestrian(0.1, wps, 1.0, false)]);
        looped.advance(0.1);
        once.advance(0.1);
        assert_eq!(looped.obstacles[0].target, 0);
        assert!(once.obstacles[0].halted);
        once.advance(0.1);
        assert_eq!(once.obstacles[0].center, Vec2::new(0.1, 0.0));
        looped.advance(0.1);
        assert_eq!(looped.obstacles[0].center, Vec2::new(0.0, 0.0));
    }

    #[test]
    fn collision_rules() {
        let w = with_origin_obstacles(vec![Obstacle::circle(Vec2::new(51.5, 50.0), 0.3)]);
        // at the obstacle center
        assert!(check_collision(&RobotState::at_rest(51.5, 50.0, 0.0), &w));
        // touching: gap 0.5 = 0.2 + 0.3
        assert!(check_collision(&RobotState::at_rest(51.0, 50.0, 0.0), &w));
        // clear by 1.0
        assert!(!check_collision(&RobotState::at_rest(51.5 - 1.5, 50.0, 0.0), &w));
    }

    #[test]
    fn rectangle_and_wall_collisions() {
        let w = with_origin_obstacles(vec![Obstacle::rect(Vec2::new(60.0, 40.0), Vec2::new(62.0, 60.0))]);
        assert!(check_collision(&RobotState::at_rest(59.85, 50.0, 0.0), &w));
        assert!(!check_collision(&RobotState::at_rest(59.7, 50.0, 0.0), &w));
        assert!(check_collision(&RobotState::at_rest(0.2, 50.0, 0.0), &w));
        assert!(check_collision(&RobotState::at_rest(50.0, 99.9, 0.0), &w));
        assert!(!check_collision(&RobotState::at_rest(0.25, 50.0, 0.0), &w));
    }

    #[test]
    fn goal_tests() {
        let mut spec = WorldSpec::empty(10.0, 10.0, RobotState::at_rest(1.0, 1.0, 0.0), Vec2::new(3.0, 4.0));
        spec.goal_radius = 0.5;
        assert!(goal_reached(&RobotState::at_rest(3.0, 4.0, 0.0), &spec));
        assert!(goal_reached(&RobotState::at_rest(3.0, 3.5, 0.0), &spec));
        spec.goal = Vec2::new(3.0, 4.0);
        let origin = RobotState::at_rest(0.0, 0.0, 0.0);
        assert!(!goal_reached(&origin, &spec));
    }

    #[test]
    fn validation_catches_bad_worlds() {
        let mut spec = big_world();
        spec.obstacles.push(Obstacle::circle(Vec2::new(50.0, 50.0), 1.0));
        assert!(World::new(spec).is_err());

        let mut spec = big_world();
        spec.obstacles
            .push(Obstacle::pedestrian(0.3, vec![Vec2::new(1.0, 1.0)], 1.0, true));
        assert!(World::new(spec).is_err());

        let mut spec = big_world();
        spec.obstacles.push(Obstacle::rect(Vec2::new(2.0, 1.0), Vec2::new(1.0, 2.0)));
        assert!(World::new(spec).is_err());

        let mut spec = big_world();
        spec.dt = 0.0;
        assert!(World::new(spec).is_err());

        let mut spec = big_world();
        spec.goal = Vec2::new(150.0, 1.0);
        assert!(World::new(spec).is_err());

        assert!(World::new(big_world()).is_ok());
    }

    #[test]
    fn spec_json_round_trip() {
        let mut spec = big_world();
        spec.obstacles.push(Obstacle::circle(Vec2::new(10.0, 10.0), 1.0));
        spec.obstacles
            .push(Obstacle::rect(Vec2::new(20.0, 20.0), Vec2::new(21.0, 22.0)));
        spec.obstacles.push(Obstacle::pedestrian(
            0.3,
            vec![Vec2::new(30.0, 30.0), Vec2::new(31.0, 30.0)],
            0.5,
            true,
        ));
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"loop\":true"));
        let back: WorldSpec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<WorldSpec<f64>>(&text.replace("\"goal_radius\"", "\"goal_radiux\"")).is_err());
    }

    fn polyline_distance(p: Vec2<f64>, wps: &[Vec2<f64>], looped: bool) -> f64 {
        let mut segs: Vec<(Vec2<f64>, Vec2<f64>)> = wps.windows(2).map(|w| (w[0], w[1])).collect();
        if looped {
            segs.push((*wps.last().unwrap(), wps[0]));
        }
        segs.iter()
            .map(|&(a, b)| {
                let ab = b - a;
                let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
                p.distance(a + ab * t)
            })
            .fold(f64::INFINITY, f64::min)
    }

    proptest! {
        #[test]
        fn theta_stays_normalized(cmds in prop::collection::vec((0.0f64..1.2, -1.57f64..1.57), 1..200)) {
            let mut s = RobotState::at_rest(0.0, 0.0, 0.0);
            for (v, w) in cmds {
                s = step_kinematics(&s, &VelocityCommand::new(v, w * 10.0), 0.1).unwrap();
                prop_assert!(s.theta > -PI && s.theta <= PI);
            }
        }

        #[test]
        fn kinematics_is_deterministic(cmds in prop::collection::vec((0.0f64..1.2, -1.57f64..1.57), 1..50)) {
            let run = || {
                let mut s = RobotState::at_rest(1.0, 2.0, 0.3);
                let mut out = Vec::new();
                for &(v, w) in &cmds {
                    s = step_kinematics(&s, &VelocityCommand::new(v, w), 0.1).unwrap();
                    out.push((s.x.to_bits(), s.y.to_bits(), s.theta.to_bits()));
                }
                out
            };
            prop_assert_eq!(run(), run());
        }

        #[test]
        fn zero_command_fixpoint(x in 1.0f64..99.0, y in 1.0f64..99.0, th in -3.0f64..3.0, n in 1usize..100) {
            let w = with_origin_obstacles(vec![Obstacle::circle(Vec2::new(50.0, 50.0), 3.0)]);
            let mut s = RobotState::at_rest(x, y, th);
            let was = check_collision(&s, &w);
            for _ in 0..n {
                s = step_kinematics(&s, &VelocityCommand::new(0.0, 0.0), 0.1).unwrap();
            }
            prop_assert_eq!((s.x, s.y, s.theta), (x, y, normalize_angle(th)));
            prop_assert_eq!(check_collision(&s, &w), was);
        }

        #[test]
        fn pedestrian_stays_on_polyline(
            pts in prop::collection::vec((0.0f64..20.0, 0.0f64..20.0), 2..6),
            speed in 0.1f64..3.0,
            looped: bool,
            steps in 1usize..400,
        ) {
            let wps: Vec<Vec2<f64>> = pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
            let mut w = with_origin_obstacles(vec![Obstacle::pedestrian(0.2, wps.clone(), speed, looped)]);
            for _ in 0..steps {
                w.advance(0.1);
                let d = polyline_distance(w.obstacles[0].center, &wps, looped);
                prop_assert!(d <= 1e-9, "off polyline by {}", d);
            }
        }
    }
}
