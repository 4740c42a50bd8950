//! Planar ray-cast range sensor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ray_circle, ray_segment, rect_edges, Vec2};
use crate::scalar::Real;
use crate::world::{Body, RobotState, World};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SensorConfig<T> {
    pub n_beams: usize,
    /// Total field of view, centered on the robot heading.
    pub fov: T,
    pub max_range: T,
}

impl<T: Real> Default for SensorConfig<T> {
    fn default() -> Self {
        SensorConfig {
            n_beams: 20,
            fov: T::TAU(),
            max_range: T::lit(5.0),
        }
    }
}

impl<T: Real> SensorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_beams == 0 {
            return Err(Error::InvalidConfig("n_beams must be >= 1".into()));
        }
        if !(self.fov > T::zero() && self.fov <= T::TAU()) {
            return Err(Error::InvalidConfig("fov must lie in (0, 2pi]".into()));
        }
        if !(self.max_range > T::zero() && self.max_range.is_finite()) {
            return Err(Error::InvalidConfig("max_range must be > 0".into()));
        }
        Ok(())
    }

    /// Beam angle relative to the robot heading.
    pub fn beam_offset(&self, i: usize) -> T {
        if self.n_beams == 1 {
            return T::zero();
        }
        let step = self.fov / T::lit((self.n_beams - 1) as f64);
        -self.fov * T::lit(0.5) + T::lit(i as f64) * step
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LidarScan<T> {
    pub ranges: Vec<T>,
}

impl<T: Real> LidarScan<T> {
    pub fn min_range(&self) -> T {
        self.ranges.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Casts every beam from the robot center against obstacles and walls.
pub fn cast_scan<T: Real>(state: &RobotState<T>, world: &World<T>, sensor: &SensorConfig<T>) -> LidarScan<T> {
    let origin = state.position();
    let walls = rect_edges(Vec2::new(T::zero(), T::zero()), world.spec.bounds);
    let bodies: Vec<Body<T>> = world.bodies().collect();
    let ranges = (0..sensor.n_beams)
        .map(|i| {
            let dir = Vec2::from_angle(state.theta + sensor.beam_offset(i));
            let mut best = sensor.max_range;
            for &(a, c) in &walls {
                if let Some(t) = ray_segment(origin, dir, a, c) {
                    best = best.min(t);
                }
            }
            for body in &bodies {
                let hit = match *body {
                    Body::Circle { center, radius } => ray_circle(origin, dir, center, radius),
                    Body::Rect { min, max } => rect_edges(min, max)
                        .iter()
                        .filter_map(|&(a, c)| ray_segment(origin, dir, a, c))
                        .reduce(T::min),
                };
                if let Some(t) = hit {
                    best = best.min(t);
                }
            }
            best.max(T::min_positive_value())
        })
        .collect();
    LidarScan { ranges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Obstacle, WorldSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    // Robot sits at the center of a huge world so walls never enter the scan.
    const C: f64 = 1.0e4;

    fn world(obstacles: Vec<Obstacle<f64>>) -> World<f64> {
        let mut spec = WorldSpec::empty(2.0 * C, 2.0 * C, RobotState::at_rest(C, C, 0.0), Vec2::new(C + 1.0, C));
        spec.obstacles = obstacles;
        World::new_unchecked(Arc::new(spec))
    }

    #[test]
    fn empty_world_reads_max_range() {
        let sensor = SensorConfig::default();
        let scan = cast_scan(&RobotState::at_rest(C, C, 0.3), &world(vec![]), &sensor);
        assert_eq!(scan.ranges.len(), 20);
        assert!(scan.ranges.iter().all(|&r| r == 5.0));
    }

    #[test]
    fn forward_beam_hits_circle() {
        let sensor = SensorConfig {
            n_beams: 1,
            fov: PI,
            max_range: 5.0,
        };
        let w = world(vec![Obstacle::circle(Vec2::new(C + 2.0, C), 0.5)]);
        let scan = cast_scan(&RobotState::at_rest(C, C, 0.0), &w, &sensor);
        assert!((scan.ranges[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn obstacle_behind_is_invisible_to_forward_beam() {
        let sensor = SensorConfig {
            n_beams: 3,
            fov: PI,
            max_range: 5.0,
        };
        let w = world(vec![Obstacle::circle(Vec2::new(C - 2.0, C), 0.5)]);
        let scan = cast_scan(&RobotState::at_rest(C, C, 0.0), &w, &sensor);
        // beam 1 is the forward one
        assert_eq!(sensor.beam_offset(1), 0.0);
        assert_eq!(scan.ranges[1], 5.0);
    }

    #[test]
    fn walls_and_rectangles_are_seen() {
        let mut spec = WorldSpec::empty(10.0, 10.0, RobotState::at_rest(5.0, 5.0, 0.0), Vec2::new(8.0, 8.0));
        spec.obstacles.push(Obstacle::rect(Vec2::new(3.0, 4.0), Vec2::new(4.0, 6.0)));
        let w = World::new(spec).unwrap();
        let sensor = SensorConfig {
            n_beams: 3,
            fov: PI,
            max_range: 20.0,
        };
        let scan = cast_scan(&RobotState::at_rest(5.0, 5.0, 0.0), &w, &sensor);
        // right -> wall y=0, ahead -> wall x=10, left -> wall y=10
        assert!((scan.ranges[0] - 5.0).abs() < 1e-9);
        assert!((scan.ranges[1] - 5.0).abs() < 1e-9);
        assert!((scan.ranges[2] - 5.0).abs() < 1e-9);
        let back = cast_scan(&RobotState::at_rest(5.0, 5.0, PI), &w, &sensor);
        assert!((back.ranges[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn beam_offsets_span_fov() {
        let s = SensorConfig {
            n_beams: 5,
            fov: PI,
            max_range: 1.0,
        };
        assert_eq!(s.beam_offset(0), -PI / 2.0);
        assert_eq!(s.beam_offset(4), PI / 2.0);
        assert!(SensorConfig {
            n_beams: 0,
            fov: PI,
            max_range: 1.0
        }
        .validate()
        .is_err());
        assert!(SensorConfig {
            n_beams: 4,
            fov: 7.0,
            max_range: 1.0
        }
        .validate()
        .is_err());
        assert!(SensorConfig {
            n_beams: 4,
            fov: 1.0,
            max_range: 0.0
        }
        .validate()
        .is_err());
    }

    fn circles() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
        prop::collection::vec((-6.0f64..6.0, -6.0f64..6.0, 0.1f64..1.0), 0..6)
    }

    fn clear_of_origin(c: &[(f64, f64, f64)]) -> bool {
        c.iter().all(|&(x, y, r)| x.hypot(y) > r + 0.05)
    }

    fn to_world(c: &[(f64, f64, f64)], angle: f64) -> World<f64> {
        world(
            c.iter()
                .map(|&(x, y, r)| {
                    let p = Vec2::new(x, y).rotate(angle);
                    Obstacle::circle(Vec2::new(C + p.x, C + p.y), r)
                })
                .collect(),
        )
    }

    proptest! {
        #[test]
        fn rotation_equivariance(obs in circles(), th in -3.0f64..3.0, rot in -3.1f64..3.1) {
            prop_assume!(clear_of_origin(&obs));
            let sensor = SensorConfig::<f64>::default();
            let a = cast_scan(&RobotState::at_rest(C, C, th), &to_world(&obs, 0.0), &sensor);
            let b = cast_scan(&RobotState::at_rest(C, C, th + rot), &to_world(&obs, rot), &sensor);
            for (ra, rb) in a.ranges.iter().zip(&b.ranges) {
                prop_assert!((ra - rb).abs() < 1e-9, "{} vs {}", ra, rb);
            }
        }

        #[test]
        fn adding_obstacle_never_increases_range(obs in circles(), extra in (-6.0f64..6.0, -6.0f64..6.0, 0.1f64..1.0), th in -3.0f64..3.0) {
            let mut all = obs.clone();
            all.push(extra);
            prop_assume!(clear_of_origin(&all));
            let sensor = SensorConfig::<f64>::default();
            let a = cast_scan(&RobotState::at_rest(C, C, th), &to_world(&obs, 0.0), &sensor);
            let b = cast_scan(&RobotState::at_rest(C, C, th), &to_world(&all, 0.0), &sensor);
            for (ra, rb) in a.ranges.iter().zip(&b.ranges) {
                prop_assert!(rb <= ra);
            }
        }

        #[test]
        fn ranges_capped_and_positive(obs in circles(), th in -3.0f64..3.0, n in 1usize..40) {
            prop_assume!(clear_of_origin(&obs));
            let sensor = SensorConfig { n_beams: n, fov: 2.0 * PI, max_range: 4.0 };
            let scan = cast_scan(&RobotState::at_rest(C, C, th), &to_world(&obs, 0.0), &sensor);
            prop_assert_eq!(scan.ranges.len(), n);
            prop_assert!(scan.ranges.iter().all(|&r| r > 0.0 && r <= 4.0));
        }
    }
}
