//! Deterministic 2D navigation workbench.
//!
//! A unicycle robot with a ray-cast range sensor moves among static and
//! waypoint-following obstacles. Three local planners are provided: the
//! dynamic window approach, a TD3 actor, and a fused planner in which the
//! actor's command competes inside the DWA candidate set. The [`harness`]
//! module drives seeded training, paired evaluation and trajectory logging.
//!
//! Everything except the harness is generic over [`Real`] (`f32` or `f64`);
//! the aliases below name the common instantiations.

pub mod dwa;
pub mod error;
pub mod geom;
pub mod harness;
pub mod hybrid;
pub mod lidar;
pub mod nn;
pub mod replay;
pub mod scalar;
pub mod td3;
pub mod world;

pub use dwa::{compute_window, plan_dwa, CostWeights, DwaConfig, DynamicWindow, Plan, PlanSource, TrajectoryRollout};
pub use error::{Error, Result};
pub use geom::Vec2;
pub use hybrid::{build_observation, compute_reward, plan_hybrid, HybridPlan, Observation, RewardConfig};
pub use lidar::{cast_scan, LidarScan, SensorConfig};
pub use nn::{Activation, Adam, Mlp};
pub use replay::{ReplayBuffer, Transition};
pub use scalar::Real;
pub use td3::{EpsilonState, Td3Agent, Td3Checkpoint, Td3Config};
pub use world::{check_collision, step_kinematics, Limits, Obstacle, RobotState, VelocityCommand, World, WorldSpec};

pub type Vec2F64 = Vec2<f64>;
pub type Vec2F32 = Vec2<f32>;
pub type RobotStateF64 = RobotState<f64>;
pub type RobotStateF32 = RobotState<f32>;
pub type WorldSpecF64 = WorldSpec<f64>;
pub type WorldSpecF32 = WorldSpec<f32>;
pub type WorldF64 = World<f64>;
pub type WorldF32 = World<f32>;
pub type MlpF64 = Mlp<f64>;
pub type MlpF32 = Mlp<f32>;
pub type Td3AgentF64 = Td3Agent<f64>;
pub type Td3AgentF32 = Td3Agent<f32>;
pub type DwaConfigF64 = DwaConfig<f64>;
pub type DwaConfigF32 = DwaConfig<f32>;
