//! Experiment plumbing: scenario files, seeded training and evaluation,
//! metric tables and trajectory logs.

pub mod env;
pub mod eval;
pub mod rng;
pub mod scenario;
pub mod train;
pub mod trajectory;

pub use env::Termination;
pub use eval::{compare, evaluate, write_evaluations, Evaluation, Planner, PlannerKind, TrialLog, TrialMetrics, TrialRecord};
pub use scenario::{ScenarioFile, TrainingConfig, BUILTIN_SCENARIOS};
pub use train::{load_checkpoint, train, train_agent, CurveRow, TrainOutput};
pub use trajectory::replay;
