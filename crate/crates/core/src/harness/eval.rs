//! Closed-loop evaluation of one or more planners over paired trials.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dwa::{plan_dwa, PlanSource};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::harness::env::{choose_start, phased_world, start_cells, Episode, Termination};
use crate::harness::rng::{stream, Purpose};
use crate::harness::scenario::ScenarioFile;
use crate::harness::train::load_checkpoint;
use crate::hybrid::{observation_len, plan_hybrid, Outcome};
use crate::lidar::cast_scan;
use crate::nn::Mlp;
use crate::world::goal_reached;

pub const LOG_VERSION: u32 = 1;
pub const METRICS_FILE: &str = "metrics.csv";
pub const TRIALS_FILE: &str = "trials.csv";
pub const LOG_DIR: &str = "logs";

// Keeps evaluation draws apart from the training start-pose blocks.
const TRIAL_STREAM_OFFSET: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlannerKind {
    Dwa,
    Td3Dwa,
}

impl PlannerKind {
    /// Name used in tables.
    pub fn label(&self) -> &'static str {
        match self {
            PlannerKind::Dwa => "DWA",
            PlannerKind::Td3Dwa => "TD3-DWA",
        }
    }

    /// Name used on the command line and in file names.
    pub fn slug(&self) -> &'static str {
        match self {
            PlannerKind::Dwa => "dwa",
            PlannerKind::Td3Dwa => "td3-dwa",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dwa" => Ok(PlannerKind::Dwa),
            "td3-dwa" | "td3dwa" | "td3_dwa" => Ok(PlannerKind::Td3Dwa),
            _ => Err(Error::InvalidConfig(format!(
                "unknown planner `{s}` (expected dwa or td3-dwa)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Planner {
    Dwa,
    Td3Dwa { actor: Mlp<f64> },
}

impl Planner {
    pub fn kind(&self) -> PlannerKind {
        match self {
            Planner::Dwa => PlannerKind::Dwa,
            Planner::Td3Dwa { .. } => PlannerKind::Td3Dwa,
        }
    }

    /// Builds a planner, reading the actor from `checkpoint` when needed.
    pub fn load(kind: PlannerKind, checkpoint: Option<&Path>, scenario: &ScenarioFile) -> Result<Self> {
        match kind {
            PlannerKind::Dwa => Ok(Planner::Dwa),
            PlannerKind::Td3Dwa => {
                let path = checkpoint.ok_or_else(|| Error::MissingCheckpoint("td3-dwa needs --checkpoint".into()))?;
                let (agent, _) = load_checkpoint(path)?.restore()?;
                Self::with_actor(agent.actor, scenario)
            }
        }
    }

    pub fn with_actor(actor: Mlp<f64>, scenario: &ScenarioFile) -> Result<Self> {
        let expected = observation_len(scenario.sensor.n_beams);
        if actor.input_dim() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                got: actor.input_dim(),
            });
        }
        if actor.output_dim() != 2 {
            return Err(Error::ShapeMismatch {
                expected: 2,
                got: actor.output_dim(),
            });
        }
        Ok(Planner::Td3Dwa { actor })
    }
}

/// One row of a trajectory log. `source` names the planner branch that
/// produced the command leading to this pose; the first row is `start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
    pub min_scan: f64,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialLog {
    pub schema_version: u32,
    pub scenario: String,
    pub planner: String,
    pub seed: u64,
    pub trial: usize,
    pub dt: f64,
    pub outcome: Termination,
    pub rows: Vec<LogRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub planner: String,
    pub trial: usize,
    pub outcome: Termination,
    pub steps: usize,
    pub time_s: f64,
    pub path_length_m: f64,
    pub start_x: f64,
    pub start_y: f64,
    pub start_theta: f64,
    /// Steps on which the policy's command was executed.
    pub policy_steps: usize,
}

/// Aggregate over trials, in table column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub planner: String,
    pub collisions: usize,
    pub trials: usize,
    /// Mean simulated seconds over successful trials.
    pub avg_time_s: Option<f64>,
    pub avg_path_length_m: Option<f64>,
    pub successes: usize,
    pub timeouts: usize,
}

impl TrialMetrics {
    pub fn from_trials(planner: &str, trials: &[TrialRecord]) -> Self {
        let count = |t: Termination| trials.iter().filter(|r| r.outcome == t).count();
        let ok: Vec<&TrialRecord> = trials.iter().filter(|r| r.outcome == Termination::Goal).collect();
        let mean = |f: fn(&TrialRecord) -> f64| (!ok.is_empty()).then(|| ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64);
        TrialMetrics {
            planner: planner.to_string(),
            collisions: count(Termination::Collision),
            trials: trials.len(),
            avg_time_s: mean(|r| r.time_s),
            avg_path_length_m: mean(|r| r.path_length_m),
            successes: ok.len(),
            timeouts: count(Termination::Timeout),
        }
    }

    /// Console form, e.g. `TD3-DWA, 2/100, 11.6, 11.6`.
    pub fn report_row(&self) -> String {
        let f = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"));
        format!(
            "{}, {}/{}, {}, {}",
            self.planner,
            self.collisions,
            self.trials,
            f(self.avg_time_s),
            f(self.avg_path_length_m)
        )
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub kind: PlannerKind,
    pub metrics: TrialMetrics,
    pub trials: Vec<TrialRecord>,
    pub logs: Vec<TrialLog>,
}

/// Runs trial `trial` of `planner`. The start pose and obstacle phase
/// depend only on `(seed, trial)`.
pub fn run_trial(
    planner: &Planner,
    scenario: &ScenarioFile,
    cells: &[Vec2<f64>],
    seed: u64,
    trial: usize,
) -> Result<(TrialRecord, TrialLog)> {
    let spec = Arc::new(scenario.world.clone());
    let sensor = &scenario.sensor;
    let index = TRIAL_STREAM_OFFSET + trial as u64;
    let start = choose_start(scenario, cells, &mut stream(seed, Purpose::StartPose, index))?;
    let world = phased_world(
        &spec,
        &start,
        &scenario.training,
        &mut stream(seed, Purpose::ObstaclePhase, index),
    );
    let mut ep = Episode::new(world, start);
    let dt = spec.dt;

    let mut scan = cast_scan(&ep.state, &ep.world, sensor);
    let mut rows = vec![LogRow {
        t: 0.0,
        x: start.x,
        y: start.y,
        theta: start.theta,
        v: start.v,
        omega: start.omega,
        min_scan: scan.min_range(),
        source: "start".into(),
    }];
    let mut path = 0.0;
    let mut policy_steps = 0;
    let mut outcome = if goal_reached(&start, &spec) {
        Termination::Goal
    } else {
        Termination::Timeout
    };
    while outcome == Termination::Timeout && ep.steps < scenario.training.max_steps {
        let (command, source) = match planner {
            Planner::Dwa => {
                let p = plan_dwa(&ep.state, &ep.world, &scenario.dwa);
                (p.command, p.source)
            }
            Planner::Td3Dwa { actor } => {
                let p = plan_hybrid(&ep.state, &ep.world, &scan, actor, sensor, &scenario.dwa)?;
                (p.command, p.source)
            }
        };
        if source == PlanSource::Policy {
            policy_steps += 1;
        }
        let step = ep.step(&command)?;
        path += command.v * dt;
        scan = cast_scan(&ep.state, &ep.world, sensor);
        rows.push(LogRow {
            t: ep.steps as f64 * dt,
            x: ep.state.x,
            y: ep.state.y,
            theta: ep.state.theta,
            v: ep.state.v,
            omega: ep.state.omega,
            min_scan: scan.min_range(),
            source: source.as_str().into(),
        });
        outcome = match step {
            Outcome::Collision => Termination::Collision,
            Outcome::Goal => Termination::Goal,
            Outcome::Ongoing => Termination::Timeout,
        };
    }
    let kind = planner.kind();
    let record = TrialRecord {
        planner: kind.label().into(),
        trial,
        outcome,
        steps: ep.steps,
        time_s: ep.steps as f64 * dt,
        path_length_m: path,
        start_x: start.x,
        start_y: start.y,
        start_theta: start.theta,
        policy_steps,
    };
    let log = TrialLog {
        schema_version: LOG_VERSION,
        scenario: scenario.name.clone(),
        planner: kind.slug().into(),
        seed,
        trial,
        dt,
        outcome,
        rows,
    };
    Ok((record, log))
}

pub fn evaluate(planner: &Planner, scenario: &ScenarioFile, n_trials: usize, seed: u64) -> Result<Evaluation> {
    if n_trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    scenario.validate()?;
    let cells = start_cells(&scenario.world, &scenario.training);
    let mut trials = Vec::with_capacity(n_trials);
    let mut logs = Vec::with_capacity(n_trials);
    for i in 0..n_trials {
        let (rec, log) = run_trial(planner, scenario, &cells, seed, i)?;
        trials.push(rec);
        logs.push(log);
    }
    let kind = planner.kind();
    Ok(Evaluation {
        kind,
        metrics: TrialMetrics::from_trials(kind.label(), &trials),
        trials,
        logs,
    })
}

/// Evaluates every planner on the same trial seeds.
pub fn compare(planners: &[Planner], scenario: &ScenarioFile, n_trials: usize, seed: u64) -> Result<Vec<Evaluation>> {
    if planners.len() < 2 {
        return Err(Error::InvalidConfig("compare needs at least two planners".into()));
    }
    planners.iter().map(|p| evaluate(p, scenario, n_trials, seed)).collect()
}

/// Writes the metrics table, per-trial table and trajectory logs. Logs of
/// repeated planners are suffixed with their position.
pub fn write_evaluations(evals: &[Evaluation], out_dir: &Path, metrics_file: &str) -> Result<()> {
    let log_dir = out_dir.join(LOG_DIR);
    fs::create_dir_all(&log_dir).map_err(|e| Error::io(&log_dir, e))?;

    let path = out_dir.join(metrics_file);
    let mut w = csv::Writer::from_path(&path)?;
    for e in evals {
        w.serialize(&e.metrics)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = out_dir.join(TRIALS_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    for e in evals {
        for t in &e.trials {
            w.serialize(t)?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    for (k, e) in evals.iter().enumerate() {
        let tag = if evals[..k].iter().any(|o| o.kind == e.kind) {
            format!("{}-{k}", e.kind.slug())
        } else {
            e.kind.slug().to_string()
        };
        for log in &e.logs {
            let path = log_dir.join(format!("{tag}_trial_{:04}.json", log.trial));
            fs::write(&path, serde_json::to_string(log)?).map_err(|err| Error::io(&path, err))?;
        }
    }
    Ok(())
}
