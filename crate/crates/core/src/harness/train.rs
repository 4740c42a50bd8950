//! Seeded TD3 training loop.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::env::{choose_start, phased_world, start_cells, Episode, Termination};
use crate::harness::rng::{stream, Purpose};
use crate::harness::scenario::ScenarioFile;
use crate::hybrid::{build_observation, compute_reward, observation_len, scale_action, Outcome};
use crate::lidar::cast_scan;
use crate::replay::{ReplayBuffer, Transition};
use crate::td3::{decay_epsilon, EpsilonState, Td3Agent, Td3Checkpoint};
use crate::world::{goal_reached, RobotState};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const CURVE_FILE: &str = "training_curve.csv";

/// One line of the training curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub episode: usize,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub steps: usize,
    pub outcome: Termination,
    /// Exploration probability in effect during the episode.
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub agent: Td3Agent<f64>,
    pub epsilon: EpsilonState<f64>,
    pub curve: Vec<CurveRow>,
}

impl TrainOutput {
    pub fn checkpoint(&self) -> Td3Checkpoint<f64> {
        Td3Checkpoint::capture(&self.agent, self.epsilon)
    }
}

/// Runs `episodes` training episodes in memory.
pub fn train_agent(scenario: &ScenarioFile, seed: u64, episodes: usize) -> Result<TrainOutput> {
    scenario.validate()?;
    let spec = Arc::new(scenario.world.clone());
    let sensor = &scenario.sensor;
    let training = &scenario.training;
    let td3 = scenario.td3.clone();

    let mut init_rng = stream(seed, Purpose::Init, 0);
    let mut explore_rng = stream(seed, Purpose::Exploration, 0);
    let mut update_rng = stream(seed, Purpose::Smoothing, 0);

    let obs_dim = observation_len(sensor.n_beams);
    let mut agent = Td3Agent::new(obs_dim, 2, td3.clone(), &mut init_rng)?;
    let mut buffer = ReplayBuffer::new(td3.buffer_capacity);
    let mut eps = EpsilonState::new(&td3);
    let cells = start_cells(&spec, training);
    let mut curve = Vec::with_capacity(episodes);
    let mut start: RobotState<f64> = spec.start;

    for episode in 0..episodes {
        if episode % training.pose_reshuffle_every == 0 {
            let block = (episode / training.pose_reshuffle_every) as u64;
            start = if block == 0 {
                spec.start
            } else {
                choose_start(scenario, &cells, &mut stream(seed, Purpose::StartPose, block))?
            };
        }
        let world = phased_world(
            &spec,
            &start,
            training,
            &mut stream(seed, Purpose::ObstaclePhase, episode as u64),
        );
        let mut ep = Episode::new(world, start);
        let mut ret = 0.0;
        let mut termination = Termination::Timeout;
        if goal_reached(&start, &spec) {
            termination = Termination::Goal;
        }
        let mut obs = build_observation(&cast_scan(&ep.state, &ep.world, sensor), &ep.state, &spec, sensor).to_vec();
        while termination == Termination::Timeout && ep.steps < training.max_steps {
            let action = agent.select_action(&obs, &eps, &mut explore_rng, true)?;
            let prev = ep.state;
            let outcome = ep.step(&scale_action(&action, &spec.limits))?;
            let reward = compute_reward(&prev, &ep.state, &spec, outcome, &scenario.reward);
            let next_obs = build_observation(&cast_scan(&ep.state, &ep.world, sensor), &ep.state, &spec, sensor).to_vec();
            let done = outcome != Outcome::Ongoing;
            buffer.push(Transition {
                s: obs,
                a: action,
                r: reward,
                s_next: next_obs.clone(),
                done,
            });
            agent.update_step(&buffer, &mut update_rng)?;
            ret += reward;
            obs = next_obs;
            termination = match outcome {
                Outcome::Collision => Termination::Collision,
                Outcome::Goal => Termination::Goal,
                Outcome::Ongoing => Termination::Timeout,
            };
            if done {
                break;
            }
        }
        curve.push(CurveRow {
            episode,
            episode_return: ret,
            steps: ep.steps,
            outcome: termination,
            epsilon: eps.current,
        });
        eps = decay_epsilon(eps, &td3);
    }
    Ok(TrainOutput {
        agent,
        epsilon: eps,
        curve,
    })
}

/// Trains and writes the checkpoint and training curve into `out_dir`.
pub fn train(scenario: &ScenarioFile, seed: u64, episodes: usize, out_dir: &Path) -> Result<TrainOutput> {
    let output = train_agent(scenario, seed, episodes)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_checkpoint(&output.checkpoint(), &out_dir.join(CHECKPOINT_FILE))?;
    write_curve(&output.curve, &out_dir.join(CURVE_FILE))?;
    Ok(output)
}

pub fn write_curve(rows: &[CurveRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["episode", "return", "steps", "outcome", "epsilon"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_checkpoint(ckpt: &Td3Checkpoint<f64>, path: &Path) -> Result<()> {
    let text = serde_json::to_string(ckpt)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Td3Checkpoint<f64>> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingCheckpoint(path.display().to_string()),
        _ => Error::io(path, e),
    })?;
    Ok(serde_json::from_str(&text)?)
}
