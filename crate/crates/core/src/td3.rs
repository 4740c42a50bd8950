//! Twin-critic, delayed-actor deterministic policy gradient learner with an
//! epsilon-greedy exploration schedule.
//!
//! Actions live in `[-1, 1]^act_dim`; mapping them to physical commands is
//! the caller's job.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::nn::{soft_update, Activation, Adam, Mlp, MlpRecord};
use crate::replay::{ReplayBuffer, Transition};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Td3Config<T> {
    /// Discount factor.
    pub gamma_d: T,
    pub tau: T,
    pub policy_delay: usize,
    pub smoothing_sigma: T,
    pub smoothing_clip: T,
    pub explore_sigma: T,
    pub batch_size: usize,
    pub lr_actor: T,
    pub lr_critic: T,
    pub eps0: T,
    pub eps_decay: T,
    pub eps_min: T,
    pub buffer_capacity: usize,
    /// Hidden layer widths shared by actor and critics.
    pub hidden: Vec<usize>,
}

impl<T: Real> Default for Td3Config<T> {
    fn default() -> Self {
        Td3Config {
            gamma_d: T::lit(0.99),
            tau: T::lit(0.005),
            policy_delay: 2,
            smoothing_sigma: T::lit(0.2),
            smoothing_clip: T::lit(0.5),
            explore_sigma: T::lit(0.1),
            batch_size: 128,
            lr_actor: T::lit(3e-4),
            lr_critic: T::lit(3e-4),
            eps0: T::one(),
            eps_decay: T::lit(0.992),
            eps_min: T::lit(0.05),
            buffer_capacity: 100_000,
            hidden: vec![64, 64],
        }
    }
}

impl<T: Real> Td3Config<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("td3: {m}")));
        if !(self.gamma_d >= T::zero() && self.gamma_d < T::one()) {
            return bad("gamma_d must lie in [0, 1)");
        }
        if !(self.tau > T::zero() && self.tau <= T::one()) {
            return bad("tau must lie in (0, 1]");
        }
        if self.policy_delay < 1 {
            return bad("policy_delay must be >= 1");
        }
        if self.batch_size < 1 || self.buffer_capacity < 1 {
            return bad("batch_size and buffer_capacity must be >= 1");
        }
        if !(self.smoothing_sigma >= T::zero() && self.smoothing_clip >= T::zero() && self.explore_sigma >= T::zero()) {
            return bad("noise scales must be >= 0");
        }
        if !(self.lr_actor > T::zero() && self.lr_critic > T::zero()) {
            return bad("learning rates must be > 0");
        }
        if !(self.eps_min >= T::zero() && self.eps_min <= self.eps0 && self.eps0 <= T::one()) {
            return bad("need 0 <= eps_min <= eps0 <= 1");
        }
        if !(self.eps_decay > T::zero() && self.eps_decay <= T::one()) {
            return bad("eps_decay must lie in (0, 1]");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        Ok(())
    }
}

/// Probability of taking a uniformly random action.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct EpsilonState<T> {
    pub current: T,
}

impl<T: Real> EpsilonState<T> {
    pub fn new(config: &Td3Config<T>) -> Self {
        EpsilonState { current: config.eps0 }
    }
}

pub fn decay_epsilon<T: Real>(eps: EpsilonState<T>, config: &Td3Config<T>) -> EpsilonState<T> {
    EpsilonState {
        current: (eps.current * config.eps_decay).max(config.eps_min),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateDiagnostics<T> {
    /// Mean squared TD error of each critic before its gradient step.
    pub critic1_loss: T,
    pub critic2_loss: T,
    /// `-mean Q1(s, actor(s))`, present on delayed actor updates.
    pub actor_loss: Option<T>,
}

#[derive(Clone, Debug)]
pub struct Td3Agent<T> {
    pub config: Td3Config<T>,
    pub actor: Mlp<T>,
    pub critic1: Mlp<T>,
    pub critic2: Mlp<T>,
    pub actor_target: Mlp<T>,
    pub critic1_target: Mlp<T>,
    pub critic2_target: Mlp<T>,
    actor_opt: Adam<T>,
    critic1_opt: Adam<T>,
    critic2_opt: Adam<T>,
    critic_updates: u64,
    actor_updates: u64,
}

fn concat<T: Copy>(a: &[T], b: &[T]) -> Vec<T> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

fn clip<T: Real>(x: T, bound: T) -> T {
    x.max(-bound).min(bound)
}

impl<T: Real> Td3Agent<T> {
    /// Fresh agent; targets start as exact copies of their online networks.
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, config: Td3Config<T>, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let actor_sizes: Vec<usize> = std::iter::once(obs_dim)
            .chain(config.hidden.iter().copied())
            .chain(std::iter::once(act_dim))
            .collect();
        let critic_sizes: Vec<usize> = std::iter::once(obs_dim + act_dim)
            .chain(config.hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        let actor = Mlp::random(&actor_sizes, Activation::Relu, Activation::Tanh, rng)?;
        let critic1 = Mlp::random(&critic_sizes, Activation::Relu, Activation::Identity, rng)?;
        let critic2 = Mlp::random(&critic_sizes, Activation::Relu, Activation::Identity, rng)?;
        Self::from_networks(config, actor, critic1, critic2)
    }

    pub fn from_networks(config: Td3Config<T>, actor: Mlp<T>, critic1: Mlp<T>, critic2: Mlp<T>) -> Result<Self> {
        let (a, c1, c2) = (actor.clone(), critic1.clone(), critic2.clone());
        Self::with_targets(config, actor, critic1, critic2, a, c1, c2)
    }

    pub fn with_targets(
        config: Td3Config<T>,
        actor: Mlp<T>,
        critic1: Mlp<T>,
        critic2: Mlp<T>,
        actor_target: Mlp<T>,
        critic1_target: Mlp<T>,
        critic2_target: Mlp<T>,
    ) -> Result<Self> {
        config.validate()?;
        let critic_in = actor.input_dim() + actor.output_dim();
        for c in [&critic1, &critic2, &critic1_target, &critic2_target] {
            ensure_len(critic_in, c.input_dim())?;
            ensure_len(1, c.output_dim())?;
        }
        if actor_target.layer_sizes() != actor.layer_sizes()
            || critic1_target.layer_sizes() != critic1.layer_sizes()
            || critic2_target.layer_sizes() != critic2.layer_sizes()
        {
            return Err(Error::InvalidConfig(
                "target networks must mirror their online networks".into(),
            ));
        }
        Ok(Td3Agent {
            actor_opt: Adam::new(&actor, config.lr_actor),
            critic1_opt: Adam::new(&critic1, config.lr_critic),
            critic2_opt: Adam::new(&critic2, config.lr_critic),
            config,
            actor,
            critic1,
            critic2,
            actor_target,
            critic1_target,
            critic2_target,
            critic_updates: 0,
            actor_updates: 0,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.actor.output_dim()
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    pub fn actor_updates(&self) -> u64 {
        self.actor_updates
    }

    /// With `explore`, a uniform action with probability `eps`, otherwise the
    /// actor output plus Gaussian noise; without it, the bare actor output.
    pub fn select_action<R: Rng + ?Sized>(&self, obs: &[T], eps: &EpsilonState<T>, rng: &mut R, explore: bool) -> Result<Vec<T>> {
        if explore && T::lit(rng.random::<f64>()) < eps.current {
            return Ok((0..self.act_dim()).map(|_| T::lit(rng.random_range(-1.0..=1.0))).collect());
        }
        let mut a = self.actor.predict(obs)?;
        if explore {
            for x in &mut a {
                let n: f64 = rng.sample(StandardNormal);
                *x = *x + self.config.explore_sigma * T::lit(n);
            }
        }
        Ok(a.into_iter().map(|x| clip(x, T::one())).collect())
    }

    /// Clipped Gaussian target-smoothing noise, one row per transition.
    pub fn smoothing_noise<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<T>> {
        let (sigma, c) = (self.config.smoothing_sigma, self.config.smoothing_clip);
        (0..n)
            .map(|_| {
                (0..self.act_dim())
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        clip(sigma * T::lit(z), c)
                    })
                    .collect()
            })
            .collect()
    }

    /// Target-network values `(Q1', Q2')` at the smoothed next action.
    pub fn target_q_values(&self, batch: &[&Transition<T>], noise: &[Vec<T>]) -> Result<Vec<(T, T)>> {
        ensure_len(batch.len(), noise.len())?;
        batch
            .iter()
            .zip(noise)
            .map(|(t, eps)| {
                let mut a = self.actor_target.predict(&t.s_next)?;
                ensure_len(a.len(), eps.len())?;
                for (x, &e) in a.iter_mut().zip(eps) {
                    *x = clip(*x + e, T::one());
                }
                let input = concat(&t.s_next, &a);
                Ok((
                    self.critic1_target.predict(&input)?[0],
                    self.critic2_target.predict(&input)?[0],
                ))
            })
            .collect()
    }

    /// `y = r + gamma (1 - done) min(Q1', Q2')` with a given noise draw.
    pub fn td_targets_with_noise(&self, batch: &[&Transition<T>], noise: &[Vec<T>]) -> Result<Vec<T>> {
        let q = self.target_q_values(batch, noise)?;
        Ok(batch
            .iter()
            .zip(q)
            .map(
                |(t, (q1, q2))| {
                    if t.done {
                        t.r
                    } else {
                        t.r + self.config.gamma_d * q1.min(q2)
                    }
                },
            )
            .collect())
    }

    pub fn compute_td_target<R: Rng + ?Sized>(&self, batch: &[&Transition<T>], rng: &mut R) -> Result<Vec<T>> {
        let noise = self.smoothing_noise(batch.len(), rng);
        self.td_targets_with_noise(batch, &noise)
    }

    /// Mean squared error of each critic against `targets`.
    pub fn critic_losses(&self, batch: &[&Transition<T>], targets: &[T]) -> Result<(T, T)> {
        ensure_len(batch.len(), targets.len())?;
        let n = T::lit(batch.len() as f64);
        let mut l = (T::zero(), T::zero());
        for (t, &y) in batch.iter().zip(targets) {
            let input = concat(&t.s, &t.a);
            let d1 = self.critic1.predict(&input)?[0] - y;
            let d2 = self.critic2.predict(&input)?[0] - y;
            l.0 = l.0 + d1 * d1;
            l.1 = l.1 + d2 * d2;
        }
        Ok((l.0 / n, l.1 / n))
    }

    /// One Adam step of both critics on the MSE toward `targets`. Returns
    /// the losses before the step.
    pub fn update_critics(&mut self, batch: &[&Transition<T>], targets: &[T]) -> Result<(T, T)> {
        ensure_len(batch.len(), targets.len())?;
        let n = T::lit(batch.len() as f64);
        let two_over_n = T::lit(2.0) / n;
        let mut g1 = self.critic1.zero_gradients();
        let mut g2 = self.critic2.zero_gradients();
        let mut loss = (T::zero(), T::zero());
        for (t, &y) in batch.iter().zip(targets) {
            let input = concat(&t.s, &t.a);
            let (q1, c1) = self.critic1.forward(&input)?;
            let (q2, c2) = self.critic2.forward(&input)?;
            let (d1, d2) = (q1[0] - y, q2[0] - y);
            loss.0 = loss.0 + d1 * d1;
            loss.1 = loss.1 + d2 * d2;
            self.critic1.backward_into(&c1, &[two_over_n * d1], Some(&mut g1))?;
            self.critic2.backward_into(&c2, &[two_over_n * d2], Some(&mut g2))?;
        }
        self.critic1_opt.step(&mut self.critic1, &g1)?;
        self.critic2_opt.step(&mut self.critic2, &g2)?;
        Ok((loss.0 / n, loss.1 / n))
    }

    /// One Adam step of the actor ascending `Q1(s, actor(s))`. Returns the
    /// loss `-mean Q1` before the step.
    pub fn update_actor(&mut self, batch: &[&Transition<T>]) -> Result<T> {
        let n = T::lit(batch.len() as f64);
        let obs_dim = self.obs_dim();
        let mut g = self.actor.zero_gradients();
        let mut total_q = T::zero();
        let dq = [-T::one() / n];
        for t in batch {
            let (a, ca) = self.actor.forward(&t.s)?;
            let (q, cq) = self.critic1.forward(&concat(&t.s, &a))?;
            total_q = total_q + q[0];
            let grad_in = self.critic1.backward_into(&cq, &dq, None)?;
            self.actor.backward_into(&ca, &grad_in[obs_dim..], Some(&mut g))?;
        }
        self.actor_opt.step(&mut self.actor, &g)?;
        Ok(-total_q / n)
    }

    pub fn soft_update_targets(&mut self) -> Result<()> {
        let tau = self.config.tau;
        soft_update(&mut self.actor_target, &self.actor, tau)?;
        soft_update(&mut self.critic1_target, &self.critic1, tau)?;
        soft_update(&mut self.critic2_target, &self.critic2, tau)
    }

    /// Critic regression every call; actor ascent plus target averaging on
    /// every `policy_delay`-th call. `Ok(None)` while the buffer holds fewer
    /// than `batch_size` transitions.
    pub fn update_step<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer<T>,
        rng: &mut R,
    ) -> Result<Option<UpdateDiagnostics<T>>> {
        if buffer.len() < self.config.batch_size {
            return Ok(None);
        }
        let batch = buffer.sample(self.config.batch_size, rng);
        let targets = self.compute_td_target(&batch, rng)?;
        let (critic1_loss, critic2_loss) = self.update_critics(&batch, &targets)?;
        self.critic_updates += 1;
        let mut actor_loss = None;
        if self.critic_updates.is_multiple_of(self.config.policy_delay as u64) {
            actor_loss = Some(self.update_actor(&batch)?);
            self.soft_update_targets()?;
            self.actor_updates += 1;
        }
        Ok(Some(UpdateDiagnostics {
            critic1_loss,
            critic2_loss,
            actor_loss,
        }))
    }
}

/// Networks and schedule state persisted between training and evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Td3Checkpoint<T> {
    pub schema_version: u32,
    pub config: Td3Config<T>,
    pub epsilon: EpsilonState<T>,
    pub critic_updates: u64,
    pub actor_updates: u64,
    pub actor: MlpRecord<T>,
    pub critic1: MlpRecord<T>,
    pub critic2: MlpRecord<T>,
    pub actor_target: MlpRecord<T>,
    pub critic1_target: MlpRecord<T>,
    pub critic2_target: MlpRecord<T>,
}

pub const CHECKPOINT_VERSION: u32 = 1;

impl<T: Real> Td3Checkpoint<T> {
    pub fn capture(agent: &Td3Agent<T>, epsilon: EpsilonState<T>) -> Self {
        Td3Checkpoint {
            schema_version: CHECKPOINT_VERSION,
            config: agent.config.clone(),
            epsilon,
            critic_updates: agent.critic_updates,
            actor_updates: agent.actor_updates,
            actor: (&agent.actor).into(),
            critic1: (&agent.critic1).into(),
            critic2: (&agent.critic2).into(),
            actor_target: (&agent.actor_target).into(),
            critic1_target: (&agent.critic1_target).into(),
            critic2_target: (&agent.critic2_target).into(),
        }
    }

    /// Rebuilds the agent (fresh optimizer moments) and its epsilon state.
    pub fn restore(self) -> Result<(Td3Agent<T>, EpsilonState<T>)> {
        if self.schema_version != CHECKPOINT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                self.schema_version
            )));
        }
        let mut agent = Td3Agent::with_targets(
            self.config,
            self.actor.try_into()?,
            self.critic1.try_into()?,
            self.critic2.try_into()?,
            self.actor_target.try_into()?,
            self.critic1_target.try_into()?,
            self.critic2_target.try_into()?,
        )?;
        agent.critic_updates = self.critic_updates;
        agent.actor_updates = self.actor_updates;
        Ok((agent, self.epsilon))
    }
}
