//! Baseline decision makers: a uniform-random agent and tabular Q-learning.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Action, Observation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("learning rate must lie in (0, 1], got {0}")]
    LearningRate(f64),
    #[error("discount must lie in [0, 1), got {0}")]
    Discount(f64),
    #[error("{name} must lie in [0, 1], got {value}")]
    Epsilon { name: &'static str, value: f64 },
    #[error("epsilon decay fraction must lie in (0, 1], got {0}")]
    DecayFraction(f64),
}

/// One environment transition as seen by a learner.
#[derive(Debug, Clone, Copy)]
pub struct Transition<'a> {
    pub observation: &'a Observation,
    pub action: Action,
    pub reward: f64,
    pub next_observation: &'a Observation,
    /// True only when the episode ended in the environment (goal or lava);
    /// a time-limit truncation still bootstraps.
    pub terminal: bool,
}

/// A fixed evaluator. Acting never changes it.
pub trait Policy: Send {
    fn act(&self, observation: &Observation, rng: &mut ChaCha8Rng) -> Action;
}

pub trait Agent: Send {
    fn act(&mut self, observation: &Observation, rng: &mut ChaCha8Rng) -> Action;
    fn observe(&mut self, transition: &Transition<'_>);
    fn begin_episode(&mut self) {}
    /// Called once when training switches to post-novelty episodes.
    fn novelty_injected(&mut self) {}
    fn freeze(&self) -> Box<dyn Policy>;
}

pub fn random_act(rng: &mut ChaCha8Rng) -> Action {
    Action::ALL[rng.random_range(0..Action::COUNT)]
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RandomAgent;

impl Policy for RandomAgent {
    fn act(&self, _: &Observation, rng: &mut ChaCha8Rng) -> Action {
        random_act(rng)
    }
}

impl Agent for RandomAgent {
    fn act(&mut self, _: &Observation, rng: &mut ChaCha8Rng) -> Action {
        random_act(rng)
    }

    fn observe(&mut self, _: &Transition<'_>) {}

    fn freeze(&self) -> Box<dyn Policy> {
        Box::new(RandomAgent)
    }
}

/// Action values keyed by the canonical observation bytes. Under full
/// observability the observation is the state, so the table is exact.
#[derive(Debug, Clone)]
pub struct QTable {
    values: HashMap<Vec<u8>, [f64; Action::COUNT]>,
    pub alpha: f64,
    pub gamma: f64,
}

impl QTable {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self, AgentError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(AgentError::LearningRate(alpha));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(AgentError::Discount(gamma));
        }
        Ok(QTable {
            values: HashMap::new(),
            alpha,
            gamma,
        })
    }

    /// Values for a state; unseen states read as all zeros.
    pub fn values(&self, key: &[u8]) -> [f64; Action::COUNT] {
        self.values
            .get(key)
            .copied()
            .unwrap_or([0.0; Action::COUNT])
    }

    pub fn get(&self, key: &[u8], action: Action) -> f64 {
        self.values(key)[action.index()]
    }

    pub fn set(&mut self, key: &[u8], action: Action, value: f64) {
        self.values
            .entry(key.to_vec())
            .or_insert([0.0; Action::COUNT])[action.index()] = value;
    }

    /// Number of states with a stored entry.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Highest-valued action, ties to the lowest action index.
    pub fn greedy(&self, key: &[u8]) -> Action {
        let v = self.values(key);
        let mut best = 0;
        for i in 1..Action::COUNT {
            if v[i] > v[best] {
                best = i;
            }
        }
        Action::ALL[best]
    }

    /// One-step temporal-difference update of `Q(s, a)`.
    pub fn update(
        &mut self,
        key: &[u8],
        action: Action,
        reward: f64,
        next_key: &[u8],
        terminal: bool,
    ) {
        let bootstrap = if terminal {
            0.0
        } else {
            self.values(next_key)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let q = self.get(key, action);
        let target = reward + self.gamma * bootstrap;
        self.set(key, action, q + self.alpha * (target - q));
    }
}

pub fn q_update(table: &mut QTable, transition: &Transition<'_>) {
    table.update(
        &transition.observation.to_bytes(),
        transition.action,
        transition.reward,
        &transition.next_observation.to_bytes(),
        transition.terminal,
    );
}

pub fn epsilon_greedy_act(
    table: &QTable,
    observation: &Observation,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Action {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        random_act(rng)
    } else {
        table.greedy(&observation.to_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QLearningParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of the training budget over which epsilon decays linearly.
    pub epsilon_decay_fraction: f64,
    /// Epsilon to jump back to when novelty is injected; `None` keeps the
    /// schedule untouched.
    pub epsilon_rewarm: Option<f64>,
    /// Exploration used by frozen evaluators.
    pub eval_epsilon: f64,
}

impl Default for QLearningParams {
    fn default() -> Self {
        QLearningParams {
            alpha: 0.1,
            gamma: 0.95,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.2,
            epsilon_rewarm: Some(0.5),
            eval_epsilon: 0.0,
        }
    }
}

impl QLearningParams {
    pub fn validate(&self) -> Result<(), AgentError> {
        QTable::new(self.alpha, self.gamma)?;
        for (name, value) in [
            ("epsilon_start", self.epsilon_start),
            ("epsilon_end", self.epsilon_end),
            ("eval_epsilon", self.eval_epsilon),
            ("epsilon_rewarm", self.epsilon_rewarm.unwrap_or(0.0)),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(AgentError::Epsilon { name, value });
            }
        }
        if !(self.epsilon_decay_fraction > 0.0 && self.epsilon_decay_fraction <= 1.0) {
            return Err(AgentError::DecayFraction(self.epsilon_decay_fraction));
        }
        Ok(())
    }
}

/// Linear epsilon decay with an optional re-warm. After a re-warm, epsilon
/// decays again at the original slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    start: f64,
    end: f64,
    decay_steps: u64,
    /// (step of the re-warm, value it jumped to)
    anchor: Option<(u64, f64)>,
}

impl EpsilonSchedule {
    pub fn new(start: f64, end: f64, decay_steps: u64) -> Self {
        EpsilonSchedule {
            start,
            end,
            decay_steps: decay_steps.max(1),
            anchor: None,
        }
    }

    pub fn value(&self, step: u64) -> f64 {
        let (from_step, from) = self.anchor.unwrap_or((0, self.start));
        if from <= self.end {
            return from;
        }
        let span = (self.start - self.end).max(f64::EPSILON);
        let elapsed = step.saturating_sub(from_step) as f64;
        // steps needed to decay from `from` down to `end` at the original slope
        let reach = (from - self.end) / span * self.decay_steps as f64;
        if elapsed >= reach {
            return self.end;
        }
        from - span * (elapsed / self.decay_steps as f64)
    }

    pub fn rewarm(&mut self, step: u64, value: f64) {
        self.anchor = Some((step, value));
    }
}

pub struct QLearningAgent {
    table: QTable,
    schedule: EpsilonSchedule,
    params: QLearningParams,
    steps: u64,
}

impl QLearningAgent {
    /// `budget` is the total number of training steps the schedule spans.
    pub fn new(params: QLearningParams, budget: u64) -> Result<Self, AgentError> {
        params.validate()?;
        let decay = (budget as f64 * params.epsilon_decay_fraction).round() as u64;
        Ok(QLearningAgent {
            table: QTable::new(params.alpha, params.gamma)?,
            schedule: EpsilonSchedule::new(params.epsilon_start, params.epsilon_end, decay),
            params,
            steps: 0,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.schedule.value(self.steps)
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
}

impl Agent for QLearningAgent {
    fn act(&mut self, observation: &Observation, rng: &mut ChaCha8Rng) -> Action {
        epsilon_greedy_act(&self.table, observation, self.epsilon(), rng)
    }

    fn observe(&mut self, transition: &Transition<'_>) {
        q_update(&mut self.table, transition);
        self.steps += 1;
    }

    fn novelty_injected(&mut self) {
        if let Some(e) = self.params.epsilon_rewarm {
            self.schedule.rewarm(self.steps, e);
        }
    }

    fn freeze(&self) -> Box<dyn Policy> {
        Box::new(FrozenPolicy {
            table: self.table.clone(),
            epsilon: self.params.eval_epsilon,
        })
    }
}

/// A snapshot of a Q-table acting epsilon-greedily with a fixed epsilon.
#[derive(Debug, Clone)]
pub struct FrozenPolicy {
    table: QTable,
    epsilon: f64,
}

impl Policy for FrozenPolicy {
    fn act(&self, observation: &Observation, rng: &mut ChaCha8Rng) -> Action {
        epsilon_greedy_act(&self.table, observation, self.epsilon, rng)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;

    #[test]
    fn arithmetic_examples() {
        let mut t = QTable::new(0.5, 0.9).unwrap();
        t.update(b"s", Action::Forward, 1.0, b"t", true);
        assert_eq!(t.get(b"s", Action::Forward), 0.5);

        let mut t = QTable::new(0.5, 0.9).unwrap();
        t.set(b"s", Action::Forward, 0.5);
        t.set(b"n", Action::Pickup, 0.5);
        t.update(b"s", Action::Forward, 0.0, b"n", false);
        assert!((t.get(b"s", Action::Forward) - 0.475).abs() < 1e-15);
    }

    #[test]
    fn update_touches_one_entry() {
        let mut t = QTable::new(0.3, 0.9).unwrap();
        t.set(b"a", Action::Drop, 0.2);
        t.set(b"b", Action::Toggle, 0.7);
        let before_b = t.values(b"b");
        let before_a = t.values(b"a");
        t.update(b"a", Action::Drop, 1.0, b"b", false);
        assert_eq!(t.values(b"b"), before_b);
        let after_a = t.values(b"a");
        let changed = (0..Action::COUNT)
            .filter(|&i| after_a[i] != before_a[i])
            .count();
        assert_eq!(changed, 1);
    }

    #[test]
    fn self_loop_converges_to_fixed_point() {
        let (r, gamma) = (0.3, 0.8);
        let mut t = QTable::new(0.5, gamma).unwrap();
        for _ in 0..200 {
            t.update(b"s", Action::TurnLeft, r, b"s", false);
        }
        assert!((t.get(b"s", Action::TurnLeft) - r / (1.0 - gamma)).abs() < 1e-6);
    }

    #[test]
    fn greedy_ties_go_to_lowest_index() {
        let t = QTable::new(0.1, 0.9).unwrap();
        assert_eq!(t.greedy(b"unseen"), Action::TurnLeft);
        let mut t = t;
        t.set(b"s", Action::Pickup, 0.4);
        t.set(b"s", Action::Toggle, 0.4);
        assert_eq!(t.greedy(b"s"), Action::Pickup);
    }

    #[test]
    fn invalid_hyperparameters_rejected() {
        assert!(QTable::new(0.0, 0.9).is_err());
        assert!(QTable::new(0.1, 1.0).is_err());
        let p = QLearningParams {
            epsilon_end: 1.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn epsilon_schedule_decays_and_rewarms() {
        let mut s = EpsilonSchedule::new(1.0, 0.05, 100);
        assert_eq!(s.value(0), 1.0);
        assert!((s.value(50) - 0.525).abs() < 1e-12);
        assert_eq!(s.value(100), 0.05);
        assert_eq!(s.value(10_000), 0.05);
        s.rewarm(1000, 0.5);
        assert_eq!(s.value(1000), 0.5);
        assert!(s.value(1020) < 0.5);
        assert_eq!(s.value(2000), 0.05);
    }

    #[test]
    fn frozen_policy_ignores_later_learning() {
        let mut agent = QLearningAgent::new(QLearningParams::default(), 1000).unwrap();
        let obs = Observation {
            rows: 1,
            cols: 1,
            cells: vec![[1, 0, 0]],
            orientation: 0,
            inventory: [0; crate::grid::INVENTORY_SLOTS],
        };
        let frozen = agent.freeze();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            agent.observe(&Transition {
                observation: &obs,
                action: Action::Forward,
                reward: 1.0,
                next_observation: &obs,
                terminal: true,
            });
        }
        assert_eq!(agent.table().greedy(&obs.to_bytes()), Action::Forward);
        assert_eq!(frozen.act(&obs, &mut rng), Action::TurnLeft);
    }
}
