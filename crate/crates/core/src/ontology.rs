//! Novelty ontology types and the planning oracle that classifies a change by
//! comparing optimal plan lengths before and after it.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{NoveltyDescriptor, TransformError};
use crate::grid::{
    generate_grid, Action, AgentStart, ConfigError, EnvironmentConfig, GridWorld, LayoutPolicy,
    Orientation, Pos, WorldObject,
};

/// Whether a novelty changes a world entity or how actions take effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Object,
    Action,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arity {
    Unary,
    NonUnary,
}

/// How the optimal solution length moves under a novelty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionEffect {
    /// Optimal plans get longer (or impossible).
    Barrier,
    /// Optimal plan length is unchanged.
    Delta,
    /// Optimal plans get shorter.
    Shortcut,
}

impl SolutionEffect {
    /// The label for the reverse transformation.
    pub fn reversed(self) -> Self {
        match self {
            SolutionEffect::Barrier => SolutionEffect::Shortcut,
            SolutionEffect::Delta => SolutionEffect::Delta,
            SolutionEffect::Shortcut => SolutionEffect::Barrier,
        }
    }
}

impl fmt::Display for SolutionEffect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionEffect::Barrier => "barrier",
            SolutionEffect::Delta => "delta",
            SolutionEffect::Shortcut => "shortcut",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OntologyCell {
    pub target: Target,
    pub arity: Arity,
    pub solution_effect: SolutionEffect,
}

impl OntologyCell {
    pub const fn new(target: Target, arity: Arity, solution_effect: SolutionEffect) -> Self {
        OntologyCell {
            target,
            arity,
            solution_effect,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle needs deterministic dynamics, got determinism_p = {0}")]
    Stochastic(f64),
    #[error("oracle needs a fixed layout; per-episode goal placement is random")]
    RandomLayout,
    #[error("oracle needs a fixed agent start")]
    RandomStart,
    #[error("the goal is unreachable before the novelty, so the change cannot be classified")]
    PreUnreachable,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Search node: everything about a world that can influence future dynamics,
/// minus the step counter (plans are searched with an unbounded horizon).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SearchState {
    pub pos: Pos,
    pub orientation: Orientation,
    /// Carried objects in pickup order; drop returns the last one.
    pub inventory: Vec<WorldObject>,
    /// Door states and the positions of movable or consumed objects.
    pub cells: Vec<Option<WorldObject>>,
    pub ledger: Option<(Action, u32)>,
}

impl SearchState {
    pub fn of(world: &GridWorld) -> Self {
        let agent = world.agent();
        SearchState {
            pos: agent.pos,
            orientation: agent.orientation,
            inventory: agent.inventory.clone(),
            cells: world.cells().to_vec(),
            ledger: world.ledger(),
        }
    }
}

fn check_applicable(config: &EnvironmentConfig) -> Result<(), OracleError> {
    if !config.dynamics.is_deterministic() {
        return Err(OracleError::Stochastic(config.dynamics.determinism_p));
    }
    if config.layout_policy == LayoutPolicy::RandomGoal {
        return Err(OracleError::RandomLayout);
    }
    if config.agent_start == AgentStart::Random {
        return Err(OracleError::RandomStart);
    }
    config.validate()?;
    Ok(())
}

/// A shortest command sequence from the start to the goal, or `None` when the
/// goal cannot be reached at all.
pub fn optimal_plan(config: &EnvironmentConfig) -> Result<Option<Vec<Action>>, OracleError> {
    check_applicable(config)?;
    let mut search = config.clone();
    search.max_steps = u32::MAX;
    // the rng is never drawn from under deterministic, fixed-layout dynamics
    let root = generate_grid(&search, ChaCha8Rng::seed_from_u64(0))?;

    // (parent node, action taken from parent)
    let mut nodes: Vec<(usize, Action)> = vec![(usize::MAX, Action::Done)];
    let mut seen: HashSet<SearchState> = HashSet::new();
    seen.insert(SearchState::of(&root));
    let mut queue = VecDeque::from([(root, 0usize)]);

    while let Some((world, node)) = queue.pop_front() {
        for action in Action::ALL {
            let mut next = world.clone();
            let result = next.step(action).expect("search worlds never truncate");
            if result.terminated {
                if next.at_goal() {
                    let mut plan = vec![action];
                    let mut n = node;
                    while n != 0 {
                        plan.push(nodes[n].1);
                        n = nodes[n].0;
                    }
                    plan.reverse();
                    return Ok(Some(plan));
                }
                continue;
            }
            let state = SearchState::of(&next);
            if seen.insert(state) {
                nodes.push((node, action));
                queue.push_back((next, nodes.len() - 1));
            }
        }
    }
    Ok(None)
}

/// Minimum number of issued commands from the start to the goal.
pub fn optimal_plan_length(config: &EnvironmentConfig) -> Result<Option<u32>, OracleError> {
    Ok(optimal_plan(config)?.map(|p| p.len() as u32))
}

/// Compares optimal plan lengths given already-computed values.
pub fn compare_lengths(pre: u32, post: Option<u32>) -> SolutionEffect {
    match post {
        None => SolutionEffect::Barrier,
        Some(p) if p > pre => SolutionEffect::Barrier,
        Some(p) if p < pre => SolutionEffect::Shortcut,
        Some(_) => SolutionEffect::Delta,
    }
}

pub fn classify_solution_effect(
    pre: &EnvironmentConfig,
    post: &EnvironmentConfig,
) -> Result<SolutionEffect, OracleError> {
    let before = optimal_plan_length(pre)?.ok_or(OracleError::PreUnreachable)?;
    let after = optimal_plan_length(post)?;
    Ok(compare_lengths(before, after))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch { observed: SolutionEffect },
    Unverifiable { reason: String },
}

/// Outcome of checking a novelty's declared solution effect on one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclarationReport {
    pub novelty: String,
    pub declared: OntologyCell,
    pub pre_length: Option<u32>,
    pub post_length: Option<u32>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// Applies the descriptor's transform to `pre` and checks the declared
/// solution effect against the oracle. A mismatch is a finding, not an error:
/// solution effects depend on the layout.
pub fn validate_declaration(
    descriptor: &NoveltyDescriptor,
    pre: &EnvironmentConfig,
) -> Result<DeclarationReport, TransformError> {
    let post = descriptor.apply(pre)?;
    let mut report = DeclarationReport {
        novelty: descriptor.name.clone(),
        declared: descriptor.declared_cell,
        pre_length: None,
        post_length: None,
        verdict: Verdict::Match,
    };
    let unverifiable = |e: OracleError| Verdict::Unverifiable {
        reason: e.to_string(),
    };
    report.verdict = match optimal_plan_length(pre) {
        Err(e) => unverifiable(e),
        Ok(None) => unverifiable(OracleError::PreUnreachable),
        Ok(Some(before)) => {
            report.pre_length = Some(before);
            match optimal_plan_length(&post) {
                Err(e) => unverifiable(e),
                Ok(after) => {
                    report.post_length = after;
                    let observed = compare_lengths(before, after);
                    if observed == descriptor.declared_cell.solution_effect {
                        Verdict::Match
                    } else {
                        Verdict::Mismatch { observed }
                    }
                }
            }
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Color, Kind};
    use crate::layout::shipped;

    fn open5() -> EnvironmentConfig {
        EnvironmentConfig::empty(5, 5, (1, 1, Orientation::East))
            .with_perimeter()
            .with(Kind::Goal, Color::Green, 3, 1)
    }

    #[test]
    fn straight_line_plan() {
        assert_eq!(
            optimal_plan(&open5()).unwrap(),
            Some(vec![Action::Forward, Action::Forward])
        );
    }

    #[test]
    fn enclosed_goal_is_unreachable() {
        let cfg = EnvironmentConfig::empty(7, 7, (1, 1, Orientation::East))
            .with_perimeter()
            .with_walls(&[(3, 4), (5, 4), (4, 3), (4, 5)])
            .with(Kind::Goal, Color::Green, 4, 4);
        assert_eq!(optimal_plan_length(&cfg).unwrap(), None);
    }

    #[test]
    fn keyed_door_plan_picks_up_before_toggling() {
        let cfg = shipped("doorkey-4x4").unwrap();
        let plan = optimal_plan(&cfg).unwrap().unwrap();
        assert_eq!(
            plan,
            vec![
                Action::Pickup,
                Action::Forward,
                Action::TurnLeft,
                Action::Toggle,
                Action::Forward,
                Action::Forward
            ]
        );
    }

    #[test]
    fn identity_is_delta() {
        let cfg = shipped("doorkey-6x6").unwrap();
        assert_eq!(
            classify_solution_effect(&cfg, &cfg).unwrap(),
            SolutionEffect::Delta
        );
    }

    #[test]
    fn stochastic_and_random_layouts_rejected() {
        let mut cfg = open5();
        cfg.dynamics.determinism_p = 0.9;
        assert!(matches!(
            optimal_plan_length(&cfg),
            Err(OracleError::Stochastic(_))
        ));
        let mut cfg = open5();
        cfg.layout_policy = LayoutPolicy::RandomGoal;
        assert!(matches!(
            optimal_plan_length(&cfg),
            Err(OracleError::RandomLayout)
        ));
        let mut cfg = open5();
        cfg.agent_start = AgentStart::Random;
        assert!(matches!(
            optimal_plan_length(&cfg),
            Err(OracleError::RandomStart)
        ));
    }

    #[test]
    fn unreachable_pre_is_a_config_error() {
        let blocked = EnvironmentConfig::empty(7, 7, (1, 1, Orientation::East))
            .with_perimeter()
            .with_walls(&[(3, 4), (5, 4), (4, 3), (4, 5)])
            .with(Kind::Goal, Color::Green, 4, 4);
        let err = classify_solution_effect(&blocked, &open5()).unwrap_err();
        assert!(matches!(err, OracleError::PreUnreachable));
    }

    #[test]
    fn comparison_covers_all_cases() {
        assert_eq!(compare_lengths(5, Some(7)), SolutionEffect::Barrier);
        assert_eq!(compare_lengths(5, None), SolutionEffect::Barrier);
        assert_eq!(compare_lengths(5, Some(3)), SolutionEffect::Shortcut);
        assert_eq!(compare_lengths(5, Some(5)), SolutionEffect::Delta);
    }
}
