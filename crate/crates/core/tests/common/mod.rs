//! Helpers shared by integration tests and the acceptance harness.
#![allow(dead_code)]

use novelty_grid::catalog::NoveltyDescriptor;
use novelty_grid::grid::{generate_grid, Action, EnvironmentConfig, GridWorld};
use novelty_grid::ontology::SolutionEffect;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

/// Shortest goal-reaching command sequence found by trying every sequence of
/// length at most `bound`, or `None` if there is none that short. Shares no
/// code with the planner: it only replays actions on cloned worlds.
pub fn enumerate_min_length(cfg: &EnvironmentConfig, bound: u32) -> Option<u32> {
    let mut cfg = cfg.clone();
    cfg.max_steps = u32::MAX;
    let root = generate_grid(&cfg, ChaCha8Rng::seed_from_u64(0)).expect("valid config");
    let mut best = None;
    search(&root, 0, bound, &mut best);
    best
}

fn search(world: &GridWorld, depth: u32, bound: u32, best: &mut Option<u32>) {
    if depth >= bound || best.is_some_and(|b| depth + 1 >= b) {
        return;
    }
    for a in Action::ALL {
        let mut next = world.clone();
        let r = next.step(a).expect("live episode");
        if r.terminated {
            if next.at_goal() {
                *best = Some(depth + 1);
            }
            continue;
        }
        search(&next, depth + 1, bound, best);
    }
}

fn params(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => panic!("params must be an object"),
    }
}

/// One reference classification: a novelty on the layout built to exhibit
/// its declared solution effect, with the expected oracle lengths.
pub struct ReferenceCheck {
    pub layout: &'static str,
    pub descriptor: NoveltyDescriptor,
    pub expected: Option<(SolutionEffect, u32, u32)>,
}

fn check(
    layout: &'static str,
    name: &str,
    p: Value,
    expected: Option<(SolutionEffect, u32, u32)>,
) -> ReferenceCheck {
    ReferenceCheck {
        layout,
        descriptor: NoveltyDescriptor::parse(name, &params(p)).expect("reference descriptor"),
        expected,
    }
}

/// The ten deterministic checks plus the stochastic one, which must come back
/// unverifiable (`expected == None`).
pub fn reference_checks() -> Vec<ReferenceCheck> {
    use SolutionEffect::*;
    vec![
        check(
            "doorkey-6x6",
            "DoorLockToggle",
            json!({"direction": "unlock"}),
            Some((Shortcut, 10, 7)),
        ),
        check(
            "unlocked-door-6x6",
            "DoorLockToggle",
            json!({"direction": "lock"}),
            Some((Barrier, 7, 10)),
        ),
        check(
            "doorkey-6x6",
            "DoorKeyChange",
            json!({"color": "blue"}),
            Some((Delta, 10, 10)),
        ),
        check(
            "numkeys-6x6",
            "DoorNumKeys",
            json!({"keys": 2}),
            Some((Barrier, 9, 16)),
        ),
        check(
            "lava-bridge-7x5",
            "ImperviousToLava",
            json!({}),
            Some((Shortcut, 13, 4)),
        ),
        check(
            "doorkey-6x6",
            "ActionRepetition",
            json!({"action": "pickup", "times": 2}),
            Some((Barrier, 10, 11)),
        ),
        check(
            "doorkey-6x6",
            "ForwardMovementSpeed",
            json!({"step": 2}),
            Some((Shortcut, 10, 8)),
        ),
        check(
            "alcove-6x5",
            "ActionRadius",
            json!({"radius": 2}),
            Some((Shortcut, 10, 6)),
        ),
        check(
            "twin-doors-7x5",
            "ColorRestriction",
            json!({"colors": ["blue"]}),
            Some((Delta, 11, 11)),
        ),
        check(
            "burden-corridor-10x4",
            "Burdening",
            json!({"empty_forward_step": 2, "laden_repetition": 2}),
            Some((Delta, 10, 10)),
        ),
        check(
            "open-5x5",
            "GoalLocationChange",
            json!({"x": 3, "y": 1}),
            Some((Delta, 4, 4)),
        ),
        check(
            "doorkey-6x6",
            "TransitionDeterminism",
            json!({"p": 0.9}),
            None,
        ),
    ]
}

/// Observation dimensions: (rows, cols, cell count, channels, inventory slots).
pub type ShapeSig = (usize, usize, usize, usize, usize);

fn signature(obs: &novelty_grid::grid::Observation) -> ShapeSig {
    (
        obs.rows,
        obs.cols,
        obs.cells.len(),
        novelty_grid::grid::CELL_CHANNELS,
        obs.inventory.len(),
    )
}

/// Drives a wrapped environment with random actions across the injection
/// boundary and checks that every observation has the same dimensions.
/// Returns the number of observations seen. The action set needs no runtime
/// check: `Action` is a closed seven-variant enum that no config can extend.
pub fn check_shape_stability(
    pre: &EnvironmentConfig,
    descriptor: &NoveltyDescriptor,
) -> Result<usize, String> {
    use novelty_grid::injection::{wrap, NoveltySchedule};
    let schedule = NoveltySchedule::new(3).unwrap();
    let mut env = wrap(pre, descriptor, schedule, ChaCha8Rng::seed_from_u64(11))
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let expected = signature(&env.world().observe());
    let mut seen = 0;
    let mut post_seen = false;
    for _ in 0..6 {
        let obs = env.reset();
        post_seen |= env.is_post_novelty();
        if signature(&obs) != expected {
            return Err(format!(
                "reset observation {:?} != {:?}",
                signature(&obs),
                expected
            ));
        }
        for _ in 0..60 {
            let a = novelty_grid::agents::random_act(&mut rng);
            let r = env.step(a).map_err(|e| e.to_string())?;
            seen += 1;
            if signature(&r.observation) != expected {
                return Err(format!(
                    "observation {:?} != {:?} (post_novelty = {})",
                    signature(&r.observation),
                    expected,
                    env.is_post_novelty()
                ));
            }
            if r.terminated || r.truncated {
                break;
            }
        }
    }
    if !post_seen {
        return Err("never reached the post-novelty phase".into());
    }
    Ok(seen)
}
