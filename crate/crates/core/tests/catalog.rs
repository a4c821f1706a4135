use std::collections::{BTreeMap, BTreeSet};

use novelty_grid::catalog::{catalog, lookup, Novelty, NoveltyDescriptor, TransformError, NAMES};
use novelty_grid::grid::{
    generate_grid, Action, Color, DoorRule, EnvironmentConfig, Kind, Orientation, Placement,
};
use novelty_grid::layout::{all_shipped, shipped};
use novelty_grid::ontology::{
    optimal_plan, optimal_plan_length, validate_declaration, Arity, OntologyCell, SolutionEffect,
    Target, Verdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

fn descriptor(name: &str, params: Value) -> NoveltyDescriptor {
    let Value::Object(map) = params else {
        panic!("object expected")
    };
    NoveltyDescriptor::parse(name, &map).unwrap()
}

fn parse_err(name: &str, params: Value) -> TransformError {
    let Value::Object(map) = params else {
        panic!("object expected")
    };
    NoveltyDescriptor::parse(name, &map).unwrap_err()
}

/// Flattens a config (minus its object list) to dotted paths.
fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                if prefix.is_empty() && k == "objects" {
                    continue;
                }
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&p, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn changed_fields(pre: &EnvironmentConfig, post: &EnvironmentConfig) -> BTreeSet<String> {
    let (mut a, mut b) = (BTreeMap::new(), BTreeMap::new());
    flatten("", &serde_json::to_value(pre).unwrap(), &mut a);
    flatten("", &serde_json::to_value(post).unwrap(), &mut b);
    a.keys()
        .chain(b.keys())
        .filter(|k| a.get(*k) != b.get(*k))
        .cloned()
        .collect()
}

/// Fields a novelty may touch, as path prefixes.
fn allowed_fields(n: &Novelty) -> &'static [&'static str] {
    match n {
        Novelty::Identity | Novelty::GoalLocationChange { .. } => &[],
        Novelty::DoorLockToggle { .. } => &["doors.door0.locked"],
        Novelty::DoorKeyChange { .. } => &["doors.door0.key_color"],
        Novelty::DoorNumKeys { .. } => {
            &["doors.door0.keys_required", "dynamics.inventory_capacity"]
        }
        Novelty::ImperviousToLava => &["dynamics.lava_harmful"],
        Novelty::ActionRepetition { .. } => &["dynamics.action_repetition"],
        Novelty::ForwardMovementSpeed { .. } => &["dynamics.forward_step"],
        Novelty::ActionRadius { .. } => &["dynamics.action_radius"],
        Novelty::ColorRestriction { .. } => &["dynamics.color_allowlist"],
        Novelty::Burdening { .. } => &["dynamics.burdening"],
        Novelty::TransitionDeterminism { .. } => &["dynamics.determinism_p"],
    }
}

fn applicable() -> Vec<(&'static str, EnvironmentConfig, NoveltyDescriptor)> {
    let mut out = Vec::new();
    for (name, pre) in all_shipped() {
        for entry in catalog() {
            if entry.missing_features(&pre).is_empty() {
                out.push((name, pre.clone(), entry.descriptor));
            }
        }
    }
    out
}

#[test]
fn transforms_are_pure() {
    for (name, pre, d) in applicable() {
        let snapshot = pre.clone();
        let Ok(first) = d.apply(&pre) else { continue };
        assert_eq!(pre, snapshot, "{name} + {}", d.name);
        assert_eq!(d.apply(&pre).unwrap(), first, "{name} + {}", d.name);
    }
}

#[test]
fn transforms_touch_only_their_fields() {
    let mut checked = 0;
    for (name, pre, d) in applicable() {
        let Ok(post) = d.apply(&pre) else { continue };
        let allowed = allowed_fields(&d.novelty);
        for field in changed_fields(&pre, &post) {
            assert!(
                allowed.iter().any(|a| field.starts_with(a)),
                "{name} + {}: unexpected change to {field}",
                d.name
            );
        }
        match &d.novelty {
            Novelty::GoalLocationChange { .. } => {
                let strip = |c: &EnvironmentConfig| -> Vec<Placement> {
                    c.objects
                        .iter()
                        .filter(|p| p.kind != Kind::Goal)
                        .cloned()
                        .collect()
                };
                assert_eq!(strip(&pre), strip(&post), "{name}");
                assert_ne!(
                    pre.goal().unwrap().pos(),
                    post.goal().unwrap().pos(),
                    "{name}"
                );
            }
            Novelty::DoorNumKeys { .. } => {
                // Only appended keys of the door's color.
                assert_eq!(
                    &post.objects[..pre.objects.len()],
                    &pre.objects[..],
                    "{name}"
                );
                let color = post.doors["door0"].key_color;
                assert!(post.objects[pre.objects.len()..]
                    .iter()
                    .all(|p| p.kind == Kind::Key && p.color == color));
            }
            _ => assert_eq!(pre.objects, post.objects, "{name} + {}", d.name),
        }
        checked += 1;
    }
    assert!(checked > 60, "only {checked} pairs checked");
}

#[test]
fn defaults_keep_every_shipped_layout_solvable() {
    for (name, pre, d) in applicable() {
        let post = d
            .apply(&pre)
            .unwrap_or_else(|e| panic!("{name} + {} failed: {e}", d.name));
        if !post.dynamics.is_deterministic() {
            continue;
        }
        let len = optimal_plan_length(&post).unwrap();
        assert!(len.is_some(), "{name} + {}: goal unreachable", d.name);
    }
}

#[test]
fn declared_cells_reproduce_the_ontology_table() {
    use Arity::*;
    use SolutionEffect::*;
    use Target::*;
    let cell = |name: &str, params: Value| descriptor(name, params).declared_cell;
    let table: Vec<(OntologyCell, OntologyCell)> = vec![
        (
            cell("GoalLocationChange", json!({})),
            OntologyCell::new(Object, Unary, Delta),
        ),
        (
            cell("DoorLockToggle", json!({"direction": "lock"})),
            OntologyCell::new(Object, Unary, Barrier),
        ),
        (
            cell("DoorLockToggle", json!({"direction": "unlock"})),
            OntologyCell::new(Object, Unary, Shortcut),
        ),
        (
            cell("DoorKeyChange", json!({})),
            OntologyCell::new(Object, NonUnary, Delta),
        ),
        (
            cell("DoorNumKeys", json!({})),
            OntologyCell::new(Object, NonUnary, Barrier),
        ),
        (
            cell("ImperviousToLava", json!({})),
            OntologyCell::new(Object, NonUnary, Shortcut),
        ),
        (
            cell("ActionRepetition", json!({})),
            OntologyCell::new(Action, Unary, Barrier),
        ),
        (
            cell("ForwardMovementSpeed", json!({})),
            OntologyCell::new(Action, NonUnary, Shortcut),
        ),
        (
            cell("ActionRadius", json!({})),
            OntologyCell::new(Action, Unary, Shortcut),
        ),
        (
            cell("ColorRestriction", json!({})),
            OntologyCell::new(Action, Unary, Delta),
        ),
        (
            cell("Burdening", json!({})),
            OntologyCell::new(Action, NonUnary, Delta),
        ),
        (
            cell("TransitionDeterminism", json!({})),
            OntologyCell::new(Action, NonUnary, Barrier),
        ),
    ];
    for (got, want) in &table {
        assert_eq!(got, want);
    }
    let distinct: BTreeSet<String> = table.iter().map(|(c, _)| format!("{c:?}")).collect();
    // Twelve entries fill every cell of the 2x2x3 ontology exactly once.
    assert_eq!(distinct.len(), 12);
    assert_eq!(catalog().len(), 11);
    assert_eq!(NAMES.len(), 11);
}

#[test]
fn names_and_alias_resolve() {
    for n in NAMES {
        assert_eq!(lookup(n).unwrap().descriptor.name, n);
    }
    assert_eq!(
        lookup("ForwardMoveSpeed").unwrap().descriptor.name,
        "ForwardMovementSpeed"
    );
    match lookup("DoorKeyChnage").unwrap_err() {
        TransformError::UnknownNovelty { suggestion, .. } => {
            assert_eq!(suggestion.as_deref(), Some("DoorKeyChange"))
        }
        e => panic!("{e}"),
    }
}

#[test]
fn parameter_errors_name_the_parameter() {
    match parse_err("ForwardMovementSpeed", json!({"stpe": 2})) {
        TransformError::UnknownParameter {
            param, suggestion, ..
        } => {
            assert_eq!(param, "stpe");
            assert_eq!(suggestion.as_deref(), Some("step"));
        }
        e => panic!("{e}"),
    }
    for (name, params, bad) in [
        ("ForwardMovementSpeed", json!({"step": 0}), "step"),
        ("ActionRepetition", json!({"times": 0}), "times"),
        ("ActionRepetition", json!({"action": "jump"}), "action"),
        ("TransitionDeterminism", json!({"p": 0.0}), "p"),
        ("TransitionDeterminism", json!({"p": 1.5}), "p"),
        ("ColorRestriction", json!({"colors": []}), "colors"),
        (
            "Burdening",
            json!({"laden_repetition": 0}),
            "laden_repetition",
        ),
        ("GoalLocationChange", json!({"x": 1}), "y"),
    ] {
        match parse_err(name, params) {
            TransformError::BadParameter { param, .. } => assert_eq!(param, bad, "{name}"),
            e => panic!("{name}: {e}"),
        }
    }
}

#[test]
fn inapplicable_targets_are_rejected() {
    let doorkey = shipped("doorkey-6x6").unwrap();
    let open = shipped("open-5x5").unwrap();
    assert!(matches!(
        descriptor("DoorLockToggle", json!({"direction": "lock"})).apply(&doorkey),
        Err(TransformError::NoOp { .. })
    ));
    assert!(matches!(
        descriptor("DoorKeyChange", json!({"color": "red"})).apply(&doorkey),
        Err(TransformError::MissingTarget { .. })
    ));
    assert!(matches!(
        descriptor("DoorKeyChange", json!({"color": "yellow"})).apply(&doorkey),
        Err(TransformError::NoOp { .. })
    ));
    assert!(matches!(
        descriptor("DoorNumKeys", json!({})).apply(&open),
        Err(TransformError::MissingTarget { .. })
    ));
    assert!(matches!(
        descriptor("DoorLockToggle", json!({"door": "door9"})).apply(&doorkey),
        Err(TransformError::BadParameter { param: "door", .. })
    ));
    // (1,1) holds the yellow key.
    assert!(matches!(
        descriptor("GoalLocationChange", json!({"x": 1, "y": 1})).apply(&doorkey),
        Err(TransformError::BadParameter { .. })
    ));
    assert!(descriptor("GoalLocationChange", json!({"x": 9, "y": 1}))
        .apply(&doorkey)
        .is_err());
}

#[test]
fn identity_parameters_leave_the_config_unchanged() {
    let pre = shipped("doorkey-6x6").unwrap();
    let all_colors: Vec<&str> = Color::ALL.iter().map(|c| c.name()).collect();
    for (name, params) in [
        ("DoorNumKeys", json!({"keys": 1})),
        ("ActionRepetition", json!({"action": "pickup", "times": 1})),
        ("ForwardMovementSpeed", json!({"step": 1})),
        ("ActionRadius", json!({"radius": 1})),
        ("ColorRestriction", json!({"colors": all_colors})),
        (
            "Burdening",
            json!({"empty_forward_step": 1, "laden_repetition": 1}),
        ),
        ("TransitionDeterminism", json!({"p": 1.0})),
        ("Identity", json!({})),
    ] {
        assert_eq!(descriptor(name, params).apply(&pre).unwrap(), pre, "{name}");
    }
}

#[test]
fn door_num_keys_adds_reachable_keys_and_is_a_barrier() {
    let pre = shipped("doorkey-6x6").unwrap();
    let d = descriptor("DoorNumKeys", json!({"keys": 2}));
    let post = d.apply(&pre).unwrap();
    assert_eq!(post.count(Kind::Key, Color::Yellow), 2);
    assert_eq!(post.doors["door0"].keys_required, 2);
    assert!(post.dynamics.inventory_capacity >= 2);
    let report = validate_declaration(&d, &pre).unwrap();
    assert_eq!(report.verdict, Verdict::Match);
    assert!(report.post_length > report.pre_length);
}

#[test]
fn impervious_to_lava_without_lava_is_a_reported_mismatch() {
    let pre = shipped("doorkey-6x6").unwrap();
    assert!(!pre.contains_kind(Kind::Lava));
    let report = validate_declaration(&descriptor("ImperviousToLava", json!({})), &pre).unwrap();
    assert_eq!(
        report.verdict,
        Verdict::Mismatch {
            observed: SolutionEffect::Delta
        }
    );
    assert_eq!(report.pre_length, report.post_length);
}

#[test]
fn action_repetition_adds_padding_per_pickup() {
    for layout in ["doorkey-6x6", "doorkey-4x4"] {
        let pre = shipped(layout).unwrap();
        let plan = optimal_plan(&pre).unwrap().unwrap();
        let pickups = plan.iter().filter(|a| **a == Action::Pickup).count() as u32;
        assert_eq!(pickups, 1);
        for k in 1..=4u32 {
            let post = descriptor("ActionRepetition", json!({"action": "pickup", "times": k}))
                .apply(&pre)
                .unwrap();
            assert_eq!(
                optimal_plan_length(&post).unwrap(),
                Some(plan.len() as u32 + (k - 1) * pickups),
                "{layout}, k = {k}"
            );
        }
    }
}

#[test]
fn forward_speed_halves_an_open_corridor() {
    let pre = EnvironmentConfig::empty(9, 3, (1, 1, Orientation::East))
        .with_perimeter()
        .with(Kind::Goal, Color::Green, 7, 1);
    assert_eq!(optimal_plan_length(&pre).unwrap(), Some(6));
    let post = descriptor("ForwardMovementSpeed", json!({"step": 2}))
        .apply(&pre)
        .unwrap();
    assert_eq!(optimal_plan_length(&post).unwrap(), Some(3));
}

#[test]
fn action_radius_picks_up_a_key_two_cells_ahead() {
    // # # # # #
    // # @ . K #    key two cells east of the start
    // # D # # #    locked door south of the start
    // # G . . #
    // # # # # #
    let pre = EnvironmentConfig::empty(5, 5, (1, 1, Orientation::East))
        .with_perimeter()
        .with(Kind::Key, Color::Yellow, 3, 1)
        .with_walls(&[(2, 2), (3, 2)])
        .with_door(
            "door0",
            Color::Yellow,
            1,
            2,
            DoorRule {
                key_color: Color::Yellow,
                keys_required: 1,
                locked: true,
            },
        )
        .with(Kind::Goal, Color::Green, 1, 3);
    // forward, pickup, turn x2, forward, turn, toggle, forward x2
    assert_eq!(optimal_plan_length(&pre).unwrap(), Some(9));
    let post = descriptor("ActionRadius", json!({"radius": 2}))
        .apply(&pre)
        .unwrap();
    // pickup, turn, toggle, forward x2
    assert_eq!(optimal_plan_length(&post).unwrap(), Some(5));
}

#[test]
fn laden_corridor_of_four_costs_eight_forwards() {
    let base = EnvironmentConfig::empty(8, 3, (1, 1, Orientation::West))
        .with_perimeter()
        .with(Kind::Goal, Color::Green, 6, 1)
        .with(Kind::Key, Color::Yellow, 0, 1);
    // Replace the perimeter wall west of the start with the key.
    let mut base = base;
    base.objects
        .retain(|p| !(p.kind == Kind::Wall && (p.x, p.y) == (0, 1)));
    let cfg = descriptor(
        "Burdening",
        json!({"empty_forward_step": 2, "laden_repetition": 2}),
    )
    .apply(&base)
    .unwrap();
    let mut w = generate_grid(&cfg, ChaCha8Rng::seed_from_u64(0)).unwrap();
    w.step(Action::Pickup).unwrap();
    assert_eq!(w.agent().inventory.len(), 1);
    w.step(Action::TurnLeft).unwrap();
    w.step(Action::TurnLeft).unwrap();
    let start = w.agent().pos.x;
    let mut forwards = 0;
    while w.agent().pos.x < start + 4 {
        w.step(Action::Forward).unwrap();
        forwards += 1;
    }
    assert_eq!(forwards, 8);

    // Empty-handed the same stretch takes two.
    w.step(Action::Drop).unwrap();
    w.step(Action::TurnLeft).unwrap();
    w.step(Action::TurnLeft).unwrap();
    let mut w2 = generate_grid(&cfg, ChaCha8Rng::seed_from_u64(0)).unwrap();
    w2.step(Action::TurnLeft).unwrap();
    w2.step(Action::TurnLeft).unwrap();
    let start = w2.agent().pos.x;
    let mut forwards = 0;
    while w2.agent().pos.x < start + 4 {
        w2.step(Action::Forward).unwrap();
        forwards += 1;
    }
    assert_eq!(forwards, 2);
}

#[test]
fn slip_frequency_matches_determinism_p() {
    let mut cfg = shipped("open-5x5").unwrap();
    cfg.max_steps = u32::MAX;
    let cfg = descriptor("TransitionDeterminism", json!({"p": 0.9}))
        .apply(&cfg)
        .unwrap();
    let mut w = generate_grid(&cfg, ChaCha8Rng::seed_from_u64(2024)).unwrap();
    let mut slips = 0;
    for _ in 0..10_000 {
        // Done never terminates, so the agent stays put unless it slips.
        let r = w.step(Action::Done).unwrap();
        if r.terminated {
            w.reset();
        }
        if r.slipped {
            slips += 1;
            assert!(Action::MOVEMENT.contains(&r.executed));
        } else {
            assert_eq!(r.executed, Action::Done);
        }
    }
    let freq = slips as f64 / 10_000.0;
    assert!((freq - 0.1).abs() <= 0.01, "slip frequency {freq}");
}

#[test]
fn goal_resample_is_seeded() {
    let pre = shipped("doorkey-6x6").unwrap();
    let goal = |seed: u64| {
        let mut m = Map::new();
        m.insert("seed".into(), json!(seed));
        NoveltyDescriptor::parse("GoalLocationChange", &m)
            .unwrap()
            .apply(&pre)
            .unwrap()
            .goal()
            .unwrap()
            .pos()
    };
    assert_eq!(goal(5), goal(5));
    let distinct: BTreeSet<_> = (0..20).map(goal).collect();
    assert!(distinct.len() > 1);
}
