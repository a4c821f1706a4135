//! The exemplar novelties as pure config transforms.
//!
//! Each transform takes a pre-novelty [`EnvironmentConfig`] and returns the
//! post-novelty one; the input is never modified. Parameters arrive as a JSON
//! object so configs and the CLI can address every novelty by name.

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::grid::{Action, Burdening, Color, ConfigError, EnvironmentConfig, Kind, Placement, Pos};
use crate::ontology::{Arity, OntologyCell, SolutionEffect, Target};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("unknown novelty `{name}`{}", hint(suggestion))]
    UnknownNovelty {
        name: String,
        suggestion: Option<String>,
    },
    #[error("{novelty}: unknown parameter `{param}`{}", hint(suggestion))]
    UnknownParameter {
        novelty: &'static str,
        param: String,
        suggestion: Option<String>,
    },
    #[error("{novelty}: parameter `{param}` {reason}")]
    BadParameter {
        novelty: &'static str,
        param: &'static str,
        reason: String,
    },
    #[error("{novelty}: layout has no {what}")]
    MissingTarget { novelty: &'static str, what: String },
    #[error("{novelty}: {reason}")]
    NoOp {
        novelty: &'static str,
        reason: String,
    },
    #[error("{novelty} produced an invalid config: {source}")]
    Invalid {
        novelty: &'static str,
        source: ConfigError,
    },
}

fn hint(suggestion: &Option<String>) -> String {
    suggestion
        .as_ref()
        .map(|s| format!(" (did you mean `{s}`?)"))
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LockDirection {
    Lock,
    Unlock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalTarget {
    Cell(Pos),
    /// A free cell reachable from the start, drawn from a stream seeded with
    /// the given value.
    Resample {
        seed: u64,
    },
}

/// A novelty together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Novelty {
    /// Changes nothing. Useful as a control run.
    Identity,
    GoalLocationChange {
        to: GoalTarget,
    },
    /// `door: None` selects the first door in row-major order.
    DoorLockToggle {
        door: Option<String>,
        direction: LockDirection,
    },
    DoorKeyChange {
        door: Option<String>,
        /// `None` picks the first color, in palette order, of a key present in
        /// the layout that differs from the current requirement.
        color: Option<Color>,
    },
    DoorNumKeys {
        door: Option<String>,
        keys: u32,
    },
    ImperviousToLava,
    ActionRepetition {
        action: Action,
        times: u32,
    },
    ForwardMovementSpeed {
        step: u32,
    },
    ActionRadius {
        radius: u32,
    },
    ColorRestriction {
        colors: BTreeSet<Color>,
    },
    Burdening {
        empty_forward_step: u32,
        laden_repetition: u32,
    },
    TransitionDeterminism {
        p: f64,
    },
}

/// Catalog names, in presentation order.
pub const NAMES: [&str; 11] = [
    "GoalLocationChange",
    "DoorLockToggle",
    "DoorKeyChange",
    "DoorNumKeys",
    "ImperviousToLava",
    "ActionRepetition",
    "ForwardMovementSpeed",
    "ActionRadius",
    "ColorRestriction",
    "Burdening",
    "TransitionDeterminism",
];

/// Alternative spellings accepted on input.
const ALIASES: [(&str, &str); 1] = [("ForwardMoveSpeed", "ForwardMovementSpeed")];

const IDENTITY: &str = "Identity";

fn canonical_name(name: &str) -> Option<&'static str> {
    if name == IDENTITY {
        return Some(IDENTITY);
    }
    if let Some((_, to)) = ALIASES.iter().find(|(from, _)| *from == name) {
        return Some(to);
    }
    NAMES.iter().copied().find(|n| *n == name)
}

struct Params<'a> {
    novelty: &'static str,
    map: &'a Map<String, Value>,
    known: Vec<&'static str>,
}

impl<'a> Params<'a> {
    fn new(novelty: &'static str, map: &'a Map<String, Value>) -> Self {
        Params {
            novelty,
            map,
            known: Vec::new(),
        }
    }

    fn get<T: DeserializeOwned>(&mut self, key: &'static str) -> Result<Option<T>, TransformError> {
        self.known.push(key);
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| {
                TransformError::BadParameter {
                    novelty: self.novelty,
                    param: key,
                    reason: format!("is malformed: {e}"),
                }
            }),
        }
    }

    fn bad(&self, param: &'static str, reason: impl Into<String>) -> TransformError {
        TransformError::BadParameter {
            novelty: self.novelty,
            param,
            reason: reason.into(),
        }
    }

    fn at_least_one(&mut self, key: &'static str, default: u32) -> Result<u32, TransformError> {
        let v: u32 = self.get(key)?.unwrap_or(default);
        if v < 1 {
            return Err(self.bad(key, format!("must be at least 1, got {v}")));
        }
        Ok(v)
    }

    fn finish(self) -> Result<(), TransformError> {
        if let Some(extra) = self.map.keys().find(|k| !self.known.contains(&k.as_str())) {
            return Err(TransformError::UnknownParameter {
                novelty: self.novelty,
                param: extra.clone(),
                suggestion: crate::nearest(extra, self.known.iter().copied()),
            });
        }
        Ok(())
    }
}

impl Novelty {
    /// Builds a novelty from its catalog name and a parameter object. Missing
    /// parameters take their catalog defaults.
    pub fn from_params(name: &str, params: &Map<String, Value>) -> Result<Novelty, TransformError> {
        let canonical = canonical_name(name).ok_or_else(|| TransformError::UnknownNovelty {
            name: name.to_string(),
            suggestion: crate::nearest(name, NAMES.iter().copied().chain([IDENTITY])),
        })?;
        let mut p = Params::new(canonical, params);
        let novelty = match canonical {
            "Identity" => Novelty::Identity,
            "GoalLocationChange" => {
                let x: Option<usize> = p.get("x")?;
                let y: Option<usize> = p.get("y")?;
                let seed: Option<u64> = p.get("seed")?;
                let to = match (x, y) {
                    (Some(x), Some(y)) => {
                        if seed.is_some() {
                            return Err(p.bad("seed", "cannot be combined with x and y"));
                        }
                        GoalTarget::Cell(Pos::new(x, y))
                    }
                    (None, None) => GoalTarget::Resample {
                        seed: seed.unwrap_or(0),
                    },
                    (Some(_), None) => return Err(p.bad("y", "is required when x is given")),
                    (None, Some(_)) => return Err(p.bad("x", "is required when y is given")),
                };
                Novelty::GoalLocationChange { to }
            }
            "DoorLockToggle" => Novelty::DoorLockToggle {
                door: p.get("door")?,
                direction: p.get("direction")?.unwrap_or(LockDirection::Unlock),
            },
            "DoorKeyChange" => Novelty::DoorKeyChange {
                door: p.get("door")?,
                color: p.get("color")?,
            },
            "DoorNumKeys" => Novelty::DoorNumKeys {
                door: p.get("door")?,
                keys: p.at_least_one("keys", 2)?,
            },
            "ImperviousToLava" => Novelty::ImperviousToLava,
            "ActionRepetition" => {
                let action: String = p.get("action")?.unwrap_or_else(|| "pickup".into());
                let action = action.parse::<Action>().map_err(|e| p.bad("action", e))?;
                Novelty::ActionRepetition {
                    action,
                    times: p.at_least_one("times", 2)?,
                }
            }
            "ForwardMovementSpeed" => Novelty::ForwardMovementSpeed {
                step: p.at_least_one("step", 2)?,
            },
            "ActionRadius" => Novelty::ActionRadius {
                radius: p.get("radius")?.unwrap_or(2),
            },
            "ColorRestriction" => {
                let colors: BTreeSet<Color> = p
                    .get("colors")?
                    .unwrap_or_else(|| BTreeSet::from([Color::Blue]));
                if colors.is_empty() {
                    return Err(p.bad("colors", "must name at least one color"));
                }
                Novelty::ColorRestriction { colors }
            }
            "Burdening" => Novelty::Burdening {
                empty_forward_step: p.at_least_one("empty_forward_step", 2)?,
                laden_repetition: p.at_least_one("laden_repetition", 2)?,
            },
            "TransitionDeterminism" => {
                let prob: f64 = p.get("p")?.unwrap_or(0.9);
                if !(prob > 0.0 && prob <= 1.0) {
                    return Err(p.bad("p", format!("must lie in (0, 1], got {prob}")));
                }
                Novelty::TransitionDeterminism { p: prob }
            }
            _ => unreachable!("canonical names are exhaustive"),
        };
        p.finish()?;
        Ok(novelty)
    }

    /// The novelty with all-default parameters.
    pub fn default_for(name: &str) -> Result<Novelty, TransformError> {
        Novelty::from_params(name, &Map::new())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Novelty::Identity => IDENTITY,
            Novelty::GoalLocationChange { .. } => "GoalLocationChange",
            Novelty::DoorLockToggle { .. } => "DoorLockToggle",
            Novelty::DoorKeyChange { .. } => "DoorKeyChange",
            Novelty::DoorNumKeys { .. } => "DoorNumKeys",
            Novelty::ImperviousToLava => "ImperviousToLava",
            Novelty::ActionRepetition { .. } => "ActionRepetition",
            Novelty::ForwardMovementSpeed { .. } => "ForwardMovementSpeed",
            Novelty::ActionRadius { .. } => "ActionRadius",
            Novelty::ColorRestriction { .. } => "ColorRestriction",
            Novelty::Burdening { .. } => "Burdening",
            Novelty::TransitionDeterminism { .. } => "TransitionDeterminism",
        }
    }

    /// The parameter object, in the same shape [`Novelty::from_params`] reads.
    pub fn parameters(&self) -> Map<String, Value> {
        let v = match self {
            Novelty::Identity | Novelty::ImperviousToLava => json!({}),
            Novelty::GoalLocationChange { to } => match to {
                GoalTarget::Cell(p) => json!({ "x": p.x, "y": p.y }),
                GoalTarget::Resample { seed } => json!({ "seed": seed }),
            },
            Novelty::DoorLockToggle { door, direction } => {
                json!({ "door": door, "direction": direction })
            }
            Novelty::DoorKeyChange { door, color } => json!({ "door": door, "color": color }),
            Novelty::DoorNumKeys { door, keys } => json!({ "door": door, "keys": keys }),
            Novelty::ActionRepetition { action, times } => {
                json!({ "action": action.name(), "times": times })
            }
            Novelty::ForwardMovementSpeed { step } => json!({ "step": step }),
            Novelty::ActionRadius { radius } => json!({ "radius": radius }),
            Novelty::ColorRestriction { colors } => json!({ "colors": colors }),
            Novelty::Burdening {
                empty_forward_step,
                laden_repetition,
            } => json!({
                "empty_forward_step": empty_forward_step,
                "laden_repetition": laden_repetition,
            }),
            Novelty::TransitionDeterminism { p } => json!({ "p": p }),
        };
        let Value::Object(mut map) = v else {
            unreachable!()
        };
        map.retain(|_, v| !v.is_null());
        map
    }

    /// The ontology cell this novelty is declared to occupy.
    pub fn declared_cell(&self) -> OntologyCell {
        use Arity::*;
        use SolutionEffect::*;
        use Target::*;
        let (t, a, s) = match self {
            Novelty::Identity => (Object, Unary, Delta),
            Novelty::GoalLocationChange { .. } => (Object, Unary, Delta),
            Novelty::DoorLockToggle { direction, .. } => match direction {
                LockDirection::Lock => (Object, Unary, Barrier),
                LockDirection::Unlock => (Object, Unary, Shortcut),
            },
            Novelty::DoorKeyChange { .. } => (Object, NonUnary, Delta),
            Novelty::DoorNumKeys { .. } => (Object, NonUnary, Barrier),
            Novelty::ImperviousToLava => (Object, NonUnary, Shortcut),
            Novelty::ActionRepetition { .. } => (Action, Unary, Barrier),
            Novelty::ForwardMovementSpeed { .. } => (Action, NonUnary, Shortcut),
            Novelty::ActionRadius { .. } => (Action, Unary, Shortcut),
            Novelty::ColorRestriction { .. } => (Action, Unary, Delta),
            Novelty::Burdening { .. } => (Action, NonUnary, Delta),
            Novelty::TransitionDeterminism { .. } => (Action, NonUnary, Barrier),
        };
        OntologyCell::new(t, a, s)
    }

    /// Produces the post-novelty config. `pre` is left untouched.
    pub fn apply(&self, pre: &EnvironmentConfig) -> Result<EnvironmentConfig, TransformError> {
        let novelty = self.name();
        let mut post = pre.clone();
        match self {
            Novelty::Identity => {}
            Novelty::GoalLocationChange { to } => move_goal(pre, &mut post, to)?,
            Novelty::DoorLockToggle { door, direction } => {
                let id = select_door(pre, novelty, door.as_deref(), |_| true)?;
                let rule = post.doors.get_mut(&id).expect("selected door exists");
                let lock = *direction == LockDirection::Lock;
                if rule.locked == lock {
                    return Err(TransformError::NoOp {
                        novelty,
                        reason: format!(
                            "door `{id}` is already {}",
                            if lock { "locked" } else { "unlocked" }
                        ),
                    });
                }
                rule.locked = lock;
            }
            Novelty::DoorKeyChange { door, color } => {
                let id = select_door(pre, novelty, door.as_deref(), |r| r.locked)?;
                let rule = post.doors.get_mut(&id).expect("selected door exists");
                let current = rule.key_color;
                // Keys the agent is not allowed to handle do not count.
                let usable = |c: Color| {
                    if pre.dynamics.allows(c) {
                        pre.count(Kind::Key, c)
                    } else {
                        0
                    }
                };
                let new = match color {
                    Some(c) => *c,
                    None => Color::ALL
                        .into_iter()
                        .find(|c| *c != current && usable(*c) > 0)
                        .ok_or_else(|| TransformError::MissingTarget {
                            novelty,
                            what: format!("key of a color other than {current}"),
                        })?,
                };
                if new == current {
                    return Err(TransformError::NoOp {
                        novelty,
                        reason: format!("door `{id}` already takes {new} keys"),
                    });
                }
                if usable(new) < rule.keys_required as usize {
                    return Err(TransformError::MissingTarget {
                        novelty,
                        what: format!("usable {new} key to open door `{id}`"),
                    });
                }
                rule.key_color = new;
            }
            Novelty::DoorNumKeys { door, keys } => {
                let id = select_door(pre, novelty, door.as_deref(), |r| r.locked)?;
                let rule = post.doors.get_mut(&id).expect("selected door exists");
                rule.keys_required = *keys;
                let color = rule.key_color;
                let missing = (*keys as usize).saturating_sub(pre.count(Kind::Key, color));
                if missing > 0 {
                    let cells = reachable_free_cells(pre, false);
                    if cells.len() < missing {
                        return Err(TransformError::MissingTarget {
                            novelty,
                            what: format!("reachable free cell for {missing} extra {color} key(s)"),
                        });
                    }
                    for pos in &cells[..missing] {
                        post.objects
                            .push(Placement::new(Kind::Key, color, pos.x, pos.y));
                    }
                }
                let needed = post
                    .doors
                    .values()
                    .map(|r| r.keys_required)
                    .max()
                    .unwrap_or(1);
                post.dynamics.inventory_capacity = post.dynamics.inventory_capacity.max(needed);
            }
            Novelty::ImperviousToLava => post.dynamics.lava_harmful = false,
            Novelty::ActionRepetition { action, times } => {
                if *times == 1 {
                    post.dynamics.action_repetition.remove(action);
                } else {
                    post.dynamics.action_repetition.insert(*action, *times);
                }
            }
            Novelty::ForwardMovementSpeed { step } => post.dynamics.forward_step = *step,
            Novelty::ActionRadius { radius } => post.dynamics.action_radius = *radius,
            Novelty::ColorRestriction { colors } => {
                post.dynamics.color_allowlist = if colors.len() == Color::ALL.len() {
                    None
                } else {
                    Some(colors.clone())
                };
            }
            Novelty::Burdening {
                empty_forward_step,
                laden_repetition,
            } => {
                post.dynamics.burdening = if (*empty_forward_step, *laden_repetition) == (1, 1) {
                    None
                } else {
                    Some(Burdening {
                        empty_forward_step: *empty_forward_step,
                        laden_repetition: *laden_repetition,
                    })
                };
            }
            Novelty::TransitionDeterminism { p } => post.dynamics.determinism_p = *p,
        }
        post.validate()
            .map_err(|source| TransformError::Invalid { novelty, source })?;
        Ok(post)
    }
}

fn select_door(
    cfg: &EnvironmentConfig,
    novelty: &'static str,
    requested: Option<&str>,
    eligible: impl Fn(&crate::grid::DoorRule) -> bool,
) -> Result<String, TransformError> {
    match requested {
        Some(id) => match cfg.doors.get(id) {
            Some(rule) if eligible(rule) => Ok(id.to_string()),
            Some(_) => Err(TransformError::MissingTarget {
                novelty,
                what: format!("suitable door `{id}` (it is unlocked)"),
            }),
            None => Err(TransformError::BadParameter {
                novelty,
                param: "door",
                reason: format!(
                    "names no door in the layout{}",
                    hint(&crate::nearest(id, cfg.doors.keys().map(String::as_str)))
                ),
            }),
        },
        None => cfg
            .door_ids()
            .into_iter()
            .find(|id| eligible(&cfg.doors[id]))
            .ok_or_else(|| TransformError::MissingTarget {
                novelty,
                what: "suitable door".into(),
            }),
    }
}

fn move_goal(
    pre: &EnvironmentConfig,
    post: &mut EnvironmentConfig,
    to: &GoalTarget,
) -> Result<(), TransformError> {
    let novelty = "GoalLocationChange";
    let goal_idx = pre
        .objects
        .iter()
        .position(|p| p.kind == Kind::Goal)
        .ok_or_else(|| TransformError::MissingTarget {
            novelty,
            what: "goal".into(),
        })?;
    let old = pre.objects[goal_idx].pos();
    let target = match to {
        GoalTarget::Cell(pos) => {
            if !pre.in_bounds(*pos) {
                return Err(TransformError::BadParameter {
                    novelty,
                    param: "x",
                    reason: format!("{pos} lies outside the {}x{} grid", pre.width, pre.height),
                });
            }
            if *pos == old {
                return Err(TransformError::NoOp {
                    novelty,
                    reason: format!("goal is already at {pos}"),
                });
            }
            if pre.object_at(*pos).is_some() || pre.agent_cell() == Some(*pos) {
                return Err(TransformError::BadParameter {
                    novelty,
                    param: "x",
                    reason: format!("{pos} is occupied"),
                });
            }
            *pos
        }
        GoalTarget::Resample { seed } => {
            let cells: Vec<Pos> = reachable_free_cells(pre, true)
                .into_iter()
                .filter(|p| *p != old)
                .collect();
            if cells.is_empty() {
                return Err(TransformError::MissingTarget {
                    novelty,
                    what: "free cell to move the goal to".into(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            cells[rng.random_range(0..cells.len())]
        }
    };
    post.objects[goal_idx].x = target.x;
    post.objects[goal_idx].y = target.y;
    Ok(())
}

/// Empty cells reachable from the agent start, row-major. Keys and balls count
/// as passable since the agent can move them; doors only if `through_doors`.
/// Harmful lava blocks.
pub fn reachable_free_cells(cfg: &EnvironmentConfig, through_doors: bool) -> Vec<Pos> {
    let Some(start) = cfg.agent_cell() else {
        return cfg.free_cells();
    };
    let (w, h) = (cfg.width, cfg.height);
    let mut kind_at: Vec<Option<Kind>> = vec![None; w * h];
    for p in &cfg.objects {
        kind_at[p.y * w + p.x] = Some(p.kind);
    }
    let passable = |k: Option<Kind>| match k {
        None | Some(Kind::Floor | Kind::Goal | Kind::Key | Kind::Ball) => true,
        Some(Kind::Lava) => !cfg.dynamics.lava_harmful,
        Some(Kind::Door) => through_doors,
        Some(Kind::Wall) => false,
    };
    let mut seen = vec![false; w * h];
    seen[start.y * w + start.x] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(pos) = queue.pop_front() {
        for dir in crate::grid::Orientation::ALL {
            let Some(n) = pos.offset(dir, 1).filter(|n| cfg.in_bounds(*n)) else {
                continue;
            };
            let i = n.y * w + n.x;
            if !seen[i] && passable(kind_at[i]) {
                seen[i] = true;
                queue.push_back(n);
            }
        }
    }
    cfg.free_cells()
        .into_iter()
        .filter(|p| seen[p.y * w + p.x])
        .collect()
}

/// A novelty as it appears in the catalog and in reports.
#[derive(Debug, Clone, PartialEq)]
pub struct NoveltyDescriptor {
    pub name: String,
    pub parameters: Map<String, Value>,
    pub declared_cell: OntologyCell,
    pub novelty: Novelty,
}

impl NoveltyDescriptor {
    pub fn new(novelty: Novelty) -> Self {
        NoveltyDescriptor {
            name: novelty.name().to_string(),
            parameters: novelty.parameters(),
            declared_cell: novelty.declared_cell(),
            novelty,
        }
    }

    pub fn parse(name: &str, params: &Map<String, Value>) -> Result<Self, TransformError> {
        Ok(NoveltyDescriptor::new(Novelty::from_params(name, params)?))
    }

    pub fn apply(&self, pre: &EnvironmentConfig) -> Result<EnvironmentConfig, TransformError> {
        self.novelty.apply(pre)
    }
}

/// A layout property a novelty needs to be meaningful with its defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutFeature {
    LockedDoor,
    /// Keys of at least two colors the agent may handle.
    SecondKeyColor,
    /// A pre-existing interaction color allowlist.
    ColorAllowlist,
}

impl LayoutFeature {
    pub fn present(self, cfg: &EnvironmentConfig) -> bool {
        match self {
            LayoutFeature::LockedDoor => cfg.doors.values().any(|r| r.locked),
            LayoutFeature::SecondKeyColor => {
                Color::ALL
                    .iter()
                    .filter(|c| cfg.dynamics.allows(**c) && cfg.count(Kind::Key, **c) > 0)
                    .count()
                    >= 2
            }
            LayoutFeature::ColorAllowlist => cfg.dynamics.color_allowlist.is_some(),
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            LayoutFeature::LockedDoor => "at least one locked door",
            LayoutFeature::SecondKeyColor => "keys of at least two usable colors",
            LayoutFeature::ColorAllowlist => "an interaction color allowlist",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    /// The entry with its default parameters.
    pub descriptor: NoveltyDescriptor,
    pub requires: &'static [LayoutFeature],
}

impl CatalogEntry {
    pub fn missing_features(&self, cfg: &EnvironmentConfig) -> Vec<LayoutFeature> {
        self.requires
            .iter()
            .copied()
            .filter(|f| !f.present(cfg))
            .collect()
    }
}

fn requirements(name: &str) -> &'static [LayoutFeature] {
    match name {
        "DoorLockToggle" | "DoorNumKeys" => &[LayoutFeature::LockedDoor],
        "DoorKeyChange" => &[LayoutFeature::LockedDoor, LayoutFeature::SecondKeyColor],
        "ColorRestriction" => &[LayoutFeature::ColorAllowlist],
        _ => &[],
    }
}

/// All catalog entries with default parameters.
pub fn catalog() -> Vec<CatalogEntry> {
    NAMES
        .iter()
        .map(|n| CatalogEntry {
            descriptor: NoveltyDescriptor::new(Novelty::default_for(n).expect("defaults parse")),
            requires: requirements(n),
        })
        .collect()
}

/// Looks up an entry by name or alias.
pub fn lookup(name: &str) -> Result<CatalogEntry, TransformError> {
    let novelty = Novelty::default_for(name)?;
    Ok(CatalogEntry {
        requires: requirements(novelty.name()),
        descriptor: NoveltyDescriptor::new(novelty),
    })
}
