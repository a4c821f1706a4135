use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Action, Color, Kind, Orientation, Pos};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("grid dimensions must be positive, got {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("{what} at {pos} is outside the {width}x{height} grid")]
    OutOfBounds {
        what: String,
        pos: Pos,
        width: usize,
        height: usize,
    },
    #[error("{second} at {pos} overlaps {first}")]
    Overlap {
        pos: Pos,
        first: String,
        second: String,
    },
    #[error("layout must contain exactly one goal, found {0}")]
    GoalCount(usize),
    #[error("door at {pos} has no id")]
    DoorWithoutId { pos: Pos },
    #[error("door `{0}` has no requirement entry")]
    MissingDoorRule(String),
    #[error("door requirement `{0}` does not match any door in the layout")]
    UnknownDoor(String),
    #[error("door id `{0}` is used by more than one door")]
    DuplicateDoorId(String),
    #[error("locked door `{door}` needs {needed} {color} key(s) but the layout has {found}")]
    MissingKeys {
        door: String,
        color: Color,
        needed: u32,
        found: usize,
    },
    #[error("invalid dynamics: {0}")]
    Dynamics(String),
    #[error("max_steps must be positive")]
    ZeroMaxSteps,
    #[error("no free cell available for {0}")]
    NoFreeCell(String),
}

/// One object placed in the layout. Doors carry an id keyed into
/// [`EnvironmentConfig::doors`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub kind: Kind,
    pub color: Color,
    pub x: usize,
    pub y: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl Placement {
    pub fn new(kind: Kind, color: Color, x: usize, y: usize) -> Self {
        Placement {
            kind,
            color,
            x,
            y,
            id: None,
        }
    }

    pub fn pos(&self) -> Pos {
        Pos::new(self.x, self.y)
    }

    fn describe(&self) -> String {
        match &self.id {
            Some(id) => format!("{} {:?} `{id}`", self.color, self.kind).to_lowercase(),
            None => format!("{} {:?}", self.color, self.kind).to_lowercase(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoorRule {
    pub key_color: Color,
    #[serde(default = "one")]
    pub keys_required: u32,
    #[serde(default = "yes")]
    pub locked: bool,
}

fn one() -> u32 {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AgentStart {
    Fixed {
        x: usize,
        y: usize,
        orientation: Orientation,
    },
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutPolicy {
    /// Every reset reproduces the configured layout exactly.
    #[default]
    Fixed,
    /// The goal is re-placed on a random free cell at every reset.
    RandomGoal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ObservationMode {
    /// The whole grid, symbolically encoded.
    #[default]
    Full,
    /// A `view`x`view` window with the agent at the bottom centre facing up.
    Egocentric { view: usize },
}

/// Inventory-dependent movement: faster when empty, slower when carrying.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Burdening {
    pub empty_forward_step: u32,
    pub laden_repetition: u32,
}

/// Every dynamics knob a novelty can turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicsParams {
    pub forward_step: u32,
    /// Consecutive issuances needed before an action takes effect; absent
    /// actions need one.
    pub action_repetition: BTreeMap<Action, u32>,
    /// Chebyshev reach of pickup and toggle.
    pub action_radius: u32,
    pub determinism_p: f64,
    pub color_allowlist: Option<BTreeSet<Color>>,
    pub lava_harmful: bool,
    pub burdening: Option<Burdening>,
    pub inventory_capacity: u32,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            forward_step: 1,
            action_repetition: BTreeMap::new(),
            action_radius: 1,
            determinism_p: 1.0,
            color_allowlist: None,
            lava_harmful: true,
            burdening: None,
            inventory_capacity: 1,
        }
    }
}

impl DynamicsParams {
    pub fn repetition(&self, action: Action) -> u32 {
        self.action_repetition.get(&action).copied().unwrap_or(1)
    }

    pub fn allows(&self, color: Color) -> bool {
        self.color_allowlist
            .as_ref()
            .is_none_or(|set| set.contains(&color))
    }

    pub fn is_deterministic(&self) -> bool {
        self.determinism_p >= 1.0
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Dynamics(msg));
        if self.forward_step < 1 {
            return bad("forward_step must be at least 1".into());
        }
        if let Some((a, k)) = self.action_repetition.iter().find(|(_, k)| **k < 1) {
            return bad(format!("repetition for {a} must be at least 1, got {k}"));
        }
        if !(self.determinism_p > 0.0 && self.determinism_p <= 1.0) {
            return bad(format!(
                "determinism_p must lie in (0, 1], got {}",
                self.determinism_p
            ));
        }
        if let Some(b) = self.burdening {
            if b.empty_forward_step < 1 || b.laden_repetition < 1 {
                return bad("burdening parameters must be at least 1".into());
            }
        }
        if self.inventory_capacity < 1 {
            return bad("inventory_capacity must be at least 1".into());
        }
        if self.color_allowlist.as_ref().is_some_and(|s| s.is_empty()) {
            return bad("color_allowlist must not be empty".into());
        }
        Ok(())
    }
}

/// Declarative description of a world and its dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    pub width: usize,
    pub height: usize,
    pub objects: Vec<Placement>,
    #[serde(default)]
    pub doors: BTreeMap<String, DoorRule>,
    pub agent_start: AgentStart,
    #[serde(default)]
    pub layout_policy: LayoutPolicy,
    pub max_steps: u32,
    #[serde(default)]
    pub dynamics: DynamicsParams,
    #[serde(default)]
    pub observation: ObservationMode,
}

impl EnvironmentConfig {
    /// An empty grid with the agent at a fixed start and `max_steps = 4·w·h`.
    pub fn empty(width: usize, height: usize, agent: (usize, usize, Orientation)) -> Self {
        EnvironmentConfig {
            width,
            height,
            objects: Vec::new(),
            doors: BTreeMap::new(),
            agent_start: AgentStart::Fixed {
                x: agent.0,
                y: agent.1,
                orientation: agent.2,
            },
            layout_policy: LayoutPolicy::Fixed,
            max_steps: default_max_steps(width, height),
            dynamics: DynamicsParams::default(),
            observation: ObservationMode::Full,
        }
    }

    pub fn with(mut self, kind: Kind, color: Color, x: usize, y: usize) -> Self {
        self.objects.push(Placement::new(kind, color, x, y));
        self
    }

    pub fn with_walls(mut self, cells: &[(usize, usize)]) -> Self {
        for &(x, y) in cells {
            self.objects
                .push(Placement::new(Kind::Wall, Color::Grey, x, y));
        }
        self
    }

    pub fn with_door(mut self, id: &str, color: Color, x: usize, y: usize, rule: DoorRule) -> Self {
        let mut p = Placement::new(Kind::Door, color, x, y);
        p.id = Some(id.to_string());
        self.objects.push(p);
        self.doors.insert(id.to_string(), rule);
        self
    }

    /// Adds walls along the border.
    pub fn with_perimeter(mut self) -> Self {
        let (w, h) = (self.width, self.height);
        for x in 0..w {
            for y in 0..h {
                if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                    self.objects
                        .push(Placement::new(Kind::Wall, Color::Grey, x, y));
                }
            }
        }
        self
    }

    pub fn object_at(&self, pos: Pos) -> Option<&Placement> {
        self.objects.iter().find(|p| p.pos() == pos)
    }

    pub fn goal(&self) -> Option<&Placement> {
        self.objects.iter().find(|p| p.kind == Kind::Goal)
    }

    pub fn door(&self, id: &str) -> Option<&Placement> {
        self.objects
            .iter()
            .find(|p| p.kind == Kind::Door && p.id.as_deref() == Some(id))
    }

    /// Door ids in row-major order of their placement.
    pub fn door_ids(&self) -> Vec<String> {
        let mut doors: Vec<&Placement> = self
            .objects
            .iter()
            .filter(|p| p.kind == Kind::Door)
            .collect();
        doors.sort_by_key(|p| (p.y, p.x));
        doors.iter().filter_map(|p| p.id.clone()).collect()
    }

    pub fn count(&self, kind: Kind, color: Color) -> usize {
        self.objects
            .iter()
            .filter(|p| p.kind == kind && p.color == color)
            .count()
    }

    pub fn contains_kind(&self, kind: Kind) -> bool {
        self.objects.iter().any(|p| p.kind == kind)
    }

    pub fn agent_cell(&self) -> Option<Pos> {
        match self.agent_start {
            AgentStart::Fixed { x, y, .. } => Some(Pos::new(x, y)),
            AgentStart::Random => None,
        }
    }

    pub fn in_bounds(&self, pos: Pos) -> bool {
        pos.x < self.width && pos.y < self.height
    }

    /// Cells with no object and not the fixed agent start, row-major.
    pub fn free_cells(&self) -> Vec<Pos> {
        let agent = self.agent_cell();
        let mut taken = vec![false; self.width * self.height];
        for p in &self.objects {
            if self.in_bounds(p.pos()) {
                taken[p.y * self.width + p.x] = true;
            }
        }
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| Pos::new(x, y)))
            .filter(|pos| !taken[pos.y * self.width + pos.x] && Some(*pos) != agent)
            .collect()
    }

    /// Observation grid shape as (rows, columns).
    pub fn observation_shape(&self) -> (usize, usize) {
        match self.observation {
            ObservationMode::Full => (self.height, self.width),
            ObservationMode::Egocentric { view } => (view, view),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let (w, h) = (self.width, self.height);
        if w == 0 || h == 0 {
            return Err(ConfigError::InvalidDimensions {
                width: w,
                height: h,
            });
        }
        if self.max_steps == 0 {
            return Err(ConfigError::ZeroMaxSteps);
        }
        self.dynamics.validate()?;
        if let ObservationMode::Egocentric { view } = self.observation {
            if view == 0 {
                return Err(ConfigError::Dynamics(
                    "egocentric view must be at least 1".into(),
                ));
            }
        }

        let mut occupant: Vec<Option<&Placement>> = vec![None; w * h];
        for p in &self.objects {
            if !self.in_bounds(p.pos()) {
                return Err(ConfigError::OutOfBounds {
                    what: p.describe(),
                    pos: p.pos(),
                    width: w,
                    height: h,
                });
            }
            let slot = &mut occupant[p.y * w + p.x];
            if let Some(first) = slot {
                return Err(ConfigError::Overlap {
                    pos: p.pos(),
                    first: first.describe(),
                    second: p.describe(),
                });
            }
            *slot = Some(p);
        }

        if let AgentStart::Fixed { x, y, .. } = self.agent_start {
            let pos = Pos::new(x, y);
            if !self.in_bounds(pos) {
                return Err(ConfigError::OutOfBounds {
                    what: "agent start".into(),
                    pos,
                    width: w,
                    height: h,
                });
            }
            if let Some(p) = occupant[y * w + x] {
                if p.kind != Kind::Floor {
                    return Err(ConfigError::Overlap {
                        pos,
                        first: p.describe(),
                        second: "agent start".into(),
                    });
                }
            }
        }

        let goals = self.objects.iter().filter(|p| p.kind == Kind::Goal).count();
        if goals != 1 {
            return Err(ConfigError::GoalCount(goals));
        }

        let mut seen = BTreeSet::new();
        for p in self.objects.iter().filter(|p| p.kind == Kind::Door) {
            let id =
                p.id.as_ref()
                    .ok_or(ConfigError::DoorWithoutId { pos: p.pos() })?;
            if !seen.insert(id.clone()) {
                return Err(ConfigError::DuplicateDoorId(id.clone()));
            }
            if !self.doors.contains_key(id) {
                return Err(ConfigError::MissingDoorRule(id.clone()));
            }
        }
        for (id, rule) in &self.doors {
            if !seen.contains(id) {
                return Err(ConfigError::UnknownDoor(id.clone()));
            }
            if rule.locked {
                let found = self.count(Kind::Key, rule.key_color);
                if rule.keys_required < 1 || found < rule.keys_required as usize {
                    return Err(ConfigError::MissingKeys {
                        door: id.clone(),
                        color: rule.key_color,
                        needed: rule.keys_required.max(1),
                        found,
                    });
                }
            }
        }

        let needs_free = matches!(self.agent_start, AgentStart::Random)
            || self.layout_policy == LayoutPolicy::RandomGoal;
        if needs_free && self.free_cells().is_empty() {
            return Err(ConfigError::NoFreeCell("random placement".into()));
        }
        Ok(())
    }
}

pub(crate) fn default_max_steps(width: usize, height: usize) -> u32 {
    (4 * width * height) as u32
}
