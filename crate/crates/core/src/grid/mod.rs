//! Grid-world dynamics: objects, configs, the live world and its observations.

mod config;
mod observation;
mod world;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub(crate) use config::default_max_steps;
pub use config::{
    AgentStart, Burdening, ConfigError, DoorRule, DynamicsParams, EnvironmentConfig, LayoutPolicy,
    ObservationMode, Placement,
};
pub use observation::{Observation, CELL_CHANNELS, INVENTORY_SLOTS};
pub use world::{generate_grid, AgentState, GridWorld, StepError, StepResult};

/// Object kinds that can occupy a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Wall,
    Floor,
    Door,
    Key,
    Goal,
    Lava,
    Ball,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Wall,
        Kind::Floor,
        Kind::Door,
        Kind::Key,
        Kind::Goal,
        Kind::Lava,
        Kind::Ball,
    ];

    /// Symbolic code used in observations. Values follow the usual MiniGrid
    /// object indices so encoded grids line up with existing tooling.
    pub fn code(self) -> u8 {
        match self {
            Kind::Wall => 2,
            Kind::Floor => 3,
            Kind::Door => 4,
            Kind::Key => 5,
            Kind::Ball => 6,
            Kind::Goal => 8,
            Kind::Lava => 9,
        }
    }

    /// Objects the agent can carry.
    pub fn is_portable(self) -> bool {
        matches!(self, Kind::Key | Kind::Ball)
    }

    fn index(self) -> usize {
        Kind::ALL.iter().position(|k| *k == self).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Green,
    Blue,
    Purple,
    Yellow,
    Grey,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Purple,
        Color::Yellow,
        Color::Grey,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Purple => "purple",
            Color::Yellow => "yellow",
            Color::Grey => "grey",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::ALL
            .into_iter()
            .find(|c| {
                c.name().eq_ignore_ascii_case(s)
                    || (s.eq_ignore_ascii_case("gray") && *c == Color::Grey)
            })
            .ok_or_else(|| format!("unknown color `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    East,
    South,
    West,
    North,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [
        Orientation::East,
        Orientation::South,
        Orientation::West,
        Orientation::North,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn delta(self) -> (i64, i64) {
        match self {
            Orientation::East => (1, 0),
            Orientation::South => (0, 1),
            Orientation::West => (-1, 0),
            Orientation::North => (0, -1),
        }
    }

    pub fn right(self) -> Self {
        Orientation::ALL[(self as usize + 1) % 4]
    }

    pub fn left(self) -> Self {
        Orientation::ALL[(self as usize + 3) % 4]
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "east" | "e" | "right" => Ok(Orientation::East),
            "south" | "s" | "down" => Ok(Orientation::South),
            "west" | "w" | "left" => Ok(Orientation::West),
            "north" | "n" | "up" => Ok(Orientation::North),
            _ => Err(format!("unknown orientation `{s}`")),
        }
    }
}

/// The fixed seven-command action set. Novelties change what actions do,
/// never how many there are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    TurnLeft,
    TurnRight,
    Forward,
    Pickup,
    Drop,
    Toggle,
    Done,
}

impl Action {
    pub const COUNT: usize = 7;

    pub const ALL: [Action; Action::COUNT] = [
        Action::TurnLeft,
        Action::TurnRight,
        Action::Forward,
        Action::Pickup,
        Action::Drop,
        Action::Toggle,
        Action::Done,
    ];

    /// Actions a slip may substitute for the commanded one.
    pub const MOVEMENT: [Action; 3] = [Action::TurnLeft, Action::TurnRight, Action::Forward];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::TurnLeft => "turn_left",
            Action::TurnRight => "turn_right",
            Action::Forward => "forward",
            Action::Pickup => "pickup",
            Action::Drop => "drop",
            Action::Toggle => "toggle",
            Action::Done => "done",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        let alias = match norm.as_str() {
            "left" => "turn_left",
            "right" => "turn_right",
            "pick" | "pick_up" => "pickup",
            other => other,
        };
        Action::ALL
            .into_iter()
            .find(|a| a.name() == alias)
            .ok_or_else(|| format!("unknown action `{s}`"))
    }
}

/// Lock state of a door. `open` implies traversable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DoorState {
    pub locked: bool,
    pub open: bool,
    pub key_color: Color,
    pub keys_required: u32,
}

impl DoorState {
    /// 0 open, 1 closed, 2 locked.
    pub fn code(&self) -> u8 {
        if self.open {
            0
        } else if self.locked {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WorldObject {
    pub kind: Kind,
    pub color: Color,
    pub door: Option<DoorState>,
}

impl WorldObject {
    pub fn new(kind: Kind, color: Color) -> Self {
        WorldObject {
            kind,
            color,
            door: None,
        }
    }

    pub fn door(color: Color, state: DoorState) -> Self {
        WorldObject {
            kind: Kind::Door,
            color,
            door: Some(state),
        }
    }

    /// Whether the agent may occupy this object's cell.
    pub fn is_traversable(&self) -> bool {
        match self.kind {
            Kind::Floor | Kind::Goal | Kind::Lava => true,
            Kind::Door => self.door.is_some_and(|d| d.open),
            Kind::Wall | Kind::Key | Kind::Ball => false,
        }
    }
}

/// Grid coordinates; `x` grows east, `y` grows south.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: usize,
    pub y: usize,
}

impl Pos {
    pub fn new(x: usize, y: usize) -> Self {
        Pos { x, y }
    }

    /// Cell reached by moving `n` cells along `dir`, if that is non-negative.
    pub fn offset(self, dir: Orientation, n: i64) -> Option<Pos> {
        let (dx, dy) = dir.delta();
        let x = self.x as i64 + dx * n;
        let y = self.y as i64 + dy * n;
        (x >= 0 && y >= 0).then(|| Pos::new(x as usize, y as usize))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}
