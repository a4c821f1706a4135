//! Character-map layouts.
//!
//! A layout is a whitespace-separated token grid, one row per line:
//!
//! | token  | meaning                                   |
//! |--------|-------------------------------------------|
//! | `#`    | wall                                      |
//! | `.`    | empty cell                                |
//! | `@`    | agent start (empty cell)                  |
//! | `G`    | goal                                      |
//! | `L`    | lava                                      |
//! | `K<c>` | key of color `c`                          |
//! | `D<c>` | locked door, opened by a key of color `c` |
//! | `d<c>` | unlocked closed door of color `c`         |
//! | `B<c>` | ball                                      |
//! | `F<c>` | floor tile                                |
//!
//! Color letters: `r`ed, `g`reen, `b`lue, `p`urple, `y`ellow, gr`e`y. Doors
//! get ids `door0`, `door1`, ... in row-major order; `[[doors]]` entries in the
//! surrounding TOML document override their requirements.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{
    default_max_steps, AgentStart, Color, ConfigError, DoorRule, DynamicsParams, EnvironmentConfig,
    Kind, LayoutPolicy, ObservationMode, Orientation, Placement,
};

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("row {row}, column {col}: unrecognized token `{token}`")]
    BadToken {
        row: usize,
        col: usize,
        token: String,
    },
    #[error("row {row} has {found} cells, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("layout has no rows")]
    Empty,
    #[error("layout must mark exactly one agent start with `@` (found {0}), or set random_agent")]
    AgentCount(usize),
    #[error("door override `{0}` names no door in the grid")]
    UnknownDoor(String),
    #[error("unknown layout `{name}`{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownLayout {
        name: String,
        suggestion: Option<String>,
    },
    #[error("invalid layout document: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorOverride {
    pub id: String,
    pub key_color: Option<Color>,
    pub keys_required: Option<u32>,
    pub locked: Option<bool>,
}

/// A layout document: the token grid plus optional settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub grid: String,
    #[serde(default = "default_dir")]
    pub agent_dir: Orientation,
    #[serde(default)]
    pub random_agent: bool,
    #[serde(default)]
    pub max_steps: Option<u32>,
    #[serde(default)]
    pub layout_policy: LayoutPolicy,
    #[serde(default)]
    pub observation: ObservationMode,
    #[serde(default)]
    pub dynamics: DynamicsParams,
    #[serde(default)]
    pub doors: Vec<DoorOverride>,
}

fn default_dir() -> Orientation {
    Orientation::East
}

impl LayoutSpec {
    pub fn from_toml(text: &str) -> Result<Self, LayoutError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_config(&self) -> Result<EnvironmentConfig, LayoutError> {
        let parsed = parse_grid(&self.grid)?;
        let agent_start = match (self.random_agent, parsed.agents.as_slice()) {
            (true, []) => AgentStart::Random,
            (false, [(x, y)]) => AgentStart::Fixed {
                x: *x,
                y: *y,
                orientation: self.agent_dir,
            },
            (_, agents) => return Err(LayoutError::AgentCount(agents.len())),
        };
        let mut cfg = EnvironmentConfig {
            width: parsed.width,
            height: parsed.height,
            objects: parsed.objects,
            doors: parsed.doors.into_iter().collect(),
            agent_start,
            layout_policy: self.layout_policy,
            max_steps: self
                .max_steps
                .unwrap_or_else(|| default_max_steps(parsed.width, parsed.height)),
            dynamics: self.dynamics.clone(),
            observation: self.observation,
        };
        for o in &self.doors {
            let rule = cfg
                .doors
                .get_mut(&o.id)
                .ok_or_else(|| LayoutError::UnknownDoor(o.id.clone()))?;
            if let Some(c) = o.key_color {
                rule.key_color = c;
            }
            if let Some(n) = o.keys_required {
                rule.keys_required = n;
            }
            if let Some(l) = o.locked {
                rule.locked = l;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

struct ParsedGrid {
    width: usize,
    height: usize,
    objects: Vec<Placement>,
    doors: Vec<(String, DoorRule)>,
    agents: Vec<(usize, usize)>,
}

fn color_letter(c: char) -> Option<Color> {
    Some(match c {
        'r' => Color::Red,
        'g' => Color::Green,
        'b' => Color::Blue,
        'p' => Color::Purple,
        'y' => Color::Yellow,
        'e' => Color::Grey,
        _ => return None,
    })
}

fn parse_grid(text: &str) -> Result<ParsedGrid, LayoutError> {
    let rows: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>())
        .filter(|r| !r.is_empty())
        .collect();
    let width = rows.first().ok_or(LayoutError::Empty)?.len();
    let mut grid = ParsedGrid {
        width,
        height: rows.len(),
        objects: Vec::new(),
        doors: Vec::new(),
        agents: Vec::new(),
    };
    for (y, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(LayoutError::Ragged {
                row: y,
                found: row.len(),
                expected: width,
            });
        }
        for (x, token) in row.iter().enumerate() {
            let bad = || LayoutError::BadToken {
                row: y,
                col: x,
                token: token.to_string(),
            };
            let mut chars = token.chars();
            let head = chars.next().ok_or_else(bad)?;
            let color = match chars.next() {
                Some(c) => Some(color_letter(c).ok_or_else(bad)?),
                None => None,
            };
            if chars.next().is_some() {
                return Err(bad());
            }
            let simple = |kind, default| Placement::new(kind, color.unwrap_or(default), x, y);
            match (head, color) {
                ('.', None) => {}
                ('@', None) => grid.agents.push((x, y)),
                ('#', None) => grid.objects.push(simple(Kind::Wall, Color::Grey)),
                ('G', None) => grid.objects.push(simple(Kind::Goal, Color::Green)),
                ('L', None) => grid.objects.push(simple(Kind::Lava, Color::Red)),
                ('K', Some(_)) => grid.objects.push(simple(Kind::Key, Color::Yellow)),
                ('B', Some(_)) => grid.objects.push(simple(Kind::Ball, Color::Blue)),
                ('F', Some(_)) => grid.objects.push(simple(Kind::Floor, Color::Grey)),
                ('D' | 'd', Some(c)) => {
                    let id = format!("door{}", grid.doors.len());
                    let mut p = Placement::new(Kind::Door, c, x, y);
                    p.id = Some(id.clone());
                    grid.objects.push(p);
                    grid.doors.push((
                        id,
                        DoorRule {
                            key_color: c,
                            keys_required: 1,
                            locked: head == 'D',
                        },
                    ));
                }
                _ => return Err(bad()),
            }
        }
    }
    Ok(grid)
}

/// Parses a layout TOML document into a validated config.
pub fn parse_layout(text: &str) -> Result<EnvironmentConfig, LayoutError> {
    LayoutSpec::from_toml(text)?.to_config()
}

const SHIPPED: &[(&str, &str)] = &[
    ("doorkey-6x6", include_str!("../layouts/doorkey-6x6.toml")),
    (
        "unlocked-door-6x6",
        include_str!("../layouts/unlocked-door-6x6.toml"),
    ),
    ("doorkey-4x4", include_str!("../layouts/doorkey-4x4.toml")),
    ("lava-3x3", include_str!("../layouts/lava-3x3.toml")),
    ("open-5x5", include_str!("../layouts/open-5x5.toml")),
    (
        "lava-bridge-7x5",
        include_str!("../layouts/lava-bridge-7x5.toml"),
    ),
    ("numkeys-6x6", include_str!("../layouts/numkeys-6x6.toml")),
    ("alcove-6x5", include_str!("../layouts/alcove-6x5.toml")),
    (
        "twin-doors-7x5",
        include_str!("../layouts/twin-doors-7x5.toml"),
    ),
    (
        "burden-corridor-10x4",
        include_str!("../layouts/burden-corridor-10x4.toml"),
    ),
];

pub fn shipped_names() -> impl Iterator<Item = &'static str> {
    SHIPPED.iter().map(|(n, _)| *n)
}

/// Loads one of the layouts bundled with the crate.
pub fn shipped(name: &str) -> Result<EnvironmentConfig, LayoutError> {
    match SHIPPED.iter().find(|(n, _)| *n == name) {
        Some((_, text)) => parse_layout(text),
        None => Err(LayoutError::UnknownLayout {
            name: name.to_string(),
            suggestion: crate::nearest(name, shipped_names()),
        }),
    }
}

/// Every bundled layout, by name.
pub fn all_shipped() -> Vec<(&'static str, EnvironmentConfig)> {
    SHIPPED
        .iter()
        .map(|(n, text)| (*n, parse_layout(text).expect("bundled layouts are valid")))
        .collect()
}
