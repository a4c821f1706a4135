use super::config::ObservationMode;
use super::world::GridWorld;
use super::{Color, Kind, Pos};

/// Channels per cell: (kind code, color code, state code).
pub const CELL_CHANNELS: usize = 3;
/// One inventory counter per (kind, color) pair.
pub const INVENTORY_SLOTS: usize = Kind::ALL.len() * Color::ALL.len();

const EMPTY: [u8; 3] = [1, 0, 0];
const UNSEEN: [u8; 3] = [0, 0, 0];
const AGENT: u8 = 10;

/// Symbolic observation. Shape depends only on the config's dimensions and
/// observation mode, never on world contents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observation {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows * cols` cells.
    pub cells: Vec<[u8; CELL_CHANNELS]>,
    pub orientation: u8,
    pub inventory: [u8; INVENTORY_SLOTS],
}

impl Observation {
    pub fn encode(world: &GridWorld) -> Observation {
        let agent = world.agent();
        let mut inventory = [0u8; INVENTORY_SLOTS];
        for obj in &agent.inventory {
            inventory[obj.kind_slot()] += 1;
        }
        let code_at = |pos: Pos| -> [u8; 3] {
            if pos == agent.pos {
                return [AGENT, 0, agent.orientation.code()];
            }
            match world.object_at(pos) {
                Some(obj) => [
                    obj.kind.code(),
                    obj.color.code(),
                    obj.door.map_or(0, |d| d.code()),
                ],
                None => EMPTY,
            }
        };

        let (rows, cols, cells) = match world.config().observation {
            ObservationMode::Full => {
                let (w, h) = (world.width(), world.height());
                let cells = (0..h)
                    .flat_map(|y| (0..w).map(move |x| Pos::new(x, y)))
                    .map(code_at)
                    .collect();
                (h, w, cells)
            }
            ObservationMode::Egocentric { view } => {
                let fwd = agent.orientation.delta();
                let side = agent.orientation.right().delta();
                let mut cells = Vec::with_capacity(view * view);
                for r in 0..view {
                    for c in 0..view {
                        let f = (view - 1 - r) as i64;
                        let l = c as i64 - (view / 2) as i64;
                        let x = agent.pos.x as i64 + fwd.0 * f + side.0 * l;
                        let y = agent.pos.y as i64 + fwd.1 * f + side.1 * l;
                        let inside = x >= 0
                            && y >= 0
                            && (x as usize) < world.width()
                            && (y as usize) < world.height();
                        cells.push(if inside {
                            code_at(Pos::new(x as usize, y as usize))
                        } else {
                            UNSEEN
                        });
                    }
                }
                (view, view, cells)
            }
        };

        Observation {
            rows,
            cols,
            cells,
            orientation: agent.orientation.code(),
            inventory,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn cell(&self, row: usize, col: usize) -> [u8; CELL_CHANNELS] {
        self.cells[row * self.cols + col]
    }

    /// Canonical byte serialization, stable across runs and platforms.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(4 + self.cells.len() * CELL_CHANNELS + 1 + INVENTORY_SLOTS);
        out.extend_from_slice(&(self.rows as u16).to_le_bytes());
        out.extend_from_slice(&(self.cols as u16).to_le_bytes());
        for c in &self.cells {
            out.extend_from_slice(c);
        }
        out.push(self.orientation);
        out.extend_from_slice(&self.inventory);
        out
    }
}

impl super::WorldObject {
    fn kind_slot(&self) -> usize {
        self.kind.index() * Color::ALL.len() + self.color as usize
    }
}
