use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::config::{AgentStart, ConfigError, EnvironmentConfig, LayoutPolicy};
use super::observation::Observation;
use super::{Action, Color, DoorState, Kind, Orientation, Pos, WorldObject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("step called after the episode ended; call reset first")]
    EpisodeOver,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    pub pos: Pos,
    pub orientation: Orientation,
    /// Carried objects, most recently picked last.
    pub inventory: Vec<WorldObject>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    /// The action that was actually executed after any slip.
    pub executed: Action,
    pub slipped: bool,
}

/// Live simulation state.
///
/// A world owns its random stream: slips and per-episode layout draws all come
/// from it, so a seeded world replays identically for the same action sequence.
#[derive(Debug, Clone)]
pub struct GridWorld {
    config: EnvironmentConfig,
    cells: Vec<Option<WorldObject>>,
    agent: AgentState,
    step_count: u32,
    rng: ChaCha8Rng,
    /// Partially accumulated repetition: (action, consecutive issuances so far).
    ledger: Option<(Action, u32)>,
    done: bool,
}

/// Realizes `config` into a fresh world.
pub fn generate_grid(
    config: &EnvironmentConfig,
    rng: ChaCha8Rng,
) -> Result<GridWorld, ConfigError> {
    config.validate()?;
    let mut world = GridWorld {
        config: config.clone(),
        cells: Vec::new(),
        agent: AgentState {
            pos: Pos::new(0, 0),
            orientation: Orientation::East,
            inventory: Vec::new(),
        },
        step_count: 0,
        rng,
        ledger: None,
        done: false,
    };
    world.build();
    Ok(world)
}

impl GridWorld {
    fn build(&mut self) {
        let cfg = &self.config;
        let (w, h) = (cfg.width, cfg.height);
        let mut cells: Vec<Option<WorldObject>> = vec![None; w * h];
        for p in &cfg.objects {
            let obj = match p.kind {
                Kind::Door => {
                    let rule = p.id.as_ref().and_then(|id| cfg.doors.get(id)).copied();
                    // validate() guarantees the rule exists
                    let rule = rule.expect("door rule");
                    WorldObject::door(
                        p.color,
                        DoorState {
                            locked: rule.locked,
                            open: false,
                            key_color: rule.key_color,
                            keys_required: rule.keys_required,
                        },
                    )
                }
                kind => WorldObject::new(kind, p.color),
            };
            cells[p.y * w + p.x] = Some(obj);
        }

        let agent_cell = cfg.agent_cell();
        let is_free = |cells: &[Option<WorldObject>], pos: Pos| {
            cells[pos.y * w + pos.x].is_none() && Some(pos) != agent_cell
        };

        if cfg.layout_policy == LayoutPolicy::RandomGoal {
            let goal = cfg.goal().expect("validated goal");
            let (gpos, gcolor) = (goal.pos(), goal.color);
            cells[gpos.y * w + gpos.x] = None;
            let free: Vec<Pos> = all_cells(w, h).filter(|p| is_free(&cells, *p)).collect();
            let pick = free[self.rng.random_range(0..free.len())];
            cells[pick.y * w + pick.x] = Some(WorldObject::new(Kind::Goal, gcolor));
        }

        let (pos, orientation) = match cfg.agent_start {
            AgentStart::Fixed { x, y, orientation } => (Pos::new(x, y), orientation),
            AgentStart::Random => {
                let free: Vec<Pos> = all_cells(w, h)
                    .filter(|p| cells[p.y * w + p.x].is_none())
                    .collect();
                let pick = free[self.rng.random_range(0..free.len())];
                let dir = Orientation::ALL[self.rng.random_range(0..4)];
                (pick, dir)
            }
        };

        self.cells = cells;
        self.agent = AgentState {
            pos,
            orientation,
            inventory: Vec::new(),
        };
        self.step_count = 0;
        self.ledger = None;
        self.done = false;
    }

    /// Regenerates the layout from the config's layout policy.
    pub fn reset(&mut self) -> Observation {
        self.build();
        self.observe()
    }

    /// Swaps in a new config and regenerates from it. The random stream carries over.
    pub fn reset_with(&mut self, config: &EnvironmentConfig) -> Result<Observation, ConfigError> {
        config.validate()?;
        self.config = config.clone();
        Ok(self.reset())
    }

    pub fn observe(&self) -> Observation {
        Observation::encode(self)
    }

    pub fn config(&self) -> &EnvironmentConfig {
        &self.config
    }

    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn height(&self) -> usize {
        self.config.height
    }

    pub fn agent(&self) -> &AgentState {
        &self.agent
    }

    pub fn step_count(&self) -> u32 {
        self.step_count
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn ledger(&self) -> Option<(Action, u32)> {
        self.ledger
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    pub fn into_rng(self) -> ChaCha8Rng {
        self.rng
    }

    pub fn cells(&self) -> &[Option<WorldObject>] {
        &self.cells
    }

    pub fn object_at(&self, pos: Pos) -> Option<&WorldObject> {
        if pos.x < self.width() && pos.y < self.height() {
            self.cells[pos.y * self.width() + pos.x].as_ref()
        } else {
            None
        }
    }

    pub fn at_goal(&self) -> bool {
        self.object_at(self.agent.pos)
            .is_some_and(|o| o.kind == Kind::Goal)
    }

    fn idx(&self, pos: Pos) -> Option<usize> {
        (pos.x < self.width() && pos.y < self.height()).then(|| pos.y * self.width() + pos.x)
    }

    /// Advances one command. Every call costs one step regardless of slips or
    /// repetition gating.
    pub fn step(&mut self, action: Action) -> Result<StepResult, StepError> {
        if self.done {
            return Err(StepError::EpisodeOver);
        }
        self.step_count += 1;

        let p = self.config.dynamics.determinism_p;
        let (executed, slipped) = if p < 1.0 && self.rng.random::<f64>() >= p {
            (
                Action::MOVEMENT[self.rng.random_range(0..Action::MOVEMENT.len())],
                true,
            )
        } else {
            (action, false)
        };

        let required = self.required_repetitions(executed);
        let issued = match self.ledger {
            Some((a, n)) if a == executed => n + 1,
            _ => 1,
        };
        let (reward, terminated) = if issued >= required {
            self.ledger = None;
            self.apply(executed)
        } else {
            self.ledger = Some((executed, issued));
            (0.0, false)
        };

        let truncated = !terminated && self.step_count >= self.config.max_steps;
        self.done = terminated || truncated;
        Ok(StepResult {
            observation: self.observe(),
            reward,
            terminated,
            truncated,
            executed,
            slipped,
        })
    }

    fn required_repetitions(&self, action: Action) -> u32 {
        let dynamics = &self.config.dynamics;
        let base = dynamics.repetition(action);
        match dynamics.burdening {
            Some(b) if action == Action::Forward && !self.agent.inventory.is_empty() => {
                base * b.laden_repetition
            }
            _ => base,
        }
    }

    fn goal_reward(&self) -> f64 {
        1.0 - 0.9 * (self.step_count as f64 / self.config.max_steps as f64)
    }

    fn apply(&mut self, action: Action) -> (f64, bool) {
        match action {
            Action::TurnLeft => self.agent.orientation = self.agent.orientation.left(),
            Action::TurnRight => self.agent.orientation = self.agent.orientation.right(),
            Action::Forward => return self.forward(),
            Action::Pickup => self.pickup(),
            Action::Drop => self.drop_carried(),
            Action::Toggle => self.toggle(),
            Action::Done => {}
        }
        (0.0, false)
    }

    fn forward(&mut self) -> (f64, bool) {
        let dynamics = &self.config.dynamics;
        let cells = match dynamics.burdening {
            Some(b) if self.agent.inventory.is_empty() => b.empty_forward_step,
            _ => dynamics.forward_step,
        };
        let lava_harmful = dynamics.lava_harmful;
        for _ in 0..cells {
            let Some(next) = self.agent.pos.offset(self.agent.orientation, 1) else {
                break;
            };
            let Some(i) = self.idx(next) else { break };
            if self.cells[i].is_some_and(|o| !o.is_traversable()) {
                break;
            }
            self.agent.pos = next;
            match self.cells[i].map(|o| o.kind) {
                Some(Kind::Goal) => return (self.goal_reward(), true),
                Some(Kind::Lava) if lava_harmful => return (0.0, true),
                _ => {}
            }
        }
        (0.0, false)
    }

    /// Nearest object within `action_radius` in the cone the agent faces.
    ///
    /// A cell at `f` cells ahead and `l` cells sideways is a candidate when
    /// `|l| < f <= radius`; its Chebyshev distance is then `f`. Radius 1 is
    /// exactly the faced cell. Ties go to the first cell in row-major order.
    pub fn interaction_target(&self, eligible: impl Fn(&WorldObject) -> bool) -> Option<Pos> {
        let radius = self.config.dynamics.action_radius as i64;
        let fwd = self.agent.orientation;
        let side = fwd.right();
        for f in 1..=radius {
            let mut best: Option<Pos> = None;
            for l in -(f - 1)..=(f - 1) {
                let (fx, fy) = fwd.delta();
                let (sx, sy) = side.delta();
                let x = self.agent.pos.x as i64 + fx * f + sx * l;
                let y = self.agent.pos.y as i64 + fy * f + sy * l;
                if x < 0 || y < 0 {
                    continue;
                }
                let pos = Pos::new(x as usize, y as usize);
                let Some(obj) = self.object_at(pos) else {
                    continue;
                };
                if eligible(obj)
                    && self.config.dynamics.allows(obj.color)
                    && best.is_none_or(|b| (pos.y, pos.x) < (b.y, b.x))
                {
                    best = Some(pos);
                }
            }
            if best.is_some() {
                return best;
            }
        }
        None
    }

    fn pickup(&mut self) {
        if self.agent.inventory.len() >= self.config.dynamics.inventory_capacity as usize {
            return;
        }
        if let Some(pos) = self.interaction_target(|o| o.kind.is_portable()) {
            let i = self.idx(pos).expect("target in bounds");
            let obj = self.cells[i].take().expect("target present");
            self.agent.inventory.push(obj);
        }
    }

    fn drop_carried(&mut self) {
        if self.agent.inventory.is_empty() {
            return;
        }
        let Some(front) = self.agent.pos.offset(self.agent.orientation, 1) else {
            return;
        };
        if let Some(i) = self.idx(front) {
            if self.cells[i].is_none() {
                self.cells[i] = self.agent.inventory.pop();
            }
        }
    }

    fn toggle(&mut self) {
        let Some(pos) = self.interaction_target(|o| o.kind == Kind::Door) else {
            return;
        };
        let i = self.idx(pos).expect("target in bounds");
        let held = |color: Color| {
            self.agent
                .inventory
                .iter()
                .filter(|o| o.kind == Kind::Key && o.color == color)
                .count() as u32
        };
        let Some(mut state) = self.cells[i].and_then(|o| o.door) else {
            return;
        };
        if state.locked {
            if held(state.key_color) >= state.keys_required {
                state.locked = false;
                state.open = true;
            }
        } else {
            state.open = !state.open;
        }
        if let Some(obj) = self.cells[i].as_mut() {
            obj.door = Some(state);
        }
    }
}

fn all_cells(w: usize, h: usize) -> impl Iterator<Item = Pos> {
    (0..h).flat_map(move |y| (0..w).map(move |x| Pos::new(x, y)))
}
