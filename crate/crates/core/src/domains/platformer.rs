//! A small deterministic side-scrolling platformer with one enemy.
//!
//! The avatar wins by reaching the rightmost column. Landing on the enemy
//! from above kills it; walking into it kills the avatar.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bspace::{BehaviourSpace, BspaceError, FeatureConfig, LtlValueConfig, SpaceConfig};
use crate::ltl::{Alphabet, Valuation};
use crate::search::{bind_sim, SimTrace, Simulator};

pub const LEVEL: &str = include_str!("../../data/platformer-level.txt");
pub const DEFAULT_BUDGET: usize = 40;
pub const JUMP_VELOCITY: i32 = -3;
pub const KILLED: &str = "killed";
pub const AVOIDED: &str = "avoided";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlatformerError {
    #[error("level: {0}")]
    Level(String),
    #[error("the avatar died")]
    AvatarDied,
    #[error("unknown action `{0}`")]
    UnknownAction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Left,
    Right,
    Jump,
    Noop,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Right, Move::Jump, Move::Left, Move::Noop];
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::Left => "left",
            Move::Right => "right",
            Move::Jump => "jump",
            Move::Noop => "noop",
        })
    }
}

impl FromStr for Move {
    type Err = PlatformerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "left" => Ok(Move::Left),
            "right" => Ok(Move::Right),
            "jump" => Ok(Move::Jump),
            "noop" => Ok(Move::Noop),
            other => Err(PlatformerError::UnknownAction(other.to_string())),
        }
    }
}

/// Static level geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    width: i32,
    height: i32,
    solid: Vec<bool>,
    start: (i32, i32),
    enemy: (i32, i32),
}

impl Level {
    /// `.` air, `#` solid, `M` avatar start, `E` enemy.
    pub fn parse(text: &str) -> Result<Self, PlatformerError> {
        let rows: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
        let width = rows.first().map_or(0, |r| r.chars().count());
        if width == 0 {
            return Err(PlatformerError::Level("empty level".into()));
        }
        let (mut start, mut enemy) = (None, None);
        let mut solid = Vec::with_capacity(width * rows.len());
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(PlatformerError::Level(format!("row {y} is not {width} wide")));
            }
            for (x, c) in row.chars().enumerate() {
                let at = Some((x as i32, y as i32));
                match c {
                    '.' => {}
                    '#' => {}
                    'M' if start.is_none() => start = at,
                    'E' if enemy.is_none() => enemy = at,
                    'M' | 'E' => return Err(PlatformerError::Level(format!("duplicate `{c}`"))),
                    _ => return Err(PlatformerError::Level(format!("unknown tile `{c}`"))),
                }
                solid.push(c == '#');
            }
        }
        Ok(Level {
            width: width as i32,
            height: rows.len() as i32,
            solid,
            start: start.ok_or_else(|| PlatformerError::Level("no `M` start".into()))?,
            enemy: enemy.ok_or_else(|| PlatformerError::Level("no `E` enemy".into()))?,
        })
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn enemy(&self) -> (i32, i32) {
        self.enemy
    }

    /// Out-of-bounds cells count as solid, except below the floor.
    pub fn is_solid(&self, x: i32, y: i32) -> bool {
        if x < 0 || x >= self.width || y < 0 {
            return true;
        }
        if y >= self.height {
            return false;
        }
        self.solid[(y * self.width + x) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlatformerState {
    pub x: i32,
    pub y: i32,
    pub vy: i32,
    pub enemy_x: i32,
    pub enemy_alive: bool,
    pub killed: bool,
    pub tick: usize,
}

impl PlatformerState {
    pub fn on_ground(&self, level: &Level) -> bool {
        level.is_solid(self.x, self.y + 1)
    }
}

pub fn initial_state(level: &Level) -> PlatformerState {
    PlatformerState {
        x: level.start.0,
        y: level.start.1,
        vy: 0,
        enemy_x: level.enemy.0,
        enemy_alive: true,
        killed: false,
        tick: 0,
    }
}

/// One tick: horizontal move, then jump impulse or gravity.
pub fn platformer_step(
    level: &Level,
    state: &PlatformerState,
    action: Move,
) -> Result<PlatformerState, PlatformerError> {
    let mut s = *state;
    s.tick += 1;
    let enemy_at = |s: &PlatformerState, x: i32, y: i32| s.enemy_alive && (x, y) == (s.enemy_x, level.enemy.1);

    let dx = match action {
        Move::Left => -1,
        Move::Right => 1,
        Move::Jump | Move::Noop => 0,
    };
    if dx != 0 && !level.is_solid(s.x + dx, s.y) {
        if enemy_at(&s, s.x + dx, s.y) {
            return Err(PlatformerError::AvatarDied);
        }
        s.x += dx;
    }

    if action == Move::Jump && state.on_ground(level) && state.vy == 0 {
        s.vy = JUMP_VELOCITY;
    }
    if s.vy < 0 {
        if level.is_solid(s.x, s.y - 1) {
            s.vy = 0;
        } else {
            s.y -= 1;
            s.vy += 1;
        }
    } else if !level.is_solid(s.x, s.y + 1) {
        if enemy_at(&s, s.x, s.y + 1) {
            s.enemy_alive = false;
            s.killed = true;
        }
        s.y += 1;
        if s.y >= level.height {
            return Err(PlatformerError::AvatarDied);
        }
    }
    Ok(s)
}

pub type PlatformerTrace = SimTrace<Move, PlatformerState>;

pub struct Platformer {
    level: Level,
    budget: usize,
    alphabet: Alphabet,
}

impl Platformer {
    pub fn new(level: Level, budget: usize) -> Self {
        Platformer {
            level,
            budget,
            alphabet: Alphabet::new([KILLED, AVOIDED]),
        }
    }

    pub fn bundled() -> Self {
        Platformer::new(Level::parse(LEVEL).expect("bundled level"), DEFAULT_BUDGET)
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn replay(&self, actions: &[Move]) -> Result<PlatformerTrace, PlatformerError> {
        let mut states = vec![self.initial()];
        for &a in actions {
            let next = platformer_step(&self.level, states.last().unwrap(), a)?;
            states.push(next);
        }
        let valuations = states.iter().map(|s| self.propositions(s)).collect();
        Ok(SimTrace {
            plan: actions.to_vec(),
            states,
            valuations,
        })
    }

    /// The level with the avatar path overlaid: `*` visited cells, `M` the
    /// start, `@` the final position, `E`/`x` the live/dead enemy.
    pub fn render(&self, trace: &PlatformerTrace) -> String {
        let (w, h) = (self.level.width, self.level.height);
        let mut grid: Vec<Vec<char>> = (0..h)
            .map(|y| (0..w).map(|x| if self.level.is_solid(x, y) { '#' } else { '.' }).collect())
            .collect();
        let last = trace.final_state();
        let (ex, ey) = self.level.enemy;
        grid[ey as usize][ex as usize] = if last.enemy_alive { 'E' } else { 'x' };
        for s in &trace.states {
            if (0..h).contains(&s.y) {
                grid[s.y as usize][s.x as usize] = '*';
            }
        }
        let first = &trace.states[0];
        grid[first.y as usize][first.x as usize] = 'M';
        if (0..h).contains(&last.y) {
            grid[last.y as usize][last.x as usize] = '@';
        }
        grid.into_iter().map(|r| r.into_iter().collect::<String>() + "\n").collect()
    }
}

impl Simulator for Platformer {
    type State = PlatformerState;
    type Action = Move;
    type Digest = (i32, i32, i32, bool, bool);

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn initial(&self) -> PlatformerState {
        initial_state(&self.level)
    }

    fn legal_actions(&self, state: &PlatformerState) -> Vec<Move> {
        Move::ALL
            .into_iter()
            .filter(|&m| m != Move::Jump || (state.on_ground(&self.level) && state.vy == 0))
            .collect()
    }

    fn step(&self, state: &PlatformerState, action: &Move) -> Option<PlatformerState> {
        platformer_step(&self.level, state, *action).ok()
    }

    fn propositions(&self, state: &PlatformerState) -> Valuation {
        Valuation::from_bools(vec![state.killed, !state.killed])
    }

    fn is_goal(&self, state: &PlatformerState) -> bool {
        state.x == self.level.width - 1
    }

    fn budget(&self) -> Option<usize> {
        Some(self.budget)
    }

    fn digest(&self, s: &PlatformerState) -> Self::Digest {
        (s.x, s.y, s.vy, s.enemy_alive, s.killed)
    }
}

/// The enemy-engagement space: `killed` is `FG killed`, `avoided` is
/// `G avoided`.
pub fn default_space_config() -> SpaceConfig {
    SpaceConfig {
        features: vec![FeatureConfig::Ltl {
            name: "enemy-engagement".into(),
            values: vec![
                LtlValueConfig {
                    label: KILLED.into(),
                    formula: "F G killed".into(),
                },
                LtlValueConfig {
                    label: AVOIDED.into(),
                    formula: "G avoided".into(),
                },
            ],
        }],
    }
}

pub fn bind_space(sim: &Platformer, config: &SpaceConfig) -> Result<BehaviourSpace<PlatformerTrace>, BspaceError> {
    bind_sim(config, sim.alphabet(), &Default::default())
}
