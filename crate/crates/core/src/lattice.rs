//! The oriented Manhattan lattice.
//!
//! Horizontal streets run east on even rows and west on odd rows; vertical
//! avenues run north on even columns and south on odd columns. Every vertex
//! therefore has exactly one legal horizontal step and one legal vertical
//! step.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex of `Z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
}

impl Vertex {
    pub const ORIGIN: Vertex = Vertex { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Vertex { x, y }
    }

    /// True when `x + y` is even.
    pub fn is_even(self) -> bool {
        (self.x + self.y).rem_euclid(2) == 0
    }

    pub fn step(self, d: Direction) -> Vertex {
        let (dx, dy) = d.delta();
        Vertex::new(self.x + dx, self.y + dy)
    }

    /// Manhattan distance to the origin.
    pub fn norm1(self) -> u32 {
        self.x.unsigned_abs() + self.y.unsigned_abs()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl From<(i32, i32)> for Vertex {
    fn from((x, y): (i32, i32)) -> Self {
        Vertex::new(x, y)
    }
}

/// Compass direction of a unit step. The integer tags are fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Direction {
    N = 0,
    E = 1,
    S = 2,
    W = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::N, Direction::E, Direction::S, Direction::W];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<Direction> {
        Direction::ALL.get(tag as usize).copied()
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::N => (0, 1),
            Direction::E => (1, 0),
            Direction::S => (0, -1),
            Direction::W => (-1, 0),
        }
    }

    pub fn from_delta(dx: i32, dy: i32) -> Option<Direction> {
        match (dx, dy) {
            (0, 1) => Some(Direction::N),
            (1, 0) => Some(Direction::E),
            (0, -1) => Some(Direction::S),
            (-1, 0) => Some(Direction::W),
            _ => None,
        }
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Direction::E | Direction::W)
    }

    pub fn is_vertical(self) -> bool {
        !self.is_horizontal()
    }

    pub fn opposite(self) -> Direction {
        Direction::ALL[(self.tag() as usize + 2) % 4]
    }

    pub fn letter(self) -> char {
        match self {
            Direction::N => 'N',
            Direction::E => 'E',
            Direction::S => 'S',
            Direction::W => 'W',
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// The legal horizontal step out of `v`: east on even rows, west on odd rows.
pub fn horizontal_step(v: Vertex) -> Direction {
    if v.y.rem_euclid(2) == 0 {
        Direction::E
    } else {
        Direction::W
    }
}

/// The legal vertical step out of `v`: north on even columns, south on odd.
pub fn vertical_step(v: Vertex) -> Direction {
    if v.x.rem_euclid(2) == 0 {
        Direction::N
    } else {
        Direction::S
    }
}

/// The two legal out-steps of `v`, horizontal first.
pub fn legal_steps(v: Vertex) -> [Direction; 2] {
    [horizontal_step(v), vertical_step(v)]
}

pub fn is_legal_step(from: Vertex, d: Direction) -> bool {
    if d.is_horizontal() {
        horizontal_step(from) == d
    } else {
        vertical_step(from) == d
    }
}

/// The step leaving `v` perpendicular to `incoming`.
pub fn turn_step(v: Vertex, incoming: Direction) -> Direction {
    if incoming.is_horizontal() {
        vertical_step(v)
    } else {
        horizontal_step(v)
    }
}

/// True when consecutive vertices are joined by correctly oriented edges.
pub fn is_legal_walk(vertices: &[Vertex]) -> bool {
    vertices.windows(2).all(|w| {
        Direction::from_delta(w[1].x - w[0].x, w[1].y - w[0].y)
            .is_some_and(|d| is_legal_step(w[0], d))
    })
}

/// Which of the four orientation-preserving maps an anchor selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryKind {
    /// Both coordinates even.
    Translation,
    /// Both coordinates odd: translate, then rotate by a half turn.
    HalfTurn,
    /// `x` odd, `y` even: translate, then reflect across the x-axis.
    ReflectX,
    /// `x` even, `y` odd: translate, then reflect across the y-axis.
    ReflectY,
}

/// The lattice automorphism sending `anchor` to the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symmetry {
    anchor: Vertex,
    kind: SymmetryKind,
}

impl Symmetry {
    pub fn new(anchor: Vertex) -> Self {
        let kind = match (anchor.x.rem_euclid(2), anchor.y.rem_euclid(2)) {
            (0, 0) => SymmetryKind::Translation,
            (1, 1) => SymmetryKind::HalfTurn,
            (1, 0) => SymmetryKind::ReflectX,
            _ => SymmetryKind::ReflectY,
        };
        Symmetry { anchor, kind }
    }

    pub fn anchor(&self) -> Vertex {
        self.anchor
    }

    pub fn kind(&self) -> SymmetryKind {
        self.kind
    }

    // The linear parts are all involutions.
    fn linear(&self, dx: i32, dy: i32) -> (i32, i32) {
        match self.kind {
            SymmetryKind::Translation => (dx, dy),
            SymmetryKind::HalfTurn => (-dx, -dy),
            SymmetryKind::ReflectX => (dx, -dy),
            SymmetryKind::ReflectY => (-dx, dy),
        }
    }

    pub fn apply(&self, v: Vertex) -> Vertex {
        let (x, y) = self.linear(v.x - self.anchor.x, v.y - self.anchor.y);
        Vertex::new(x, y)
    }

    pub fn invert(&self, v: Vertex) -> Vertex {
        let (x, y) = self.linear(v.x, v.y);
        Vertex::new(x + self.anchor.x, y + self.anchor.y)
    }

    pub fn apply_direction(&self, d: Direction) -> Direction {
        let (dx, dy) = d.delta();
        let (x, y) = self.linear(dx, dy);
        Direction::from_delta(x, y).expect("linear part maps unit steps to unit steps")
    }
}

/// Maps a walk starting at `anchor` to its image starting at the origin.
pub fn canonical_map(anchor: Vertex, walk: &[Vertex]) -> Result<Vec<Vertex>> {
    match walk.first() {
        Some(&first) if first == anchor => {}
        Some(&first) => {
            return Err(Error::InvalidInput(format!(
                "walk starts at {first}, expected anchor {anchor}"
            )))
        }
        None => return Err(Error::InvalidInput("empty walk".into())),
    }
    let sym = Symmetry::new(anchor);
    Ok(walk.iter().map(|&v| sym.apply(v)).collect())
}
