//! Taxi walks and their `(first step, turn word)` encoding.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{horizontal_step, is_legal_walk, turn_step, Direction, Vertex};

/// One letter of a turn word: go straight or turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    S,
    T,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::S => 's',
            Letter::T => 't',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            's' => Some(Letter::S),
            't' => Some(Letter::T),
            _ => None,
        }
    }

    pub fn bit(self) -> u64 {
        match self {
            Letter::S => 0,
            Letter::T => 1,
        }
    }
}

/// A word over `{s, t}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TurnWord(pub Vec<Letter>);

impl TurnWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        TurnWord(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_double_turn(&self) -> bool {
        has_double_turn(&self.0)
    }
}

pub fn has_double_turn(letters: &[Letter]) -> bool {
    letters.windows(2).any(|w| w[0] == Letter::T && w[1] == Letter::T)
}

impl fmt::Display for TurnWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for TurnWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| Error::InvalidInput(format!("bad letter {c:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(TurnWord)
    }
}

/// Follows a turn word from `start`, leaving in direction `first`.
///
/// Returns the `word.len() + 2` visited vertices. Self-avoidance is not
/// checked. `first` must be a legal step out of `start`.
pub fn trace(start: Vertex, first: Direction, word: &[Letter]) -> Vec<Vertex> {
    let mut verts = Vec::with_capacity(word.len() + 2);
    verts.push(start);
    let mut cur = start.step(first);
    verts.push(cur);
    let mut dir = first;
    for &l in word {
        if l == Letter::T {
            dir = turn_step(cur, dir);
        }
        cur = cur.step(dir);
        verts.push(cur);
    }
    verts
}

fn all_distinct(vertices: &[Vertex]) -> bool {
    let mut seen = HashSet::with_capacity(vertices.len());
    vertices.iter().all(|v| seen.insert(*v))
}

/// Reads the turn word off a walk's vertex list.
pub fn turn_word_of(vertices: &[Vertex]) -> TurnWord {
    TurnWord(
        vertices
            .windows(3)
            .map(|t| {
                let a = (t[1].x - t[0].x, t[1].y - t[0].y);
                let b = (t[2].x - t[1].x, t[2].y - t[1].y);
                if a == b {
                    Letter::S
                } else {
                    Letter::T
                }
            })
            .collect(),
    )
}

/// A self-avoiding walk from the origin in the Manhattan lattice that
/// never turns at two consecutive vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TaxiWalk {
    vertices: Vec<Vertex>,
    first: Direction,
    word: TurnWord,
}

impl TaxiWalk {
    /// Decodes `(first, word)`; the walk has `word.len() + 1` steps.
    pub fn decode(first: Direction, word: &TurnWord) -> Result<TaxiWalk> {
        if !matches!(first, Direction::N | Direction::E) {
            return Err(Error::InvalidInput(format!("first step {first} is not legal at the origin")));
        }
        if word.has_double_turn() {
            return Err(Error::InvalidInput(format!("turn word {word} turns twice in a row")));
        }
        let vertices = trace(Vertex::ORIGIN, first, word.letters());
        if !all_distinct(&vertices) {
            return Err(Error::InvalidInput(format!("({first},{word}) is not self-avoiding")));
        }
        Ok(TaxiWalk { vertices, first, word: word.clone() })
    }

    pub fn from_vertices(vertices: Vec<Vertex>) -> Result<TaxiWalk> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInput("a taxi walk needs at least one step".into()));
        }
        if vertices[0] != Vertex::ORIGIN {
            return Err(Error::InvalidInput(format!("walk starts at {}, not the origin", vertices[0])));
        }
        if !is_legal_walk(&vertices) {
            return Err(Error::InvalidInput("walk uses a step against the lattice orientation".into()));
        }
        if !all_distinct(&vertices) {
            return Err(Error::InvalidInput("walk revisits a vertex".into()));
        }
        let word = turn_word_of(&vertices);
        if word.has_double_turn() {
            return Err(Error::InvalidInput(format!("walk turns twice in a row ({word})")));
        }
        let first = Direction::from_delta(vertices[1].x, vertices[1].y).expect("legal first step");
        Ok(TaxiWalk { vertices, first, word })
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn first_step(&self) -> Direction {
        self.first
    }

    pub fn turn_word(&self) -> &TurnWord {
        &self.word
    }

    pub fn end(&self) -> Vertex {
        *self.vertices.last().expect("non-empty")
    }

    /// Re-checks every invariant, including encoding consistency.
    pub fn validate(&self) -> Result<()> {
        let again = TaxiWalk::from_vertices(self.vertices.clone())?;
        if again.first != self.first || again.word != self.word {
            return Err(Error::Inconsistent("encoding does not match vertices".into()));
        }
        Ok(())
    }
}

impl fmt::Display for TaxiWalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.word)
    }
}

/// Packs `(first, word)` into an integer whose order matches the
/// lexicographic order of encodings of equal length (N before E, s before t).
pub fn encoding_key(first: Direction, word: &[Letter]) -> u64 {
    assert!(word.len() < 63, "encoding key supports words shorter than 63 letters");
    let head = u64::from(first == Direction::E);
    word.iter().fold(head, |acc, l| (acc << 1) | l.bit())
}

/// The first legal step is horizontal at the origin.
pub fn origin_first_steps() -> [Direction; 2] {
    [Direction::N, horizontal_step(Vertex::ORIGIN)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_and_reencode() {
        let w: TurnWord = "stss".parse().unwrap();
        let walk = TaxiWalk::decode(Direction::E, &w).unwrap();
        assert_eq!(walk.len(), 5);
        assert_eq!(
            walk.vertices(),
            &[
                Vertex::new(0, 0),
                Vertex::new(1, 0),
                Vertex::new(2, 0),
                Vertex::new(2, 1),
                Vertex::new(2, 2),
                Vertex::new(2, 3)
            ]
        );
        walk.validate().unwrap();
        let again = TaxiWalk::from_vertices(walk.vertices().to_vec()).unwrap();
        assert_eq!(again, walk);
        assert_eq!(walk.to_string(), "E:stss");
    }

    #[test]
    fn decode_rejects_bad_words() {
        assert!(TaxiWalk::decode(Direction::E, &"tt".parse().unwrap()).is_err());
        assert!(TaxiWalk::decode(Direction::W, &"s".parse().unwrap()).is_err());
        // A polygon word returns to the origin.
        let loop_word: TurnWord = "sstsstsstss".parse().unwrap();
        assert!(TaxiWalk::decode(Direction::E, &loop_word).is_err());
        assert!("sxt".parse::<TurnWord>().is_err());
    }

    #[test]
    fn from_vertices_rejects_illegal_steps() {
        let westward = vec![Vertex::new(0, 0), Vertex::new(-1, 0)];
        assert!(TaxiWalk::from_vertices(westward).is_err());
        assert!(TaxiWalk::from_vertices(vec![Vertex::ORIGIN]).is_err());
    }

    #[test]
    fn keys_follow_lexicographic_order() {
        let a = encoding_key(Direction::N, &[Letter::T, Letter::S]);
        let b = encoding_key(Direction::E, &[Letter::S, Letter::S]);
        let c = encoding_key(Direction::E, &[Letter::S, Letter::T]);
        assert!(a < b && b < c);
    }
}
