//! Depth-first enumeration of taxi walks.
//!
//! One engine serves walks, bridges and the transfer-matrix builder. Rules
//! prune on each new vertex and filter at the final length. Work is split by
//! enumerating all prefixes to a fixed depth and handing each prefix subtree
//! to a worker; results come back in prefix order, so any reduction over them
//! is deterministic whatever the thread count.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{turn_step, Direction, Vertex};
use crate::walk::{Letter, TaxiWalk, TurnWord};

/// Prefix length at which the search tree is split between workers.
pub const DEFAULT_SPLIT_DEPTH: usize = 12;

/// Pruning and acceptance predicates for a family of walks.
pub trait WalkRules: Sync {
    /// Allowed first steps, in enumeration order.
    fn first_steps(&self) -> &[Direction];

    /// Whether a walk may step onto `v` (checked for every vertex after the start).
    #[inline]
    fn admits(&self, _v: Vertex) -> bool {
        true
    }

    /// Whether a complete walk is emitted.
    #[inline]
    fn accepts(&self, _walk: &WalkView<'_>) -> bool {
        true
    }
}

/// Every taxi walk from the origin.
#[derive(Clone, Copy, Debug, Default)]
pub struct AllTaxiWalks;

impl WalkRules for AllTaxiWalks {
    fn first_steps(&self) -> &[Direction] {
        &[Direction::N, Direction::E]
    }
}

/// A borrowed view of the walk currently on the search stack.
#[derive(Clone, Copy, Debug)]
pub struct WalkView<'a> {
    pub vertices: &'a [Vertex],
    pub dirs: &'a [Direction],
    /// Turn word; `letters[i]` describes the vertex `vertices[i + 1]`.
    pub letters: &'a [Letter],
    /// Largest x-coordinate over `vertices`.
    pub max_x: i32,
}

impl WalkView<'_> {
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn end(&self) -> Vertex {
        *self.vertices.last().expect("walk has a start vertex")
    }

    pub fn last_dir(&self) -> Option<Direction> {
        self.dirs.last().copied()
    }

    pub fn to_walk(&self) -> TaxiWalk {
        TaxiWalk::decode(self.dirs[0], &TurnWord::new(self.letters.to_vec()))
            .expect("enumerated walks are valid taxi walks")
    }
}

struct Walker {
    radius: i32,
    side: usize,
    occupied: Vec<bool>,
    vertices: Vec<Vertex>,
    dirs: Vec<Direction>,
    letters: Vec<Letter>,
    max_x: Vec<i32>,
}

impl Walker {
    /// A walker whose walks have at most `n` steps; they stay inside `[-n, n]^2`.
    fn new(n: usize) -> Walker {
        let radius = n as i32;
        let side = 2 * n + 1;
        let mut w = Walker {
            radius,
            side,
            occupied: vec![false; side * side],
            vertices: Vec::with_capacity(n + 1),
            dirs: Vec::with_capacity(n),
            letters: Vec::with_capacity(n),
            max_x: Vec::with_capacity(n + 1),
        };
        let o = w.index(Vertex::ORIGIN);
        w.occupied[o] = true;
        w.vertices.push(Vertex::ORIGIN);
        w.max_x.push(0);
        w
    }

    #[inline]
    fn index(&self, v: Vertex) -> usize {
        (v.x + self.radius) as usize * self.side + (v.y + self.radius) as usize
    }

    #[inline]
    fn view(&self) -> WalkView<'_> {
        WalkView {
            vertices: &self.vertices,
            dirs: &self.dirs,
            letters: &self.letters,
            max_x: *self.max_x.last().expect("non-empty"),
        }
    }

    #[inline]
    fn push(&mut self, d: Direction, next: Vertex) {
        if let Some(&prev) = self.dirs.last() {
            self.letters.push(if prev == d { Letter::S } else { Letter::T });
        }
        let idx = self.index(next);
        self.occupied[idx] = true;
        let mx = (*self.max_x.last().expect("non-empty")).max(next.x);
        self.max_x.push(mx);
        self.vertices.push(next);
        self.dirs.push(d);
    }

    #[inline]
    fn pop(&mut self) {
        let v = self.vertices.pop().expect("non-empty");
        let idx = self.index(v);
        self.occupied[idx] = false;
        self.dirs.pop();
        self.max_x.pop();
        if !self.dirs.is_empty() {
            self.letters.pop();
        }
    }

    /// Replays a prefix found by an earlier search.
    fn replay(&mut self, prefix: &[Direction]) {
        for &d in prefix {
            let next = self.vertices.last().expect("non-empty").step(d);
            self.push(d, next);
        }
    }

    /// Extends the current walk to `target` steps in every admitted way.
    fn run<R, F>(&mut self, rules: &R, target: usize, filter: bool, visit: &mut F)
    where
        R: WalkRules + ?Sized,
        F: FnMut(&WalkView<'_>),
    {
        if self.dirs.len() == target {
            let view = self.view();
            if !filter || rules.accepts(&view) {
                visit(&view);
            }
            return;
        }
        let cur = *self.vertices.last().expect("non-empty");
        let mut options = [Direction::N; 2];
        let count = match (self.dirs.last(), self.letters.last()) {
            (None, _) => {
                let firsts = rules.first_steps();
                options[..firsts.len()].copy_from_slice(firsts);
                firsts.len()
            }
            (Some(&d), Some(Letter::T)) => {
                options[0] = d;
                1
            }
            (Some(&d), _) => {
                options[0] = d;
                options[1] = turn_step(cur, d);
                2
            }
        };
        for &d in &options[..count] {
            let next = cur.step(d);
            if self.occupied[self.index(next)] || !rules.admits(next) {
                continue;
            }
            self.push(d, next);
            self.run(rules, target, filter, visit);
            self.pop();
        }
    }
}

/// Visits every walk of exactly `n` steps accepted by `rules`, in
/// lexicographic order of encodings (first steps in rule order, `s` before `t`).
pub fn for_each_walk<R, F>(rules: &R, n: usize, mut visit: F)
where
    R: WalkRules + ?Sized,
    F: FnMut(&WalkView<'_>),
{
    let mut walker = Walker::new(n);
    walker.run(rules, n, true, &mut visit);
}

/// All admitted prefixes of `depth` steps (no acceptance filter).
fn prefixes<R: WalkRules + ?Sized>(rules: &R, n: usize, depth: usize) -> Vec<Vec<Direction>> {
    let mut out = Vec::new();
    let mut walker = Walker::new(n);
    walker.run(rules, depth, false, &mut |w: &WalkView<'_>| out.push(w.dirs.to_vec()));
    out
}

pub(crate) fn validate_jobs(jobs: usize) -> Result<()> {
    if jobs == 0 {
        return Err(Error::InvalidInput("jobs must be at least 1".into()));
    }
    Ok(())
}

/// Runs `f` on a pool of `jobs` threads (inline when `jobs == 1`).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    validate_jobs(jobs)?;
    if jobs == 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Folds every accepted walk of length `n`, one accumulator per prefix
/// subtree. The accumulators are returned in prefix order.
pub fn fold_subtrees<R, T, I, F>(rules: &R, n: usize, jobs: usize, split_depth: usize, init: I, fold: F) -> Result<Vec<T>>
where
    R: WalkRules + ?Sized,
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(&mut T, &WalkView<'_>) + Sync + Send,
{
    validate_jobs(jobs)?;
    if n <= split_depth {
        let mut acc = init();
        for_each_walk(rules, n, |w| fold(&mut acc, w));
        return Ok(vec![acc]);
    }
    let heads = prefixes(rules, n, split_depth);
    let subtree = |prefix: &Vec<Direction>| {
        let mut acc = init();
        let mut walker = Walker::new(n);
        walker.replay(prefix);
        walker.run(rules, n, true, &mut |w: &WalkView<'_>| fold(&mut acc, w));
        acc
    };
    with_jobs(jobs, || {
        if jobs == 1 {
            heads.iter().map(subtree).collect()
        } else {
            heads.par_iter().map(subtree).collect()
        }
    })
}

/// Sum of `u64` terms that spills into a big integer instead of wrapping.
#[derive(Clone, Debug, Default)]
pub struct ExactCounter {
    low: u64,
    high: BigUint,
}

impl ExactCounter {
    #[inline]
    pub fn add(&mut self, v: u64) {
        match self.low.checked_add(v) {
            Some(s) => self.low = s,
            None => {
                self.high += self.low;
                self.low = v;
            }
        }
    }

    pub fn merge(&mut self, other: &ExactCounter) {
        self.add(other.low);
        self.high += &other.high;
    }

    pub fn total(&self) -> BigUint {
        &self.high + self.low
    }
}

/// Counts the walks of length `n` accepted by `rules`.
pub fn count_walks<R: WalkRules + ?Sized>(rules: &R, n: usize, jobs: usize) -> Result<BigUint> {
    if n == 0 {
        return Ok(BigUint::from(1u32));
    }
    let parts = fold_subtrees(rules, n, jobs, DEFAULT_SPLIT_DEPTH, ExactCounter::default, |c, _| c.add(1))?;
    let mut total = ExactCounter::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_spills_instead_of_wrapping() {
        let mut c = ExactCounter::default();
        c.add(u64::MAX);
        c.add(2);
        assert_eq!(c.total(), BigUint::from(u64::MAX) + 2u32);
        let mut d = ExactCounter::default();
        d.merge(&c);
        d.merge(&c);
        assert_eq!(d.total(), (BigUint::from(u64::MAX) + 2u32) * 2u32);
    }

    #[test]
    fn short_walks_in_order() {
        let mut seen = Vec::new();
        for_each_walk(&AllTaxiWalks, 2, |w| seen.push(w.to_walk().to_string()));
        assert_eq!(seen, vec!["N:s", "N:t", "E:s", "E:t"]);
    }

    #[test]
    fn split_and_serial_agree() {
        for n in 1..=16 {
            let serial = {
                let mut c = 0u64;
                for_each_walk(&AllTaxiWalks, n, |_| c += 1);
                c
            };
            let parts = fold_subtrees(&AllTaxiWalks, n, 2, 5, || 0u64, |c, _| *c += 1).unwrap();
            assert_eq!(parts.iter().sum::<u64>(), serial, "n = {n}");
        }
    }

    #[test]
    fn zero_jobs_rejected() {
        assert!(count_walks(&AllTaxiWalks, 3, 0).is_err());
    }
}
