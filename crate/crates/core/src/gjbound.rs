//! Taxi polygons, counting words that avoid a mistake set, and the bound
//! `mu <= l_n^(1/n)`.
//!
//! A taxi polygon is the turn word of a closed taxi walk. No taxi walk can
//! contain one as a factor, nor the factor `tt`, so with `M = {tt} u polygons`
//! every taxi walk of length `n + 1` has a first step and a length-`n` word
//! avoiding `M`: `c_{n+1} <= 2 l_n`. Two counting engines are provided: an
//! Aho-Corasick automaton (the workhorse) and the Goulden-Jackson cluster
//! series (the cross-check).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::bounds::{validate_precision, BoundDirection, BoundReport};
use crate::enumerate::with_jobs;
use crate::error::{Error, Result};
use crate::lattice::{turn_step, Direction, Vertex};
use crate::numeric::{nth_root, Rounding};
use crate::series::IntSeries;
use crate::table::write_atomic;
use crate::walk::{has_double_turn, trace, Letter};

/// Depth at which polygon enumeration is split between workers.
const POLYGON_SPLIT_DEPTH: usize = 10;

fn letter_bit(c: u8) -> Option<usize> {
    match c {
        b's' => Some(0),
        b't' => Some(1),
        _ => None,
    }
}

fn check_word(w: &str) -> Result<()> {
    if w.is_empty() || w.bytes().any(|c| letter_bit(c).is_none()) {
        return Err(Error::InvalidInput(format!("{w:?} is not a non-empty word over {{s,t}}")));
    }
    Ok(())
}

fn letters_of(w: &str) -> Vec<Letter> {
    w.chars().map(|c| Letter::from_char(c).expect("checked word")).collect()
}

fn word_of(letters: &[Letter]) -> String {
    letters.iter().map(|l| l.as_char()).collect()
}

/// The turn word of a closed, otherwise simple taxi walk.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaxiPolygon {
    word: String,
}

impl TaxiPolygon {
    /// Accepts `word` only if it closes from the origin with first step E.
    pub fn new(word: &str) -> Result<Self> {
        check_word(word)?;
        if !closes_simply(&letters_of(word), Direction::E) {
            return Err(Error::InvalidInput(format!("{word} is not a taxi polygon")));
        }
        Ok(TaxiPolygon { word: word.to_string() })
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    /// Number of steps of the closed walk.
    pub fn length(&self) -> usize {
        self.word.len() + 1
    }
}

impl fmt::Display for TaxiPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word)
    }
}

/// Whether decoding `word` from the origin closes up with no earlier repeat.
pub fn closes_simply(word: &[Letter], first: Direction) -> bool {
    if has_double_turn(word) {
        return false;
    }
    let verts = trace(Vertex::ORIGIN, first, word);
    let (last, body) = verts.split_last().expect("non-empty");
    if *last != Vertex::ORIGIN {
        return false;
    }
    let mut seen = std::collections::HashSet::with_capacity(body.len());
    body.iter().all(|v| seen.insert(*v))
}

/// All polygon words up to a maximum length, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PolygonSet {
    pub max_len: usize,
    words: BTreeSet<String>,
}

impl PolygonSet {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Polygon count per length (steps, not letters).
    pub fn count_by_length(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for w in &self.words {
            *out.entry(w.len() + 1).or_insert(0) += 1;
        }
        out
    }

    /// The polygons of length at most `max_len`.
    pub fn truncated(&self, max_len: usize) -> PolygonSet {
        PolygonSet {
            max_len: max_len.min(self.max_len),
            words: self.words.iter().filter(|w| w.len() < max_len).cloned().collect(),
        }
    }

    /// Conventional file name, e.g. `polygons_le24.txt`.
    pub fn file_name(max_len: usize) -> String {
        format!("polygons_le{max_len}.txt")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for w in &self.words {
            out.push_str(w);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(Self::file_name(self.max_len));
        write_atomic(&path, self.to_text().as_bytes())?;
        Ok(path)
    }

    /// Reads a word list; each line must be a taxi polygon shorter than `max_len`.
    pub fn load(path: &Path, max_len: usize) -> Result<PolygonSet> {
        let text = std::fs::read_to_string(path)?;
        let mut words = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let bad = |reason: &str| Error::Malformed { path: path.to_path_buf(), reason: format!("line {}: {reason}", i + 1) };
            let p = TaxiPolygon::new(line).map_err(|_| bad("not a taxi polygon"))?;
            if p.length() > max_len {
                return Err(bad("polygon longer than the file's maximum length"));
            }
            if !words.insert(line.to_string()) {
                return Err(bad("duplicate word"));
            }
        }
        Ok(PolygonSet { max_len, words })
    }
}

struct PolygonWalker {
    max_len: usize,
    radius: i32,
    side: usize,
    occupied: Vec<bool>,
    pos: Vertex,
    dirs: Vec<Direction>,
    letters: Vec<Letter>,
}

impl PolygonWalker {
    fn new(max_len: usize) -> Self {
        // A closed walk of length L stays within distance L/2 of its start.
        let radius = (max_len / 2 + 1) as i32;
        let side = 2 * radius as usize + 1;
        let mut w = PolygonWalker {
            max_len,
            radius,
            side,
            occupied: vec![false; side * side],
            pos: Vertex::ORIGIN,
            dirs: Vec::with_capacity(max_len),
            letters: Vec::with_capacity(max_len),
        };
        let o = w.index(Vertex::ORIGIN);
        w.occupied[o] = true;
        w
    }

    fn index(&self, v: Vertex) -> usize {
        (v.x + self.radius) as usize * self.side + (v.y + self.radius) as usize
    }

    fn options(&self) -> ([Direction; 2], usize) {
        match (self.dirs.last(), self.letters.last()) {
            (None, _) => ([Direction::E, Direction::E], 1),
            (Some(&d), Some(Letter::T)) => ([d, d], 1),
            (Some(&d), _) => ([d, turn_step(self.pos, d)], 2),
        }
    }

    fn push(&mut self, d: Direction) {
        if let Some(&prev) = self.dirs.last() {
            self.letters.push(if prev == d { Letter::S } else { Letter::T });
        }
        self.pos = self.pos.step(d);
        let i = self.index(self.pos);
        self.occupied[i] = true;
        self.dirs.push(d);
    }

    fn pop(&mut self) {
        let i = self.index(self.pos);
        self.occupied[i] = false;
        let d = self.dirs.pop().expect("non-empty");
        let (dx, dy) = d.delta();
        self.pos = Vertex::new(self.pos.x - dx, self.pos.y - dy);
        if !self.dirs.is_empty() {
            self.letters.pop();
        }
    }

    /// Open prefixes of exactly `depth` steps that can still close in time.
    fn prefixes(&mut self, depth: usize, out: &mut Vec<Vec<Direction>>, found: &mut Vec<String>) {
        if self.dirs.len() == depth {
            out.push(self.dirs.clone());
            return;
        }
        self.step_all(found, |w, f| w.prefixes(depth, out, f));
    }

    fn search(&mut self, found: &mut Vec<String>) {
        if self.dirs.len() == self.max_len {
            return;
        }
        self.step_all(found, |w, f| w.search(f));
    }

    fn step_all(&mut self, found: &mut Vec<String>, mut recurse: impl FnMut(&mut Self, &mut Vec<String>)) {
        let (opts, count) = self.options();
        let remaining = (self.max_len - self.dirs.len() - 1) as u32;
        for &d in &opts[..count] {
            let next = self.pos.step(d);
            if next == Vertex::ORIGIN {
                if self.dirs.len() + 1 >= 4 {
                    found.push(word_of(&self.word_with(d)));
                }
                continue;
            }
            if self.occupied[self.index(next)] || next.norm1() > remaining {
                continue;
            }
            self.push(d);
            recurse(self, found);
            self.pop();
        }
    }

    /// The word of the closed walk whose final step is `d`.
    fn word_with(&self, d: Direction) -> Vec<Letter> {
        let mut letters = self.letters.clone();
        let prev = *self.dirs.last().expect("closing step follows another");
        letters.push(if prev == d { Letter::S } else { Letter::T });
        letters
    }
}

/// Every taxi polygon of length at most `max_len`, found by a pruned
/// depth-first search over closed walks leaving the origin eastward.
///
/// Reflection in the diagonal is a lattice automorphism fixing the origin
/// that swaps the two first steps and preserves turn words, so the
/// northward search finds the same words; the set is keyed by word.
pub fn enumerate_taxi_polygons(max_len: usize, jobs: usize) -> Result<PolygonSet> {
    if max_len < 4 {
        return Err(Error::InvalidInput(format!("max_len must be at least 4, got {max_len}")));
    }
    let mut root = PolygonWalker::new(max_len);
    let mut found = Vec::new();
    let mut heads = Vec::new();
    let depth = POLYGON_SPLIT_DEPTH.min(max_len - 1);
    root.prefixes(depth, &mut heads, &mut found);
    let parts: Vec<Vec<String>> = with_jobs(jobs, || {
        let sub = |prefix: &Vec<Direction>| {
            let mut w = PolygonWalker::new(max_len);
            for &d in prefix {
                w.push(d);
            }
            let mut out = Vec::new();
            w.search(&mut out);
            out
        };
        if jobs == 1 {
            heads.iter().map(sub).collect()
        } else {
            heads.par_iter().map(sub).collect()
        }
    })?;
    let mut words: BTreeSet<String> = found.into_iter().collect();
    for p in parts {
        words.extend(p);
    }
    Ok(PolygonSet { max_len, words })
}

/// Independent oracle: decodes every word without `tt` of each length and
/// keeps those that close simply from either first step.
pub fn brute_force_polygons(max_len: usize) -> PolygonSet {
    let mut words = BTreeSet::new();
    let mut stack: Vec<Vec<Letter>> = vec![vec![Letter::S], vec![Letter::T]];
    while let Some(w) = stack.pop() {
        if w.len() + 1 >= 4 && (closes_simply(&w, Direction::E) || closes_simply(&w, Direction::N)) {
            words.insert(word_of(&w));
        }
        if w.len() + 2 <= max_len {
            let mut s = w.clone();
            s.push(Letter::S);
            stack.push(s);
            if w.last() != Some(&Letter::T) {
                let mut t = w;
                t.push(Letter::T);
                stack.push(t);
            }
        }
    }
    PolygonSet { max_len, words }
}

/// A set of forbidden factors over `{s, t}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MistakeSet {
    words: BTreeSet<String>,
    pub provenance: Vec<String>,
}

impl MistakeSet {
    pub fn new() -> Self {
        MistakeSet::default()
    }

    /// `{tt}`: the words of taxi walks.
    pub fn double_turn() -> Self {
        let mut m = MistakeSet::new();
        m.words.insert("tt".into());
        m.provenance.push("tt".into());
        m
    }

    /// `{tt}` together with every polygon in `polygons`.
    pub fn taxi(polygons: &PolygonSet) -> Self {
        let mut m = MistakeSet::double_turn();
        m.words.extend(polygons.words().map(str::to_string));
        m.provenance.push(format!("polygon<={}", polygons.max_len));
        m
    }

    pub fn from_words<I, S>(words: I, label: &str) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut m = MistakeSet::new();
        for w in words {
            check_word(w.as_ref())?;
            m.words.insert(w.as_ref().to_string());
        }
        m.provenance.push(label.to_string());
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Drops every word that has another mistake as a proper factor. Any
    /// word avoiding the smaller factor avoids the longer word too, so the
    /// count of avoiding words is unchanged.
    pub fn reduced(&self) -> MistakeSet {
        let words: Vec<&str> = self.words().collect();
        let ac = Automaton::build(&words);
        let keep = words.iter().filter(|w| !ac.has_proper_factor(w)).map(|w| w.to_string()).collect();
        MistakeSet { words: keep, provenance: self.provenance.clone() }
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced().len() == self.len()
    }

    /// Whether `word` contains any mistake as a factor.
    pub fn occurs_in(&self, word: &str) -> bool {
        self.words().any(|m| word.contains(m))
    }
}

/// Aho-Corasick automaton over `{s, t}`.
pub struct Automaton {
    goto: Vec<[u32; 2]>,
    fail: Vec<u32>,
    /// Some mistake ends at this state.
    dead: Vec<bool>,
}

impl Automaton {
    pub fn build(words: &[&str]) -> Automaton {
        const NONE: u32 = u32::MAX;
        let mut goto = vec![[NONE; 2]];
        let mut terminal = vec![false];
        for w in words {
            let mut s = 0usize;
            for c in w.bytes() {
                let b = letter_bit(c).expect("checked word");
                if goto[s][b] == NONE {
                    goto[s][b] = goto.len() as u32;
                    goto.push([NONE; 2]);
                    terminal.push(false);
                }
                s = goto[s][b] as usize;
            }
            terminal[s] = true;
        }
        let mut fail = vec![0u32; goto.len()];
        let mut dead = terminal;
        let mut queue = VecDeque::new();
        for b in 0..2 {
            match goto[0][b] {
                NONE => goto[0][b] = 0,
                c => queue.push_back(c as usize),
            }
        }
        while let Some(s) = queue.pop_front() {
            let f = fail[s] as usize;
            dead[s] = dead[s] || dead[f];
            for b in 0..2 {
                match goto[s][b] {
                    NONE => goto[s][b] = goto[f][b],
                    c => {
                        fail[c as usize] = if s == 0 { 0 } else { goto[f][b] };
                        queue.push_back(c as usize);
                    }
                }
            }
        }
        Automaton { goto, fail, dead }
    }

    pub fn states(&self) -> usize {
        self.goto.len()
    }

    /// For a word of the automaton's own set: does another word occur in it?
    fn has_proper_factor(&self, w: &str) -> bool {
        let bytes = w.as_bytes();
        let mut s = 0usize;
        for (i, &c) in bytes.iter().enumerate() {
            s = self.goto[s][letter_bit(c).expect("checked word")] as usize;
            let last = i + 1 == bytes.len();
            // At the end, `s` is the word itself; shorter matches sit on its fail chain.
            if (!last && self.dead[s]) || (last && self.dead[self.fail[s] as usize]) {
                return true;
            }
        }
        false
    }

    /// `l_0 ..= l_order`: words avoiding every mistake, by length.
    pub fn counts(&self, order: usize) -> Vec<BigUint> {
        if self.dead[0] {
            return vec![BigUint::zero(); order + 1];
        }
        let live: Vec<usize> = (0..self.states()).filter(|&s| !self.dead[s]).collect();
        let mut slot = vec![u32::MAX; self.states()];
        for (k, &s) in live.iter().enumerate() {
            slot[s] = k as u32;
        }
        let edges: Vec<[u32; 2]> = live
            .iter()
            .map(|&s| [slot[self.goto[s][0] as usize], slot[self.goto[s][1] as usize]])
            .collect();
        // Counts after k letters are below 2^k, so fixed-width limbs suffice;
        // only the low `k / 64 + 1` limbs are touched at step k.
        let width = order / 64 + 1;
        let mut cur = vec![0u64; live.len() * width];
        let mut next = vec![0u64; live.len() * width];
        cur[slot[0] as usize * width] = 1;
        let mut out = Vec::with_capacity(order + 1);
        out.push(BigUint::one());
        for k in 1..=order {
            let used = k / 64 + 1;
            next.iter_mut().for_each(|x| *x = 0);
            for (src, e) in cur.chunks_exact(width).zip(&edges) {
                let src = &src[..used];
                if src.iter().all(|&x| x == 0) {
                    continue;
                }
                for &t in e {
                    if t != u32::MAX {
                        let at = t as usize * width;
                        add_limbs(&mut next[at..at + used], src);
                    }
                }
            }
            let mut total = vec![0u64; used + 1];
            for v in next.chunks_exact(width) {
                add_limbs(&mut total, &v[..used]);
            }
            out.push(BigUint::from_slice(
                &total.iter().flat_map(|&x| [x as u32, (x >> 32) as u32]).collect::<Vec<_>>(),
            ));
            std::mem::swap(&mut cur, &mut next);
        }
        out
    }
}

/// `dst += src` on little-endian limbs; `dst` must be at least as long and
/// wide enough to absorb the carry.
fn add_limbs(dst: &mut [u64], src: &[u64]) {
    let mut carry = false;
    for (i, d) in dst.iter_mut().enumerate() {
        let s = src.get(i).copied().unwrap_or(0);
        if s == 0 && !carry && i >= src.len() {
            break;
        }
        let (a, c1) = d.overflowing_add(s);
        let (b, c2) = a.overflowing_add(carry as u64);
        *d = b;
        carry = c1 || c2;
    }
    debug_assert!(!carry, "limb overflow");
}

/// `l_0 ..= l_order` by the automaton engine.
pub fn avoiding_counts(m: &MistakeSet, order: usize) -> Vec<BigUint> {
    let r = m.reduced();
    let words: Vec<&str> = r.words().collect();
    Automaton::build(&words).counts(order)
}

/// `l_n`, the number of words of length `n` avoiding every mistake.
pub fn count_avoiding_words(m: &MistakeSet, n: usize) -> BigUint {
    avoiding_counts(m, n).pop().expect("order + 1 entries")
}

/// Nonempty proper overlaps: lengths `k` with the last `k` letters of `v`
/// equal to the first `k` letters of `w`, `k < min(|v|, |w|)`.
fn overlaps(v: &str, w: &str) -> Vec<usize> {
    let (v, w) = (v.as_bytes(), w.as_bytes());
    (1..v.len().min(w.len())).filter(|&k| v[v.len() - k..] == w[..k]).collect()
}

/// `l_0 ..= l_order` by the Goulden-Jackson cluster method.
///
/// With weights `C_w(x)` solving
/// `C_w = -x^|w| - sum_v sum_{o in overlap(v,w)} x^(|w|-|o|) C_v`,
/// the generating function is `1 / (1 - 2x - sum_w C_w)`.
pub fn avoiding_counts_gj(m: &MistakeSet, order: usize) -> Result<Vec<BigUint>> {
    let r = m.reduced();
    let words: Vec<&str> = r.words().collect();
    // links[w] = (v, shift) pairs, shift = |w| - |o| >= 1.
    let links: Vec<Vec<(usize, usize)>> = words
        .iter()
        .map(|w| {
            let mut l = Vec::new();
            for (vi, v) in words.iter().enumerate() {
                for k in overlaps(v, w) {
                    l.push((vi, w.len() - k));
                }
            }
            l
        })
        .collect();
    let mut c = vec![vec![BigInt::zero(); order + 1]; words.len()];
    for k in 0..=order {
        for (wi, w) in words.iter().enumerate() {
            let mut acc = if w.len() == k { -BigInt::one() } else { BigInt::zero() };
            for &(vi, shift) in &links[wi] {
                if shift <= k {
                    acc -= &c[vi][k - shift];
                }
            }
            c[wi][k] = acc;
        }
    }
    let mut denom = vec![BigInt::zero(); order + 1];
    denom[0] = BigInt::one();
    if order >= 1 {
        denom[1] = BigInt::from(-2);
    }
    for cw in &c {
        for (d, x) in denom.iter_mut().zip(cw) {
            *d -= x;
        }
    }
    let f = IntSeries::new(denom, order).inverse()?;
    f.coeffs()
        .iter()
        .map(|x| {
            if x.is_negative() {
                Err(Error::Inconsistent("cluster series produced a negative count".into()))
            } else {
                Ok(x.magnitude().clone())
            }
        })
        .collect()
}

/// Oracle: tests every one of the `2^n` words.
pub fn count_avoiding_brute(m: &MistakeSet, n: usize) -> Result<u64> {
    if n > 26 {
        return Err(Error::InvalidInput(format!("brute force limited to n <= 26, got {n}")));
    }
    let mut count = 0u64;
    let mut word = vec![b's'; n];
    for bits in 0u64..(1 << n) {
        for (i, c) in word.iter_mut().enumerate() {
            *c = if bits >> (n - 1 - i) & 1 == 1 { b't' } else { b's' };
        }
        let w = std::str::from_utf8(&word).expect("ascii");
        if !m.occurs_in(w) {
            count += 1;
        }
    }
    Ok(count)
}

/// `l_n^(1/n)` rounded up, for `M = {tt} u polygons`.
pub fn gj_bound_from_polygons(polygons: &PolygonSet, n: usize, precision: u32) -> Result<BoundReport> {
    validate_precision(precision)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let m = MistakeSet::taxi(polygons);
    let l_n = count_avoiding_words(&m, n);
    let value = nth_root(&l_n, n as u32, precision, Rounding::Up);
    Ok(BoundReport::new("goulden-jackson", BoundDirection::Upper, value)
        .with_param("polygon_max", polygons.max_len)
        .with_param("polygons", polygons.len())
        .with_param("n", n)
        .with_param("l_n_bits", l_n.bits()))
}

pub fn gj_upper_bound(polygon_max: usize, n: usize, jobs: usize, precision: u32) -> Result<BoundReport> {
    let polygons = enumerate_taxi_polygons(polygon_max, jobs)?;
    gj_bound_from_polygons(&polygons, n, precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{POLYGON_EXAMPLES, TAXI_WALK_COUNTS};
    use crate::walkcount::fibonacci;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn documented_polygons() {
        for w in POLYGON_EXAMPLES {
            let p = TaxiPolygon::new(w).unwrap();
            assert!(closes_simply(&letters_of(w), Direction::N));
            assert_eq!(p.length() % 4, 0);
        }
        let set = enumerate_taxi_polygons(20, 1).unwrap();
        assert!(set.contains(POLYGON_EXAMPLES[0]));
        assert!(set.contains(POLYGON_EXAMPLES[1]));
        assert!(TaxiPolygon::new("ttt").is_err());
        assert!(TaxiPolygon::new("sss").is_err());
    }

    #[test]
    fn search_matches_brute_force() {
        for max_len in [4, 8, 12, 16, 20] {
            let a = enumerate_taxi_polygons(max_len, 1).unwrap();
            let b = brute_force_polygons(max_len);
            assert_eq!(a, b, "max_len = {max_len}");
            assert!(a.count_by_length().keys().all(|l| l % 4 == 0));
        }
        let par = enumerate_taxi_polygons(20, 3).unwrap();
        assert_eq!(par, enumerate_taxi_polygons(20, 1).unwrap());
        assert!(enumerate_taxi_polygons(3, 1).is_err());
    }

    #[test]
    fn polygon_file_round_trip() {
        let set = enumerate_taxi_polygons(16, 1).unwrap();
        let dir = std::env::temp_dir().join(format!("taxiwalk-poly-{}", std::process::id()));
        let path = set.save(&dir).unwrap();
        assert!(path.ends_with("polygons_le16.txt"));
        assert_eq!(PolygonSet::load(&path, 16).unwrap(), set);
        std::fs::write(&path, "sss\n").unwrap();
        assert!(PolygonSet::load(&path, 16).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn double_turn_counts_are_fibonacci() {
        let m = MistakeSet::double_turn();
        let auto = avoiding_counts(&m, 30);
        let gj = avoiding_counts_gj(&m, 30).unwrap();
        assert_eq!(auto, gj);
        for (n, l) in auto.iter().enumerate() {
            assert_eq!(l, &fibonacci(n + 2), "n = {n}");
        }
        assert_eq!(auto[2], BigUint::from(3u32));
        assert_eq!(auto[10], BigUint::from(144u32));
        for n in 0..=12 {
            assert_eq!(BigUint::from(count_avoiding_brute(&m, n).unwrap()), auto[n]);
        }
    }

    #[test]
    fn reduction_drops_superwords() {
        let m = MistakeSet::from_words(["tt", "stt", "tts", "ss", "sts", "tst"], "t").unwrap();
        let r = m.reduced();
        assert_eq!(r.words().collect::<Vec<_>>(), vec!["ss", "sts", "tst", "tt"]);
        assert!(r.is_reduced());
        assert_eq!(avoiding_counts(&m, 9), avoiding_counts(&r, 9));
    }

    #[test]
    fn polygons_tighten_the_count() {
        let polys = enumerate_taxi_polygons(12, 1).unwrap();
        let m = MistakeSet::taxi(&polys);
        let l13 = count_avoiding_words(&m, 13);
        assert_eq!(BigUint::from(count_avoiding_brute(&m, 13).unwrap()), l13);
        assert!(BigUint::from(TAXI_WALK_COUNTS[13]) <= &l13 * 2u32);
        assert!(l13 < count_avoiding_words(&MistakeSet::double_turn(), 13));
    }

    #[test]
    fn golden_ratio_bound_without_polygons() {
        let polys = enumerate_taxi_polygons(4, 1).unwrap();
        assert!(polys.is_empty());
        let r = gj_bound_from_polygons(&polys, 30, 5).unwrap();
        let v = r.value.to_f64();
        assert!(v > 1.618 && v < 1.65, "{v}");
    }

    fn random_set(rng: &mut ChaCha8Rng) -> MistakeSet {
        let k = rng.gen_range(1..5);
        let words: Vec<String> = (0..k)
            .map(|_| {
                let len = rng.gen_range(1..6);
                (0..len).map(|_| if rng.gen::<bool>() { 't' } else { 's' }).collect()
            })
            .collect();
        MistakeSet::from_words(words, "random").unwrap()
    }

    #[test]
    fn engines_agree_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_set(&mut rng);
            let auto = avoiding_counts(&m, 14);
            assert_eq!(auto, avoiding_counts_gj(&m, 14).unwrap(), "{m:?}");
            assert_eq!(BigUint::from(count_avoiding_brute(&m, 14).unwrap()), auto[14], "{m:?}");
        }
    }

    proptest! {
        #[test]
        fn engines_agree(words in proptest::collection::vec("[st]{1,6}", 1..6)) {
            let m = MistakeSet::from_words(&words, "prop").unwrap();
            let auto = avoiding_counts(&m, 12);
            prop_assert_eq!(&auto, &avoiding_counts_gj(&m, 12).unwrap());
            prop_assert_eq!(BigUint::from(count_avoiding_brute(&m, 12).unwrap()), auto[12].clone());
        }
    }
}
