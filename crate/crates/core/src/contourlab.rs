//! Peierls contours for hard-core configurations with even boundary
//! conditions, and the tail sum that makes the Peierls argument converge.
//!
//! A configuration lives on the box `U_n = {-n..n}^2` and is extended by every
//! even vertex outside it. All set computations run on bit-row grids over the
//! window `U_{n+1}`; the ring at distance `n + 1` stands in for the outside.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::with_jobs;
use crate::error::{Error, Result};
use crate::lattice::{Direction, Vertex};
use crate::walk::TaxiWalk;

/// Largest supported box radius; the window side `2n + 3` fits in 16 rows of
/// 16 bits, which keeps every set operation a handful of vector instructions.
pub const MAX_RADIUS: usize = 6;
const ROWS: usize = 16;

/// A subset of the window `U_{n+1}`, one bit row per y-coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    rows: [u16; ROWS],
}

impl Grid {
    const EMPTY: Grid = Grid { rows: [0; ROWS] };

    fn or(&self, o: &Grid) -> Grid {
        let mut g = *self;
        g.rows.iter_mut().zip(&o.rows).for_each(|(a, b)| *a |= b);
        g
    }

    fn and(&self, o: &Grid) -> Grid {
        let mut g = *self;
        g.rows.iter_mut().zip(&o.rows).for_each(|(a, b)| *a &= b);
        g
    }

    fn minus(&self, o: &Grid) -> Grid {
        let mut g = *self;
        g.rows.iter_mut().zip(&o.rows).for_each(|(a, b)| *a &= !b);
        g
    }

    fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    fn is_subset(&self, o: &Grid) -> bool {
        self.minus(o).is_empty()
    }

    fn count(&self) -> u32 {
        self.rows.iter().map(|r| r.count_ones()).sum()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().filter(|&&r| r != 0).map(|r| format!("{r:b}")).collect();
        write!(f, "Grid{rows:?}")
    }
}

/// Geometry of the window for a given `n` and `m`.
#[derive(Clone, Debug)]
struct Frame {
    n: usize,
    m: usize,
    side: usize,
    off: i32,
    full: Grid,
    box_n: Grid,
    box_m: Grid,
    even: Grid,
    odd: Grid,
    /// Even vertices of the outer ring: the visible part of the boundary condition.
    boundary: Grid,
}

impl Frame {
    fn new(n: usize, m: usize) -> Result<Frame> {
        if n > MAX_RADIUS {
            return Err(Error::InvalidInput(format!("box radius {n} exceeds {MAX_RADIUS}")));
        }
        if m >= n {
            return Err(Error::InvalidInput(format!("need n > m, got n = {n}, m = {m}")));
        }
        let side = 2 * n + 3;
        let off = n as i32 + 1;
        let mut f = Frame {
            n,
            m,
            side,
            off,
            full: Grid::EMPTY,
            box_n: Grid::EMPTY,
            box_m: Grid::EMPTY,
            even: Grid::EMPTY,
            odd: Grid::EMPTY,
            boundary: Grid::EMPTY,
        };
        let all: Vec<Vertex> = f.vertices().collect();
        for v in all {
            let r = v.x.abs().max(v.y.abs()) as usize;
            let mut full = f.full;
            f.set(&mut full, v);
            f.full = full;
            if r <= n {
                let mut g = f.box_n;
                f.set(&mut g, v);
                f.box_n = g;
            }
            if r <= m {
                let mut g = f.box_m;
                f.set(&mut g, v);
                f.box_m = g;
            }
            let mut g = if v.is_even() { f.even } else { f.odd };
            f.set(&mut g, v);
            if v.is_even() {
                f.even = g;
            } else {
                f.odd = g;
            }
        }
        f.boundary = f.even.minus(&f.box_n);
        Ok(f)
    }

    fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        let r = self.off;
        (-r..=r).flat_map(move |y| (-r..=r).map(move |x| Vertex::new(x, y)))
    }

    fn in_window(&self, v: Vertex) -> bool {
        v.x.abs() <= self.off && v.y.abs() <= self.off
    }

    fn set(&self, g: &mut Grid, v: Vertex) {
        g.rows[(v.y + self.off) as usize] |= 1 << (v.x + self.off);
    }

    fn get(&self, g: &Grid, v: Vertex) -> bool {
        self.in_window(v) && g.rows[(v.y + self.off) as usize] >> (v.x + self.off) & 1 == 1
    }

    /// Members of `g`, row by row from the bottom.
    fn members<'a>(&'a self, g: &'a Grid) -> impl Iterator<Item = Vertex> + 'a {
        let off = self.off;
        (0..self.side).flat_map(move |i| {
            let mut r = g.rows[i];
            std::iter::from_fn(move || {
                (r != 0).then(|| {
                    let b = r.trailing_zeros();
                    r &= r - 1;
                    Vertex::new(b as i32 - off, i as i32 - off)
                })
            })
        })
    }

    /// Translates by the unit vector `d`, dropping what leaves the window.
    fn shift(&self, g: &Grid, d: Direction) -> Grid {
        let mask = self.full.rows[0];
        let mut out = Grid::EMPTY;
        let s = self.side;
        match d {
            Direction::E => (0..s).for_each(|i| out.rows[i] = (g.rows[i] << 1) & mask),
            Direction::W => (0..s).for_each(|i| out.rows[i] = g.rows[i] >> 1),
            Direction::N => (1..s).for_each(|i| out.rows[i] = g.rows[i - 1]),
            Direction::S => (0..s - 1).for_each(|i| out.rows[i] = g.rows[i + 1]),
        }
        out
    }

    /// Vertices with a neighbor in `g`.
    fn neighbors(&self, g: &Grid) -> Grid {
        let mut out = Grid::EMPTY;
        let mask = self.full.rows[0];
        let s = self.side;
        for i in 0..s {
            let mut r = (g.rows[i] << 1 | g.rows[i] >> 1) & mask;
            if i > 0 {
                r |= g.rows[i - 1];
            }
            if i + 1 < s {
                r |= g.rows[i + 1];
            }
            out.rows[i] = r;
        }
        out
    }

    fn independent(&self, g: &Grid) -> bool {
        (0..self.side).all(|i| g.rows[i] & (g.rows[i] << 1) == 0 && (i == 0 || g.rows[i] & g.rows[i - 1] == 0))
    }

    /// Everything reachable from `seed` inside `allowed`.
    fn flood(&self, seed: &Grid, allowed: &Grid) -> Grid {
        let mut cur = seed.and(allowed);
        loop {
            let next = cur.or(&self.neighbors(&cur)).and(allowed);
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    /// Flood from outside `U_n` that never crosses an edge in `blocked`;
    /// `blocked[d]` holds the vertices `v` whose edge to `v + d` is cut.
    fn flood_cut(&self, blocked: &[Grid; 4]) -> Grid {
        let mut cur = self.full.minus(&self.box_n);
        loop {
            let mut next = cur;
            for d in Direction::ALL {
                let from = cur.minus(&blocked[d.tag() as usize]);
                next = next.or(&self.shift(&from, d));
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }
}

/// A hard-core configuration on `U_n` with even boundary conditions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoxConfig {
    frame_key: (usize, usize),
    /// Occupied vertices inside `U_n` only.
    inner: Grid,
}

impl fmt::Debug for BoxConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoxConfig(n={}, m={}, {:?})", self.frame_key.0, self.frame_key.1, self.occupied())
    }
}

impl BoxConfig {
    /// Validates that `occupied` lies in `U_n` and, with the boundary, is independent.
    pub fn new(n: usize, m: usize, occupied: &[Vertex]) -> Result<BoxConfig> {
        let f = Frame::new(n, m)?;
        let mut inner = Grid::EMPTY;
        for &v in occupied {
            if v.x.unsigned_abs() as usize > n || v.y.unsigned_abs() as usize > n {
                return Err(Error::InvalidInput(format!("{v} lies outside U_{n}")));
            }
            f.set(&mut inner, v);
        }
        let c = BoxConfig { frame_key: (n, m), inner };
        if !f.independent(&c.full(&f)) {
            return Err(Error::InvalidInput("configuration is not an independent set".into()));
        }
        Ok(c)
    }

    fn from_grid(f: &Frame, inner: Grid) -> BoxConfig {
        BoxConfig { frame_key: (f.n, f.m), inner: inner.and(&f.box_n) }
    }

    fn frame(&self) -> Frame {
        Frame::new(self.frame_key.0, self.frame_key.1).expect("validated at construction")
    }

    pub fn n(&self) -> usize {
        self.frame_key.0
    }

    pub fn m(&self) -> usize {
        self.frame_key.1
    }

    /// Occupied vertices of `U_n`, row by row from the bottom.
    pub fn occupied(&self) -> Vec<Vertex> {
        let f = self.frame();
        f.members(&self.inner).collect()
    }

    /// Number of occupied vertices in `U_n`.
    pub fn size(&self) -> u32 {
        self.inner.count()
    }

    /// Occupation of any vertex of `Z^2`.
    pub fn is_occupied(&self, v: Vertex) -> bool {
        let n = self.n() as i32;
        if v.x.abs() > n || v.y.abs() > n {
            return v.is_even();
        }
        self.frame().get(&self.inner, v)
    }

    fn full(&self, f: &Frame) -> Grid {
        self.inner.or(&f.boundary)
    }

    pub fn is_independent(&self) -> bool {
        let f = self.frame();
        f.independent(&self.full(&f))
    }

    /// No odd vertex of `U_m` has an occupied neighbor.
    pub fn is_m_odd(&self) -> bool {
        let f = self.frame();
        f.neighbors(&f.odd.and(&f.box_m)).and(&self.full(&f)).is_empty()
    }

    /// No even vertex of `U_m` has an occupied neighbor.
    pub fn is_m_even(&self) -> bool {
        let f = self.frame();
        f.neighbors(&f.even.and(&f.box_m)).and(&self.full(&f)).is_empty()
    }
}

fn augment_grid(f: &Frame, full: &Grid) -> Grid {
    let free_odd = f.odd.and(&f.box_n).minus(&f.neighbors(full));
    full.or(&free_odd)
}

/// `I'`: `I` together with every odd vertex none of whose neighbors is in `I`.
pub fn augment(i: &BoxConfig) -> Result<BoxConfig> {
    if !i.is_m_odd() {
        return Err(Error::InvalidInput("configuration is not m-odd".into()));
    }
    let f = i.frame();
    Ok(BoxConfig::from_grid(&f, augment_grid(&f, &i.full(&f))))
}

/// A point of the dual lattice: an edge midpoint in doubled coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DualPoint {
    pub x: i32,
    pub y: i32,
}

impl DualPoint {
    fn of_edge(u: Vertex, v: Vertex) -> DualPoint {
        DualPoint { x: u.x + v.x, y: u.y + v.y }
    }
}

/// The contour of an `m`-odd configuration.
#[derive(Clone, Debug)]
pub struct Contour {
    frame_key: (usize, usize),
    /// `gamma`: edges `(u, v)` with `u` inside and `v` outside, sorted.
    gamma: Vec<(Vertex, Vertex)>,
    /// The cycle `Gamma`, as consecutive dual points.
    cycle: Vec<DualPoint>,
    region: Grid,
    interior: Grid,
    /// Whether every square-rule edge came with its reverse.
    symmetric: bool,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    pub fn gamma(&self) -> &[(Vertex, Vertex)] {
        &self.gamma
    }

    pub fn cycle(&self) -> &[DualPoint] {
        &self.cycle
    }

    /// The vertex interior `W`.
    pub fn interior(&self) -> Vec<Vertex> {
        let f = Frame::new(self.frame_key.0, self.frame_key.1).expect("valid frame");
        f.members(&self.interior).collect()
    }

    /// The component `R`.
    pub fn region(&self) -> Vec<Vertex> {
        let f = Frame::new(self.frame_key.0, self.frame_key.1).expect("valid frame");
        f.members(&self.region).collect()
    }
}

fn cut_masks(f: &Frame, gamma: &[(Vertex, Vertex)]) -> [Grid; 4] {
    let mut blocked = [Grid::EMPTY; 4];
    for &(u, v) in gamma {
        for (a, b) in [(u, v), (v, u)] {
            let d = Direction::from_delta(b.x - a.x, b.y - a.y).expect("unit edge");
            f.set(&mut blocked[d.tag() as usize], a);
        }
    }
    blocked
}

/// `W`: vertices that cannot reach the outside of `U_n` without crossing `gamma`.
fn interior_of(f: &Frame, gamma: &[(Vertex, Vertex)]) -> Grid {
    f.full.minus(&f.flood_cut(&cut_masks(f, gamma)))
}

fn perpendicular(d: Direction) -> [Direction; 2] {
    if d.is_horizontal() {
        [Direction::N, Direction::S]
    } else {
        [Direction::E, Direction::W]
    }
}

/// Builds `R`, `gamma` and the cycle `Gamma` for an `m`-odd configuration.
pub fn build_contour(i: &BoxConfig) -> Result<Contour> {
    build_contour_in(&i.frame(), i)
}

fn build_contour_in(f: &Frame, i: &BoxConfig) -> Result<Contour> {
    let full = i.full(f);
    if !f.neighbors(&f.odd.and(&f.box_m)).and(&full).is_empty() {
        return Err(Error::InvalidInput("configuration is not m-odd".into()));
    }
    let aug = augment_grid(f, &full);
    let odd_aug = aug.and(&f.odd);
    let plus = odd_aug.or(&f.neighbors(&odd_aug));
    let mut seed = Grid::EMPTY;
    f.set(&mut seed, Vertex::ORIGIN);
    let region = f.flood(&seed, &plus);
    if !f.box_m.is_subset(&region) {
        return Err(Error::InvalidInput("U_m is not inside one component of the odd closure".into()));
    }
    let outside = f.full.minus(&f.box_n);
    let exterior = f.flood(&outside, &f.full.minus(&region));

    let mut gamma = Vec::new();
    for d in Direction::ALL {
        let starts = region.and(&f.shift(&exterior, d.opposite()));
        gamma.extend(f.members(&starts).map(|u| (u, u.step(d))));
    }
    gamma.sort_unstable();

    // Square rule: for uv and the square u v s t, link uv to vs if s is in R,
    // otherwise to tu.
    // Dense index over doubled window coordinates.
    const SPAN: usize = 4 * (MAX_RADIUS + 1) + 1;
    let mut index = [u16::MAX; SPAN * SPAN];
    let cell = |p: &DualPoint| {
        let h = 2 * f.off;
        (p.x.abs() <= h && p.y.abs() <= h).then(|| (p.y + h) as usize * SPAN + (p.x + h) as usize)
    };
    for (k, &(u, v)) in gamma.iter().enumerate() {
        index[cell(&DualPoint::of_edge(u, v)).expect("inside the window")] = k as u16;
    }
    let lookup = |p: &DualPoint| cell(p).map(|c| index[c]).filter(|&k| k != u16::MAX).map(usize::from);
    let mut out: Vec<[usize; 2]> = vec![[usize::MAX; 2]; gamma.len()];
    let mut closed = true;
    for (k, &(u, v)) in gamma.iter().enumerate() {
        let d = Direction::from_delta(v.x - u.x, v.y - u.y).expect("unit edge");
        for (side, p) in perpendicular(d).into_iter().enumerate() {
            let s = v.step(p);
            let t = u.step(p);
            let target = if f.get(&region, s) { DualPoint::of_edge(v, s) } else { DualPoint::of_edge(t, u) };
            match lookup(&target) {
                Some(j) => out[k][side] = j,
                None => closed = false,
            }
        }
    }
    if !closed {
        return Err(Error::LemmaViolation("square rule links an edge outside gamma".into()));
    }
    let symmetric = out.iter().enumerate().all(|(k, nb)| nb.iter().all(|&j| out[j].contains(&k)));
    if out.iter().any(|nb| nb[0] == nb[1]) {
        return Err(Error::LemmaViolation("Gamma is not 2-regular".into()));
    }
    let mut cycle = Vec::with_capacity(gamma.len());
    if !gamma.is_empty() {
        let (mut prev, mut cur) = (usize::MAX, 0usize);
        loop {
            let (u, v) = gamma[cur];
            cycle.push(DualPoint::of_edge(u, v));
            let next = if out[cur][0] != prev { out[cur][0] } else { out[cur][1] };
            prev = cur;
            cur = next;
            if cur == 0 || cycle.len() > gamma.len() {
                break;
            }
        }
    }
    if cycle.len() != gamma.len() {
        return Err(Error::LemmaViolation(format!(
            "Gamma splits into several cycles ({} of {} vertices on the first)",
            cycle.len(),
            gamma.len()
        )));
    }
    let interior = interior_of(f, &gamma);
    Ok(Contour { frame_key: i.frame_key, gamma, cycle, region, interior, symmetric })
}

/// Apexes `(m_x, m_y - 1/2)` of vees in `Gamma`, sorted by `(y, x)` in
/// doubled coordinates.
pub fn vee_apexes(c: &Contour) -> Vec<DualPoint> {
    let k = c.cycle.len();
    let mut out: Vec<DualPoint> = (0..k)
        .filter_map(|i| {
            let p = c.cycle[i];
            let a = c.cycle[(i + k - 1) % k];
            let b = c.cycle[(i + 1) % k];
            let vertical_mid = p.x % 2 == 0 && p.y.rem_euclid(2) == 1;
            let mut nbs = [(a.x - p.x, a.y - p.y), (b.x - p.x, b.y - p.y)];
            nbs.sort();
            (vertical_mid && nbs == [(-1, 1), (1, 1)]).then_some(p)
        })
        .collect();
    out.sort_by_key(|p| (p.y, p.x));
    out
}

/// Cuts `Gamma` open at `apex` and maps it onto the Manhattan lattice:
/// translate the apex to the origin, rotate clockwise by half a right angle
/// and dilate by `sqrt 2`. The rotated path follows the mirror image of our
/// orientation convention, so the result is reflected across the x-axis;
/// the walk starts east and ends at `(0, -1)`.
pub fn walk_from_vee(c: &Contour, apex: DualPoint) -> Result<TaxiWalk> {
    let k = c.cycle.len();
    let at = c
        .cycle
        .iter()
        .position(|&p| p == apex)
        .ok_or_else(|| Error::InvalidInput("apex is not on the contour".into()))?;
    let forward = c.cycle[(at + 1) % k] == DualPoint { x: apex.x + 1, y: apex.y + 1 };
    TaxiWalk::from_vertices(vee_path(c, at, forward))
        .map_err(|e| Error::LemmaViolation(format!("cut-open contour is not a taxi walk: {e}")))
}

fn vee_path(c: &Contour, at: usize, forward: bool) -> Vec<Vertex> {
    let k = c.cycle.len();
    let apex = c.cycle[at];
    (0..k)
        .map(|j| {
            let p = c.cycle[if forward { (at + j) % k } else { (at + k - j) % k }];
            let (dx, dy) = (p.x - apex.x, p.y - apex.y);
            Vertex::new((dx + dy) / 2, (dx - dy) / 2)
        })
        .collect()
}

/// Same verdict as `walk_from_vee(..).is_ok()` without building the walk;
/// the path is self-avoiding because the cycle is.
fn vee_walk_is_taxi(c: &Contour, apex: DualPoint) -> bool {
    let k = c.cycle.len();
    let Some(at) = c.cycle.iter().position(|&p| p == apex) else { return false };
    let forward = c.cycle[(at + 1) % k] == DualPoint { x: apex.x + 1, y: apex.y + 1 };
    let point = |j: usize| {
        let p = c.cycle[if forward { (at + j) % k } else { (at + k - j) % k }];
        let (dx, dy) = (p.x - apex.x, p.y - apex.y);
        Vertex::new((dx + dy) / 2, (dx - dy) / 2)
    };
    let mut prev: Option<Direction> = None;
    let mut turned = false;
    let mut here = point(0);
    for j in 1..k {
        let next = point(j);
        let Some(d) = Direction::from_delta(next.x - here.x, next.y - here.y) else { return false };
        if !crate::lattice::is_legal_step(here, d) {
            return false;
        }
        if let Some(p) = prev {
            let turn = p != d;
            if turn && turned {
                return false;
            }
            turned = turn;
        }
        prev = Some(d);
        here = next;
    }
    true
}

/// The taxi walk of length `|Gamma| - 1` cut at the lowest, leftmost vee.
pub fn contour_to_taxi_walk(c: &Contour) -> Result<TaxiWalk> {
    let apex = *vee_apexes(c)
        .first()
        .ok_or_else(|| Error::LemmaViolation("contour has no vee".into()))?;
    walk_from_vee(c, apex)
}

/// Between consecutive turns of `Gamma` there are at least two straight
/// steps; after an odd run the turns agree in direction, after an even run
/// they differ.
pub fn check_turn_parity(c: &Contour) -> Result<()> {
    let k = c.cycle.len();
    let step = |i: usize| {
        let (a, b) = (c.cycle[i % k], c.cycle[(i + 1) % k]);
        (b.x - a.x, b.y - a.y)
    };
    // turns[j] = (index of the step after the turn, sign)
    let turns: Vec<(usize, i32)> = (0..k)
        .filter_map(|i| {
            let (p, q) = (step(i + k - 1), step(i));
            (p != q).then(|| (i, (p.0 * q.1 - p.1 * q.0).signum()))
        })
        .collect();
    for (j, &(i, sign)) in turns.iter().enumerate() {
        let (i2, sign2) = turns[(j + 1) % turns.len()];
        let run = (i2 + k - i) % k;
        let run = if run == 0 { k } else { run };
        if run < 2 {
            return Err(Error::LemmaViolation(format!("two consecutive turns at step {i}")));
        }
        if (run % 2 == 1) != (sign == sign2) {
            return Err(Error::LemmaViolation(format!("turns at steps {i} and {i2} break the parity rule")));
        }
    }
    Ok(())
}

/// In no unit square is one side `Gamma`-adjacent to both sides next to it
/// on opposite corners.
pub fn check_square_rule(c: &Contour) -> Result<()> {
    let k = c.cycle.len();
    for i in 0..k {
        let p = c.cycle[i];
        let a = c.cycle[(i + k - 1) % k];
        let b = c.cycle[(i + 1) % k];
        // For a horizontal edge (odd x) the perpendicular offset is in y.
        let horizontal = p.x.rem_euclid(2) == 1;
        let (oa, ob) = if horizontal { (a.y - p.y, b.y - p.y) } else { (a.x - p.x, b.x - p.x) };
        let (sa, sb) = if horizontal { (a.x - p.x, b.x - p.x) } else { (a.y - p.y, b.y - p.y) };
        if oa == ob && sa != sb {
            return Err(Error::LemmaViolation(format!("square rule broken at dual point ({}, {})", p.x, p.y)));
        }
    }
    Ok(())
}

/// Output of the shift map for one direction.
#[derive(Clone, Debug)]
pub struct Shifted {
    pub s: Direction,
    /// `I_s`: `I` moved by `s` inside `W`, unchanged outside.
    pub shifted: BoxConfig,
    /// `~I_s`: vertices of `W` whose preimage `v - s` lies outside `W`.
    pub fresh: Vec<Vertex>,
    /// `I''_s = I_s u ~I_s`, when that union is independent.
    pub augmented: Option<BoxConfig>,
}

struct ShiftGrids {
    shifted: Grid,
    fresh: Grid,
}

fn shift_grids(f: &Frame, full: &Grid, interior: &Grid, s: Direction) -> ShiftGrids {
    let inside = full.and(interior);
    let shifted = full.minus(interior).or(&f.shift(&inside, s));
    let outside_w = f.full.minus(interior);
    let fresh = interior.and(&f.shift(&outside_w, s));
    ShiftGrids { shifted, fresh }
}

/// Applies the shift map in direction `s`.
pub fn shift(i: &BoxConfig, c: &Contour, s: Direction) -> Shifted {
    let f = i.frame();
    let g = shift_grids(&f, &i.full(&f), &c.interior, s);
    let union = g.shifted.or(&g.fresh);
    Shifted {
        s,
        shifted: BoxConfig::from_grid(&f, g.shifted),
        fresh: f.members(&g.fresh).collect(),
        augmented: f.independent(&union).then(|| BoxConfig::from_grid(&f, union)),
    }
}

/// Inverts the shift map from `J = I_s u S`, the direction and `gamma` alone.
pub struct Reconstructor {
    frame: Frame,
    interior: Grid,
}

impl Reconstructor {
    pub fn new(n: usize, m: usize, gamma: &[(Vertex, Vertex)]) -> Result<Self> {
        let frame = Frame::new(n, m)?;
        let interior = interior_of(&frame, gamma);
        Ok(Reconstructor { frame, interior })
    }

    fn fresh(&self, s: Direction) -> Grid {
        let f = &self.frame;
        self.interior.and(&f.shift(&f.full.minus(&self.interior), s))
    }

    fn run(&self, j: &Grid, s: Direction) -> Result<Grid> {
        self.run_with(j, s, &self.fresh(s))
    }

    /// `run` with `~I_s` already known.
    fn run_with(&self, j: &Grid, s: Direction, fresh: &Grid) -> Result<Grid> {
        let f = &self.frame;
        let shifted = j.minus(fresh);
        let inside = shifted.and(&self.interior);
        let back = f.shift(&inside, s.opposite());
        let out = shifted.minus(&self.interior).or(&back);
        let m_odd = f.neighbors(&f.odd.and(&f.box_m)).and(&out).is_empty();
        if f.shift(&back, s) != inside || !f.independent(&out) || !m_odd {
            return Err(Error::Inconsistent("J is not a shifted configuration for this contour".into()));
        }
        Ok(out)
    }

    pub fn reconstruct(&self, j: &BoxConfig, s: Direction) -> Result<BoxConfig> {
        let g = self.run(&j.full(&self.frame), s)?;
        Ok(BoxConfig::from_grid(&self.frame, g))
    }
}

/// Recovers `I` from `J = I_s u S`, `s` and `gamma(I)`.
pub fn reconstruct(j: &BoxConfig, s: Direction, gamma: &[(Vertex, Vertex)]) -> Result<BoxConfig> {
    Reconstructor::new(j.n(), j.m(), gamma)?.reconstruct(j, s)
}

/// Names of the per-configuration checks, in report order.
pub const CHECKS: [&str; 14] = [
    "contour_built",
    "augment",
    "single_cycle",
    "length_mod_4",
    "length_lower_bound",
    "edge_parity",
    "interior_exterior",
    "square_rule",
    "turn_parity",
    "taxi_walk",
    "shift_sizes",
    "shift_m_even",
    "shift_quarter",
    "reconstruction",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub pass: u64,
    pub fail: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub check: String,
    pub detail: String,
    pub occupied: Vec<[i32; 2]>,
}

/// Aggregated results of a sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub n: usize,
    pub m: usize,
    pub mode: String,
    pub seed: Option<u64>,
    pub configurations: u64,
    pub checks: BTreeMap<String, Tally>,
    pub counterexamples: Vec<Counterexample>,
    pub min_contour_length: Option<usize>,
    pub max_contour_length: Option<usize>,
    /// Distinct `(J, s, gamma)` keys checked for collisions (sampled mode).
    pub collision_keys: u64,
    #[serde(skip)]
    tallies: [Tally; CHECKS.len()],
}

impl SweepReport {
    fn empty(n: usize, m: usize, mode: &str, seed: Option<u64>) -> Self {
        SweepReport {
            n,
            m,
            mode: mode.to_string(),
            seed,
            configurations: 0,
            checks: CHECKS.iter().map(|c| (c.to_string(), Tally::default())).collect(),
            counterexamples: Vec::new(),
            min_contour_length: None,
            max_contour_length: None,
            collision_keys: 0,
            tallies: [Tally::default(); CHECKS.len()],
        }
    }

    /// Moves the running tallies into `checks`.
    fn settle(&mut self) {
        for (name, t) in CHECKS.iter().zip(std::mem::take(&mut self.tallies)) {
            let e = self.checks.entry(name.to_string()).or_default();
            e.pass += t.pass;
            e.fail += t.fail;
        }
    }

    pub fn failures(&self) -> u64 {
        self.checks.values().map(|t| t.fail).sum()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }

    fn merge(&mut self, mut o: SweepReport) {
        o.settle();
        self.configurations += o.configurations;
        for (k, t) in o.checks {
            let e = self.checks.entry(k).or_default();
            e.pass += t.pass;
            e.fail += t.fail;
        }
        let room = MAX_COUNTEREXAMPLES.saturating_sub(self.counterexamples.len());
        self.counterexamples.extend(o.counterexamples.into_iter().take(room));
        self.min_contour_length = opt_min(self.min_contour_length, o.min_contour_length);
        self.max_contour_length = self.max_contour_length.max(o.max_contour_length);
        self.collision_keys += o.collision_keys;
    }
}

fn opt_min(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

const MAX_COUNTEREXAMPLES: usize = 10;

/// How thoroughly to exercise the reconstruction map.
#[derive(Clone, Copy, Debug)]
enum SubsetMode {
    /// `S` empty and `S = ~I_s` for every `s`, singletons for the chosen `s`.
    Basic,
    /// Additionally every subset when `|~I_s| <= 10`, else 32 random ones.
    Thorough(u64),
}

struct Recorder<'a> {
    report: &'a mut SweepReport,
    config: &'a BoxConfig,
}

impl Recorder<'_> {
    fn record(&mut self, check: &str, result: std::result::Result<(), String>) {
        let k = CHECKS.iter().position(|c| *c == check).expect("known check");
        let t = &mut self.report.tallies[k];
        match result {
            Ok(()) => t.pass += 1,
            Err(detail) => {
                t.fail += 1;
                if self.report.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    self.report.counterexamples.push(Counterexample {
                        check: check.to_string(),
                        detail,
                        occupied: self.config.occupied().iter().map(|v| [v.x, v.y]).collect(),
                    });
                }
            }
        }
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Runs every structural check on one configuration of `B_n^e`.
fn check_one(f: &Frame, i: &BoxConfig, subsets_mode: SubsetMode, report: &mut SweepReport) -> Option<Checked> {
    report.configurations += 1;
    let mut rec = Recorder { report, config: i };
    let full = i.full(f);
    let aug = augment_grid(f, &full);
    rec.record(
        "augment",
        ensure(f.independent(&aug) && full.is_subset(&aug) && f.odd.and(&f.box_m).is_subset(&aug), || {
            "I' is not an independent superset of I covering the odd vertices of U_m".into()
        }),
    );
    let c = match build_contour_in(f, i) {
        Ok(c) => c,
        Err(e) => {
            rec.record("contour_built", Err(e.to_string()));
            return None;
        }
    };
    rec.record("contour_built", Ok(()));
    let len = c.len();
    rec.report.min_contour_length = opt_min(rec.report.min_contour_length, Some(len));
    rec.report.max_contour_length = rec.report.max_contour_length.max(Some(len));
    rec.record("single_cycle", ensure(c.symmetric && len == c.gamma.len(), || "Gamma is not one symmetric cycle".into()));
    rec.record("length_mod_4", ensure(len % 4 == 0, || format!("|Gamma| = {len}")));
    let m = f.m as u64;
    rec.record(
        "length_lower_bound",
        ensure((len as u64).pow(2) >= 8 * m * m, || format!("|Gamma| = {len} < 2 sqrt(2) m")),
    );
    rec.record(
        "edge_parity",
        ensure(
            c.gamma.iter().all(|&(u, v)| {
                u.is_even() && !f.get(&full, u) && !v.is_even() && !f.get(&aug, v)
            }),
            || "a gamma edge breaks the parity rule".into(),
        ),
    );
    rec.record(
        "interior_exterior",
        ensure(
            c.region.is_subset(&c.interior)
                && c.gamma.iter().all(|&(u, v)| f.get(&c.interior, u) && !f.get(&c.interior, v)),
            || "gamma edge with both ends on one side of Gamma".into(),
        ),
    );
    rec.record("square_rule", check_square_rule(&c).map_err(|e| e.to_string()));
    rec.record("turn_parity", check_turn_parity(&c).map_err(|e| e.to_string()));
    let vees = vee_apexes(&c);
    let walks = if vees.is_empty() {
        Err("contour has no vee".to_string())
    } else {
        vees.iter().try_for_each(|&a| {
            if vee_walk_is_taxi(&c, a) {
                return Ok(());
            }
            match walk_from_vee(&c, a) {
                Ok(w) => Err(format!("fast check rejected a valid walk of length {}", w.len())),
                Err(e) => Err(e.to_string()),
            }
        })
    };
    rec.record("taxi_walk", walks);

    // Shift map, all four directions.
    let size = full.and(&f.box_n).count();
    let mut sizes = Ok(());
    let mut m_even = Ok(());
    let mut best = (0u32, Direction::N);
    let mut grids = Vec::with_capacity(4);
    for s in Direction::ALL {
        let g = shift_grids(f, &full, &c.interior, s);
        let union = g.shifted.or(&g.fresh);
        let fresh = g.fresh.count();
        if sizes.is_ok() {
            sizes = ensure(
                f.independent(&g.shifted)
                    && g.shifted.and(&f.box_n).count() == size
                    && g.shifted.and(&g.fresh).is_empty()
                    && f.independent(&union)
                    && union.count() == g.shifted.count() + fresh,
                || format!("shift {s} breaks independence or sizes"),
            );
        }
        if m_even.is_ok() {
            let even_ok = f.neighbors(&f.even.and(&f.box_m)).and(&union).is_empty();
            let boundary_ok = union.minus(&f.box_n) == f.boundary && g.fresh.is_subset(&f.box_n);
            m_even = ensure(even_ok && boundary_ok, || format!("I''_{s} is not m-even with even boundary"));
        }
        if fresh > best.0 {
            best = (fresh, s);
        }
        grids.push((s, g));
    }
    rec.record("shift_sizes", sizes);
    rec.record("shift_m_even", m_even);
    let gamma_len = c.gamma.len() as u32;
    rec.record(
        "shift_quarter",
        ensure(4 * best.0 >= gamma_len, || format!("max |~I_s| = {} < |gamma|/4 = {gamma_len}/4", best.0)),
    );

    // Reconstruction from (J, s, gamma) only.
    // The contour's interior was computed from gamma alone.
    let recon = Reconstructor { frame: f.clone(), interior: c.interior };
    let mut ok = Ok(());
    let chosen = grids.iter().position(|(_, g)| 4 * g.fresh.count() >= gamma_len).unwrap_or(0);
    for (k, (s, g)) in grids.iter().enumerate() {
        if ok.is_err() {
            break;
        }
        let mut subsets = vec![Grid::EMPTY, g.fresh];
        if k == chosen {
            subsets.extend(chosen_subsets(f, &g.fresh, subsets_mode));
        }
        for sub in &subsets {
            let j = g.shifted.or(sub);
            match recon.run_with(&j, *s, &g.fresh) {
                Ok(back) if back == full => {}
                Ok(_) => {
                    ok = Err(format!("reconstruction after shift {s} returns a different configuration"));
                    break;
                }
                Err(e) => {
                    ok = Err(e.to_string());
                    break;
                }
            }
        }
    }
    rec.record("reconstruction", ok);
    let images = grids
        .iter()
        .flat_map(|(s, g)| [(s.tag(), g.shifted), (s.tag() + 4, g.shifted.or(&g.fresh))])
        .collect();
    Some(Checked { interior: c.interior, images })
}

/// What the collision check needs from a checked configuration.
struct Checked {
    interior: Grid,
    /// `(tag, J)`: tags `0..4` hold `I_s`, `4..8` hold `I''_s`.
    images: Vec<(u8, Grid)>,
}

fn chosen_subsets(f: &Frame, fresh: &Grid, mode: SubsetMode) -> Vec<Grid> {
    let cells: Vec<Vertex> = f.members(fresh).collect();
    let single = |v: &Vertex| {
        let mut g = Grid::EMPTY;
        f.set(&mut g, *v);
        g
    };
    let mut out: Vec<Grid> = cells.iter().map(single).collect();
    if let SubsetMode::Thorough(seed) = mode {
        if cells.len() <= 10 {
            for bits in 0u32..1 << cells.len() {
                let mut g = Grid::EMPTY;
                cells.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).for_each(|(_, v)| f.set(&mut g, *v));
                out.push(g);
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..32 {
                let mut g = Grid::EMPTY;
                cells.iter().filter(|_| rng.gen_bool(0.5)).for_each(|v| f.set(&mut g, *v));
                out.push(g);
            }
        }
    }
    out
}

/// Row masks of `U_n` open to occupation in `B_n^e`: odd vertices of the
/// last ring touch the boundary, and even neighbors of odd vertices of
/// `U_m` must stay empty.
fn allowed_rows(f: &Frame) -> Vec<u16> {
    let ring_odd = f.odd.and(&f.box_n).minus(&shrink(f));
    let forced = f.neighbors(&f.odd.and(&f.box_m));
    let allowed = f.box_n.minus(&ring_odd).minus(&forced);
    (1..=2 * f.n + 1).map(|i| allowed.rows[i]).collect()
}

/// `U_{n-1}` as a grid.
fn shrink(f: &Frame) -> Grid {
    let mut g = Grid::EMPTY;
    let r = f.n as i32 - 1;
    for v in f.vertices().filter(|v| v.x.abs() <= r && v.y.abs() <= r) {
        f.set(&mut g, v);
    }
    g
}

fn row_patterns(allowed: u16) -> Vec<u16> {
    // Submasks of `allowed` without two adjacent bits, in increasing order.
    let mut out = Vec::new();
    let mut sub = allowed;
    loop {
        if sub & (sub << 1) == 0 {
            out.push(sub);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & allowed;
    }
    out.reverse();
    out
}

/// Row-transfer tables over `B_n^e`.
struct RowModel {
    frame: Frame,
    patterns: Vec<Vec<u16>>,
    /// `ways[y][k]`: completions of rows `y..` given pattern `k` in row `y`.
    ways: Vec<Vec<u128>>,
}

impl RowModel {
    fn new(n: usize, m: usize) -> Result<RowModel> {
        let frame = Frame::new(n, m)?;
        if m == 0 {
            return Err(Error::InvalidInput("m must be at least 1".into()));
        }
        let patterns: Vec<Vec<u16>> = allowed_rows(&frame).into_iter().map(row_patterns).collect();
        let h = patterns.len();
        let mut ways: Vec<Vec<u128>> = vec![Vec::new(); h];
        ways[h - 1] = vec![1; patterns[h - 1].len()];
        for y in (0..h - 1).rev() {
            let next = &ways[y + 1];
            ways[y] = patterns[y]
                .iter()
                .map(|&p| {
                    patterns[y + 1]
                        .iter()
                        .zip(next)
                        .filter(|(&q, _)| p & q == 0)
                        .try_fold(0u128, |acc, (_, &w)| acc.checked_add(w))
                        .ok_or_else(|| Error::Overflow("configuration count exceeds u128".into()))
                })
                .collect::<Result<_>>()?;
        }
        Ok(RowModel { frame, patterns, ways })
    }

    fn total(&self) -> Result<u128> {
        self.ways[0]
            .iter()
            .try_fold(0u128, |a, &w| a.checked_add(w))
            .ok_or_else(|| Error::Overflow("configuration count exceeds u128".into()))
    }

    fn grid(&self, rows: &[u16]) -> Grid {
        let mut g = Grid::EMPTY;
        for (y, &r) in rows.iter().enumerate() {
            g.rows[y + 1] = r;
        }
        g
    }

    /// Visits every configuration whose first row is `first`, in order.
    fn for_each_from(&self, first: u16, visit: &mut impl FnMut(Grid)) {
        let mut rows = vec![first];
        self.descend(&mut rows, visit);
    }

    fn descend(&self, rows: &mut Vec<u16>, visit: &mut impl FnMut(Grid)) {
        let y = rows.len();
        if y == self.patterns.len() {
            visit(self.grid(rows));
            return;
        }
        let prev = rows[y - 1];
        for &q in &self.patterns[y] {
            if prev & q == 0 {
                rows.push(q);
                self.descend(rows, visit);
                rows.pop();
            }
        }
    }

    /// One uniformly random configuration.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Grid> {
        let mut rows = Vec::with_capacity(self.patterns.len());
        let mut pick = |cands: Vec<(u16, u128)>| -> u16 {
            let total: u128 = cands.iter().map(|c| c.1).sum();
            let mut r = rng.gen_range(0..total);
            for (p, w) in &cands {
                if r < *w {
                    return *p;
                }
                r -= w;
            }
            unreachable!("weights sum to total")
        };
        self.total()?;
        let first = pick(self.patterns[0].iter().copied().zip(self.ways[0].iter().copied()).collect());
        rows.push(first);
        for y in 1..self.patterns.len() {
            let prev = rows[y - 1];
            let cands = self.patterns[y]
                .iter()
                .copied()
                .zip(self.ways[y].iter().copied())
                .filter(|(q, _)| prev & q == 0)
                .collect();
            rows.push(pick(cands));
        }
        Ok(self.grid(&rows))
    }
}

/// `|B_n^e|` for the given `m`.
pub fn count_configurations(n: usize, m: usize) -> Result<u128> {
    RowModel::new(n, m)?.total()
}

/// Calls `visit` on every configuration of `B_n^e`, in a fixed order.
pub fn for_each_configuration(n: usize, m: usize, mut visit: impl FnMut(&BoxConfig)) -> Result<()> {
    let model = RowModel::new(n, m)?;
    for &first in &model.patterns[0] {
        model.for_each_from(first, &mut |g| visit(&BoxConfig::from_grid(&model.frame, g)));
    }
    Ok(())
}

/// `count` configurations drawn uniformly from `B_n^e` with a seeded ChaCha8 stream.
pub fn sample_configurations(n: usize, m: usize, count: usize, seed: u64) -> Result<Vec<BoxConfig>> {
    let model = RowModel::new(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Ok(BoxConfig::from_grid(&model.frame, model.sample(&mut rng)?))).collect()
}

/// Largest `B_n^e` an exhaustive sweep will take on.
pub const EXHAUSTIVE_LIMIT: u128 = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

/// Runs every check over `B_n^e`, exhaustively or on a uniform sample.
pub fn sweep(n: usize, m: usize, mode: SweepMode, jobs: usize) -> Result<SweepReport> {
    crate::enumerate::validate_jobs(jobs)?;
    let model = RowModel::new(n, m)?;
    let f = &model.frame;
    match mode {
        SweepMode::Exhaustive => {
            let total = model.total()?;
            if total > EXHAUSTIVE_LIMIT {
                return Err(Error::InvalidInput(format!(
                    "B_{n}^e has {total} configurations; sample instead"
                )));
            }
            let firsts = &model.patterns[0];
            let seconds: Vec<(u16, u16)> = firsts
                .iter()
                .flat_map(|&a| model.patterns[1].iter().filter(move |&&b| a & b == 0).map(move |&b| (a, b)))
                .collect();
            let parts: Vec<SweepReport> = with_jobs(jobs, || {
                seconds
                    .par_iter()
                    .map(|&(a, b)| {
                        let mut rep = SweepReport::empty(n, m, "exhaustive", None);
                        let mut rows = vec![a, b];
                        model.descend(&mut rows, &mut |g| {
                            check_one(f, &BoxConfig::from_grid(f, g), SubsetMode::Basic, &mut rep);
                        });
                        rep
                    })
                    .collect()
            })?;
            let mut report = SweepReport::empty(n, m, "exhaustive", None);
            parts.into_iter().for_each(|p| report.merge(p));
            Ok(report)
        }
        SweepMode::Sampled { samples, seed } => {
            let configs = sample_configurations(n, m, samples, seed)?;
            let parts: Vec<(SweepReport, Option<Checked>, Grid)> = with_jobs(jobs, || {
                configs
                    .par_iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let mut rep = SweepReport::empty(n, m, "sampled", Some(seed));
                        let sub_seed = seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                        let out = check_one(f, c, SubsetMode::Thorough(sub_seed), &mut rep);
                        (rep, out, c.full(f))
                    })
                    .collect()
            })?;
            let mut report = SweepReport::empty(n, m, "sampled", Some(seed));
            let mut seen: HashMap<(Grid, u8, Grid), Grid> = HashMap::new();
            let mut collision = None;
            for (rep, out, full) in parts {
                report.merge(rep);
                let Some(out) = out else { continue };
                for (tag, j) in out.images {
                    match seen.entry((j, tag, out.interior)) {
                        std::collections::hash_map::Entry::Occupied(e) => {
                            if *e.get() != full {
                                collision = Some(full);
                            }
                        }
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(full);
                        }
                    }
                }
            }
            report.collision_keys = seen.len() as u64;
            let t = report.checks.entry("reconstruction".into()).or_default();
            if let Some(full) = collision {
                t.fail += 1;
                report.counterexamples.push(Counterexample {
                    check: "reconstruction".into(),
                    detail: "two configurations share (J, s, gamma)".into(),
                    occupied: f.members(&full.and(&f.box_n)).map(|v| [v.x, v.y]).collect(),
                });
            }
            Ok(report)
        }
    }
}

/// The geometric tail `sum_{l >= L} r^l = r^L / (1 - r)` behind the Peierls
/// estimate, with `r = mu^4 / (1 + lambda)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub mu: f64,
    pub lambda: f64,
    pub m: usize,
    pub ratio: f64,
    /// Smallest `l` with `2 l^2 >= m^2`, i.e. `l >= m / sqrt 2`.
    pub start: u64,
    pub tail: f64,
    pub partial_sum: f64,
    pub below_third: bool,
    /// Smallest `m` whose tail is below 1/3.
    pub minimal_m: usize,
}

/// Smallest integer `l` with `l >= sqrt(2) m / 2`.
pub fn tail_start(m: usize) -> u64 {
    let m2 = (m as u128).pow(2);
    let mut l = ((m as f64) / 2f64.sqrt()).floor() as u128;
    while 2 * l * l < m2 {
        l += 1;
    }
    while l > 0 && 2 * (l - 1) * (l - 1) >= m2 {
        l -= 1;
    }
    l as u64
}

/// `r^L / (1 - r)`; diverges for `r >= 1`.
pub fn geometric_tail(ratio: f64, start: u64) -> Result<f64> {
    if !ratio.is_finite() || ratio < 0.0 {
        return Err(Error::InvalidInput(format!("ratio must be a non-negative number, got {ratio}")));
    }
    if ratio >= 1.0 {
        return Err(Error::Divergence { ratio });
    }
    Ok(ratio.powf(start as f64) / (1.0 - ratio))
}

/// Sums terms from `r^L` until they stop mattering.
fn partial_tail(ratio: f64, start: u64) -> f64 {
    let mut term = ratio.powf(start as f64);
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for _ in 0..10_000_000u64 {
        let y = term - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        if term <= sum * 1e-18 || term == 0.0 {
            break;
        }
        term *= ratio;
    }
    sum
}

/// Peierls tail at `m`, the cross-check by direct summation, and the smallest
/// `m` for which the tail drops below 1/3.
pub fn peierls_tail(mu: f64, lambda: f64, m: usize) -> Result<TailReport> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidInput(format!("mu must be positive, got {mu}")));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    let ratio = mu.powi(4) / (1.0 + lambda);
    let start = tail_start(m);
    let tail = geometric_tail(ratio, start)?;
    let partial_sum = partial_tail(ratio, start);
    if (partial_sum - tail).abs() > 1e-9 * tail.max(f64::MIN_POSITIVE) {
        return Err(Error::Inconsistent(format!("closed form {tail} disagrees with partial sum {partial_sum}")));
    }
    let mut minimal_m = 1;
    while geometric_tail(ratio, tail_start(minimal_m))? >= 1.0 / 3.0 {
        minimal_m += 1;
        if minimal_m > 1 << 24 {
            return Err(Error::InvalidInput("tail decays too slowly to reach 1/3".into()));
        }
    }
    Ok(TailReport { mu, lambda, m, ratio, start, tail, partial_sum, below_third: tail < 1.0 / 3.0, minimal_m })
}
