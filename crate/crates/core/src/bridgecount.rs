//! Bridges, irreducible bridges and the lower bounds they give.
//!
//! A bridge starts with the step `(0,0) -> (1,0)`, never returns to the
//! y-axis, and ends with a horizontal step onto a vertex of maximal
//! x-coordinate. Irreducible bridges are those that do not split at a
//! cutvertex into two shorter bridges; their generating function `A`
//! satisfies `B = 1 / (1 - A)`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::bounds::{validate_precision, BoundDirection, BoundReport};
use crate::enumerate::{count_walks, for_each_walk, WalkRules, WalkView};
use crate::error::{Error, Result};
use crate::lattice::{canonical_map, is_legal_walk, Direction, Vertex};
use crate::numeric::{nth_root, Decimal, Rounding};
use crate::series::IntSeries;
use crate::table::CountTable;
use crate::walk::turn_word_of;

/// Walk rules selecting bridges.
#[derive(Clone, Copy, Debug, Default)]
pub struct BridgeRules;

impl WalkRules for BridgeRules {
    fn first_steps(&self) -> &[Direction] {
        &[Direction::E]
    }

    #[inline]
    fn admits(&self, v: Vertex) -> bool {
        v.x >= 1
    }

    #[inline]
    fn accepts(&self, w: &WalkView<'_>) -> bool {
        w.last_dir().is_some_and(Direction::is_horizontal) && w.end().x == w.max_x
    }
}

/// Checks the bridge definition directly on a vertex list.
pub fn is_bridge(vertices: &[Vertex]) -> bool {
    if vertices.len() < 2 || vertices[0] != Vertex::ORIGIN || vertices[1] != Vertex::new(1, 0) {
        return false;
    }
    if !is_legal_walk(vertices) || turn_word_of(vertices).has_double_turn() {
        return false;
    }
    let mut seen = std::collections::HashSet::new();
    if !vertices.iter().all(|v| seen.insert(*v)) {
        return false;
    }
    if vertices[1..].iter().any(|v| v.x == 0) {
        return false;
    }
    let n = vertices.len() - 1;
    let last_horizontal = vertices[n].y == vertices[n - 1].y;
    let max_x = vertices.iter().map(|v| v.x).max().expect("non-empty");
    last_horizontal && vertices[n].x == max_x
}

/// `b_n`, with `b_0 = 1`.
pub fn count_bridges(n: usize, jobs: usize) -> Result<BigUint> {
    count_walks(&BridgeRules, n, jobs)
}

/// Table of `b_0 ..= b_max_n`.
pub fn bridge_table(max_n: usize, jobs: usize) -> Result<CountTable> {
    let mut t = CountTable::new("bridges");
    for n in 0..=max_n {
        t.insert(n, count_bridges(n, jobs)?);
    }
    Ok(t)
}

/// Whether the internal vertex `vertices[i]` of a bridge is a cutvertex.
pub fn is_cutvertex(vertices: &[Vertex], i: usize) -> bool {
    let n = vertices.len() - 1;
    if i == 0 || i >= n {
        return false;
    }
    let v = vertices[i];
    if vertices[i + 1] != Vertex::new(v.x + 1, v.y) {
        return false;
    }
    if !is_bridge(&vertices[..=i]) {
        return false;
    }
    canonical_map(v, &vertices[i..]).is_ok_and(|tail| is_bridge(&tail))
}

/// `a_n` by direct enumeration: bridges of length `n` with no cutvertex.
pub fn enumerate_irreducible_bridges(n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::InvalidInput("irreducible bridges have length at least 1".into()));
    }
    let mut count = 0u64;
    for_each_walk(&BridgeRules, n, |w| {
        if !(1..n).any(|i| is_cutvertex(w.vertices, i)) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// `a_1 ..= a_N` from `b_0 ..= b_N` via `A = 1 - 1/B`; `a_0 = 0`.
pub fn irreducible_from_bridges(bridges: &CountTable, order: usize) -> Result<CountTable> {
    let b = bridges.dense(order)?;
    if !b[0].is_one() {
        return Err(Error::InvalidInput(format!("b_0 must be 1, got {}", b[0])));
    }
    let series = IntSeries::from_unsigned(&b, order);
    let one_minus_a = series.inverse()?;
    let a = &IntSeries::one(order) - &one_minus_a;
    let coeffs = a.to_unsigned().ok_or_else(|| {
        Error::Inconsistent("inversion produced a negative irreducible-bridge count".into())
    })?;
    let mut t = CountTable::new("irreducible_bridges");
    for (n, c) in coeffs.into_iter().enumerate() {
        t.insert(n, c);
    }
    Ok(t)
}

/// Expands `1 / (1 - A)` back into bridge counts.
pub fn bridges_from_irreducible(irreducible: &CountTable, order: usize) -> Result<CountTable> {
    let mut a = irreducible.dense(order)?;
    a[0] = BigUint::zero();
    let a = IntSeries::from_unsigned(&a, order);
    let b = (&IntSeries::one(order) - &a).inverse()?;
    let coeffs = b.to_unsigned().ok_or_else(|| Error::Inconsistent("negative bridge count".into()))?;
    Ok(CountTable::from_values("bridges", coeffs.into_iter().enumerate()))
}

/// `b_n^{1/n}` rounded down.
pub fn bridge_lower_bound(bridges: &CountTable, n: usize, precision: u32) -> Result<BoundReport> {
    validate_precision(precision)?;
    if n == 0 {
        return Err(Error::InvalidInput("bridge bound needs n >= 1".into()));
    }
    let b = bridges.get(n)?;
    let value = nth_root(b, n as u32, precision, Rounding::Down);
    Ok(BoundReport::new("bridge", BoundDirection::Lower, value)
        .with_param("n", n)
        .with_param("b_n", b))
}

/// Result of the bisection for `sum a_n x^n = 1`.
#[derive(Clone, Debug)]
pub struct IrreducibleRoot {
    /// The right endpoint `numerator / 2^exponent`, where the sum exceeds 1.
    pub numerator: BigUint,
    pub exponent: u32,
    pub report: BoundReport,
}

impl IrreducibleRoot {
    pub fn x_star(&self) -> f64 {
        self.numerator.to_f64().unwrap_or(f64::NAN) / 2f64.powi(self.exponent as i32)
    }
}

/// `sum_n a_n x^n` compared with 1 at `x = k / 2^q`, exactly.
fn exceeds_one(a: &[BigUint], k: &BigUint, q: u32) -> bool {
    let order = a.len() - 1;
    let mut total = BigUint::zero();
    let mut k_pow = BigUint::one();
    for (n, a_n) in a.iter().enumerate() {
        if n > 0 {
            k_pow *= k;
            if !a_n.is_zero() {
                total += (a_n * &k_pow) << (q as usize * (order - n));
            }
        }
    }
    total > BigUint::one() << (q as usize * order)
}

/// Lower bound `1/x` where `sum_{n <= N} a_n x^n > 1`, found by exact
/// dyadic bisection on `(0, 1)` to within `tolerance`.
pub fn irreducible_lower_bound(irreducible: &CountTable, tolerance: f64, precision: u32) -> Result<IrreducibleRoot> {
    validate_precision(precision)?;
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::InvalidInput(format!("tolerance must lie in (0, 1), got {tolerance}")));
    }
    let order = irreducible.max_n();
    if order == 0 {
        return Err(Error::InvalidInput("no irreducible-bridge counts supplied".into()));
    }
    let mut a = vec![BigUint::zero()];
    a.extend((1..=order).map(|n| irreducible.get(n).cloned()).collect::<Result<Vec<_>>>()?);

    let steps = (-tolerance.log2()).ceil().clamp(1.0, 1000.0) as u32;
    if !exceeds_one(&a, &BigUint::one(), 0) {
        return Err(Error::NoRoot(format!(
            "sum of a_n x^n stays at or below 1 on (0,1) at truncation {order}"
        )));
    }
    // Invariant: sum at lo/2^q is <= 1, sum at hi/2^q is > 1.
    let mut lo = BigUint::zero();
    let mut hi = BigUint::one();
    let mut q = 0u32;
    for _ in 0..steps {
        lo <<= 1;
        hi <<= 1;
        q += 1;
        let mid = (&lo + &hi) >> 1;
        if exceeds_one(&a, &mid, q) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let value = Decimal::from_ratio(&(BigUint::one() << q), &hi, precision, Rounding::Down);
    let report = BoundReport::new("irreducible-bridge", BoundDirection::Lower, value)
        .with_param("truncation", order)
        .with_param("tolerance", tolerance)
        .with_param("x_star", format!("{hi}/2^{q}"));
    Ok(IrreducibleRoot { numerator: hi, exponent: q, report })
}
