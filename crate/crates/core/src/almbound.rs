//! Alm's transfer-matrix upper bound.
//!
//! Rows are indexed by the length-`m` prefix of a walk of length `n`, columns
//! by the canonical image of its length-`m` suffix. The connective constant is
//! at most `lambda_1^(1/(n-m))`, where `lambda_1` is the spectral radius. The
//! spectral radius is certified with the Collatz-Wielandt inequality
//! `lambda_1 <= max_i (Mv)_i / v_i`, evaluated exactly on an integer vector.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::bounds::{validate_precision, BoundDirection, BoundReport};
use crate::enumerate::{fold_subtrees, for_each_walk, validate_jobs, AllTaxiWalks, WalkView, DEFAULT_SPLIT_DEPTH};
use crate::error::{Error, Result};
use crate::lattice::Symmetry;
use crate::numeric::{nth_root_ratio, Decimal, Rounding};
use crate::table::write_atomic;
use crate::walk::encoding_key;

/// Desk-scale defaults, dimension `c_8 = 68`.
pub const DEFAULT_M: usize = 8;
pub const DEFAULT_N: usize = 28;

/// Sparse nonnegative matrix over length-`m` walks in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferMatrix {
    pub m: usize,
    pub n: usize,
    dim: usize,
    /// Row-major `(i, j) -> count`, zero entries omitted.
    entries: BTreeMap<(u32, u32), u64>,
}

/// Sorted encoding keys of every walk of length `m`; the rank is the index.
fn walk_keys(m: usize) -> Vec<u64> {
    if m == 0 {
        return vec![0];
    }
    let mut keys = Vec::new();
    for_each_walk(&AllTaxiWalks, m, |w| keys.push(encoding_key(w.dirs[0], w.letters)));
    debug_assert!(keys.windows(2).all(|p| p[0] < p[1]));
    keys
}

fn rank(keys: &[u64], key: u64) -> u32 {
    keys.binary_search(&key).expect("every length-m walk is indexed") as u32
}

/// `(prefix index, suffix index)` of a complete walk.
fn cell(keys: &[u64], m: usize, w: &WalkView<'_>) -> (u32, u32) {
    if m == 0 {
        return (0, 0);
    }
    let n = w.len();
    let row = rank(keys, encoding_key(w.dirs[0], &w.letters[..m - 1]));
    let cut = n - m;
    let first = Symmetry::new(w.vertices[cut]).apply_direction(w.dirs[cut]);
    let col = rank(keys, encoding_key(first, &w.letters[cut..n - 1]));
    (row, col)
}

fn add_entry(map: &mut HashMap<(u32, u32), u64>, key: (u32, u32), by: u64) -> Result<()> {
    let e = map.entry(key).or_insert(0);
    *e = e.checked_add(by).ok_or_else(|| Error::Overflow(format!("matrix entry {key:?} exceeds 64 bits")))?;
    Ok(())
}

/// Builds `A(m, n)` in one pass over the walks of length `n`.
pub fn build_transfer_matrix(m: usize, n: usize, jobs: usize) -> Result<TransferMatrix> {
    validate_jobs(jobs)?;
    if m >= n {
        return Err(Error::InvalidInput(format!("need m < n, got m = {m}, n = {n}")));
    }
    if m >= 63 {
        return Err(Error::InvalidInput(format!("prefix length {m} is too large")));
    }
    let keys = walk_keys(m);
    let parts = fold_subtrees(&AllTaxiWalks, n, jobs, DEFAULT_SPLIT_DEPTH, HashMap::new, |acc, w| {
        *acc.entry(cell(&keys, m, w)).or_insert(0u64) += 1;
    })?;
    let mut merged = HashMap::new();
    for part in parts {
        for (k, v) in part {
            add_entry(&mut merged, k, v)?;
        }
    }
    Ok(TransferMatrix { m, n, dim: keys.len(), entries: merged.into_iter().collect() })
}

impl TransferMatrix {
    /// A matrix from explicit triples, mostly for tests and reloaded dumps.
    pub fn from_entries(m: usize, n: usize, dim: usize, triples: impl IntoIterator<Item = (usize, usize, u64)>) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, j, v) in triples {
            if i >= dim || j >= dim {
                return Err(Error::InvalidInput(format!("entry ({i},{j}) outside dimension {dim}")));
            }
            if v > 0 {
                add_entry(&mut map, (i as u32, j as u32), v)?;
            }
        }
        Ok(TransferMatrix { m, n, dim, entries: map.into_iter().collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.entries.get(&(i as u32, j as u32)).copied().unwrap_or(0)
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> BigUint {
        self.entries.values().fold(BigUint::zero(), |acc, &v| acc + v)
    }

    /// `P M P^T` for the relabeling `i -> perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<TransferMatrix> {
        let mut seen = vec![false; self.dim];
        if perm.len() != self.dim || !perm.iter().all(|&p| p < self.dim && !std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidInput("not a permutation of the matrix indices".into()));
        }
        let entries = self
            .entries
            .iter()
            .map(|(&(i, j), &v)| ((perm[i as usize] as u32, perm[j as usize] as u32), v))
            .collect();
        Ok(TransferMatrix { m: self.m, n: self.n, dim: self.dim, entries })
    }

    fn mul_f64(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (&(i, j), &a) in &self.entries {
            out[i as usize] += a as f64 * v[j as usize];
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,count\n");
        for (&(i, j), v) in &self.entries {
            out.push_str(&format!("{i},{j},{v}\n"));
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Power-iteration settings for the eigenvalue certificate.
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub max_iters: usize,
    /// Stop once `(max ratio - min ratio) <= tol * max ratio`.
    pub tol: f64,
    /// Entries of the iterate are kept at least `floor` times its maximum.
    pub floor: f64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration { max_iters: 20_000, tol: 1e-14, floor: 1e-12 }
    }
}

/// An exact rational upper bound `numerator / denominator` on the spectral radius.
#[derive(Clone, Debug, Serialize)]
pub struct EigenBound {
    pub numerator: BigUint,
    pub denominator: BigUint,
    /// Exact Collatz-Wielandt lower ratio `min_i (Mv)_i / v_i` at the same vector.
    pub lower_numerator: BigUint,
    pub lower_denominator: BigUint,
    /// Best floating-point max-ratio after each iteration; nonincreasing.
    pub history: Vec<f64>,
}

impl EigenBound {
    pub fn value(&self, scale: u32) -> Decimal {
        Decimal::from_ratio(&self.numerator, &self.denominator, scale, Rounding::Up)
    }

    pub fn upper_f64(&self) -> f64 {
        ratio_f64(&self.numerator, &self.denominator)
    }

    pub fn lower_f64(&self) -> f64 {
        ratio_f64(&self.lower_numerator, &self.lower_denominator)
    }
}

fn ratio_f64(a: &BigUint, b: &BigUint) -> f64 {
    let shift = a.bits().max(b.bits()).saturating_sub(1000);
    (a >> shift).to_f64().unwrap_or(f64::NAN) / (b >> shift).to_f64().unwrap_or(f64::NAN)
}

/// Collatz-Wielandt upper bound on the spectral radius of `m`.
pub fn dominant_eigenvalue_upper(m: &TransferMatrix, iters: usize, tol: f64) -> Result<EigenBound> {
    dominant_eigenvalue_upper_with(m, &PowerIteration { max_iters: iters, tol, ..PowerIteration::default() })
}

pub fn dominant_eigenvalue_upper_with(m: &TransferMatrix, cfg: &PowerIteration) -> Result<EigenBound> {
    if m.entries.is_empty() {
        return Err(Error::InvalidInput("matrix is zero".into()));
    }
    let dim = m.dim;
    let mut v = vec![1.0f64; dim];
    let mut w = vec![0.0f64; dim];
    let mut best = f64::INFINITY;
    let mut best_v = v.clone();
    let mut history = Vec::new();
    for _ in 0..cfg.max_iters.max(1) {
        m.mul_f64(&v, &mut w);
        let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
        for (a, b) in w.iter().zip(&v) {
            let r = a / b;
            hi = hi.max(r);
            lo = lo.min(r);
        }
        if hi < best {
            best = hi;
            best_v.clone_from(&v);
        }
        history.push(best);
        if hi - lo <= cfg.tol * hi {
            break;
        }
        // Iterating with M + I avoids oscillation when M is periodic.
        let top = w.iter().zip(&v).map(|(a, b)| a + b).fold(0.0f64, f64::max);
        for (x, y) in v.iter_mut().zip(&w) {
            *x = ((*x + y) / top).max(cfg.floor);
        }
    }
    let (numerator, denominator, lower_numerator, lower_denominator) = certify(m, &best_v);
    Ok(EigenBound { numerator, denominator, lower_numerator, lower_denominator, history })
}

/// Exact extreme ratios of `M u / u` for the integer vector `u ~ 2^52 v`.
fn certify(m: &TransferMatrix, v: &[f64]) -> (BigUint, BigUint, BigUint, BigUint) {
    let top = v.iter().copied().fold(0.0f64, f64::max);
    let u: Vec<BigUint> = v
        .iter()
        .map(|x| BigUint::from(((x / top) * 2f64.powi(52)).round().max(1.0) as u64))
        .collect();
    let mut mu = vec![BigUint::zero(); m.dim];
    for (&(i, j), &a) in &m.entries {
        mu[i as usize] += &u[j as usize] * a;
    }
    let (mut hn, mut hd) = (BigUint::zero(), BigUint::from(1u32));
    let (mut ln, mut ld) = (mu[0].clone(), u[0].clone());
    for (p, q) in mu.into_iter().zip(u) {
        if &p * &hd > &hn * &q {
            hn = p.clone();
            hd = q.clone();
        }
        if &p * &ld < &ln * &q {
            ln = p;
            ld = q;
        }
    }
    (hn, hd, ln, ld)
}

/// `lambda_1(A(m, n))^(1/(n-m))`, rounded up. `m = 0` gives `c_n^(1/n)`.
pub fn alm_upper_bound(m: usize, n: usize, jobs: usize, precision: u32) -> Result<BoundReport> {
    validate_precision(precision)?;
    let matrix = build_transfer_matrix(m, n, jobs)?;
    alm_bound_from_matrix(&matrix, &PowerIteration::default(), precision)
}

pub fn alm_bound_from_matrix(matrix: &TransferMatrix, cfg: &PowerIteration, precision: u32) -> Result<BoundReport> {
    validate_precision(precision)?;
    let eig = dominant_eigenvalue_upper_with(matrix, cfg)?;
    let root = (matrix.n - matrix.m) as u32;
    let value = nth_root_ratio(&eig.numerator, &eig.denominator, root, precision, Rounding::Up);
    Ok(BoundReport::new("alm", BoundDirection::Upper, value)
        .with_param("m", matrix.m)
        .with_param("n", matrix.n)
        .with_param("dim", matrix.dim)
        .with_param("lambda1_upper", eig.value(12))
        .with_param("iterations", eig.history.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::TAXI_WALK_COUNTS;
    use crate::walkcount::subadditive_upper_bound;

    #[test]
    fn matrix_totals_match_walk_counts() {
        for (m, n) in [(1, 2), (2, 4), (1, 7), (3, 9), (4, 12)] {
            let a = build_transfer_matrix(m, n, 1).unwrap();
            assert_eq!(a.total(), BigUint::from(TAXI_WALK_COUNTS[n - 1]), "({m},{n})");
            assert_eq!(a.dim() as u64, TAXI_WALK_COUNTS[m - 1]);
        }
        assert!(build_transfer_matrix(3, 3, 1).is_err());
    }

    #[test]
    fn parallel_build_is_identical() {
        let a = build_transfer_matrix(3, 15, 1).unwrap();
        let b = build_transfer_matrix(3, 15, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn diagonal_matrices() {
        let id = TransferMatrix::from_entries(1, 2, 3, (0..3).map(|i| (i, i, 1))).unwrap();
        let e = dominant_eigenvalue_upper(&id, 100, 1e-14).unwrap();
        assert_eq!(e.value(6).to_string(), "1.000000");
        let d = TransferMatrix::from_entries(1, 2, 2, [(0, 0, 2), (1, 1, 1)]).unwrap();
        let e = dominant_eigenvalue_upper(&d, 200, 1e-14).unwrap();
        assert!(e.upper_f64() >= 2.0 && e.upper_f64() < 2.0 + 1e-9);
    }

    #[test]
    fn periodic_matrix_converges() {
        let p = TransferMatrix::from_entries(1, 2, 2, [(0, 1, 3), (1, 0, 3)]).unwrap();
        let e = dominant_eigenvalue_upper(&p, 500, 1e-14).unwrap();
        assert!((e.upper_f64() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn certificate_brackets_and_history_is_monotone() {
        let a = build_transfer_matrix(2, 12, 1).unwrap();
        let e = dominant_eigenvalue_upper(&a, 5000, 1e-14).unwrap();
        assert!(e.lower_f64() <= e.upper_f64());
        assert!(e.history.windows(2).all(|w| w[1] <= w[0]));
        let root = e.upper_f64().powf(1.0 / 10.0);
        assert!(root > 1.5557 && root <= 1.61804, "{root}");
    }

    #[test]
    fn m_zero_is_subadditive_bound() {
        let t = crate::reference::taxi_walk_table();
        for n in [5, 12, 18] {
            let alm = alm_upper_bound(0, n, 1, 5).unwrap();
            let sub = subadditive_upper_bound(&t, n, 5).unwrap();
            assert_eq!(alm.value, sub.plain.value, "n = {n}");
        }
    }

    #[test]
    fn bound_ignores_index_order() {
        let a = build_transfer_matrix(2, 6, 1).unwrap();
        let perm = [2, 0, 3, 1];
        let b = a.permuted(&perm).unwrap();
        let cfg = PowerIteration::default();
        let x = alm_bound_from_matrix(&a, &cfg, 10).unwrap();
        let y = alm_bound_from_matrix(&b, &cfg, 10).unwrap();
        assert_eq!(x.value, y.value);
        assert!(a.permuted(&[0, 0, 1, 2]).is_err());
    }

    #[test]
    fn csv_dump() {
        let a = build_transfer_matrix(1, 2, 1).unwrap();
        let csv = a.to_csv();
        assert!(csv.starts_with("i,j,count\n"));
        assert_eq!(csv.lines().count(), 1 + a.nonzeros());
    }
}
