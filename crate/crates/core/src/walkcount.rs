//! Counting taxi walks and the subadditivity upper bound.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bounds::{validate_precision, BoundDirection, BoundReport};
use crate::enumerate::{count_walks, for_each_walk, validate_jobs, AllTaxiWalks};
use crate::error::{Error, Result};
use crate::numeric::{nth_root, nth_root_ratio, Rounding};
use crate::table::CountTable;
use crate::walk::TaxiWalk;

/// `c_n`, the number of taxi walks of length `n` from the origin.
///
/// `c_0 = 1` counts the empty walk.
pub fn count_taxi_walks(n: usize, jobs: usize) -> Result<BigUint> {
    validate_jobs(jobs)?;
    count_walks(&AllTaxiWalks, n, jobs)
}

/// Calls `visitor` once per taxi walk of length `n`, in lexicographic order
/// of `(first step, turn word)` with `N < E` and `s < t`.
pub fn enumerate_taxi_walks(n: usize, mut visitor: impl FnMut(TaxiWalk)) {
    if n == 0 {
        return;
    }
    for_each_walk(&AllTaxiWalks, n, |w| visitor(w.to_walk()));
}

/// Table of `c_0 ..= c_max_n`.
pub fn taxi_walk_table(max_n: usize, jobs: usize) -> Result<CountTable> {
    let mut t = CountTable::new("taxi_walks");
    for n in 0..=max_n {
        t.insert(n, count_taxi_walks(n, jobs)?);
    }
    Ok(t)
}

/// Fibonacci number `f_k` with `f_0 = 0`, `f_1 = 1`.
pub fn fibonacci(k: usize) -> BigUint {
    let (mut a, mut b) = (BigUint::zero(), BigUint::one());
    for _ in 0..k {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    a
}

/// `2 f_{n+1}`, the number of encodings with no double turn; bounds `c_n`.
pub fn fibonacci_bound(n: usize) -> BigUint {
    fibonacci(n + 1) * 2u32
}

/// Upper bounds `c_n^{1/n}` and, when `c_{n+1}` is known, `(c_{n+1}/2)^{1/n}`.
#[derive(Clone, Debug)]
pub struct SubadditiveBounds {
    pub plain: BoundReport,
    pub shifted: Option<BoundReport>,
}

impl SubadditiveBounds {
    /// The tighter of the two reports.
    pub fn best(&self) -> &BoundReport {
        match &self.shifted {
            Some(s) if s.value < self.plain.value => s,
            _ => &self.plain,
        }
    }
}

pub fn subadditive_upper_bound(table: &CountTable, n: usize, precision: u32) -> Result<SubadditiveBounds> {
    validate_precision(precision)?;
    if n == 0 {
        return Err(Error::InvalidInput("subadditive bound needs n >= 1".into()));
    }
    let c_n = table.get(n)?;
    let plain = BoundReport::new(
        "subadditive",
        BoundDirection::Upper,
        nth_root(c_n, n as u32, precision, Rounding::Up),
    )
    .with_param("n", n)
    .with_param("c_n", c_n);

    let shifted = table.get(n + 1).ok().map(|c_next| {
        let v = nth_root_ratio(c_next, &BigUint::from(2u32), n as u32, precision, Rounding::Up);
        BoundReport::new("subadditive-shifted", BoundDirection::Upper, v)
            .with_param("n", n)
            .with_param("c_n+1", c_next)
    });
    Ok(SubadditiveBounds { plain, shifted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;

    #[test]
    fn small_counts_match_table() {
        for n in 1..=14 {
            let got = count_taxi_walks(n, 1).unwrap();
            assert_eq!(got, BigUint::from(reference::TAXI_WALK_COUNTS[n - 1]), "c_{n}");
        }
        assert_eq!(count_taxi_walks(0, 1).unwrap(), BigUint::one());
    }

    #[test]
    fn enumerate_visits_each_walk_once() {
        let mut walks = Vec::new();
        enumerate_taxi_walks(1, |w| walks.push(w.to_string()));
        assert_eq!(walks, vec!["N:", "E:"]);

        let mut walks = Vec::new();
        enumerate_taxi_walks(5, |w| {
            w.validate().unwrap();
            walks.push(w);
        });
        assert_eq!(walks.len(), 16);
        let mut keys: Vec<String> = walks.iter().map(|w| w.to_string()).collect();
        let sorted = {
            let mut k = keys.clone();
            k.sort_by_key(|s| s.replace('N', "0").replace('E', "1"));
            k
        };
        assert_eq!(keys, sorted);
        keys.dedup();
        assert_eq!(keys.len(), 16);
    }

    #[test]
    fn fibonacci_bound_values() {
        assert_eq!(fibonacci(13), BigUint::from(233u32));
        assert_eq!(fibonacci_bound(1), BigUint::from(2u32));
        assert_eq!(fibonacci_bound(4), BigUint::from(10u32));
        assert_eq!(fibonacci_bound(12), BigUint::from(466u32));
    }

    #[test]
    fn subadditive_examples() {
        let t = reference::taxi_walk_table();
        let b = subadditive_upper_bound(&t, 60, 5).unwrap();
        assert_eq!(b.plain.value.to_string(), "1.60574");
        assert_eq!(b.plain.lambda_value.to_string(), "5.6482");
        assert!(b.shifted.is_none());
        let b = subadditive_upper_bound(&t, 1, 5).unwrap();
        assert_eq!(b.plain.value.to_string(), "2.00000");
        let b = subadditive_upper_bound(&t, 12, 5).unwrap();
        assert_eq!(b.plain.value.to_string(), "1.66685");
        let shifted = b.shifted.unwrap();
        // (740 / 2)^(1/12)
        assert_eq!(shifted.value.to_string(), "1.63688");
        assert!(subadditive_upper_bound(&t, 61, 5).is_err());
        assert!(subadditive_upper_bound(&t, 12, 2).is_err());
    }
}
