//! Truncated power series with exact big-integer coefficients.

use std::ops::{Mul, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// `sum_{k <= order} coeffs[k] x^k`, arithmetic truncated at `x^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntSeries {
    coeffs: Vec<BigInt>,
}

impl IntSeries {
    /// Pads or truncates `coeffs` to `order + 1` terms.
    pub fn new(mut coeffs: Vec<BigInt>, order: usize) -> Self {
        coeffs.resize(order + 1, BigInt::zero());
        IntSeries { coeffs }
    }

    pub fn from_unsigned(coeffs: &[BigUint], order: usize) -> Self {
        IntSeries::new(coeffs.iter().map(|c| BigInt::from(c.clone())).collect(), order)
    }

    pub fn one(order: usize) -> Self {
        IntSeries::new(vec![BigInt::one()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &BigInt {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Multiplicative inverse; requires a unit constant term.
    pub fn inverse(&self) -> Result<IntSeries> {
        let c0 = &self.coeffs[0];
        if c0.abs() != BigInt::one() {
            return Err(Error::InvalidInput(format!("constant term {c0} is not a unit")));
        }
        let n = self.order();
        let mut inv: Vec<BigInt> = Vec::with_capacity(n + 1);
        inv.push(c0.clone());
        for k in 1..=n {
            let acc: BigInt = (1..=k).map(|j| &self.coeffs[j] * &inv[k - j]).sum();
            // c0 = +-1, so dividing by c0 is multiplying by it.
            inv.push(-(acc * c0));
        }
        Ok(IntSeries { coeffs: inv })
    }

    /// Coefficients as unsigned integers, if none is negative.
    pub fn to_unsigned(&self) -> Option<Vec<BigUint>> {
        self.coeffs
            .iter()
            .map(|c| if c.sign() == Sign::Minus { None } else { Some(c.magnitude().clone()) })
            .collect()
    }
}

impl Mul for &IntSeries {
    type Output = IntSeries;

    fn mul(self, rhs: &IntSeries) -> IntSeries {
        let n = self.order().min(rhs.order());
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|j| &self.coeffs[j] * &rhs.coeffs[k - j]).sum())
            .collect();
        IntSeries { coeffs }
    }
}

impl Sub for &IntSeries {
    type Output = IntSeries;

    fn sub(self, rhs: &IntSeries) -> IntSeries {
        let n = self.order().min(rhs.order());
        IntSeries { coeffs: (0..=n).map(|k| &self.coeffs[k] - &rhs.coeffs[k]).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[i64], order: usize) -> IntSeries {
        IntSeries::new(v.iter().map(|&c| BigInt::from(c)).collect(), order)
    }

    #[test]
    fn geometric_series_inverts_to_one_minus_x() {
        let geo = s(&[1; 8], 7);
        assert_eq!(geo.inverse().unwrap(), s(&[1, -1], 7));
    }

    #[test]
    fn non_unit_constant_rejected() {
        assert!(s(&[2, 1], 3).inverse().is_err());
        assert!(s(&[0, 1], 3).inverse().is_err());
        assert!(s(&[-1, 1], 3).inverse().is_ok());
    }

    proptest! {
        #[test]
        fn inverse_times_series_is_one(tail in proptest::collection::vec(-1000i64..1000, 0..25), neg in any::<bool>()) {
            let mut v = vec![if neg { -1 } else { 1 }];
            v.extend(tail);
            let order = v.len() - 1;
            let f = s(&v, order);
            let g = f.inverse().unwrap();
            prop_assert_eq!(&f * &g, IntSeries::one(order));
        }
    }
}
