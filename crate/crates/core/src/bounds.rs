//! Bound reports shared by every estimation method.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Decimal, Rounding};

/// Default number of decimals for connective-constant bounds.
pub const DEFAULT_PRECISION: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundDirection {
    Upper,
    Lower,
}

impl BoundDirection {
    pub fn rounding(self) -> Rounding {
        match self {
            BoundDirection::Upper => Rounding::Up,
            BoundDirection::Lower => Rounding::Down,
        }
    }
}

/// A rigorous one-sided bound on the taxi-walk connective constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub method: String,
    pub direction: BoundDirection,
    /// Bound on the connective constant, rounded outward.
    pub value: Decimal,
    /// `value^4 - 1`, rounded outward at one decimal fewer than `value`.
    pub lambda_value: Decimal,
    pub rounding: Rounding,
    pub parameters: BTreeMap<String, String>,
}

impl BoundReport {
    pub fn new(method: &str, direction: BoundDirection, value: Decimal) -> Self {
        let rounding = direction.rounding();
        let lambda_scale = value.scale().saturating_sub(1);
        let lambda_value = value.fourth_power_minus_one(lambda_scale, rounding);
        BoundReport {
            method: method.to_string(),
            direction,
            value,
            lambda_value,
            rounding,
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn is_upper(&self) -> bool {
        self.direction == BoundDirection::Upper
    }
}

/// Checks that no lower bound exceeds any upper bound.
pub fn check_consistency(reports: &[BoundReport]) -> Result<()> {
    let best_upper = reports.iter().filter(|r| r.is_upper()).min_by(|a, b| a.value.cmp(&b.value));
    let best_lower = reports.iter().filter(|r| !r.is_upper()).max_by(|a, b| a.value.cmp(&b.value));
    if let (Some(up), Some(low)) = (best_upper, best_lower) {
        if up.value < low.value {
            return Err(Error::Inconsistent(format!(
                "upper bound {} ({}) is below lower bound {} ({})",
                up.value, up.method, low.value, low.method
            )));
        }
    }
    Ok(())
}

pub(crate) fn validate_precision(precision: u32) -> Result<()> {
    if precision < 3 {
        return Err(Error::InvalidInput(format!("precision must be at least 3, got {precision}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(dir: BoundDirection, v: &str) -> BoundReport {
        BoundReport::new("t", dir, v.parse().unwrap())
    }

    #[test]
    fn lambda_follows_direction() {
        let r = report(BoundDirection::Upper, "1.60574");
        assert_eq!(r.lambda_value.to_string(), "5.6482");
        assert_eq!(r.rounding, Rounding::Up);
        let r = report(BoundDirection::Lower, "1.51965");
        assert_eq!(r.lambda_value.to_string(), "4.3330");
    }

    #[test]
    fn consistency_rejects_crossing_bounds() {
        let ok = [report(BoundDirection::Upper, "1.6"), report(BoundDirection::Lower, "1.5")];
        assert!(check_consistency(&ok).is_ok());
        let bad = [report(BoundDirection::Upper, "1.5"), report(BoundDirection::Lower, "1.6")];
        assert!(check_consistency(&bad).is_err());
        assert!(check_consistency(&[]).is_ok());
    }
}
