//! Reward and utility quantities.
//!
//! Most allocation rules are rational-valued on integer configurations, so
//! values are kept as exact `i128` rationals and compared exactly. Rules or
//! utilities that leave the rationals (square roots, fractional powers) fall
//! back to `f64`, and every comparison involving a float uses an explicit
//! tolerance.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Sub};

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational used for rewards, fractions and grid values.
pub type Ratio = num_rational::Ratio<i128>;

/// A float difference must exceed this to count as a strict improvement.
pub const STRICT_TOLERANCE: f64 = 1e-9;

/// Slack allowed when checking budget equalities and inequalities on floats.
pub const BUDGET_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amount {
    Exact(Ratio),
    Approx(f64),
}

impl Amount {
    pub fn zero() -> Self {
        Amount::Exact(Ratio::zero())
    }

    pub fn one() -> Self {
        Amount::Exact(Ratio::one())
    }

    pub fn ratio(numer: i128, denom: i128) -> Self {
        Amount::Exact(Ratio::new(numer, denom))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Amount::Exact(_))
    }

    pub fn as_exact(&self) -> Option<Ratio> {
        match self {
            Amount::Exact(r) => Some(*r),
            Amount::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Amount::Exact(r) => ratio_to_f64(r),
            Amount::Approx(v) => *v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Amount::Exact(r) => r.is_zero(),
            Amount::Approx(v) => *v == 0.0,
        }
    }

    /// Comparison where floats within [`STRICT_TOLERANCE`] are equal.
    pub fn compare(&self, other: &Amount) -> Ordering {
        self.compare_within(other, STRICT_TOLERANCE)
    }

    /// Exact comparison when both sides are exact; otherwise a difference
    /// of at most `tolerance` counts as equality.
    pub fn compare_within(&self, other: &Amount, tolerance: f64) -> Ordering {
        match (self, other) {
            (Amount::Exact(a), Amount::Exact(b)) => a.cmp(b),
            _ => {
                let diff = self.to_f64() - other.to_f64();
                if diff > tolerance {
                    Ordering::Greater
                } else if diff < -tolerance {
                    Ordering::Less
                } else {
                    Ordering::Equal
                }
            }
        }
    }

    pub fn strictly_greater(&self, other: &Amount) -> bool {
        self.compare(other) == Ordering::Greater
    }

    pub fn strictly_less(&self, other: &Amount) -> bool {
        self.compare(other) == Ordering::Less
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Amount>>(items: I) -> Amount {
        items.into_iter().fold(Amount::zero(), |acc, x| acc + *x)
    }
}

pub(crate) fn ratio_to_f64(r: &Ratio) -> f64 {
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

impl From<Ratio> for Amount {
    fn from(r: Ratio) -> Self {
        Amount::Exact(r)
    }
}

impl From<f64> for Amount {
    fn from(v: f64) -> Self {
        Amount::Approx(v)
    }
}

// Exact arithmetic degrades to floating point on i128 overflow.
impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        if let (Amount::Exact(a), Amount::Exact(b)) = (&self, &rhs) {
            if let Some(r) = a.checked_add(b) {
                return Amount::Exact(r);
            }
        }
        Amount::Approx(self.to_f64() + rhs.to_f64())
    }
}

impl Sub for Amount {
    type Output = Amount;
    fn sub(self, rhs: Amount) -> Amount {
        if let (Amount::Exact(a), Amount::Exact(b)) = (&self, &rhs) {
            if let Some(r) = a.checked_sub(b) {
                return Amount::Exact(r);
            }
        }
        Amount::Approx(self.to_f64() - rhs.to_f64())
    }
}

impl Mul for Amount {
    type Output = Amount;
    fn mul(self, rhs: Amount) -> Amount {
        if let (Amount::Exact(a), Amount::Exact(b)) = (&self, &rhs) {
            if let Some(r) = a.checked_mul(b) {
                return Amount::Exact(r);
            }
        }
        Amount::Approx(self.to_f64() * rhs.to_f64())
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amount::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Amount::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Amount::Approx(v) => write!(f, "{v:.12}"),
        }
    }
}

/// Parses `3`, `0.25`, `1/3` or `-2.5` into an exact rational.
pub fn parse_ratio(text: &str) -> Option<Ratio> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((n, d)) = text.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Ratio::new(n, d));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    if frac_part.len() > 30 {
        return None;
    }
    let int_value: i128 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let mut denom: i128 = 1;
    for _ in 0..frac_part.len() {
        denom = denom.checked_mul(10)?;
    }
    let frac_value: i128 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().ok()?
    };
    let numer = int_value.checked_mul(denom)?.checked_add(frac_value)?;
    let r = Ratio::new(numer, denom);
    Some(if negative { -r } else { r })
}

/// Canonical text form accepted by [`parse_ratio`].
pub fn format_ratio(r: &Ratio) -> alloc::string::String {
    if r.is_integer() {
        alloc::format!("{}", r.numer())
    } else {
        alloc::format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_ratio("0.5"), Some(Ratio::new(1, 2)));
        assert_eq!(parse_ratio("1.1"), Some(Ratio::new(11, 10)));
        assert_eq!(parse_ratio("1/3"), Some(Ratio::new(1, 3)));
        assert_eq!(parse_ratio("2"), Some(Ratio::from_integer(2)));
        assert_eq!(parse_ratio(".25"), Some(Ratio::new(1, 4)));
        assert_eq!(parse_ratio("-0.5"), Some(Ratio::new(-1, 2)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("abc"), None);
        assert_eq!(parse_ratio("."), None);
    }

    #[test]
    fn exact_comparison_ignores_tolerance() {
        let a = Amount::ratio(1, 3);
        let b = Amount::Exact(Ratio::new(1, 3) + Ratio::new(1, 1_000_000_000_000));
        assert!(b.strictly_greater(&a));
        let c = Amount::Approx(1.0 / 3.0 + 1e-12);
        assert_eq!(c.compare(&a), Ordering::Equal);
    }

    #[test]
    fn overflow_falls_back_to_float() {
        let big = Amount::Exact(Ratio::new(1, 1i128 << 100));
        let other = Amount::Exact(Ratio::new(1, (1i128 << 100) - 1));
        let s = big + other;
        assert!(!s.is_exact());
        assert!(s.to_f64() > 0.0);
    }
}
