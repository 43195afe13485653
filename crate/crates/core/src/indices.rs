//! Exact arithmetic on Lebesgue exponents in [1, ∞] and the embedding
//! index functions.
//!
//! Exponents are stored through their reciprocals as exact rationals, so
//! p = ∞ is the ordinary value 0 and conjugation `1/p + 1/p' = 1` is exact.
//! Everything here is pure integer arithmetic; no floating point enters
//! until a caller asks for `as_f64`.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Rational64;

/// A Lebesgue exponent p ∈ [1, ∞], stored as the reciprocal 1/p ∈ [0, 1].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Exponent {
    recip: Rational,
}

impl Exponent {
    pub fn from_recip(recip: Rational) -> Result<Self> {
        if recip < Rational::new(0, 1) || recip > Rational::new(1, 1) {
            return Err(Error::invalid(format!(
                "exponent reciprocal {recip} outside [0, 1]"
            )));
        }
        Ok(Exponent { recip })
    }

    /// Exponent p = num/den with p >= 1.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if num <= 0 || den <= 0 {
            return Err(Error::invalid(format!("exponent {num}/{den} not positive")));
        }
        Self::from_recip(Rational::new(den, num))
    }

    pub fn from_int(p: i64) -> Result<Self> {
        Self::from_ratio(p, 1)
    }

    pub fn one() -> Self {
        Exponent { recip: Rational::new(1, 1) }
    }

    pub fn two() -> Self {
        Exponent { recip: Rational::new(1, 2) }
    }

    pub fn infinity() -> Self {
        Exponent { recip: Rational::new(0, 1) }
    }

    /// The stored reciprocal 1/p (0 encodes p = ∞).
    pub fn recip(&self) -> Rational {
        self.recip
    }

    /// Conjugate exponent, 1/p + 1/p' = 1 exactly.
    pub fn conjugate(&self) -> Self {
        Exponent { recip: Rational::new(1, 1) - self.recip }
    }

    pub fn is_infinite(&self) -> bool {
        self.recip == Rational::new(0, 1)
    }

    pub fn is_one(&self) -> bool {
        self.recip == Rational::new(1, 1)
    }

    /// p as a float; ∞ maps to `f64::INFINITY`.
    pub fn as_f64(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            *self.recip.denom() as f64 / *self.recip.numer() as f64
        }
    }

    /// 1/p as a float.
    pub fn recip_f64(&self) -> f64 {
        *self.recip.numer() as f64 / *self.recip.denom() as f64
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else if *self.recip.numer() == 1 {
            write!(f, "{}", self.recip.denom())
        } else {
            write!(f, "{}/{}", self.recip.denom(), self.recip.numer())
        }
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exponent({self})")
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") || s == "∞" {
            return Ok(Exponent::infinity());
        }
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad exponent {s:?}")))?;
            let den: i64 = den
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad exponent {s:?}")))?;
            return Exponent::from_ratio(num, den);
        }
        let p: i64 = s
            .parse()
            .map_err(|_| Error::invalid(format!("bad exponent {s:?}")))?;
        Exponent::from_int(p)
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Exponent> for String {
    fn from(e: Exponent) -> String {
        e.to_string()
    }
}

/// The parameter tuple (α, p, q, s) of a weighted decomposition-space norm.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpaceParams {
    pub alpha: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub s: f64,
}

impl SpaceParams {
    pub fn new(alpha: f64, p: Exponent, q: Exponent, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")));
        }
        if !s.is_finite() {
            return Err(Error::invalid(format!("weight exponent s = {s} not finite")));
        }
        Ok(SpaceParams { alpha, p, q, s })
    }
}

fn zero() -> Rational {
    Rational::new(0, 1)
}

/// Sharp upper-shift index: max(0, 1/q − min(1/p, 1/p')).
pub fn theta1(p: Exponent, q: Exponent) -> Rational {
    let rp = p.recip();
    let rpc = p.conjugate().recip();
    let rq = q.recip();
    zero().max(rq - rp.min(rpc))
}

/// Sharp lower-shift index: min(0, 1/q − max(1/p, 1/p')) = −θ₁(p', q').
pub fn theta2(p: Exponent, q: Exponent) -> Rational {
    let rp = p.recip();
    let rpc = p.conjugate().recip();
    let rq = q.recip();
    zero().min(rq - rp.max(rpc))
}

/// Classical upper index: θ₁(p,q) + max(0, 1/q − max(1/p, 1/p')).
pub fn nu1(p: Exponent, q: Exponent) -> Rational {
    let rp = p.recip();
    let rpc = p.conjugate().recip();
    let rq = q.recip();
    theta1(p, q) + zero().max(rq - rp.max(rpc))
}

/// Classical lower index: θ₂(p,q) + min(0, 1/q − min(1/p, 1/p')) = −ν₁(p', q').
pub fn nu2(p: Exponent, q: Exponent) -> Rational {
    let rp = p.recip();
    let rpc = p.conjugate().recip();
    let rq = q.recip();
    theta2(p, q) + zero().min(rq - rp.min(rpc))
}

/// Weight shift d·(α₂ − α₁)·θ appearing in the scale embeddings.
pub fn weight_shift(d: usize, alpha1: f64, alpha2: f64, theta: Rational) -> Result<f64> {
    if alpha1 > alpha2 {
        return Err(Error::invalid(format!(
            "alpha1 = {alpha1} exceeds alpha2 = {alpha2}"
        )));
    }
    if !(0.0..=1.0).contains(&alpha1) || !(0.0..=1.0).contains(&alpha2) {
        return Err(Error::invalid("alpha outside [0, 1]".to_string()));
    }
    let t = *theta.numer() as f64 / *theta.denom() as f64;
    Ok(d as f64 * (alpha2 - alpha1) * t)
}

/// The exponent grid used by index tests: hits every regime boundary of the
/// min/max expressions (1, 2 and the conjugates of each member).
pub fn exponent_grid() -> Vec<Exponent> {
    [
        (1, 1),
        (4, 3),
        (3, 2),
        (2, 1),
        (3, 1),
        (4, 1),
        (6, 1),
        (8, 1),
        (12, 1),
        (24, 1),
        (48, 1),
        (96, 1),
    ]
    .iter()
    .map(|&(n, d)| Exponent::from_ratio(n, d).unwrap())
    .chain(std::iter::once(Exponent::infinity()))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(num: i64, den: i64) -> Exponent {
        Exponent::from_ratio(num, den).unwrap()
    }

    fn r(num: i64, den: i64) -> Rational {
        Rational::new(num, den)
    }

    #[test]
    fn conjugates_are_exact() {
        assert_eq!(Exponent::one().conjugate(), Exponent::infinity());
        assert_eq!(Exponent::two().conjugate(), Exponent::two());
        assert_eq!(e(4, 3).conjugate(), e(4, 1));
        assert_eq!(e(3, 2).conjugate(), e(3, 1));
        for p in exponent_grid() {
            assert_eq!(p.recip() + p.conjugate().recip(), r(1, 1));
        }
    }

    #[test]
    fn theta1_examples() {
        assert_eq!(theta1(Exponent::two(), Exponent::two()), r(0, 1));
        assert_eq!(theta1(Exponent::infinity(), Exponent::one()), r(1, 1));
        assert_eq!(theta1(e(4, 1), Exponent::two()), r(1, 4));
    }

    #[test]
    fn theta2_examples() {
        assert_eq!(theta2(Exponent::two(), Exponent::two()), r(0, 1));
        assert_eq!(theta2(e(4, 1), Exponent::two()), r(-1, 4));
        assert_eq!(theta2(Exponent::one(), Exponent::infinity()), r(-1, 1));
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu1(Exponent::one(), Exponent::one()), r(1, 1));
        // Direct evaluation: θ₁(2,1) = 1/2 and the second term is another 1/2.
        assert_eq!(nu1(Exponent::two(), Exponent::one()), r(1, 1));
        assert_eq!(nu2(Exponent::two(), Exponent::infinity()), r(-1, 1));
    }

    #[test]
    fn grid_identities_hold_exactly() {
        let grid = exponent_grid();
        assert_eq!(grid.len(), 13);
        for &p in &grid {
            for &q in &grid {
                let pc = p.conjugate();
                let qc = q.conjugate();
                assert!(theta1(p, q) >= r(0, 1));
                assert!(theta2(p, q) <= r(0, 1));
                assert_eq!(theta2(p, q), -theta1(pc, qc));
                assert_eq!(nu2(p, q), -nu1(pc, qc));
                assert!(nu1(p, q) >= theta1(p, q));
                assert!(nu2(p, q) <= theta2(p, q));
            }
        }
    }

    #[test]
    fn theta1_vanishes_in_parseval_regime() {
        for &q in &exponent_grid() {
            if q.recip() <= r(1, 2) {
                assert_eq!(theta1(Exponent::two(), q), r(0, 1));
            }
        }
    }

    #[test]
    fn weight_shift_examples() {
        assert_eq!(weight_shift(1, 0.0, 1.0, r(1, 2)).unwrap(), 0.5);
        assert_eq!(weight_shift(2, 1.0 / 3.0, 1.0 / 3.0, r(7, 3)).unwrap(), 0.0);
        assert_eq!(weight_shift(2, 0.0, 0.5, r(-1, 4)).unwrap(), -0.25);
        assert!(weight_shift(1, 0.7, 0.3, r(1, 1)).is_err());
    }

    #[test]
    fn exponent_parsing_roundtrip() {
        for s in ["1", "2", "4/3", "inf", "96"] {
            let p: Exponent = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("0".parse::<Exponent>().is_err());
        assert!("2/3".parse::<Exponent>().is_err());
    }

    proptest! {
        #[test]
        fn duality_on_random_rationals(num in 1i64..64, den in 1i64..64) {
            prop_assume!(num >= den);
            let p = e(num, den);
            for &q in &exponent_grid() {
                prop_assert_eq!(theta2(p, q), -theta1(p.conjugate(), q.conjugate()));
                prop_assert_eq!(nu2(p, q), -nu1(p.conjugate(), q.conjugate()));
                prop_assert!(nu1(p, q) >= theta1(p, q));
            }
        }
    }
}
