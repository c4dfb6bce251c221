//! Exact rationals with power-of-three denominators.
//!
//! Every endpoint of a removed middle-third interval is of the form
//! `m / 3^n`. Numerators are kept in `i128`, which holds `3^80` with room to
//! spare, so all geometry up to generation [`MAX_LEVEL`] is exact.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported power of three in a denominator.
pub const MAX_LEVEL: u32 = 80;

const POW3: [i128; MAX_LEVEL as usize + 1] = {
    let mut table = [1i128; MAX_LEVEL as usize + 1];
    let mut i = 1;
    while i <= MAX_LEVEL as usize {
        table[i] = table[i - 1] * 3;
        i += 1;
    }
    table
};

/// `3^n` as an exact integer, `n <= MAX_LEVEL`.
pub fn pow3(n: u32) -> i128 {
    POW3[n as usize]
}

/// `numerator / 3^level` in canonical form: the numerator is not divisible
/// by three unless the level is zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTriadic", into = "RawTriadic")]
pub struct TriadicRational {
    numerator: i128,
    level: u32,
}

#[derive(Serialize, Deserialize)]
struct RawTriadic {
    numerator: i128,
    level: u32,
}

impl TryFrom<RawTriadic> for TriadicRational {
    type Error = Error;
    fn try_from(raw: RawTriadic) -> Result<Self> {
        TriadicRational::new(raw.numerator, raw.level)
    }
}

impl From<TriadicRational> for RawTriadic {
    fn from(t: TriadicRational) -> Self {
        RawTriadic {
            numerator: t.numerator,
            level: t.level,
        }
    }
}

impl TriadicRational {
    pub const ZERO: TriadicRational = TriadicRational {
        numerator: 0,
        level: 0,
    };
    pub const ONE: TriadicRational = TriadicRational {
        numerator: 1,
        level: 0,
    };

    pub fn new(numerator: i128, level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::DepthOutOfRange(level));
        }
        Ok(Self::canonical(numerator, level))
    }

    pub fn integer(value: i128) -> Self {
        TriadicRational {
            numerator: value,
            level: 0,
        }
    }

    fn canonical(mut numerator: i128, mut level: u32) -> Self {
        if numerator == 0 {
            level = 0;
        }
        while level > 0 && numerator % 3 == 0 {
            numerator /= 3;
            level -= 1;
        }
        TriadicRational { numerator, level }
    }

    pub fn numerator(&self) -> i128 {
        self.numerator
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Numerator after rescaling to denominator `3^level`.
    pub fn numerator_at(&self, level: u32) -> Result<i128> {
        if level < self.level {
            return Err(Error::Domain(format!(
                "cannot express level-{} value at level {level}",
                self.level
            )));
        }
        if level > MAX_LEVEL {
            return Err(Error::DepthOutOfRange(level));
        }
        self.numerator
            .checked_mul(pow3(level - self.level))
            .ok_or(Error::Overflow)
    }

    pub fn checked_add(self, other: Self) -> Result<Self> {
        let level = self.level.max(other.level);
        let a = self.numerator_at(level)?;
        let b = other.numerator_at(level)?;
        Ok(Self::canonical(
            a.checked_add(b).ok_or(Error::Overflow)?,
            level,
        ))
    }

    pub fn checked_sub(self, other: Self) -> Result<Self> {
        let level = self.level.max(other.level);
        let a = self.numerator_at(level)?;
        let b = other.numerator_at(level)?;
        Ok(Self::canonical(
            a.checked_sub(b).ok_or(Error::Overflow)?,
            level,
        ))
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / pow3(self.level) as f64
    }
}

impl Ord for TriadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (lo, hi, flipped) = if self.level <= other.level {
            (self, other, false)
        } else {
            (other, self, true)
        };
        // lo.numerator * 3^(hi.level - lo.level) vs hi.numerator
        let ord = match lo.numerator.checked_mul(pow3(hi.level - lo.level)) {
            Some(scaled) => scaled.cmp(&hi.numerator),
            // |scaled| exceeds i128::MAX >= |hi.numerator|, so the sign decides.
            None => {
                if lo.numerator > 0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        };
        if flipped {
            ord.reverse()
        } else {
            ord
        }
    }
}

impl PartialOrd for TriadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TriadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/3^{}", self.numerator, self.level)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form_strips_factors_of_three() {
        let t = TriadicRational::new(9, 3).unwrap();
        assert_eq!((t.numerator(), t.level()), (1, 1));
        let z = TriadicRational::new(0, 7).unwrap();
        assert_eq!((z.numerator(), z.level()), (0, 0));
        assert_eq!(TriadicRational::new(3, 0).unwrap().numerator(), 3);
    }

    #[test]
    fn level_limit_is_enforced() {
        assert!(TriadicRational::new(1, MAX_LEVEL).is_ok());
        assert_eq!(
            TriadicRational::new(1, MAX_LEVEL + 1),
            Err(Error::DepthOutOfRange(MAX_LEVEL + 1))
        );
        assert_eq!(pow3(80), 147808829414345923316083210206383297601);
    }

    #[test]
    fn add_and_compare_are_exact() {
        let third = TriadicRational::new(1, 1).unwrap();
        let ninth = TriadicRational::new(1, 2).unwrap();
        let sum = third.checked_add(ninth).unwrap();
        assert_eq!(sum, TriadicRational::new(4, 2).unwrap());
        assert!(ninth < third);
        assert_eq!(
            third
                .checked_add(third)
                .unwrap()
                .checked_add(third)
                .unwrap(),
            TriadicRational::ONE
        );
        let tiny = TriadicRational::new(1, 80).unwrap();
        assert!(TriadicRational::ZERO < tiny);
        assert!(tiny < TriadicRational::new(1, 79).unwrap());
    }

    #[test]
    fn comparison_survives_scaling_overflow() {
        let big = TriadicRational::integer(i128::MAX / 2);
        let small = TriadicRational::new(1, 80).unwrap();
        assert!(big > small);
        assert!(TriadicRational::integer(-(i128::MAX / 2)) < small);
    }

    proptest! {
        #[test]
        fn ordering_matches_cross_multiplication(a in -1_000_000i128..1_000_000, la in 0u32..20,
                                                 b in -1_000_000i128..1_000_000, lb in 0u32..20) {
            let x = TriadicRational::new(a, la).unwrap();
            let y = TriadicRational::new(b, lb).unwrap();
            let lhs = a * pow3(lb);
            let rhs = b * pow3(la);
            prop_assert_eq!(x.cmp(&y), lhs.cmp(&rhs));
            let diff = x.checked_sub(y).unwrap();
            prop_assert_eq!(diff.checked_add(y).unwrap(), x);
        }
    }
}
