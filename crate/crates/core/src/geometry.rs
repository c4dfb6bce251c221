//! Middle-third Cantor construction with exact endpoints.
//!
//! Generation `n` removes `2^(n-1)` open intervals of length `3^-n`. The
//! `k`-th one (counting from the left) has left endpoint `(3c + 1) / 3^n`,
//! where `c` is `k - 1` written in binary and re-read in base three with
//! every digit doubled. Intervals are produced lazily, one generation at a
//! time.
//!
//! Point location works on the exact binary value of an `f64`: writing
//! `x = m / 2^e` with `m` odd, the ternary digits of `x` are read off by
//! iterating `r -> 3r mod 2^e`. The first digit equal to one identifies the
//! removed interval containing `x`, and a residue returning to its start
//! certifies a periodic expansion that never uses the digit one.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::triadic::{pow3, TriadicRational, MAX_LEVEL};

/// Default working depth for point location.
pub const DEFAULT_DEPTH: u32 = 40;

/// One removed open interval `I_n^k = (a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CantorInterval {
    generation: u32,
    index: u128,
    left: TriadicRational,
    right: TriadicRational,
}

fn check_generation(generation: u32) -> Result<()> {
    if (1..=MAX_LEVEL).contains(&generation) {
        Ok(())
    } else {
        Err(Error::GenerationOutOfRange(generation))
    }
}

/// Reads the binary digits of `bits` as doubled ternary digits.
fn ternary_code(mut bits: u128) -> i128 {
    let mut code = 0i128;
    let mut place = 2i128;
    while bits > 0 {
        if bits & 1 == 1 {
            code += place;
        }
        bits >>= 1;
        place *= 3;
    }
    code
}

impl CantorInterval {
    pub fn new(generation: u32, index: u128) -> Result<Self> {
        check_generation(generation)?;
        let count = 1u128 << (generation - 1);
        if index == 0 || index > count {
            return Err(Error::IndexOutOfRange { generation, index });
        }
        Ok(Self::from_bits(generation, index - 1))
    }

    fn from_bits(generation: u32, bits: u128) -> Self {
        let c = ternary_code(bits);
        CantorInterval {
            generation,
            index: bits + 1,
            left: TriadicRational::new(3 * c + 1, generation).expect("generation checked"),
            right: TriadicRational::new(3 * c + 2, generation).expect("generation checked"),
        }
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    /// One-based position within its generation, left to right.
    pub fn index(&self) -> u128 {
        self.index
    }

    pub fn left(&self) -> TriadicRational {
        self.left
    }

    pub fn right(&self) -> TriadicRational {
        self.right
    }

    /// Exactly `3^-n`.
    pub fn length(&self) -> TriadicRational {
        TriadicRational::new(1, self.generation).expect("generation checked")
    }

    /// `a + b`, i.e. twice the midpoint, kept exact.
    pub fn doubled_midpoint(&self) -> TriadicRational {
        self.left
            .checked_add(self.right)
            .expect("endpoints lie in [0, 1]")
    }

    pub fn midpoint(&self) -> f64 {
        let twice = self.left.numerator() * 2 + 1;
        twice as f64 / (2.0 * pow3(self.generation) as f64)
    }

    /// `3^-n / 2`, the largest distance from a point of the interval to the Cantor set.
    pub fn half_length(&self) -> f64 {
        0.5 / pow3(self.generation) as f64
    }

    pub fn left_f64(&self) -> f64 {
        self.left.to_f64()
    }

    pub fn right_f64(&self) -> f64 {
        self.right.to_f64()
    }
}

/// Iterator over the removed intervals of one generation, sorted by left endpoint.
#[derive(Clone, Debug)]
pub struct RemovedIntervals {
    generation: u32,
    next: u128,
    count: u128,
}

impl Iterator for RemovedIntervals {
    type Item = CantorInterval;

    fn next(&mut self) -> Option<CantorInterval> {
        if self.next >= self.count {
            return None;
        }
        let interval = CantorInterval::from_bits(self.generation, self.next);
        self.next += 1;
        Some(interval)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.count - self.next;
        match usize::try_from(left) {
            Ok(n) => (n, Some(n)),
            Err(_) => (usize::MAX, None),
        }
    }
}

/// The `2^(n-1)` intervals removed at generation `n`.
pub fn removed_intervals(generation: u32) -> Result<RemovedIntervals> {
    check_generation(generation)?;
    Ok(RemovedIntervals {
        generation,
        next: 0,
        count: 1u128 << (generation - 1),
    })
}

/// All removed intervals of generations `1..=max_generation`, generation by generation.
pub fn intervals_through(max_generation: u32) -> Result<impl Iterator<Item = CantorInterval>> {
    check_generation(max_generation)?;
    Ok((1..=max_generation).flat_map(|n| removed_intervals(n).expect("generation checked")))
}

/// Where a real number sits relative to the Cantor set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum LocateResult {
    InRemovedInterval {
        interval: CantorInterval,
    },
    InCantorSet,
    OutsideUnitInterval,
    /// `x` lies in a surviving closed interval of length `3^-depth` and its
    /// membership could not be settled within `depth` ternary digits.
    UndecidedAtDepth {
        depth: u32,
    },
}

/// Position of a point in a removed interval relative to its midpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Half {
    Left,
    Midpoint,
    Right,
}

/// Full outcome of point location, including the distance data that
/// `psi` and the reflection need.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Placement {
    Outside {
        distance: f64,
    },
    InSet,
    Removed {
        interval: CantorInterval,
        half: Half,
        distance: f64,
    },
    Undecided {
        depth: u32,
        distance_bound: f64,
    },
}

impl Placement {
    pub(crate) fn distance(&self) -> Interval {
        match *self {
            Placement::Outside { distance } | Placement::Removed { distance, .. } => {
                Interval::point(distance)
            }
            Placement::InSet => Interval::point(0.0),
            Placement::Undecided { distance_bound, .. } => Interval::new(0.0, distance_bound),
        }
    }

    pub(crate) fn to_locate(self) -> LocateResult {
        match self {
            Placement::Outside { .. } => LocateResult::OutsideUnitInterval,
            Placement::InSet => LocateResult::InCantorSet,
            Placement::Removed { interval, .. } => LocateResult::InRemovedInterval { interval },
            Placement::Undecided { depth, .. } => LocateResult::UndecidedAtDepth { depth },
        }
    }
}

/// `x * 2^exp` without intermediate overflow or premature underflow.
fn ldexp(mut x: f64, mut exp: i64) -> f64 {
    let pow2 = |e: i64| f64::from_bits(((e + 1023) as u64) << 52);
    while exp < -1000 {
        x *= pow2(-1000);
        exp += 1000;
    }
    while exp > 1000 {
        x *= pow2(1000);
        exp -= 1000;
    }
    x * pow2(exp)
}

/// Fractional residue `r / 2^e` with `0 <= r < 2^e`.
trait Residue: Clone + PartialEq {
    /// Replaces `r` by `3r mod 2^e` and returns `floor(3r / 2^e)`.
    fn triple(&mut self) -> u8;
    fn is_zero(&self) -> bool;
    /// Compares `r / 2^e` with one half.
    fn cmp_half(&self) -> Ordering;
    fn complement(&self) -> Self;
    fn to_fraction(&self) -> f64;
}

#[derive(Clone, PartialEq)]
struct NarrowResidue {
    r: u128,
    e: u32,
}

impl Residue for NarrowResidue {
    fn triple(&mut self) -> u8 {
        // e <= 125 keeps 3r below 2^127.
        let t = 3 * self.r;
        self.r = t & ((1u128 << self.e) - 1);
        (t >> self.e) as u8
    }

    fn is_zero(&self) -> bool {
        self.r == 0
    }

    fn cmp_half(&self) -> Ordering {
        (2 * self.r).cmp(&(1u128 << self.e))
    }

    fn complement(&self) -> Self {
        NarrowResidue {
            r: (1u128 << self.e) - self.r,
            e: self.e,
        }
    }

    fn to_fraction(&self) -> f64 {
        ldexp(self.r as f64, -(self.e as i64))
    }
}

#[derive(Clone, PartialEq)]
struct WideResidue {
    r: BigUint,
    e: u32,
}

impl WideResidue {
    fn modulus(&self) -> BigUint {
        BigUint::one() << self.e
    }
}

impl Residue for WideResidue {
    fn triple(&mut self) -> u8 {
        let t = &self.r * 3u32;
        let digit = (&t >> self.e).to_u8().expect("digit below 3");
        self.r = t & (self.modulus() - 1u32);
        digit
    }

    fn is_zero(&self) -> bool {
        self.r.is_zero()
    }

    fn cmp_half(&self) -> Ordering {
        (&self.r << 1u32).cmp(&self.modulus())
    }

    fn complement(&self) -> Self {
        WideResidue {
            r: self.modulus() - &self.r,
            e: self.e,
        }
    }

    fn to_fraction(&self) -> f64 {
        let bits = self.r.bits() as i64;
        if bits <= 64 {
            let r = self.r.to_u64().expect("fits in 64 bits");
            ldexp(r as f64, -(self.e as i64))
        } else {
            let top = (&self.r >> (bits - 64) as u32).to_u64().expect("top word");
            ldexp(top as f64, bits - 64 - self.e as i64)
        }
    }
}

fn walk_digits<R: Residue>(start: R, depth: u32) -> Placement {
    let mut r = start.clone();
    let mut bits = 0u128;
    for generation in 1..=depth {
        let digit = r.triple();
        if digit == 1 {
            if r.is_zero() {
                // x is the left endpoint of I_generation.
                return Placement::InSet;
            }
            let interval = CantorInterval::from_bits(generation, bits);
            let half = match r.cmp_half() {
                Ordering::Less => Half::Left,
                Ordering::Equal => Half::Midpoint,
                Ordering::Greater => Half::Right,
            };
            let gap = match half {
                Half::Right => r.complement().to_fraction(),
                _ => r.to_fraction(),
            };
            return Placement::Removed {
                interval,
                half,
                distance: gap / pow3(generation) as f64,
            };
        }
        bits = (bits << 1) | u128::from(digit >> 1);
        if r.is_zero() || r == start {
            // Terminating or purely periodic expansion with digits in {0, 2}.
            return Placement::InSet;
        }
    }
    let f = r.to_fraction();
    Placement::Undecided {
        depth,
        distance_bound: f.min(1.0 - f) / pow3(depth) as f64,
    }
}

fn check_depth(depth: u32) -> Result<()> {
    if depth <= MAX_LEVEL {
        Ok(())
    } else {
        Err(Error::DepthOutOfRange(depth))
    }
}

pub(crate) fn place(x: f64, depth: u32) -> Result<Placement> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    check_depth(depth)?;
    if x < 0.0 {
        return Ok(Placement::Outside { distance: -x });
    }
    if x > 1.0 {
        return Ok(Placement::Outside { distance: x - 1.0 });
    }
    if x == 0.0 || x == 1.0 {
        return Ok(Placement::InSet);
    }
    let (m, e) = dyadic_parts(x);
    Ok(if e <= 125 {
        walk_digits(
            NarrowResidue {
                r: u128::from(m),
                e,
            },
            depth,
        )
    } else {
        walk_digits(
            WideResidue {
                r: BigUint::from(m),
                e,
            },
            depth,
        )
    })
}

/// `x = m * 2^-e` exactly with `m` odd, for `x` in `(0, 1)`.
fn dyadic_parts(x: f64) -> (u64, u32) {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mut m, mut exp) = if biased == 0 {
        (fraction, -1074i64)
    } else {
        (fraction | (1u64 << 52), biased - 1075)
    };
    let tz = m.trailing_zeros();
    m >>= tz;
    exp += i64::from(tz);
    let e = u32::try_from(-exp).expect("x in (0, 1) has a negative exponent");
    (m, e)
}

fn prefix_digits<R: Residue>(mut r: R, count: u32) -> (Vec<u8>, Option<Half>) {
    let mut digits = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let digit = r.triple();
        digits.push(digit);
        if digit == 1 {
            // A left endpoint (r == 0) sits on the left of the midpoint too.
            let half = match r.cmp_half() {
                Ordering::Greater => Half::Right,
                Ordering::Equal => Half::Midpoint,
                Ordering::Less => Half::Left,
            };
            return (digits, Some(half));
        }
    }
    (digits, None)
}

/// Leading ternary digits of `x` in `[0, 1]`, exactly. Stops after the first
/// digit 1 and then also reports on which side of that removed interval's
/// midpoint `x` lies. `1` is read as `0.222...`.
pub(crate) fn ternary_prefix(x: f64, count: u32) -> Result<(Vec<u8>, Option<Half>)> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} is outside [0, 1]")));
    }
    if x == 0.0 || x == 1.0 {
        let digit = if x == 0.0 { 0 } else { 2 };
        return Ok((vec![digit; count as usize], None));
    }
    let (m, e) = dyadic_parts(x);
    Ok(if e <= 125 {
        prefix_digits(
            NarrowResidue {
                r: u128::from(m),
                e,
            },
            count,
        )
    } else {
        prefix_digits(
            WideResidue {
                r: BigUint::from(m),
                e,
            },
            count,
        )
    })
}

/// Locates `x` relative to the Cantor set using at most `depth` ternary digits.
pub fn locate(x: f64, depth: u32) -> Result<LocateResult> {
    place(x, depth).map(Placement::to_locate)
}

/// Certified enclosure of `d(x, C)`.
///
/// Decided points give a degenerate interval; undecided points give
/// `[0, hi]` with `hi <= 3^-depth / 2`.
pub fn dist_to_cantor(x: f64, depth: u32) -> Result<Interval> {
    place(x, depth).map(|p| p.distance())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_distance(x: f64, depth: u32) -> f64 {
        let mut best = (x - 0.0).abs().min((x - 1.0).abs());
        for n in 1..=depth {
            for iv in removed_intervals(n).unwrap() {
                let (a, b) = (iv.left_f64(), iv.right_f64());
                if a < x && x < b {
                    return (x - a).min(b - x);
                }
                best = best.min((x - a).abs()).min((x - b).abs());
            }
        }
        best
    }

    #[test]
    fn first_generations_match_construction() {
        let g1: Vec<_> = removed_intervals(1).unwrap().collect();
        assert_eq!(g1.len(), 1);
        assert_eq!(g1[0].left(), TriadicRational::new(1, 1).unwrap());
        assert_eq!(g1[0].right(), TriadicRational::new(2, 1).unwrap());

        let g2: Vec<_> = removed_intervals(2).unwrap().collect();
        let ends: Vec<_> = g2
            .iter()
            .map(|iv| {
                (
                    iv.left().numerator(),
                    iv.right().numerator(),
                    iv.left().level(),
                )
            })
            .collect();
        assert_eq!(ends, vec![(1, 2, 2), (7, 8, 2)]);

        let g3: Vec<_> = removed_intervals(3).unwrap().collect();
        assert_eq!(g3.len(), 4);
        assert_eq!(g3[0].left(), TriadicRational::new(1, 3).unwrap());
        assert_eq!(g3[0].right(), TriadicRational::new(2, 3).unwrap());
        assert_eq!(g3[3].right(), TriadicRational::new(26, 3).unwrap());
    }

    #[test]
    fn generation_range_is_checked() {
        assert!(matches!(
            removed_intervals(0),
            Err(Error::GenerationOutOfRange(0))
        ));
        assert!(matches!(
            removed_intervals(81),
            Err(Error::GenerationOutOfRange(81))
        ));
        assert!(removed_intervals(80).is_ok());
        assert!(CantorInterval::new(2, 3).is_err());
        let last = CantorInterval::new(80, 1u128 << 79).unwrap();
        assert_eq!(last.right().numerator_at(80).unwrap(), pow3(80) - 1);
    }

    #[test]
    fn lengths_counts_and_removed_measure_are_exact() {
        let mut removed = TriadicRational::ZERO;
        for n in 1..=12 {
            let mut count = 0u128;
            for iv in removed_intervals(n).unwrap() {
                count += 1;
                assert_eq!(iv.right().checked_sub(iv.left()).unwrap(), iv.length());
                removed = removed.checked_add(iv.length()).unwrap();
            }
            assert_eq!(count, 1u128 << (n - 1));
            // 1 - (2/3)^n = (3^n - 2^n) / 3^n
            let expected = TriadicRational::new(pow3(n) - (1i128 << n), n).unwrap();
            assert_eq!(removed, expected);
        }
    }

    #[test]
    fn locate_examples() {
        match locate(0.5, 5).unwrap() {
            LocateResult::InRemovedInterval { interval } => {
                assert_eq!((interval.generation(), interval.index()), (1, 1))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(locate(0.0, 5).unwrap(), LocateResult::InCantorSet);
        assert_eq!(locate(1.0, 5).unwrap(), LocateResult::InCantorSet);
        assert_eq!(locate(0.25, 40).unwrap(), LocateResult::InCantorSet);
        assert_eq!(locate(0.75, 40).unwrap(), LocateResult::InCantorSet);
        assert_eq!(locate(-0.1, 5).unwrap(), LocateResult::OutsideUnitInterval);
        assert_eq!(locate(1.5, 5).unwrap(), LocateResult::OutsideUnitInterval);
        assert!(matches!(locate(f64::NAN, 5), Err(Error::NonFinite(_))));
        assert!(matches!(locate(0.5, 81), Err(Error::DepthOutOfRange(81))));
    }

    #[test]
    fn dyadic_cantor_points_with_long_periods_are_undecided() {
        // 1/2^10 = 0.000000201... in base three: the first digit one is the
        // ninth, so depth 5 cannot resolve it.
        let x = 1.0 / 1024.0;
        assert_eq!(
            locate(x, 5).unwrap(),
            LocateResult::UndecidedAtDepth { depth: 5 }
        );
        let d = dist_to_cantor(x, 5).unwrap();
        assert_eq!(d.lo, 0.0);
        assert!(d.hi <= 0.5 / 243.0);
        match locate(x, 40).unwrap() {
            LocateResult::InRemovedInterval { interval } => assert_eq!(interval.generation(), 9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn distance_examples() {
        let d = dist_to_cantor(0.5, 10).unwrap();
        assert!(d.is_point());
        assert_relative_eq!(d.lo, 1.0 / 6.0, max_relative = 1e-15);
        assert_eq!(dist_to_cantor(2.0, 10).unwrap(), Interval::point(1.0));
        let d = dist_to_cantor(0.4, 10).unwrap();
        assert!(d.is_point());
        assert_relative_eq!(d.lo, 1.0 / 15.0, max_relative = 1e-14);
        assert_relative_eq!(d.lo, brute_force_distance(0.4, 10), max_relative = 1e-14);
    }

    #[test]
    fn endpoints_are_in_the_set() {
        for n in 1..=10 {
            for iv in removed_intervals(n).unwrap() {
                for end in [iv.left_f64(), iv.right_f64()] {
                    // f64 rounding moves endpoints by < 1 ulp; n <= 10 keeps
                    // 3^n small enough that rounded endpoints stay within 3^-40.
                    let d = dist_to_cantor(end, 40).unwrap();
                    assert!(d.hi < 1e-15, "n={n} end={end} d={d:?}");
                }
            }
        }
        // Exactly representable endpoint: 1/3^0 ... use dyadic-friendly case 0 and 1.
        assert_eq!(dist_to_cantor(0.0, 1).unwrap(), Interval::point(0.0));
    }

    #[test]
    fn tiny_inputs_take_the_wide_path() {
        let x = 1e-300;
        let d = dist_to_cantor(x, 80).unwrap();
        assert!(d.contains(brute_force_distance(x, 5).min(x)) || d.hi <= x);
        let sub = f64::from_bits(1);
        assert!(dist_to_cantor(sub, 80).unwrap().hi <= sub);
    }

    #[test]
    fn certified_interval_contains_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2_000 {
            let x: f64 = rng.random();
            for depth in [4u32, 8] {
                let d = dist_to_cantor(x, depth).unwrap();
                let brute = brute_force_distance(x, depth);
                assert!(
                    d.lo - 1e-15 <= brute && brute <= d.hi + 1e-15
                        || d.lo == 0.0 && brute <= d.hi + 1e-15,
                    "x={x} depth={depth} {d:?} brute={brute}"
                );
                if !d.is_point() {
                    assert!(d.width() <= 0.5 / pow3(depth) as f64 * (1.0 + 1e-12));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn distance_is_symmetric(x in 0.0f64..1.0) {
            let a = dist_to_cantor(x, 40).unwrap();
            let b = dist_to_cantor(1.0 - x, 40).unwrap();
            // 1 - x is rounded, so compare with a rounding allowance.
            prop_assert!((a.lo - b.lo).abs() <= 1e-15 && (a.hi - b.hi).abs() <= 1e-15,
                "x={} {:?} {:?}", x, a, b);
        }

        #[test]
        fn removed_interval_contains_point(x in 0.0f64..1.0) {
            if let LocateResult::InRemovedInterval { interval } = locate(x, 40).unwrap() {
                prop_assert!(interval.left_f64() <= x && x <= interval.right_f64());
            }
        }
    }
}
