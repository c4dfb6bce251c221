//! Counterexample functions for the extension thresholds.
//!
//! `u_e^+` lives above the graph. Its generation-`n` piece sits in the slab
//! `3^-a T_n < x2 < T_n`, `T_n = (1 / (2 3^n))^a`, over the window between the
//! midpoint of the nearest earlier-generation removed interval on the left
//! and the midpoint `q_n^k` of `I_n^k` (`k > 1`). `u_e^-` lives below the graph
//! inside the cusps over odd-generation intervals. Each piece is a plateau
//! function scaled by `3^(n a beta) (n ln n)^-alpha_p`; generation 1 is dropped
//! because `ln 1 = 0`.
//!
//! Norms and extension lower bounds reduce to series in `n`. Convergence is
//! certified with explicit tails and divergence by term asymptotics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::exponents::{self, alpha_critical, beta_default, ln3, witness_factor, GUARD};
use crate::geometry::{ternary_prefix, CantorInterval, Half, Placement};
use crate::profile::{CuspProfile, PlanePoint};
use crate::quadrature::adaptive;

/// Tolerance for calling a growth factor exactly 1.
pub const FACTOR_TOL: f64 = 1e-10;
/// Range of `n` over which the term asymptotics are checked.
pub const ASYMPTOTIC_RANGE: (u32, u32) = (50, 200);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSide {
    Upper,
    Lower,
}

impl fmt::Display for WitnessSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessSide::Upper => "upper",
            WitnessSide::Lower => "lower",
        })
    }
}

impl WitnessSide {
    /// Generations carrying a piece of the witness, starting at 2.
    fn generations(self, last: u32) -> impl Iterator<Item = u32> {
        let odd_only = self == WitnessSide::Lower;
        (2..=last).filter(move |n| !odd_only || n % 2 == 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessParams {
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    pub side: WitnessSide,
    /// Last generation kept in sums and in the truncated functions.
    pub generations: u32,
}

impl WitnessParams {
    /// Parameters with the default `beta`: the largest value allowed by the
    /// norm constraint when `alpha` is above the critical exponent, and `-1`
    /// otherwise.
    pub fn new(alpha: f64, p: f64, side: WitnessSide, generations: u32) -> Result<Self> {
        check_alpha(alpha)?;
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Domain(format!(
                "witness needs a finite p > 1, got {p}"
            )));
        }
        if generations < 2 {
            return Err(Error::Domain(format!(
                "witness needs at least 2 generations, got {generations}"
            )));
        }
        let beta = if alpha > alpha_critical() {
            beta_default(alpha, p)?
        } else {
            -1.0
        };
        Ok(WitnessParams {
            alpha,
            p,
            beta,
            side,
            generations,
        })
    }

    /// Overrides `beta`. Values above `beta_default` are accepted here and
    /// show up as divergent norm series.
    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::NonFinite(beta));
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn alpha_p(&self) -> f64 {
        exponents::alpha_p(self.alpha, self.p).expect("validated parameters")
    }

    /// Top of the generation-`n` slab, `(1 / (2 3^n))^alpha`.
    pub fn slab_top(&self, n: u32) -> f64 {
        (-self.alpha * (2f64.ln() + f64::from(n) * ln3())).exp()
    }

    /// `3^(n alpha beta) (n ln n)^-alpha_p`.
    pub fn prefactor(&self, n: u32) -> f64 {
        let n = f64::from(n);
        (n * self.alpha * self.beta * ln3() - self.alpha_p() * (n * n.ln()).ln()).exp()
    }

    /// Gradient bound `C 3^(n alpha (beta + 1)) (n ln n)^-alpha_p` on the
    /// generation-`n` piece, `C` being the steepest branch slope.
    pub fn gradient_bound(&self, n: u32) -> f64 {
        let a = self.alpha;
        let slope = match self.side {
            WitnessSide::Upper => upper_slopes(a).0.abs().max(upper_slopes(a).1),
            WitnessSide::Lower => 1.0 / (6f64.powf(-a) - 9f64.powf(-a)),
        };
        slope * self.prefactor(n) / self.slab_top(n)
    }

    /// Generation whose slab `(3^-alpha T_n, T_n)` contains `x2`.
    fn slab_of(&self, x2: f64) -> Option<u32> {
        if !(x2 > 0.0 && x2 < self.slab_top(1)) {
            return None;
        }
        let mu = (-x2.ln() / self.alpha - 2f64.ln()) / ln3();
        let mut n = (mu.ceil() as i64 - 1).max(1) as u32;
        // Settle floating-point ties against the actual slab bounds.
        while n > 1 && x2 >= self.slab_top(n) {
            n -= 1;
        }
        while x2 < self.slab_top(n + 1) {
            n += 1;
        }
        Some(n)
    }
}

/// Slopes of the outer branches of `v^+` in the scaled variable `x2 / T_n`:
/// `(upper, lower)`.
fn upper_slopes(alpha: f64) -> (f64, f64) {
    let two_thirds = (2.0f64 / 3.0).powf(alpha);
    let half = 0.5f64.powf(alpha);
    let third = 3f64.powf(-alpha);
    (-1.0 / (1.0 - two_thirds), 1.0 / (half - third))
}

/// Plateau profile of `v^+` as a function of `s = x2 / T_n` in `(3^-a, 1)`.
fn v_plus_profile(alpha: f64, s: f64) -> f64 {
    let two_thirds = (2.0f64 / 3.0).powf(alpha);
    let half = 0.5f64.powf(alpha);
    let third = 3f64.powf(-alpha);
    if s >= 1.0 || s <= third {
        0.0
    } else if s > two_thirds {
        (1.0 - s) / (1.0 - two_thirds)
    } else if s >= half {
        1.0
    } else {
        (s - third) / (half - third)
    }
}

/// Profile of `v_-` as a function of `r = x2 / T_n`.
fn v_minus_profile(alpha: f64, r: f64) -> f64 {
    let sixth = 6f64.powf(-alpha);
    let ninth = 9f64.powf(-alpha);
    if r > sixth {
        1.0
    } else if r >= ninth {
        (r - ninth) / (sixth - ninth)
    } else {
        0.0
    }
}

/// Whether a point with the given leading ternary digits lies strictly
/// between the midpoints of two consecutive removed intervals of generation
/// at most `m`, the right one of generation exactly `m`.
///
/// Walks the Cantor tree: a digit 0 puts the middle interval of the current
/// node to the right, a digit 2 puts it to the left, and a digit 1 lands in
/// it. The innermost interval on the right is the successor; any interval on
/// the left makes a predecessor.
fn in_left_window(digits: &[u8], half: Option<Half>, m: u32) -> bool {
    let mut successor = None;
    let mut predecessor = false;
    for (j, &digit) in digits.iter().take(m as usize).enumerate() {
        let generation = j as u32 + 1;
        match digit {
            0 => successor = Some(generation),
            2 => predecessor = true,
            _ => {
                match half {
                    Some(Half::Left) | None => successor = Some(generation),
                    Some(Half::Midpoint) => return false,
                    Some(Half::Right) => {
                        predecessor = true;
                        if generation < m {
                            // Leftmost generation-m interval of the right part.
                            successor = Some(m);
                        }
                    }
                }
                break;
            }
        }
    }
    predecessor && successor == Some(m)
}

/// `v^+` at `x`: the plateau function of the slab containing `x2`, on the
/// window `U^l_{n,k}` with `k > 1`, and 0 elsewhere. Points on or below the
/// graph, or where the graph height cannot be resolved, give 0.
pub fn eval_v_plus(params: &WitnessParams, x: PlanePoint) -> f64 {
    if !x.is_finite() || !(0.0..=1.0).contains(&x.x1) {
        return 0.0;
    }
    let Some(n) = params.slab_of(x.x2) else {
        return 0.0;
    };
    if n < 2 {
        return 0.0;
    }
    let profile = CuspProfile::new(params.alpha).expect("validated alpha");
    if x.x2 <= profile.psi(x.x1).hi {
        return 0.0;
    }
    let Ok((digits, half)) = ternary_prefix(x.x1, n) else {
        return 0.0;
    };
    if !in_left_window(&digits, half, n) {
        return 0.0;
    }
    v_plus_profile(params.alpha, x.x2 / params.slab_top(n))
}

/// `u_e^+` truncated after `params.generations`.
pub fn eval_u_plus(params: &WitnessParams, x: PlanePoint) -> f64 {
    let v = eval_v_plus(params, x);
    if v == 0.0 {
        return 0.0;
    }
    let n = params.slab_of(x.x2).expect("nonzero v has a slab");
    if n > params.generations {
        return 0.0;
    }
    params.prefactor(n) * v
}

/// `u_e^-` truncated after `params.generations`: nonzero only inside the cusps
/// `0 < x2 < psi(x1)` over removed intervals of odd generation `n >= 3`.
pub fn eval_u_minus(params: &WitnessParams, x: PlanePoint) -> f64 {
    if !x.is_finite() || x.x2 <= 0.0 {
        return 0.0;
    }
    let profile = CuspProfile::new(params.alpha).expect("validated alpha");
    let Placement::Removed { interval, .. } = profile.place(x.x1) else {
        return 0.0;
    };
    let n = interval.generation();
    if n < 3 || n % 2 == 0 || n > params.generations {
        return 0.0;
    }
    if x.x2 >= profile.psi(x.x1).lo {
        return 0.0;
    }
    params.prefactor(n) * v_minus_profile(params.alpha, x.x2 / params.slab_top(n))
}

/// Evaluates the witness on its own side.
pub fn eval_witness(params: &WitnessParams, x: PlanePoint) -> f64 {
    match params.side {
        WitnessSide::Upper => eval_u_plus(params, x),
        WitnessSide::Lower => eval_u_minus(params, x),
    }
}

/// Length of the horizontal section of the cusp over `I_n^k` at height `x2`.
pub fn cusp_cross_section(n: u32, k: u128, x2: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    CantorInterval::new(n, k)?;
    let base = 3f64.powi(-(n as i32));
    if !(x2 > 0.0 && x2 < (0.5 * base).powf(alpha)) {
        return Ok(0.0);
    }
    Ok((base - 2.0 * x2.powf(1.0 / alpha)).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    /// Terms grow like `g^n` with `g > 1`.
    Geometric,
    /// `g = 1` and terms behave like `(n ln n)^-s` with `s <= 1`.
    LogHarmonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SeriesVerdict {
    Convergent { tail_bound: f64, relative_tail: f64 },
    Divergent { kind: DivergenceKind, factor: f64 },
}

impl SeriesVerdict {
    pub fn is_convergent(&self) -> bool {
        matches!(self, SeriesVerdict::Convergent { .. })
    }
}

/// Observed range of `t_n (n ln n)^s` over `ASYMPTOTIC_RANGE`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCheck {
    pub n_min: u32,
    pub n_max: u32,
    pub min: f64,
    pub max: f64,
}

/// Series `sum_n g^n (n ln n)^-s` over the witness generations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub side: WitnessSide,
    pub factor: f64,
    pub log_exponent: f64,
    pub generations: Vec<u32>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub asymptotic_constant: Option<AsymptoticCheck>,
    pub verdict: SeriesVerdict,
}

fn series_term(factor: f64, s: f64, n: u32) -> f64 {
    let n = f64::from(n);
    (n * factor.ln() - s * (n * n.ln()).ln()).exp()
}

/// Bound on the sum of `g^n (n ln n)^-s` over the generations after `last`,
/// `g <= 1`, `s > 0`, where generations advance by `step` from `first`.
fn tail_bound(factor: f64, s: f64, first: u32, step: u32) -> Option<f64> {
    let head = series_term(factor, s, first);
    if factor < 1.0 - FACTOR_TOL {
        Some(head / (1.0 - factor.powi(step as i32)))
    } else if factor <= 1.0 + FACTOR_TOL && s > 1.0 + GUARD {
        // Integral comparison: (x ln x)^-s <= (ln n0)^-s x^-s on [n0, inf).
        let n = f64::from(first);
        Some(head + n.powf(1.0 - s) / (f64::from(step) * (s - 1.0) * n.ln().powf(s)))
    } else {
        None
    }
}

fn build_series(side: WitnessSide, factor: f64, s: f64, last: u32) -> SeriesReport {
    let generations: Vec<u32> = side.generations(last).collect();
    let terms: Vec<f64> = generations
        .iter()
        .map(|&n| series_term(factor, s, n))
        .collect();
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect::<Vec<_>>();
    let total = partial_sums.last().copied().unwrap_or(0.0);
    let (first, step) = match side {
        WitnessSide::Upper => (last + 1, 1),
        WitnessSide::Lower => (last + 1 + last % 2, 2),
    };
    let verdict = match tail_bound(factor, s, first, step) {
        Some(tail) => SeriesVerdict::Convergent {
            tail_bound: tail,
            relative_tail: tail / total,
        },
        None => SeriesVerdict::Divergent {
            kind: if factor > 1.0 + FACTOR_TOL {
                DivergenceKind::Geometric
            } else {
                DivergenceKind::LogHarmonic
            },
            factor,
        },
    };
    SeriesReport {
        side,
        factor,
        log_exponent: s,
        generations,
        terms,
        partial_sums,
        asymptotic_constant: None,
        verdict,
    }
}

/// Series for `||u||_p^p` and `||Du||_p^p` up to constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessNormReport {
    pub params: WitnessParams,
    pub value: SeriesReport,
    pub gradient: SeriesReport,
}

impl WitnessNormReport {
    pub fn is_convergent(&self) -> bool {
        self.value.verdict.is_convergent() && self.gradient.verdict.is_convergent()
    }
}

/// Terms `2^n 3^(n(beta alpha p - alpha - 1)) (n ln n)^-(alpha_p p)` for the
/// function and `2^n 3^(n(alpha p (beta + 1) - alpha - 1)) (n ln n)^-(alpha_p p)`
/// for its gradient, each with an explicit tail bound when it converges.
pub fn witness_sobolev_norm(params: &WitnessParams) -> WitnessNormReport {
    let (a, p, b) = (params.alpha, params.p, params.beta);
    let s = params.alpha_p() * p;
    let value_factor = 2.0 * ((b * a * p - a - 1.0) * ln3()).exp();
    let gradient_factor = 2.0 * ((a * p * (b + 1.0) - a - 1.0) * ln3()).exp();
    WitnessNormReport {
        params: *params,
        value: build_series(params.side, value_factor, s, params.generations),
        gradient: build_series(params.side, gradient_factor, s, params.generations),
    }
}

/// Lower-bound series `t_n = 2^n 3^(alpha(n beta q - n) + n(q - 1)) (n ln n)^-(alpha_p q)`
/// for the `q`-energy of any extension of the witness.
///
/// Only defined where the witness is meant to defeat extension: `alpha` at or
/// below the critical exponent, `p <= p_lower`, or `q >= q_upper`.
pub fn divergence_witness(params: &WitnessParams, q: f64) -> Result<SeriesReport> {
    let (a, p) = (params.alpha, params.p);
    if !(q.is_finite() && q >= 1.0 && q <= p) {
        return Err(Error::Domain(format!("q must lie in [1, p], got {q}")));
    }
    let in_regime = a <= alpha_critical() || p <= exponents::p_lower(a)? || {
        let qu = exponents::q_upper(a, p)?;
        q >= qu.value * (1.0 - GUARD)
    };
    if !in_regime {
        return Err(Error::Precondition(format!(
            "q = {q} is below q_upper for alpha = {a}, p = {p}; no divergence to certify"
        )));
    }
    let s = params.alpha_p() * q;
    let factor = witness_factor(a, params.beta, q);
    let mut report = build_series(params.side, factor, s, params.generations);
    if (factor - 1.0).abs() <= FACTOR_TOL {
        let (n_min, n_max) = ASYMPTOTIC_RANGE;
        let (min, max) = params
            .side
            .generations(n_max)
            .filter(|&n| n >= n_min)
            .map(|n| {
                let nf = f64::from(n);
                series_term(factor, s, n) * (nf * nf.ln()).powf(s)
            })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                (lo.min(c), hi.max(c))
            });
        report.asymptotic_constant = Some(AsymptoticCheck {
            n_min,
            n_max,
            min,
            max,
        });
    }
    Ok(report)
}

/// `int |D(u o R)|^q` over the whole plane for the upper witness truncated
/// after `params.generations`, where `u o R` is the reflected extension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionEnergy {
    pub q: f64,
    pub generations: u32,
    /// Energy of the witness itself above the graph.
    pub upper: f64,
    /// Energy of the reflected copy below the graph.
    pub lower: f64,
    /// `(upper + lower)^(1/q)`.
    pub gradient_norm: f64,
}

/// Energy of the reflected extension of the truncated upper witness.
///
/// Above the graph the witness only varies in `x2`, so generation `m`
/// contributes `(2^(m-1) - 1)` windows whose section at height `y` has length
/// `3^-m + 2 y^(1/alpha)`. Below the graph the mirror copies that energy and
/// the lower rectangles add `(3 |w|^q - 1)` times the energy of the band
/// `psi < y < 2 psi`, where `|w| = sqrt(16 psi'^2 + 1) / 3` is the stretch of
/// the reflection. That correction is integrated per half interval.
pub fn extension_energy(params: &WitnessParams, q: f64) -> Result<ExtensionEnergy> {
    if params.side != WitnessSide::Upper {
        return Err(Error::Domain(
            "extension energy is implemented for the upper witness".into(),
        ));
    }
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::Domain(format!("q must be finite and >= 1, got {q}")));
    }
    let a = params.alpha;
    let last = params.generations;
    let (up_slope, low_slope) = upper_slopes(a);
    // Bands of nonzero gradient in generation m: (lo, hi, |du/dx2|^q).
    let bands = |m: u32| {
        let t = params.slab_top(m);
        let c = params.prefactor(m) / t;
        [
            ((2.0f64 / 3.0).powf(a) * t, t, (c * up_slope.abs()).powf(q)),
            (
                3f64.powf(-a) * t,
                0.5f64.powf(a) * t,
                (c * low_slope).powf(q),
            ),
        ]
    };
    let inv = 1.0 / a;
    let mut upper = 0.0;
    for m in 2..=last {
        let windows = 2f64.powi(m as i32 - 1) - 1.0;
        let base = 3f64.powi(-(m as i32));
        for (lo, hi, w) in bands(m) {
            let area =
                base * (hi - lo) + 2.0 * (hi.powf(inv + 1.0) - lo.powf(inv + 1.0)) / (inv + 1.0);
            upper += windows * w * area;
        }
    }

    // Band energy over the column at distance t from the nearer endpoint of
    // a removed interval, for a set of slabs.
    let band_energy = |slabs: &[u32], t: f64| -> f64 {
        let (y0, y1) = (t.powf(a), 2.0 * t.powf(a));
        slabs
            .iter()
            .flat_map(|&m| bands(m))
            .map(|(lo, hi, w)| w * (y1.min(hi) - y0.max(lo)).max(0.0))
            .sum()
    };
    let stretch = |t: f64| {
        let slope = a * t.powf(a - 1.0);
        (16.0 * slope * slope + 1.0).sqrt() / 3.0
    };

    let mut cache: std::collections::HashMap<(u32, Vec<u32>), f64> = Default::default();
    let mut correction = 0.0;
    // A band (psi, 2 psi) over generation g meets slab m <= last only when
    // g <= last + 1; one extra generation is kept for safety.
    for g in 1..=last + 2 {
        let half_length = 0.5 * 3f64.powi(-(g as i32));
        for bits in 0..(1u128 << (g - 1)) {
            let mut digits: Vec<u8> = (0..g - 1)
                .rev()
                .map(|i| if (bits >> i) & 1 == 1 { 2 } else { 0 })
                .collect();
            digits.push(1);
            for half in [Half::Left, Half::Right] {
                let slabs: Vec<u32> = (2..=last)
                    .filter(|&m| in_left_window(&digits, Some(half), m))
                    .collect();
                if slabs.is_empty() {
                    continue;
                }
                let value = *cache.entry((g, slabs.clone())).or_insert_with(|| {
                    let mut breaks = vec![0.0, half_length];
                    for &m in &slabs {
                        for (lo, hi, _) in bands(m) {
                            for edge in [lo, hi, 0.5 * lo, 0.5 * hi] {
                                let t = edge.powf(inv);
                                if t > 0.0 && t < half_length {
                                    breaks.push(t);
                                }
                            }
                        }
                    }
                    breaks.sort_by(f64::total_cmp);
                    breaks.dedup();
                    let f = |t: f64| (3.0 * stretch(t).powf(q) - 1.0) * band_energy(&slabs, t);
                    breaks
                        .windows(2)
                        .map(|w| adaptive(&f, w[0], w[1], 0.0, 1e-11, 400).value)
                        .sum()
                });
                correction += value;
            }
        }
    }
    let lower = upper + correction;
    Ok(ExtensionEnergy {
        q,
        generations: last,
        upper,
        lower,
        gradient_norm: (upper + lower).powf(1.0 / q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const CROSS_SECTION_1_05_02: f64 = 0.2533333333333333;

    fn upper(alpha: f64, p: f64) -> WitnessParams {
        WitnessParams::new(alpha, p, WitnessSide::Upper, 60).unwrap()
    }

    #[test]
    fn plateau_profile_values() {
        let params = upper(0.7, 2.0);
        let a = params.alpha;
        for n in [2, 3, 5] {
            let t = params.slab_top(n);
            assert_eq!(v_plus_profile(a, 0.5f64.powf(a)), 1.0);
            assert_eq!(v_plus_profile(a, 3f64.powf(-a)), 0.0);
            assert_eq!(v_plus_profile(a, 1.0), 0.0);
            assert_eq!(params.slab_of(0.99 * t), Some(n));
            assert_eq!(params.slab_of(1.01 * 3f64.powf(-a) * t), Some(n));
        }
        // Continuity at the inner branch points.
        let eps = 1e-12;
        for s in [(2.0f64 / 3.0).powf(a), 0.5f64.powf(a)] {
            assert!((v_plus_profile(a, s - eps) - v_plus_profile(a, s + eps)).abs() < 1e-10);
        }
    }

    #[test]
    fn windows_follow_the_midpoints() {
        let params = upper(0.5, 2.0);
        let n = 2;
        let y = 0.55f64.powf(0.5) * params.slab_top(n);
        // Generation-2 intervals: (1/9, 2/9) and (7/9, 8/9); k = 2 has the
        // generation-1 interval (1/3, 2/3) on its left.
        assert!(eval_v_plus(&params, PlanePoint::new(0.75, y)) > 0.0);
        assert!(eval_v_plus(&params, PlanePoint::new(0.7, y)) > 0.0);
        assert_eq!(eval_v_plus(&params, PlanePoint::new(0.86, y)), 0.0);
        assert_eq!(eval_v_plus(&params, PlanePoint::new(0.15, y)), 0.0);
        assert_eq!(eval_v_plus(&params, PlanePoint::new(0.45, y)), 0.0);
    }

    #[test]
    fn window_walk_matches_brute_force() {
        let midpoints = |m: u32| {
            let mut v: Vec<(f64, u32)> = (1..=m)
                .flat_map(|g| {
                    crate::geometry::removed_intervals(g)
                        .unwrap()
                        .map(move |i| (i.midpoint(), g))
                })
                .collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        };
        for m in 2..=6 {
            let mids = midpoints(m);
            for i in 1..4000 {
                let x = f64::from(i) / 4000.0 + 1e-7;
                let expected = mids
                    .windows(2)
                    .any(|w| w[0].0 < x && x < w[1].0 && w[1].1 == m);
                let (digits, half) = ternary_prefix(x, m).unwrap();
                assert_eq!(in_left_window(&digits, half, m), expected, "x={x} m={m}");
            }
        }
    }

    #[test]
    fn prefactor_two_ways() {
        let params = WitnessParams::new(0.7, 2.0, WitnessSide::Lower, 10).unwrap();
        let direct =
            3f64.powf(3.0 * 0.7 * params.beta) * (1.0 / (3.0 * 3f64.ln())).powf(params.alpha_p());
        assert_relative_eq!(params.prefactor(3), direct, max_relative = 1e-13);
        let profile = CuspProfile::new(0.7).unwrap();
        // Inside the cusp over (1/27, 2/27), above the (1/6)^a level.
        let x1 = 1.0 / 18.0 - 0.002;
        let x2 = 0.5 * profile.psi(x1).lo;
        let interval = profile.place(x1);
        assert!(
            matches!(interval, Placement::Removed { interval, .. } if interval.generation() == 3)
        );
        assert_relative_eq!(
            eval_u_minus(&params, PlanePoint::new(x1, x2)),
            direct,
            max_relative = 1e-13
        );
    }

    #[test]
    fn cross_section() {
        assert_relative_eq!(
            cusp_cross_section(1, 1, 0.2, 0.5).unwrap(),
            CROSS_SECTION_1_05_02,
            max_relative = 1e-14
        );
        assert_eq!(
            cusp_cross_section(1, 1, (1.0f64 / 6.0).sqrt(), 0.5).unwrap(),
            0.0
        );
        assert_relative_eq!(cusp_cross_section(2, 2, 1e-30, 0.5).unwrap(), 1.0 / 9.0);
        assert!(cusp_cross_section(2, 3, 0.1, 0.5).is_err());
    }

    #[test]
    fn sharp_gradient_series_at_default_beta() {
        let report = witness_sobolev_norm(&upper(0.7, 2.0));
        assert_relative_eq!(report.gradient.factor, 1.0, max_relative = 1e-12);
        assert!(report.gradient.log_exponent > 1.5);
        assert!(report.is_convergent());
    }

    #[test]
    fn divergence_regimes() {
        let sharp = upper(0.7, 2.0);
        let qo = exponents::q_upper(0.7, 2.0).unwrap().value;
        let r = divergence_witness(&sharp, qo).unwrap();
        let c = r.asymptotic_constant.unwrap();
        assert!((c.min - 1.0).abs() < 1e-8 && (c.max - 1.0).abs() < 1e-8);
        assert!(matches!(
            r.verdict,
            SeriesVerdict::Divergent {
                kind: DivergenceKind::LogHarmonic,
                ..
            }
        ));
        assert!(matches!(
            divergence_witness(&sharp, qo - 0.01),
            Err(Error::Precondition(_))
        ));
        let low = upper(0.3, 5.0);
        let r = divergence_witness(&low, 1.0).unwrap();
        assert!(r.factor > 1.03);
        assert!(matches!(
            r.verdict,
            SeriesVerdict::Divergent {
                kind: DivergenceKind::Geometric,
                ..
            }
        ));
    }
}
