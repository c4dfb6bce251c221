//! The Jacobian-quotient integral of the reflection,
//! `int |DR|^kappa / |J_R|^(kappa / p)` with `kappa = p q / (p - q)`, over the
//! upper rectangles (`Plus`) or the lower rectangles (`Minus`).
//!
//! Over a removed interval of generation `n` the integrand depends only on
//! the distance `t` to the nearer endpoint and the rectangle has height
//! `t^alpha` (upper) or `3 t^alpha` (lower), so each generation reduces to
//! one-dimensional power integrals over `(0, 1 / (2 3^n))`. The operator
//! norm is bounded by `4 + 4 |psi'|` and split with
//! `(a + b)^kappa <= 2^max(kappa - 1, 0) (a^kappa + b^kappa)`, which makes
//! every generation term a sum of two exact geometric sequences.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::exponents::{self, ln3};

pub const DEFAULT_GENERATIONS: u32 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    /// Rectangle height in units of `psi`.
    pub fn height(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => 3.0,
        }
    }

    /// `|J_R|` on the rectangles of this side.
    pub fn jacobian(self) -> f64 {
        match self {
            Side::Plus => 3.0,
            Side::Minus => 1.0 / 3.0,
        }
    }
}

/// Exponent `alpha + (alpha - 1) kappa` of the distance in the cusp integrand.
pub fn cusp_exponent(alpha: f64, kappa: f64) -> f64 {
    alpha + (alpha - 1.0) * kappa
}

/// `ln` of `int_0^{1/(2 3^n)} t^e dt = (1/(2 3^n))^(e+1) / (e+1)`, or `None`
/// when `e <= -1` and the integral diverges.
fn ln_half_interval(e: f64, n: u32) -> Option<f64> {
    if e <= -1.0 {
        return None;
    }
    let w = -(2f64.ln() + f64::from(n) * ln3());
    Some((e + 1.0) * w - (e + 1.0).ln())
}

/// `int_0^{1/(2 3^n)} t^e dt`, `None` when divergent.
pub fn half_interval_integral(e: f64, n: u32) -> Option<f64> {
    ln_half_interval(e, n).map(f64::exp)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PerInterval {
    Finite(f64),
    Divergent,
}

/// `int_{I} int t^(alpha + (alpha-1) kappa)` over one removed interval of
/// generation `n`: both halves, times the rectangle height of `side`.
pub fn per_interval_integral(alpha: f64, kappa: f64, n: u32, side: Side) -> Result<PerInterval> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::GenerationOutOfRange(n));
    }
    Ok(
        match half_interval_integral(cusp_exponent(alpha, kappa), n) {
            Some(v) => PerInterval::Finite(side.height() * 2.0 * v),
            None => PerInterval::Divergent,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntegralVerdict {
    /// The series sum lies in `[value, value + bound]`.
    Finite {
        value: f64,
        bound: f64,
    },
    Divergent {
        ratio: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralReport {
    pub side: Side,
    pub alpha: f64,
    #[serde(serialize_with = "exponents::serialize_extended")]
    pub p: f64,
    pub q: f64,
    pub kappa: f64,
    pub verdict: IntegralVerdict,
    /// Partial sum through the last generation.
    pub value: f64,
    /// Geometric ratio of the dominant term.
    pub ratio: f64,
    /// Exact remainder of the majorant series after the last generation
    /// (`+inf` when divergent).
    pub tail_bound: f64,
    /// The cusp integral itself diverges on every interval (`e <= -1`).
    pub per_interval_divergent: bool,
    pub partial_sums: Vec<f64>,
    /// Natural logarithms of the generation contributions.
    pub log_terms: Vec<f64>,
    /// `ln` of the constant-free terms `2^n 3^(-n (1 + alpha + (alpha-1) kappa))`.
    pub kernel_log_terms: Vec<f64>,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Generation-`n` majorant, in log form, as (dominant, remainder).
///
/// dominant  = 2^(n-1) j h c 2 (4 alpha)^kappa int t^e
/// remainder = 2^(n-1) j h c 2 4^kappa        int t^alpha
/// with `j = |J|^(-kappa / p)`, `h` the height factor and
/// `c = 2^max(kappa - 1, 0)`.
fn log_term_parts(alpha: f64, p: f64, kappa: f64, side: Side, n: u32) -> (f64, f64) {
    let ln2 = 2f64.ln();
    let jacobian_factor = if p.is_infinite() {
        0.0
    } else {
        -(kappa / p) * side.jacobian().ln()
    };
    let common = f64::from(n - 1) * ln2
        + jacobian_factor
        + side.height().ln()
        + (kappa - 1.0).max(0.0) * ln2
        + ln2;
    let dominant = match ln_half_interval(cusp_exponent(alpha, kappa), n) {
        Some(l) => common + kappa * (4.0 * alpha).ln() + l,
        None => f64::INFINITY,
    };
    let remainder = common + kappa * 4f64.ln() + ln_half_interval(alpha, n).expect("alpha > -1");
    (dominant, remainder)
}

/// Majorant series of the Jacobian-quotient integral for one side.
pub fn jacobian_integral(
    side: Side,
    alpha: f64,
    p: f64,
    q: f64,
    max_generation: u32,
) -> Result<IntegralReport> {
    check_alpha(alpha)?;
    let kappa = exponents::kappa(p, q)?;
    if max_generation == 0 {
        return Err(Error::GenerationOutOfRange(0));
    }
    let ratio = exponents::series_ratio(alpha, p, q)?;
    let e = cusp_exponent(alpha, kappa);
    let per_interval_divergent = e <= -1.0;
    let kernel_exponent = 1.0 + alpha + (alpha - 1.0) * kappa;

    let mut log_terms = Vec::with_capacity(max_generation as usize);
    let mut kernel_log_terms = Vec::with_capacity(max_generation as usize);
    let mut partial_sums = Vec::with_capacity(max_generation as usize);
    let mut log_sum = f64::NEG_INFINITY;
    let mut last = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for n in 1..=max_generation {
        let (d, r) = log_term_parts(alpha, p, kappa, side, n);
        let term = log_add(d, r);
        log_sum = log_add(log_sum, term);
        log_terms.push(term);
        partial_sums.push(log_sum.exp());
        kernel_log_terms.push(f64::from(n) * (2f64.ln() - kernel_exponent * ln3()));
        last = (d, r);
    }
    let value = log_sum.exp();

    let finite = ratio < 1.0 && !per_interval_divergent;
    let (verdict, tail_bound) = if finite {
        // Both parts are exact geometric sequences.
        let remainder_ratio = 2.0 * (-(1.0 + alpha) * ln3()).exp();
        let tail = (last.0 + ratio.ln() - (-ratio).ln_1p()).exp()
            + (last.1 + remainder_ratio.ln() - (-remainder_ratio).ln_1p()).exp();
        (IntegralVerdict::Finite { value, bound: tail }, tail)
    } else {
        (IntegralVerdict::Divergent { ratio }, f64::INFINITY)
    };
    Ok(IntegralReport {
        side,
        alpha,
        p,
        q,
        kappa,
        verdict,
        value,
        ratio,
        tail_bound,
        per_interval_divergent,
        partial_sums,
        log_terms,
        kernel_log_terms,
    })
}

/// Jacobian-quotient integral over the upper rectangles.
pub fn cplus(alpha: f64, p: f64, q: f64, max_generation: u32) -> Result<IntegralReport> {
    jacobian_integral(Side::Plus, alpha, p, q, max_generation)
}

/// Jacobian-quotient integral over the lower rectangles.
pub fn cminus(alpha: f64, p: f64, q: f64, max_generation: u32) -> Result<IntegralReport> {
    jacobian_integral(Side::Minus, alpha, p, q, max_generation)
}
