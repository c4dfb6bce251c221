//! Exponent arithmetic for the extension problem.
//!
//! With `d = log 2 / log 3` and `A = 1 + alpha - d`, extension from
//! `W^{1,p}` to `W^{1,q}` holds for `p_lower < p` and `q < q_upper(p)`, where
//! `p_lower = A / (2 alpha - d)` and `q_upper = A p / (A + (1 - alpha) p)`.
//! `p = f64::INFINITY` is accepted everywhere and handled by the limiting
//! closed forms.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{check_alpha, Error, Result};

/// Relative guard band for comparisons against thresholds.
pub const GUARD: f64 = 1e-12;

pub fn ln3() -> f64 {
    3f64.ln()
}

/// `log 2 / log 3`.
pub fn cantor_dimension() -> f64 {
    LN_2 / ln3()
}

/// `log 2 / (2 log 3)`; exponents at or below it admit no extension.
pub fn alpha_critical() -> f64 {
    0.5 * cantor_dimension()
}

/// `A = 1 + alpha - log 2 / log 3`.
pub fn excess(alpha: f64) -> f64 {
    1.0 + alpha - cantor_dimension()
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p <= 1.0 {
        Err(Error::Domain(format!("p must exceed 1, got {p}")))
    } else {
        Ok(())
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q >= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "q must be finite and at least 1, got {q}"
        )))
    }
}

/// Smallest `p` (exclusive) for which some `q >= 1` is admissible.
pub fn p_lower(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let gap = 2.0 * alpha - cantor_dimension();
    if gap <= 0.0 {
        return Err(Error::Domain(format!(
            "alpha {alpha} is not above the critical exponent {}",
            alpha_critical()
        )));
    }
    Ok(excess(alpha) / gap)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QUpper {
    pub value: f64,
    /// `value > 1`: some `q >= 1` is admissible for this `p`.
    pub admissible: bool,
}

/// Supremum of admissible `q` for the given `p`.
pub fn q_upper(alpha: f64, p: f64) -> Result<QUpper> {
    check_alpha(alpha)?;
    check_p(p)?;
    let a = excess(alpha);
    let value = if p.is_infinite() {
        a / (1.0 - alpha)
    } else {
        a * p / (a + (1.0 - alpha) * p)
    };
    Ok(QUpper {
        value,
        admissible: value > 1.0 + GUARD,
    })
}

/// `kappa = p q / (p - q)`, which is `q` when `p` is infinite.
pub fn kappa(p: f64, q: f64) -> Result<f64> {
    check_p(p)?;
    check_q(q)?;
    if q >= p {
        return Err(Error::Domain(format!("q = {q} must be below p = {p}")));
    }
    Ok(if p.is_infinite() { q } else { p * q / (p - q) })
}

/// Exponent `1 + alpha + (alpha - 1) kappa` of `3^-n` in the generation-`n`
/// term of the Jacobian-quotient series.
pub fn series_exponent(alpha: f64, p: f64, q: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let k = kappa(p, q)?;
    Ok(1.0 + alpha + (alpha - 1.0) * k)
}

/// Ratio `2 * 3^-(1 + alpha + (alpha - 1) kappa)` of consecutive terms.
pub fn series_ratio(alpha: f64, p: f64, q: f64) -> Result<f64> {
    let e = series_exponent(alpha, p, q)?;
    Ok(2.0 * (-e * ln3()).exp())
}

/// `alpha_p`: `1 / q_upper` when `p` is above `p_lower`, else 1.
///
/// For `alpha` at or below the critical exponent no `p` is above the
/// threshold and the value is 1.
pub fn alpha_p(alpha: f64, p: f64) -> Result<f64> {
    let qu = q_upper(alpha, p)?;
    Ok(if qu.admissible { 1.0 / qu.value } else { 1.0 })
}

/// `(A + (1 - alpha) p) / (A p)`, the first branch of `alpha_p`, evaluated
/// whether or not `p` is above `p_lower`.
pub fn alpha_p_sharp_branch(alpha: f64, p: f64) -> Result<f64> {
    Ok(1.0 / q_upper(alpha, p)?.value)
}

/// Largest allowed `beta` in the witness construction: `A / (alpha p) - 1`.
pub fn beta_default(alpha: f64, p: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_p(p)?;
    Ok(if p.is_infinite() {
        -1.0
    } else {
        excess(alpha) / (alpha * p) - 1.0
    })
}

/// Witness growth factor `2 * 3^(alpha (beta q - 1) + (q - 1))`.
pub fn witness_factor(alpha: f64, beta: f64, q: f64) -> f64 {
    2.0 * ((alpha * (beta * q - 1.0) + (q - 1.0)) * ln3()).exp()
}

pub(crate) fn serialize_extended<S: Serializer>(
    v: &f64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub alpha: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub p: f64,
    pub q: f64,
}

/// Every derived quantity for an `(alpha, p[, q])` choice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedExponents {
    pub alpha: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub p: f64,
    pub q: Option<f64>,
    pub alpha_critical: f64,
    pub excess: f64,
    pub p_lower: Option<f64>,
    pub q_upper: f64,
    pub admissible: bool,
    pub alpha_p: f64,
    pub beta_default: f64,
    pub kappa: Option<f64>,
    pub series_ratio: Option<f64>,
}

impl ExponentTriple {
    pub fn new(alpha: f64, p: f64, q: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_p(p)?;
        check_q(q)?;
        Ok(ExponentTriple { alpha, p, q })
    }

    pub fn kappa(&self) -> Result<f64> {
        kappa(self.p, self.q)
    }

    pub fn derived(&self) -> Result<DerivedExponents> {
        derive(self.alpha, self.p, Some(self.q))
    }
}

/// All thresholds for `(alpha, p)`, plus the `q`-dependent quantities when
/// `q < p` is supplied.
pub fn derive(alpha: f64, p: f64, q: Option<f64>) -> Result<DerivedExponents> {
    let qu = q_upper(alpha, p)?;
    let (kappa, series_ratio) = match q {
        Some(q) => (Some(kappa(p, q)?), Some(series_ratio(alpha, p, q)?)),
        None => (None, None),
    };
    Ok(DerivedExponents {
        alpha,
        p,
        q,
        alpha_critical: alpha_critical(),
        excess: excess(alpha),
        p_lower: p_lower(alpha).ok(),
        q_upper: qu.value,
        admissible: qu.admissible,
        alpha_p: alpha_p(alpha, p)?,
        beta_default: beta_default(alpha, p)?,
        kappa,
        series_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // 30-digit reference evaluations.
    const ALPHA_CRIT: f64 = 0.315464876785728718;
    const P_LOWER_07: f64 = 1.390081402047679;
    const P_LOWER_05: f64 = 2.354755645675727;
    const Q_UPPER_07_2: f64 = 1.281036851164445;
    const Q_UPPER_07_INF: f64 = 3.563567488095142;
    const RATIO_07_2_12: f64 = 0.830487293077012;
    const ALPHA_P_07_2: f64 = 0.780617668485503;
    const BETA_07_2: f64 = -0.236378395408184;

    #[test]
    fn reference_values() {
        assert_relative_eq!(alpha_critical(), ALPHA_CRIT, max_relative = 1e-15);
        assert_relative_eq!(2.0 * alpha_critical(), cantor_dimension());
        assert!(alpha_critical() < 0.5);
        assert_relative_eq!(p_lower(0.7).unwrap(), P_LOWER_07, max_relative = 1e-14);
        assert_relative_eq!(p_lower(0.5).unwrap(), P_LOWER_05, max_relative = 1e-14);
        assert_relative_eq!(
            q_upper(0.7, 2.0).unwrap().value,
            Q_UPPER_07_2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            q_upper(0.7, f64::INFINITY).unwrap().value,
            Q_UPPER_07_INF,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            series_ratio(0.7, 2.0, 1.2).unwrap(),
            RATIO_07_2_12,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            alpha_p(0.7, 2.0).unwrap(),
            ALPHA_P_07_2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            beta_default(0.7, 2.0).unwrap(),
            BETA_07_2,
            max_relative = 1e-14
        );
        assert_eq!(alpha_p(0.7, 1.2).unwrap(), 1.0);
        assert_eq!(alpha_p(0.3, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn threshold_edges() {
        assert!(p_lower(0.3).is_err());
        assert!(p_lower(alpha_critical()).is_err());
        assert_relative_eq!(p_lower(1.0 - 1e-12).unwrap(), 1.0, max_relative = 1e-9);
        let at = q_upper(0.7, p_lower(0.7).unwrap()).unwrap();
        assert_relative_eq!(at.value, 1.0, max_relative = 1e-14);
        assert!(!at.admissible);
        assert!(series_ratio(0.7, 2.0, 1.35).unwrap() > 1.0);
        let qo = q_upper(0.7, 2.0).unwrap().value;
        assert_relative_eq!(
            series_ratio(0.7, 2.0, qo).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert!(series_ratio(0.7, 2.0, 2.0).is_err());
        assert!(q_upper(0.7, 1.0).is_err());
        assert_eq!(kappa(f64::INFINITY, 2.0).unwrap(), 2.0);
        assert_eq!(beta_default(0.7, f64::INFINITY).unwrap(), -1.0);
    }

    #[test]
    fn sharp_pair_identities() {
        for alpha in [0.4, 0.5, 0.7, 0.9] {
            for p in [2.0, 3.0, 5.0] {
                let qo = q_upper(alpha, p).unwrap().value;
                let beta = beta_default(alpha, p).unwrap();
                assert!((witness_factor(alpha, beta, qo) - 1.0).abs() < 1e-10);
                assert!((alpha_p_sharp_branch(alpha, p).unwrap() * qo - 1.0).abs() < 1e-12);
                let qu = q_upper(alpha, p).unwrap();
                if qu.admissible {
                    assert!((alpha_p(alpha, p).unwrap() * qo - 1.0).abs() < 1e-12);
                } else {
                    // (0.4, 2), (0.4, 3), (0.5, 2) sit at or below p_lower.
                    assert_eq!(alpha_p(alpha, p).unwrap(), 1.0);
                }
            }
        }
    }

    #[test]
    fn infinite_p_serializes_as_text() {
        let d = derive(0.7, f64::INFINITY, None).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"p\":\"inf\""), "{json}");
    }

    proptest! {
        #[test]
        fn ratio_below_one_iff_q_below_threshold(alpha in 0.32f64..0.99, p in 1.01f64..50.0, t in 0.0f64..1.0) {
            let q = 1.0 + t * (p - 1.0) * 0.999;
            let ratio = series_ratio(alpha, p, q).unwrap();
            prop_assume!((ratio - 1.0).abs() > GUARD);
            let qu = q_upper(alpha, p).unwrap().value;
            prop_assert_eq!(ratio < 1.0, q < qu);
        }

        #[test]
        fn q_upper_increases_towards_its_limit(alpha in 0.05f64..0.99, p in 1.01f64..1e6) {
            let a = q_upper(alpha, p).unwrap().value;
            let b = q_upper(alpha, p * 1.01).unwrap().value;
            let limit = q_upper(alpha, f64::INFINITY).unwrap().value;
            prop_assert!(a < b && b < limit);
            prop_assert!(a < p);
        }

        #[test]
        fn alpha_p_bounds(alpha in 0.05f64..0.99, p in 1.01f64..100.0) {
            let ap = alpha_p(alpha, p).unwrap();
            prop_assert!(ap * p > 1.0);
            prop_assert!(1.0 <= 1.0 / ap && 1.0 / ap < p);
        }
    }
}
