//! Adaptive Gauss-Kronrod quadrature, with a variant for integrands that
//! blow up at the left endpoint.
//!
//! This is the independent check on the closed-form cusp integrals; it knows
//! nothing about their antiderivatives.

#![allow(clippy::excessive_precision)]

use serde::Serialize;

// 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights; the
// odd-indexed nodes are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// One G7-K15 panel on `[a, b]`: Kronrod value and `|K15 - G7|`.
pub fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Globally adaptive bisection: split the panel with the largest error
/// estimate until the total estimate meets `max(abs_tol, rel_tol |I|)`.
pub fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadratureResult {
    let make = |a: f64, b: f64| {
        let (value, error) = gauss_kronrod(f, a, b);
        Panel { a, b, value, error }
    };
    let mut panels = vec![make(a, b)];
    let mut evaluations = 15;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || panels.len() >= max_panels {
            return QuadratureResult {
                value,
                error_estimate: error,
                evaluations,
            };
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel cannot be split further in floating point.
            panels.push(Panel { error: 0.0, ..p });
            continue;
        }
        panels.push(make(p.a, mid));
        panels.push(make(mid, p.b));
        evaluations += 30;
    }
}

/// Integral over `(a, b]` of a function with an integrable singularity at `a`.
///
/// The range is cut into dyadic shells `[a + L/2^(j+1), a + L/2^j]`, each
/// integrated adaptively. Shell contributions of a power-type singularity
/// decay geometrically, so once two consecutive shells have a stable ratio
/// `rho < 1` the rest is added as `s rho / (1 - rho)`.
pub fn endpoint_singular(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> QuadratureResult {
    let length = b - a;
    let mut total = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut previous: Option<f64> = None;
    let mut previous_ratio: Option<f64> = None;
    for j in 0..1000 {
        let hi = a + length * 0.5f64.powi(j);
        let lo = a + length * 0.5f64.powi(j + 1);
        if lo <= a || hi <= lo {
            break;
        }
        let shell = adaptive(f, lo, hi, 0.0, rel_tol * 1e-2, 200);
        total += shell.value;
        error += shell.error_estimate;
        evaluations += shell.evaluations;
        if let Some(prev) = previous {
            if prev != 0.0 {
                let rho = shell.value / prev;
                let stable = previous_ratio.is_some_and(|r| (rho - r).abs() <= 1e-6 * r.abs());
                if stable && rho.abs() < 1.0 {
                    let tail = shell.value * rho / (1.0 - rho);
                    if tail.abs() <= rel_tol * total.abs() || j > 60 {
                        total += tail;
                        error += 1e-6 * tail.abs();
                        break;
                    }
                }
                previous_ratio = Some(rho);
            }
        }
        previous = Some(shell.value);
    }
    QuadratureResult {
        value: total,
        error_estimate: error,
        evaluations,
    }
}
