//! End-to-end checks of the library's guarantees at desk scale.
//!
//! Each check returns a [`CheckResult`] with a pass flag, a one-line detail
//! and named metrics. Reports contain no timings, so two runs with the same
//! configuration serialize to identical bytes.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponents::{self, alpha_critical, beta_default, q_upper, series_ratio, GUARD};
use crate::geometry::{intervals_through, removed_intervals, CantorInterval};
use crate::grid::{bump, extension_ratio, BoundingBox};
use crate::integrals::{cminus, cplus, half_interval_integral, IntegralVerdict, Side};
use crate::profile::{CuspProfile, PlanePoint};
use crate::quadrature::endpoint_singular;
use crate::reflection::{reflect, reflect_jet, zone, ReflectionZone};
use crate::triadic::{pow3, TriadicRational};
use crate::witness::{
    divergence_witness, extension_energy, witness_sobolev_norm, SeriesVerdict, WitnessParams,
    WitnessSide,
};

pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

/// Exponents shared by several checks.
pub const SHARP_ALPHAS: [f64; 4] = [0.4, 0.5, 0.7, 0.9];
pub const SHARP_PS: [f64; 3] = [2.0, 3.0, 5.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Exponent used by the reflection checks.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            alpha: 0.7,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

impl CheckResult {
    fn new(id: u32, name: &str, passed: bool, detail: String, metrics: &[(&str, f64)]) -> Self {
        CheckResult {
            id,
            name: name.to_string(),
            passed,
            detail,
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub const CHECK_NAMES: [&str; 9] = [
    "geometry_exactness",
    "reflection_involution",
    "differential_jacobian",
    "threshold_equivalence",
    "singular_integral_oracle",
    "sharp_pair_identities",
    "witness_norms",
    "grid_extension_stability",
    "determinism",
];

/// Runs one check by number (1 to 9).
pub fn run_check(id: u32, config: &VerifyConfig) -> Result<CheckResult> {
    match id {
        1 => geometry_exactness(),
        2 => reflection_involution(config),
        3 => differential_jacobian(config),
        4 => threshold_equivalence(),
        5 => singular_integral_oracle(config),
        6 => Ok(sharp_pair_identities()),
        7 => witness_norms(),
        8 => grid_extension_stability(),
        9 => determinism(config),
        _ => Err(crate::Error::Domain(format!("no check numbered {id}"))),
    }
}

fn checks_through_eight(config: &VerifyConfig) -> Result<Vec<CheckResult>> {
    (1..=8).map(|id| run_check(id, config)).collect()
}

pub fn verify_all(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut checks = checks_through_eight(config)?;
    checks.push(determinism(config)?);
    Ok(VerifyReport {
        config: *config,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Generations 1 to 20 in exact arithmetic: counts, lengths, disjointness
/// and total removed length `1 - (2/3)^n`.
pub fn geometry_exactness() -> Result<CheckResult> {
    const LAST: u32 = 20;
    let mut failures = Vec::new();
    let mut removed = 0i128;
    for n in 1..=LAST {
        let mut count = 0u128;
        let expected_length = TriadicRational::new(1, n)?;
        for interval in removed_intervals(n)? {
            count += 1;
            if interval.length() != expected_length {
                failures.push(format!("length of I_{n}^{}", interval.index()));
            }
        }
        if count != 1u128 << (n - 1) {
            failures.push(format!("generation {n} has {count} intervals"));
        }
        // Removed length through n, as a numerator over 3^n.
        removed = removed * 3 + (1i128 << (n - 1));
        if removed != pow3(n) - (1i128 << n) {
            failures.push(format!("removed length through generation {n}"));
        }
    }
    let mut spans: Vec<(i128, i128)> = intervals_through(LAST)?
        .map(|i| Ok((i.left().numerator_at(LAST)?, i.right().numerator_at(LAST)?)))
        .collect::<Result<_>>()?;
    spans.sort_unstable();
    let overlaps = spans.windows(2).filter(|w| w[0].1 >= w[1].0).count();
    if overlaps > 0 {
        failures.push(format!("{overlaps} overlapping neighbours"));
    }
    let passed = failures.is_empty();
    Ok(CheckResult::new(
        1,
        CHECK_NAMES[0],
        passed,
        if passed {
            format!("{} intervals over generations 1-{LAST} exact", spans.len())
        } else {
            failures.join("; ")
        },
        &[
            ("intervals", spans.len() as f64),
            ("overlaps", overlaps as f64),
        ],
    ))
}

/// `R(R(x)) = x` on random certified points and `R = id` on the graph.
pub fn reflection_involution(config: &VerifyConfig) -> Result<CheckResult> {
    let profile = CuspProfile::new(config.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 2);
    let mut certified = 0usize;
    let mut max_error = 0f64;
    for _ in 0..10_000 {
        let x = PlanePoint::new(rng.random_range(-1.0..2.0), rng.random_range(-2.0..2.0));
        if zone(&profile, x).is_err() {
            continue;
        }
        certified += 1;
        let back = reflect(&profile, reflect(&profile, x)?)?;
        max_error = max_error.max((back.x1 - x.x1).hypot(back.x2 - x.x2));
    }
    // Graph points over removed intervals and over points of C.
    let mut graph_error = 0f64;
    for _ in 0..1_000 {
        let n = rng.random_range(1..=12u32);
        let k = rng.random_range(1..=(1u128 << (n - 1)));
        let interval = CantorInterval::new(n, k)?;
        let x1 = interval.left_f64()
            + rng.random_range(0.001..0.999) * (interval.right_f64() - interval.left_f64());
        let s = profile.psi(x1);
        let g = PlanePoint::new(x1, s.lo);
        let r = reflect(&profile, g)?;
        graph_error = graph_error.max((r.x2 - g.x2).abs() - s.width());
    }
    for x1 in [0.0, 0.25, 0.75, 1.0] {
        let r = reflect(&profile, PlanePoint::new(x1, 0.0))?;
        graph_error = graph_error.max(r.x2.abs());
    }
    let passed = max_error < 1e-9 && graph_error <= 0.0 && certified >= 9_000;
    Ok(CheckResult::new(
        2,
        CHECK_NAMES[1],
        passed,
        format!("{certified} certified points, max |R(R(x)) - x| = {max_error:e}"),
        &[
            ("certified_points", certified as f64),
            ("max_involution_error", max_error),
            ("graph_excess", graph_error.max(0.0)),
        ],
    ))
}

fn sample_jet_point(profile: &CuspProfile, rng: &mut ChaCha8Rng, kind: u32) -> PlanePoint {
    if kind == 2 {
        loop {
            let x = PlanePoint::new(rng.random_range(-1.0..2.0), rng.random_range(-2.0..2.0));
            let s = profile.psi(x.x1);
            let margin = 1e-4;
            if x.x2.abs() > 2.0 * s.hi + margin {
                return x;
            }
        }
    }
    let n = rng.random_range(1..=6u32);
    let k = rng.random_range(1..=(1u128 << (n - 1)));
    let interval = CantorInterval::new(n, k).expect("valid index");
    let half = interval.half_length();
    let t = rng.random_range(0.05..0.95) * half;
    let x1 = if rng.random_bool(0.5) {
        interval.left_f64() + t
    } else {
        interval.right_f64() - t
    };
    let s = profile.psi(x1).lo;
    let x2 = if kind == 0 {
        s * rng.random_range(1.05..1.95)
    } else {
        s * rng.random_range(-1.95..0.95)
    };
    PlanePoint::new(x1, x2)
}

/// Analytic differential against central differences, plus exact `|det|`.
pub fn differential_jacobian(config: &VerifyConfig) -> Result<CheckResult> {
    const H: f64 = 1e-7;
    let profile = CuspProfile::new(config.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 3);
    let mut max_rel = 0f64;
    let mut det_mismatches = 0usize;
    let mut points = 0usize;
    for i in 0..1_000u32 {
        let x = sample_jet_point(&profile, &mut rng, i % 3);
        let jet = reflect_jet(&profile, x)?;
        let expected_det = match zone(&profile, x)? {
            ReflectionZone::UpperRectangle { .. } => 3.0,
            ReflectionZone::LowerRectangle { .. } => 1.0 / 3.0,
            ReflectionZone::Elsewhere => 1.0,
        };
        if jet.jacobian_abs != expected_det {
            det_mismatches += 1;
        }
        for (j, step) in [(H, 0.0), (0.0, H)].into_iter().enumerate() {
            let plus = reflect(&profile, PlanePoint::new(x.x1 + step.0, x.x2 + step.1))?;
            let minus = reflect(&profile, PlanePoint::new(x.x1 - step.0, x.x2 - step.1))?;
            let fd = [
                (plus.x1 - minus.x1) / (2.0 * H),
                (plus.x2 - minus.x2) / (2.0 * H),
            ];
            for r in 0..2 {
                let exact = jet.differential[r][j];
                max_rel = max_rel.max((fd[r] - exact).abs() / exact.abs().max(1.0));
            }
        }
        points += 1;
    }
    let passed = max_rel < 1e-5 && det_mismatches == 0;
    Ok(CheckResult::new(
        3,
        CHECK_NAMES[2],
        passed,
        format!("{points} points, max entrywise relative error {max_rel:e}, {det_mismatches} determinant mismatches"),
        &[
            ("points", points as f64),
            ("max_relative_error", max_rel),
            ("determinant_mismatches", det_mismatches as f64),
        ],
    ))
}

/// The full `(alpha, p, q)` sweep grid: `p = 1.05..20` by 0.05 and
/// `q = 1..p - 0.01` by 0.01, generated from integer steps.
pub fn sweep_grid() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &alpha in &SHARP_ALPHAS {
        for pi in 0..=379u32 {
            let p_hundredths = 105 + 5 * pi;
            let p = f64::from(p_hundredths) / 100.0;
            for qh in 100..p_hundredths {
                out.push((alpha, p, f64::from(qh) / 100.0));
            }
        }
    }
    out
}

/// Whether `(alpha, p, q)` lies within the guard band of the threshold.
fn in_tie_band(alpha: f64, p: f64, q: f64) -> Result<bool> {
    let qu = q_upper(alpha, p)?.value;
    Ok((q - qu).abs() <= GUARD * qu.abs().max(1.0))
}

/// `series_ratio < 1` exactly when `q < q_upper`, over the sweep grid.
pub fn threshold_equivalence() -> Result<CheckResult> {
    let grid = sweep_grid();
    let outcomes: Vec<(bool, bool)> = grid
        .par_iter()
        .map(|&(a, p, q)| -> Result<(bool, bool)> {
            if in_tie_band(a, p, q)? {
                return Ok((true, false));
            }
            let ratio_says = series_ratio(a, p, q)? < 1.0;
            let threshold_says = q < q_upper(a, p)?.value;
            Ok((false, ratio_says != threshold_says))
        })
        .collect::<Result<_>>()?;
    let ties = outcomes.iter().filter(|o| o.0).count();
    let discrepancies = outcomes.iter().filter(|o| o.1).count();
    let critical_error = (alpha_critical() - 2f64.ln() / (2.0 * 3f64.ln())).abs();
    let passed = discrepancies == 0 && critical_error < 1e-12;
    Ok(CheckResult::new(
        4,
        CHECK_NAMES[3],
        passed,
        format!(
            "{} triples, {discrepancies} discrepancies, {ties} in the tie band",
            grid.len()
        ),
        &[
            ("triples", grid.len() as f64),
            ("discrepancies", discrepancies as f64),
            ("tie_band", ties as f64),
            ("alpha_critical_error", critical_error),
        ],
    ))
}

/// Closed-form cusp integrals against quadrature of the actual profile, and
/// the series verdicts against the threshold.
pub fn singular_integral_oracle(config: &VerifyConfig) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 5);
    let mut max_rel = 0f64;
    for _ in 0..10 {
        let alpha = rng.random_range(0.4..0.95);
        let p = rng.random_range(1.5..10.0);
        let qu = q_upper(alpha, p)?.value;
        let q_max = qu.min(p);
        let q = if q_max > 1.0 {
            rng.random_range(1.0..q_max)
        } else {
            1.0
        };
        let kappa = exponents::kappa(p, q)?;
        let n = rng.random_range(1..=4u32);
        let k = rng.random_range(1..=(1u128 << (n - 1)));
        let side = if rng.random_bool(0.5) {
            Side::Plus
        } else {
            Side::Minus
        };
        let e = alpha + (alpha - 1.0) * kappa;
        let Some(half) = half_interval_integral(e, n) else {
            continue;
        };
        let closed = side.height() * 2.0 * half;

        // Height times psi |psi'|^kappa / alpha^kappa, straight from the profile.
        let profile = CuspProfile::new(alpha)?;
        let interval = CantorInterval::new(n, k)?;
        let (a, b) = (interval.left_f64(), interval.right_f64());
        let density = |x1: f64| {
            let psi = profile.psi(x1).lo;
            let slope = profile.psi_derivative(x1).unwrap_or(0.0).abs();
            side.height() * psi * (slope / alpha).powf(kappa)
        };
        let l = interval.half_length();
        let left = endpoint_singular(&|t: f64| density(a + t), 0.0, l, 1e-12);
        let right = endpoint_singular(&|t: f64| density(b - t), 0.0, l, 1e-12);
        let numeric = left.value + right.value;
        max_rel = max_rel.max((numeric - closed).abs() / closed.abs());
    }

    let grid = sweep_grid();
    let mut verdict_mismatches = 0usize;
    let mut sampled = 0usize;
    while sampled < 100 {
        let (a, p, q) = grid[rng.random_range(0..grid.len())];
        if in_tie_band(a, p, q)? {
            continue;
        }
        sampled += 1;
        let below = q < q_upper(a, p)?.value;
        for report in [cplus(a, p, q, 60)?, cminus(a, p, q, 60)?] {
            let finite = matches!(report.verdict, IntegralVerdict::Finite { .. });
            if finite != below {
                verdict_mismatches += 1;
            }
        }
    }
    let passed = max_rel <= 1e-8 && verdict_mismatches == 0;
    Ok(CheckResult::new(
        5,
        CHECK_NAMES[4],
        passed,
        format!("max relative error {max_rel:e}, {verdict_mismatches} verdict mismatches in {sampled} samples"),
        &[
            ("max_relative_error", max_rel),
            ("verdict_mismatches", verdict_mismatches as f64),
        ],
    ))
}

/// `g(q_o) = 1` and `alpha_p q_o = 1` at `beta = beta_default`.
pub fn sharp_pair_identities() -> CheckResult {
    let mut max_g = 0f64;
    let mut max_product = 0f64;
    for &a in &SHARP_ALPHAS {
        for &p in &SHARP_PS {
            let qo = q_upper(a, p).expect("valid exponents").value;
            let beta = beta_default(a, p).expect("valid exponents");
            let ap = exponents::alpha_p_sharp_branch(a, p).expect("valid exponents");
            max_g = max_g.max((exponents::witness_factor(a, beta, qo) - 1.0).abs());
            max_product = max_product.max((ap * qo - 1.0).abs());
        }
    }
    let passed = max_g < 1e-10 && max_product < 1e-12;
    CheckResult::new(
        6,
        CHECK_NAMES[5],
        passed,
        format!("max |g - 1| = {max_g:e}, max |alpha_p q_o - 1| = {max_product:e}"),
        &[
            ("max_factor_error", max_g),
            ("max_product_error", max_product),
        ],
    )
}

/// Norm series converge with small tails; divergence witnesses have the
/// predicted asymptotics at `q_o` and grow geometrically in the low regimes.
pub fn witness_norms() -> Result<CheckResult> {
    const GENERATIONS: u32 = 60;
    let mut failures = Vec::new();
    let mut worst_tail = 0f64;
    let mut worst_constant = 0f64;
    let mut min_growth = f64::INFINITY;
    let sides = [WitnessSide::Upper, WitnessSide::Lower];

    let mut convergent_cases: Vec<(f64, f64, f64)> = Vec::new();
    for &a in &SHARP_ALPHAS {
        for &p in &SHARP_PS {
            if q_upper(a, p)?.admissible {
                convergent_cases.push((a, p, beta_default(a, p)? - 0.1));
            }
        }
    }
    convergent_cases.extend([(0.3, 2.0, -1.0), (0.3, 5.0, -1.0)]);
    for &(a, p, beta) in &convergent_cases {
        for side in sides {
            let params = WitnessParams::new(a, p, side, GENERATIONS)?.with_beta(beta)?;
            let report = witness_sobolev_norm(&params);
            for series in [&report.value, &report.gradient] {
                match series.verdict {
                    SeriesVerdict::Convergent { relative_tail, .. } => {
                        worst_tail = worst_tail.max(relative_tail);
                    }
                    SeriesVerdict::Divergent { .. } => {
                        failures.push(format!("norm series diverges at ({a}, {p}, {side})"));
                    }
                }
            }
        }
    }
    if worst_tail >= 1e-6 {
        failures.push(format!("relative tail {worst_tail:e}"));
    }

    for &a in &SHARP_ALPHAS {
        for &p in &SHARP_PS {
            let qu = q_upper(a, p)?;
            if !qu.admissible {
                continue;
            }
            for side in sides {
                let params = WitnessParams::new(a, p, side, GENERATIONS)?;
                let report = divergence_witness(&params, qu.value)?;
                match report.asymptotic_constant {
                    Some(c) => {
                        worst_constant = worst_constant
                            .max((c.min - 1.0).abs())
                            .max((c.max - 1.0).abs());
                        if !(c.min >= 0.9 && c.max <= 1.1) {
                            failures.push(format!("asymptotic constant at ({a}, {p}, {side})"));
                        }
                    }
                    None => failures.push(format!("g != 1 at q_o for ({a}, {p})")),
                }
                if report.verdict.is_convergent() {
                    failures.push(format!("no divergence at q_o for ({a}, {p}, {side})"));
                }
            }
        }
    }

    let low_regimes = [
        (0.3, 2.0),
        (0.3, 5.0),
        (0.4, 2.0),
        (0.4, 3.0),
        (0.5, 2.0),
        (0.7, 1.2),
    ];
    for (a, p) in low_regimes {
        for side in sides {
            let params = WitnessParams::new(a, p, side, GENERATIONS)?;
            let report = divergence_witness(&params, 1.0)?;
            min_growth = min_growth.min(report.factor);
            if !(report.factor > 1.0) || report.verdict.is_convergent() {
                failures.push(format!("no geometric growth at ({a}, {p}, {side})"));
            }
        }
    }
    let passed = failures.is_empty();
    Ok(CheckResult::new(
        7,
        CHECK_NAMES[6],
        passed,
        if passed {
            format!("max relative tail {worst_tail:e}, asymptotic constants within {worst_constant:e} of 1, min growth {min_growth}")
        } else {
            failures.join("; ")
        },
        &[
            ("max_relative_tail", worst_tail),
            ("max_asymptotic_deviation", worst_constant),
            ("min_geometric_factor", min_growth),
        ],
    ))
}

/// Bump used by the grid stability check.
pub fn stability_bump() -> impl Fn(PlanePoint) -> f64 + Sync + Copy {
    bump(PlanePoint::new(0.5, 0.5), 1.0)
}

/// Refinement stability of the extension ratio below `q_upper`, and growth of
/// the extension energy with the truncation generation above it.
pub fn grid_extension_stability() -> Result<CheckResult> {
    let profile = CuspProfile::new(0.7)?;
    let bbox = BoundingBox::new(-0.5, 1.5, -0.5, 1.5)?;
    let coarse = extension_ratio(&profile, stability_bump(), 2.0, 1.2, bbox, 2f64.powi(-8))?;
    let fine = extension_ratio(&profile, stability_bump(), 2.0, 1.2, bbox, 2f64.powi(-9))?;
    let change = (fine - coarse).abs() / coarse;

    let q = 1.5;
    let energy = |n: u32| -> Result<_> {
        extension_energy(&WitnessParams::new(0.7, 2.0, WitnessSide::Upper, n)?, q)
    };
    let (six, eight) = (energy(6)?, energy(8)?);
    let growth = eight.gradient_norm / six.gradient_norm;
    let stable = change < 0.25;
    let grows = growth >= 1.5;
    Ok(CheckResult::new(
        8,
        CHECK_NAMES[7],
        stable && grows,
        format!(
            "extension ratio {coarse:.6} -> {fine:.6} (change {:.3}%, {}); W^1,{q} gradient norm {:.6} -> {:.6} from generation 6 to 8 (growth {growth:.4}, {})",
            100.0 * change,
            if stable { "stable" } else { "unstable" },
            six.gradient_norm,
            eight.gradient_norm,
            if grows { "at least 1.5" } else { "below 1.5" },
        ),
        &[
            ("ratio_coarse", coarse),
            ("ratio_fine", fine),
            ("ratio_relative_change", change),
            ("gradient_norm_generation_6", six.gradient_norm),
            ("gradient_norm_generation_8", eight.gradient_norm),
            ("gradient_norm_growth", growth),
            ("energy_growth", (eight.upper + eight.lower) / (six.upper + six.lower)),
        ],
    ))
}

/// Checks 1 to 8 twice; the serialized results must match byte for byte.
pub fn determinism(config: &VerifyConfig) -> Result<CheckResult> {
    let first = serde_json::to_string(&checks_through_eight(config)?)
        .map_err(|e| crate::Error::Domain(e.to_string()))?;
    let second = serde_json::to_string(&checks_through_eight(config)?)
        .map_err(|e| crate::Error::Domain(e.to_string()))?;
    let passed = first == second;
    Ok(CheckResult::new(
        9,
        CHECK_NAMES[8],
        passed,
        format!(
            "two runs of {} bytes {}",
            first.len(),
            if passed { "identical" } else { "differ" }
        ),
        &[("report_bytes", first.len() as f64)],
    ))
}
