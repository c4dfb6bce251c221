use cantor_cusp::exponents::{beta_default, p_lower, q_upper};
use cantor_cusp::witness::{
    divergence_witness, eval_u_minus, eval_u_plus, witness_sobolev_norm, SeriesVerdict,
    WitnessParams, WitnessSide,
};
use cantor_cusp::{locate, CuspProfile, Error, LocateResult, PlanePoint, RegionTag};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(alpha: f64, p: f64, side: WitnessSide) -> WitnessParams {
    WitnessParams::new(alpha, p, side, 12).unwrap()
}

#[test]
fn supports_lie_on_their_own_side() {
    let profile = CuspProfile::new(0.7).unwrap();
    let upper = params(0.7, 2.0, WitnessSide::Upper);
    let lower = params(0.7, 2.0, WitnessSide::Lower);
    let top = upper.slab_top(2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut seen_upper, mut seen_lower) = (0, 0);
    while seen_upper < 10_000 || seen_lower < 10_000 {
        let x = PlanePoint::new(rng.random_range(0.0..1.0), rng.random_range(-top..top));
        if eval_u_plus(&upper, x) != 0.0 {
            assert_eq!(profile.classify(x, 0.0), RegionTag::UpperDomain, "{x:?}");
            seen_upper += 1;
        }
        if eval_u_minus(&lower, x) != 0.0 {
            assert_eq!(profile.classify(x, 0.0), RegionTag::LowerDomain, "{x:?}");
            seen_lower += 1;
        }
    }
}

#[test]
fn finite_differences_respect_the_gradient_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for side in [WitnessSide::Upper, WitnessSide::Lower] {
        let w = params(0.7, 2.0, side);
        let eval = |x: PlanePoint| match side {
            WitnessSide::Upper => eval_u_plus(&w, x),
            WitnessSide::Lower => eval_u_minus(&w, x),
        };
        let mut checked = 0;
        while checked < 2_000 {
            let n = rng.random_range(2..=8u32);
            let t = w.slab_top(n);
            let x = PlanePoint::new(rng.random_range(0.0..1.0), t * rng.random_range(0.0..1.0));
            let u = eval(x);
            if u == 0.0 {
                continue;
            }
            let h = 1e-7 * t;
            let up = eval(PlanePoint::new(x.x1, x.x2 + h));
            let slope = (up - u).abs() / h;
            let gen = match side {
                WitnessSide::Upper => (2..=12)
                    .find(|&m| x.x2 < w.slab_top(m) && x.x2 > w.slab_top(m + 1))
                    .unwrap(),
                WitnessSide::Lower => match locate(x.x1, 40).unwrap() {
                    LocateResult::InRemovedInterval { interval } => interval.generation(),
                    other => panic!("{other:?}"),
                },
            };
            let bound = w.gradient_bound(gen);
            assert!(
                slope <= bound * (1.0 + 1e-6),
                "{side} {x:?}: {slope} > {bound}"
            );
            checked += 1;
        }
    }
}

#[test]
fn verdicts_agree_with_thresholds() {
    for alpha in [0.4, 0.5, 0.7, 0.9] {
        let pl = p_lower(alpha).unwrap();
        for i in 0..76 {
            let p = 1.25 + 0.25 * f64::from(i);
            let qu = q_upper(alpha, p).unwrap();
            for side in [WitnessSide::Upper, WitnessSide::Lower] {
                let w = WitnessParams::new(alpha, p, side, 60).unwrap();
                assert_eq!(w.beta, beta_default(alpha, p).unwrap());
                if p > pl {
                    assert!(witness_sobolev_norm(&w).is_convergent(), "{alpha} {p}");
                }
                for j in 0..20 {
                    let q = 1.0 + (p - 1.0) * f64::from(j) / 20.0;
                    let report = divergence_witness(&w, q);
                    if p <= pl || q >= qu.value {
                        assert!(!report.unwrap().verdict.is_convergent(), "{alpha} {p} {q}");
                    } else {
                        assert!(matches!(report, Err(Error::Precondition(_))));
                    }
                }
            }
        }
    }
}

#[test]
fn log_harmonic_partial_sums_keep_growing() {
    let w = WitnessParams::new(0.7, 2.0, WitnessSide::Upper, 10_000).unwrap();
    let qo = q_upper(0.7, 2.0).unwrap().value;
    let r = divergence_witness(&w, qo).unwrap();
    assert!(matches!(r.verdict, SeriesVerdict::Divergent { .. }));
    // partial_sums[i] is the sum through generation i + 2.
    let s = |n: usize| r.partial_sums[n - 2];
    assert!(s(10_000) - s(100) > 0.5);
    assert!((r.terms[98] * 100.0 * 100f64.ln() - 1.0).abs() < 1e-9);
}

#[test]
fn beta_above_the_constraint_is_reported_divergent() {
    let w = params(0.7, 2.0, WitnessSide::Upper)
        .with_beta(beta_default(0.7, 2.0).unwrap() + 0.2)
        .unwrap();
    let r = witness_sobolev_norm(&w);
    assert!(!r.is_convergent());
    match r.gradient.verdict {
        SeriesVerdict::Divergent { factor, .. } => assert!(factor > 1.0),
        v => panic!("{v:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sharp_pair_identities(alpha in 0.4f64..0.95, p in 1.5f64..20.0) {
        let qu = q_upper(alpha, p).unwrap();
        prop_assume!(qu.admissible);
        let w = WitnessParams::new(alpha, p, WitnessSide::Upper, 10).unwrap();
        let r = divergence_witness(&w, qu.value).unwrap();
        prop_assert!((r.factor - 1.0).abs() < 1e-10);
        prop_assert!((w.alpha_p() * qu.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn witness_values_are_bounded_by_the_prefactor(
        x1 in 0.0f64..1.0,
        s in 0.0f64..1.0,
        n in 2u32..10,
    ) {
        for side in [WitnessSide::Upper, WitnessSide::Lower] {
            let w = params(0.6, 3.0, side);
            let x = PlanePoint::new(x1, s * w.slab_top(n));
            let u = match side {
                WitnessSide::Upper => eval_u_plus(&w, x),
                WitnessSide::Lower => eval_u_minus(&w, x),
            };
            let cap = (2..=12).map(|m| w.prefactor(m)).fold(0.0, f64::max);
            prop_assert!((0.0..=cap).contains(&u));
        }
    }
}
