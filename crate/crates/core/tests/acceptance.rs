//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line with its metrics and wall time.

use std::time::{Duration, Instant};

use cantor_cusp::verify::{run_check, CheckResult, VerifyConfig};

fn run(id: u32, budget: Option<Duration>) -> CheckResult {
    let start = Instant::now();
    let result = run_check(id, &VerifyConfig::default()).expect("check runs");
    let elapsed = start.elapsed();
    let in_budget = budget.is_none_or(|b| elapsed < b);
    let ok = result.passed && in_budget;
    println!(
        "[{}] criterion {id} {}: {} ({:.3} s{})",
        if ok { "PASS" } else { "FAIL" },
        result.name,
        result.detail,
        elapsed.as_secs_f64(),
        budget.map_or(String::new(), |b| format!(", budget {} s", b.as_secs())),
    );
    assert!(result.passed, "criterion {id} failed: {}", result.detail);
    assert!(in_budget, "criterion {id} took {elapsed:?}");
    result
}

#[test]
fn criterion_1_geometry_exactness() {
    run(1, Some(Duration::from_secs(1)));
}

#[test]
fn criterion_2_reflection_involution() {
    run(2, Some(Duration::from_secs(5)));
}

#[test]
fn criterion_3_differential_jacobian() {
    run(3, None);
}

#[test]
fn criterion_4_threshold_equivalence() {
    run(4, Some(Duration::from_secs(10)));
}

#[test]
fn criterion_5_singular_integral_oracle() {
    run(5, None);
}

#[test]
fn criterion_6_sharp_pair_identities() {
    run(6, None);
}

#[test]
fn criterion_7_witness_norms() {
    run(7, None);
}

#[test]
fn criterion_8_grid_extension_stability() {
    run(8, Some(Duration::from_secs(300)));
}

#[test]
fn criterion_9_determinism() {
    run(9, None);
}
