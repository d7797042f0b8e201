//! The five self-check suites pass end to end at the default seed, and
//! their reports are byte-stable across reruns.

use posetball::rng::DEFAULT_SEED;
use posetball::verification::{run_suite, VerifySuite};

#[test]
fn all_suites_pass_at_the_default_seed() {
    for suite in VerifySuite::all() {
        let report = run_suite(suite, DEFAULT_SEED, 20_000).unwrap();
        let failing: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        assert!(report.passed, "suite {} failed checks: {failing:?}", suite.name());
    }
}

#[test]
fn reports_are_byte_identical_across_reruns() {
    for suite in [VerifySuite::Volume, VerifySuite::Mechanism] {
        let a = serde_json::to_string(&run_suite(suite, 7, 5_000).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(suite, 7, 5_000).unwrap()).unwrap();
        assert_eq!(a, b, "suite {}", suite.name());
    }
}
