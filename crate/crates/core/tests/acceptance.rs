//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release -p rgc-core --test acceptance -- --nocapture`.

use rgc_core::cache::Cache;
use rgc_core::linalg::{is_prime, PRIMES};
use rgc_core::report::{determinism, evaluate, run_suite_with_jobs, SuiteConfig};

/// Thread counts of the cold and warm runs compared by criterion 10.
const JOBS: (usize, usize) = (1, 2);

/// Rank certification uses two primes above this bound. All other comparisons
/// (dimensions, ranks, degree offsets, payload bytes) are exact.
const PRIME_FLOOR: u64 = 1_000_000;

/// Criteria known to fail, with the reason hard-coded so a change in
/// behavior is caught in either direction. Criterion 9 asks for no GC2
/// classes at loop order <= 2, but the polygon with k edges is a nonzero
/// class whenever k = 1 (mod 4), so the 5-gon and 9-gon survive at loop
/// order 1.
const KNOWN_RED: &[u32] = &[9];

#[test]
fn acceptance() {
    assert!(PRIMES.iter().all(|&p| p > PRIME_FLOOR && is_prime(p)));
    assert_ne!(PRIMES[0], PRIMES[1]);

    let dir = tempfile::tempdir().unwrap();
    let config = SuiteConfig::acceptance();
    let cold = run_suite_with_jobs(&config, Cache::at(dir.path()), JOBS.0).expect("cold run");
    let warm = run_suite_with_jobs(&config, Cache::at(dir.path()), JOBS.1).expect("warm run");

    let mut results = evaluate(&cold);
    results.push(determinism(&cold, &warm, JOBS));
    println!();
    for r in &results {
        println!("{}", r.line());
    }
    // odd-d slices next to their even-d counterparts; informational only
    for odd in &cold.cross_parity {
        let even = [&cold.loop_sector, &cold.mw_genus0]
            .into_iter()
            .find(|t| t.table.spec.kind == odd.table.spec.kind && t.table.spec.sector == odd.table.spec.sector);
        let h = |t: &rgc_core::complex::CohomologyTable| t.certified().map(|r| (r.edges, r.h)).collect::<Vec<_>>();
        println!(
            "INFO cross-parity {} {}: (E, h) d=1 {:?} vs d=0 {:?}",
            format!("{:?}", odd.table.spec.kind).to_lowercase(),
            format!("{:?}", odd.table.spec.sector).to_lowercase(),
            h(&odd.table),
            even.map(|t| h(&t.table)).unwrap_or_default()
        );
    }

    for r in &results {
        if KNOWN_RED.contains(&r.id) {
            assert!(!r.pass, "criterion {} now passes; update KNOWN_RED", r.id);
        } else {
            assert!(r.pass, "{}", r.line());
        }
    }

    // The red criterion 9 is red only because of the loop order 1 polygons;
    // loop orders 2 and 3 behave as required.
    let mut classes = Vec::new();
    for t in &cold.gc {
        for r in t.certified().filter(|r| r.h > 0) {
            classes.push((t.spec.loop_order, r.edges, r.h));
        }
    }
    let polygons: Vec<_> = classes.iter().filter(|c| c.0 == 1).collect();
    let rest: Vec<_> = classes.iter().filter(|c| c.0 != 1).collect();
    assert!(polygons.iter().all(|&&(_, e, h)| e % 4 == 1 && h == 1), "{polygons:?}");
    assert_eq!(polygons.len(), 2, "{polygons:?}");
    assert_eq!(rest, vec![&(3, 6, 1)]);
}
