mod common;

use aniso_tv::grid::{DiscreteMeasure, GridDomain};
use aniso_tv::icheck::{brute_force_ic, dual_norm, Direction, DualConfig, IcQuery, SearchMode, Verdict};
use common::{domain, integrand, measure};
use proptest::prelude::*;

fn instance(max_side: usize, both: bool) -> impl Strategy<Value = (GridDomain, DiscreteMeasure)> {
    domain(max_side).prop_flat_map(move |d| {
        let m = measure(&d, both);
        (Just(d), m)
    })
}

fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Forward), Just(Direction::Mirrored)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn verdict_is_monotone_in_the_constant(
        (d, mu) in instance(3, false), phi in integrand(), dir in direction(), c in 0.0f64..3.0, dc in 0.0f64..2.0,
    ) {
        let q = IcQuery::new(mu, phi, c).direction(dir);
        let a = brute_force_ic(&q, &d, SearchMode::Exhaustive).unwrap();
        let b = brute_force_ic(&IcQuery { c: c + dc, ..q }, &d, SearchMode::Exhaustive).unwrap();
        prop_assert!(b.worst_score <= a.worst_score + 1e-12);
        if a.verdict == Verdict::Holds {
            prop_assert_eq!(b.verdict, Verdict::Holds);
        }
    }

    #[test]
    fn exhaustive_score_scales((d, mu) in instance(3, false), phi in integrand(), c in 0.0f64..3.0, t in 0.0f64..5.0) {
        let q = IcQuery::new(mu.clone(), phi.clone(), c);
        let a = brute_force_ic(&q, &d, SearchMode::Exhaustive).unwrap();
        let b = brute_force_ic(&IcQuery::new(mu.scaled(t), phi, t * c), &d, SearchMode::Exhaustive).unwrap();
        prop_assert!((b.worst_score - t * a.worst_score).abs() <= 1e-9 * (1.0 + t * a.worst_score));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dual_norm_scales((d, mu) in instance(3, true), phi in integrand(), t in 0.0f64..5.0) {
        let cfg = DualConfig::default();
        let a = dual_norm(&d, &phi, &mu, &cfg).unwrap();
        let b = dual_norm(&d, &phi, &mu.scaled(t), &cfg).unwrap();
        // certified brackets of tC* and of the scaled problem overlap
        let slack = 1e-9 * (1.0 + t * a.upper);
        prop_assert!(b.lower <= t * a.upper + slack && t * a.lower <= b.upper + slack,
            "t={t}: [{}, {}] vs t*[{}, {}]", b.lower, b.upper, a.lower, a.upper);
        let rel = cfg.tol * 4.0;
        prop_assert!(!(a.converged && b.converged) || (b.value - t * a.value).abs() <= rel * (1.0 + t * a.value),
            "{} vs {}: [{}, {}] {} / [{}, {}] {}", b.value, t * a.value, a.lower, a.upper, a.converged, b.lower, b.upper, b.converged);
    }
}
