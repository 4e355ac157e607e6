mod common;

use aniso_tv::grid::{phi_avg, DiscreteMeasure, GridDomain, GridFunction};
use aniso_tv::icheck::{dual_norm, DualConfig};
use aniso_tv::solve::{minimize_phi, minimize_phi_hat, Method, SolveConfig, SolveError};
use common::{domain, function, integrand, measure};
use proptest::prelude::*;

fn instance(max_side: usize, both: bool) -> impl Strategy<Value = (GridDomain, GridFunction, DiscreteMeasure)> {
    domain(max_side).prop_flat_map(move |d| {
        let (f, m) = (function(&d), measure(&d, both));
        (Just(d), f, m)
    })
}

fn exact() -> SolveConfig {
    SolveConfig {
        method: Method::LevelCut,
        ..Default::default()
    }
}

/// Keeps only a few atoms so every majorant pattern stays cheap.
fn thin(mut mu: DiscreteMeasure, keep: usize) -> DiscreteMeasure {
    mu.atoms.truncate(keep);
    mu
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn optimal_value_is_one_homogeneous((d, u0, mu) in instance(4, false), phi in integrand(), t in 0.01f64..5.0) {
        let a = minimize_phi(&d, &phi, &mu, &u0, &exact());
        let b = minimize_phi(&d, &phi, &mu, &u0.map(|v| t * v), &exact());
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert!((b.value - t * a.value).abs() <= 1e-9 * (1.0 + t * a.value.abs()), "{} vs {}", b.value, t * a.value);
                // the rescaled minimizer is optimal for the scaled datum
                let w = a.minimizer.map(|v| t * v);
                let v = phi_avg(&w, &d, &phi, &mu);
                prop_assert!((v - b.value).abs() <= 1e-9 * (1.0 + v.abs()));
            }
            (Err(SolveError::UnboundedDetected { .. }), Err(SolveError::UnboundedDetected { .. })) => {}
            (a, b) => prop_assert!(false, "boundedness changed under scaling: {a:?} / {b:?}"),
        }
    }

    #[test]
    fn dc_rounds_never_increase((d, u0, mu) in instance(3, true), phi in integrand(), keep in 0usize..5) {
        let mu = thin(mu, keep);
        match minimize_phi_hat(&d, &phi, &mu, &u0, &exact()) {
            Ok(r) => {
                prop_assert!(r.monotone);
                for w in r.rounds.windows(2) {
                    prop_assert!(w[1] <= w[0], "{:?}", r.rounds);
                }
                prop_assert!(r.value <= r.rounds[0]);
            }
            Err(SolveError::UnboundedDetected { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn relaxed_minimum_below_averaged_minimum((d, u0, mu) in instance(3, true), phi in integrand(), keep in 0usize..5) {
        let mu = thin(mu, keep);
        let a = minimize_phi(&d, &phi, &mu, &u0, &exact());
        let b = minimize_phi_hat(&d, &phi, &mu, &u0, &exact());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(b.value <= a.value + 1e-9 * (1.0 + a.value.abs()), "{} > {}", b.value, a.value);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn minimizers_stay_bounded_under_the_condition((d, u0, mu) in instance(3, false), phi in integrand()) {
        let dn = dual_norm(&d, &phi, &mu, &DualConfig::default()).unwrap();
        prop_assume!(dn.upper < 1.0);
        let cfg = SolveConfig { tol_primal_dual: 1e-7, ..Default::default() };
        let r = match minimize_phi(&d, &phi, &mu, &u0, &cfg) {
            Ok(r) => r,
            Err(SolveError::NotConverged { report, .. }) => *report,
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let u_max = u0.datum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mass = mu.total_variation(&d);
        let bound = u_max + (mass + 1.0) / (phi.alpha() * (1.0 - dn.upper));
        prop_assert!(r.minimizer.sup_norm() <= bound, "{} > {bound}", r.minimizer.sup_norm());
    }
}
