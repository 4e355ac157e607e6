use aniso_tv::grid::{phi_avg, DiscreteMeasure, GridDomain, GridFunction};
use aniso_tv::solve::{minimize_phi, minimize_phi_hat, oracle_minimize, Method, SolveConfig, SolveError};
use aniso_tv::Integrand;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> (GridDomain, DiscreteMeasure, GridFunction, Integrand) {
    let d = GridDomain::rect(nx, ny, 1.0 / nx as f64, [0.0, 0.0]);
    let mut mu = DiscreteMeasure::zero(&d);
    for e in 0..d.interior_edges().len() {
        if rng.random_bool(0.2) {
            mu.add_atom(e, rng.random_range(0.0..0.3), rng.random_range(0.0..0.3));
        }
    }
    for k in 0..d.n_cells() {
        mu.cell_density[k] = rng.random_range(-2.0..2.0);
    }
    let datum: Vec<f64> = (0..d.boundary_edges().len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let u0 = GridFunction::new(&d, vec![0.0; d.n_cells()], datum).unwrap();
    let phi = match rng.random_range(0..3) {
        0 => Integrand::isotropic(),
        1 => Integrand::quadrant(),
        _ => Integrand::weighted_l1(1.0, 2.5).unwrap(),
    };
    (d, mu, u0, phi)
}

#[test]
fn level_cut_matches_pdhg() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pdhg = SolveConfig {
        tol_primal_dual: 1e-8,
        ..Default::default()
    };
    let cut = SolveConfig {
        method: Method::LevelCut,
        ..Default::default()
    };
    let mut done = 0;
    while done < 30 {
        let (nx, ny) = (rng.random_range(2..=9), rng.random_range(2..=9));
        let (d, mu, u0, phi) = random_instance(&mut rng, nx, ny);
        let a = minimize_phi(&d, &phi, &mu, &u0, &pdhg);
        let b = minimize_phi(&d, &phi, &mu, &u0, &cut);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                let tol = 1e-6 * (1.0 + a.value.abs());
                assert!((a.value - b.value).abs() <= tol, "pdhg {} cut {}", a.value, b.value);
                // the cut minimizer takes datum values only
                assert!(b.minimizer.values.iter().all(|v| u0.datum.contains(v)));
                assert_eq!(b.value, phi_avg(&b.minimizer, &d, &phi, &mu));
                done += 1;
            }
            (Err(SolveError::UnboundedDetected { .. }), Err(SolveError::UnboundedDetected { .. })) => {}
            (a, b) => panic!("methods disagree on boundedness: {a:?} / {b:?}"),
        }
    }
}

#[test]
fn level_cut_matches_oracle_exactly() {
    // with every datum value in the grid the oracle is exact
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cut = SolveConfig {
        method: Method::LevelCut,
        ..Default::default()
    };
    let mut done = 0;
    while done < 40 {
        let (nx, ny) = (rng.random_range(1..=3), rng.random_range(2..=3));
        let (d, mu, u0, phi) = random_instance(&mut rng, nx, ny);
        let mut set = u0.datum.clone();
        set.sort_by(f64::total_cmp);
        set.dedup();
        let o = match oracle_minimize(&d, &phi, &mu, &u0, &set) {
            Ok(o) => o,
            Err(_) => continue,
        };
        match minimize_phi(&d, &phi, &mu, &u0, &cut) {
            Ok(r) => {
                assert!((r.value - o.phi_value).abs() <= 1e-12 * (1.0 + o.phi_value.abs()), "{} vs {}", r.value, o.phi_value);
                done += 1;
            }
            Err(SolveError::UnboundedDetected { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn level_cut_drives_dc_rounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let cut = SolveConfig {
        method: Method::LevelCut,
        ..Default::default()
    };
    let mut done = 0;
    while done < 20 {
        let nx = rng.random_range(2..=3);
        let (d, mu, u0, phi) = random_instance(&mut rng, nx, 2);
        let mut set = u0.datum.clone();
        set.sort_by(f64::total_cmp);
        set.dedup();
        let Ok(o) = oracle_minimize(&d, &phi, &mu, &u0, &set) else { continue };
        match minimize_phi_hat(&d, &phi, &mu, &u0, &cut) {
            Ok(r) => {
                assert!(r.monotone);
                assert!(r.value <= o.phi_hat_value + 1e-9 * (1.0 + o.phi_hat_value.abs()), "dc {} oracle {}", r.value, o.phi_hat_value);
                done += 1;
            }
            Err(SolveError::UnboundedDetected { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    }
}
