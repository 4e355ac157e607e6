//! Randomized comparisons against the exhaustive references.

use aniso_tv::grid::{DiscreteMeasure, GridDomain, GridFunction};
use aniso_tv::icheck::{brute_force_ic, dual_ic, Direction, DualConfig, IcQuery, SearchMode, Verdict};
use aniso_tv::solve::{minimize_phi, minimize_phi_hat, oracle_minimize, value_grid, SolveConfig, SolveError};
use aniso_tv::Integrand;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Default)]
pub struct Tally {
    pub instances: usize,
    /// Instances skipped because a solver reported unboundedness.
    pub unbounded: usize,
    pub decided: usize,
    pub failures: Vec<String>,
}

/// `n` random instances on boxes up to 3 by 3 with datum in {0, 1/2, 1}.
pub fn solvers_against_oracle(seed: u64, n: usize) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = SolveConfig::default();
    let mut t = Tally::default();
    while t.instances < n {
        let (nx, ny) = (rng.random_range(1..=3), rng.random_range(2..=3));
        let d = GridDomain::rect(nx, ny, 1.0, [0.0, 0.0]);
        let mut mu = DiscreteMeasure::zero(&d);
        for e in 0..d.interior_edges().len() {
            if rng.random_bool(0.5) {
                mu.add_atom(e, rng.random_range(0.0..1.5), rng.random_range(0.0..1.5));
            }
        }
        for k in 0..d.n_cells() {
            mu.cell_density[k] = rng.random_range(-0.5..0.5);
        }
        let vals = [0.0, 0.5, 1.0];
        let datum: Vec<f64> = (0..d.boundary_edges().len()).map(|_| vals[rng.random_range(0..3)]).collect();
        let u0 = GridFunction::new(&d, vec![0.0; d.n_cells()], datum).unwrap();
        let phi = if rng.random_bool(0.5) { Integrand::isotropic() } else { Integrand::quadrant() };
        let (a, b) = match (minimize_phi(&d, &phi, &mu, &u0, &cfg), minimize_phi_hat(&d, &phi, &mu, &u0, &cfg)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(SolveError::UnboundedDetected { .. }), _) | (_, Err(SolveError::UnboundedDetected { .. })) => {
                t.unbounded += 1;
                continue;
            }
            (Err(e), _) | (_, Err(e)) => {
                t.failures.push(format!("solver error: {e}"));
                t.instances += 1;
                continue;
            }
        };
        let o = oracle_minimize(&d, &phi, &mu, &u0, &value_grid(&u0, 1.0 / 32.0))
            .unwrap_or_else(|_| oracle_minimize(&d, &phi, &mu, &u0, &value_grid(&u0, 0.25)).unwrap());
        let band = o.error_band + 1e-5 * (1.0 + o.phi_value.abs());
        if (a.value - o.phi_value).abs() > band {
            t.failures.push(format!("phi {} vs oracle {} (band {band})", a.value, o.phi_value));
        }
        if b.value > o.phi_hat_value + band {
            t.failures.push(format!("dc {} vs oracle {} rounds {:?}", b.value, o.phi_hat_value, b.rounds));
        }
        t.instances += 1;
        t.decided += 1;
    }
    t
}

pub fn random_ic_instance(rng: &mut ChaCha8Rng) -> (GridDomain, DiscreteMeasure, Integrand) {
    let d = GridDomain::rect(4, 4, 1.0, [0.0, 0.0]);
    let mut mu = DiscreteMeasure::zero(&d);
    let m = d.interior_edges().len();
    let k = rng.random_range(1..=5);
    let mut used = vec![];
    while used.len() < k {
        let e = rng.random_range(0..m);
        if used.contains(&e) {
            continue;
        }
        used.push(e);
        let (p, q) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
        mu.add_atom(e, p, q);
    }
    let phi = match rng.random_range(0..3) {
        0 => Integrand::isotropic(),
        1 => Integrand::quadrant(),
        _ => Integrand::weighted_l1(1.0, 2.0).unwrap(),
    };
    (d, mu, phi)
}

/// `n` random 4 by 4 instances, each tested at C in {1/2, 1, 2}. The dual
/// side abstains when its bracket straddles C.
pub fn brute_against_dual(seed: u64, n: usize) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    for inst in 0..n {
        let (d, mu, phi) = random_ic_instance(&mut rng);
        for c in [0.5, 1.0, 2.0] {
            let q = IcQuery::new(mu.clone(), phi.clone(), c);
            let f = brute_force_ic(&q, &d, SearchMode::Exhaustive).unwrap();
            let m = brute_force_ic(&q.clone().direction(Direction::Mirrored), &d, SearchMode::Exhaustive).unwrap();
            let brute = if f.verdict == Verdict::Violated || m.verdict == Verdict::Violated {
                Verdict::Violated
            } else {
                Verdict::Holds
            };
            let dual = dual_ic(&q, &d, &DualConfig::default()).unwrap();
            if dual.verdict != Verdict::Inconclusive {
                t.decided += 1;
                if brute != dual.verdict {
                    t.failures.push(format!("instance {inst} C={c}: dual {:?} brute {brute:?}", dual.verdict));
                }
            }
        }
        t.instances += 1;
    }
    t
}
