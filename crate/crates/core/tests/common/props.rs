//! Property bodies shared by the suites and the acceptance run.

use aniso_tv::grid::{
    coarea_tv, measure_pairing, set_perimeter, truncate, tv_phi, DiscreteMeasure, GridDomain, GridFunction,
    Representative,
};
use aniso_tv::vec2::dot;
use aniso_tv::Integrand;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::{close, domain, function, measure};

pub type Outcome = Result<(), TestCaseError>;

pub fn vec2(r: f64) -> impl Strategy<Value = [f64; 2]> {
    (-r..r, -r..r).prop_map(|(a, b)| [a, b])
}

pub fn with_function(max_side: usize) -> impl Strategy<Value = (GridDomain, GridFunction)> {
    domain(max_side).prop_flat_map(|d| {
        let f = function(&d);
        (Just(d), f)
    })
}

pub fn with_measure(max_side: usize, both: bool) -> impl Strategy<Value = (GridDomain, GridFunction, DiscreteMeasure)> {
    domain(max_side).prop_flat_map(move |d| {
        let (f, m) = (function(&d), measure(&d, both));
        (Just(d), f, m)
    })
}

fn positive_part(w: &GridFunction) -> GridFunction {
    w.map(|v| v.max(0.0))
}

fn negative_part(w: &GridFunction) -> GridFunction {
    w.map(|v| (-v).max(0.0))
}

pub fn coarea(d: &GridDomain, w: &GridFunction, phi: &Integrand) -> Outcome {
    let (a, b) = (coarea_tv(w, d, phi), tv_phi(w, d, phi));
    prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-300) || a == b, "coarea {a} edges {b}");
    Ok(())
}

pub fn sign_split(d: &GridDomain, w: &GridFunction, phi: &Integrand) -> Outcome {
    let lhs = tv_phi(w, d, phi);
    let rhs = tv_phi(&positive_part(w), d, phi) + tv_phi(&negative_part(w), d, &phi.mirrored());
    prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    Ok(())
}

pub fn truncation(d: &GridDomain, w: &GridFunction, phi: &Integrand, m: f64) -> Outcome {
    let t = truncate(w, m);
    let rest = GridFunction {
        values: w.values.iter().zip(&t.values).map(|(a, b)| a - b).collect(),
        datum: w.datum.iter().zip(&t.datum).map(|(a, b)| a - b).collect(),
    };
    let lhs = tv_phi(w, d, phi);
    let rhs = tv_phi(&t, d, phi) + tv_phi(&rest, d, phi);
    prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    // u+ = (u - u^M)+ + (u^M)+
    for (k, &u) in w.values.iter().enumerate() {
        prop_assert!((u.max(0.0) - (rest.values[k].max(0.0) + t.values[k].max(0.0))).abs() <= 1e-15 * (1.0 + u.abs()));
    }
    Ok(())
}

pub fn pairing_split(d: &GridDomain, w: &GridFunction, mu: &DiscreteMeasure) -> Outcome {
    let lhs = measure_pairing(w, mu, d, Representative::LowerVsUpper);
    let rhs = measure_pairing(&positive_part(w), mu, d, Representative::LowerVsUpper)
        - measure_pairing(&negative_part(w), mu, d, Representative::UpperVsLower);
    prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    Ok(())
}

pub fn representatives_ordered(d: &GridDomain, w: &GridFunction, mu: &DiscreteMeasure) -> Outcome {
    let lo = measure_pairing(w, mu, d, Representative::LowerVsUpper);
    let avg = measure_pairing(w, mu, d, Representative::Average);
    let hi = measure_pairing(w, mu, d, Representative::UpperVsLower);
    let tol = 1e-12 * (1.0 + lo.abs() + hi.abs());
    prop_assert!(lo <= avg + tol && avg <= hi + tol, "{lo} {avg} {hi}");
    Ok(())
}

pub fn polar_duality(phi: &Integrand, x: [f64; 2], xi: [f64; 2], xs: [f64; 2]) -> Outcome {
    let p = phi.polar(x, xs).unwrap();
    prop_assert!(dot(xs, xi) <= p * phi.eval(x, xi) + 1e-9);
    Ok(())
}

pub fn poincare(d: &GridDomain, w: &GridFunction, phi: &Integrand) -> Outcome {
    let w = GridFunction { values: w.values.clone(), datum: vec![0.0; d.boundary_edges().len()] };
    let mass: f64 = w.values.iter().map(|v| d.cell_volume() * v.abs()).sum();
    let bound = d.circumradius() / 2.0 * tv_phi(&w, d, phi) / phi.alpha();
    prop_assert!(mass <= bound * (1.0 + 1e-12) + 1e-15, "{mass} > {bound}");
    Ok(())
}

pub fn isoperimetry(d: &GridDomain, bits: &[bool]) -> Outcome {
    let inside: Vec<bool> = (0..d.n_cells()).map(|k| bits[k]).collect();
    let area = inside.iter().filter(|&&b| b).count() as f64 * d.cell_volume();
    let per = set_perimeter(d, &Integrand::isotropic(), &inside);
    prop_assert!(2.0 * (std::f64::consts::PI * area).sqrt() <= per * (1.0 + 1e-12), "area {area} perimeter {per}");
    Ok(())
}

pub fn comparability(d: &GridDomain, w: &GridFunction, phi: &Integrand) -> Outcome {
    let iso = tv_phi(w, d, &Integrand::isotropic());
    let t = tv_phi(w, d, phi);
    let tol = 1e-12 * (1.0 + iso);
    prop_assert!(
        phi.alpha() * iso <= t + tol && t <= phi.beta() * iso + tol,
        "{} {} {}",
        phi.alpha() * iso,
        t,
        phi.beta() * iso
    );
    Ok(())
}
