//! Generators shared by the property suites.
#![allow(dead_code)]

use aniso_tv::grid::{Dim, DiscreteMeasure, GridDomain, GridFunction};
use aniso_tv::Integrand;
use proptest::prelude::*;

pub mod agreement;
pub mod props;

/// Every integrand family, plain and mirrored.
pub fn integrand() -> impl Strategy<Value = Integrand> {
    (0..3usize, 0.2f64..4.0, 0.2f64..4.0, any::<bool>()).prop_map(|(k, c1, c2, m)| {
        let phi = match k {
            0 => Integrand::isotropic(),
            1 => Integrand::quadrant(),
            _ => Integrand::weighted_l1(c1, c2).unwrap(),
        };
        if m {
            phi.mirrored()
        } else {
            phi
        }
    })
}

/// Connected mask grown from one cell of an `nx` by `ny` box.
pub fn domain(max_side: usize) -> impl Strategy<Value = GridDomain> {
    (1..=max_side, 1..=max_side, 0.05f64..1.0, prop::collection::vec(any::<u32>(), 0..64)).prop_map(
        |(nx, ny, h, picks)| {
            let mut mask = vec![false; nx * ny];
            let mut grown = vec![0usize];
            mask[0] = true;
            for p in picks {
                let from = grown[p as usize % grown.len()];
                let (x, y) = (from % nx, from / nx);
                let mut nb = vec![];
                if x > 0 {
                    nb.push(from - 1);
                }
                if x + 1 < nx {
                    nb.push(from + 1);
                }
                if y > 0 {
                    nb.push(from - nx);
                }
                if y + 1 < ny {
                    nb.push(from + nx);
                }
                if nb.is_empty() {
                    continue;
                }
                let to = nb[(p >> 8) as usize % nb.len()];
                if !mask[to] {
                    mask[to] = true;
                    grown.push(to);
                }
            }
            GridDomain::from_mask(h, [-0.3, 0.1], nx, ny, &mask, Dim::Two).expect("grown masks are connected")
        },
    )
}

/// Values drawn from a few shared levels, so ties between cells and the
/// datum occur often.
pub fn function(dom: &GridDomain) -> impl Strategy<Value = GridFunction> {
    let (n, m) = (dom.n_cells(), dom.boundary_edges().len());
    (
        prop::collection::vec(-3.0f64..3.0, 1..5),
        prop::collection::vec(any::<u16>(), n),
        prop::collection::vec(any::<u16>(), m),
        prop::collection::vec(-3.0f64..3.0, n),
        any::<bool>(),
    )
        .prop_map(|(levels, cv, dv, free, tied)| {
            let pick = |k: u16| levels[k as usize % levels.len()];
            let values = if tied { cv.into_iter().map(pick).collect() } else { free };
            GridFunction {
                values,
                datum: dv.into_iter().map(pick).collect(),
            }
        })
}

/// Cell density plus atoms with both masses on random interior edges.
pub fn measure(dom: &GridDomain, both: bool) -> impl Strategy<Value = DiscreteMeasure> {
    let (n, e) = (dom.n_cells(), dom.interior_edges().len());
    (
        prop::collection::vec(-2.0f64..2.0, n),
        prop::collection::vec((any::<bool>(), 0.0f64..3.0, 0.0f64..3.0), e),
    )
        .prop_map(move |(rho, atoms)| {
            let mut mu = DiscreteMeasure {
                cell_density: rho,
                atoms: vec![],
                mutually_singular: true,
            };
            for (k, (on, p, m)) in atoms.into_iter().enumerate() {
                if on {
                    if both {
                        mu.add_atom(k, p, m);
                    } else if p > m {
                        mu.add_atom(k, p - m, 0.0);
                    } else {
                        mu.add_atom(k, 0.0, m - p);
                    }
                }
            }
            mu
        })
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}
