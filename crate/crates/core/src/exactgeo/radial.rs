//! `int_A H dx <= P(A)` for radial densities `H = 1/|x|` (equality exactly
//! on centered discs) and its capped variant.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::shape::{split_runs, Loc, Piece, Shape};
use crate::quad;
use crate::vec2::{angle, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialMode {
    /// `H(x) = 1/|x|`.
    OneOverR,
    /// `H = 2` on the unit disc, `1/|x|` outside.
    Capped,
}

impl RadialMode {
    /// `int_0^t H(s) s ds`.
    fn primitive(self, t: f64) -> f64 {
        match self {
            RadialMode::OneOverR => t,
            RadialMode::Capped => {
                if t <= 1.0 {
                    t * t
                } else {
                    t
                }
            }
        }
    }

    pub fn density(self, x: [f64; 2]) -> f64 {
        let r = norm(x);
        match self {
            RadialMode::Capped if r < 1.0 => 2.0,
            _ => 1.0 / r,
        }
    }
}

/// Returns `(int_A H dx, P(A))`, the left side by integrating along rays
/// from the origin.
pub fn radial_density_ic_check(shape: &Shape, mode: RadialMode) -> (f64, f64) {
    if shape.is_empty() {
        return (0.0, 0.0);
    }
    let pieces = shape.pieces();
    let reach = 2.0
        * pieces
            .iter()
            .flat_map(|p| [p.point(0.0), p.point(0.5), p.point(1.0)])
            .map(norm)
            .fold(1.0, f64::max)
        + pieces
            .iter()
            .map(|p| match p {
                Piece::Arc { r, .. } => 2.0 * r,
                _ => 0.0,
            })
            .fold(0.0, f64::max);

    let mut br = vec![0.0, TAU];
    for p in &pieces {
        for s in [0.0, 1.0] {
            let x = p.point(s);
            if norm(x) > 0.0 {
                br.push(angle(x));
            }
        }
        if let Piece::Arc { c, r, .. } = *p {
            let d = norm(c);
            if d > r {
                let a = angle(c);
                let w = (r / d).asin();
                br.push((a + w).rem_euclid(TAU));
                br.push((a - w).rem_euclid(TAU));
            }
        }
    }
    br.sort_by(f64::total_cmp);
    br.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let ray = |th: f64| {
        let ray = Piece::Seg {
            a: [0.0, 0.0],
            b: [reach * th.cos(), reach * th.sin()],
        };
        split_runs(&ray, shape)
            .into_iter()
            .filter(|r| r.2 == Loc::Inside)
            .map(|(s0, s1, _)| mode.primitive(s1 * reach) - mode.primitive(s0 * reach))
            .sum::<f64>()
    };
    let lhs = match quad::integrate_breaks(ray, &br, 1e-11, 20_000) {
        Ok((v, _)) => v,
        Err(e) => e.estimate,
    };
    (lhs, shape.perimeter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn centered_disc_is_tight() {
        for r in [0.3, 1.0, 2.5] {
            let (l, p) = radial_density_ic_check(&Shape::disc([0.0, 0.0], r), RadialMode::OneOverR);
            assert!((l - 2.0 * PI * r).abs() < 1e-9 && (p - 2.0 * PI * r).abs() < 1e-12);
        }
    }

    #[test]
    fn capped_small_disc_is_strict() {
        let (l, p) = radial_density_ic_check(&Shape::disc([0.0, 0.0], 0.5), RadialMode::Capped);
        assert!((l - 2.0 * PI * 0.25).abs() < 1e-9);
        assert!(l < p - 1e-3);
        let (l, p) = radial_density_ic_check(&Shape::disc([0.0, 0.0], 1.5), RadialMode::Capped);
        assert!((l - p).abs() < 1e-9);
    }
}
