//! Perimeters and curve-carried measures on exact shapes.

use std::f64::consts::{FRAC_PI_4, SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use super::shape::{classify_runs, fractal_corners, triangle, Loc, Piece, Shape};
use super::GeoError;
use crate::integrand::Integrand;
use crate::quad;
use crate::vec2::{dist, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Measure-theoretic closure `A+`: inside or on the boundary.
    Closure,
    /// Measure-theoretic interior `A1`: strictly inside.
    Interior,
}

impl Side {
    fn accepts(self, loc: Loc) -> bool {
        match self {
            Side::Closure => loc != Loc::Outside,
            Side::Interior => loc == Loc::Inside,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Support {
    Circle { center: Point, radius: f64 },
    Segment { a: Point, b: Point },
    Polyline { points: Vec<Point> },
    /// A single point; the density is its mass.
    Point { at: Point },
    /// The fractal's limit set, lumped into one atom per level-`level`
    /// triangle.
    Fractal { level: u32 },
}

/// `density * H1` restricted to the support (signed density allowed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveMeasure {
    pub support: Support,
    pub density: f64,
}

/// Length of the fractal limit set.
const FRACTAL_LENGTH: f64 = SQRT_2;

impl CurveMeasure {
    pub fn circle(center: Point, radius: f64, density: f64) -> Self {
        CurveMeasure {
            support: Support::Circle { center, radius },
            density,
        }
    }

    pub fn segment(a: Point, b: Point, density: f64) -> Self {
        CurveMeasure {
            support: Support::Segment { a, b },
            density,
        }
    }

    pub fn point(at: Point, mass: f64) -> Self {
        CurveMeasure {
            support: Support::Point { at },
            density: mass,
        }
    }

    /// `2 sqrt(2) H1` on the fractal limit set, total mass 4.
    pub fn fractal(level: u32) -> Self {
        CurveMeasure {
            support: Support::Fractal { level },
            density: 2.0 * SQRT_2,
        }
    }

    pub fn support_length(&self) -> f64 {
        match &self.support {
            Support::Circle { radius, .. } => TAU * radius,
            Support::Segment { a, b } => dist(*a, *b),
            Support::Polyline { points } => points.windows(2).map(|w| dist(w[0], w[1])).sum(),
            Support::Point { .. } => 0.0,
            Support::Fractal { .. } => FRACTAL_LENGTH,
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self.support {
            Support::Point { .. } => self.density,
            _ => self.density * self.support_length(),
        }
    }

    fn pieces(&self) -> Vec<Piece> {
        match &self.support {
            Support::Circle { center, radius } => vec![Piece::Arc {
                c: *center,
                r: *radius,
                t0: 0.0,
                t1: TAU,
            }],
            Support::Segment { a, b } => vec![Piece::Seg { a: *a, b: *b }],
            Support::Polyline { points } => points
                .windows(2)
                .map(|w| Piece::Seg { a: w[0], b: w[1] })
                .collect(),
            _ => vec![],
        }
    }
}

/// Mass of `m` carried by the closure or interior of `shape`.
pub fn measure_of(m: &CurveMeasure, shape: &Shape, side: Side) -> Result<f64, GeoError> {
    match &m.support {
        Support::Point { at } => Ok(if side.accepts(shape.locate(*at)) { m.density } else { 0.0 }),
        Support::Fractal { level } => {
            let leg = 3f64.powi(-(*level as i32));
            let lump = m.total_mass() / 3f64.powi(*level as i32);
            let mut n = 0usize;
            for c in fractal_corners(*level) {
                let t = triangle(c, leg);
                if t.iter().any(|&v| shape.locate(v) == Loc::Outside) {
                    continue;
                }
                let centroid = [c[0] + leg / 3.0, c[1] + leg / 3.0];
                if side.accepts(shape.locate(centroid)) {
                    n += 1;
                }
            }
            Ok(n as f64 * lump)
        }
        _ => {
            let mut len = 0.0;
            for p in m.pieces() {
                let l = p.length();
                for (s0, s1, loc) in classify_runs(&p, shape)? {
                    if side.accepts(loc) {
                        len += (s1 - s0) * l;
                    }
                }
            }
            Ok(m.density * len)
        }
    }
}

/// True when lump membership for a fractal support is only an
/// approximation of the limit measure (anything but `Delta_j`, `j <= level`).
pub fn approximate_membership(m: &CurveMeasure, shape: &Shape) -> bool {
    match (&m.support, shape) {
        (Support::Fractal { level }, Shape::Fractal { level: j }) => j > level,
        (Support::Fractal { .. }, _) => !shape.is_empty(),
        _ => false,
    }
}

fn piece_integral(phi: &Integrand, p: &Piece, s0: f64, s1: f64) -> f64 {
    match *p {
        Piece::Seg { .. } if phi.is_x_independent() => phi.eval([0.0, 0.0], p.inward_normal(0.5)) * p.length() * (s1 - s0),
        Piece::Seg { .. } => {
            let l = p.length();
            let f = |s: f64| phi.eval(p.point(s), p.inward_normal(s)) * l;
            match quad::integrate(f, s0, s1, 1e-11, 4096) {
                Ok((v, _)) => v,
                Err(e) => e.estimate,
            }
        }
        Piece::Arc { r, t0, t1, .. } => {
            // kinks of the built-in integrands sit at multiples of pi/4
            let span = t1 - t0;
            let mut br = vec![s0, s1];
            let (a, b) = (t0 + s0 * span, t0 + s1 * span);
            let (lo, hi) = (a.min(b), a.max(b));
            let mut k = (lo / FRAC_PI_4).ceil() as i64;
            while (k as f64) * FRAC_PI_4 < hi {
                br.push(((k as f64) * FRAC_PI_4 - t0) / span);
                k += 1;
            }
            br.sort_by(f64::total_cmp);
            let jac = r * span.abs();
            let f = |s: f64| phi.eval(p.point(s), p.inward_normal(s)) * jac;
            match quad::integrate_breaks(f, &br, 1e-11, 8192) {
                Ok((v, _)) => v,
                Err(e) => e.estimate,
            }
        }
    }
}

/// `P_phi(A) = sum over boundary pieces of int phi(x, nu_inward) dH1`.
pub fn aniso_perimeter(shape: &Shape, phi: &Integrand) -> f64 {
    shape.pieces().iter().map(|p| piece_integral(phi, p, 0.0, 1.0)).sum()
}

/// `P_phi(A, R+)` or `P_phi(A, R1)`: the part of the perimeter of `a` lying
/// in the closure or interior of `region`.
pub fn perimeter_within(a: &Shape, region: &Shape, side: Side, phi: &Integrand) -> Result<f64, GeoError> {
    let mut total = 0.0;
    for p in a.pieces() {
        for (s0, s1, loc) in classify_runs(&p, region)? {
            if side.accepts(loc) {
                total += piece_integral(phi, &p, s0, s1);
            }
        }
    }
    Ok(total)
}

/// `mu(A+) - nu(A1) - C P_phi(A)`; positive values witness a violation.
pub fn ic_score(
    mu: &[CurveMeasure],
    nu: &[CurveMeasure],
    shape: &Shape,
    phi: &Integrand,
    c: f64,
) -> Result<f64, GeoError> {
    let mut s = 0.0;
    for m in mu {
        s += measure_of(m, shape, Side::Closure)?;
    }
    for m in nu {
        s -= measure_of(m, shape, Side::Interior)?;
    }
    Ok(s - c * aniso_perimeter(shape, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn triangle_perimeters() {
        let d = Shape::unit_triangle();
        let q = Integrand::quadrant();
        assert!((aniso_perimeter(&d, &q) - 4.0).abs() < 1e-12);
        assert!((aniso_perimeter(&d, &q.mirrored()) - (2.0 + SQRT_2)).abs() < 1e-12);
        let disc = Shape::disc([0.0, 0.0], 2.0);
        assert!((aniso_perimeter(&disc, &Integrand::isotropic()) - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn quadrant_disc_perimeter() {
        // lower half of the circle costs |n1| + |n2| instead of 1
        let disc = Shape::disc([0.3, -0.2], 1.0);
        let want = PI + 4.0;
        assert!((aniso_perimeter(&disc, &Integrand::quadrant()) - want).abs() < 1e-10);
    }

    #[test]
    fn circle_on_boundary() {
        let m = CurveMeasure::circle([0.0, 0.0], 2.0, 1.5);
        let s = Shape::disc([0.0, 0.0], 2.0);
        assert!((measure_of(&m, &s, Side::Closure).unwrap() - 6.0 * PI).abs() < 1e-12);
        assert_eq!(measure_of(&m, &s, Side::Interior).unwrap(), 0.0);
        // a half-plane-like square cuts the circle in half
        let sq = Shape::rect(0.0, -5.0, 5.0, 5.0);
        assert!((measure_of(&m, &sq, Side::Interior).unwrap() - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn fractal_lumps() {
        let m = CurveMeasure::fractal(6);
        assert!((m.total_mass() - 4.0).abs() < 1e-12);
        for k in 0..=6 {
            let s = Shape::Fractal { level: k };
            assert!((measure_of(&m, &s, Side::Closure).unwrap() - 4.0).abs() < 1e-9);
            assert!(!approximate_membership(&m, &s));
        }
        assert!(approximate_membership(&m, &Shape::Fractal { level: 7 }));
    }

    #[test]
    fn near_miss_is_ambiguous() {
        let m = CurveMeasure::segment([0.0, 1e-10], [1.0, 1e-10], 1.0);
        let s = Shape::rect(0.2, 0.0, 0.8, 1.0);
        assert!(matches!(
            measure_of(&m, &s, Side::Closure),
            Err(GeoError::AmbiguousIncidence { .. })
        ));
    }
}
