//! Divergence-field certificates: a bounded field `sigma` with
//! `div sigma = mu_plus - mu_minus` and `phi°(x, sigma) <= C` proves the
//! isoperimetric condition with constant `C`.

use std::f64::consts::{SQRT_2, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::measure::{measure_of, CurveMeasure, Side};
use super::shape::{fractal_corners, ifs_inverse, ifs_map, triangle, Piece, Shape};
use super::GeoError;
use crate::integrand::Integrand;
use crate::quad;
use crate::vec2::{dot, norm, scale, sub, Point, Vec2};

/// `coef * (x - center) / |x - center|^2` on `r_lo < |x - center| < r_hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ring {
    pub r_lo: f64,
    pub r_hi: Option<f64>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Field {
    Zero,
    /// Piecewise radial field, zero outside the listed rings.
    Radial { center: Point, rings: Vec<Ring> },
    /// `alpha_i x/|x|^2` on `1/(i-1)^2 > |x| > 1/i^2`, with
    /// `alpha_i = sum_{j >= i} (-1)^(j-1)/j^2`.
    AlternatingRadial,
    /// The fractal field at the given level (level 0 vanishes on the unit
    /// triangle).
    Fractal { level: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateField {
    pub field: Field,
    pub bound_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub fluxes: Vec<f64>,
    pub targets: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub sup_polar: f64,
    pub bound_c: f64,
    pub polar_samples: usize,
    pub pass: bool,
}

const ALPHA_TABLE: usize = 20_000;

fn alpha_table() -> &'static [f64] {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let mut a = vec![0.0; ALPHA_TABLE + 2];
        a[ALPHA_TABLE + 1] = alpha_tail(ALPHA_TABLE + 1);
        for i in (1..=ALPHA_TABLE).rev() {
            let s = if i % 2 == 1 { 1.0 } else { -1.0 };
            a[i] = s / (i * i) as f64 + a[i + 1];
        }
        a
    })
}

/// Boole summation of the alternating tail; accurate for large `i`.
fn alpha_tail(i: usize) -> f64 {
    let x = i as f64;
    let s = if i % 2 == 1 { 1.0 } else { -1.0 };
    s * (0.5 / (x * x) + 0.5 / (x * x * x) - 0.5 / x.powi(5))
}

/// Remainder `alpha_i` of the alternating series `sum (-1)^(j-1)/j^2`.
pub fn alpha(i: usize) -> f64 {
    assert!(i >= 1);
    if i <= ALPHA_TABLE + 1 {
        alpha_table()[i]
    } else {
        alpha_tail(i)
    }
}

fn fractal_outer(x: Point) -> Vec2 {
    let (a, b) = (x[0], x[1]);
    if a < 0.0 && b > 0.0 && b < 1.0 {
        [1.0, 0.0]
    } else if b < 0.0 && a > 0.0 && a < 1.0 {
        [0.0, 1.0]
    } else if (b - a).abs() < 1.0 && a + b > 1.0 {
        [-1.0, -1.0]
    } else {
        [0.0, 0.0]
    }
}

fn in_unit_triangle(x: Point) -> bool {
    x[0] >= 0.0 && x[1] >= 0.0 && x[0] + x[1] <= 1.0
}

fn fractal_inner(k: u32, x: Point) -> Vec2 {
    if k == 0 {
        return [0.0, 0.0];
    }
    for i in 0..3 {
        let y = ifs_inverse(i, x);
        if in_unit_triangle(y) {
            return fractal_inner(k - 1, y);
        }
    }
    let mut s = [0.0, 0.0];
    let (a, b) = (x[0], x[1]);
    let t = 2.0 / 3.0;
    if a.hypot(b - t) < 1.0 / 3.0 {
        let v = [t - b, a];
        s = scale(v, 1.0 / norm(v));
    }
    if (b - a).abs() < 1.0 / 3.0 {
        s = [s[0] - 1.0, s[1] - 1.0];
    }
    if (a - t).hypot(b) < 1.0 / 3.0 {
        let v = [b, t - a];
        let v = scale(v, 1.0 / norm(v));
        s = [s[0] + v[0], s[1] + v[1]];
    }
    s
}

fn long_seg(a: Point, b: Point) -> Piece {
    Piece::Seg { a, b }
}

fn full_circle(c: Point, r: f64) -> Piece {
    Piece::Arc { c, r, t0: 0.0, t1: TAU }
}

fn map_piece(i: usize, p: &Piece) -> Piece {
    match *p {
        Piece::Seg { a, b } => Piece::Seg {
            a: ifs_map(i, a),
            b: ifs_map(i, b),
        },
        Piece::Arc { c, r, t0, t1 } => Piece::Arc {
            c: ifs_map(i, c),
            r: r / 3.0,
            t0,
            t1,
        },
    }
}

fn fractal_inner_breaks(k: u32) -> Vec<Piece> {
    if k == 0 {
        return vec![];
    }
    let t = 1.0 / 3.0;
    let mut v = vec![
        full_circle([0.0, 2.0 * t], t),
        full_circle([2.0 * t, 0.0], t),
        long_seg([0.0, t], [t, 2.0 * t]),
        long_seg([t, 0.0], [2.0 * t, t]),
    ];
    for i in 0..3 {
        let tri = triangle(ifs_map(i, [0.0, 0.0]), t);
        for j in 0..3 {
            v.push(long_seg(tri[j], tri[(j + 1) % 3]));
        }
    }
    let sub = fractal_inner_breaks(k - 1);
    for i in 0..3 {
        v.extend(sub.iter().map(|p| map_piece(i, p)));
    }
    v
}

impl CertificateField {
    pub fn zero() -> Self {
        CertificateField {
            field: Field::Zero,
            bound_c: 0.0,
        }
    }

    /// `0` on `|x| < 1`, `-theta x/|x|^2` on `1 < |x| < 2`, `2 x/|x|^2`
    /// beyond.
    pub fn two_circles(theta: f64) -> Self {
        CertificateField {
            field: Field::Radial {
                center: [0.0, 0.0],
                rings: vec![
                    Ring {
                        r_lo: 1.0,
                        r_hi: Some(2.0),
                        coef: -theta,
                    },
                    Ring {
                        r_lo: 2.0,
                        r_hi: None,
                        coef: 2.0,
                    },
                ],
            },
            bound_c: 1.0,
        }
    }

    pub fn alternating() -> Self {
        CertificateField {
            field: Field::AlternatingRadial,
            bound_c: 1.0,
        }
    }

    pub fn eval(&self, x: Point) -> Vec2 {
        match &self.field {
            Field::Zero => [0.0, 0.0],
            Field::Radial { center, rings } => {
                let d = sub(x, *center);
                let r = norm(d);
                for g in rings {
                    if r > g.r_lo && g.r_hi.is_none_or(|h| r < h) {
                        return scale(d, g.coef / (r * r));
                    }
                }
                [0.0, 0.0]
            }
            Field::AlternatingRadial => {
                let r = norm(x);
                if r == 0.0 {
                    return [0.0, 0.0];
                }
                let i = (1.0 / r.sqrt()).floor() as usize + 1;
                scale(x, alpha(i) / (r * r))
            }
            Field::Fractal { level } => {
                if in_unit_triangle(x) {
                    fractal_inner(*level, x)
                } else {
                    fractal_outer(x)
                }
            }
        }
    }

    /// Curves across which the field may jump.
    pub fn discontinuities(&self) -> Vec<Piece> {
        match &self.field {
            Field::Zero => vec![],
            Field::Radial { center, rings } => {
                let mut v = Vec::new();
                for g in rings {
                    if g.r_lo > 0.0 {
                        v.push(full_circle(*center, g.r_lo));
                    }
                    if let Some(h) = g.r_hi {
                        v.push(full_circle(*center, h));
                    }
                }
                v
            }
            Field::AlternatingRadial => (1..=2000).map(|i| full_circle([0.0, 0.0], 1.0 / (i * i) as f64)).collect(),
            Field::Fractal { level } => {
                let l = 10.0;
                let mut v = vec![
                    long_seg([0.0, -l], [0.0, l]),
                    long_seg([-l, 0.0], [l, 0.0]),
                    long_seg([-l, 1.0], [0.0, 1.0]),
                    long_seg([1.0, -l], [1.0, 0.0]),
                    long_seg([0.0, 1.0], [l, 1.0 + l]),
                    long_seg([1.0, 0.0], [1.0 + l, l]),
                    long_seg([-l, 1.0 + l], [1.0 + l, -l]),
                ];
                v.extend(fractal_inner_breaks(*level));
                v
            }
        }
    }

    /// Outward flux of the field through the boundary of `p`. The field is
    /// read from just outside the shape, so measure carried by the boundary
    /// counts as inside.
    pub fn flux(&self, p: &Shape) -> Result<f64, GeoError> {
        let breaks = self.discontinuities();
        let eps = 1e-11 * p.scale();
        let mut total = 0.0;
        for q in p.pieces() {
            let mut br = vec![0.0, 1.0];
            for d in &breaks {
                br.extend(q.meet_params(d, 1e-12));
            }
            br.sort_by(f64::total_cmp);
            br.dedup();
            let len = q.length();
            let f = |s: f64| {
                let n = q.inward_normal(s);
                let x = q.point(s);
                let y = [x[0] - eps * n[0], x[1] - eps * n[1]];
                -dot(self.eval(y), n) * len
            };
            match quad::integrate_breaks(f, &br, 1e-10, 50_000) {
                Ok((v, _)) => total += v,
                Err(e) => {
                    return Err(GeoError::QuadratureNonConvergence {
                        estimate: e.estimate,
                        error: e.error,
                    })
                }
            }
        }
        Ok(total)
    }

    /// Sample points for the polar bound: a lattice over `bbox` plus points
    /// hugging every radial jump.
    fn polar_samples(&self, bbox: [f64; 4], n: usize) -> Vec<Point> {
        let mut pts = Vec::with_capacity(n * n + 4096);
        for i in 0..n {
            for j in 0..n {
                // irrational offsets keep the lattice off the jump curves
                let u = (i as f64 + 0.5 + 0.1234567 * (j % 3) as f64) / n as f64;
                let v = (j as f64 + 0.5 + 0.0987654 * (i % 5) as f64) / n as f64;
                pts.push([bbox[0] + u * (bbox[2] - bbox[0]), bbox[1] + v * (bbox[3] - bbox[1])]);
            }
        }
        let radii: Vec<(Point, f64)> = match &self.field {
            Field::Radial { center, rings } => rings
                .iter()
                .flat_map(|g| [Some(g.r_lo), g.r_hi])
                .flatten()
                .filter(|r| *r > 0.0)
                .map(|r| (*center, r))
                .collect(),
            Field::AlternatingRadial => (1..=400).map(|i| ([0.0, 0.0], 1.0 / (i * i) as f64)).collect(),
            _ => vec![],
        };
        for (c, r) in radii {
            for k in 0..16 {
                let t = TAU * (k as f64 + 0.37) / 16.0;
                for f in [1.0 - 1e-9, 1.0 + 1e-9] {
                    pts.push([c[0] + f * r * t.cos(), c[1] + f * r * t.sin()]);
                }
            }
        }
        pts
    }
}

/// Segment measures `-theta_k H1` on the boundary of the level-`k` fractal
/// iterate: density 1 on the legs and `sqrt 2` on the hypotenuses.
pub fn fractal_target(level: u32) -> Vec<CurveMeasure> {
    let leg = 3f64.powi(-(level as i32));
    let mut v = Vec::new();
    for c in fractal_corners(level) {
        let t = triangle(c, leg);
        v.push(CurveMeasure::segment(t[0], t[1], -1.0));
        v.push(CurveMeasure::segment(t[1], t[2], -SQRT_2));
        v.push(CurveMeasure::segment(t[2], t[0], -1.0));
    }
    v
}

pub fn build_fractal_certificate(level: u32) -> Result<CertificateField, GeoError> {
    if !(1..=6).contains(&level) {
        return Err(GeoError::LevelOutOfRange(level));
    }
    Ok(CertificateField {
        field: Field::Fractal { level },
        bound_c: 1.0,
    })
}

/// Compares boundary fluxes with target masses on each test shape and
/// samples the polar of the field.
pub fn check_certificate(
    field: &CertificateField,
    target: &[CurveMeasure],
    test_shapes: &[Shape],
    phi: &Integrand,
) -> Result<CertificateReport, GeoError> {
    use rayon::prelude::*;
    let per: Vec<Result<(f64, f64), GeoError>> = test_shapes
        .par_iter()
        .map(|p| {
            let fl = field.flux(p)?;
            let mut t = 0.0;
            for m in target {
                t += measure_of(m, p, Side::Closure)?;
            }
            Ok((fl, t))
        })
        .collect();
    let mut fluxes = Vec::new();
    let mut targets = Vec::new();
    for r in per {
        let (f, t) = r?;
        fluxes.push(f);
        targets.push(t);
    }
    let residuals: Vec<f64> = fluxes.iter().zip(&targets).map(|(f, t)| (f - t).abs()).collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);

    let mut bbox = [-1.0f64, -1.0, 2.0, 2.0];
    for p in test_shapes {
        for q in p.pieces() {
            for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let x = q.point(s);
                bbox = [bbox[0].min(x[0]), bbox[1].min(x[1]), bbox[2].max(x[0]), bbox[3].max(x[1])];
            }
        }
    }
    let pts = field.polar_samples(bbox, 400);
    let polars: Vec<Result<f64, GeoError>> = pts
        .par_iter()
        .map(|&x| Ok(phi.polar(x, field.eval(x))?))
        .collect();
    let mut sup_polar: f64 = 0.0;
    for p in polars {
        sup_polar = sup_polar.max(p?);
    }
    let pass = max_residual <= 1e-6 && sup_polar <= field.bound_c + 1e-9;
    Ok(CertificateReport {
        fluxes,
        targets,
        residuals,
        max_residual,
        sup_polar,
        bound_c: field.bound_c,
        polar_samples: pts.len(),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn alpha_remainders() {
        assert!((alpha(1) - PI * PI / 12.0).abs() < 1e-14);
        assert!((alpha(1) - alpha(2) - 1.0).abs() < 1e-14);
        for i in [3usize, 10, 1000, 30_000] {
            assert_eq!(alpha(i).signum(), if i % 2 == 1 { 1.0 } else { -1.0 });
            assert!(alpha(i).abs() <= 1.0 / (i * i) as f64);
        }
        // table and tail agree where both apply
        assert!((alpha(ALPHA_TABLE) - alpha_tail(ALPHA_TABLE)).abs() < 1e-20);
    }

    #[test]
    fn fractal_self_similarity() {
        let f1 = CertificateField {
            field: Field::Fractal { level: 1 },
            bound_c: 1.0,
        };
        let f2 = CertificateField {
            field: Field::Fractal { level: 2 },
            bound_c: 1.0,
        };
        for x in [[0.2, 0.55], [0.5, 0.1], [0.4, 0.45], [0.05, 0.9]] {
            for i in 0..3 {
                let (a, b) = (f2.eval(ifs_map(i, x)), f1.eval(x));
                assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_triangle_flux() {
        for k in 0..3 {
            let f = CertificateField {
                field: Field::Fractal { level: k },
                bound_c: 1.0,
            };
            let fl = f.flux(&Shape::unit_triangle()).unwrap();
            assert!((fl + 4.0).abs() < 1e-9, "k={k} flux {fl}");
        }
    }
}
