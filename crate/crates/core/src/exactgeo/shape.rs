//! Shapes, oriented boundary pieces, membership predicates and curve/curve
//! intersection parameters.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::GeoError;
use crate::vec2::{add, angle, cross, dist, dot, left_normal, lerp, norm, scale, sub, unit, Point, Vec2};

/// Predicate tolerance, relative to the shape scale.
pub const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// Simple polygon, vertices counter-clockwise. An empty vertex list is the
    /// empty set.
    Polygon { vertices: Vec<Point> },
    Disc { center: Point, radius: f64 },
    Annulus { center: Point, r_in: f64, r_out: f64 },
    /// `{ |x - center| < radius, x_2 - center_2 > cut }`.
    HalfDisc { center: Point, radius: f64, cut: f64 },
    /// Level-`k` iterate of the triangle IFS: `3^k` disjoint right triangles
    /// of leg `3^-k`.
    Fractal { level: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loc {
    Inside,
    Boundary,
    Outside,
}

/// Oriented boundary piece; the shape lies to its left, so the left normal
/// is the inward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Seg { a: Point, b: Point },
    /// `c + r (cos t, sin t)` for `t` from `t0` to `t1` (either direction).
    Arc { c: Point, r: f64, t0: f64, t1: f64 },
}

impl Piece {
    pub fn point(&self, s: f64) -> Point {
        match *self {
            Piece::Seg { a, b } => lerp(a, b, s),
            Piece::Arc { c, r, t0, t1 } => {
                let t = t0 + s * (t1 - t0);
                [c[0] + r * t.cos(), c[1] + r * t.sin()]
            }
        }
    }

    /// Unit tangent in the direction of traversal.
    pub fn tangent(&self, s: f64) -> Vec2 {
        match *self {
            Piece::Seg { a, b } => unit(sub(b, a)),
            Piece::Arc { t0, t1, .. } => {
                let t = t0 + s * (t1 - t0);
                let sg = (t1 - t0).signum();
                [-t.sin() * sg, t.cos() * sg]
            }
        }
    }

    pub fn inward_normal(&self, s: f64) -> Vec2 {
        left_normal(self.tangent(s))
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Seg { a, b } => dist(a, b),
            Piece::Arc { r, t0, t1, .. } => r * (t1 - t0).abs(),
        }
    }

    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            Piece::Seg { a, b } => seg_distance(p, a, b),
            Piece::Arc { c, r, .. } => {
                if self.param_of_angle(angle(sub(p, c)), 1e-15).is_some() {
                    (dist(p, c) - r).abs()
                } else {
                    dist(p, self.point(0.0)).min(dist(p, self.point(1.0)))
                }
            }
        }
    }

    /// Parameter in `[0, 1]` of the arc point at polar angle `th`, if the
    /// angle lies on the arc (within `tol` radians).
    fn param_of_angle(&self, th: f64, tol: f64) -> Option<f64> {
        let Piece::Arc { t0, t1, .. } = *self else {
            return None;
        };
        let span = (t1 - t0).abs();
        let sg = (t1 - t0).signum();
        let d = ((th - t0) * sg).rem_euclid(TAU);
        if span >= TAU - 1e-15 {
            return Some(d / TAU);
        }
        if d <= span + tol {
            Some((d / span).min(1.0))
        } else if d >= TAU - tol {
            Some(0.0)
        } else {
            None
        }
    }

    /// Parameter on `self` of a point known to lie on its carrier curve.
    fn param_of_point(&self, p: Point, tol: f64) -> Option<f64> {
        match *self {
            Piece::Seg { a, b } => {
                let d = sub(b, a);
                let l2 = dot(d, d);
                let s = dot(sub(p, a), d) / l2;
                let e = tol / l2.sqrt();
                if s >= -e && s <= 1.0 + e {
                    Some(s.clamp(0.0, 1.0))
                } else {
                    None
                }
            }
            Piece::Arc { c, r, .. } => self.param_of_angle(angle(sub(p, c)), tol / r.max(1e-300)),
        }
    }

    /// Parameters on `self` where it meets `other`. Overlapping collinear or
    /// cocircular stretches contribute the endpoints of the overlap.
    pub fn meet_params(&self, other: &Piece, tol: f64) -> Vec<f64> {
        let mut pts: Vec<Point> = Vec::new();
        let mut out = Vec::new();
        match (*self, *other) {
            (Piece::Seg { a: p, b: p2 }, Piece::Seg { a: q, b: q2 }) => {
                let r = sub(p2, p);
                let s = sub(q2, q);
                let den = cross(r, s);
                let qp = sub(q, p);
                if den.abs() > 1e-14 * norm(r) * norm(s) {
                    let t = cross(qp, s) / den;
                    let u = cross(qp, r) / den;
                    let et = tol / norm(r);
                    let eu = tol / norm(s);
                    if t >= -et && t <= 1.0 + et && u >= -eu && u <= 1.0 + eu {
                        out.push(t.clamp(0.0, 1.0));
                    }
                } else if cross(qp, r).abs() <= tol * norm(r) {
                    pts.push(q);
                    pts.push(q2);
                    // the other segment's endpoints cover overlap ends lying
                    // inside self; self's own ends are always split points
                }
            }
            (Piece::Seg { a, b }, Piece::Arc { c, r, .. }) | (Piece::Arc { c, r, .. }, Piece::Seg { a, b }) => {
                let d = sub(b, a);
                let f = sub(a, c);
                let qa = dot(d, d);
                let qb = 2.0 * dot(f, d);
                let qc = dot(f, f) - r * r;
                let disc = qb * qb - 4.0 * qa * qc;
                let sc = tol * (2.0 * r * qa.sqrt()).max(1e-300) * 2.0;
                if disc >= -sc {
                    let sq = disc.max(0.0).sqrt();
                    for s in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
                        let e = tol / qa.sqrt();
                        if s >= -e && s <= 1.0 + e {
                            pts.push(lerp(a, b, s.clamp(0.0, 1.0)));
                        }
                    }
                }
            }
            (Piece::Arc { c: c1, r: r1, .. }, Piece::Arc { c: c2, r: r2, .. }) => {
                let dd = dist(c1, c2);
                if dd <= tol && (r1 - r2).abs() <= tol {
                    pts.push(other.point(0.0));
                    pts.push(other.point(1.0));
                } else if dd > tol && dd <= r1 + r2 + tol && dd >= (r1 - r2).abs() - tol {
                    let a = (r1 * r1 - r2 * r2 + dd * dd) / (2.0 * dd);
                    let h = (r1 * r1 - a * a).max(0.0).sqrt();
                    let u = scale(sub(c2, c1), 1.0 / dd);
                    let m = add(c1, scale(u, a));
                    let pr = left_normal(u);
                    pts.push(add(m, scale(pr, h)));
                    pts.push(add(m, scale(pr, -h)));
                }
            }
        }
        for p in pts {
            if other.distance(p) <= 10.0 * tol {
                if let Some(s) = self.param_of_point(p, 10.0 * tol) {
                    out.push(s);
                }
            }
        }
        out
    }
}

fn seg_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = sub(b, a);
    let l2 = dot(d, d);
    if l2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), d) / l2).clamp(0.0, 1.0);
    dist(p, lerp(a, b, t))
}

/// The three similarity maps generating the fractal: `T1(x) = (x + (0,2))/3`,
/// `T2(x) = x/3`, `T3(x) = (x + (2,0))/3`.
pub const IFS_SHIFT: [[f64; 2]; 3] = [[0.0, 2.0], [0.0, 0.0], [2.0, 0.0]];

pub fn ifs_map(i: usize, x: Point) -> Point {
    [(x[0] + IFS_SHIFT[i][0]) / 3.0, (x[1] + IFS_SHIFT[i][1]) / 3.0]
}

pub fn ifs_inverse(i: usize, x: Point) -> Point {
    [3.0 * x[0] - IFS_SHIFT[i][0], 3.0 * x[1] - IFS_SHIFT[i][1]]
}

/// Lower-left corners of the level-`k` triangles (leg `3^-k`), in address
/// order.
pub fn fractal_corners(k: u32) -> Vec<Point> {
    let mut cur = vec![[0.0, 0.0]];
    for _ in 0..k {
        let mut next = Vec::with_capacity(cur.len() * 3);
        for i in 0..3 {
            for &p in &cur {
                next.push(ifs_map(i, p));
            }
        }
        cur = next;
    }
    cur
}

pub fn triangle(corner: Point, leg: f64) -> [Point; 3] {
    [corner, [corner[0] + leg, corner[1]], [corner[0], corner[1] + leg]]
}

fn in_triangle(p: Point, corner: Point, leg: f64, tol: f64) -> Loc {
    let u = p[0] - corner[0];
    let v = p[1] - corner[1];
    let m = u.min(v).min(leg - u - v);
    if m > tol {
        Loc::Inside
    } else if m >= -tol {
        Loc::Boundary
    } else {
        Loc::Outside
    }
}

impl Shape {
    pub fn unit_triangle() -> Shape {
        Shape::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Shape {
        Shape::Polygon {
            vertices: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
        }
    }

    pub fn disc(center: Point, radius: f64) -> Shape {
        Shape::Disc { center, radius }
    }

    pub fn empty() -> Shape {
        Shape::Polygon { vertices: vec![] }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Shape::Polygon { vertices } if vertices.is_empty())
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let bad = |m: String| Err(GeoError::InvalidShape(m));
        match self {
            Shape::Polygon { vertices } => {
                if vertices.is_empty() {
                    return Ok(());
                }
                if vertices.len() < 3 {
                    return bad(format!("polygon needs 3 vertices, got {}", vertices.len()));
                }
                if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
                    return bad("non-finite polygon vertex".into());
                }
                if signed_area(vertices) <= 0.0 {
                    return bad("polygon must be counter-clockwise with positive area".into());
                }
                let n = vertices.len();
                for i in 0..n {
                    for j in i + 1..n {
                        if j == i + 1 || (i == 0 && j == n - 1) {
                            continue;
                        }
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                        if segments_cross(a, b, c, d) {
                            return bad(format!("polygon edges {i} and {j} intersect"));
                        }
                    }
                }
                Ok(())
            }
            Shape::Disc { radius, .. } if !(*radius > 0.0) => bad("disc radius must be positive".into()),
            Shape::Annulus { r_in, r_out, .. } if !(*r_in > 0.0 && r_out > r_in) => {
                bad("annulus needs 0 < r_in < r_out".into())
            }
            Shape::HalfDisc { radius, cut, .. } if !(*radius > 0.0 && cut.abs() < *radius) => {
                bad("half_disc needs radius > 0 and |cut| < radius".into())
            }
            Shape::Fractal { level } if *level > 12 => bad("fractal level above 12".into()),
            _ => Ok(()),
        }
    }

    /// Characteristic length used to scale tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            Shape::Polygon { vertices } => vertices
                .iter()
                .map(|v| v[0].abs().max(v[1].abs()))
                .fold(1.0, f64::max),
            Shape::Disc { center, radius } | Shape::HalfDisc { center, radius, .. } => {
                1f64.max(radius + norm(*center))
            }
            Shape::Annulus { center, r_out, .. } => 1f64.max(r_out + norm(*center)),
            Shape::Fractal { .. } => 1.0,
        }
    }

    pub fn pieces(&self) -> Vec<Piece> {
        match self {
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| Piece::Seg {
                        a: vertices[i],
                        b: vertices[(i + 1) % n],
                    })
                    .collect()
            }
            Shape::Disc { center, radius } => vec![Piece::Arc {
                c: *center,
                r: *radius,
                t0: 0.0,
                t1: TAU,
            }],
            Shape::Annulus { center, r_in, r_out } => vec![
                Piece::Arc {
                    c: *center,
                    r: *r_out,
                    t0: 0.0,
                    t1: TAU,
                },
                Piece::Arc {
                    c: *center,
                    r: *r_in,
                    t0: TAU,
                    t1: 0.0,
                },
            ],
            Shape::HalfDisc { center, radius, cut } => {
                let th = (cut / radius).asin();
                let w = (radius * radius - cut * cut).sqrt();
                let y = center[1] + cut;
                vec![
                    Piece::Arc {
                        c: *center,
                        r: *radius,
                        t0: th,
                        t1: PI - th,
                    },
                    Piece::Seg {
                        a: [center[0] - w, y],
                        b: [center[0] + w, y],
                    },
                ]
            }
            Shape::Fractal { level } => {
                let leg = 3f64.powi(-(*level as i32));
                let mut v = Vec::new();
                for c in fractal_corners(*level) {
                    let t = triangle(c, leg);
                    for i in 0..3 {
                        v.push(Piece::Seg { a: t[i], b: t[(i + 1) % 3] });
                    }
                }
                v
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Polygon { vertices } => {
                if vertices.is_empty() {
                    0.0
                } else {
                    signed_area(vertices)
                }
            }
            Shape::Disc { radius, .. } => PI * radius * radius,
            Shape::Annulus { r_in, r_out, .. } => PI * (r_out * r_out - r_in * r_in),
            Shape::HalfDisc { radius, cut, .. } => {
                let r = *radius;
                r * r * (cut / r).acos() - cut * (r * r - cut * cut).sqrt()
            }
            Shape::Fractal { level } => {
                let leg = 3f64.powi(-(*level as i32));
                3f64.powi(*level as i32) * 0.5 * leg * leg
            }
        }
    }

    /// Euclidean perimeter.
    pub fn perimeter(&self) -> f64 {
        self.pieces().iter().map(Piece::length).sum()
    }

    fn inside_strict(&self, p: Point) -> bool {
        match self {
            Shape::Polygon { vertices } => !vertices.is_empty() && winding(vertices, p) != 0,
            Shape::Disc { center, radius } => dist(p, *center) < *radius,
            Shape::Annulus { center, r_in, r_out } => {
                let d = dist(p, *center);
                d > *r_in && d < *r_out
            }
            Shape::HalfDisc { center, radius, cut } => {
                dist(p, *center) < *radius && p[1] - center[1] > *cut
            }
            Shape::Fractal { .. } => unreachable!(),
        }
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        if let Shape::Fractal { level } = self {
            let leg = 3f64.powi(-(*level as i32));
            return fractal_corners(*level)
                .into_iter()
                .map(|c| {
                    let t = triangle(c, leg);
                    (0..3)
                        .map(|i| seg_distance(p, t[i], t[(i + 1) % 3]))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::INFINITY, f64::min);
        }
        self.pieces()
            .iter()
            .map(|q| q.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Inside / on the boundary (within `TOL * scale`) / outside.
    pub fn locate(&self, p: Point) -> Loc {
        self.locate_tol(p, TOL * self.scale())
    }

    pub fn locate_tol(&self, p: Point, tol: f64) -> Loc {
        if self.is_empty() {
            return Loc::Outside;
        }
        if let Shape::Fractal { level } = self {
            let leg = 3f64.powi(-(*level as i32));
            let mut best = Loc::Outside;
            for c in fractal_corners(*level) {
                match in_triangle(p, c, leg, tol) {
                    Loc::Inside => return Loc::Inside,
                    Loc::Boundary => best = Loc::Boundary,
                    Loc::Outside => {}
                }
            }
            return best;
        }
        if self.boundary_distance(p) <= tol {
            Loc::Boundary
        } else if self.inside_strict(p) {
            Loc::Inside
        } else {
            Loc::Outside
        }
    }

    /// Is `self` one of the fractal iterates?
    pub fn fractal_level(&self) -> Option<u32> {
        match self {
            Shape::Fractal { level } => Some(*level),
            _ => None,
        }
    }
}

pub fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>() * 0.5
}

fn winding(v: &[Point], p: Point) -> i32 {
    let n = v.len();
    let mut w = 0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        if a[1] <= p[1] {
            if b[1] > p[1] && cross(sub(b, a), sub(p, a)) > 0.0 {
                w += 1;
            }
        } else if b[1] <= p[1] && cross(sub(b, a), sub(p, a)) < 0.0 {
            w -= 1;
        }
    }
    w
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Runs of `curve` classified against `shape`: `(s0, s1, loc)` with
/// parameters in `[0,1]`.
pub fn classify_runs(curve: &Piece, shape: &Shape) -> Result<Vec<(f64, f64, Loc)>, GeoError> {
    runs(curve, shape, true)
}

/// Like [`classify_runs`] without the near-incidence check.
pub fn split_runs(curve: &Piece, shape: &Shape) -> Vec<(f64, f64, Loc)> {
    runs(curve, shape, false).unwrap_or_default()
}

fn runs(curve: &Piece, shape: &Shape, strict: bool) -> Result<Vec<(f64, f64, Loc)>, GeoError> {
    let sc = shape.scale().max(1.0);
    let tol = TOL * sc;
    let mut ts = vec![0.0, 1.0];
    if !shape.is_empty() {
        for q in shape.pieces() {
            ts.extend(curve.meet_params(&q, tol));
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    let len = curve.length();
    let mut runs = Vec::with_capacity(ts.len());
    for w in ts.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 <= s0 {
            continue;
        }
        let m = curve.point(0.5 * (s0 + s1));
        let loc = shape.locate_tol(m, tol);
        if strict && loc != Loc::Boundary && (s1 - s0) * len > 1e-6 * sc {
            let d = shape.boundary_distance(m);
            if d <= 1e-9 * sc {
                return Err(GeoError::AmbiguousIncidence {
                    point: m,
                    distance: d,
                });
            }
        }
        runs.push((s0, s1, loc));
    }
    Ok(runs)
}
