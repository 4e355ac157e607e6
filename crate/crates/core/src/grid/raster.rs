//! Transfer of continuum data (shapes, curves, densities) onto a grid.

use std::f64::consts::TAU;

use super::domain::GridDomain;
use super::functional::DiscreteMeasure;
use crate::exactgeo::{Loc, Shape};
use crate::quad::rect_gl4;
use crate::vec2::Point;

/// Interior edges separating cells whose centers lie inside `shape` from
/// cells whose centers do not.
pub fn staircase_edges(dom: &GridDomain, shape: &Shape) -> Vec<usize> {
    let inside: Vec<bool> = (0..dom.n_cells())
        .map(|k| shape.locate(dom.center(k)) == Loc::Inside)
        .collect();
    dom.interior_edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| inside[e.i] != inside[e.j])
        .map(|(k, _)| k)
        .collect()
}

/// `density * H1` on a circle, moved onto the staircase of the pixelated
/// disc with the total mass spread uniformly. Returns `(edge, mass)`.
pub fn circle_atoms(dom: &GridDomain, center: Point, radius: f64, density: f64) -> Vec<(usize, f64)> {
    let edges = staircase_edges(dom, &Shape::disc(center, radius));
    if edges.is_empty() {
        return vec![];
    }
    let m = density * TAU * radius / edges.len() as f64;
    edges.into_iter().map(|e| (e, m)).collect()
}

/// `density * H1` on a segment, one atom of mass `density * h` per grid
/// edge lying on it (the segment must follow grid lines).
pub fn segment_atoms(dom: &GridDomain, a: Point, b: Point, density: f64) -> Vec<(usize, f64)> {
    let h = dom.h();
    let tol = 1e-9 * h;
    let on = |p: Point| {
        let d = [b[0] - a[0], b[1] - a[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        let t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2;
        let q = [a[0] + t * d[0], a[1] + t * d[1]];
        t >= -tol / l2.sqrt() && t <= 1.0 + tol / l2.sqrt() && (p[0] - q[0]).hypot(p[1] - q[1]) <= tol
    };
    dom.interior_edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            // the edge segment is perpendicular to `dir`
            let t = [-e.dir[1] * 0.5 * h, e.dir[0] * 0.5 * h];
            on([e.mid[0] + t[0], e.mid[1] + t[1]]) && on([e.mid[0] - t[0], e.mid[1] - t[1]])
        })
        .map(|(k, _)| (k, density * dom.edge_weight()))
        .collect()
}

/// Average of `f` over each cell by 4x4 Gauss-Legendre.
pub fn cell_average(dom: &GridDomain, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let h = dom.h();
    (0..dom.n_cells())
        .map(|k| {
            let c = dom.center(k);
            rect_gl4(|x, y| f([x, y]), c[0] - 0.5 * h, c[0] + 0.5 * h, c[1] - 0.5 * h, c[1] + 0.5 * h) / (h * h)
        })
        .collect()
}

/// `F(x, y) = int_0^x int_0^y 1/|p| dp` for `x, y >= 0`.
fn inv_r_primitive(x: f64, y: f64) -> f64 {
    let mut s = 0.0;
    if x > 0.0 && y > 0.0 {
        s += x * (y / x).asinh() + y * (x / y).asinh();
    }
    s
}

/// Exact integral of `1/|p|` over `[x0, x1] x [y0, y1]`.
pub fn inv_r_rect(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    // split into quadrants so the primitive only sees nonnegative corners
    let axis = |a: f64, b: f64| -> Vec<(f64, f64)> {
        if a >= 0.0 {
            vec![(a, b)]
        } else if b <= 0.0 {
            vec![(-b, -a)]
        } else {
            vec![(0.0, -a), (0.0, b)]
        }
    };
    let mut s = 0.0;
    for (a, b) in axis(x0, x1) {
        for (c, d) in axis(y0, y1) {
            s += inv_r_primitive(b, d) - inv_r_primitive(a, d) - inv_r_primitive(b, c) + inv_r_primitive(a, c);
        }
    }
    s
}

/// Cell averages of `1/|x|`, exact.
pub fn inv_r_density(dom: &GridDomain) -> Vec<f64> {
    let h = dom.h();
    (0..dom.n_cells())
        .map(|k| {
            let c = dom.center(k);
            inv_r_rect(c[0] - 0.5 * h, c[0] + 0.5 * h, c[1] - 0.5 * h, c[1] + 0.5 * h) / (h * h)
        })
        .collect()
}

/// Cell averages of `2` on the unit disc and `1/|x|` outside. Cells cut by
/// the unit circle are subsampled.
pub fn capped_density(dom: &GridDomain) -> Vec<f64> {
    let h = dom.h();
    let f = |p: Point| {
        let r = p[0].hypot(p[1]);
        if r < 1.0 {
            2.0
        } else {
            1.0 / r
        }
    };
    (0..dom.n_cells())
        .map(|k| {
            let c = dom.center(k);
            let rc = c[0].hypot(c[1]);
            if (rc - 1.0).abs() > h {
                if rc < 1.0 {
                    2.0
                } else {
                    inv_r_rect(c[0] - 0.5 * h, c[0] + 0.5 * h, c[1] - 0.5 * h, c[1] + 0.5 * h) / (h * h)
                }
            } else {
                let n = 16;
                let s = h / n as f64;
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        let x0 = c[0] - 0.5 * h + a as f64 * s;
                        let y0 = c[1] - 0.5 * h + b as f64 * s;
                        acc += rect_gl4(|x, y| f([x, y]), x0, x0 + s, y0, y0 + s);
                    }
                }
                acc / (h * h)
            }
        })
        .collect()
}

/// Adds atoms to `mu`, merging with existing atoms on the same edge.
pub fn add_atoms(mu: &mut DiscreteMeasure, atoms: &[(usize, f64)], plus: bool) {
    for &(e, m) in atoms {
        if let Some(a) = mu.atoms.iter_mut().find(|a| a.edge == e) {
            if plus {
                a.plus += m;
            } else {
                a.minus += m;
            }
            if a.plus.min(a.minus) > 0.0 {
                mu.mutually_singular = false;
            }
        } else if plus {
            mu.add_atom(e, m, 0.0);
        } else {
            mu.add_atom(e, 0.0, m);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_r_matches_quadrature() {
        for (x0, x1, y0, y1) in [(1.0, 2.0, 0.5, 1.5), (-0.3, 0.4, -0.2, 0.7), (2.5, 3.5, -0.5, 0.5)] {
            let n = 200;
            let (dx, dy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
            let mut q = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let xa = x0 + a as f64 * dx;
                    let yb = y0 + b as f64 * dy;
                    q += rect_gl4(|x, y| 1.0 / x.hypot(y), xa, xa + dx, yb, yb + dy);
                }
            }
            let e = inv_r_rect(x0, x1, y0, y1);
            if x0 < 0.0 && y0 < 0.0 {
                // singular cell: in polar form the integral is the mean
                // distance to the boundary times 2 pi
                let m = 200_000;
                q = (0..m)
                    .map(|k| {
                        let t = TAU * (k as f64 + 0.5) / m as f64;
                        let (c, s) = (t.cos(), t.sin());
                        let rx = if c > 0.0 { x1 / c } else { x0 / c };
                        let ry = if s > 0.0 { y1 / s } else { y0 / s };
                        rx.min(ry)
                    })
                    .sum::<f64>()
                    * TAU
                    / m as f64;
            }
            assert!((e - q).abs() < 1e-6 * e, "{e} vs {q}");
        }
    }

    #[test]
    fn vertical_segment_atoms() {
        let d = GridDomain::rect(4, 4, 0.5, [-1.0, -1.0]);
        let a = segment_atoms(&d, [0.0, -1.0], [0.0, 1.0], 1.0);
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|&(_, m)| (m - 0.5).abs() < 1e-15));
    }

    #[test]
    fn circle_mass_preserved() {
        let d = GridDomain::rect(64, 64, 0.125, [-4.0, -4.0]);
        let a = circle_atoms(&d, [0.0, 0.0], 2.0, 1.5);
        let m: f64 = a.iter().map(|x| x.1).sum();
        assert!((m - 1.5 * TAU * 2.0).abs() < 1e-12);
    }
}
