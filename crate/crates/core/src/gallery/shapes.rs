//! Test-shape batteries. Boundaries are kept transversal to the measure
//! supports they meet, except for curves that coincide exactly.

use crate::exactgeo::Shape;
use crate::vec2::Point;

fn poly(v: &[Point]) -> Shape {
    Shape::Polygon { vertices: v.to_vec() }
}

fn disc(c: Point, r: f64) -> Shape {
    Shape::disc(c, r)
}

/// Shapes around two concentric circles of radii 1 and 2.
pub fn two_circles() -> Vec<Shape> {
    let o = [0.0, 0.0];
    vec![
        disc(o, 0.5),
        disc(o, 1.0),
        disc(o, 1.5),
        disc(o, 2.0),
        disc(o, 2.5),
        disc(o, 3.0),
        disc([0.3, 0.2], 1.2),
        disc([1.5, 0.0], 0.8),
        disc([-1.0, 1.0], 1.5),
        disc([0.0, 0.5], 2.2),
        Shape::rect(-1.5, -1.5, 1.5, 1.5),
        Shape::rect(0.0, 0.0, 2.5, 2.5),
        Shape::rect(-3.0, -0.5, 3.0, 0.5),
        Shape::rect(0.5, -0.25, 1.75, 0.75),
        Shape::Annulus { center: o, r_in: 1.0, r_out: 2.0 },
        Shape::Annulus { center: o, r_in: 0.5, r_out: 1.5 },
        Shape::Annulus { center: [0.2, 0.1], r_in: 1.2, r_out: 2.6 },
        Shape::HalfDisc { center: o, radius: 2.5, cut: -0.5 },
        Shape::HalfDisc { center: o, radius: 1.5, cut: 0.3 },
        poly(&[[-2.0, -2.0], [2.5, -1.0], [0.0, 2.7]]),
        poly(&[[0.1, -2.3], [2.2, -0.4], [1.3, 2.1], [-1.2, 1.9], [-2.1, -0.6]]),
    ]
}

/// Shapes for the alternating radial field: centered discs on and between
/// the jump circles, and shapes away from the origin.
pub fn alternating() -> Vec<Shape> {
    let o = [0.0, 0.0];
    vec![
        disc(o, 1.0),
        disc(o, 0.25),
        disc(o, 1.0 / 9.0),
        disc(o, 0.7),
        disc(o, 0.05),
        disc(o, 2.0),
        disc(o, 0.17),
        disc([0.5, 0.0], 0.3),
        disc([0.0, -0.6], 0.35),
        disc([0.05, 0.02], 0.5),
        disc([0.3, 0.3], 0.6),
        Shape::rect(-0.5, -0.5, 0.5, 0.5),
        Shape::rect(0.1, 0.1, 0.9, 0.4),
        Shape::rect(-1.2, -0.3, 0.7, 0.15),
        Shape::Annulus { center: o, r_in: 0.25, r_out: 1.0 },
        Shape::Annulus { center: o, r_in: 0.3, r_out: 0.8 },
        Shape::HalfDisc { center: o, radius: 1.3, cut: 0.2 },
        poly(&[[-0.8, -0.7], [0.9, -0.3], [0.1, 0.95]]),
        poly(&[[0.2, -0.1], [0.8, 0.05], [0.6, 0.7], [0.15, 0.4]]),
        poly(&[[-0.31, -0.2], [0.4, -0.33], [0.37, 0.29], [-0.26, 0.35]]),
    ]
}

/// Shapes around the unit right triangle and its fractal iterates.
pub fn triangle(level: u32) -> Vec<Shape> {
    let mut v = vec![
        Shape::unit_triangle(),
        poly(&[[-0.1, -0.1], [1.3, -0.1], [-0.1, 1.3]]),
        poly(&[[0.1, 0.1], [0.6, 0.1], [0.1, 0.6]]),
        Shape::rect(-0.5, -0.5, 1.5, 1.5),
        Shape::rect(0.2, 0.2, 0.6, 0.6),
        Shape::rect(-0.3, 0.13, 0.45, 0.41),
        Shape::rect(0.61, -0.2, 0.9, 0.07),
        Shape::rect(-1.0, -1.0, 0.3, 0.3),
        disc([0.3, 0.3], 0.2),
        disc([0.0, 0.0], 0.5),
        disc([1.0, 1.0], 0.9),
        disc([0.45, 0.4], 0.37),
        disc([-0.2, 0.6], 0.33),
        disc([0.3, 0.31], 1.4),
        Shape::Annulus { center: [0.3, 0.3], r_in: 0.15, r_out: 0.6 },
        Shape::HalfDisc { center: [0.4, 0.1], radius: 0.8, cut: 0.05 },
        poly(&[[0.05, -0.3], [1.2, 0.4], [0.2, 0.8]]),
        poly(&[[-0.4, 0.3], [0.7, -0.2], [0.9, 0.35], [0.35, 1.1], [-0.15, 0.9]]),
        poly(&[[0.02, 0.03], [0.31, 0.04], [0.33, 0.29], [0.01, 0.3]]),
        poly(&[[0.7, 0.1], [0.95, 0.5], [0.5, 0.93], [0.3, 0.6]]),
    ];
    for j in 1..=level {
        v.push(Shape::Fractal { level: j });
    }
    v
}

/// Shapes for the radial density inequality: centered discs (equality),
/// off-center discs, polygons and annuli.
pub fn radial() -> Vec<(Shape, bool)> {
    let o = [0.0, 0.0];
    vec![
        (disc(o, 0.3), true),
        (disc(o, 1.0), true),
        (disc(o, 2.0), true),
        (disc([0.4, 0.1], 0.8), false),
        (disc([1.5, 0.5], 0.5), false),
        (disc([-0.2, 0.9], 1.1), false),
        (Shape::rect(-1.0, -1.0, 1.0, 1.0), false),
        (Shape::rect(0.5, 0.5, 1.5, 1.0), false),
        (Shape::rect(-1.8, -0.2, 0.3, 0.4), false),
        (Shape::Annulus { center: o, r_in: 0.5, r_out: 1.5 }, false),
        (Shape::HalfDisc { center: o, radius: 2.0, cut: -1.0 }, false),
        (Shape::HalfDisc { center: o, radius: 1.2, cut: 0.3 }, false),
        (poly(&[[-1.0, -0.5], [1.2, -0.7], [0.1, 1.4]]), false),
        (poly(&[[0.3, 0.2], [1.1, 0.1], [0.9, 0.8]]), false),
    ]
}
