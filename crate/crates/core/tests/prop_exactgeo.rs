mod common;

use std::f64::consts::{PI, SQRT_2};

use aniso_tv::exactgeo::{aniso_perimeter, measure_of, perimeter_within, CurveMeasure, Shape, Side};
use aniso_tv::Integrand;
use common::{close, integrand};
use proptest::prelude::*;

/// Star-shaped polygon around `c`: sorted angles, so it is simple and
/// counter-clockwise.
fn star(c: [f64; 2], mut pts: Vec<(f64, f64)>) -> Shape {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
    let vertices = pts
        .iter()
        .map(|&(t, r)| [c[0] + r * t.cos(), c[1] + r * t.sin()])
        .collect();
    Shape::Polygon { vertices }
}

fn shape() -> impl Strategy<Value = Shape> {
    let c = (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(x, y)| [x, y]);
    prop_oneof![
        (c.clone(), 0.05f64..2.0).prop_map(|(c, r)| Shape::disc(c, r)),
        (c.clone(), 0.05f64..1.5, 0.1f64..1.5).prop_map(|(c, a, w)| Shape::Annulus { center: c, r_in: a, r_out: a + w }),
        (c.clone(), 0.1f64..2.0, -0.95f64..0.95).prop_map(|(c, r, f)| Shape::HalfDisc { center: c, radius: r, cut: f * r }),
        (c.clone(), 0.05f64..2.0, 0.05f64..2.0).prop_map(|(c, w, h)| Shape::rect(c[0], c[1], c[0] + w, c[1] + h)),
        (c, prop::collection::vec((0.0f64..std::f64::consts::TAU, 0.1f64..2.0), 3..9))
            .prop_map(|(c, p)| star(c, p))
            .prop_filter("needs three distinct angles", |s| s.validate().is_ok()),
    ]
}

fn positive_curve() -> impl Strategy<Value = CurveMeasure> {
    let p = (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| [x, y]);
    prop_oneof![
        (p.clone(), 0.1f64..2.0, 0.0f64..3.0).prop_map(|(c, r, d)| CurveMeasure::circle(c, r, d)),
        (p.clone(), p.clone(), 0.0f64..3.0).prop_map(|(a, b, d)| CurveMeasure::segment(a, b, d)),
        (p, 0.0f64..3.0).prop_map(|(a, m)| CurveMeasure::point(a, m)),
    ]
}

fn rect() -> impl Strategy<Value = [f64; 4]> {
    (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..1.5, 0.1f64..1.5).prop_map(|(x, y, w, h)| [x, y, x + w, y + h])
}

fn as_shape(r: [f64; 4]) -> Shape {
    Shape::rect(r[0], r[1], r[2], r[3])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn perimeter_is_comparable(s in shape(), phi in integrand()) {
        let (p, e) = (aniso_perimeter(&s, &phi), s.perimeter());
        let tol = 1e-9 * (1.0 + e);
        prop_assert!(phi.alpha() * e <= p + tol && p <= phi.beta() * e + tol, "{} <= {p} <= {}", phi.alpha() * e, phi.beta() * e);
    }

    #[test]
    fn isoperimetric_inequality(s in shape()) {
        prop_assert!(2.0 * (PI * s.area()).sqrt() <= s.perimeter() * (1.0 + 1e-12));
    }

    #[test]
    fn pasting_of_rectangles(a in rect(), r in rect(), phi in integrand()) {
        let i = [a[0].max(r[0]), a[1].max(r[1]), a[2].min(r[2]), a[3].min(r[3])];
        let whole = if i[0] < i[2] && i[1] < i[3] { aniso_perimeter(&as_shape(i), &phi) } else { 0.0 };
        let (sa, sr) = (as_shape(a), as_shape(r));
        let parts = perimeter_within(&sa, &sr, Side::Interior, &phi).unwrap()
            + perimeter_within(&sr, &sa, Side::Closure, &phi).unwrap();
        prop_assert!(close(whole, parts, 1e-10), "{whole} vs {parts}");
    }

    #[test]
    fn interior_mass_below_closure_mass(m in positive_curve(), s in shape()) {
        let inner = measure_of(&m, &s, Side::Interior).unwrap();
        let outer = measure_of(&m, &s, Side::Closure).unwrap();
        prop_assert!(inner <= outer + 1e-9 * (1.0 + m.total_mass()), "{inner} > {outer}");
        prop_assert!(outer <= m.total_mass() + 1e-9 * (1.0 + m.total_mass()));
    }

    #[test]
    fn fractal_mass_is_conserved(k in 0u32..=6, j in 0u32..=6) {
        let m = CurveMeasure::fractal(k);
        prop_assert!((m.total_mass() - 4.0).abs() < 1e-12);
        let j = j.min(k);
        let inside = measure_of(&m, &Shape::Fractal { level: j }, Side::Closure).unwrap();
        prop_assert!((inside - 4.0).abs() < 1e-9, "level {k} in level {j}: {inside}");
    }

    #[test]
    fn fractal_perimeters(k in 0u32..=6) {
        let s = Shape::Fractal { level: k };
        let q = Integrand::quadrant();
        prop_assert!((aniso_perimeter(&s, &q.mirrored()) - (2.0 + SQRT_2)).abs() < 1e-9);
        prop_assert!((s.area() - 0.5 * 3f64.powi(-(k as i32))).abs() < 1e-15);
    }
}
