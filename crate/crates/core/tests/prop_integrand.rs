mod common;

use common::integrand;
use common::props::{self, vec2};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn positively_homogeneous(phi in integrand(), x in vec2(3.0), xi in vec2(5.0), t in 0.0f64..10.0) {
        let lhs = phi.eval(x, [t * xi[0], t * xi[1]]);
        let rhs = t * phi.eval(x, xi);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + t * xi[0].hypot(xi[1])));
    }

    #[test]
    fn polar_duality(phi in integrand(), x in vec2(3.0), xi in vec2(5.0), xs in vec2(5.0)) {
        props::polar_duality(&phi, x, xi, xs)?;
    }

    #[test]
    fn polar_of_mirror_is_reflected(phi in integrand(), x in vec2(3.0), xs in vec2(5.0)) {
        let a = phi.mirrored().polar(x, xs).unwrap();
        let b = phi.polar(x, [-xs[0], -xs[1]]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn sampled_polar_matches_closed_form(phi in integrand(), xs in vec2(5.0)) {
        let exact = phi.polar([0.0, 0.0], xs).unwrap();
        let sampled = phi.sampled_polar([0.0, 0.0], xs).unwrap();
        prop_assert!(sampled <= exact * (1.0 + 1e-12) + 1e-15, "{sampled} > {exact}");
        prop_assert!(exact - sampled <= 1e-6 * (1.0 + exact), "{sampled} vs {exact}");
    }

    #[test]
    fn reverse_triangle_on_collinear_arguments(phi in integrand(), x in vec2(3.0), xi in vec2(5.0), s in 0.0f64..=1.0) {
        let tau = [s * xi[0], s * xi[1]];
        let lhs = phi.eval(x, [xi[0] - tau[0], xi[1] - tau[1]]);
        let rhs = phi.eval(x, xi) - phi.eval(x, tau);
        prop_assert!(lhs >= rhs - 1e-12 * (1.0 + phi.eval(x, xi)));
    }

    #[test]
    fn comparable_to_euclidean(phi in integrand(), x in vec2(3.0), xi in vec2(5.0)) {
        let (v, n) = (phi.eval(x, xi), xi[0].hypot(xi[1]));
        let tol = 1e-12 * (1.0 + n);
        prop_assert!(phi.alpha() * n <= v + tol && v <= phi.beta() * n + tol);
    }

    #[test]
    fn subadditive(phi in integrand(), x in vec2(3.0), a in vec2(5.0), b in vec2(5.0)) {
        let s = phi.eval(x, [a[0] + b[0], a[1] + b[1]]);
        prop_assert!(s <= phi.eval(x, a) + phi.eval(x, b) + 1e-12 * (1.0 + s));
    }
}
