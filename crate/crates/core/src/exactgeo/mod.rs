//! Exact-geometry backend: shapes with anisotropic perimeters, curve-carried
//! measures, isoperimetric scores, divergence-field certificates.

mod certificate;
mod measure;
mod radial;
mod shape;

pub use certificate::{
    alpha, build_fractal_certificate, check_certificate, fractal_target, CertificateField, CertificateReport, Field,
    Ring,
};
pub use measure::{
    aniso_perimeter, approximate_membership, ic_score, measure_of, perimeter_within, CurveMeasure, Side,
    Support,
};
pub use radial::{radial_density_ic_check, RadialMode};
pub use shape::{classify_runs, split_runs, fractal_corners, ifs_inverse, ifs_map, triangle, Loc, Piece, Shape, TOL};

use crate::integrand::IntegrandError;
use crate::vec2::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeoError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("support passes within {distance:e} of the shape boundary at {point:?} without lying on it")]
    AmbiguousIncidence { point: Point, distance: f64 },
    #[error("quadrature did not converge (estimate {estimate}, error {error:e})")]
    QuadratureNonConvergence { estimate: f64, error: f64 },
    #[error("fractal level {0} outside 1..=6")]
    LevelOutOfRange(u32),
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
}
