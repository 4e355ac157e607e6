//! Versioned JSON description of a grid problem: domain, integrand, signed
//! measure and boundary datum.

use serde::{Deserialize, Serialize};

use crate::exactgeo::{CurveMeasure, Shape, Support};
use crate::expr::{Expr, ExprError};
use crate::grid::{add_atoms, cell_average, circle_atoms, segment_atoms, DiscreteMeasure, GridDomain, GridError, GridFunction};
use crate::integrand::{Integrand, IntegrandError, IntegrandSpec};
use crate::solve::SolveConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("{field}: {source}")]
    Expr { field: &'static str, source: ExprError },
    #[error("curve measure: {0}")]
    Curve(String),
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// Full rectangle `bbox = [x0, y0, x1, y1]` at cell size `h`.
    Rect { bbox: [f64; 4], h: f64 },
    /// Cells of `bbox` whose centers lie inside `shape`.
    Shape { shape: Shape, bbox: [f64; 4], h: f64 },
    /// Rows top to bottom, `#` active, `.` inactive.
    Bitmap {
        rows: Vec<String>,
        h: f64,
        #[serde(default)]
        origin: [f64; 2],
    },
}

impl DomainSpec {
    pub fn h(&self) -> f64 {
        match self {
            DomainSpec::Rect { h, .. } | DomainSpec::Shape { h, .. } | DomainSpec::Bitmap { h, .. } => *h,
        }
    }

    /// Same region at a new cell size. Bitmaps keep their pixels and scale.
    pub fn with_h(&self, new_h: f64) -> Self {
        let mut d = self.clone();
        match &mut d {
            DomainSpec::Rect { h, .. } | DomainSpec::Shape { h, .. } | DomainSpec::Bitmap { h, .. } => *h = new_h,
        }
        d
    }

    pub fn build(&self) -> Result<GridDomain, GridError> {
        let h = self.h();
        if !(h > 0.0 && h.is_finite()) {
            return Err(GridError::Invalid(format!("cell size must be positive, got {h}")));
        }
        match self {
            DomainSpec::Rect { bbox, h } => {
                let nx = ((bbox[2] - bbox[0]) / h).round();
                let ny = ((bbox[3] - bbox[1]) / h).round();
                if !(nx >= 1.0 && ny >= 1.0) {
                    return Err(GridError::Invalid("rectangle holds no cells at this h".into()));
                }
                Ok(GridDomain::rect(nx as usize, ny as usize, *h, [bbox[0], bbox[1]]))
            }
            DomainSpec::Shape { shape, bbox, h } => {
                shape.validate().map_err(|e| GridError::Invalid(e.to_string()))?;
                GridDomain::rasterize(shape, *h, *bbox)
            }
            DomainSpec::Bitmap { rows, h, origin } => GridDomain::from_bitmap(*h, *origin, rows),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Plus,
    Minus,
}

/// A curve-carried part of the measure, moved onto grid edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub part: Part,
    pub curve: CurveMeasure,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    /// Absolutely continuous part, as an expression in `x`, `y`, `r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveSpec>,
    /// Atoms on interior edges by index.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<crate::grid::EdgeAtom>,
}

fn zero() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub domain: DomainSpec,
    #[serde(default)]
    pub integrand: IntegrandSpec,
    #[serde(default)]
    pub measure: MeasureSpec,
    /// Boundary datum, sampled at boundary-edge midpoints.
    #[serde(default = "zero")]
    pub datum: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveConfig>,
}

/// A scenario turned into grid objects.
#[derive(Debug, Clone)]
pub struct Instance {
    pub domain: GridDomain,
    pub integrand: Integrand,
    pub measure: DiscreteMeasure,
    /// Zero cell values with the sampled datum.
    pub u0: GridFunction,
}

fn parse(field: &'static str, src: &str) -> Result<Expr, ScenarioError> {
    Expr::parse(src).map_err(|source| ScenarioError::Expr { field, source })
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self, ScenarioError> {
        let sc: Scenario = serde_json::from_str(s)?;
        if sc.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::Version(sc.schema_version));
        }
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn build(&self) -> Result<Instance, ScenarioError> {
        let integrand = self.integrand.build()?;
        let domain = self.domain.build()?;
        let mut measure = DiscreteMeasure::zero(&domain);
        if let Some(src) = &self.measure.density {
            let f = parse("measure.density", src)?;
            measure.cell_density = cell_average(&domain, |p| f.eval(p));
        }
        for c in &self.measure.curves {
            if !(c.curve.density >= 0.0) {
                return Err(ScenarioError::Curve("densities are nonnegative; the part carries the sign".into()));
            }
            let atoms = match &c.curve.support {
                Support::Circle { center, radius } => circle_atoms(&domain, *center, *radius, c.curve.density),
                Support::Segment { a, b } => segment_atoms(&domain, *a, *b, c.curve.density),
                Support::Polyline { points } => points
                    .windows(2)
                    .flat_map(|w| segment_atoms(&domain, w[0], w[1], c.curve.density))
                    .collect(),
                other => return Err(ScenarioError::Curve(format!("{other:?} cannot be placed on grid edges"))),
            };
            add_atoms(&mut measure, &atoms, c.part == Part::Plus);
        }
        for a in &self.measure.atoms {
            measure.add_atom(a.edge, a.plus, a.minus);
        }
        measure.validate(&domain)?;
        let g = parse("datum", &self.datum)?;
        let datum: Vec<f64> = domain.boundary_edges().iter().map(|b| g.eval(b.mid)).collect();
        let u0 = GridFunction::new(&domain, vec![0.0; domain.n_cells()], datum)?;
        Ok(Instance {
            domain,
            integrand,
            measure,
            u0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "schema_version": 1,
        "domain": {"kind": "rect", "bbox": [-1, -1, 1, 1], "h": 0.25},
        "integrand": {"name": "weighted-l1", "coefficients": [1, 2]},
        "measure": {
            "density": "0.5 * sgn(x)",
            "curves": [{"part": "minus", "curve": {"support": {"kind": "segment", "a": [0, -1], "b": [0, 1]}, "density": 1}}]
        },
        "datum": "x"
    }"#;

    #[test]
    fn builds_sample() {
        let sc = Scenario::from_json(SAMPLE).unwrap();
        let inst = sc.build().unwrap();
        assert_eq!(inst.domain.n_cells(), 64);
        // the segment follows 8 vertical edges of length 1/4
        assert_eq!(inst.measure.atoms.len(), 8);
        let total: f64 = inst.measure.atoms.iter().map(|a| a.minus).sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert!(inst.u0.datum.iter().all(|d| d.abs() <= 1.0));
    }

    #[test]
    fn round_trip_is_idempotent() {
        let sc = Scenario::from_json(SAMPLE).unwrap();
        let once = sc.to_json();
        let again = Scenario::from_json(&once).unwrap();
        assert_eq!(sc, again);
        assert_eq!(once, again.to_json());
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let bad = SAMPLE.replace("\"datum\"", "\"datom\"");
        assert!(matches!(Scenario::from_json(&bad), Err(ScenarioError::Json(_))));
        let v2 = SAMPLE.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(Scenario::from_json(&v2), Err(ScenarioError::Version(2))));
    }

    #[test]
    fn bad_expression_names_the_field() {
        let bad = SAMPLE.replace("\"datum\": \"x\"", "\"datum\": \"x +\"");
        let e = Scenario::from_json(&bad).unwrap().build().unwrap_err();
        assert!(e.to_string().starts_with("datum:"), "{e}");
    }
}
