use serde::{Deserialize, Serialize};

use super::domain::GridDomain;
use super::GridError;
use crate::integrand::Integrand;
use crate::vec2::{neg, Point, Vec2};

/// Cell values plus the boundary datum, one value per boundary edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub values: Vec<f64>,
    pub datum: Vec<f64>,
}

impl GridFunction {
    pub fn new(dom: &GridDomain, values: Vec<f64>, datum: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != dom.n_cells() {
            return Err(GridError::ShapeMismatch {
                expected: dom.n_cells(),
                got: values.len(),
            });
        }
        if datum.len() != dom.boundary_edges().len() {
            return Err(GridError::ShapeMismatch {
                expected: dom.boundary_edges().len(),
                got: datum.len(),
            });
        }
        if values.iter().chain(&datum).any(|v| !v.is_finite()) {
            return Err(GridError::NonFinite);
        }
        Ok(GridFunction { values, datum })
    }

    /// Samples `w` at cell centers and `u0` at boundary-edge midpoints.
    pub fn sample(dom: &GridDomain, w: impl Fn(Point) -> f64, u0: impl Fn(Point) -> f64) -> Self {
        GridFunction {
            values: (0..dom.n_cells()).map(|k| w(dom.center(k))).collect(),
            datum: dom.boundary_edges().iter().map(|b| u0(b.mid)).collect(),
        }
    }

    pub fn constant(dom: &GridDomain, c: f64) -> Self {
        GridFunction {
            values: vec![c; dom.n_cells()],
            datum: vec![c; dom.boundary_edges().len()],
        }
    }

    /// Same datum, new cell values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        GridFunction {
            values,
            datum: self.datum.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
            datum: self.datum.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Mass pair on an interior edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeAtom {
    pub edge: usize,
    pub plus: f64,
    pub minus: f64,
}

/// Signed measure: a cell density (mass `h^N * density` per cell) plus
/// atoms carried by interior edges, each with both Jordan parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub cell_density: Vec<f64>,
    pub atoms: Vec<EdgeAtom>,
    pub mutually_singular: bool,
}

impl DiscreteMeasure {
    pub fn zero(dom: &GridDomain) -> Self {
        DiscreteMeasure {
            cell_density: vec![0.0; dom.n_cells()],
            atoms: vec![],
            mutually_singular: true,
        }
    }

    pub fn validate(&self, dom: &GridDomain) -> Result<(), GridError> {
        if self.cell_density.len() != dom.n_cells() {
            return Err(GridError::ShapeMismatch {
                expected: dom.n_cells(),
                got: self.cell_density.len(),
            });
        }
        if self.cell_density.iter().any(|v| !v.is_finite()) {
            return Err(GridError::NonFinite);
        }
        for a in &self.atoms {
            if a.edge >= dom.interior_edges().len() {
                return Err(GridError::InvalidMeasure(format!("atom on edge {} out of range", a.edge)));
            }
            if !(a.plus.is_finite() && a.minus.is_finite() && a.plus >= 0.0 && a.minus >= 0.0) {
                return Err(GridError::InvalidMeasure(format!("atom on edge {} needs finite nonnegative masses", a.edge)));
            }
            if self.mutually_singular && a.plus.min(a.minus) > 0.0 {
                return Err(GridError::InvalidMeasure(format!(
                    "atom on edge {} has both parts but the measure is flagged mutually singular",
                    a.edge
                )));
            }
        }
        Ok(())
    }

    pub fn add_atom(&mut self, edge: usize, plus: f64, minus: f64) {
        if plus.min(minus) > 0.0 {
            self.mutually_singular = false;
        }
        self.atoms.push(EdgeAtom { edge, plus, minus });
    }

    pub fn scaled(&self, t: f64) -> Self {
        DiscreteMeasure {
            cell_density: self.cell_density.iter().map(|v| v * t).collect(),
            atoms: self
                .atoms
                .iter()
                .map(|a| EdgeAtom {
                    edge: a.edge,
                    plus: a.plus * t,
                    minus: a.minus * t,
                })
                .collect(),
            mutually_singular: self.mutually_singular,
        }
    }

    /// Swaps the Jordan parts.
    pub fn negated(&self) -> Self {
        DiscreteMeasure {
            cell_density: self.cell_density.iter().map(|v| -v).collect(),
            atoms: self
                .atoms
                .iter()
                .map(|a| EdgeAtom {
                    edge: a.edge,
                    plus: a.minus,
                    minus: a.plus,
                })
                .collect(),
            mutually_singular: self.mutually_singular,
        }
    }

    /// `|mu_+| + |mu_-|`.
    pub fn total_variation(&self, dom: &GridDomain) -> f64 {
        let v = dom.cell_volume();
        self.cell_density.iter().map(|d| d.abs() * v).sum::<f64>()
            + self.atoms.iter().map(|a| a.plus + a.minus).sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.cell_density.iter().all(|&d| d == 0.0) && self.atoms.iter().all(|a| a.plus == 0.0 && a.minus == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representative {
    /// `m_+ min(w_i, w_j) - m_- max(w_i, w_j)`.
    LowerVsUpper,
    /// `(m_+ - m_-) (w_i + w_j) / 2`.
    Average,
    /// `m_+ max - m_- min`; the other extreme of the ordering.
    UpperVsLower,
}

/// `t_+ phi(dir) + t_- phi(-dir)` for a jump of size `t` along `dir`.
#[inline]
pub fn jump_cost(phi: &Integrand, x: Point, dir: Vec2, t: f64) -> f64 {
    if t > 0.0 {
        t * phi.eval(x, dir)
    } else if t < 0.0 {
        -t * phi.eval(x, neg(dir))
    } else {
        0.0
    }
}

/// Discrete `TV_phi^{u0}`: interior jumps plus boundary jumps from the
/// datum into the domain along the inward normal.
pub fn tv_phi(w: &GridFunction, dom: &GridDomain, phi: &Integrand) -> f64 {
    let h = dom.edge_weight();
    let mut s = 0.0;
    for e in dom.interior_edges() {
        s += jump_cost(phi, e.mid, e.dir, w.values[e.j] - w.values[e.i]);
    }
    for (k, b) in dom.boundary_edges().iter().enumerate() {
        s += jump_cost(phi, b.mid, b.normal, w.values[b.cell] - w.datum[k]);
    }
    h * s
}

/// Interior part of [`tv_phi`] only.
pub fn tv_interior(w: &GridFunction, dom: &GridDomain, phi: &Integrand) -> f64 {
    let h = dom.edge_weight();
    h * dom
        .interior_edges()
        .iter()
        .map(|e| jump_cost(phi, e.mid, e.dir, w.values[e.j] - w.values[e.i]))
        .sum::<f64>()
}

pub fn measure_pairing(w: &GridFunction, mu: &DiscreteMeasure, dom: &GridDomain, rep: Representative) -> f64 {
    let v = dom.cell_volume();
    let mut s: f64 = mu.cell_density.iter().zip(&w.values).map(|(d, x)| v * d * x).sum();
    for a in &mu.atoms {
        let e = &dom.interior_edges()[a.edge];
        let (wi, wj) = (w.values[e.i], w.values[e.j]);
        let (lo, hi) = (wi.min(wj), wi.max(wj));
        s += match rep {
            Representative::LowerVsUpper => a.plus * lo - a.minus * hi,
            Representative::Average => (a.plus - a.minus) * 0.5 * (wi + wj),
            Representative::UpperVsLower => a.plus * hi - a.minus * lo,
        };
    }
    s
}

/// `Phi^[w] = TV_phi^{u0}[w] + int w^- d mu_+ - int w^+ d mu_-`.
pub fn phi_hat(w: &GridFunction, dom: &GridDomain, phi: &Integrand, mu: &DiscreteMeasure) -> f64 {
    tv_phi(w, dom, phi) + measure_pairing(w, mu, dom, Representative::LowerVsUpper)
}

/// `Phi[w] = TV_phi^{u0}[w] + int w* d(mu_+ - mu_-)`.
pub fn phi_avg(w: &GridFunction, dom: &GridDomain, phi: &Integrand, mu: &DiscreteMeasure) -> f64 {
    tv_phi(w, dom, phi) + measure_pairing(w, mu, dom, Representative::Average)
}

/// Clamps values and datum to `[-m, m]`.
pub fn truncate(w: &GridFunction, m: f64) -> GridFunction {
    w.map(|v| v.clamp(-m, m))
}

/// `P_phi({w > t})` on the grid, the datum set `{u0 > t}` playing the
/// outside.
pub fn level_perimeter(dom: &GridDomain, phi: &Integrand, inside: &[bool], datum_inside: &[bool]) -> f64 {
    let h = dom.edge_weight();
    let mut s = 0.0;
    for e in dom.interior_edges() {
        match (inside[e.i], inside[e.j]) {
            (false, true) => s += phi.eval(e.mid, e.dir),
            (true, false) => s += phi.eval(e.mid, neg(e.dir)),
            _ => {}
        }
    }
    for (k, b) in dom.boundary_edges().iter().enumerate() {
        match (datum_inside[k], inside[b.cell]) {
            (false, true) => s += phi.eval(b.mid, b.normal),
            (true, false) => s += phi.eval(b.mid, neg(b.normal)),
            _ => {}
        }
    }
    h * s
}

/// `P_phi(A)` of a pixel set with empty outside datum.
pub fn set_perimeter(dom: &GridDomain, phi: &Integrand, inside: &[bool]) -> f64 {
    level_perimeter(dom, phi, inside, &vec![false; dom.boundary_edges().len()])
}

/// `int P_phi({w > t}) dt` summed exactly over the gaps between the
/// distinct values of `w` and the datum.
pub fn coarea_tv(w: &GridFunction, dom: &GridDomain, phi: &Integrand) -> f64 {
    let mut levels: Vec<f64> = w.values.iter().chain(&w.datum).copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let mut inside = vec![false; w.values.len()];
    let mut dinside = vec![false; w.datum.len()];
    let mut total = 0.0;
    for pair in levels.windows(2) {
        let t = pair[0];
        for (f, v) in inside.iter_mut().zip(&w.values) {
            *f = *v > t;
        }
        for (f, v) in dinside.iter_mut().zip(&w.datum) {
            *f = *v > t;
        }
        total += (pair[1] - pair[0]) * level_perimeter(dom, phi, &inside, &dinside);
    }
    total
}
