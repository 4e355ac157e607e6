use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SolveError;
use crate::grid::{DiscreteMeasure, GridDomain, GridFunction};
use crate::integrand::Integrand;
use crate::vec2::neg;

pub const ORACLE_MAX_CELLS: usize = 9;
const NODE_BUDGET: f64 = 2e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub phi_value: f64,
    pub phi_argmin: Vec<f64>,
    pub phi_hat_value: f64,
    pub phi_hat_argmin: Vec<f64>,
    pub value_set: Vec<f64>,
    /// Both functionals are piecewise linear with breakpoints on
    /// `w_i = w_j` and `w_i = datum`; when every datum value is in the set,
    /// the box minimum sits on it.
    pub contains_breakpoints: bool,
    /// Lipschitz-in-values bound times the largest gap in the value set;
    /// 0 when `contains_breakpoints`.
    pub error_band: f64,
    pub nodes: f64,
}

/// Datum values, their pairwise midpoints, and the multiples of `step`
/// between the smallest and the largest.
pub fn value_grid(u0: &GridFunction, step: f64) -> Vec<f64> {
    let mut v: Vec<f64> = u0.datum.clone();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mids: Vec<f64> = v.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let mut out = v;
    out.extend(mids);
    let mut t = (lo / step).ceil() * step;
    while t < hi {
        out.push(t);
        t += step;
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    out
}

struct Local {
    /// `(other cell, edge weights a, b, m_plus, m_minus)` with `other < k`.
    back: Vec<Vec<(usize, f64, f64, f64, f64, bool)>>,
    /// `(datum, weight along normal, weight against)` per cell.
    bnd: Vec<Vec<(f64, f64, f64)>>,
    load: Vec<f64>,
}

/// Exhaustive minimization of `Phi` and `Phi^` over `value_set^cells`.
pub fn oracle_minimize(
    dom: &GridDomain,
    phi: &Integrand,
    mu: &DiscreteMeasure,
    u0: &GridFunction,
    value_set: &[f64],
) -> Result<OracleResult, SolveError> {
    mu.validate(dom)?;
    let n = dom.n_cells();
    let nv = value_set.len() as f64;
    let nodes: f64 = (1..=n as i32).map(|k| nv.powi(k)).sum();
    if n > ORACLE_MAX_CELLS || nodes > NODE_BUDGET || value_set.is_empty() {
        return Err(SolveError::TooLarge {
            cells: n,
            max: ORACLE_MAX_CELLS,
            nodes,
            budget: NODE_BUDGET,
        });
    }
    let w = dom.edge_weight();
    let vol = dom.cell_volume();
    let mut loc = Local {
        back: vec![vec![]; n],
        bnd: vec![vec![]; n],
        load: mu.cell_density.iter().map(|d| vol * d).collect(),
    };
    let mut masses = vec![(0.0, 0.0); dom.interior_edges().len()];
    for a in &mu.atoms {
        masses[a.edge].0 += a.plus;
        masses[a.edge].1 += a.minus;
    }
    for (k, e) in dom.interior_edges().iter().enumerate() {
        let a = w * phi.eval(e.mid, e.dir);
        let b = w * phi.eval(e.mid, neg(e.dir));
        let (mp, mm) = masses[k];
        // store on the later cell; `true` when that cell is j
        if e.i < e.j {
            loc.back[e.j].push((e.i, a, b, mp, mm, true));
        } else {
            loc.back[e.i].push((e.j, a, b, mp, mm, false));
        }
    }
    for (k, b) in dom.boundary_edges().iter().enumerate() {
        loc.bnd[b.cell].push((u0.datum[k], w * phi.eval(b.mid, b.normal), w * phi.eval(b.mid, neg(b.normal))));
    }

    let per_first: Vec<(f64, Vec<usize>, f64, Vec<usize>)> = (0..value_set.len())
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut best = (f64::INFINITY, vec![], f64::INFINITY, vec![]);
            let mut vals = vec![0.0; n];
            vals[0] = value_set[first];
            let (p0, h0) = cell_cost(&loc, 0, &vals);
            dfs(&loc, value_set, 1, &mut idx, &mut vals, p0, h0, &mut best);
            best
        })
        .collect();
    let mut best = (f64::INFINITY, vec![], f64::INFINITY, vec![]);
    for b in per_first {
        if b.0 < best.0 {
            best.0 = b.0;
            best.1 = b.1;
        }
        if b.2 < best.2 {
            best.2 = b.2;
            best.3 = b.3;
        }
    }
    let contains = u0
        .datum
        .iter()
        .all(|d| value_set.iter().any(|v| (v - d).abs() <= 1e-12 * (1.0 + d.abs())));
    let error_band = if contains {
        0.0
    } else {
        let gap = value_set.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
        let lip: f64 = loc.load.iter().map(|x| x.abs()).sum::<f64>()
            + loc.back.iter().flatten().map(|t| 2.0 * (t.1.max(t.2)) + t.3 + t.4).sum::<f64>()
            + loc.bnd.iter().flatten().map(|t| t.1.max(t.2)).sum::<f64>();
        lip * gap
    };
    let pick = |ix: &[usize]| ix.iter().map(|&i| value_set[i]).collect::<Vec<f64>>();
    Ok(OracleResult {
        phi_value: best.0,
        phi_argmin: pick(&best.1),
        phi_hat_value: best.2,
        phi_hat_argmin: pick(&best.3),
        value_set: value_set.to_vec(),
        contains_breakpoints: contains,
        error_band,
        nodes,
    })
}

/// Terms that become known once cell `k` is assigned: `(Phi, Phi^)`.
#[inline]
fn cell_cost(loc: &Local, k: usize, vals: &[f64]) -> (f64, f64) {
    let x = vals[k];
    let mut common = loc.load[k] * x;
    for &(d, a, b) in &loc.bnd[k] {
        let t = x - d;
        common += if t > 0.0 { a * t } else { -b * t };
    }
    let (mut p, mut h) = (common, common);
    for &(o, a, b, mp, mm, k_is_j) in &loc.back[k] {
        let y = vals[o];
        let t = if k_is_j { x - y } else { y - x };
        let tv = if t > 0.0 { a * t } else { -b * t };
        p += tv + 0.5 * (mp - mm) * (x + y);
        h += tv + mp * x.min(y) - mm * x.max(y);
    }
    (p, h)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    loc: &Local,
    set: &[f64],
    k: usize,
    idx: &mut [usize],
    vals: &mut [f64],
    p: f64,
    h: f64,
    best: &mut (f64, Vec<usize>, f64, Vec<usize>),
) {
    if k == idx.len() {
        if p < best.0 {
            best.0 = p;
            best.1 = idx.to_vec();
        }
        if h < best.2 {
            best.2 = h;
            best.3 = idx.to_vec();
        }
        return;
    }
    for (vi, &x) in set.iter().enumerate() {
        idx[k] = vi;
        vals[k] = x;
        let (dp, dh) = cell_cost(loc, k, vals);
        dfs(loc, set, k + 1, idx, vals, p + dp, h + dh, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{phi_avg, phi_hat};

    #[test]
    fn oracle_values_match_direct_evaluation() {
        let d = GridDomain::rect(2, 2, 0.5, [0.0, 0.0]);
        let mut mu = DiscreteMeasure::zero(&d);
        mu.add_atom(0, 0.3, 0.7);
        mu.cell_density[3] = -0.4;
        let u0 = GridFunction::sample(&d, |_| 0.0, |p| if p[0] > 0.5 { 1.0 } else { 0.0 });
        let set = value_grid(&u0, 0.25);
        let r = oracle_minimize(&d, &Integrand::quadrant(), &mu, &u0, &set).unwrap();
        let w = u0.with_values(r.phi_argmin.clone());
        assert!((phi_avg(&w, &d, &Integrand::quadrant(), &mu) - r.phi_value).abs() < 1e-12);
        let w = u0.with_values(r.phi_hat_argmin.clone());
        assert!((phi_hat(&w, &d, &Integrand::quadrant(), &mu) - r.phi_hat_value).abs() < 1e-12);
        assert!(r.phi_hat_value <= r.phi_value + 1e-12);
    }

    #[test]
    fn too_large_is_refused() {
        let d = GridDomain::rect(4, 3, 1.0, [0.0, 0.0]);
        let u0 = GridFunction::constant(&d, 0.0);
        let r = oracle_minimize(&d, &Integrand::isotropic(), &DiscreteMeasure::zero(&d), &u0, &[0.0, 1.0]);
        assert!(matches!(r, Err(SolveError::TooLarge { cells: 12, .. })));
    }
}
