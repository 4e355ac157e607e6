//! Minimizers of the discrete functionals: `Phi` (convex: TV plus the
//! averaged linear pairing) by PDHG, `Phi^` by difference-of-convex rounds,
//! and an exhaustive oracle for tiny grids.

mod levelcut;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::grid::{phi_avg, phi_hat, DiscreteMeasure, GridDomain, GridError, GridFunction};
use crate::icheck::{brute_force_ic, Direction, IcQuery, SearchMode, Verdict};
use crate::integrand::Integrand;
use crate::pdhg::{tv_rows, PdhgConfig, PdhgResult, Problem};

pub use oracle::{oracle_minimize, value_grid, OracleResult, ORACLE_MAX_CELLS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("solver did not converge: gap {gap:.3e} after {iterations} iterations")]
    NotConverged {
        gap: f64,
        iterations: usize,
        report: Box<SolveReport>,
    },
    #[error("functional unbounded below: value {value:.3e} reached at step {step}")]
    UnboundedDetected { value: f64, step: f64 },
    #[error("exhaustive oracle limited to {max} cells and {budget} nodes, instance needs {cells} cells, {nodes} nodes")]
    TooLarge { cells: usize, max: usize, nodes: f64, budget: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Solver for the convex subproblems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Preconditioned primal-dual iteration with a certified gap.
    #[default]
    Pdhg,
    /// Exact level-set decomposition into max-flow problems.
    LevelCut,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub method: Method,
    pub max_iters: usize,
    pub tol_primal_dual: f64,
    pub dc_max_rounds: usize,
    pub quantization_step: f64,
    pub seed: u64,
    /// Keep PDHG iterates every this many iterations; 0 disables.
    pub snapshot_stride: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            method: Method::Pdhg,
            max_iters: 200_000,
            tol_primal_dual: 1e-6,
            dc_max_rounds: 50,
            quantization_step: 1.0 / 32.0,
            seed: 0,
            snapshot_stride: 0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.tol_primal_dual > 0.0) || !(self.quantization_step > 0.0) {
            return Err(SolveError::InvalidConfig("tolerances and quantization step must be positive".into()));
        }
        if self.dc_max_rounds == 0 || self.max_iters == 0 {
            return Err(SolveError::InvalidConfig("dc_max_rounds and max_iters must be at least 1".into()));
        }
        Ok(())
    }

    fn pdhg(&self) -> PdhgConfig {
        PdhgConfig {
            max_iters: self.max_iters,
            tol: self.tol_primal_dual,
            abs_tol: 0.0,
            check_every: 64,
            snapshot_stride: self.snapshot_stride,
        }
    }
}

/// Atom count up to which `minimize_phi_hat` enumerates every majorant.
pub const PATTERN_SEARCH_MAX_ATOMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    Phi,
    PhiHat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub functional: Functional,
    pub minimizer: GridFunction,
    pub value: f64,
    /// Dual bound of the last convex solve (for `Phi`, a bound on the
    /// infimum over the value box).
    pub lower_bound: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Value after each accepted DC round, starting from the initializer.
    pub rounds: Vec<f64>,
    pub monotone: bool,
    /// All atom orientations were tried after the DC rounds.
    pub pattern_search: bool,
    /// `min_{|v|<=1} TV_0(v) + <c, v>`; negative means unbounded.
    pub recession: Option<f64>,
    pub trace: Vec<(usize, f64, f64)>,
    pub snapshots: Vec<(usize, Vec<f64>)>,
    pub oracle_gap: Option<f64>,
    pub warnings: Vec<String>,
}

/// Linear coefficients of the averaged pairing: `c_i = h^N rho_i` plus half
/// the net atom mass on each adjacent edge.
pub fn linear_load(dom: &GridDomain, mu: &DiscreteMeasure) -> Vec<f64> {
    let vol = dom.cell_volume();
    let mut c: Vec<f64> = mu.cell_density.iter().map(|d| vol * d).collect();
    for a in &mu.atoms {
        let e = &dom.interior_edges()[a.edge];
        c[e.i] += 0.5 * (a.plus - a.minus);
        c[e.j] += 0.5 * (a.plus - a.minus);
    }
    c
}

fn check_inputs(dom: &GridDomain, mu: &DiscreteMeasure, u0: &GridFunction, cfg: &SolveConfig) -> Result<(), SolveError> {
    cfg.validate()?;
    mu.validate(dom)?;
    GridFunction::new(dom, u0.values.clone(), u0.datum.clone())?;
    Ok(())
}

fn data_scale(dom: &GridDomain, mu: &DiscreteMeasure, u0: &GridFunction) -> f64 {
    mu.total_variation(dom) + u0.datum.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Follows `u0 + t v` until `value(t)` drops below `-1e6 (1 + |data|)`.
fn descend_ray(u0: &GridFunction, v: &[f64], scale: f64, value: impl Fn(&GridFunction) -> f64) -> SolveError {
    let floor = -1e6 * (1.0 + scale);
    let mut t = 1.0;
    let mut last = f64::INFINITY;
    for _ in 0..200 {
        let w = u0.with_values(u0.values.iter().zip(v).map(|(a, b)| a + t * b).collect());
        last = value(&w);
        if last < floor {
            break;
        }
        t *= 2.0;
    }
    SolveError::UnboundedDetected { value: last, step: t }
}

/// `min_{|v|<=1} TV_0(v) + <c, v>`, stopping once the sign is certain.
fn recession(dom: &GridDomain, phi: &Integrand, c: &[f64], cfg: &SolveConfig) -> (PdhgResult, f64) {
    let n = dom.n_cells();
    let pb = Problem {
        n,
        rows: tv_rows(dom, phi, None),
        c: c.to_vec(),
        lo: vec![-1.0; n],
        hi: vec![1.0; n],
    };
    let tol = 1e-7 * (1.0 + c.iter().map(|x| x.abs()).sum::<f64>());
    if cfg.method == Method::LevelCut {
        let (val, v) = levelcut::recession(&pb);
        return (exact(v, val, 2), 1e-12 * (1.0 + c.iter().map(|x| x.abs()).sum::<f64>()));
    }
    let stop = |pr: f64, du: f64, _: &[f64]| pr < -tol || du > -tol;
    let res = pb.solve(
        &PdhgConfig {
            tol: 0.0,
            snapshot_stride: 0,
            ..cfg.pdhg()
        },
        None,
        Some(&stop),
    );
    (res, tol)
}

/// An exactly solved subproblem in the shape of a PDHG result.
fn exact(v: Vec<f64>, value: f64, cuts: usize) -> PdhgResult {
    PdhgResult {
        v,
        p: vec![],
        primal: value,
        dual: value,
        iters: cuts,
        restarts: 0,
        converged: true,
        trace: vec![],
        snapshots: vec![],
    }
}

/// Solves `min TV_phi^{u0}(w) + <c, w>` over `min u0 <= w <= max u0`.
fn convex_solve(
    dom: &GridDomain,
    phi: &Integrand,
    c: Vec<f64>,
    u0: &GridFunction,
    warm: &[f64],
    cfg: &SolveConfig,
) -> PdhgResult {
    let n = dom.n_cells();
    let lo = u0.datum.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u0.datum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pb = Problem {
        n,
        rows: tv_rows(dom, phi, Some(&u0.datum)),
        c,
        lo: vec![lo; n],
        hi: vec![hi; n],
    };
    if cfg.method == Method::LevelCut {
        let (v, cuts) = levelcut::solve(&pb);
        let val = pb.primal(&v);
        return exact(v, val, cuts);
    }
    pb.solve(&cfg.pdhg(), Some((warm, &[])), None)
}

/// Minimizes `Phi = TV_phi^{u0} + int w* d(mu_+ - mu_-)`.
///
/// When the recession functional is nonnegative, truncation to the datum
/// range does not increase `Phi`, so the box-constrained problem is exact.
pub fn minimize_phi(
    dom: &GridDomain,
    phi: &Integrand,
    mu: &DiscreteMeasure,
    u0: &GridFunction,
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    check_inputs(dom, mu, u0, cfg)?;
    let c = linear_load(dom, mu);
    let scale = data_scale(dom, mu, u0);
    let mut warnings = vec![];
    let mut rec = None;
    if c.iter().any(|&x| x != 0.0) {
        let (r, tol) = recession(dom, phi, &c, cfg);
        if r.primal < -tol {
            return Err(descend_ray(u0, &r.v, scale, |w| phi_avg(w, dom, phi, mu)));
        }
        if r.dual <= -tol {
            warnings.push(format!(
                "recession sign not certified: bracket [{:.3e}, {:.3e}]",
                r.dual, r.primal
            ));
        }
        rec = Some(r.primal.min(0.0).max(r.dual));
    }
    let res = convex_solve(dom, phi, c, u0, &u0.values, cfg);
    let w = u0.with_values(res.v.clone());
    let value = phi_avg(&w, dom, phi, mu);
    let report = SolveReport {
        functional: Functional::Phi,
        minimizer: w,
        value,
        lower_bound: res.dual,
        gap: res.gap(),
        iterations: res.iters,
        converged: res.converged,
        rounds: vec![value],
        monotone: true,
        pattern_search: false,
        recession: rec,
        trace: res.trace,
        snapshots: res.snapshots,
        oracle_gap: None,
        warnings,
    };
    if !report.converged {
        return Err(SolveError::NotConverged {
            gap: report.gap,
            iterations: report.iterations,
            report: Box::new(report),
        });
    }
    Ok(report)
}

/// Linearization of the concave atom terms of `Phi^` at `w`. `signs`
/// optionally fixes the subgradient on tied atom edges (`+1`: the `j` cell
/// plays the max).
fn dc_load(dom: &GridDomain, mu: &DiscreteMeasure, w: &[f64], tie: f64, signs: &[(usize, f64)]) -> Vec<f64> {
    let vol = dom.cell_volume();
    let mut c: Vec<f64> = mu.cell_density.iter().map(|d| vol * d).collect();
    for (k, a) in mu.atoms.iter().enumerate() {
        let e = &dom.interior_edges()[a.edge];
        let d = w[e.j] - w[e.i];
        // weight of cell j in max(w_i, w_j)
        let tj = if d > tie {
            1.0
        } else if d < -tie {
            0.0
        } else {
            match signs.iter().find(|s| s.0 == k) {
                Some(&(_, s)) => 0.5 * (1.0 + s),
                None => 0.5,
            }
        };
        // m_+ min - m_- max
        c[e.i] += a.plus * tj - a.minus * (1.0 - tj);
        c[e.j] += a.plus * (1.0 - tj) - a.minus * tj;
    }
    c
}

/// Minimizes `Phi^ = TV_phi^{u0} + int w^- d mu_+ - int w^+ d mu_-` by
/// difference-of-convex rounds from the `Phi` minimizer. A round is kept
/// only if `Phi^` decreases; rounds stop once the descent is below 1e-9.
pub fn minimize_phi_hat(
    dom: &GridDomain,
    phi: &Integrand,
    mu: &DiscreteMeasure,
    u0: &GridFunction,
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    check_inputs(dom, mu, u0, cfg)?;
    let scale = data_scale(dom, mu, u0);
    let init = match minimize_phi(dom, phi, mu, u0, cfg) {
        Ok(r) => r,
        Err(SolveError::UnboundedDetected { .. }) => {
            // Phi^ <= Phi, so Phi^ is unbounded along the same ray
            let c = linear_load(dom, mu);
            let (r, _) = recession(dom, phi, &c, cfg);
            return Err(descend_ray(u0, &r.v, scale, |w| phi_hat(w, dom, phi, mu)));
        }
        Err(SolveError::NotConverged { report, .. }) => *report,
        Err(e) => return Err(e),
    };
    let mut warnings = init.warnings.clone();
    if !mu.atoms.is_empty() {
        // a positive IC score at constant 1 makes t 1_A a descent ray
        for dir in [Direction::Forward, Direction::Mirrored] {
            let mut q = IcQuery::new(mu.clone(), phi.clone(), 1.0).direction(dir);
            q.seed = cfg.seed;
            let r = brute_force_ic(&q, dom, SearchMode::Auto).map_err(|e| SolveError::InvalidConfig(e.to_string()))?;
            if r.verdict == Verdict::Violated {
                let sgn = if dir == Direction::Forward { 1.0 } else { -1.0 };
                let mut v = vec![0.0; dom.n_cells()];
                for &k in &r.worst_set {
                    v[k] = sgn;
                }
                return Err(descend_ray(u0, &v, scale, |w| phi_hat(w, dom, phi, mu)));
            }
        }
    }

    let mut w = init.minimizer.clone();
    let mut value = phi_hat(&w, dom, phi, mu);
    let mut rounds = vec![value];
    let mut iterations = init.iterations;
    let mut trace = init.trace.clone();
    let mut snapshots = init.snapshots.clone();
    let (mut last_gap, mut last_dual, mut converged) = (init.gap, init.lower_bound, init.converged);
    let range = u0.datum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tie = 1e-7 * (1.0 + range);
    for _ in 0..cfg.dc_max_rounds {
        let mut best: Option<(f64, PdhgResult)> = None;
        // averaged ties first, then the two uniform tie orientations
        for signs in tie_patterns(dom, mu, &w.values, tie) {
            let c = dc_load(dom, mu, &w.values, tie, &signs);
            let res = convex_solve(dom, phi, c, u0, &w.values, cfg);
            iterations += res.iters;
            let cand = phi_hat(&w.with_values(res.v.clone()), dom, phi, mu);
            if cand < value - 1e-9 && best.as_ref().is_none_or(|b| cand < b.0) {
                best = Some((cand, res));
                break;
            }
        }
        let Some((cand, res)) = best else { break };
        last_gap = res.gap();
        last_dual = res.dual;
        converged = res.converged;
        trace.extend(res.trace.iter().map(|&(i, p, d)| (i + iterations, p, d)));
        snapshots.extend(res.snapshots);
        w = w.with_values(res.v);
        value = cand;
        rounds.push(value);
    }
    // every subproblem above is one of the convex majorants fixing which
    // endpoint plays the max on each atom edge; with few atoms all of them
    // are tried
    let mut pattern_search = false;
    let k = mu.atoms.len();
    if k > 0 && k <= PATTERN_SEARCH_MAX_ATOMS {
        pattern_search = true;
        for pattern in 0u32..1 << k {
            let signs: Vec<(usize, f64)> = (0..k).map(|a| (a, if pattern >> a & 1 == 1 { 1.0 } else { -1.0 })).collect();
            let c = dc_load(dom, mu, &w.values, f64::INFINITY, &signs);
            let res = convex_solve(dom, phi, c, u0, &w.values, cfg);
            iterations += res.iters;
            let cand = phi_hat(&w.with_values(res.v.clone()), dom, phi, mu);
            if cand < value - 1e-9 {
                last_gap = res.gap();
                last_dual = res.dual;
                converged = res.converged;
                w = w.with_values(res.v);
                value = cand;
                rounds.push(value);
            }
        }
    }
    if !converged {
        warnings.push(format!("last convex subproblem stopped with gap {last_gap:.3e}"));
    }
    let monotone = rounds.windows(2).all(|p| p[1] <= p[0]);
    Ok(SolveReport {
        functional: Functional::PhiHat,
        minimizer: w,
        value,
        lower_bound: last_dual,
        gap: last_gap,
        iterations,
        converged,
        rounds,
        monotone,
        pattern_search,
        recession: init.recession,
        trace,
        snapshots,
        oracle_gap: None,
        warnings,
    })
}

fn tie_patterns(dom: &GridDomain, mu: &DiscreteMeasure, w: &[f64], tie: f64) -> Vec<Vec<(usize, f64)>> {
    let tied: Vec<usize> = mu
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| {
            let e = &dom.interior_edges()[a.edge];
            a.plus + a.minus > 0.0 && (w[e.j] - w[e.i]).abs() <= tie
        })
        .map(|(k, _)| k)
        .collect();
    let mut out = vec![vec![]];
    if !tied.is_empty() {
        out.push(tied.iter().map(|&k| (k, 1.0)).collect());
        out.push(tied.iter().map(|&k| (k, -1.0)).collect());
    }
    out
}

/// Discrete optimal values of `Phi` and `Phi^` on the same data.
pub fn consistency_gap(
    dom: &GridDomain,
    phi: &Integrand,
    mu: &DiscreteMeasure,
    u0: &GridFunction,
    cfg: &SolveConfig,
) -> Result<(SolveReport, SolveReport), SolveError> {
    let a = minimize_phi(dom, phi, mu, u0, cfg)?;
    let b = minimize_phi_hat(dom, phi, mu, u0, cfg)?;
    Ok((a, b))
}
