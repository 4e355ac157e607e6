//! Isoperimetric-condition verifiers on grids: exhaustive or annealed
//! subset search, a certified dual-norm bracket, and a sign-unrestricted
//! functional inequality used as a cross-check.

mod brute;
mod dual;
mod setfn;

use serde::{Deserialize, Serialize};

use crate::grid::{measure_pairing, tv_phi, DiscreteMeasure, GridDomain, GridError, GridFunction, Representative};
use crate::integrand::Integrand;

pub use brute::MAX_EXHAUSTIVE;
pub use dual::{dual_norm, DualConfig, DualNorm};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IcError {
    #[error("exhaustive search is limited to {max} cells, domain has {cells}")]
    TooLargeForExhaustive { cells: usize, max: usize },
    #[error("dual norm not converged: bracket [{lower}, {upper}] after {iterations} iterations")]
    NotConverged { lower: f64, upper: f64, iterations: usize },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Forward tests `(mu_-, mu_+)` against `phi`; mirrored tests
/// `(mu_+, mu_-)` against `phi(x, -xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Mirrored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallVolume {
    pub eps: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Exhaustive up to [`MAX_EXHAUSTIVE`] cells, annealing beyond.
    #[default]
    Auto,
    Exhaustive,
    Anneal,
}

#[derive(Debug, Clone)]
pub struct IcQuery {
    pub measure: DiscreteMeasure,
    pub integrand: Integrand,
    pub c: f64,
    pub direction: Direction,
    pub small_volume: Option<SmallVolume>,
    pub seed: u64,
}

impl IcQuery {
    pub fn new(measure: DiscreteMeasure, integrand: Integrand, c: f64) -> Self {
        IcQuery {
            measure,
            integrand,
            c,
            direction: Direction::Forward,
            small_volume: None,
            seed: 0,
        }
    }

    pub fn direction(mut self, d: Direction) -> Self {
        self.direction = d;
        self
    }

    fn validate(&self, dom: &GridDomain) -> Result<(), IcError> {
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(IcError::InvalidQuery(format!("constant must be finite and >= 0, got {}", self.c)));
        }
        if let Some(sv) = self.small_volume {
            if !(sv.delta > 0.0) || !sv.eps.is_finite() {
                return Err(IcError::InvalidQuery("small-volume mode needs delta > 0 and finite eps".into()));
            }
        }
        self.measure.validate(dom)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcReport {
    pub verdict: Verdict,
    pub direction: Direction,
    pub constant: f64,
    pub mode: String,
    /// Cells of the worst set found (empty set when nothing scores above 0).
    pub worst_set: Vec<usize>,
    /// `max(0, best score)`; the empty set always scores 0.
    pub worst_score: f64,
    pub best_nonempty_score: Option<f64>,
    /// True when `worst_score` is the exact maximum.
    pub exact: bool,
    pub dual_norm_estimate: Option<DualNorm>,
    pub singular_pair_required_for_1a: bool,
}

/// Maximizes `mu(A+) - nu(A1) - C P_phi(A)` over pixel sets, with the
/// measure roles and the integrand set by the query direction.
pub fn brute_force_ic(query: &IcQuery, dom: &GridDomain, mode: SearchMode) -> Result<IcReport, IcError> {
    query.validate(dom)?;
    let f = setfn::SetFunctional::new(dom, &query.integrand, &query.measure, query.direction);
    let vol = dom.cell_volume();
    let exhaustive = match mode {
        SearchMode::Exhaustive => true,
        SearchMode::Anneal => false,
        SearchMode::Auto => dom.n_cells() <= MAX_EXHAUSTIVE,
    };
    let res = if exhaustive {
        brute::exhaustive(&f, query.c, query.small_volume, vol)?
    } else {
        brute::anneal(&f, query.c, query.small_volume, vol, query.seed, 10)
    };
    let scale = 1.0 + query.measure.total_variation(dom);
    let threshold = query.small_volume.map_or(0.0, |s| s.eps) + 1e-12 * scale;
    let best = res.as_ref().map(|r| r.score);
    let violated = best.is_some_and(|s| s > threshold);
    let verdict = if violated {
        Verdict::Violated
    } else if exhaustive {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    let (worst_set, worst_score) = match &res {
        Some(r) if r.score > 0.0 => (r.set.clone(), r.score),
        _ => (vec![], 0.0),
    };
    Ok(IcReport {
        verdict,
        direction: query.direction,
        constant: query.c,
        mode: if exhaustive { "exhaustive" } else { "anneal" }.into(),
        worst_set,
        worst_score,
        best_nonempty_score: best,
        exact: exhaustive,
        dual_norm_estimate: None,
        singular_pair_required_for_1a: !query.measure.mutually_singular,
    })
}

/// Verdict from a dual-norm bracket, abstaining within 0.1% of `c`.
pub fn dual_verdict(dn: &DualNorm, c: f64) -> Verdict {
    let band = 1e-3 * c;
    if dn.lower > c + band + 1e-12 {
        Verdict::Violated
    } else if dn.upper < c - band {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    }
}

/// Dual route: both orientations at once, as the sup over signed `v`
/// covers `1_A` and `-1_A`.
pub fn dual_ic(query: &IcQuery, dom: &GridDomain, cfg: &DualConfig) -> Result<IcReport, IcError> {
    query.validate(dom)?;
    let dn = dual_norm(dom, &query.integrand, &query.measure, cfg)?;
    let verdict = dual_verdict(&dn, query.c);
    let f = setfn::SetFunctional::new(dom, &query.integrand, &query.measure, dn.worst_direction);
    let mut inside = vec![false; dom.n_cells()];
    for &k in &dn.worst_set {
        inside[k] = true;
    }
    let (num, per) = f.eval(&inside);
    let score = if dn.worst_set.is_empty() { 0.0 } else { num - query.c * per };
    Ok(IcReport {
        verdict,
        direction: dn.worst_direction,
        constant: query.c,
        mode: "dual".into(),
        worst_set: if score > 0.0 { dn.worst_set.clone() } else { vec![] },
        worst_score: score.max(0.0),
        best_nonempty_score: (!dn.worst_set.is_empty()).then_some(score),
        exact: false,
        singular_pair_required_for_1a: dn.singular_pair_required_for_1a,
        dual_norm_estimate: Some(dn),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalCheck {
    /// `max_v (pairing(v) - C TV_0(v))` over the samples.
    pub max_violation: f64,
    pub worst_sample: Option<usize>,
    pub samples: usize,
    /// A violation beyond tolerance while the query was reported holding.
    pub inconsistent: bool,
}

/// `int v^+ d mu_- ... <= C TV_0(v)` in sign-unrestricted form: the
/// pairing takes `max` on `mu_-` atoms and `min` on `mu_+` atoms, and the
/// datum is zero.
pub fn global_inequality_check(samples: &[Vec<f64>], query: &IcQuery, dom: &GridDomain, reported: Verdict) -> GlobalCheck {
    let zero = vec![0.0; dom.boundary_edges().len()];
    let mut worst = (f64::NEG_INFINITY, None);
    for (k, v) in samples.iter().enumerate() {
        let w = GridFunction {
            values: v.clone(),
            datum: zero.clone(),
        };
        // -pairing_{lower vs upper} = m_- max - m_+ min - <rho, v>
        let lhs = -measure_pairing(&w, &query.measure, dom, Representative::LowerVsUpper);
        let s = lhs - query.c * tv_phi(&w, dom, &query.integrand);
        if s > worst.0 {
            worst = (s, Some(k));
        }
    }
    let scale = 1.0 + query.measure.total_variation(dom);
    let max_violation = if samples.is_empty() { 0.0 } else { worst.0 };
    GlobalCheck {
        max_violation,
        worst_sample: worst.1,
        samples: samples.len(),
        inconsistent: reported == Verdict::Holds && max_violation > 1e-9 * scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cells(mass: f64) -> (GridDomain, IcQuery) {
        let d = GridDomain::rect(2, 1, 1.0, [0.0, 0.0]);
        let mut mu = DiscreteMeasure::zero(&d);
        mu.add_atom(0, 0.0, mass);
        (d, IcQuery::new(mu, Integrand::isotropic(), 1.0))
    }

    #[test]
    fn two_cell_enumeration() {
        // A = one cell: 3 - 4; A = both: 0 - 6 (the atom sits inside A1 only
        // for the repelling part)
        let (d, q) = two_cells(3.0);
        let r = brute_force_ic(&q, &d, SearchMode::Exhaustive).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.worst_score, 0.0);
        assert!((r.best_nonempty_score.unwrap() + 1.0).abs() < 1e-12);

        let (d, q) = two_cells(5.0);
        let r = brute_force_ic(&q, &d, SearchMode::Exhaustive).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!((r.worst_score - 1.0).abs() < 1e-12);
        assert_eq!(r.worst_set.len(), 1);
    }

    #[test]
    fn zero_measure_holds() {
        let d = GridDomain::rect(3, 3, 1.0, [0.0, 0.0]);
        let q = IcQuery::new(DiscreteMeasure::zero(&d), Integrand::isotropic(), 1.0);
        let r = brute_force_ic(&q, &d, SearchMode::Auto).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.worst_score, 0.0);
        let dn = dual_norm(&d, &q.integrand, &q.measure, &DualConfig::default()).unwrap();
        assert_eq!(dn.value, 0.0);
    }

    #[test]
    fn exhaustive_refuses_large() {
        let d = GridDomain::rect(5, 5, 1.0, [0.0, 0.0]);
        let q = IcQuery::new(DiscreteMeasure::zero(&d), Integrand::isotropic(), 1.0);
        assert!(matches!(
            brute_force_ic(&q, &d, SearchMode::Exhaustive),
            Err(IcError::TooLargeForExhaustive { cells: 25, .. })
        ));
    }

    #[test]
    fn anneal_finds_planted_violation() {
        let d = GridDomain::rect(8, 8, 1.0, [0.0, 0.0]);
        let mut mu = DiscreteMeasure::zero(&d);
        mu.cell_density[27] = -10.0;
        let mut q = IcQuery::new(mu, Integrand::isotropic(), 1.0);
        q.seed = 7;
        let r = brute_force_ic(&q, &d, SearchMode::Anneal).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!((r.worst_score - 6.0).abs() < 1e-12);
    }

    #[test]
    fn single_atom_dual_norm() {
        // both one-cell sets give m / 4 on a large grid
        let d = GridDomain::rect(6, 6, 1.0, [0.0, 0.0]);
        let mut mu = DiscreteMeasure::zero(&d);
        let e = d.edge_between(d.cell_at(2, 2).unwrap(), d.cell_at(3, 2).unwrap()).unwrap();
        mu.add_atom(e, 0.0, 2.0);
        let dn = dual_norm(&d, &Integrand::isotropic(), &mu, &DualConfig::default()).unwrap();
        assert!(dn.converged, "{dn:?}");
        assert!((dn.lower - 0.5).abs() < 1e-9, "{dn:?}");
    }
}
