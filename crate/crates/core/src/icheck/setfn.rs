use super::Direction;
use crate::grid::{DiscreteMeasure, GridDomain};
use crate::integrand::Integrand;
use crate::vec2::neg;

#[derive(Debug, Clone, Copy)]
struct EdgeTerm {
    i: u32,
    /// `u32::MAX` for boundary edges; then only `per_i` is used.
    j: u32,
    attract: f64,
    repel: f64,
    /// Perimeter weight when only `i` (resp. only `j`) is in the set.
    per_i: f64,
    per_j: f64,
}

const NONE: u32 = u32::MAX;

impl EdgeTerm {
    /// `(numerator, perimeter)` contribution for the given membership.
    #[inline]
    fn eval(&self, a: bool, b: bool) -> (f64, f64) {
        if self.j == NONE {
            return if a { (0.0, self.per_i) } else { (0.0, 0.0) };
        }
        let mut n = 0.0;
        if a || b {
            n += self.attract;
        }
        if a && b {
            n -= self.repel;
        }
        let p = match (a, b) {
            (true, false) => self.per_i,
            (false, true) => self.per_j,
            _ => 0.0,
        };
        (n, p)
    }
}

/// Pixel-set functional `N(A) = att(A+) - rep(A1) - load(A)` together with
/// the set's perimeter, in one orientation.
#[derive(Debug, Clone)]
pub(crate) struct SetFunctional {
    terms: Vec<EdgeTerm>,
    load: Vec<f64>,
    adj_off: Vec<u32>,
    adj: Vec<u32>,
}

impl SetFunctional {
    pub fn new(dom: &GridDomain, phi: &Integrand, mu: &DiscreteMeasure, dir: Direction) -> Self {
        let w = dom.edge_weight();
        let vol = dom.cell_volume();
        let n = dom.n_cells();
        let mirrored = dir == Direction::Mirrored;
        let mut terms: Vec<EdgeTerm> = dom
            .interior_edges()
            .iter()
            .map(|e| {
                // gradient of the indicator points into the set
                let (into_i, into_j) = (w * phi.eval(e.mid, neg(e.dir)), w * phi.eval(e.mid, e.dir));
                let (per_i, per_j) = if mirrored { (into_j, into_i) } else { (into_i, into_j) };
                EdgeTerm {
                    i: e.i as u32,
                    j: e.j as u32,
                    attract: 0.0,
                    repel: 0.0,
                    per_i,
                    per_j,
                }
            })
            .collect();
        for a in &mu.atoms {
            let t = &mut terms[a.edge];
            if mirrored {
                t.attract += a.plus;
                t.repel += a.minus;
            } else {
                t.attract += a.minus;
                t.repel += a.plus;
            }
        }
        for b in dom.boundary_edges() {
            let nrm = if mirrored { neg(b.normal) } else { b.normal };
            terms.push(EdgeTerm {
                i: b.cell as u32,
                j: NONE,
                attract: 0.0,
                repel: 0.0,
                per_i: w * phi.eval(b.mid, nrm),
                per_j: 0.0,
            });
        }
        let sgn = if mirrored { -1.0 } else { 1.0 };
        let load = mu.cell_density.iter().map(|d| sgn * vol * d).collect();

        let mut deg = vec![0u32; n + 1];
        for t in &terms {
            deg[t.i as usize + 1] += 1;
            if t.j != NONE {
                deg[t.j as usize + 1] += 1;
            }
        }
        for k in 0..n {
            deg[k + 1] += deg[k];
        }
        let mut fill = deg.clone();
        let mut adj = vec![0u32; deg[n] as usize];
        for (e, t) in terms.iter().enumerate() {
            adj[fill[t.i as usize] as usize] = e as u32;
            fill[t.i as usize] += 1;
            if t.j != NONE {
                adj[fill[t.j as usize] as usize] = e as u32;
                fill[t.j as usize] += 1;
            }
        }
        SetFunctional {
            terms,
            load,
            adj_off: deg,
            adj,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.load.len()
    }

    /// `(N(A), P(A))` from scratch.
    pub fn eval(&self, inside: &[bool]) -> (f64, f64) {
        let mut n = 0.0;
        let mut p = 0.0;
        for t in &self.terms {
            let b = t.j != NONE && inside[t.j as usize];
            let (dn, dp) = t.eval(inside[t.i as usize], b);
            n += dn;
            p += dp;
        }
        for (k, l) in self.load.iter().enumerate() {
            if inside[k] {
                n -= l;
            }
        }
        (n, p)
    }

    /// Change of `(N, P)` when cell `k` is toggled.
    #[inline]
    pub fn flip_delta(&self, inside: &[bool], k: usize) -> (f64, f64) {
        let mut dn = if inside[k] { self.load[k] } else { -self.load[k] };
        let mut dp = 0.0;
        for &e in &self.adj[self.adj_off[k] as usize..self.adj_off[k + 1] as usize] {
            let t = &self.terms[e as usize];
            let a = inside[t.i as usize];
            let b = t.j != NONE && inside[t.j as usize];
            let (n0, p0) = t.eval(a, b);
            let (n1, p1) = if t.i as usize == k { t.eval(!a, b) } else { t.eval(a, !b) };
            dn += n1 - n0;
            dp += p1 - p0;
        }
        (dn, dp)
    }

    /// 4-neighbors of `k`.
    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[self.adj_off[k] as usize..self.adj_off[k + 1] as usize]
            .iter()
            .filter_map(move |&e| {
                let t = &self.terms[e as usize];
                if t.j == NONE {
                    None
                } else if t.i as usize == k {
                    Some(t.j as usize)
                } else {
                    Some(t.i as usize)
                }
            })
    }

    /// Best ratio `N/P` among the prefixes of `order`. Returns
    /// `(ratio, prefix length)`.
    pub fn best_prefix(&self, order: &[usize]) -> (f64, usize) {
        let mut inside = vec![false; self.n_cells()];
        let (mut n, mut p) = (0.0, 0.0);
        let mut best = (f64::NEG_INFINITY, 0);
        for (len, &k) in order.iter().enumerate() {
            let (dn, dp) = self.flip_delta(&inside, k);
            inside[k] = true;
            n += dn;
            p += dp;
            if p > 0.0 && n / p > best.0 {
                best = (n / p, len + 1);
            }
        }
        best
    }
}
