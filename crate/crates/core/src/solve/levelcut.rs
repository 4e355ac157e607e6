//! Exact minimization of `TV^{u0} + <c, w>` by its level sets.
//!
//! By coarea, `{w > t}` minimizes a cut functional that only changes when
//! `t` crosses a datum value, and the minimal minimizers shrink as `t`
//! grows. Splitting the breakpoints in halves and fixing the cells already
//! decided needs about `log2 K` full-size max-flows for `K` datum values.

use crate::maxflow::FlowGraph;
use crate::pdhg::{Problem, NO_CELL};

const UNSET: u32 = u32::MAX;

struct Adjacency {
    /// `(other, cost if self in and other out, cost if self out and other in)`.
    pairs: Vec<Vec<(u32, f64, f64)>>,
    /// `(breakpoint index of the datum, a, b)`: `a` is paid inside levels at
    /// or above the datum, `b` outside levels below it.
    bnd: Vec<Vec<(usize, f64, f64)>>,
}

fn adjacency(pb: &Problem, ds: &[f64]) -> Adjacency {
    let mut pairs = vec![vec![]; pb.n];
    let mut bnd = vec![vec![]; pb.n];
    for r in &pb.rows {
        let (a, b) = (r.phi, -r.plo);
        let i = r.i as usize;
        if r.j == NO_CELL {
            let k = ds.partition_point(|&x| x < r.d);
            bnd[i].push((k, a, b));
        } else {
            // t = w_j - w_i: a when only j is in, b when only i is in
            pairs[i].push((r.j, b, a));
            pairs[r.j as usize].push((r.i, a, b));
        }
    }
    Adjacency { pairs, bnd }
}

/// Exact minimizer over the datum range and the number of max-flows run.
/// Assumes the recession value is nonnegative, so the box is not binding.
pub(crate) fn solve(pb: &Problem) -> (Vec<f64>, usize) {
    let n = pb.n;
    let mut ds: Vec<f64> = pb.rows.iter().filter(|r| r.j == NO_CELL).map(|r| r.d).collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    if ds.is_empty() {
        ds.push(0.0);
    }
    let adj = adjacency(pb, &ds);
    let top = ds.len() as isize - 2;
    // cell i lies in every level below lo[i] and in none above hi[i]
    let mut lo = vec![0isize; n];
    let mut hi = vec![top; n];
    let mut w = vec![ds[0]; n];
    let mut local = vec![UNSET; n];
    let mut cuts = 0;
    let mut stack: Vec<(isize, isize, Vec<u32>)> = vec![(0, top, (0..n as u32).collect())];
    while let Some((k_lo, k_hi, cells)) = stack.pop() {
        if cells.is_empty() {
            continue;
        }
        if k_lo > k_hi {
            for &i in &cells {
                w[i as usize] = ds[k_lo as usize];
            }
            continue;
        }
        let mid = (k_lo + k_hi) / 2;
        let m = cells.len();
        for (li, &i) in cells.iter().enumerate() {
            local[i as usize] = li as u32;
        }
        let (s, t) = (m, m + 1);
        let mut g = FlowGraph::with_capacity(m + 2, 3 * m);
        for (li, &i) in cells.iter().enumerate() {
            let i = i as usize;
            let mut cin = pb.c[i];
            let mut cout = 0.0;
            for &(k, a, b) in &adj.bnd[i] {
                if k as isize <= mid {
                    cin += a;
                } else {
                    cout += b;
                }
            }
            for &(j, in_out, out_in) in &adj.pairs[i] {
                let j = j as usize;
                let lj = local[j];
                if lj != UNSET {
                    if (lj as usize) > li {
                        g.add(li, lj as usize, in_out, out_in);
                    }
                } else if lo[j] > mid {
                    cout += out_in;
                } else {
                    debug_assert!(hi[j] < mid);
                    cin += in_out;
                }
            }
            let d = cin - cout;
            if d > 0.0 {
                g.add(li, t, d, 0.0);
            } else if d < 0.0 {
                g.add(s, li, -d, 0.0);
            }
        }
        g.max_flow(s, t);
        cuts += 1;
        let side = g.source_side(s);
        let (mut up, mut down) = (Vec::new(), Vec::new());
        for (li, &i) in cells.iter().enumerate() {
            local[i as usize] = UNSET;
            if side[li] {
                lo[i as usize] = mid + 1;
                up.push(i);
            } else {
                hi[i as usize] = mid - 1;
                down.push(i);
            }
        }
        stack.push((k_lo, mid - 1, down));
        stack.push((mid + 1, k_hi, up));
    }
    (w, cuts)
}

/// `min_{|v| <= 1} TV_0(v) + <c, v>` attained at `0`, `1_E` or `-1_E`;
/// returns the value and the minimizing `v`.
pub(crate) fn recession(pb: &Problem) -> (f64, Vec<f64>) {
    let n = pb.n;
    let mut best = (0.0, vec![0.0; n]);
    for sign in [1.0, -1.0] {
        let (s, t) = (n, n + 1);
        let mut g = FlowGraph::with_capacity(n + 2, pb.rows.len() + n);
        let mut unary: Vec<f64> = pb.c.iter().map(|x| sign * x).collect();
        for r in &pb.rows {
            let (a, b) = (r.phi, -r.plo);
            // v = sign 1_E flips which orientation each jump takes
            let (a, b) = if sign > 0.0 { (a, b) } else { (b, a) };
            if r.j == NO_CELL {
                unary[r.i as usize] += a;
            } else {
                g.add(r.i as usize, r.j as usize, b, a);
            }
        }
        for (i, &d) in unary.iter().enumerate() {
            if d > 0.0 {
                g.add(i, t, d, 0.0);
            } else if d < 0.0 {
                g.add(s, i, -d, 0.0);
            }
        }
        g.max_flow(s, t);
        let side = g.source_side(s);
        let v: Vec<f64> = (0..n).map(|i| if side[i] { sign } else { 0.0 }).collect();
        let val = pb.primal(&v);
        if val < best.0 {
            best = (val, v);
        }
    }
    best
}
