use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::setfn::SetFunctional;
use super::{IcError, SmallVolume};

pub const MAX_EXHAUSTIVE: usize = 22;

#[derive(Debug, Clone)]
pub(crate) struct SearchResult {
    /// Best nonempty set and its score.
    pub set: Vec<usize>,
    pub score: f64,
}

fn cap(sv: Option<SmallVolume>, vol: f64) -> usize {
    match sv {
        // strict |A| < delta
        Some(s) => {
            let m = (s.delta / vol).ceil() as usize;
            m.saturating_sub(1)
        }
        None => usize::MAX,
    }
}

/// Exact maximizer of `N(A) - C P(A)` over nonempty pixel sets (with at
/// most `max_cells` cells), by Gray-code enumeration split across workers.
pub(crate) fn exhaustive(f: &SetFunctional, c: f64, sv: Option<SmallVolume>, vol: f64) -> Result<Option<SearchResult>, IcError> {
    let n = f.n_cells();
    if n > MAX_EXHAUSTIVE {
        return Err(IcError::TooLargeForExhaustive {
            cells: n,
            max: MAX_EXHAUSTIVE,
        });
    }
    let max_cells = cap(sv, vol);
    let top = n.min(8);
    let low = n - top;
    let chunks: Vec<Option<(f64, u64)>> = (0..1u64 << top)
        .into_par_iter()
        .map(|hi| {
            let mut inside = vec![false; n];
            for b in 0..top {
                inside[low + b] = hi >> b & 1 == 1;
            }
            let mut count = hi.count_ones() as usize;
            let (mut num, mut per) = f.eval(&inside);
            let mut mask = hi << low;
            let mut best: Option<(f64, u64)> = None;
            let mut consider = |mask: u64, count: usize, num: f64, per: f64| {
                if mask != 0 && count <= max_cells {
                    let s = num - c * per;
                    if best.is_none_or(|b| s > b.0) {
                        best = Some((s, mask));
                    }
                }
            };
            consider(mask, count, num, per);
            for step in 1u64..1u64 << low {
                let k = step.trailing_zeros() as usize;
                let (dn, dp) = f.flip_delta(&inside, k);
                inside[k] = !inside[k];
                if inside[k] {
                    count += 1;
                } else {
                    count -= 1;
                }
                mask ^= 1 << k;
                num += dn;
                per += dp;
                consider(mask, count, num, per);
            }
            best
        })
        .collect();
    // sequential reduction keeps ties deterministic
    let mut best: Option<(f64, u64)> = None;
    for b in chunks.into_iter().flatten() {
        if best.is_none_or(|x| b.0 > x.0 + 1e-12 * (1.0 + x.0.abs())) {
            best = Some(b);
        }
    }
    Ok(best.map(|(_, mask)| {
        let inside: Vec<bool> = (0..n).map(|k| mask >> k & 1 == 1).collect();
        let (num, per) = f.eval(&inside);
        SearchResult {
            set: (0..n).filter(|&k| inside[k]).collect(),
            score: num - c * per,
        }
    }))
}

/// Simulated annealing over pixel sets: geometric cooling, single-cell
/// flips and blob moves (a cell with its 4-neighbors), independent
/// restarts. The result is only a lower bound on the maximum.
pub(crate) fn anneal(
    f: &SetFunctional,
    c: f64,
    sv: Option<SmallVolume>,
    vol: f64,
    seed: u64,
    restarts: usize,
) -> Option<SearchResult> {
    let n = f.n_cells();
    let max_cells = cap(sv, vol);
    if n == 0 || max_cells == 0 {
        return None;
    }
    let empty = vec![false; n];
    // temperature scale from single-cell moves out of the empty set
    let mut t0 = 0.0;
    for k in 0..n {
        let (dn, dp) = f.flip_delta(&empty, k);
        t0 += (dn - c * dp).abs();
    }
    t0 = (t0 / n as f64).max(1e-12);
    let steps = (400 * n).clamp(50_000, 20_000_000);
    let cool = (1e-4f64).powf(1.0 / steps as f64);

    let runs: Vec<Option<(f64, Vec<bool>)>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let mut inside = vec![false; n];
            let mut members: Vec<usize> = Vec::new();
            let mut pos = vec![usize::MAX; n];
            let (mut num, mut per) = (0.0, 0.0);
            let mut best: Option<(f64, Vec<bool>)> = None;
            let mut temp = t0;
            let mut blob = Vec::with_capacity(5);
            for _ in 0..steps {
                // half the proposals touch the current set, which keeps moves
                // local once it is nonempty
                let k = if !members.is_empty() && rng.random_bool(0.5) {
                    let m = members[rng.random_range(0..members.len())];
                    let nb: Vec<usize> = f.neighbors(m).collect();
                    if nb.is_empty() || rng.random_bool(0.3) {
                        m
                    } else {
                        nb[rng.random_range(0..nb.len())]
                    }
                } else {
                    rng.random_range(0..n)
                };
                blob.clear();
                blob.push(k);
                if rng.random_bool(0.2) {
                    let target = !inside[k];
                    blob.extend(f.neighbors(k).filter(|&j| inside[j] != target));
                }
                let (mut dn, mut dp) = (0.0, 0.0);
                for &j in &blob {
                    let (a, b) = f.flip_delta(&inside, j);
                    inside[j] = !inside[j];
                    dn += a;
                    dp += b;
                }
                let count = members.len() as isize + blob.iter().map(|&j| if inside[j] { 1 } else { -1 }).sum::<isize>();
                let ds = dn - c * dp;
                let ok = count as usize <= max_cells && (ds >= 0.0 || rng.random::<f64>() < (ds / temp).exp());
                if ok {
                    num += dn;
                    per += dp;
                    for &j in &blob {
                        if inside[j] {
                            pos[j] = members.len();
                            members.push(j);
                        } else {
                            let p = pos[j];
                            let last = *members.last().unwrap();
                            members.swap_remove(p);
                            if last != j {
                                pos[last] = p;
                            }
                            pos[j] = usize::MAX;
                        }
                    }
                    if !members.is_empty() {
                        let s = num - c * per;
                        if best.as_ref().is_none_or(|b| s > b.0) {
                            best = Some((s, inside.clone()));
                        }
                    }
                } else {
                    for &j in blob.iter().rev() {
                        inside[j] = !inside[j];
                    }
                }
                temp *= cool;
            }
            best
        })
        .collect();
    let mut best: Option<(f64, Vec<bool>)> = None;
    for r in runs.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| r.0 > b.0) {
            best = Some(r);
        }
    }
    best.map(|(_, inside)| {
        let (num, per) = f.eval(&inside);
        SearchResult {
            set: (0..n).filter(|&k| inside[k]).collect(),
            score: num - c * per,
        }
    })
}
