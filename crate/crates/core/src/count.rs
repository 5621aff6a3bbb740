//! Exact counting of integer points in a box that satisfy the order relations
//! of a polyhedral pair, with essential relations made strict (points of `A`
//! are excluded).
//!
//! The reduced constraint graph is usually a forest, which is counted by a
//! prefix-sum dynamic program in `O(d * width)`. Cyclic graphs fall back to
//! enumerating a cut set of variables.

use crate::error::{Error, Result};
use crate::geometry::PolyhedralPair;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Edge {
    /// `k[from] <= k[to]`, strict when `strict`.
    from: usize,
    to: usize,
    strict: bool,
}

#[derive(Clone, Debug)]
pub(crate) struct OrderCounter {
    dim: usize,
    edges: Vec<Edge>,
}

impl OrderCounter {
    pub(crate) fn new(pair: &PolyhedralPair) -> Self {
        let d = pair.dim();
        let all: Vec<Edge> = pair
            .relations()
            .iter()
            .map(|r| Edge {
                from: r.lo,
                to: r.hi,
                strict: pair.is_essential(r),
            })
            .collect();

        // strongest implication along any path of length >= 1: None, Some(weak), Some(strict)
        let mut best: Vec<Vec<Option<bool>>> = vec![vec![None; d]; d];
        for i in (0..d).rev() {
            for e in all.iter().filter(|e| e.from == i) {
                let k = e.to;
                best[i][k] = Some(best[i][k].unwrap_or(false) | e.strict);
                let reach = best[k].clone();
                for (j, s2) in reach.into_iter().enumerate() {
                    if let Some(s2) = s2 {
                        best[i][j] = Some(best[i][j].unwrap_or(false) | e.strict | s2);
                    }
                }
            }
        }
        let edges = all
            .iter()
            .copied()
            .filter(|e| {
                !(e.from + 1..e.to).any(|k| match (best[e.from][k], best[k][e.to]) {
                    (Some(a), Some(b)) => (a | b) >= e.strict,
                    _ => false,
                })
            })
            .collect();
        Self { dim: d, edges }
    }

    /// Number of `k` with `lo <= k <= hi` componentwise, `k` in `X \ A`.
    pub(crate) fn count(&self, lo: &[i64], hi: &[i64]) -> Result<u128> {
        debug_assert_eq!(lo.len(), self.dim);
        let mut lo = lo.to_vec();
        let mut hi = hi.to_vec();
        self.count_inner(&mut lo, &mut hi)
    }

    fn propagate(&self, lo: &mut [i64], hi: &mut [i64]) -> bool {
        // edges run from lower to higher index, so one pass each way is a fixpoint
        let mut fwd = self.edges.clone();
        fwd.sort_by_key(|e| e.to);
        for e in &fwd {
            let s = e.strict as i64;
            lo[e.to] = lo[e.to].max(lo[e.from].saturating_add(s));
        }
        fwd.sort_by_key(|e| std::cmp::Reverse(e.from));
        for e in &fwd {
            let s = e.strict as i64;
            hi[e.from] = hi[e.from].min(hi[e.to].saturating_sub(s));
        }
        lo.iter().zip(hi.iter()).all(|(a, b)| a <= b)
    }

    fn count_inner(&self, lo: &mut [i64], hi: &mut [i64]) -> Result<u128> {
        if !self.propagate(lo, hi) {
            return Ok(0);
        }
        let d = self.dim;
        // after propagation a fixed variable's edges are already satisfied for
        // every value left in its neighbours' ranges, so fixed variables drop out
        let free: Vec<bool> = (0..d).map(|i| lo[i] < hi[i]).collect();
        let live: Vec<Edge> = self
            .edges
            .iter()
            .copied()
            .filter(|e| free[e.from] && free[e.to])
            .collect();

        let mut adj: Vec<Vec<(usize, Edge)>> = vec![Vec::new(); d];
        for e in &live {
            adj[e.from].push((e.to, *e));
            adj[e.to].push((e.from, *e));
        }

        if let Some(cut) = find_cycle_vertex(d, &free, &adj) {
            let (a, b) = (lo[cut], hi[cut]);
            let mut total: u128 = 0;
            for v in a..=b {
                let mut l2 = lo.to_vec();
                let mut h2 = hi.to_vec();
                l2[cut] = v;
                h2[cut] = v;
                total = total
                    .checked_add(self.count_inner(&mut l2, &mut h2)?)
                    .ok_or(Error::CountOverflow)?;
            }
            return Ok(total);
        }

        let mut visited = vec![false; d];
        let mut total: u128 = 1;
        for root in 0..d {
            if !free[root] || visited[root] {
                continue;
            }
            let c = count_tree(root, lo, hi, &adj, &mut visited)?;
            total = total.checked_mul(c).ok_or(Error::CountOverflow)?;
            if total == 0 {
                return Ok(0);
            }
        }
        Ok(total)
    }
}

fn find_cycle_vertex(d: usize, free: &[bool], adj: &[Vec<(usize, Edge)>]) -> Option<usize> {
    let mut seen = vec![false; d];
    for start in 0..d {
        if !free[start] || seen[start] {
            continue;
        }
        let mut stack = vec![(start, usize::MAX)];
        seen[start] = true;
        let mut comp = vec![start];
        let mut n_edges = 0;
        while let Some((u, _)) = stack.pop() {
            n_edges += adj[u].len();
            for &(w, _) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    stack.push((w, u));
                }
            }
        }
        if n_edges / 2 >= comp.len() {
            return comp.into_iter().max_by_key(|&u| adj[u].len());
        }
    }
    None
}

fn count_tree(root: usize, lo: &[i64], hi: &[i64], adj: &[Vec<(usize, Edge)>], visited: &mut [bool]) -> Result<u128> {
    // iterative DFS order, children processed before parents
    let mut order = Vec::new();
    let mut parent: Vec<Option<(usize, Edge)>> = vec![None; adj.len()];
    let mut stack = vec![root];
    visited[root] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &(w, e) in &adj[u] {
            if !visited[w] {
                visited[w] = true;
                parent[w] = Some((u, e));
                stack.push(w);
            }
        }
    }

    let mut prefix: Vec<Vec<u128>> = vec![Vec::new(); adj.len()];
    for &u in order.iter().rev() {
        let width = (hi[u] - lo[u] + 1) as usize;
        let mut h = vec![1u128; width];
        for &(c, e) in &adj[u] {
            if parent[c].map(|(p, _)| p) != Some(u) {
                continue;
            }
            let pc = &prefix[c];
            let wc = pc.len() - 1;
            let s = e.strict as i64;
            for (t, slot) in h.iter_mut().enumerate() {
                if *slot == 0 {
                    continue;
                }
                let y = lo[u] + t as i64;
                let m = if e.from == c {
                    // k_c <= y - s
                    let upper = hi[c].min(y - s);
                    if upper < lo[c] {
                        0
                    } else {
                        pc[(upper - lo[c] + 1) as usize]
                    }
                } else {
                    // k_c >= y + s
                    let lower = lo[c].max(y + s);
                    if lower > hi[c] {
                        0
                    } else {
                        pc[wc] - pc[(lower - lo[c]) as usize]
                    }
                };
                *slot = slot.checked_mul(m).ok_or(Error::CountOverflow)?;
            }
        }
        let mut p = Vec::with_capacity(width + 1);
        let mut acc: u128 = 0;
        p.push(0);
        for v in h {
            acc = acc.checked_add(v).ok_or(Error::CountOverflow)?;
            p.push(acc);
        }
        prefix[u] = p;
    }
    Ok(*prefix[root].last().unwrap())
}
