//! Exact 1-Wasserstein distance between signed diagrams.
//!
//! Signed inputs reduce to `W1(a+ + b-, b+ + a-)`. The unsigned problem is an
//! assignment on the diagonal-augmented `(m+n) x (m+n)` matrix with real-real
//! cost `min(|x - y|, d_A(x) + d_A(y))`.

use serde::Serialize;

use crate::diagram::SignedDiagram;
use crate::error::{Error, Result};
use crate::geometry::PolyhedralPair;

pub const DEFAULT_POINT_CAP: usize = 2000;
pub const BRUTE_FORCE_CAP: usize = 5;

/// An optimal partial matching between the two reduced sides.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Matching {
    /// `a+ + b-`, expanded by multiplicity.
    pub left: Vec<Vec<f64>>,
    /// `b+ + a-`, expanded by multiplicity.
    pub right: Vec<Vec<f64>>,
    /// `(left index | A, right index | A, cost)`; every real point appears once.
    pub pairs: Vec<(Option<usize>, Option<usize>, f64)>,
    pub cost: f64,
}

fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Minimum-cost perfect assignment on a square matrix, `O(n^3)` with potentials.
/// Returns the cost and `row -> column`.
pub fn hungarian(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    // 1-based arrays; column 0 is a virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[row_of[j] - 1] = j - 1;
    }
    let total = (0..n).fold(0.0, |s, i| s + cost[i][assign[i]]);
    (total, assign)
}

/// The two unsigned sides, expanded by multiplicity.
type Sides = (Vec<Vec<f64>>, Vec<Vec<f64>>);

fn reduce(alpha: &SignedDiagram, beta: &SignedDiagram) -> Result<Sides> {
    if alpha.pair() != beta.pair() {
        return Err(Error::PairMismatch);
    }
    let left = alpha.positive_part().sum(&beta.negative_part())?;
    let right = beta.positive_part().sum(&alpha.negative_part())?;
    let own =
        |d: &SignedDiagram| -> Result<Vec<Vec<f64>>> { Ok(d.expand()?.into_iter().map(<[f64]>::to_vec).collect()) };
    Ok((own(&left)?, own(&right)?))
}

fn unsigned_matching(pair: &PolyhedralPair, left: Vec<Vec<f64>>, right: Vec<Vec<f64>>) -> Matching {
    let (m, n) = (left.len(), right.len());
    let da = |x: &[f64]| pair.distance_to_a_unchecked(x);
    let dl: Vec<f64> = left.iter().map(|x| da(x)).collect();
    let dr: Vec<f64> = right.iter().map(|x| da(x)).collect();
    let size = m + n;
    // rows: left points then n diagonal slots; columns: right points then m diagonal slots
    let mut cost = vec![vec![0.0; size]; size];
    for i in 0..size {
        for j in 0..size {
            cost[i][j] = match (i < m, j < n) {
                (true, true) => euclid(&left[i], &right[j]).min(dl[i] + dr[j]),
                (true, false) => dl[i],
                (false, true) => dr[j],
                (false, false) => 0.0,
            };
        }
    }
    let (total, assign) = hungarian(&cost);
    let mut pairs = Vec::new();
    for (i, &j) in assign.iter().enumerate() {
        let entry = match (i < m, j < n) {
            (true, true) => {
                let direct = euclid(&left[i], &right[j]);
                if direct <= dl[i] + dr[j] {
                    vec![(Some(i), Some(j), direct)]
                } else {
                    vec![(Some(i), None, dl[i]), (None, Some(j), dr[j])]
                }
            }
            (true, false) => vec![(Some(i), None, dl[i])],
            (false, true) => vec![(None, Some(j), dr[j])],
            (false, false) => Vec::new(),
        };
        pairs.extend(entry);
    }
    Matching {
        left,
        right,
        pairs,
        cost: total,
    }
}

/// `W1(alpha, beta)` together with an optimal matching.
pub fn wasserstein1_matching(alpha: &SignedDiagram, beta: &SignedDiagram, cap: usize) -> Result<Matching> {
    let (left, right) = reduce(alpha, beta)?;
    let size = left.len() + right.len();
    if size > cap {
        return Err(Error::CapExceeded {
            what: "the matching problem",
            size,
            cap,
        });
    }
    Ok(unsigned_matching(alpha.pair(), left, right))
}

/// `W1(alpha, beta)` with the default point cap.
pub fn wasserstein1(alpha: &SignedDiagram, beta: &SignedDiagram) -> Result<f64> {
    Ok(wasserstein1_matching(alpha, beta, DEFAULT_POINT_CAP)?.cost)
}

/// `||alpha|| = W1(alpha+, alpha-)`.
pub fn diagram_norm(alpha: &SignedDiagram) -> Result<f64> {
    wasserstein1(&alpha.positive_part(), &alpha.negative_part())
}

/// Exhaustive minimum over all partial matchings; at most five points per side.
pub fn wasserstein1_bruteforce(alpha: &SignedDiagram, beta: &SignedDiagram) -> Result<f64> {
    let (left, right) = reduce(alpha, beta)?;
    for (side, what) in [(&left, "left side"), (&right, "right side")] {
        if side.len() > BRUTE_FORCE_CAP {
            return Err(Error::CapExceeded {
                what,
                size: side.len(),
                cap: BRUTE_FORCE_CAP,
            });
        }
    }
    let pair = alpha.pair();
    let dl: Vec<f64> = left.iter().map(|x| pair.distance_to_a_unchecked(x)).collect();
    let dr: Vec<f64> = right.iter().map(|x| pair.distance_to_a_unchecked(x)).collect();

    struct Search<'a> {
        left: &'a [Vec<f64>],
        right: &'a [Vec<f64>],
        dl: Vec<f64>,
        dr: Vec<f64>,
        used: Vec<bool>,
        best: f64,
    }

    impl Search<'_> {
        // assign each left point to a free right point or to A; unmatched right points go to A
        fn rec(&mut self, i: usize, acc: f64) {
            if i == self.left.len() {
                let rest: f64 = (0..self.right.len())
                    .filter(|&j| !self.used[j])
                    .map(|j| self.dr[j])
                    .sum();
                self.best = self.best.min(acc + rest);
                return;
            }
            self.rec(i + 1, acc + self.dl[i]);
            for j in 0..self.right.len() {
                if !self.used[j] {
                    self.used[j] = true;
                    self.rec(i + 1, acc + euclid(&self.left[i], &self.right[j]));
                    self.used[j] = false;
                }
            }
        }
    }

    let mut search = Search {
        left: &left,
        right: &right,
        dl,
        dr,
        used: vec![false; right.len()],
        best: f64::INFINITY,
    };
    search.rec(0, 0.0);
    let best = search.best;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    fn diag(points: &[(&[f64], f64)]) -> SignedDiagram {
        SignedDiagram::from_points(
            PolyhedralPair::persistence_plane(),
            points.iter().map(|(x, w)| (x.to_vec(), *w)),
        )
        .unwrap()
    }

    #[test]
    fn hungarian_small() {
        let c = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let (cost, assign) = hungarian(&c);
        assert_eq!(cost, 5.0);
        assert_eq!(assign, vec![1, 0, 2]);
    }

    #[test]
    fn examples() {
        let empty = diag(&[]);
        let a = diag(&[(&[0.0, 2.0], 1.0)]);
        assert_abs_diff_eq!(wasserstein1(&a, &empty).unwrap(), SQRT_2, epsilon = 1e-12);
        assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
        let b = diag(&[(&[0.5, 2.0], 1.0)]);
        assert_abs_diff_eq!(wasserstein1(&a, &b).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(wasserstein1_bruteforce(&empty, &empty).unwrap(), 0.0);
        let two = diag(&[(&[0.0, 1.0], 1.0), (&[0.0, 2.0], 1.0)]);
        let one = diag(&[(&[0.0, 1.0], 1.0)]);
        assert_abs_diff_eq!(wasserstein1_bruteforce(&two, &one).unwrap(), SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(wasserstein1(&two, &one).unwrap(), SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn norms() {
        let a = diag(&[(&[0.0, 2.0], 1.0), (&[1.0, 2.0], 1.0)]);
        let mass = a.mass();
        assert_abs_diff_eq!(diagram_norm(&a).unwrap(), mass, epsilon = 1e-12);
        let cancel = diag(&[(&[0.0, 2.0], 1.0), (&[0.0, 2.0], -1.0)]);
        assert_eq!(diagram_norm(&cancel).unwrap(), 0.0);
        let signed = diag(&[(&[0.0, 2.0], 1.0), (&[0.5, 2.0], -1.0)]);
        assert_abs_diff_eq!(diagram_norm(&signed).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_fractional_weights_and_caps() {
        let a = diag(&[(&[0.0, 2.0], 0.5)]);
        assert!(matches!(wasserstein1(&a, &a), Err(Error::NonIntegerWeight(_))));
        let big = diag(&[(&[0.0, 2.0], 6.0)]);
        assert!(wasserstein1_bruteforce(&big, &diag(&[])).is_err());
        assert!(wasserstein1_matching(&big, &big, 5).is_err());
    }

    #[test]
    fn matching_cost_is_consistent() {
        let a = diag(&[(&[0.0, 2.0], 1.0), (&[0.0, 0.1], 1.0)]);
        let b = diag(&[(&[0.2, 2.0], 1.0), (&[5.0, 5.2], 1.0)]);
        let m = wasserstein1_matching(&a, &b, 100).unwrap();
        let sum: f64 = m.pairs.iter().map(|p| p.2).sum();
        assert_abs_diff_eq!(sum, m.cost, epsilon = 1e-12);
        let mut seen_left = vec![0; m.left.len()];
        let mut seen_right = vec![0; m.right.len()];
        for &(l, r, _) in &m.pairs {
            if let Some(i) = l {
                seen_left[i] += 1;
            }
            if let Some(j) = r {
                seen_right[j] += 1;
            }
        }
        assert!(seen_left.iter().chain(&seen_right).all(|&c| c == 1));
    }
}
