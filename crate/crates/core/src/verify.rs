//! Seeded self-check suites, run by the command-line `check` command.
//!
//! Every suite samples with its own ChaCha stream derived from the seed, so
//! filtering suites never changes the draws of the others.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis::{Basis, BasisConfig, BasisKind, FnFunctional};
use crate::diagram::SignedDiagram;
use crate::error::Result;
use crate::featurize::{tail_bound, vectorize};
use crate::geometry::PolyhedralPair;
use crate::triangulation::{LatticeVertex, TriangulationConfig};
use crate::wasserstein::{wasserstein1, wasserstein1_bruteforce};

pub const SUITES: [&str; 6] = [
    "stability",
    "partition",
    "reconstruction",
    "witness",
    "budget",
    "oracle",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest observed `lhs - bound`; negative when every trial passed.
    pub worst_margin: f64,
    pub passed: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

/// A random point of the pair in `[lo, hi)^d`: uniform coordinates, sorted
/// ascending, which satisfies every relation `i < j`.
pub fn random_point(pair: &PolyhedralPair, rng: &mut impl Rng, lo: f64, hi: f64) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..pair.dim()).map(|_| rng.gen_range(lo..hi)).collect();
        if !pair.contains_unchecked(&x) {
            x.sort_by(f64::total_cmp);
        }
        if pair.distance_to_a_unchecked(&x) > 0.0 {
            return x;
        }
    }
}

/// Up to `max_points` points with weights `+-1` (or `+1` when unsigned).
pub fn random_diagram(
    pair: &PolyhedralPair,
    rng: &mut impl Rng,
    max_points: usize,
    lo: f64,
    hi: f64,
    signed: bool,
) -> SignedDiagram {
    let n = rng.gen_range(0..=max_points);
    let mut d = SignedDiagram::new(pair.clone());
    for _ in 0..n {
        let x = random_point(pair, rng, lo, hi);
        let w = if signed && rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        d.push(x, w).expect("sampled points lie in X");
    }
    d
}

struct Tally {
    trials: usize,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self {
            trials: 0,
            violations: 0,
            worst: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, lhs: f64, bound: f64) {
        self.trials += 1;
        let margin = lhs - bound;
        self.worst = self.worst.max(margin);
        if margin.is_nan() || margin > 0.0 {
            self.violations += 1;
        }
    }

    fn require(&mut self, ok: bool) {
        self.record(if ok { 0.0 } else { 1.0 }, 0.0);
    }
}

fn plane_basis(kind: BasisKind, layers: u32, rafter: u32) -> Result<Basis> {
    let tri = TriangulationConfig::new(PolyhedralPair::persistence_plane(), 2)?;
    Basis::new(BasisConfig::new(tri, layers, rafter, kind))
}

fn stream(seed: u64, suite: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite as u64 + 1);
    rng
}

/// `|F(a) - F(b)|_1 <= sqrt(2d) L W1(a, b) + tails` on signed diagram pairs.
fn stability(rng: &mut ChaCha8Rng, trials: usize) -> Result<Tally> {
    let basis = plane_basis(BasisKind::Plain, 6, 8)?;
    let pair = basis.triangulation().pair.clone();
    let constant = (2.0 * basis.dim() as f64).sqrt() * basis.schedule().total();
    let mut t = Tally::new();
    for _ in 0..trials {
        let a = random_diagram(&pair, rng, 6, 0.0, 6.0, true);
        let b = random_diagram(&pair, rng, 6, 0.0, 6.0, true);
        let lhs = vectorize(&basis, &a)?.l1_distance(&vectorize(&basis, &b)?);
        let bound = constant * wasserstein1(&a, &b)? + tail_bound(&basis, &a)? + tail_bound(&basis, &b)? + 1e-9;
        t.record(lhs, bound);
    }
    Ok(t)
}

/// Stacked functionals sum to `d(x, A)` up to twice the truncation tail.
fn partition(rng: &mut ChaCha8Rng, trials: usize) -> Result<Tally> {
    let basis = plane_basis(BasisKind::Stacked, 8, 8)?;
    let pair = basis.triangulation().pair.clone();
    let reach = 8.0 - std::f64::consts::SQRT_2;
    let mut t = Tally::new();
    for _ in 0..trials {
        let x = random_point(&pair, rng, -reach, reach);
        let mut sum = 0.0;
        basis.for_each_nonzero(&x, |_, v| {
            sum += v;
            Ok(())
        })?;
        let d = pair.distance_to_a_unchecked(&x);
        t.record((sum - d).abs(), 2.0 * basis.stacked_tail(d));
    }
    Ok(t)
}

/// Plain partial sums of a Lipschitz bump obey `Lip(f) M_N` on a grid.
fn reconstruction(rng: &mut ChaCha8Rng, trials: usize) -> Result<Tally> {
    let layers = 5;
    let basis = plane_basis(BasisKind::Plain, layers, 4)?;
    let pair = basis.triangulation().pair.clone();
    let mut t = Tally::new();
    for _ in 0..trials {
        let c = random_point(&pair, rng, -1.5, 1.5);
        let r: f64 = rng.gen_range(0.5..1.5);
        let p2 = pair.clone();
        let f = FnFunctional::new(1.0, move |x: &[f64]| {
            let dist = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
            (r - dist).max(0.0).min(p2.distance_to_a_unchecked(x))
        });
        let coeffs = basis.schauder_coefficients(&f)?;
        let lookup = coeffs.by_vertex(&basis)?;
        let mut worst = vec![0.0f64; layers as usize + 1];
        for i in 0..40 {
            for j in 0..40 {
                let x = [-3.0 + 6.0 * i as f64 / 39.0, -3.0 + 6.0 * j as f64 / 39.0];
                if !pair.contains_unchecked(&x) {
                    continue;
                }
                let sums = lookup.partial_sums(&basis, &x)?;
                let fx = crate::basis::LipschitzFunctional::eval(&f, &x);
                for (n, s) in sums.iter().enumerate() {
                    worst[n] = worst[n].max((fx - s).abs());
                }
            }
        }
        for (n, w) in worst.iter().enumerate() {
            t.record(*w, coeffs.plain_error_bound(n as u32) + 1e-9);
        }
    }
    Ok(t)
}

/// Witnesses agree with `delta_v` off `v` and differ at `v`.
fn witness(rng: &mut ChaCha8Rng, trials: usize) -> Result<Tally> {
    let basis = plane_basis(BasisKind::Plain, 2, 3)?;
    let pair = basis.triangulation().pair.clone();
    let mut t = Tally::new();
    for k in 0..trials {
        let layer = (k % 3) as u32;
        let candidates = basis.triangulation().enumerate_vertices(layer, 2)?;
        let v: LatticeVertex = candidates.choose(rng).expect("nonempty layer").clone();
        let beta = basis.minimality_witness(&v)?;
        let delta = SignedDiagram::from_points(pair.clone(), [(v.point(2), 1.0)])?;
        let fb = vectorize(&basis, &beta)?;
        let fd = vectorize(&basis, &delta)?;
        let idx = basis.basis_index(&v)?;
        let mut off = 0.0f64;
        for i in fb.entries().keys().chain(fd.entries().keys()) {
            if *i != idx {
                off = off.max((fb.get(*i) - fd.get(*i)).abs());
            }
        }
        t.record(off, 1e-12);
        t.require((fb.get(idx) - fd.get(idx)).abs() > 1e-6);
    }
    Ok(t)
}

/// At most `d + 1` nonzero functionals per layer, budget at most `(d + 1) L`.
fn budget(rng: &mut ChaCha8Rng, trials: usize) -> Result<Tally> {
    let basis = plane_basis(BasisKind::Plain, 6, 8)?;
    let pair = basis.triangulation().pair.clone();
    let d1 = basis.dim() + 1;
    let cap = d1 as f64 * basis.schedule().partial(basis.max_layer());
    let mut t = Tally::new();
    for _ in 0..trials {
        let x = random_point(&pair, rng, -7.0, 7.0);
        let b = basis.lipschitz_budget(&x)?;
        t.require(b.per_layer.iter().all(|&c| c <= d1));
        t.record(b.total, cap);
    }
    Ok(t)
}

/// The assignment solver matches exhaustive enumeration.
fn oracle(rng: &mut ChaCha8Rng, trials: usize) -> Result<Tally> {
    let pairs = [
        PolyhedralPair::persistence_plane(),
        PolyhedralPair::mixup(),
        PolyhedralPair::new(4, &[(1, 3), (2, 4)], &[(1, 3), (2, 4)])?,
    ];
    let mut t = Tally::new();
    for k in 0..trials {
        let pair = &pairs[k % pairs.len()];
        let a = random_diagram(pair, rng, 4, 0.0, 3.0, false);
        let b = random_diagram(pair, rng, 4, 0.0, 3.0, false);
        let fast = wasserstein1(&a, &b)?;
        let slow = wasserstein1_bruteforce(&a, &b)?;
        t.record((fast - slow).abs(), 1e-9);
    }
    Ok(t)
}

fn default_trials(name: &str) -> usize {
    match name {
        "stability" => 1000,
        "partition" => 200,
        "reconstruction" => 5,
        "witness" => 20,
        "budget" => 1000,
        _ => 500,
    }
}

/// Runs the named suites (all when empty).
pub fn run_checks(suites: &[String], trials: Option<usize>, seed: u64) -> Result<CheckReport> {
    let selected: Vec<&str> = if suites.is_empty() {
        SUITES.to_vec()
    } else {
        SUITES
            .iter()
            .copied()
            .filter(|s| suites.iter().any(|q| q == s))
            .collect()
    };
    let mut reports = Vec::new();
    for name in selected {
        let idx = SUITES.iter().position(|s| *s == name).expect("known suite");
        let mut rng = stream(seed, idx);
        let n = trials.unwrap_or_else(|| default_trials(name));
        let start = Instant::now();
        let tally = match name {
            "stability" => stability(&mut rng, n)?,
            "partition" => partition(&mut rng, n)?,
            "reconstruction" => reconstruction(&mut rng, n)?,
            "witness" => witness(&mut rng, n)?,
            "budget" => budget(&mut rng, n)?,
            _ => oracle(&mut rng, n)?,
        };
        reports.push(SuiteReport {
            name: name.to_string(),
            trials: tally.trials,
            violations: tally.violations,
            worst_margin: if tally.trials == 0 { 0.0 } else { tally.worst },
            passed: tally.violations == 0,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let passed = reports.iter().all(|r| r.passed);
    Ok(CheckReport {
        seed,
        suites: reports,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        let names: Vec<String> = SUITES.iter().map(|s| s.to_string()).collect();
        let report = run_checks(&names, Some(3), 42).unwrap();
        assert_eq!(report.suites.len(), SUITES.len());
        for s in &report.suites {
            assert!(s.passed, "{s:?}");
        }
    }

    #[test]
    fn filtering_keeps_streams() {
        let one = run_checks(&["oracle".to_string()], Some(5), 7).unwrap();
        let all = run_checks(&[], Some(5), 7).unwrap();
        let from_all = all.suites.iter().find(|s| s.name == "oracle").unwrap();
        assert_eq!(one.suites[0].worst_margin, from_all.worst_margin);
    }

    #[test]
    fn sampled_points_lie_in_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = PolyhedralPair::barcode_space(2).unwrap();
        for _ in 0..100 {
            let x = random_point(&p, &mut rng, -1.0, 1.0);
            assert!(p.contains(&x).unwrap());
        }
    }
}
