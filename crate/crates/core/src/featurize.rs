//! Vectorization `F(alpha) = (alpha(f))_f` over a truncated basis.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, BasisConfig, BasisKind};
use crate::diagram::SignedDiagram;
use crate::error::{Error, Result};
use crate::triangulation::LatticeVertex;
use crate::wasserstein::wasserstein1;

/// Points whose layer-0 neighbourhood leaves the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub exiting_points: usize,
    pub exiting_mass: f64,
}

/// Sparse feature vector keyed by global basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    config: BasisConfig,
    entries: BTreeMap<u64, f64>,
    p: f64,
    norm: f64,
    window: WindowReport,
}

#[derive(Serialize, Deserialize)]
struct SparseJson {
    config: BasisConfig,
    entries: BTreeMap<u64, f64>,
    l1: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm: Option<f64>,
    #[serde(default)]
    window: WindowReport,
}

fn one() -> f64 {
    1.0
}

fn is_one(p: &f64) -> bool {
    *p == 1.0
}

fn lp_norm<'a>(values: impl Iterator<Item = &'a f64>, p: f64) -> f64 {
    if p == 1.0 {
        values.fold(0.0, |s, v| s + v.abs())
    } else if p.is_infinite() {
        values.fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values.fold(0.0, |s, v| s + v.abs().powf(p)).powf(1.0 / p)
    }
}

impl FeatureVector {
    pub fn new(config: BasisConfig, entries: BTreeMap<u64, f64>, window: WindowReport) -> Self {
        let norm = lp_norm(entries.values(), 1.0);
        Self {
            config,
            entries,
            p: 1.0,
            norm,
            window,
        }
    }

    pub fn config(&self) -> &BasisConfig {
        &self.config
    }

    pub fn entries(&self) -> &BTreeMap<u64, f64> {
        &self.entries
    }

    pub fn get(&self, index: u64) -> f64 {
        self.entries.get(&index).copied().unwrap_or(0.0)
    }

    /// Cached norm; `l1` unless re-embedded by [`embed_lp`].
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn l1_norm(&self) -> f64 {
        lp_norm(self.entries.values(), 1.0)
    }

    pub fn window(&self) -> WindowReport {
        self.window
    }

    /// `l1` distance to another vector on the same basis.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let mut sum = 0.0;
        for (i, a) in &self.entries {
            sum += (a - other.get(*i)).abs();
        }
        for (i, b) in &other.entries {
            if !self.entries.contains_key(i) {
                sum += b.abs();
            }
        }
        sum
    }

    /// Entries `0..len` as a dense row.
    pub fn to_dense(&self, len: u64) -> Vec<f64> {
        let mut row = vec![0.0; len as usize];
        for (&i, &v) in self.entries.range(..len) {
            row[i as usize] = v;
        }
        row
    }

    pub fn to_sparse_json(&self) -> Result<String> {
        let out = SparseJson {
            config: self.config.clone(),
            entries: self.entries.clone(),
            l1: self.l1_norm(),
            p: self.p,
            norm: (self.p != 1.0).then_some(self.norm),
            window: self.window,
        };
        Ok(serde_json::to_string(&out)?)
    }

    pub fn from_sparse_json(text: &str) -> Result<Self> {
        let s: SparseJson = serde_json::from_str(text)?;
        let v = Self::new(s.config, s.entries, s.window);
        if s.p == 1.0 {
            Ok(v)
        } else {
            embed_lp(&v, s.p)
        }
    }
}

/// Same entries with the cached norm recomputed as the `l_p` norm.
pub fn embed_lp(v: &FeatureVector, p: f64) -> Result<FeatureVector> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidConfig(format!("l_p embedding needs p >= 1, got {p}")));
    }
    let mut out = v.clone();
    out.p = p;
    out.norm = lp_norm(out.entries.values(), p);
    Ok(out)
}

fn check_pair(basis: &Basis, diagram: &SignedDiagram) -> Result<()> {
    if diagram.pair() != &basis.triangulation().pair {
        return Err(Error::PairMismatch);
    }
    Ok(())
}

/// Sparse features of one diagram. Accumulation runs point by point, then
/// layer by layer, then over the local face vertices.
pub fn vectorize(basis: &Basis, diagram: &SignedDiagram) -> Result<FeatureVector> {
    check_pair(basis, diagram)?;
    let pair = diagram.pair();
    let edge = basis.ordering().rafter() as f64 - 1.0;
    let mut entries: BTreeMap<u64, f64> = BTreeMap::new();
    let mut window = WindowReport::default();
    for p in diagram.points() {
        let w = p.weight;
        basis.for_each_nonzero(&p.coords, |v, value| {
            *entries.entry(basis.basis_index(v)?).or_insert(0.0) += w * value;
            Ok(())
        })?;
        if p.coords.iter().any(|c| c.abs() > edge) {
            window.exiting_points += 1;
            window.exiting_mass += w.abs() * pair.distance_to_a_unchecked(&p.coords);
        }
    }
    Ok(FeatureVector::new(basis.config().clone(), entries, window))
}

/// Bound on the `l1` mass dropped by cutting layers above `max_layer`.
///
/// Plain bases use `sqrt(2d) * tail(L) * W1(alpha, 0)`; stacked bases use the
/// exact geometric tail `sum |w| d(x, A) z^-(2 max_layer + 2)`.
pub fn tail_bound(basis: &Basis, diagram: &SignedDiagram) -> Result<f64> {
    check_pair(basis, diagram)?;
    match basis.kind() {
        BasisKind::Plain => {
            let d = basis.dim() as f64;
            let tail = basis.schedule().tail(basis.max_layer());
            if diagram.is_empty() {
                return Ok(0.0);
            }
            let empty = SignedDiagram::new(diagram.pair().clone());
            Ok((2.0 * d).sqrt() * tail * wasserstein1(diagram, &empty)?)
        }
        BasisKind::Stacked => Ok(basis.stacked_tail(diagram.mass())),
    }
}

/// The same bound with the generic locally-Lipschitz-finite constant `d + 1`.
pub fn tail_bound_generic(basis: &Basis, diagram: &SignedDiagram) -> Result<f64> {
    check_pair(basis, diagram)?;
    if diagram.is_empty() {
        return Ok(0.0);
    }
    let d = basis.dim() as f64;
    let tail = basis.schedule().tail(basis.max_layer());
    let empty = SignedDiagram::new(diagram.pair().clone());
    Ok((d + 1.0) * tail * wasserstein1(diagram, &empty)?)
}

/// Sparse features of many diagrams, in input order, computed in parallel.
pub fn batch_vectorize_sparse(basis: &Basis, diagrams: &[SignedDiagram]) -> Result<Vec<FeatureVector>> {
    diagrams.par_iter().map(|d| vectorize(basis, d)).collect()
}

/// Dense feature matrix, one row per diagram, columns in index order.
pub fn batch_vectorize(basis: &Basis, diagrams: &[SignedDiagram]) -> Result<Vec<Vec<f64>>> {
    let len = basis.len();
    if len > (1 << 26) {
        return Err(Error::InvalidConfig(format!(
            "{len} columns are too many for dense output; use sparse output"
        )));
    }
    Ok(batch_vectorize_sparse(basis, diagrams)?
        .into_iter()
        .map(|v| v.to_dense(len))
        .collect())
}

/// Column metadata for dense output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub index: u64,
    pub layer: u32,
    pub coords: Vec<i64>,
}

pub fn columns(basis: &Basis) -> Result<Vec<Column>> {
    let ord = basis.ordering();
    let mut out = Vec::with_capacity(ord.len() as usize);
    for b in ord.blocks() {
        for (i, LatticeVertex { layer, coords }) in ord.block_vertices(b.layer, b.shell)?.into_iter().enumerate() {
            out.push(Column {
                index: b.offset + i as u64,
                layer,
                coords,
            });
        }
    }
    Ok(out)
}

/// Writes rows as headerless CSV with full float precision.
pub fn write_dense_csv(mut w: impl Write, rows: &[Vec<f64>]) -> Result<()> {
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
