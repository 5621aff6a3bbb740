//! Polyhedral pairs `(X, A)` cut out by coordinate order relations.
//!
//! `X = {x : x_i <= x_j for (i, j) in relations}` and `A` is the union of the
//! hyperplanes `x_i = x_j` over the essential relations. Indices are 1-based at
//! the API and serialization boundary and 0-based internally.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An order relation `x_i <= x_j`, stored with 0-based indices and `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    pub lo: usize,
    pub hi: usize,
}

/// On-disk form of a pair: `{"dimension": d, "relations": [[i,j],..], "essential": [[i,j],..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairSpec {
    pub dimension: usize,
    pub relations: Vec<[usize; 2]>,
    pub essential: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PairSpec", into = "PairSpec")]
pub struct PolyhedralPair {
    dim: usize,
    relations: Vec<Relation>,
    essential: Vec<Relation>,
}

fn to_relations(d: usize, raw: &[(usize, usize)], what: &str) -> Result<Vec<Relation>> {
    let mut out = Vec::with_capacity(raw.len());
    for &(i, j) in raw {
        if i == 0 || j == 0 || i > d || j > d {
            return Err(Error::InvalidPair(format!(
                "{what} ({i},{j}) has an index outside 1..={d}"
            )));
        }
        if i >= j {
            return Err(Error::InvalidPair(format!("{what} ({i},{j}) must satisfy i < j")));
        }
        out.push(Relation { lo: i - 1, hi: j - 1 });
    }
    out.sort();
    out.dedup();
    Ok(out)
}

impl PolyhedralPair {
    /// Validates and builds a pair from 1-based relation lists.
    pub fn new(d: usize, relations: &[(usize, usize)], essential: &[(usize, usize)]) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidPair("dimension must be positive".into()));
        }
        let relations = to_relations(d, relations, "relation")?;
        let essential = to_relations(d, essential, "essential relation")?;
        if essential.is_empty() {
            return Err(Error::InvalidPair("the essential relation set must be nonempty".into()));
        }
        if let Some(r) = essential.iter().find(|r| !relations.contains(r)) {
            return Err(Error::InvalidPair(format!(
                "essential relation ({},{}) is not one of the relations",
                r.lo + 1,
                r.hi + 1
            )));
        }
        Ok(Self {
            dim: d,
            relations,
            essential,
        })
    }

    /// `(R^2_<=, Delta)`: the space of one-parameter persistence diagrams.
    pub fn persistence_plane() -> Self {
        Self::new(2, &[(1, 2)], &[(1, 2)]).expect("static pair")
    }

    /// `(R^3_{<=,<=}, Delta^M)`: mixup triples `(b, d', d)`, ephemeral when `d' = d`.
    pub fn mixup() -> Self {
        Self::new(3, &[(1, 2), (2, 3)], &[(2, 3)]).expect("static pair")
    }

    /// The pair holding `params`-parameter rectangle barcodes, points `(a, b)`
    /// with `a_i <= b_i`, flat when some `a_i = b_i`.
    pub fn barcode_space(params: usize) -> Result<Self> {
        let rel: Vec<(usize, usize)> = (1..=params).map(|i| (i, i + params)).collect();
        Self::new(2 * params, &rel, &rel)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn essential(&self) -> &[Relation] {
        &self.essential
    }

    pub fn is_essential(&self, r: &Relation) -> bool {
        self.essential.contains(r)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: len,
            });
        }
        Ok(())
    }

    /// Membership in `X`, boundaries included.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        x.iter().all(|c| c.is_finite()) && self.relations.iter().all(|r| x[r.lo] <= x[r.hi])
    }

    /// Euclidean distance from a point of `X` to `A`.
    pub fn distance_to_a(&self, x: &[f64]) -> Result<f64> {
        if !self.contains(x)? {
            return Err(Error::OutsideX(x.to_vec()));
        }
        Ok(self.distance_to_a_unchecked(x))
    }

    pub(crate) fn distance_to_a_unchecked(&self, x: &[f64]) -> f64 {
        self.essential
            .iter()
            .map(|r| (x[r.hi] - x[r.lo]) / std::f64::consts::SQRT_2)
            .fold(f64::INFINITY, f64::min)
    }

    /// Integer-lattice test for `A`, exact.
    pub(crate) fn lattice_in_a(&self, k: &[i64]) -> bool {
        self.essential.iter().any(|r| k[r.lo] == k[r.hi])
    }

    pub(crate) fn lattice_in_x(&self, k: &[i64]) -> bool {
        self.relations.iter().all(|r| k[r.lo] <= k[r.hi])
    }

    pub fn spec(&self) -> PairSpec {
        PairSpec::from(self.clone())
    }
}

impl TryFrom<PairSpec> for PolyhedralPair {
    type Error = Error;

    fn try_from(spec: PairSpec) -> Result<Self> {
        let rel: Vec<(usize, usize)> = spec.relations.iter().map(|r| (r[0], r[1])).collect();
        let ess: Vec<(usize, usize)> = spec.essential.iter().map(|r| (r[0], r[1])).collect();
        Self::new(spec.dimension, &rel, &ess)
    }
}

impl From<PolyhedralPair> for PairSpec {
    fn from(p: PolyhedralPair) -> Self {
        let conv = |rs: &[Relation]| rs.iter().map(|r| [r.lo + 1, r.hi + 1]).collect();
        PairSpec {
            dimension: p.dim,
            relations: conv(&p.relations),
            essential: conv(&p.essential),
        }
    }
}

impl fmt::Display for PolyhedralPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |rs: &[Relation]| {
            rs.iter()
                .map(|r| format!("({},{})", r.lo + 1, r.hi + 1))
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "d={} relations={{{}}} essential={{{}}}",
            self.dim,
            show(&self.relations),
            show(&self.essential)
        )
    }
}
