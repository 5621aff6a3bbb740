//! Plot data: each diagram point's share of the feature vector.

use serde::Serialize;

use crate::basis::{Basis, BasisConfig};
use crate::diagram::SignedDiagram;
use crate::error::Result;
use crate::featurize::vectorize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub index: u64,
    pub layer: u32,
    pub coords: Vec<i64>,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VizRecord {
    pub coords: Vec<f64>,
    pub weight: f64,
    pub orientation: Orientation,
    /// Interval endpoints `(a, b)` for barcode inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<(Vec<f64>, Vec<f64>)>,
    /// `|F(delta_x)|` entries in index order; they sum to `total`.
    pub segments: Vec<Segment>,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VizBundle {
    pub config: BasisConfig,
    pub records: Vec<VizRecord>,
}

/// One record per diagram point. With `split_endpoints`, coordinates are
/// read as `(a_1..a_k, b_1..b_k)`.
pub fn viz_bundle(basis: &Basis, diagram: &SignedDiagram, split_endpoints: bool) -> Result<VizBundle> {
    let mut records = Vec::with_capacity(diagram.len());
    for p in diagram.points() {
        let single = SignedDiagram::from_points(diagram.pair().clone(), [(p.coords.clone(), 1.0)])?;
        let f = vectorize(basis, &single)?;
        let mut segments = Vec::with_capacity(f.entries().len());
        for (&index, &value) in f.entries() {
            let v = basis.vertex_at(index)?;
            segments.push(Segment {
                index,
                layer: v.layer,
                coords: v.coords,
                length: value.abs(),
            });
        }
        let endpoints = split_endpoints.then(|| {
            let (a, b) = p.coords.split_at(p.coords.len() / 2);
            (a.to_vec(), b.to_vec())
        });
        records.push(VizRecord {
            coords: p.coords.clone(),
            weight: p.weight,
            orientation: if p.weight >= 0.0 {
                Orientation::Up
            } else {
                Orientation::Down
            },
            endpoints,
            total: f.l1_norm(),
            segments,
        });
    }
    Ok(VizBundle {
        config: basis.config().clone(),
        records,
    })
}
