//! Schauder-basis vectorization of signed persistence diagrams on polyhedral pairs.
//!
//! A [`Basis`] fixes a polyhedral pair, a nested CFK triangulation with ratio
//! `z`, a Lipschitz schedule and a truncation window. [`vectorize`] maps a
//! [`SignedDiagram`] to a sparse [`FeatureVector`] whose `l1` distances are
//! bounded by `sqrt(2d) L` times the 1-Wasserstein distance.

pub mod basis;
mod count;
pub mod diagram;
pub mod error;
pub mod featurize;
pub mod geometry;
pub mod ordering;
pub mod triangulation;
pub mod verify;
pub mod viz;
pub mod wasserstein;

pub use basis::{
    Basis, BasisConfig, BasisKind, CoefficientLookup, CoefficientMap, FnFunctional, LipschitzBudget,
    LipschitzFunctional, LipschitzSchedule,
};
pub use diagram::{
    from_mixup, from_rectangles, parse_mixup_csv, Bar, DiagramFormat, DiagramPoint, IntervalKind, SignedBarcode,
    SignedDiagram,
};
pub use error::{Error, Result};
pub use featurize::{
    batch_vectorize, batch_vectorize_sparse, columns, embed_lp, tail_bound, tail_bound_generic, vectorize,
    write_dense_csv, Column, FeatureVector, WindowReport,
};
pub use geometry::{PairSpec, PolyhedralPair, Relation};
pub use ordering::{BasisOrdering, Block};
pub use triangulation::{LatticeVertex, SimplexRef, TriangulationConfig, VertexLayer};
pub use viz::{viz_bundle, VizBundle, VizRecord};
pub use wasserstein::{
    diagram_norm, hungarian, wasserstein1, wasserstein1_bruteforce, wasserstein1_matching, Matching,
};
