//! Nested Coxeter–Freudenthal–Kuhn triangulations at scales `z^-n`.
//!
//! Nothing is stored: simplices are found by Freudenthal point location and
//! vertices are exact integer lattice coordinates at their layer's scale.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PolyhedralPair;

/// Snap tolerance, in scaled (lattice) units.
pub(crate) const SNAP: f64 = 1e-12;

pub const DEFAULT_LAYER_CAP: u32 = 48;

fn default_layer_cap() -> u32 {
    DEFAULT_LAYER_CAP
}

/// A pair together with the refinement ratio `z` of the nested family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangulationConfig {
    pub pair: PolyhedralPair,
    pub z: u32,
    #[serde(default = "default_layer_cap")]
    pub layer_cap: u32,
}

/// A basis vertex: the point `coords * z^-layer`, in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVertex {
    pub layer: u32,
    pub coords: Vec<i64>,
}

/// A face of the CFK triangulation at scale `z^-scale_index`.
///
/// Vertex 0 is `base`; vertex `i` adds one to every coordinate in the first
/// `group_ends[i-1]` entries of `permutation`. Coordinates sharing a
/// fractional part form one group, so the face is the minimal one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexRef {
    pub scale_index: u32,
    pub base: Vec<i64>,
    pub permutation: Vec<usize>,
    pub group_ends: Vec<usize>,
}

/// Layer classification of a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexLayer {
    Layer(u32),
    InA,
    NotAVertex,
}

impl SimplexRef {
    /// Number of strictly positive barycentric directions, the face dimension.
    pub fn active_dims(&self) -> usize {
        self.group_ends.len()
    }

    /// Integer coordinates (at this scale) of face vertex `i`, `0 <= i <= active_dims`.
    pub fn vertex(&self, i: usize) -> Vec<i64> {
        let mut k = self.base.clone();
        if i > 0 {
            for &c in &self.permutation[..self.group_ends[i - 1]] {
                k[c] += 1;
            }
        }
        k
    }

    pub fn vertices(&self) -> Vec<Vec<i64>> {
        (0..=self.active_dims()).map(|i| self.vertex(i)).collect()
    }
}

impl LatticeVertex {
    /// Reduces integer coordinates at scale `n` to the vertex's birth layer.
    pub fn canonical(z: u32, mut layer: u32, mut coords: Vec<i64>) -> Self {
        let z = z as i64;
        while layer > 0 && coords.iter().all(|c| c.rem_euclid(z) == 0) {
            coords.iter_mut().for_each(|c| *c /= z);
            layer -= 1;
        }
        Self { layer, coords }
    }

    pub fn point(&self, z: u32) -> Vec<f64> {
        let s = (z as f64).powi(self.layer as i32);
        self.coords.iter().map(|&c| c as f64 / s).collect()
    }

    /// Coordinates at the finer scale `n >= layer`.
    pub fn at_scale(&self, z: u32, n: u32) -> Option<Vec<i64>> {
        let f = (z as i64).checked_pow(n.checked_sub(self.layer)?)?;
        self.coords.iter().map(|c| c.checked_mul(f)).collect()
    }

    pub(crate) fn sup_norm(&self) -> i64 {
        self.coords.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl TriangulationConfig {
    pub fn new(pair: PolyhedralPair, z: u32) -> Result<Self> {
        if z < 2 {
            return Err(Error::InvalidConfig(format!(
                "refinement ratio z must be >= 2, got {z}"
            )));
        }
        Ok(Self {
            pair,
            z,
            layer_cap: DEFAULT_LAYER_CAP,
        })
    }

    pub fn with_layer_cap(mut self, cap: u32) -> Self {
        self.layer_cap = cap;
        self
    }

    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    pub fn scale(&self, n: u32) -> f64 {
        (self.z as f64).powi(n as i32)
    }

    pub(crate) fn int_scale(&self, n: u32) -> Result<i64> {
        (self.z as i64)
            .checked_pow(n)
            .ok_or_else(|| Error::InvalidConfig(format!("z^{n} overflows the lattice")))
    }

    /// Validates a vertex: canonical, in `X`, not in `A`.
    pub fn vertex(&self, layer: u32, coords: Vec<i64>) -> Result<LatticeVertex> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        let v = LatticeVertex { layer, coords };
        self.check_vertex(&v)?;
        Ok(v)
    }

    pub(crate) fn check_vertex(&self, v: &LatticeVertex) -> Result<()> {
        if v.coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.coords.len(),
            });
        }
        let z = self.z as i64;
        if v.layer > 0 && v.coords.iter().all(|c| c.rem_euclid(z) == 0) {
            return Err(Error::InvalidVertex(format!(
                "{:?} at layer {} is not canonical",
                v.coords, v.layer
            )));
        }
        if !self.pair.lattice_in_x(&v.coords) {
            return Err(Error::InvalidVertex(format!("{:?} lies outside X", v.coords)));
        }
        if self.pair.lattice_in_a(&v.coords) {
            return Err(Error::InvalidVertex(format!("{:?} lies in A", v.coords)));
        }
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if !self.pair.contains(x)? {
            return Err(Error::OutsideX(x.to_vec()));
        }
        Ok(())
    }

    /// Minimal simplex of `T^n` containing `x`.
    pub fn locate_simplex(&self, n: u32, x: &[f64]) -> Result<SimplexRef> {
        self.check_point(x)?;
        Ok(self.locate(n, x).0)
    }

    /// Point location plus the barycentric weights of the face vertices.
    pub(crate) fn locate(&self, n: u32, x: &[f64]) -> (SimplexRef, Vec<f64>) {
        let s = self.scale(n);
        let d = x.len();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for &c in x {
            let y = c * s;
            let mut b = y.floor();
            let mut f = y - b;
            if f > 1.0 - SNAP {
                b += 1.0;
                f = 0.0;
            } else if f < SNAP {
                f = 0.0;
            }
            base.push(b as i64);
            frac.push(f);
        }
        let mut perm: Vec<usize> = (0..d).collect();
        perm.sort_by(|&a, &b| frac[b].partial_cmp(&frac[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        let mut group_ends = Vec::new();
        let mut levels = Vec::new();
        for (pos, &c) in perm.iter().enumerate() {
            if frac[c] == 0.0 {
                break;
            }
            let new_group = match levels.last() {
                None => true,
                Some(&prev) => prev - frac[c] > SNAP,
            };
            if new_group {
                levels.push(frac[c]);
                group_ends.push(pos + 1);
            } else {
                *group_ends.last_mut().unwrap() = pos + 1;
            }
        }
        let weights = weights_from_levels(&levels);
        (
            SimplexRef {
                scale_index: n,
                base,
                permutation: perm,
                group_ends,
            },
            weights,
        )
    }

    /// Barycentric weights of `x` with respect to the face vertices of `simplex`.
    pub fn barycentric(&self, simplex: &SimplexRef, x: &[f64]) -> Result<Vec<f64>> {
        self.pair.contains(x)?;
        let s = self.scale(simplex.scale_index);
        let rel: Vec<f64> = x.iter().zip(&simplex.base).map(|(&c, &b)| c * s - b as f64).collect();
        let tol = 1e-9;
        let mut levels = Vec::with_capacity(simplex.group_ends.len());
        let mut start = 0;
        for &end in &simplex.group_ends {
            let members = &simplex.permutation[start..end];
            let mean = members.iter().map(|&c| rel[c]).sum::<f64>() / members.len() as f64;
            if let Some(&c) = members.iter().find(|&&c| (rel[c] - mean).abs() > tol) {
                return Err(Error::NotInSimplex(-(rel[c] - mean).abs()));
            }
            levels.push(mean);
            start = end;
        }
        if let Some(&c) = simplex.permutation[start..].iter().find(|&&c| rel[c].abs() > tol) {
            return Err(Error::NotInSimplex(-rel[c].abs()));
        }
        let w = weights_from_levels(&levels);
        if let Some(&bad) = w.iter().find(|&&a| a < -SNAP) {
            return Err(Error::NotInSimplex(bad));
        }
        Ok(w)
    }

    /// First layer at which `x` is a lattice vertex.
    pub fn vertex_layer(&self, x: &[f64]) -> Result<VertexLayer> {
        self.check_point(x)?;
        if self.pair.distance_to_a_unchecked(x) == 0.0 {
            return Ok(VertexLayer::InA);
        }
        for n in 0..=self.layer_cap {
            let s = self.scale(n);
            if !s.is_finite() {
                break;
            }
            let on_lattice = x.iter().all(|&c| {
                let y = c * s;
                (y - y.round()).abs() <= 1e-9 && y.abs() < 9.0e15
            });
            if on_lattice {
                return Ok(VertexLayer::Layer(n));
            }
        }
        Ok(VertexLayer::NotAVertex)
    }

    /// Canonical layer-`n` vertices of `X \ A` with `||x||_inf <= radius`, lexicographic.
    pub fn enumerate_vertices(&self, n: u32, radius: u32) -> Result<Vec<LatticeVertex>> {
        let bound = self.int_scale(n)? * radius as i64;
        let mut out = Vec::new();
        self.scan_box(n, bound, |k| {
            out.push(LatticeVertex {
                layer: n,
                coords: k.to_vec(),
            })
        });
        Ok(out)
    }

    /// Visits canonical layer-`n` lattice points of `X \ A` in `[-bound, bound]^d`,
    /// in lexicographic order.
    pub(crate) fn scan_box(&self, n: u32, bound: i64, mut visit: impl FnMut(&[i64])) {
        let d = self.dim();
        let z = self.z as i64;
        let mut k = vec![0i64; d];
        let rels = self.pair.relations();
        // relations ending at coordinate j, with strictness
        let incoming: Vec<Vec<(usize, bool)>> = (0..d)
            .map(|j| {
                rels.iter()
                    .filter(|r| r.hi == j)
                    .map(|r| (r.lo, self.pair.is_essential(r)))
                    .collect()
            })
            .collect();

        fn rec(
            j: usize,
            k: &mut Vec<i64>,
            bound: i64,
            incoming: &[Vec<(usize, bool)>],
            n: u32,
            z: i64,
            visit: &mut dyn FnMut(&[i64]),
        ) {
            if j == k.len() {
                if n == 0 || k.iter().any(|c| c.rem_euclid(z) != 0) {
                    visit(k);
                }
                return;
            }
            let mut lo = -bound;
            for &(i, strict) in &incoming[j] {
                lo = lo.max(k[i] + strict as i64);
            }
            for v in lo..=bound {
                k[j] = v;
                rec(j + 1, k, bound, incoming, n, z, visit);
            }
        }
        rec(0, &mut k, bound, &incoming, n, z, &mut visit);
    }

    /// Diameter of a top simplex of `T^n`.
    pub fn mesh_diameter(&self, n: u32) -> f64 {
        (self.dim() as f64).sqrt() / self.scale(n)
    }
}

fn weights_from_levels(levels: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(levels.len() + 1);
    w.push(1.0 - levels.first().copied().unwrap_or(0.0));
    for i in 0..levels.len() {
        let next = levels.get(i + 1).copied().unwrap_or(0.0);
        w.push(levels[i] - next);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane(z: u32) -> TriangulationConfig {
        TriangulationConfig::new(PolyhedralPair::persistence_plane(), z).unwrap()
    }

    /// Solves for barycentric weights by an affine solve over a full simplex.
    fn affine_solve(verts: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let m = nalgebra::DMatrix::from_fn(d + 1, verts.len(), |r, c| if r < d { verts[c][r] } else { 1.0 });
        let mut rhs = x.to_vec();
        rhs.push(1.0);
        let b = nalgebra::DVector::from_vec(rhs);
        let sol = m.svd(true, true).solve(&b, 1e-14).unwrap();
        sol.iter().copied().collect()
    }

    #[test]
    fn locate_examples() {
        let t = plane(2);
        let s = t.locate_simplex(0, &[2.3, 4.6]).unwrap();
        assert_eq!(s.base, vec![2, 4]);
        assert_eq!(s.permutation, vec![1, 0]);
        assert_eq!(s.vertices(), vec![vec![2, 4], vec![2, 5], vec![3, 5]]);
        let verts: Vec<Vec<f64>> = s
            .vertices()
            .iter()
            .map(|k| k.iter().map(|&c| c as f64).collect())
            .collect();
        let oracle = affine_solve(&verts, &[2.3, 4.6]);
        let w = t.barycentric(&s, &[2.3, 4.6]).unwrap();
        for (a, b) in w.iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for (a, b) in w.iter().zip(&[0.4, 0.3, 0.3]) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }

        let s = t.locate_simplex(0, &[2.0, 4.0]).unwrap();
        assert_eq!(s.base, vec![2, 4]);
        assert_eq!(s.active_dims(), 0);
        assert_eq!(t.barycentric(&s, &[2.0, 4.0]).unwrap(), vec![1.0]);

        let s = t.locate_simplex(1, &[2.3, 4.6]).unwrap();
        assert_eq!(s.base, vec![4, 9]);
        assert_eq!(s.permutation, vec![0, 1]);
        let verts: Vec<Vec<f64>> = s
            .vertices()
            .iter()
            .map(|k| k.iter().map(|&c| c as f64 / 2.0).collect())
            .collect();
        let oracle = affine_solve(&verts, &[2.3, 4.6]);
        let w = t.barycentric(&s, &[2.3, 4.6]).unwrap();
        for (a, b) in w.iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn edge_midpoint() {
        let t = plane(2);
        let s = t.locate_simplex(0, &[2.5, 4.0]).unwrap();
        assert_eq!(s.vertices(), vec![vec![2, 4], vec![3, 4]]);
        let w = t.barycentric(&s, &[2.5, 4.0]).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn barycentric_rejects_points_off_the_face() {
        let t = plane(2);
        let s = t.locate_simplex(0, &[2.3, 4.6]).unwrap();
        assert!(matches!(t.barycentric(&s, &[2.7, 4.6]), Err(Error::NotInSimplex(_))));
        let edge = t.locate_simplex(0, &[2.5, 4.0]).unwrap();
        assert!(t.barycentric(&edge, &[2.5, 4.1]).is_err());
    }

    #[test]
    fn outside_x_is_rejected() {
        let t = plane(2);
        assert!(matches!(t.locate_simplex(0, &[3.0, 1.0]), Err(Error::OutsideX(_))));
    }

    #[test]
    fn boundary_ties_stay_in_x() {
        let t = TriangulationConfig::new(PolyhedralPair::mixup(), 2).unwrap();
        let x = [0.25, 0.25, 1.7];
        let s = t.locate_simplex(0, &x).unwrap();
        for v in s.vertices() {
            assert!(t.pair.lattice_in_x(&v), "{v:?}");
        }
    }

    #[test]
    fn layers() {
        let t = plane(2);
        assert_eq!(t.vertex_layer(&[2.0, 4.0]).unwrap(), VertexLayer::Layer(0));
        assert_eq!(t.vertex_layer(&[2.0, 4.5]).unwrap(), VertexLayer::Layer(1));
        assert_eq!(t.vertex_layer(&[3.0, 3.0]).unwrap(), VertexLayer::InA);
        assert_eq!(t.vertex_layer(&[0.0, 1.0 / 3.0]).unwrap(), VertexLayer::NotAVertex);
        assert_eq!(t.vertex_layer(&[0.0, 0.375]).unwrap(), VertexLayer::Layer(3));
    }

    #[test]
    fn enumeration_examples() {
        let t = plane(2);
        let v = t.enumerate_vertices(0, 1).unwrap();
        let coords: Vec<Vec<i64>> = v.into_iter().map(|v| v.coords).collect();
        assert_eq!(coords, vec![vec![-1, 0], vec![-1, 1], vec![0, 1]]);
        assert!(t.enumerate_vertices(0, 0).unwrap().is_empty());

        // brute force over the half-integer window
        let got = t.enumerate_vertices(1, 1).unwrap();
        let mut want = Vec::new();
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                let on_layer0 = a % 2 == 0 && b % 2 == 0;
                if a < b && !on_layer0 {
                    want.push(vec![a, b]);
                }
            }
        }
        let got: Vec<Vec<i64>> = got.into_iter().map(|v| v.coords).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn mesh_diameters() {
        let t = plane(2);
        assert_abs_diff_eq!(t.mesh_diameter(0), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.mesh_diameter(3), 2f64.sqrt() / 8.0, epsilon = 1e-15);
        let m = TriangulationConfig::new(PolyhedralPair::mixup(), 2).unwrap();
        // brute-force max pairwise distance of the standard 3-simplex
        let verts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 1.0, 1.0]];
        let mut best: f64 = 0.0;
        for a in &verts {
            for b in &verts {
                let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                best = best.max(d2.sqrt());
            }
        }
        assert_abs_diff_eq!(m.mesh_diameter(0), best, epsilon = 1e-15);
        for n in 0..6 {
            assert!(t.mesh_diameter(n + 1) < t.mesh_diameter(n));
            assert_eq!(t.mesh_diameter(n), t.mesh_diameter(0) / 2f64.powi(n as i32));
        }
    }

    fn random_point(pair: &PolyhedralPair, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
        loop {
            let x: Vec<f64> = (0..pair.dim()).map(|_| rng.gen_range(lo..hi)).collect();
            if pair.contains(&x).unwrap() {
                return x;
            }
        }
    }

    fn pairs() -> Vec<PolyhedralPair> {
        vec![
            PolyhedralPair::persistence_plane(),
            PolyhedralPair::mixup(),
            PolyhedralPair::barcode_space(2).unwrap(),
        ]
    }

    #[test]
    fn barycentric_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for pair in pairs() {
            let t = TriangulationConfig::new(pair.clone(), 2).unwrap();
            for n in 0..3 {
                for _ in 0..1000 {
                    let x = random_point(&pair, &mut rng, -3.0, 3.0);
                    let (s, w) = t.locate(n, &x);
                    assert!(w.iter().all(|&a| a > 0.0));
                    assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                    let sc = t.scale(n);
                    let mut rec = vec![0.0; x.len()];
                    for (k, a) in s.vertices().iter().zip(&w) {
                        assert!(pair.lattice_in_x(k));
                        for (r, &c) in rec.iter_mut().zip(k) {
                            *r += a * c as f64 / sc;
                        }
                    }
                    for (r, c) in rec.iter().zip(&x) {
                        assert_abs_diff_eq!(r, c, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn nested_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for pair in pairs() {
            for z in [2u32, 3] {
                let t = TriangulationConfig::new(pair.clone(), z).unwrap();
                for _ in 0..300 {
                    let x = random_point(&pair, &mut rng, -2.0, 2.0);
                    for n in 1..3 {
                        let fine = t.locate_simplex(n, &x).unwrap();
                        let coarse = t.locate_simplex(n - 1, &x).unwrap();
                        for k in fine.vertices() {
                            let p: Vec<f64> = k.iter().map(|&c| c as f64 / t.scale(n)).collect();
                            // the coarse face's closed carrier contains every fine vertex
                            let w = t.barycentric(&coarse, &p);
                            let full = t.locate_simplex(n - 1, &p).unwrap();
                            assert!(
                                w.is_ok() || full.vertices().iter().all(|v| coarse.vertices().contains(v)),
                                "fine vertex {p:?} escapes coarse simplex"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn locality_at_most_d_plus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for pair in pairs() {
            let t = TriangulationConfig::new(pair.clone(), 2).unwrap();
            for _ in 0..500 {
                let x = random_point(&pair, &mut rng, -3.0, 3.0);
                for n in 0..3 {
                    assert!(t.locate_simplex(n, &x).unwrap().active_dims() <= pair.dim());
                }
            }
        }
    }
}
