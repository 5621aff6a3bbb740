//! Global indexing of basis vertices.
//!
//! Blocks `B(M, N)` hold the layer-`M` vertices of rafter shell `N`
//! (`N - 1 < ||x||_inf <= N`, shell 1 also holding the origin's neighbourhood
//! `||x||_inf <= 1`). Blocks run anti-diagonally, `B(M, N)` then `B(M+1, N-1)`,
//! and vertices inside a block are lexicographic. A truncated ordering keeps
//! blocks with `M <= max_layer` and `N <= rafter`, indexed contiguously.
//!
//! Indices are computed by exact lattice counting, never by enumeration.

use serde::Serialize;

use crate::count::OrderCounter;
use crate::error::{Error, Result};
use crate::triangulation::{LatticeVertex, TriangulationConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub layer: u32,
    pub shell: u32,
    pub offset: u64,
    pub size: u64,
}

#[derive(Clone, Debug)]
pub struct BasisOrdering {
    tri: TriangulationConfig,
    counter: OrderCounter,
    max_layer: u32,
    rafter: u32,
    blocks: Vec<Block>,
    total: u64,
}

impl BasisOrdering {
    pub fn new(tri: TriangulationConfig, max_layer: u32, rafter: u32) -> Result<Self> {
        if rafter == 0 {
            return Err(Error::InvalidConfig("rafter radius must be >= 1".into()));
        }
        if max_layer > tri.layer_cap {
            return Err(Error::InvalidConfig(format!(
                "max_layer {max_layer} exceeds the layer cap {}",
                tri.layer_cap
            )));
        }
        // keep every lattice bound comfortably inside i64
        let top = tri.int_scale(max_layer)?;
        if top.checked_mul(rafter as i64 + 1).is_none_or(|b| b > (1i64 << 52)) {
            return Err(Error::InvalidConfig(format!(
                "window z^{max_layer} * {rafter} is too large for exact lattice coordinates"
            )));
        }
        let counter = OrderCounter::new(&tri.pair);
        let mut ord = Self {
            tri,
            counter,
            max_layer,
            rafter,
            blocks: Vec::new(),
            total: 0,
        };
        let mut offset: u64 = 0;
        for diag in 1..=(max_layer + rafter) {
            for layer in 0..diag {
                let shell = diag - layer;
                if layer > max_layer || shell > rafter {
                    continue;
                }
                let d = ord.tri.dim();
                let b = ord.shell_bound(layer, shell)?;
                let size = ord.shell_count(layer, shell, &vec![-b; d], &vec![b; d])?;
                let size = u64::try_from(size).map_err(|_| Error::CountOverflow)?;
                ord.blocks.push(Block {
                    layer,
                    shell,
                    offset,
                    size,
                });
                offset = offset.checked_add(size).ok_or(Error::CountOverflow)?;
            }
        }
        ord.total = offset;
        Ok(ord)
    }

    pub fn triangulation(&self) -> &TriangulationConfig {
        &self.tri
    }

    pub fn max_layer(&self) -> u32 {
        self.max_layer
    }

    pub fn rafter(&self) -> u32 {
        self.rafter
    }

    /// Number of indexed vertices.
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Number of indexed vertices born at `layer`.
    pub fn layer_size(&self, layer: u32) -> u64 {
        self.blocks.iter().filter(|b| b.layer == layer).map(|b| b.size).sum()
    }

    fn shell_bound(&self, layer: u32, shell: u32) -> Result<i64> {
        Ok(self.tri.int_scale(layer)? * shell as i64)
    }

    /// Rafter shell of a vertex, `ceil(||x||_inf)` clamped below at 1.
    pub fn shell_of(&self, v: &LatticeVertex) -> Result<u32> {
        let s = self.tri.int_scale(v.layer)?;
        let norm = v.sup_norm();
        let shell = ((norm + s - 1) / s).max(1);
        Ok(u32::try_from(shell).unwrap_or(u32::MAX))
    }

    /// Whether a valid vertex falls inside the truncation.
    pub fn in_window(&self, v: &LatticeVertex) -> bool {
        v.layer <= self.max_layer
            && self
                .tri
                .int_scale(v.layer)
                .map(|s| v.sup_norm() <= s * self.rafter as i64)
                .unwrap_or(false)
    }

    /// Canonical layer-`layer` points of `X \ A` in a box.
    fn layer_count(&self, layer: u32, lo: &[i64], hi: &[i64]) -> Result<u128> {
        let all = self.counter.count(lo, hi)?;
        if layer == 0 {
            return Ok(all);
        }
        let z = self.tri.z as i64;
        let clo: Vec<i64> = lo.iter().map(|&a| div_ceil(a, z)).collect();
        let chi: Vec<i64> = hi.iter().map(|&b| b.div_euclid(z)).collect();
        let coarse = self.counter.count(&clo, &chi)?;
        Ok(all - coarse)
    }

    /// Canonical layer-`layer` points of shell `shell` inside the box `[lo, hi]`.
    fn shell_count(&self, layer: u32, shell: u32, lo: &[i64], hi: &[i64]) -> Result<u128> {
        let outer = self.clipped_count(layer, self.shell_bound(layer, shell)?, lo, hi)?;
        if shell == 1 {
            return Ok(outer);
        }
        let inner = self.clipped_count(layer, self.shell_bound(layer, shell - 1)?, lo, hi)?;
        Ok(outer - inner)
    }

    fn clipped_count(&self, layer: u32, b: i64, lo: &[i64], hi: &[i64]) -> Result<u128> {
        let lo: Vec<i64> = lo.iter().map(|&a| a.max(-b)).collect();
        let hi: Vec<i64> = hi.iter().map(|&a| a.min(b)).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Ok(0);
        }
        self.layer_count(layer, &lo, &hi)
    }

    fn block_position(&self, layer: u32, shell: u32) -> Option<&Block> {
        self.blocks.iter().find(|b| b.layer == layer && b.shell == shell)
    }

    /// Global index of a vertex inside the truncation.
    pub fn basis_index(&self, v: &LatticeVertex) -> Result<u64> {
        self.tri.check_vertex(v)?;
        let shell = self.shell_of(v)?;
        let block = self.block_position(v.layer, shell).ok_or_else(|| {
            Error::InvalidVertex(format!(
                "{:?} at layer {} lies outside the truncated window",
                v.coords, v.layer
            ))
        })?;
        let b = self.shell_bound(v.layer, shell)?;
        let d = self.tri.dim();
        let mut lo = vec![-b; d];
        let mut hi = vec![b; d];
        let mut rank: u128 = 0;
        for p in 0..d {
            if v.coords[p] > lo[p] {
                hi[p] = v.coords[p] - 1;
                rank += self.shell_count(v.layer, shell, &lo, &hi)?;
            }
            lo[p] = v.coords[p];
            hi[p] = v.coords[p];
        }
        Ok(block.offset + rank as u64)
    }

    /// Inverse of [`basis_index`](Self::basis_index).
    pub fn vertex_at(&self, index: u64) -> Result<LatticeVertex> {
        if index >= self.total {
            return Err(Error::IndexOutOfRange(index));
        }
        let pos = self.blocks.partition_point(|b| b.offset + b.size <= index);
        let block = self.blocks[pos];
        let mut rank = (index - block.offset) as u128;
        let b = self.shell_bound(block.layer, block.shell)?;
        let d = self.tri.dim();
        let mut lo = vec![-b; d];
        let mut hi = vec![b; d];
        for p in 0..d {
            // smallest t with count(k_p in [lo_p, t]) > rank
            let (mut a, mut c) = (lo[p], hi[p]);
            let base_lo = lo[p];
            while a < c {
                let mid = a + (c - a) / 2;
                hi[p] = mid;
                let n = self.shell_count(block.layer, block.shell, &lo, &hi)?;
                if n > rank {
                    c = mid;
                } else {
                    a = mid + 1;
                }
            }
            if a > base_lo {
                hi[p] = a - 1;
                rank -= self.shell_count(block.layer, block.shell, &lo, &hi)?;
            }
            lo[p] = a;
            hi[p] = a;
        }
        Ok(LatticeVertex {
            layer: block.layer,
            coords: lo,
        })
    }

    /// All indexed vertices of one block, lexicographic.
    pub fn block_vertices(&self, layer: u32, shell: u32) -> Result<Vec<LatticeVertex>> {
        let b = self.shell_bound(layer, shell)?;
        let inner = if shell == 1 {
            -1
        } else {
            self.shell_bound(layer, shell - 1)?
        };
        let mut out = Vec::new();
        self.tri.scan_box(layer, b, |k| {
            if k.iter().map(|c| c.abs()).max().unwrap_or(0) > inner {
                out.push(LatticeVertex {
                    layer,
                    coords: k.to_vec(),
                });
            }
        });
        Ok(out)
    }
}

fn div_ceil(a: i64, z: i64) -> i64 {
    -((-a).div_euclid(z))
}
