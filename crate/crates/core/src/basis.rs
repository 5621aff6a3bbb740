//! Kernel functionals on the nested CFK family, their stacked sums, Schauder
//! coefficients and minimality witnesses.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::diagram::SignedDiagram;
use crate::error::{Error, Result};
use crate::ordering::BasisOrdering;
use crate::triangulation::{LatticeVertex, TriangulationConfig};

/// Per-layer Lipschitz constants `L_n`, summable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LipschitzSchedule {
    /// `L_n = l0 * ratio^n`.
    Geometric { l0: f64, ratio: f64 },
    /// `L_0 = first`, `L_n = rest * ratio^n` for `n >= 1`.
    Split { first: f64, rest: f64, ratio: f64 },
}

impl LipschitzSchedule {
    /// `L_n = z^-n`, the schedule hard-wired into stacked functionals.
    pub fn standard(z: u32) -> Self {
        Self::Geometric {
            l0: 1.0,
            ratio: 1.0 / z as f64,
        }
    }

    /// `L_0 = total - eps` and `L_n = eps * 2^-n`, summing to `total`.
    pub fn concentrated(total: f64, eps: f64) -> Self {
        Self::Split {
            first: total - eps,
            rest: eps,
            ratio: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (head, rest, ratio) = match *self {
            Self::Geometric { l0, ratio } => (l0, l0, ratio),
            Self::Split { first, rest, ratio } => (first, rest, ratio),
        };
        let ok = head.is_finite() && head > 0.0 && rest.is_finite() && rest > 0.0;
        if !ok || !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "schedule {self:?} needs positive constants and 0 < ratio < 1"
            )));
        }
        Ok(())
    }

    pub fn at(&self, n: u32) -> f64 {
        match *self {
            Self::Geometric { l0, ratio } => l0 * ratio.powi(n as i32),
            Self::Split { first, rest, ratio } => {
                if n == 0 {
                    first
                } else {
                    rest * ratio.powi(n as i32)
                }
            }
        }
    }

    /// `L = sum_n L_n`.
    pub fn total(&self) -> f64 {
        match *self {
            Self::Geometric { l0, ratio } => l0 / (1.0 - ratio),
            Self::Split { first, rest, ratio } => first + rest * ratio / (1.0 - ratio),
        }
    }

    /// `sum_{n > big_n} L_n`.
    pub fn tail(&self, big_n: u32) -> f64 {
        let (c, ratio) = match *self {
            Self::Geometric { l0, ratio } => (l0, ratio),
            Self::Split { rest, ratio, .. } => (rest, ratio),
        };
        c * ratio.powi(big_n as i32 + 1) / (1.0 - ratio)
    }

    /// `sum_{n <= big_n} L_n`.
    pub fn partial(&self, big_n: u32) -> f64 {
        (0..=big_n).map(|n| self.at(n)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Plain,
    Stacked,
}

/// Everything that determines a truncated basis and its indexing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    pub triangulation: TriangulationConfig,
    pub schedule: LipschitzSchedule,
    pub max_layer: u32,
    pub rafter: u32,
    pub kind: BasisKind,
}

impl BasisConfig {
    /// Default schedule `L_n = z^-n`.
    pub fn new(triangulation: TriangulationConfig, max_layer: u32, rafter: u32, kind: BasisKind) -> Self {
        let schedule = LipschitzSchedule::standard(triangulation.z);
        Self {
            triangulation,
            schedule,
            max_layer,
            rafter,
            kind,
        }
    }

    pub fn with_schedule(mut self, schedule: LipschitzSchedule) -> Self {
        self.schedule = schedule;
        self
    }
}

/// A functional supplied by evaluation, with a declared Lipschitz constant.
pub trait LipschitzFunctional: Sync {
    fn eval(&self, x: &[f64]) -> f64;
    fn lipschitz(&self) -> f64;
}

/// Closure-backed [`LipschitzFunctional`].
pub struct FnFunctional<F> {
    f: F,
    lip: f64,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnFunctional<F> {
    pub fn new(lip: f64, f: F) -> Self {
        Self { f, lip }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> LipschitzFunctional for FnFunctional<F> {
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn lipschitz(&self) -> f64 {
        self.lip
    }
}

/// Coefficients of a functional in a basis, keyed by global index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMap {
    pub config: BasisConfig,
    pub lipschitz: f64,
    pub entries: BTreeMap<u64, f64>,
}

/// Lipschitz constants of the functionals nonzero at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzBudget {
    pub per_layer: Vec<usize>,
    pub total: f64,
}

/// A validated basis configuration with its index.
#[derive(Clone, Debug)]
pub struct Basis {
    config: BasisConfig,
    ordering: BasisOrdering,
}

impl Basis {
    pub fn new(config: BasisConfig) -> Result<Self> {
        config.schedule.validate()?;
        if config.kind == BasisKind::Stacked && config.schedule != LipschitzSchedule::standard(config.triangulation.z) {
            return Err(Error::InvalidConfig(
                "stacked functionals fix the schedule to L_n = z^-n".into(),
            ));
        }
        let ordering = BasisOrdering::new(config.triangulation.clone(), config.max_layer, config.rafter)?;
        Ok(Self { config, ordering })
    }

    pub fn config(&self) -> &BasisConfig {
        &self.config
    }

    pub fn ordering(&self) -> &BasisOrdering {
        &self.ordering
    }

    pub fn triangulation(&self) -> &TriangulationConfig {
        &self.config.triangulation
    }

    pub fn kind(&self) -> BasisKind {
        self.config.kind
    }

    pub fn max_layer(&self) -> u32 {
        self.config.max_layer
    }

    pub fn dim(&self) -> usize {
        self.config.triangulation.dim()
    }

    pub fn len(&self) -> u64 {
        self.ordering.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordering.is_empty()
    }

    pub fn schedule(&self) -> &LipschitzSchedule {
        &self.config.schedule
    }

    pub fn basis_index(&self, v: &LatticeVertex) -> Result<u64> {
        self.ordering.basis_index(v)
    }

    pub fn vertex_at(&self, index: u64) -> Result<LatticeVertex> {
        self.ordering.vertex_at(index)
    }

    fn zf(&self) -> f64 {
        self.config.triangulation.z as f64
    }

    /// `K_v^n(v) = L_n z^-n / sqrt 2`.
    pub fn kernel_peak(&self, n: u32) -> f64 {
        self.config.schedule.at(n) / self.zf().powi(n as i32) * FRAC_1_SQRT_2
    }

    /// Peak of the layer-`n` summand of a stacked functional, `z^-2n / sqrt 2`.
    fn stacked_peak(&self, n: u32) -> f64 {
        self.zf().powi(-2 * n as i32) * FRAC_1_SQRT_2
    }

    /// Barycentric weight of `v` at `x` in `T^n`.
    fn hat(&self, v: &LatticeVertex, n: u32, x: &[f64]) -> Result<f64> {
        let tri = &self.config.triangulation;
        tri.check_vertex(v)?;
        if n < v.layer {
            return Err(Error::LayerBelowBirth {
                layer: n,
                birth: v.layer,
            });
        }
        if !tri.pair.contains(x)? {
            return Err(Error::OutsideX(x.to_vec()));
        }
        let target = v
            .at_scale(tri.z, n)
            .ok_or_else(|| Error::InvalidConfig(format!("layer {n} overflows the lattice")))?;
        let (simplex, weights) = tri.locate(n, x);
        Ok((0..weights.len())
            .find(|&i| simplex.vertex(i) == target)
            .map_or(0.0, |i| weights[i]))
    }

    /// `K_v^n(x)` for any `n >= layer(v)`.
    pub fn eval_kernel(&self, v: &LatticeVertex, n: u32, x: &[f64]) -> Result<f64> {
        Ok(self.hat(v, n, x)? * self.kernel_peak(n))
    }

    /// `sqrt 2 d(v, A) (z^2 - 1) / z^2`.
    pub fn stacked_factor(&self, v: &LatticeVertex) -> f64 {
        let tri = &self.config.triangulation;
        let d = tri.pair.distance_to_a_unchecked(&v.point(tri.z));
        let z2 = self.zf() * self.zf();
        SQRT_2 * d * (z2 - 1.0) / z2
    }

    /// Stacked functional truncated at `max_layer`.
    pub fn eval_stacked(&self, v: &LatticeVertex, x: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for n in v.layer..=self.config.max_layer {
            sum += self.hat(v, n, x)? * self.stacked_peak(n);
        }
        Ok(self.stacked_factor(v) * sum)
    }

    /// Untruncated stacked peak `d(v, A) / z^(2 layer)`.
    pub fn stacked_peak_limit(&self, v: &LatticeVertex) -> f64 {
        let tri = &self.config.triangulation;
        tri.pair.distance_to_a_unchecked(&v.point(tri.z)) / self.zf().powi(2 * v.layer as i32)
    }

    /// Mass lost at a point of distance `dist` from `A` by truncating stacked sums at `max_layer`.
    pub fn stacked_tail(&self, dist: f64) -> f64 {
        dist * self.zf().powi(-2 * (self.config.max_layer as i32 + 1))
    }

    /// Visits every windowed basis functional nonzero at `x` with its value,
    /// layer by layer and in local vertex order. Stacked functionals are
    /// visited once per summand layer.
    pub(crate) fn for_each_nonzero(
        &self,
        x: &[f64],
        mut visit: impl FnMut(&LatticeVertex, f64) -> Result<()>,
    ) -> Result<()> {
        let tri = &self.config.triangulation;
        for n in 0..=self.config.max_layer {
            let (simplex, weights) = tri.locate(n, x);
            for (i, &w) in weights.iter().enumerate() {
                let k = simplex.vertex(i);
                if tri.pair.lattice_in_a(&k) {
                    continue;
                }
                let v = LatticeVertex::canonical(tri.z, n, k);
                if !self.ordering.in_window(&v) {
                    continue;
                }
                match self.config.kind {
                    BasisKind::Plain if v.layer == n => visit(&v, w * self.kernel_peak(n))?,
                    BasisKind::Plain => {}
                    BasisKind::Stacked => visit(&v, self.stacked_factor(&v) * w * self.stacked_peak(n))?,
                }
            }
        }
        Ok(())
    }

    /// Sum of `L_n` over the windowed plain functionals nonzero at `x`.
    pub fn lipschitz_budget(&self, x: &[f64]) -> Result<LipschitzBudget> {
        let tri = &self.config.triangulation;
        if !tri.pair.contains(x)? {
            return Err(Error::OutsideX(x.to_vec()));
        }
        let mut per_layer = Vec::with_capacity(self.config.max_layer as usize + 1);
        let mut total = 0.0;
        for n in 0..=self.config.max_layer {
            let (simplex, weights) = tri.locate(n, x);
            let count = (0..weights.len())
                .filter(|&i| {
                    let k = simplex.vertex(i);
                    if weights[i] <= 0.0 || tri.pair.lattice_in_a(&k) {
                        return false;
                    }
                    let v = LatticeVertex::canonical(tri.z, n, k);
                    v.layer == n && self.ordering.in_window(&v)
                })
                .count();
            total += self.config.schedule.at(n) * count as f64;
            per_layer.push(count);
        }
        Ok(LipschitzBudget { per_layer, total })
    }

    /// Windowed vertices grouped by layer, each layer lexicographic.
    fn vertices_by_layer(&self) -> Result<Vec<Vec<(u64, LatticeVertex)>>> {
        let mut out = vec![Vec::new(); self.config.max_layer as usize + 1];
        for b in self.ordering.blocks() {
            let vs = self.ordering.block_vertices(b.layer, b.shell)?;
            out[b.layer as usize].extend(vs.into_iter().enumerate().map(|(i, v)| (b.offset + i as u64, v)));
        }
        Ok(out)
    }

    fn check_zero_on_a(&self, f: &dyn LipschitzFunctional, k: &[i64], n: u32) -> Result<()> {
        let x: Vec<f64> = k
            .iter()
            .map(|&c| c as f64 / self.config.triangulation.scale(n))
            .collect();
        let value = f.eval(&x);
        if value.abs() > 1e-9 {
            return Err(Error::NonzeroOnA { point: x, value });
        }
        Ok(())
    }

    /// Plain-basis coefficients `a_v = (f(v) - f^{n-1}(v)) / K_v(v)`, where
    /// `f^{n-1}` interpolates `f` linearly on `T^{n-1}`.
    pub fn schauder_coefficients(&self, f: &dyn LipschitzFunctional) -> Result<CoefficientMap> {
        if self.config.kind != BasisKind::Plain {
            return Err(Error::WrongKind("plain coefficients need a plain basis"));
        }
        let tri = &self.config.triangulation;
        let mut entries = BTreeMap::new();
        for (n, layer) in self.vertices_by_layer()?.into_iter().enumerate() {
            let n = n as u32;
            for (index, v) in layer {
                let p = v.point(tri.z);
                let mut interp = 0.0;
                if n > 0 {
                    let (simplex, weights) = tri.locate(n - 1, &p);
                    for (i, &w) in weights.iter().enumerate() {
                        let k = simplex.vertex(i);
                        if tri.pair.lattice_in_a(&k) {
                            self.check_zero_on_a(f, &k, n - 1)?;
                            continue;
                        }
                        let u: Vec<f64> = k.iter().map(|&c| c as f64 / tri.scale(n - 1)).collect();
                        interp += w * f.eval(&u);
                    }
                }
                let a = (f.eval(&p) - interp) / self.kernel_peak(n);
                if a != 0.0 {
                    entries.insert(index, a);
                }
            }
        }
        Ok(CoefficientMap {
            config: self.config.clone(),
            lipschitz: f.lipschitz(),
            entries,
        })
    }

    /// Stacked coefficients `a_v = (f(v) - fhat^{N-1}(v)) / Kstack_v(v)`.
    /// Running sums are evaluated from stored coefficients through the at most
    /// `d + 1` functionals per layer that are nonzero at `v`.
    pub fn stacked_coefficients(&self, f: &dyn LipschitzFunctional) -> Result<CoefficientMap> {
        if self.config.kind != BasisKind::Stacked {
            return Err(Error::WrongKind("stacked coefficients need a stacked basis"));
        }
        let tri = &self.config.triangulation;
        let mut by_vertex: HashMap<LatticeVertex, f64> = HashMap::new();
        let mut entries = BTreeMap::new();
        for (big_n, layer) in self.vertices_by_layer()?.into_iter().enumerate() {
            let big_n = big_n as u32;
            let mut fresh = Vec::with_capacity(layer.len());
            for (index, v) in layer {
                let p = v.point(tri.z);
                let mut running = 0.0;
                for n in 0..big_n {
                    let (simplex, weights) = tri.locate(n, &p);
                    for (i, &w) in weights.iter().enumerate() {
                        let k = simplex.vertex(i);
                        if tri.pair.lattice_in_a(&k) {
                            self.check_zero_on_a(f, &k, n)?;
                            continue;
                        }
                        let u = LatticeVertex::canonical(tri.z, n, k);
                        if let Some(a) = by_vertex.get(&u) {
                            running += a * self.stacked_factor(&u) * w * self.stacked_peak(n);
                        }
                    }
                }
                let peak = self.eval_stacked(&v, &p)?;
                let a = (f.eval(&p) - running) / peak;
                fresh.push((v, a));
                if a != 0.0 {
                    entries.insert(index, a);
                }
            }
            by_vertex.extend(fresh);
        }
        Ok(CoefficientMap {
            config: self.config.clone(),
            lipschitz: f.lipschitz(),
            entries,
        })
    }

    /// A weighted diagram agreeing with `delta_v` on every plain functional
    /// except `K_v`, built by descending through the layers below `v`.
    pub fn minimality_witness(&self, v: &LatticeVertex) -> Result<SignedDiagram> {
        let tri = &self.config.triangulation;
        tri.check_vertex(v)?;
        if v.layer > self.config.max_layer {
            return Err(Error::InvalidVertex(format!(
                "layer {} exceeds max_layer {}",
                v.layer, self.config.max_layer
            )));
        }
        let p = v.point(tri.z);
        let mut points: Vec<(LatticeVertex, f64)> = Vec::new();
        for l in (0..v.layer).rev() {
            let (simplex, weights) = tri.locate(l, &p);
            let mut stage = Vec::new();
            for (i, &w) in weights.iter().enumerate() {
                let k = simplex.vertex(i);
                if tri.pair.lattice_in_a(&k) {
                    continue;
                }
                let u = LatticeVertex::canonical(tri.z, l, k);
                if u.layer != l {
                    continue;
                }
                let peak = self.kernel_peak(l);
                let mut beta = 0.0;
                for (q, c) in &points {
                    beta += c * self.eval_kernel(&u, l, &q.point(tri.z))?;
                }
                stage.push((u, (w * peak - beta) / peak));
            }
            points.extend(stage);
        }
        let mut out = SignedDiagram::new(tri.pair.clone());
        for (u, c) in points {
            out.push(u.point(tri.z), c)?;
        }
        Ok(out)
    }
}

/// Coefficients keyed by vertex, for evaluating many partial sums.
#[derive(Clone, Debug)]
pub struct CoefficientLookup {
    by_vertex: HashMap<LatticeVertex, f64>,
}

impl CoefficientLookup {
    /// `[f^0(x), ..., f^max_layer(x)]`, where `f^n` sums functionals born at layers `<= n`.
    pub fn partial_sums(&self, basis: &Basis, x: &[f64]) -> Result<Vec<f64>> {
        let mut per = vec![0.0; basis.max_layer() as usize + 1];
        basis.for_each_nonzero(x, |v, value| {
            if let Some(a) = self.by_vertex.get(v) {
                per[v.layer as usize] += a * value;
            }
            Ok(())
        })?;
        for n in 1..per.len() {
            per[n] += per[n - 1];
        }
        Ok(per)
    }
}

impl CoefficientMap {
    pub fn by_vertex(&self, basis: &Basis) -> Result<CoefficientLookup> {
        let mut by_vertex = HashMap::with_capacity(self.entries.len());
        for (&i, &a) in &self.entries {
            by_vertex.insert(basis.vertex_at(i)?, a);
        }
        Ok(CoefficientLookup { by_vertex })
    }

    /// Partial sum over functionals born at layers `<= upto`, evaluated at `x`.
    pub fn partial_sum(&self, basis: &Basis, upto: u32, x: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        basis.for_each_nonzero(x, |v, value| {
            if v.layer <= upto {
                if let Some(a) = self.entries.get(&basis.basis_index(v)?) {
                    sum += a * value;
                }
            }
            Ok(())
        })?;
        Ok(sum)
    }

    /// `Lip(f) * M_n`, the plain reconstruction bound at layer `n`.
    pub fn plain_error_bound(&self, n: u32) -> f64 {
        self.lipschitz * self.config.triangulation.mesh_diameter(n)
    }

    /// `(sum_{n<=N} z^n / z^2N) Lip(f) + z^-(2N+2) sup|f|`, the stacked bound at layer `N`.
    pub fn stacked_error_bound(&self, big_n: u32, sup: f64) -> f64 {
        let z = self.config.triangulation.z as f64;
        let geo: f64 = (0..=big_n).map(|n| z.powi(n as i32)).sum();
        geo / z.powi(2 * big_n as i32) * self.lipschitz + z.powi(-(2 * big_n as i32 + 2)) * sup
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PolyhedralPair;
    use approx::assert_abs_diff_eq;

    fn plane_basis(kind: BasisKind, layers: u32, rafter: u32) -> Basis {
        let tri = TriangulationConfig::new(PolyhedralPair::persistence_plane(), 2).unwrap();
        Basis::new(BasisConfig::new(tri, layers, rafter, kind)).unwrap()
    }

    fn vx(layer: u32, coords: &[i64]) -> LatticeVertex {
        LatticeVertex {
            layer,
            coords: coords.to_vec(),
        }
    }

    #[test]
    fn schedules() {
        let g = LipschitzSchedule::standard(2);
        assert_abs_diff_eq!(g.total(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.tail(4), 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.partial(4) + g.tail(4), g.total(), epsilon = 1e-15);
        let s = LipschitzSchedule::concentrated(2.0, 1e-3);
        assert_abs_diff_eq!(s.total(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.at(0), 2.0 - 1e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.partial(10) + s.tail(10), 2.0, epsilon = 1e-15);
        assert!(LipschitzSchedule::Geometric { l0: 1.0, ratio: 1.0 }.validate().is_err());
    }

    #[test]
    fn peaks() {
        let b = plane_basis(BasisKind::Plain, 3, 2);
        assert_abs_diff_eq!(b.kernel_peak(0), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.kernel_peak(2), 0.04419417382415922, epsilon = 1e-15);
    }

    #[test]
    fn kernel_examples() {
        let b = plane_basis(BasisKind::Plain, 3, 8);
        let v = vx(0, &[2, 4]);
        assert_abs_diff_eq!(
            b.eval_kernel(&v, 0, &[2.0, 4.0]).unwrap(),
            1.0 / SQRT_2,
            epsilon = 1e-15
        );
        assert_eq!(b.eval_kernel(&v, 0, &[3.0, 4.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            b.eval_kernel(&v, 0, &[2.5, 4.0]).unwrap(),
            0.5 / SQRT_2,
            epsilon = 1e-15
        );
        let w = vx(1, &[4, 9]);
        assert!(matches!(
            b.eval_kernel(&w, 0, &[2.0, 4.5]),
            Err(Error::LayerBelowBirth { .. })
        ));
        assert!(b.eval_kernel(&v, 0, &[4.0, 2.0]).is_err());
    }

    #[test]
    fn stacked_examples() {
        let b = plane_basis(BasisKind::Stacked, 6, 8);
        let v = vx(0, &[2, 4]);
        let peak = b.eval_stacked(&v, &[2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(peak + b.stacked_tail(SQRT_2), SQRT_2, epsilon = 1e-12);
        assert_eq!(b.eval_stacked(&v, &[3.0, 3.0]).unwrap(), 0.0);
        // term-by-term oracle at (2.5, 4.5)
        let x = [2.5, 4.5];
        let mut direct = 0.0;
        for n in 0..=6 {
            let k = b.eval_kernel(&v, n, &x).unwrap() / b.kernel_peak(n) * 4f64.powi(-(n as i32)) / SQRT_2;
            direct += k;
        }
        direct *= SQRT_2 * SQRT_2 * 0.75;
        assert_abs_diff_eq!(b.eval_stacked(&v, &x).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn stacked_rejects_custom_schedule() {
        let tri = TriangulationConfig::new(PolyhedralPair::persistence_plane(), 2).unwrap();
        let cfg =
            BasisConfig::new(tri, 2, 2, BasisKind::Stacked).with_schedule(LipschitzSchedule::concentrated(2.0, 0.1));
        assert!(Basis::new(cfg).is_err());
    }

    #[test]
    fn zero_functional_has_no_coefficients() {
        let b = plane_basis(BasisKind::Plain, 2, 2);
        let f = FnFunctional::new(0.0, |_x: &[f64]| 0.0);
        assert!(b.schauder_coefficients(&f).unwrap().entries.is_empty());
        let s = plane_basis(BasisKind::Stacked, 2, 2);
        assert!(s.stacked_coefficients(&f).unwrap().entries.is_empty());
        assert!(b.stacked_coefficients(&f).is_err());
    }

    #[test]
    fn basis_element_has_unit_coefficient() {
        let b = plane_basis(BasisKind::Plain, 2, 3);
        for v in [vx(0, &[0, 2]), vx(1, &[1, 4]), vx(2, &[-3, 5])] {
            let probe = b.clone();
            let vv = v.clone();
            let f = FnFunctional::new(1.0, move |x: &[f64]| probe.eval_kernel(&vv, vv.layer, x).unwrap());
            let c = b.schauder_coefficients(&f).unwrap();
            let idx = b.basis_index(&v).unwrap();
            for (&i, &a) in &c.entries {
                let want = if i == idx { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(a, want, epsilon = 1e-12);
            }
            assert!(c.entries.contains_key(&idx));
        }
    }

    #[test]
    fn nonzero_on_a_is_rejected() {
        let b = plane_basis(BasisKind::Plain, 2, 2);
        let f = FnFunctional::new(1.0, |x: &[f64]| 1.0 + x[0].abs().min(1.0));
        assert!(matches!(b.schauder_coefficients(&f), Err(Error::NonzeroOnA { .. })));
    }

    #[test]
    fn distance_has_unit_stacked_coefficients() {
        let b = plane_basis(BasisKind::Stacked, 4, 2);
        let pair = b.triangulation().pair.clone();
        let f = FnFunctional::new(1.0, move |x: &[f64]| pair.distance_to_a_unchecked(x));
        let c = b.stacked_coefficients(&f).unwrap();
        assert_eq!(c.entries.len() as u64, b.len());
        for (&i, &a) in &c.entries {
            let v = b.vertex_at(i).unwrap();
            // truncation at max_layer perturbs the coefficient by the relative tail
            let slack = 4.0 * 4f64.powi(-(5 - v.layer as i32));
            assert!((a - 1.0).abs() <= slack, "{v:?}: {a}");
        }
    }

    #[test]
    fn stacked_reconstruction_is_exact_on_vertices() {
        let b = plane_basis(BasisKind::Stacked, 3, 2);
        let f = FnFunctional::new(1.0, |x: &[f64]| {
            let d = (x[1] - x[0]) / SQRT_2;
            d.min(1.0) * (1.0 - (x[0] * x[0] + x[1] * x[1]).sqrt() / 3.0).max(0.0)
        });
        let c = b.stacked_coefficients(&f).unwrap();
        for upto in 0..=3u32 {
            for layer in 0..=upto {
                for v in b.triangulation().enumerate_vertices(layer, 1).unwrap() {
                    let p = v.point(2);
                    let got = c.partial_sum(&b, upto, &p).unwrap();
                    assert_abs_diff_eq!(got, f.eval(&p), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn witness_examples() {
        let b = plane_basis(BasisKind::Plain, 2, 8);
        assert!(b.minimality_witness(&vx(0, &[2, 4])).unwrap().is_empty());
        let w = b.minimality_witness(&vx(1, &[4, 9])).unwrap();
        assert!(!w.is_empty() && w.len() <= 3);
        // weights equal the barycentric weights K_w(v)/K_w(w) of v in its layer-0 simplex
        for pt in w.points() {
            assert_abs_diff_eq!(pt.weight, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn budget_examples() {
        let b = plane_basis(BasisKind::Plain, 4, 8);
        let on_vertex = b.lipschitz_budget(&[2.0, 4.0]).unwrap();
        assert_eq!(on_vertex.per_layer, vec![1, 0, 0, 0, 0]);
        assert_abs_diff_eq!(on_vertex.total, 1.0, epsilon = 1e-15);
        let in_a = b.lipschitz_budget(&[3.3, 3.3]).unwrap();
        assert_eq!(in_a.total, 0.0);
        let generic = b.lipschitz_budget(&[2.3, 4.6]).unwrap();
        assert!(generic.total <= 3.0 * b.schedule().total());
    }
}
