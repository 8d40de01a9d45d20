//! Graded radial meshes, radial weights and sampled radial profiles.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::params::HardyParams;
use crate::quadrature::{linear_moment, power_integral, weighted_integral};

pub const MIN_INTERVALS: usize = 16;

/// Nodes `r_in + (r_out - r_in)(i/n)^g`, `i = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    r_in: f64,
    r_out: f64,
    grading: f64,
    nodes: Vec<f64>,
}

impl RadialMesh {
    pub fn new(r_in: f64, r_out: f64, intervals: usize, grading: f64) -> Result<Self> {
        if !(r_in >= 0.0 && r_in.is_finite() && r_out.is_finite() && r_out > r_in) {
            return Err(HardyError::invalid(format!(
                "mesh bounds must satisfy 0 <= r_in < r_out (got {r_in}, {r_out})"
            )));
        }
        if intervals < MIN_INTERVALS {
            return Err(HardyError::invalid(format!(
                "mesh needs at least {MIN_INTERVALS} intervals (got {intervals})"
            )));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(HardyError::invalid(format!("grading must be >= 1 (got {grading})")));
        }
        let n = intervals as f64;
        let len = r_out - r_in;
        let mut nodes: Vec<f64> = (0..=intervals)
            .map(|i| r_in + len * (i as f64 / n).powf(grading))
            .collect();
        nodes[intervals] = r_out;
        Ok(Self {
            r_in,
            r_out,
            grading,
            nodes,
        })
    }

    /// Ball `[0, radius]`.
    pub fn ball(radius: f64, intervals: usize, grading: f64) -> Result<Self> {
        Self::new(0.0, radius, intervals, grading)
    }

    pub fn r_in(&self) -> f64 {
        self.r_in
    }

    pub fn r_out(&self) -> f64 {
        self.r_out
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_ball(&self) -> bool {
        self.r_in == 0.0
    }

    /// Same domain and grading with `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.r_in, self.r_out, self.intervals() * factor.max(1), self.grading)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_in && r <= self.r_out
    }

    /// Index `j` of the cell `[x_j, x_{j+1}]` holding `r` (clamped to the domain).
    pub fn locate(&self, r: f64) -> usize {
        let j = self.nodes.partition_point(|&x| x <= r);
        j.saturating_sub(1).min(self.intervals() - 1)
    }

    /// Index of the node equal to `r` up to rounding.
    pub fn find_node(&self, r: f64) -> Option<usize> {
        let tol = 1e-12 * self.r_out;
        let j = self.locate(r);
        [j, j + 1]
            .into_iter()
            .find(|&i| (self.nodes[i] - r).abs() <= tol)
    }

    fn check(&self, r: f64) -> Result<()> {
        if self.contains(r) {
            Ok(())
        } else {
            Err(HardyError::OutOfDomain {
                r,
                lo: self.r_in,
                hi: self.r_out,
            })
        }
    }
}

pub fn build_mesh(r_in: f64, r_out: f64, intervals: usize, grading: f64) -> Result<Arc<RadialMesh>> {
    RadialMesh::new(r_in, r_out, intervals, grading).map(Arc::new)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `dx`: density `|S^{N-1}| r^{N-1}`.
    Lebesgue,
    /// `Γ_μ dx`: density `|S^{N-1}| r^{N-1+τ₊}`.
    GammaWeighted,
}

/// Radial density `|S^{N-1}| r^a` of `dx` or `dγ_μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialWeight {
    kind: WeightKind,
    exponent: f64,
    area: f64,
}

impl RadialWeight {
    pub fn new(kind: WeightKind, params: &HardyParams) -> Self {
        let base = params.n() - 1.0;
        let exponent = match kind {
            WeightKind::Lebesgue => base,
            WeightKind::GammaWeighted => base + params.tau_plus(),
        };
        Self {
            kind,
            exponent,
            area: params.sphere_area(),
        }
    }

    pub fn lebesgue(params: &HardyParams) -> Self {
        Self::new(WeightKind::Lebesgue, params)
    }

    pub fn gamma_weighted(params: &HardyParams) -> Self {
        Self::new(WeightKind::GammaWeighted, params)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    /// Power `a` in the density `|S| r^a`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn density(&self, r: f64) -> f64 {
        self.area * r.powf(self.exponent)
    }

    /// Weighted measure of the shell `lo < |x| < hi`.
    pub fn measure(&self, lo: f64, hi: f64) -> f64 {
        self.area * power_integral(lo, hi, self.exponent)
    }
}

/// Sorted, disjoint union of closed radial intervals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntervalSet {
    parts: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        let mut s = Self::new();
        s.push(lo, hi);
        s
    }

    /// Appends `[lo, hi]`; intervals must arrive in increasing order.
    pub fn push(&mut self, lo: f64, hi: f64) {
        if hi <= lo {
            return;
        }
        if let Some(last) = self.parts.last_mut() {
            if lo <= last.1 {
                last.1 = last.1.max(hi);
                return;
            }
        }
        self.parts.push((lo, hi));
    }

    pub fn parts(&self) -> &[(f64, f64)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self, w: &RadialWeight) -> f64 {
        self.parts.iter().map(|&(a, b)| w.measure(a, b)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interpolation {
    PiecewiseLinear,
    /// `u(r) = r^exponent · v(r)` with the regular part `v` sampled.
    SingularSplit { exponent: f64 },
}

/// A radial profile sampled on a mesh.
///
/// With [`Interpolation::SingularSplit`] the samples are the regular part
/// `v`, which is interpolated linearly; the power factor is kept exact.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    mesh: Arc<RadialMesh>,
    samples: Vec<f64>,
    interp: Interpolation,
}

impl RadialFunction {
    pub fn linear(mesh: Arc<RadialMesh>, values: Vec<f64>) -> Result<Self> {
        check_len(&mesh, &values)?;
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() && mesh.node(i) > 0.0 {
                return Err(HardyError::invalid(format!(
                    "non-finite value at r = {}",
                    mesh.node(i)
                )));
            }
        }
        Ok(Self {
            mesh,
            samples: values,
            interp: Interpolation::PiecewiseLinear,
        })
    }

    pub fn split(mesh: Arc<RadialMesh>, exponent: f64, regular: Vec<f64>) -> Result<Self> {
        check_len(&mesh, &regular)?;
        if !exponent.is_finite() {
            return Err(HardyError::invalid("split exponent must be finite"));
        }
        if regular.iter().any(|v| !v.is_finite()) {
            return Err(HardyError::invalid("regular part must be finite at every node"));
        }
        if exponent == 0.0 {
            return Self::linear(mesh, regular);
        }
        Ok(Self {
            mesh,
            samples: regular,
            interp: Interpolation::SingularSplit { exponent },
        })
    }

    pub fn zeros(mesh: Arc<RadialMesh>) -> Self {
        let n = mesh.nodes().len();
        Self {
            mesh,
            samples: vec![0.0; n],
            interp: Interpolation::PiecewiseLinear,
        }
    }

    pub fn from_fn(mesh: Arc<RadialMesh>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = mesh.nodes().iter().map(|&r| f(r)).collect();
        Self::linear(mesh, values)
    }

    /// Samples `v` and stores `r^exponent · v(r)`.
    pub fn split_from_fn(mesh: Arc<RadialMesh>, exponent: f64, v: impl Fn(f64) -> f64) -> Result<Self> {
        let values = mesh.nodes().iter().map(|&r| v(r)).collect();
        Self::split(mesh, exponent, values)
    }

    pub fn mesh(&self) -> &Arc<RadialMesh> {
        &self.mesh
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    /// Power factor of the representation (0 for piecewise linear).
    pub fn exponent(&self) -> f64 {
        match self.interp {
            Interpolation::PiecewiseLinear => 0.0,
            Interpolation::SingularSplit { exponent } => exponent,
        }
    }

    fn regular_in_cell(&self, j: usize, r: f64) -> f64 {
        let x0 = self.mesh.node(j);
        let x1 = self.mesh.node(j + 1);
        let t = (r - x0) / (x1 - x0);
        self.samples[j] + t * (self.samples[j + 1] - self.samples[j])
    }

    /// Interpolated regular part `v(r)`.
    pub fn regular(&self, r: f64) -> Result<f64> {
        self.mesh.check(r)?;
        Ok(self.regular_in_cell(self.mesh.locate(r), r))
    }

    fn value_in_cell(&self, j: usize, r: f64) -> f64 {
        apply_power(r, self.exponent(), self.regular_in_cell(j, r))
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        self.mesh.check(r)?;
        Ok(self.value_in_cell(self.mesh.locate(r), r))
    }

    /// `u` at node `i`; may be infinite at the origin for a singular split.
    pub fn node_value(&self, i: usize) -> f64 {
        apply_power(self.mesh.node(i), self.exponent(), self.samples[i])
    }

    pub fn node_values(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|i| self.node_value(i)).collect()
    }

    /// Largest `|u|` over the nodes.
    pub fn sup_abs(&self) -> f64 {
        (0..self.samples.len())
            .map(|i| self.node_value(i).abs())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            samples: self.samples.iter().map(|v| c * v).collect(),
            interp: self.interp,
        }
    }

    /// `r^p · u(r)`, exact on the power factor.
    pub fn mul_power(&self, p: f64) -> Self {
        let e = self.exponent() + p;
        let interp = if e == 0.0 {
            Interpolation::PiecewiseLinear
        } else {
            Interpolation::SingularSplit { exponent: e }
        };
        Self {
            mesh: self.mesh.clone(),
            samples: self.samples.clone(),
            interp,
        }
    }

    /// `self + c·other` on a common mesh, using the more singular exponent.
    pub fn add_scaled(&self, c: f64, other: &RadialFunction) -> Result<Self> {
        if !same_mesh(&self.mesh, &other.mesh) {
            return Err(HardyError::MeshMismatch("cannot add profiles on different meshes".into()));
        }
        let (ea, eb) = (self.exponent(), other.exponent());
        let e = ea.min(eb);
        let samples = self
            .mesh
            .nodes()
            .iter()
            .zip(self.samples.iter().zip(&other.samples))
            .map(|(&r, (&a, &b))| shift(r, ea - e, a) + c * shift(r, eb - e, b))
            .collect();
        Self::split(self.mesh.clone(), e, samples)
    }

    /// Signed integral `∫ u dw`, exact for the interpolant.
    pub fn integrate(&self, w: &RadialWeight) -> f64 {
        let a = w.exponent() + self.exponent();
        let x = self.mesh.nodes();
        let mut s = 0.0;
        for j in 0..self.mesh.intervals() {
            s += linear_moment(x[j], x[j + 1], a, self.samples[j], self.samples[j + 1]);
        }
        w.area() * s
    }

    /// `∫ |u|^p dw`; `+∞` when the integral diverges at the origin.
    pub fn integrate_abs_pow(&self, p: f64, w: &RadialWeight) -> f64 {
        let x = self.mesh.nodes();
        let mut s = 0.0;
        for j in 0..self.mesh.intervals() {
            s += self.cell_abs_pow(j, x[j], x[j + 1], p, w.exponent());
        }
        w.area() * s
    }

    /// `∫_E |u|^p dw` over a union of intervals.
    pub fn integrate_abs_pow_over(&self, p: f64, w: &RadialWeight, set: &IntervalSet) -> f64 {
        let x = self.mesh.nodes();
        let mut s = 0.0;
        for &(a, b) in set.parts() {
            let a = a.max(self.mesh.r_in());
            let b = b.min(self.mesh.r_out());
            if b <= a {
                continue;
            }
            let j0 = self.mesh.locate(a);
            let j1 = self.mesh.locate(b);
            for j in j0..=j1 {
                let lo = x[j].max(a);
                let hi = x[j + 1].min(b);
                if hi > lo {
                    s += self.cell_abs_pow(j, lo, hi, p, w.exponent());
                }
            }
        }
        w.area() * s
    }

    /// `∫_lo^hi |v|^p r^{a + e·p} dr` inside cell `j` (without the sphere area).
    fn cell_abs_pow(&self, j: usize, lo: f64, hi: f64, p: f64, a: f64) -> f64 {
        let c = a + self.exponent() * p;
        let v = |r: f64| self.regular_in_cell(j, r);
        let (v_lo, v_hi) = (v(lo), v(hi));
        if v_lo == 0.0 && v_hi == 0.0 {
            return 0.0;
        }
        // Split at a sign change so each piece has a smooth integrand.
        let mut pieces = [(lo, hi); 2];
        let mut count = 1;
        if v_lo * v_hi < 0.0 {
            let z = lo + (hi - lo) * v_lo / (v_lo - v_hi);
            pieces = [(lo, z), (z, hi)];
            count = 2;
        }
        let mut s = 0.0;
        for &(x0, x1) in &pieces[..count] {
            let (w0, w1) = (v(x0).abs(), v(x1).abs());
            if p == 1.0 {
                s += linear_moment(x0, x1, c, w0, w1);
            } else {
                s += pow_piece(x0, x1, c, |r| v(r).abs().powf(p));
            }
        }
        s
    }

    /// `{r : |u(r)| > t}` located with the interpolation rule.
    pub fn level_set(&self, t: f64) -> IntervalSet {
        let x = self.mesh.nodes();
        let mut set = IntervalSet::new();
        let e = self.exponent();
        for j in 0..self.mesh.intervals() {
            let (lo, hi) = (x[j], x[j + 1]);
            let mut cuts = vec![lo];
            if e == 0.0 {
                let (v0, v1) = (self.samples[j], self.samples[j + 1]);
                for target in [t, -t] {
                    if (v0 - target) * (v1 - target) < 0.0 {
                        cuts.push(lo + (hi - lo) * (target - v0) / (v1 - v0));
                    }
                }
                cuts.sort_by(f64::total_cmp);
            } else {
                let g = |r: f64| self.value_in_cell(j, r).abs() - t;
                let k = 4;
                let mut prev_r = lo;
                let mut prev_g = g(lo);
                for i in 1..=k {
                    let r = lo + (hi - lo) * i as f64 / k as f64;
                    let gr = g(r);
                    if (prev_g > 0.0) != (gr > 0.0) {
                        cuts.push(bisect(&g, prev_r, r, prev_g > 0.0));
                    }
                    prev_r = r;
                    prev_g = gr;
                }
            }
            cuts.push(hi);
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                if w[1] > w[0] && self.value_in_cell(j, mid).abs() > t {
                    set.push(w[0], w[1]);
                }
            }
        }
        set
    }

    pub fn level_set_measure(&self, t: f64, w: &RadialWeight) -> f64 {
        self.level_set(t).measure(w)
    }

    /// Radial derivative by three-point differences on the nonuniform nodes.
    ///
    /// For a singular split `r^e v` the power factor is differentiated
    /// exactly: the result is `r^{e-1}(e v + r v')`.
    pub fn differentiate(&self) -> RadialFunction {
        let x = self.mesh.nodes();
        let dv: Vec<f64> = (0..x.len()).map(|i| fd_first(x, &self.samples, i)).collect();
        match self.interp {
            Interpolation::PiecewiseLinear => Self {
                mesh: self.mesh.clone(),
                samples: dv,
                interp: Interpolation::PiecewiseLinear,
            },
            Interpolation::SingularSplit { exponent: e } => {
                let reg = x
                    .iter()
                    .zip(self.samples.iter().zip(&dv))
                    .map(|(&r, (&v, &d))| e * v + r * d)
                    .collect();
                let e1 = e - 1.0;
                Self {
                    mesh: self.mesh.clone(),
                    samples: reg,
                    interp: if e1 == 0.0 {
                        Interpolation::PiecewiseLinear
                    } else {
                        Interpolation::SingularSplit { exponent: e1 }
                    },
                }
            }
        }
    }
}

fn check_len(mesh: &RadialMesh, values: &[f64]) -> Result<()> {
    if values.len() == mesh.nodes().len() {
        Ok(())
    } else {
        Err(HardyError::MeshMismatch(format!(
            "{} samples for {} nodes",
            values.len(),
            mesh.nodes().len()
        )))
    }
}

pub(crate) fn same_mesh(a: &Arc<RadialMesh>, b: &Arc<RadialMesh>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

fn apply_power(r: f64, e: f64, v: f64) -> f64 {
    if e == 0.0 || v == 0.0 {
        v
    } else {
        r.powf(e) * v
    }
}

/// `r^d · v` with `d ≥ 0`, taking `0^0 = 1`.
fn shift(r: f64, d: f64, v: f64) -> f64 {
    if d == 0.0 {
        v
    } else {
        r.powf(d) * v
    }
}

fn pow_piece(lo: f64, hi: f64, c: f64, g: impl Fn(f64) -> f64) -> f64 {
    if lo > 0.0 && lo < hi * 1e-3 && c > -1.0 {
        // Cheaper and more accurate than many geometric panels.
        weighted_integral(0.0, hi, c, &g) - weighted_integral(0.0, lo, c, &g)
    } else {
        weighted_integral(lo, hi, c, g)
    }
}

fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, a_positive: bool) -> f64 {
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (g(m) > 0.0) == a_positive {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Three-point first derivative at node `i` (one-sided at the ends).
pub(crate) fn fd_first(x: &[f64], y: &[f64], i: usize) -> f64 {
    let n = x.len() - 1;
    if i == 0 {
        let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
        -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * y[0] + (h1 + h2) / (h1 * h2) * y[1]
            - h1 / (h2 * (h1 + h2)) * y[2]
    } else if i == n {
        let (h1, h2) = (x[n - 1] - x[n - 2], x[n] - x[n - 1]);
        h2 / (h1 * (h1 + h2)) * y[n - 2] - (h1 + h2) / (h1 * h2) * y[n - 1]
            + (h1 + 2.0 * h2) / (h2 * (h1 + h2)) * y[n]
    } else {
        let (h1, h2) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        -h2 / (h1 * (h1 + h2)) * y[i - 1] + (h2 - h1) / (h1 * h2) * y[i]
            + h1 / (h2 * (h1 + h2)) * y[i + 1]
    }
}

/// Three-point second derivative at interior node `i`.
pub(crate) fn fd_second(x: &[f64], y: &[f64], i: usize) -> f64 {
    let (h1, h2) = (x[i] - x[i - 1], x[i + 1] - x[i]);
    2.0 * (y[i - 1] / (h1 * (h1 + h2)) - y[i] / (h1 * h2) + y[i + 1] / (h2 * (h1 + h2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn p3(mu: f64) -> HardyParams {
        HardyParams::new(3, mu).unwrap()
    }

    #[test]
    fn mesh_examples() {
        let m = RadialMesh::new(0.0, 1.0, 16, 1.0).unwrap();
        assert_eq!(m.node(1), 1.0 / 16.0);
        assert_eq!(m.node(16), 1.0);
        let m = RadialMesh::new(0.0, 1.0, 16, 2.0).unwrap();
        assert_eq!(m.node(4), 0.0625);
        let m = RadialMesh::new(0.5, 1.0, 32, 3.0).unwrap();
        assert!(rel(m.node(16), 0.5625) < 1e-15);
        assert!(RadialMesh::new(1.0, 0.5, 32, 1.0).is_err());
        assert!(RadialMesh::new(0.0, 1.0, 15, 1.0).is_err());
        assert!(RadialMesh::new(0.0, 1.0, 16, 0.5).is_err());
    }

    #[test]
    fn locate_and_find() {
        let m = RadialMesh::new(0.0, 1.0, 16, 2.0).unwrap();
        assert_eq!(m.locate(0.0), 0);
        assert_eq!(m.locate(1.0), 15);
        assert_eq!(m.locate(0.07), 4);
        assert_eq!(m.find_node(0.0625), Some(4));
        assert_eq!(m.find_node(0.07), None);
    }

    #[test]
    fn integrate_examples() {
        let mesh = build_mesh(0.0, 1.0, 64, 2.0).unwrap();
        let one = RadialFunction::from_fn(mesh.clone(), |_| 1.0).unwrap();
        let leb = RadialWeight::lebesgue(&p3(2.0));
        assert!(rel(one.integrate(&leb), 4.0 * PI / 3.0) < 1e-14);
        let gam = RadialWeight::gamma_weighted(&p3(2.0));
        assert!(rel(one.integrate(&gam), PI) < 1e-14);
        let r = RadialFunction::from_fn(mesh.clone(), |r| r).unwrap();
        assert!(rel(r.integrate(&leb), PI) < 1e-14);
    }

    #[test]
    fn ball_volume_n5() {
        let p = HardyParams::new(5, 1.0).unwrap();
        let mesh = build_mesh(0.0, 2.0, 16, 3.0).unwrap();
        let one = RadialFunction::from_fn(mesh, |_| 1.0).unwrap();
        let expected = p.sphere_area() * 32.0 / 5.0;
        assert!(rel(one.integrate(&RadialWeight::lebesgue(&p)), expected) < 1e-14);
    }

    #[test]
    fn level_set_examples() {
        let p = p3(2.0);
        let mesh = build_mesh(0.0, 1.0, 64, 1.0).unwrap();
        let c = RadialFunction::from_fn(mesh.clone(), |_| 2.0).unwrap();
        assert_eq!(c.level_set_measure(2.0, &RadialWeight::lebesgue(&p)), 0.0);

        let u = RadialFunction::from_fn(mesh.clone(), |r| 1.0 - r).unwrap();
        let m = u.level_set_measure(0.5, &RadialWeight::lebesgue(&p));
        assert!(rel(m, 4.0 * PI / 3.0 * 0.125) < 1e-14);

        let mesh = build_mesh(0.0, 1.0, 64, 3.0).unwrap();
        let u = RadialFunction::split_from_fn(mesh, -2.0, |_| 1.0).unwrap();
        let m = u.level_set_measure(4.0, &RadialWeight::gamma_weighted(&p));
        assert!(rel(m, PI / 16.0) < 1e-12);
    }

    #[test]
    fn level_set_handles_sign_changes() {
        let p = p3(0.0);
        let mesh = build_mesh(0.0, 1.0, 32, 1.0).unwrap();
        let u = RadialFunction::from_fn(mesh, |r| 1.0 - 2.0 * r).unwrap();
        let set = u.level_set(0.5);
        assert_eq!(set.parts().len(), 2);
        assert!((set.parts()[0].1 - 0.25).abs() < 1e-14);
        assert!((set.parts()[1].0 - 0.75).abs() < 1e-14);
        let _ = p;
    }

    #[test]
    fn differentiate_examples() {
        let mesh = build_mesh(0.0, 1.0, 32, 1.0).unwrap();
        let u = RadialFunction::from_fn(mesh.clone(), |r| r * r).unwrap();
        let d = u.differentiate();
        for (i, &r) in mesh.nodes().iter().enumerate() {
            assert!((d.samples()[i] - 2.0 * r).abs() < 1e-12);
        }
        let c = RadialFunction::from_fn(mesh.clone(), |_| 3.0).unwrap();
        assert!(c.differentiate().samples().iter().all(|v| v.abs() < 1e-12));

        let s = RadialFunction::split_from_fn(mesh.clone(), -2.0, |_| 1.0).unwrap();
        let d = s.differentiate();
        assert_eq!(d.exponent(), -3.0);
        let r = 0.3;
        assert!(rel(d.eval(r).unwrap(), -2.0 * r.powi(-3)) < 1e-14);
    }

    #[test]
    fn differentiate_is_exact_on_graded_quadratics() {
        let mesh = build_mesh(0.0, 1.0, 20, 3.0).unwrap();
        let u = RadialFunction::from_fn(mesh.clone(), |r| 1.0 - 3.0 * r + 2.0 * r * r).unwrap();
        let d = u.differentiate();
        for (i, &r) in mesh.nodes().iter().enumerate() {
            assert!((d.samples()[i] - (-3.0 + 4.0 * r)).abs() < 1e-9, "node {i}");
        }
    }

    #[test]
    fn lp_of_split_profiles() {
        let p = p3(2.0);
        let mesh = build_mesh(0.0, 1.0, 128, 3.0).unwrap();
        let u = RadialFunction::split_from_fn(mesh.clone(), -1.0, |_| 1.0).unwrap();
        let v = u.integrate_abs_pow(2.0, &RadialWeight::lebesgue(&p));
        assert!(rel(v, 4.0 * PI) < 1e-12);
        let u = RadialFunction::split_from_fn(mesh, -2.0, |_| 1.0).unwrap();
        let v = u.integrate_abs_pow(1.0, &RadialWeight::gamma_weighted(&p));
        assert!(rel(v, 2.0 * PI) < 1e-13);
        let v = u.integrate_abs_pow(2.0, &RadialWeight::gamma_weighted(&p));
        assert!(v.is_infinite());
    }

    #[test]
    fn abs_pow_over_intervals() {
        let p = p3(0.0);
        let leb = RadialWeight::lebesgue(&p);
        let mesh = build_mesh(0.0, 1.0, 40, 2.0).unwrap();
        let u = RadialFunction::from_fn(mesh, |r| r).unwrap();
        let set = IntervalSet::single(0.2, 0.7);
        let v = u.integrate_abs_pow_over(3.0, &leb, &set);
        // 4π ∫ r^5 dr
        let expected = 4.0 * PI * (0.7f64.powi(6) - 0.2f64.powi(6)) / 6.0;
        assert!(rel(v, expected) < 1e-12);
    }

    #[test]
    fn add_scaled_uses_common_exponent() {
        let mesh = build_mesh(0.0, 1.0, 32, 2.0).unwrap();
        let a = RadialFunction::split_from_fn(mesh.clone(), -2.0, |_| 1.0).unwrap();
        let b = RadialFunction::from_fn(mesh.clone(), |r| r).unwrap();
        let s = a.add_scaled(-1.0, &b).unwrap();
        assert_eq!(s.exponent(), -2.0);
        assert!(rel(s.eval(0.25).unwrap(), 15.75) < 1e-12);
        let other = build_mesh(0.0, 1.0, 33, 2.0).unwrap();
        let c = RadialFunction::zeros(other);
        assert!(a.add_scaled(1.0, &c).is_err());
    }

    #[test]
    fn cavalieri_on_monotone_profile() {
        let p = p3(2.0);
        let w = RadialWeight::gamma_weighted(&p);
        let mesh = build_mesh(0.0, 1.0, 64, 1.0).unwrap();
        let u = RadialFunction::from_fn(mesh, |r| 1.0 - r * r).unwrap();
        let total = u.integrate(&w);
        let n = 4000;
        let mut layer = 0.0;
        for k in 0..n {
            let t = (k as f64 + 0.5) / n as f64;
            layer += u.level_set_measure(t, &w) / n as f64;
        }
        assert!(rel(layer, total) < 1e-5);
    }
}
