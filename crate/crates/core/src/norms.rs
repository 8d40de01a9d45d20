//! Weighted Lebesgue, Sobolev and Marcinkiewicz norms of radial profiles,
//! truncated-norm divergence detection, and the level-set analytics behind
//! the Stampacchia `L∞` lemma.

use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::grid::{IntervalSet, RadialFunction, RadialWeight, WeightKind};
use crate::operator::{Flux, Source};
use crate::params::HardyParams;
use crate::quadrature::{power_integral, weighted_integral};

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(HardyError::invalid(format!("exponent must be >= 1 (got {p})")))
    }
}

/// `(∫ |u|^p dw)^{1/p}`; `+∞` if the integral diverges at the origin.
pub fn lp_norm(u: &RadialFunction, p: f64, w: &RadialWeight) -> Result<f64> {
    check_p(p)?;
    Ok(u.integrate_abs_pow(p, w).powf(1.0 / p))
}

/// `L^p` norm over `δ < r < r_out`.
pub fn lp_norm_truncated(u: &RadialFunction, p: f64, w: &RadialWeight, delta: f64) -> Result<f64> {
    check_p(p)?;
    let set = IntervalSet::single(delta, u.mesh().r_out());
    Ok(u.integrate_abs_pow_over(p, w, &set).powf(1.0 / p))
}

/// `‖u‖_p + ‖u'‖_p`.
pub fn w1p_norm(u: &RadialFunction, p: f64, w: &RadialWeight) -> Result<f64> {
    Ok(lp_norm(u, p, w)? + lp_norm(&u.differentiate(), p, w)?)
}

/// `W^{1,p}` norm over `δ < r < r_out`.
pub fn w1p_norm_truncated(u: &RadialFunction, p: f64, w: &RadialWeight, delta: f64) -> Result<f64> {
    Ok(lp_norm_truncated(u, p, w, delta)? + lp_norm_truncated(&u.differentiate(), p, w, delta)?)
}

/// Thresholds of the truncated-norm divergence classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceCriteria {
    /// Minimum `|d log(norm) / d log δ|`.
    pub slope: f64,
    /// Minimum coefficient of determination of the fit.
    pub r_squared: f64,
}

impl Default for DivergenceCriteria {
    fn default() -> Self {
        Self {
            slope: 0.05,
            r_squared: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(HardyError::invalid("line fit needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(HardyError::invalid("line fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceFit {
    pub fit: LineFit,
    pub divergent: bool,
}

/// Classifies truncated norms `values[j]` at cutoffs `deltas[j]` by the
/// slope of `log(norm)` against `log δ`.
pub fn classify_truncated(deltas: &[f64], values: &[f64], crit: DivergenceCriteria) -> Result<DivergenceFit> {
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(HardyError::invalid("truncated norms must be finite and positive"));
    }
    let lx: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = fit_line(&lx, &ly)?;
    Ok(DivergenceFit {
        fit,
        divergent: fit.slope.abs() > crit.slope && fit.r_squared > crit.r_squared,
    })
}

/// Slope of `log ∫_{δ_{j+1}}^{δ_j} |u|^q dw` against `log δ_j`.
///
/// For `|u| ~ r^β` near the origin the slope is `βq + a + 1`, which changes
/// sign exactly at the integrability threshold.
pub fn increment_slope(u: &RadialFunction, q: f64, w: &RadialWeight, deltas: &[f64]) -> Result<f64> {
    if deltas.len() < 3 {
        return Err(HardyError::invalid("increment slope needs at least three cutoffs"));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for pair in deltas.windows(2) {
        let (hi, lo) = if pair[0] > pair[1] { (pair[0], pair[1]) } else { (pair[1], pair[0]) };
        let inc = u.integrate_abs_pow_over(q, w, &IntervalSet::single(lo, hi));
        if !(inc > 0.0 && inc.is_finite()) {
            return Err(HardyError::Divergent(format!("increment on [{lo}, {hi}] is {inc}")));
        }
        lx.push(hi.ln());
        ly.push(inc.ln());
    }
    Ok(fit_line(&lx, &ly)?.slope)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalEstimate {
    pub q_grid: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Root of the fitted line `slope(q)`.
    pub critical_q: f64,
}

/// Estimates the largest `q` with `∫ |u|^q dw < ∞` from increment slopes on a
/// `q` grid; the slopes are affine in `q` for power-law singularities.
pub fn critical_exponent_estimate(
    u: &RadialFunction,
    w: &RadialWeight,
    q_grid: &[f64],
    deltas: &[f64],
) -> Result<CriticalEstimate> {
    let slopes = q_grid
        .iter()
        .map(|&q| increment_slope(u, q, w, deltas))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_line(q_grid, &slopes)?;
    if fit.slope == 0.0 {
        return Err(HardyError::Divergent("increment slopes do not depend on q".into()));
    }
    Ok(CriticalEstimate {
        q_grid: q_grid.to_vec(),
        slopes,
        critical_q: -fit.intercept / fit.slope,
    })
}

/// Result of a Marcinkiewicz norm computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    /// Marcinkiewicz exponent `κ`.
    pub exponent: f64,
    pub weight: WeightKind,
    pub value: f64,
    /// Levels `t` scanned (before refinement).
    pub levels: Vec<f64>,
    /// Level whose super-level set attains the supremum.
    pub extremal_level: f64,
    /// Weighted measure of that set.
    pub extremal_measure: f64,
    /// Largest ratio over the annulus cross-check family.
    pub annulus_max: f64,
}

fn level_ratio(u: &RadialFunction, w: &RadialWeight, t: f64, power: f64) -> (f64, f64) {
    let set = u.level_set(t);
    if set.is_empty() {
        return (0.0, 0.0);
    }
    let m = set.measure(w);
    if m <= 0.0 {
        return (0.0, 0.0);
    }
    (u.integrate_abs_pow_over(1.0, w, &set) / m.powf(power), m)
}

/// `sup_E ∫_E |u| dw / w(E)^{1-1/κ}`.
///
/// For a fixed measure the integral is maximised by a super-level set of
/// `|u|`, so the supremum runs over `E_t = {|u| > t}` only: a logarithmic
/// level grid followed by golden-section refinement around the best level.
/// Annuli are scanned as an independent cross-check and reported.
pub fn marcinkiewicz_norm(u: &RadialFunction, kappa: f64, w: &RadialWeight) -> Result<NormReport> {
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(HardyError::invalid(format!("Marcinkiewicz exponent must be > 1 (got {kappa})")));
    }
    let power = 1.0 - 1.0 / kappa;
    let vals: Vec<f64> = u
        .node_values()
        .into_iter()
        .map(f64::abs)
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    let report = |value, levels, t, m, ann| NormReport {
        exponent: kappa,
        weight: w.kind(),
        value,
        levels,
        extremal_level: t,
        extremal_measure: m,
        annulus_max: ann,
    };
    if vals.is_empty() {
        return Ok(report(0.0, Vec::new(), 0.0, 0.0, 0.0));
    }
    let t_max = vals.iter().cloned().fold(0.0, f64::max);
    let t_min = vals.iter().cloned().fold(f64::INFINITY, f64::min).max(t_max * 1e-12);
    let count = 240;
    let mut levels = vec![0.0];
    let (l0, l1) = (t_min.ln(), t_max.ln());
    for i in 0..count {
        let s = i as f64 / (count - 1) as f64;
        // Slightly below each level so the top node stays in its own set.
        levels.push((l0 + s * (l1 - l0)).exp() * (1.0 - 1e-12));
    }
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut best_i = 0;
    for (i, &t) in levels.iter().enumerate() {
        let (v, m) = level_ratio(u, w, t, power);
        if v > best.0 {
            best = (v, t, m);
            best_i = i;
        }
    }
    if best_i > 0 {
        let lo = levels[best_i - 1].max(t_min * 0.5).ln();
        let hi = levels[(best_i + 1).min(levels.len() - 1)].ln();
        let f = |x: f64| level_ratio(u, w, x.exp(), power);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..60 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c).0 >= f(d).0 {
                b = d;
            } else {
                a = c;
            }
        }
        let x = 0.5 * (a + b);
        let (v, m) = f(x);
        if v > best.0 {
            best = (v, x.exp(), m);
        }
    }
    let ann = annulus_scan(u, w, power);
    Ok(report(best.0, levels, best.1, best.2, ann))
}

fn annulus_scan(u: &RadialFunction, w: &RadialWeight, power: f64) -> f64 {
    let mesh = u.mesh();
    let (r0, r1) = (mesh.r_in(), mesh.r_out());
    let k = 24;
    let first = if r0 > 0.0 { r0 } else { mesh.node(1) };
    let mut radii: Vec<f64> = (0..k)
        .map(|i| first * (r1 / first).powf(i as f64 / (k - 1) as f64))
        .collect();
    radii.insert(0, r0);
    let mut worst: f64 = 0.0;
    for i in 0..radii.len() {
        for j in i + 1..radii.len() {
            let set = IntervalSet::single(radii[i], radii[j]);
            let m = set.measure(w);
            if m > 0.0 {
                worst = worst.max(u.integrate_abs_pow_over(1.0, w, &set) / m.powf(power));
            }
        }
    }
    worst
}

/// Parametrised families of test sets.
#[derive(Debug, Clone, PartialEq)]
pub enum SetFamily {
    SuperLevel(Vec<f64>),
    Balls(Vec<f64>),
    Annuli(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub marcinkiewicz: f64,
    /// `(set parameter, ratio)` per member of the family.
    pub ratios: Vec<(f64, f64)>,
    pub max_ratio: f64,
}

/// `max_E ∫_E |u|^q dw / (‖u‖^q_{M^κ} · w(E)^{1-q/κ})` over a family.
///
/// The `q`-th power of the Marcinkiewicz norm is what makes both sides
/// scale the same way under `u → λu`.
pub fn embedding_check(
    u: &RadialFunction,
    q: f64,
    kappa: f64,
    family: &SetFamily,
    w: &RadialWeight,
) -> Result<EmbeddingReport> {
    if !(q >= 1.0 && q < kappa) {
        return Err(HardyError::invalid(format!("embedding needs 1 <= q < kappa (got q = {q}, kappa = {kappa})")));
    }
    let m = marcinkiewicz_norm(u, kappa, w)?.value;
    let lo = u.mesh().r_in();
    let sets: Vec<(f64, IntervalSet)> = match family {
        SetFamily::SuperLevel(ts) => ts.iter().map(|&t| (t, u.level_set(t))).collect(),
        SetFamily::Balls(rs) => rs.iter().map(|&r| (r, IntervalSet::single(lo, r))).collect(),
        SetFamily::Annuli(ab) => ab.iter().map(|&(a, b)| (b, IntervalSet::single(a, b))).collect(),
    };
    let mut ratios = Vec::new();
    for (param, set) in sets {
        let meas = set.measure(w);
        if meas <= 0.0 || m == 0.0 {
            continue;
        }
        let lhs = u.integrate_abs_pow_over(q, w, &set);
        ratios.push((param, lhs / (m.powf(q) * meas.powf(1.0 - q / kappa))));
    }
    let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(EmbeddingReport {
        marcinkiewicz: m,
        ratios,
        max_ratio,
    })
}

/// Tabulated distribution function `t ↦ |{|w| > t}|`, linear between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelData {
    ts: Vec<f64>,
    measures: Vec<f64>,
    /// `H(t_i) = ∫_{t_i}^∞ measure`.
    tail: Vec<f64>,
}

impl LevelData {
    pub fn new(ts: Vec<f64>, measures: Vec<f64>) -> Result<Self> {
        if ts.len() != measures.len() || ts.len() < 2 {
            return Err(HardyError::invalid("level data needs matching grids of length >= 2"));
        }
        if ts[0] < 0.0 || ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HardyError::invalid("level grid must be increasing and start at t >= 0"));
        }
        if measures.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(HardyError::invalid("level measures must be finite and >= 0"));
        }
        if measures.windows(2).any(|w| w[1] > w[0]) {
            return Err(HardyError::invalid("level data must be non-increasing"));
        }
        if *measures.last().unwrap_or(&0.0) != 0.0 {
            return Err(HardyError::invalid("level data must vanish at the end of the grid"));
        }
        let mut tail = vec![0.0; ts.len()];
        for i in (0..ts.len() - 1).rev() {
            tail[i] = tail[i + 1] + 0.5 * (measures[i] + measures[i + 1]) * (ts[i + 1] - ts[i]);
        }
        Ok(Self { ts, measures, tail })
    }

    /// Samples `t ↦ w({|u| > t})` on `ts`, appending a final level where
    /// the measure is zero if needed.
    pub fn from_profile(u: &RadialFunction, w: &RadialWeight, ts: &[f64]) -> Result<Self> {
        let mut ts = ts.to_vec();
        let top = u.sup_abs();
        if !top.is_finite() {
            return Err(HardyError::invalid("profile is unbounded; no level data"));
        }
        if ts.last().is_none_or(|&t| t < top) {
            ts.push(top);
        }
        let measures = ts.iter().map(|&t| u.level_set_measure(t, w)).collect();
        Self::new(ts, measures)
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// Measure at `t`, linear between samples and 0 beyond the grid.
    pub fn measure_at(&self, t: f64) -> f64 {
        if t <= self.ts[0] {
            return self.measures[0];
        }
        let i = self.ts.partition_point(|&x| x <= t);
        if i >= self.ts.len() {
            return 0.0;
        }
        let (t0, t1) = (self.ts[i - 1], self.ts[i]);
        let s = (t - t0) / (t1 - t0);
        self.measures[i - 1] + s * (self.measures[i] - self.measures[i - 1])
    }

    /// `H(t) = ∫_t^∞ measure(s) ds`, exact for the linear interpolant.
    pub fn tail(&self, t: f64) -> f64 {
        if t <= self.ts[0] {
            return self.tail[0] + self.measures[0] * (self.ts[0] - t);
        }
        let i = self.ts.partition_point(|&x| x <= t);
        if i >= self.ts.len() {
            return 0.0;
        }
        let m = self.measure_at(t);
        self.tail[i] + 0.5 * (m + self.measures[i]) * (self.ts[i] - t)
    }

    /// First level beyond which the data vanish.
    pub fn support_end(&self) -> f64 {
        let i = self.measures.iter().position(|&m| m == 0.0).unwrap_or(self.ts.len() - 1);
        self.ts[i]
    }

    /// Smallest `A` with `H(t) ≤ A·measure(t)^α` on the grid and at interior
    /// points of each cell, for the piecewise linear interpolant. Near the
    /// end of the support this overestimates the constant of a convex
    /// profile, since the trapezoid tail does.
    pub fn smallest_constant(&self, alpha: f64) -> f64 {
        let mut a: f64 = 0.0;
        let sub = 8;
        for i in 0..self.ts.len() - 1 {
            for k in 0..sub {
                let t = self.ts[i] + (self.ts[i + 1] - self.ts[i]) * k as f64 / sub as f64;
                let m = self.measure_at(t);
                if m > 0.0 {
                    a = a.max(self.tail(t) / m.powf(alpha));
                }
            }
        }
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StampacchiaReport {
    pub alpha: f64,
    /// Constant used in the bound.
    pub a: f64,
    /// Smallest constant for which the hypothesis holds on the data.
    pub a_star: f64,
    pub hypothesis_holds: bool,
    /// `H(0) = ‖w‖_{L¹}`.
    pub h0: f64,
    /// Level where the data vanish (`‖w‖_∞`).
    pub k0_data: f64,
    /// Level where the explicit Euler solution of `-H' = (H/A)^{1/α}` hits 0.
    pub k0_ode: f64,
    /// `α/(α-1)·A^{1/α}·H(0)^{1-1/α}`.
    pub bound: f64,
}

/// Level-set analytics of the Stampacchia lemma. With `a = None` the
/// smallest admissible constant is used.
pub fn stampacchia_k0(level: &LevelData, alpha: f64, a: Option<f64>) -> Result<StampacchiaReport> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(HardyError::invalid(format!("alpha must be > 1 (got {alpha})")));
    }
    let a_star = level.smallest_constant(alpha);
    let a_used = a.unwrap_or(a_star);
    if !(a_used > 0.0 && a_used.is_finite()) {
        return Err(HardyError::invalid(format!("constant A must be > 0 (got {a_used})")));
    }
    let h0 = level.tail(0.0);
    let bound = alpha / (alpha - 1.0) * a_used.powf(1.0 / alpha) * h0.powf(1.0 - 1.0 / alpha);

    // Explicit Euler with a step tied to the closed-form level; the last
    // step is closed with the local rate so the overshoot stays O(dt).
    let dt = bound / 4000.0;
    let mut t = 0.0;
    let mut h = h0;
    let mut k0_ode = f64::NAN;
    while h > 0.0 {
        let rate = (h / a_used).powf(1.0 / alpha);
        if h - dt * rate <= 0.0 {
            k0_ode = t + h / rate;
            h = 0.0;
        } else {
            h -= dt * rate;
            t += dt;
        }
    }
    if h0 == 0.0 {
        k0_ode = 0.0;
    }
    Ok(StampacchiaReport {
        alpha,
        a: a_used,
        a_star,
        hypothesis_holds: a_used >= a_star * (1.0 - 1e-12),
        h0,
        k0_data: level.support_end(),
        k0_ode,
        bound,
    })
}

/// Equality profile `(1-t)₊^{1/(α-1)}` of the separated ODE, sampled on `n`
/// cells of `[0, 1]`; its exact constant is `A = (α-1)/α` and `k₀ = 1`.
pub fn stampacchia_equality_profile(alpha: f64, n: usize) -> Result<LevelData> {
    let ts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let ms = ts.iter().map(|&t| (1.0 - t).max(0.0).powf(1.0 / (alpha - 1.0))).collect();
    LevelData::new(ts, ms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationEnergy {
    /// `‖∇u₀‖_{L²({|u₀| > k})}`.
    pub lhs: f64,
    /// `‖f‖_{L²({|u₀| > k})} + ‖F‖_{L²({|u₀| > k})}`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Both sides of the truncated energy estimate for a dual solution `u0`
/// (piecewise linear; its gradient is taken cell by cell).
pub fn truncation_energy_check(
    params: &HardyParams,
    u0: &RadialFunction,
    k: f64,
    f: &Source,
    flux: &Flux,
) -> Result<TruncationEnergy> {
    if u0.exponent() != 0.0 {
        return Err(HardyError::invalid("truncation check expects a piecewise linear dual solution"));
    }
    if !(k > 0.0) {
        return Err(HardyError::invalid(format!("truncation level must be > 0 (got {k})")));
    }
    let set = u0.level_set(k);
    let mesh = u0.mesh();
    let x = mesh.nodes();
    let v = u0.samples();
    let a = params.n() - 1.0;
    let area = params.sphere_area();
    let (mut grad, mut ff, mut fl) = (0.0, 0.0, 0.0);
    for &(lo, hi) in set.parts() {
        let (j0, j1) = (mesh.locate(lo), mesh.locate(hi));
        for j in j0..=j1 {
            let (c0, c1) = (x[j].max(lo), x[j + 1].min(hi));
            if c1 <= c0 {
                continue;
            }
            let slope = (v[j + 1] - v[j]) / (x[j + 1] - x[j]);
            grad += slope * slope * power_integral(c0, c1, a);
            ff += weighted_integral(c0, c1, a, |r| f.eval(r).powi(2));
            fl += weighted_integral(c0, c1, a, |r| flux.eval(r).powi(2));
        }
    }
    let lhs = (area * grad).sqrt();
    let rhs = (area * ff).sqrt() + (area * fl).sqrt();
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(TruncationEnergy { lhs, rhs, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_mesh;
    use crate::operator::{solve_dirac, solve_dual, DirichletProblem, OperatorKind};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn lp_examples() {
        let p = HardyParams::new(3, 2.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 128, 3.0).unwrap();
        let one = RadialFunction::from_fn(mesh.clone(), |_| 1.0).unwrap();
        assert!(rel(lp_norm(&one, 1.0, &RadialWeight::lebesgue(&p)).unwrap(), 4.0 * PI / 3.0) < 1e-14);
        let inv = RadialFunction::split_from_fn(mesh.clone(), -1.0, |_| 1.0).unwrap();
        assert!(rel(lp_norm(&inv, 2.0, &RadialWeight::lebesgue(&p)).unwrap(), (4.0 * PI).sqrt()) < 1e-12);
        let inv2 = RadialFunction::split_from_fn(mesh, -2.0, |_| 1.0).unwrap();
        assert!(rel(lp_norm(&inv2, 1.0, &RadialWeight::gamma_weighted(&p)).unwrap(), 2.0 * PI) < 1e-13);
        assert!(lp_norm(&one, 0.5, &RadialWeight::lebesgue(&p)).is_err());
    }

    #[test]
    fn w1p_of_dirac_solution() {
        let p = HardyParams::new(3, 2.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 1024, 3.0).unwrap();
        let v0 = solve_dirac(&p, &mesh, 1.0).unwrap().u;
        let w = RadialWeight::gamma_weighted(&p);
        assert_eq!(w1p_norm(&RadialFunction::zeros(mesh.clone()), 1.3, &w).unwrap(), 0.0);
        assert!(w1p_norm(&v0, 1.2, &w).unwrap().is_finite());
        let deltas: Vec<f64> = (4..12).map(|j| 2f64.powi(-j)).collect();
        let below: Vec<f64> = deltas.iter().map(|&d| w1p_norm_truncated(&v0, 1.2, &w, d).unwrap()).collect();
        let above: Vec<f64> = deltas.iter().map(|&d| w1p_norm_truncated(&v0, 1.4, &w, d).unwrap()).collect();
        let crit = DivergenceCriteria::default();
        assert!(!classify_truncated(&deltas, &below, crit).unwrap().divergent);
        let fit = classify_truncated(&deltas, &above, crit).unwrap();
        assert!(fit.divergent);
        // Same fit on closed-form truncated norms of r^{-2} - r.
        let exact: Vec<f64> = deltas
            .iter()
            .map(|&d| {
                let q = 1.4;
                let a = 3.0;
                let v = weighted_integral(d, 1.0, a, |r| (r.powi(-2) - r).abs().powf(q));
                let g = weighted_integral(d, 1.0, a, |r| (2.0 * r.powi(-3) + 1.0).powf(q));
                (4.0 * PI * v).powf(1.0 / q) + (4.0 * PI * g).powf(1.0 / q)
            })
            .collect();
        let oracle = classify_truncated(&deltas, &exact, crit).unwrap();
        assert!((fit.fit.slope - oracle.fit.slope).abs() < 0.01, "{:?} {:?}", fit, oracle);
    }

    #[test]
    fn critical_estimate_for_pure_power() {
        let p = HardyParams::new(3, 2.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 256, 3.0).unwrap();
        let u = RadialFunction::split_from_fn(mesh, -3.0, |_| 2.0).unwrap();
        let w = RadialWeight::gamma_weighted(&p);
        let deltas: Vec<f64> = (3..10).map(|j| 2f64.powi(-j)).collect();
        let est = critical_exponent_estimate(&u, &w, &[1.2, 1.3, 1.4, 1.5], &deltas).unwrap();
        assert!(rel(est.critical_q, 4.0 / 3.0) < 1e-9);
    }

    #[test]
    fn marcinkiewicz_of_indicator() {
        let p = HardyParams::new(3, 0.0).unwrap();
        let w = RadialWeight::lebesgue(&p);
        let mesh = build_mesh(0.0, 1.0, 1000, 1.0).unwrap();
        // Steep ramp from 3 to 0 on one cell around ρ = 0.5.
        let u = RadialFunction::from_fn(mesh, |r| if r <= 0.5 { 3.0 } else { 0.0 }).unwrap();
        let rep = marcinkiewicz_norm(&u, 2.0, &w).unwrap();
        let vol = 4.0 * PI / 3.0 * 0.125;
        assert!(rel(rep.value, 3.0 * vol.sqrt()) < 5e-3, "{}", rep.value);
        assert!(rep.annulus_max <= rep.value * (1.0 + 1e-9));
    }

    #[test]
    fn marcinkiewicz_is_homogeneous_and_finite() {
        let p = HardyParams::new(3, 0.0).unwrap();
        let w = RadialWeight::lebesgue(&p);
        let mesh = build_mesh(0.0, 1.0, 256, 3.0).unwrap();
        let u = RadialFunction::split_from_fn(mesh, -1.0, |_| 1.0).unwrap();
        let a = marcinkiewicz_norm(&u, 3.0, &w).unwrap().value;
        let b = marcinkiewicz_norm(&u.scale(2.0), 3.0, &w).unwrap().value;
        assert!(a.is_finite() && a > 0.0);
        assert!(rel(b, 2.0 * a) < 1e-9);
        assert!(marcinkiewicz_norm(&u, 1.0, &w).is_err());
    }

    #[test]
    fn marcinkiewicz_of_dirac_solution_near_origin() {
        let p = HardyParams::new(3, 2.0).unwrap();
        let w = RadialWeight::gamma_weighted(&p);
        let mesh = build_mesh(0.0, 1.0, 1024, 3.0).unwrap();
        let v0 = solve_dirac(&p, &mesh, 1.0).unwrap().u;
        let rep = marcinkiewicz_norm(&v0, 2.0, &w).unwrap();
        // Small balls give 2√π; larger sets can only do better.
        assert!(rep.value >= 2.0 * PI.sqrt() * (1.0 - 1e-3));
        assert!(rep.value < 10.0);
        assert!(rep.annulus_max <= rep.value * (1.0 + 1e-6));
    }

    #[test]
    fn embedding_checks() {
        let p = HardyParams::new(3, 0.0).unwrap();
        let w = RadialWeight::lebesgue(&p);
        let mesh = build_mesh(0.0, 1.0, 256, 3.0).unwrap();
        let c = RadialFunction::from_fn(mesh.clone(), |_| 2.0).unwrap();
        let rep = embedding_check(&c, 1.0, 2.0, &SetFamily::Balls(vec![0.2, 0.5, 1.0]), &w).unwrap();
        assert!(rep.max_ratio <= 1.0 + 1e-12);
        let u = RadialFunction::split_from_fn(mesh.clone(), -1.0, |_| 1.0).unwrap();
        let rep = embedding_check(&u, 1.0, 3.0, &SetFamily::Balls(vec![1e-4, 1e-3, 0.01, 0.1, 1.0]), &w).unwrap();
        assert!(rep.max_ratio.is_finite() && rep.max_ratio < 10.0);
        assert!(embedding_check(&u, 3.0, 3.0, &SetFamily::Balls(vec![0.5]), &w).is_err());

        let p = HardyParams::new(3, 2.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 1024, 3.0).unwrap();
        let v0 = solve_dirac(&p, &mesh, 1.0).unwrap().u;
        let levels: Vec<f64> = (0..12).map(|j| 2f64.powi(2 * j)).collect();
        let rep = embedding_check(&v0, 1.5, 2.0, &SetFamily::SuperLevel(levels), &RadialWeight::gamma_weighted(&p))
            .unwrap();
        assert!(rep.max_ratio.is_finite() && rep.max_ratio < 10.0);
    }

    #[test]
    fn stampacchia_equality_case() {
        for &alpha in &[1.5, 2.0, 3.0] {
            let data = stampacchia_equality_profile(alpha, 2000).unwrap();
            let a = (alpha - 1.0) / alpha;
            let rep = stampacchia_k0(&data, alpha, Some(a)).unwrap();
            assert!(rel(rep.h0, (alpha - 1.0) / alpha) < 1e-4, "{:?}", rep);
            assert!((rep.k0_data - 1.0).abs() < 1e-12);
            assert!(rel(rep.bound, 1.0) < 0.05, "{:?}", rep);
            assert!(rel(rep.k0_ode, rep.bound) < 0.01, "{:?}", rep);
        }
    }

    #[test]
    fn stampacchia_bounded_data_and_scaling() {
        let exact = stampacchia_k0(&stampacchia_equality_profile(2.0, 100).unwrap(), 2.0, None).unwrap();
        assert!(rel(exact.a_star, 0.5) < 1e-12);
        let data = LevelData::new(vec![0.0, 1.0, 2.0, 2.0 + 1e-9], vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let rep = stampacchia_k0(&data, 2.0, None).unwrap();
        assert!(rep.k0_data <= 2.0 + 1e-9);
        assert!(rep.k0_data <= rep.bound);
        let a = stampacchia_k0(&data, 2.0, Some(1e-2)).unwrap();
        let b = stampacchia_k0(&data, 2.0, Some(1e-4)).unwrap();
        assert!(rel(a.bound / b.bound, 10.0) < 1e-12);
        assert!(rel(a.k0_ode / b.k0_ode, 10.0) < 1e-2);
        assert!(!b.hypothesis_holds);
        assert!(LevelData::new(vec![0.0, 1.0], vec![0.5, 1.0]).is_err());
        assert!(LevelData::new(vec![0.0, 1.0], vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn truncation_energy_examples() {
        let p = HardyParams::new(3, 2.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 512, 1.0).unwrap();
        let pr = DirichletProblem::new(p, mesh, OperatorKind::Dual, Source::constant(10.0), Flux::Zero).unwrap();
        let u0 = solve_dual(&pr).unwrap().u;
        let big = truncation_energy_check(&p, &u0, 2.0, &pr.f, &pr.flux).unwrap();
        assert_eq!(big.lhs, 0.0);
        let half = truncation_energy_check(&p, &u0, 0.5, &pr.f, &pr.flux).unwrap();
        // {1 - r² > 1/2} = B_{1/√2}: ∫ 4r²·4πr² dr and ∫ 100·4πr² dr.
        let rho = 0.5f64.sqrt();
        let lhs = (16.0 * PI * rho.powi(5) / 5.0).sqrt();
        let rhs = (400.0 * PI * rho.powi(3) / 3.0).sqrt();
        assert!(rel(half.lhs, lhs) < 1e-3);
        assert!(rel(half.rhs, rhs) < 1e-3);
        assert!(half.ratio.is_finite());
    }
}
