//! Radial discretisation of the direct operator `L_μ = -Δ + μ/r²` and of the
//! dual operators `L*_μ`, `L*_{μ,ε}` on balls and annuli.
//!
//! The dual operator is written in conservative form
//! `L*_μ u = -ω⁻¹(ω u')'` with `ω = r^{N-1+2τ₊}` and discretised by P1
//! finite elements in `L²(ω dr)`. The stiffness matrix is symmetric and an
//! M-matrix, so the discrete comparison principle holds. At the origin no
//! condition is imposed: the natural boundary condition of the weighted form
//! selects the regular solution.
//!
//! The direct problem reuses the same matrix through `u = r^{τ₊} v`, since
//! `L_μ(r^{τ₊} v) = r^{τ₊} L*_μ v`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::grid::{fd_first, fd_second, same_mesh, RadialFunction, RadialMesh};
use crate::params::{Cutoff, HardyParams};
use crate::quadrature::{power_integral, power_moments, weighted_integral};
use crate::tridiag::Tridiagonal;

/// Scaled residual above which a linear solve is reported as failed.
pub const SOLVER_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    Direct,
    Dual,
    /// Drift switched off inside `B_ε`.
    DualRegularized { epsilon: f64 },
}

impl OperatorKind {
    pub fn is_dual(&self) -> bool {
        !matches!(self, OperatorKind::Direct)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar right-hand side of a radial problem.
#[derive(Clone)]
pub enum Source {
    Zero,
    /// `Σ c·r^p` over `(c, p)` pairs.
    Powers(Vec<(f64, f64)>),
    /// Sampled on the problem mesh.
    Sampled(RadialFunction),
    /// Smooth between the listed breakpoints.
    Function { f: ScalarFn, breakpoints: Vec<f64> },
    Sum(Vec<Source>),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => write!(f, "Zero"),
            Source::Powers(t) => f.debug_tuple("Powers").field(t).finish(),
            Source::Sampled(u) => f.debug_tuple("Sampled").field(&u.interpolation()).finish(),
            Source::Function { breakpoints, .. } => {
                f.debug_struct("Function").field("breakpoints", breakpoints).finish()
            }
            Source::Sum(s) => f.debug_tuple("Sum").field(s).finish(),
        }
    }
}

impl Source {
    pub fn constant(c: f64) -> Self {
        Source::Powers(vec![(c, 0.0)])
    }

    /// `Σ coeffs[k]·r^k`.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        Source::Powers(
            coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(k, &c)| (c, k as f64))
                .collect(),
        )
    }

    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static, breakpoints: Vec<f64>) -> Self {
        Source::Function {
            f: Arc::new(f),
            breakpoints,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::Powers(t) => t.iter().map(|&(c, p)| c * pow(r, p)).sum(),
            Source::Sampled(u) => u.eval(r).unwrap_or(f64::NAN),
            Source::Function { f, .. } => f(r),
            Source::Sum(s) => s.iter().map(|x| x.eval(r)).sum(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Source::Zero => true,
            Source::Powers(t) => t.iter().all(|&(c, _)| c == 0.0),
            Source::Sampled(u) => u.samples().iter().all(|&v| v == 0.0),
            Source::Function { .. } => false,
            Source::Sum(s) => s.iter().all(Source::is_zero),
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Source::Function { breakpoints, .. } => out.extend_from_slice(breakpoints),
            Source::Sum(s) => s.iter().for_each(|x| x.breakpoints(out)),
            _ => {}
        }
    }

    fn check_mesh(&self, mesh: &Arc<RadialMesh>) -> Result<()> {
        match self {
            Source::Sampled(u) if !same_mesh(u.mesh(), mesh) => Err(HardyError::MeshMismatch(
                "sampled source must live on the problem mesh".into(),
            )),
            Source::Sum(s) => s.iter().try_for_each(|x| x.check_mesh(mesh)),
            _ => Ok(()),
        }
    }
}

fn pow(r: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        r.powf(p)
    }
}

/// Radial vector field `F(r)·x/|x|`.
#[derive(Clone)]
pub enum Flux {
    Zero,
    /// `F(r) = Σ c·r^p`.
    Powers(Vec<(f64, f64)>),
    Sampled(RadialFunction),
    /// Closed form with its derivative.
    Function {
        value: ScalarFn,
        derivative: ScalarFn,
        breakpoints: Vec<f64>,
    },
}

impl fmt::Debug for Flux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flux::Zero => write!(f, "Zero"),
            Flux::Powers(t) => f.debug_tuple("Powers").field(t).finish(),
            Flux::Sampled(u) => f.debug_tuple("Sampled").field(&u.interpolation()).finish(),
            Flux::Function { breakpoints, .. } => {
                f.debug_struct("Function").field("breakpoints", breakpoints).finish()
            }
        }
    }
}

impl Flux {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Flux::Zero => 0.0,
            Flux::Powers(t) => t.iter().map(|&(c, p)| c * pow(r, p)).sum(),
            Flux::Sampled(u) => u.eval(r).unwrap_or(f64::NAN),
            Flux::Function { value, .. } => value(r),
        }
    }

    /// `div F = F' + (N-1)F/r` as a scalar source.
    pub fn divergence(&self, dim: usize) -> Source {
        let m = dim as f64 - 1.0;
        match self {
            Flux::Zero => Source::Zero,
            Flux::Powers(t) => Source::Powers(
                t.iter()
                    .filter(|&&(c, p)| c != 0.0 && p + m != 0.0)
                    .map(|&(c, p)| (c * (p + m), p - 1.0))
                    .collect(),
            ),
            Flux::Sampled(u) => {
                let d = u.differentiate();
                match d.add_scaled(m, &u.mul_power(-1.0)) {
                    Ok(s) => Source::Sampled(s),
                    Err(_) => unreachable!("derivative shares the mesh"),
                }
            }
            Flux::Function {
                value,
                derivative,
                breakpoints,
            } => {
                let (v, d) = (value.clone(), derivative.clone());
                Source::Function {
                    f: Arc::new(move |r| d(r) + m * v(r) / r),
                    breakpoints: breakpoints.clone(),
                }
            }
        }
    }
}

/// Zero Dirichlet data at `r_out` (and at `r_in` for an annulus).
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub params: HardyParams,
    pub mesh: Arc<RadialMesh>,
    pub kind: OperatorKind,
    pub f: Source,
    pub flux: Flux,
}

impl DirichletProblem {
    pub fn new(
        params: HardyParams,
        mesh: Arc<RadialMesh>,
        kind: OperatorKind,
        f: Source,
        flux: Flux,
    ) -> Result<Self> {
        if kind.is_dual() {
            params.require_dual_solvable()?;
        }
        if let OperatorKind::DualRegularized { epsilon } = kind {
            if !(epsilon > 0.0 && epsilon < mesh.r_out()) {
                return Err(HardyError::invalid(format!(
                    "epsilon must lie in (0, {}) (got {epsilon})",
                    mesh.r_out()
                )));
            }
        }
        f.check_mesh(&mesh)?;
        if let Flux::Sampled(u) = &flux {
            if !same_mesh(u.mesh(), &mesh) {
                return Err(HardyError::MeshMismatch("sampled flux must live on the problem mesh".into()));
            }
        }
        Ok(Self {
            params,
            mesh,
            kind,
            f,
            flux,
        })
    }

    /// `f + div F`.
    pub fn total_source(&self) -> Source {
        let div = self.flux.divergence(self.params.dim());
        match (&self.f, div) {
            (f, Source::Zero) => f.clone(),
            (Source::Zero, d) => d,
            (f, d) => Source::Sum(vec![f.clone(), d]),
        }
    }
}

/// Power-law weight, possibly switching law at interior radii.
#[derive(Debug, Clone, PartialEq)]
struct PiecewisePower {
    /// `(start, coefficient, exponent)` sorted by start; first start is 0.
    pieces: Vec<(f64, f64, f64)>,
}

impl PiecewisePower {
    fn single(exponent: f64) -> Self {
        Self {
            pieces: vec![(0.0, 1.0, exponent)],
        }
    }

    fn shifted(&self, dp: f64) -> Self {
        Self {
            pieces: self.pieces.iter().map(|&(s, c, p)| (s, c, p + dp)).collect(),
        }
    }

    fn breaks(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().skip(1).map(|p| p.0)
    }

    fn piece_at(&self, r: f64) -> (f64, f64) {
        let k = self.pieces.partition_point(|p| p.0 <= r).saturating_sub(1);
        (self.pieces[k].1, self.pieces[k].2)
    }
}

/// Stiffness weight `ω` for the dual kinds.
fn stiffness_weight(params: &HardyParams, kind: OperatorKind) -> PiecewisePower {
    let b = params.drift_weight_exponent();
    match kind {
        OperatorKind::Direct | OperatorKind::Dual => PiecewisePower::single(b),
        OperatorKind::DualRegularized { epsilon } => {
            let n1 = params.n() - 1.0;
            // ω_ε = r^{N-1} inside, ε^{-2τ₊} r^b outside: continuous at ε.
            let c = epsilon.powf(n1 - b);
            PiecewisePower {
                pieces: vec![(0.0, 1.0, n1), (epsilon, c, b)],
            }
        }
    }
}

/// Assembled system for the nodal unknowns.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: Tridiagonal,
    pub rhs: Vec<f64>,
    /// Mesh node index of each unknown.
    pub nodes: Vec<usize>,
}

/// Builds the Galerkin system. For the direct kind the unknown is the
/// regular part `v` of `u = r^{τ₊} v`.
pub fn assemble(problem: &DirichletProblem) -> Result<LinearSystem> {
    let mesh = &problem.mesh;
    let x = mesh.nodes();
    let n = mesh.intervals();
    let omega = stiffness_weight(&problem.params, problem.kind);
    let load_weight = match problem.kind {
        OperatorKind::Direct => omega.shifted(-problem.params.tau_plus()),
        _ => omega.clone(),
    };
    let source = problem.total_source();
    let mut cuts: Vec<f64> = omega.breaks().collect();
    source.breakpoints(&mut cuts);
    cuts.sort_by(f64::total_cmp);

    let mut diag = vec![0.0; n + 1];
    let mut off = vec![0.0; n];
    let mut load = vec![0.0; n + 1];
    for j in 0..n {
        let (x0, x1) = (x[j], x[j + 1]);
        let h = x1 - x0;
        let mut k = 0.0;
        for (lo, hi) in cell_pieces(x0, x1, &cuts) {
            let (c, a) = omega.piece_at(0.5 * (lo + hi));
            k += c * power_integral(lo, hi, a);
            let (c, a) = load_weight.piece_at(0.5 * (lo + hi));
            let (l0, l1) = cell_load(&source, j, x0, h, lo, hi, c, a);
            load[j] += l0;
            load[j + 1] += l1;
        }
        let k = k / (h * h);
        diag[j] += k;
        diag[j + 1] += k;
        off[j] = -k;
    }
    if load.iter().any(|v| !v.is_finite()) {
        return Err(HardyError::Divergent(
            "source is not integrable against the operator weight".into(),
        ));
    }

    let first = if mesh.is_ball() { 0 } else { 1 };
    let nodes: Vec<usize> = (first..n).collect();
    let m = nodes.len();
    let mut matrix = Tridiagonal::zeros(m);
    for (row, &i) in nodes.iter().enumerate() {
        matrix.diag[row] = diag[i];
        if row + 1 < m {
            matrix.upper[row] = off[i];
            matrix.lower[row] = off[i];
        }
    }
    let rhs = nodes.iter().map(|&i| load[i]).collect();
    Ok(LinearSystem { matrix, rhs, nodes })
}

/// Sub-intervals of `[x0, x1]` cut at interior breakpoints.
fn cell_pieces(x0: f64, x1: f64, cuts: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(2);
    let mut lo = x0;
    for &c in cuts {
        if c > lo && c < x1 {
            out.push((lo, c));
            lo = c;
        }
    }
    out.push((lo, x1));
    out
}

/// `(∫ w g φ_j, ∫ w g φ_{j+1})` over `[lo, hi] ⊂ [x0, x0 + h]`, `w = c r^a`.
#[allow(clippy::too_many_arguments)]
fn cell_load(src: &Source, j: usize, x0: f64, h: f64, lo: f64, hi: f64, c: f64, a: f64) -> (f64, f64) {
    let t0 = (lo - x0) / h;
    let s = (hi - lo) / h;
    // Cell-coordinate moments ∫ r^A t^k from piece-coordinate ones.
    let moments = |aa: f64| -> [f64; 3] {
        let [m0, m1, m2] = power_moments(lo, hi, aa);
        let t1 = if m1 == 0.0 { 0.0 } else { s * m1 };
        let t2 = if m2 == 0.0 { 0.0 } else { s * s * m2 };
        let mut q1 = t1;
        let mut q2 = t2;
        if t0 != 0.0 {
            q1 += t0 * m0;
            q2 += 2.0 * t0 * t1 + t0 * t0 * m0;
        }
        [m0, q1, q2]
    };
    match src {
        Source::Zero => (0.0, 0.0),
        Source::Powers(terms) => {
            let (mut l0, mut l1) = (0.0, 0.0);
            for &(coef, p) in terms {
                if coef == 0.0 {
                    continue;
                }
                let [m0, m1, _] = moments(a + p);
                l0 += c * coef * (m0 - m1);
                l1 += c * coef * m1;
            }
            (l0, l1)
        }
        Source::Sampled(u) => {
            let (v0, v1) = (u.samples()[j], u.samples()[j + 1]);
            if v0 == 0.0 && v1 == 0.0 {
                return (0.0, 0.0);
            }
            let [m0, m1, m2] = moments(a + u.exponent());
            // g = v0(1-t) + v1 t against φ_j = 1-t and φ_{j+1} = t.
            let i00 = m0 - 2.0 * m1 + m2;
            let i01 = m1 - m2;
            let i11 = m2;
            (c * (v0 * i00 + v1 * i01), c * (v0 * i01 + v1 * i11))
        }
        Source::Function { f, .. } => {
            let l0 = weighted_integral(lo, hi, a, |r| f(r) * (1.0 - (r - x0) / h));
            let l1 = weighted_integral(lo, hi, a, |r| f(r) * (r - x0) / h);
            (c * l0, c * l1)
        }
        Source::Sum(parts) => parts.iter().fold((0.0, 0.0), |acc, p| {
            let (a0, a1) = cell_load(p, j, x0, h, lo, hi, c, a);
            (acc.0 + a0, acc.1 + a1)
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveStats {
    pub cells: usize,
    pub unknowns: usize,
    pub row_swaps: usize,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: RadialFunction,
    /// Scaled algebraic residual of the linear solve.
    pub residual_linf: f64,
    /// Defect of the weak formulation against a fixed smooth test function;
    /// relative to the size of the right-hand side.
    pub weak_identity_defect: f64,
    /// Algebraic residual per mesh node (zero at Dirichlet nodes).
    pub node_residual: Vec<f64>,
    pub stats: SolveStats,
}

struct Solved {
    v: Vec<f64>,
    residual: f64,
    node_residual: Vec<f64>,
    stats: SolveStats,
}

fn solve_system(problem: &DirichletProblem) -> Result<Solved> {
    let sys = assemble(problem)?;
    let sol = sys.matrix.solve(&sys.rhs)?;
    let residual = sys.matrix.scaled_residual(&sol.x, &sys.rhs);
    if !(residual <= SOLVER_TOLERANCE) {
        return Err(HardyError::ToleranceNotReached {
            residual,
            tolerance: SOLVER_TOLERANCE,
        });
    }
    let npts = problem.mesh.nodes().len();
    let mut v = vec![0.0; npts];
    let mut node_residual = vec![0.0; npts];
    let ax = sys.matrix.mul(&sol.x);
    for (row, &i) in sys.nodes.iter().enumerate() {
        v[i] = sol.x[row];
        node_residual[i] = ax[row] - sys.rhs[row];
    }
    Ok(Solved {
        v,
        residual,
        node_residual,
        stats: SolveStats {
            cells: problem.mesh.intervals(),
            unknowns: sys.nodes.len(),
            row_swaps: sol.row_swaps,
        },
    })
}

/// `|∫ω v'ξ' - ∫ω g ξ| / max(|∫ω g ξ|, ‖ξ‖·tiny)` with `ξ` a smooth bump
/// vanishing on the Dirichlet boundary.
fn galerkin_defect(problem: &DirichletProblem, v: &RadialFunction) -> f64 {
    let mesh = &problem.mesh;
    let omega = stiffness_weight(&problem.params, problem.kind);
    let load_weight = match problem.kind {
        OperatorKind::Direct => omega.shifted(-problem.params.tau_plus()),
        _ => omega.clone(),
    };
    let xi = default_test_function(mesh);
    let source = problem.total_source();
    let mut cuts: Vec<f64> = omega.breaks().collect();
    source.breakpoints(&mut cuts);
    cuts.extend(xi.breakpoints());
    cuts.sort_by(f64::total_cmp);
    let x = mesh.nodes();
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for j in 0..mesh.intervals() {
        let slope = (v.samples()[j + 1] - v.samples()[j]) / (x[j + 1] - x[j]);
        for (lo, hi) in cell_pieces(x[j], x[j + 1], &cuts) {
            let mid = 0.5 * (lo + hi);
            let (c, a) = omega.piece_at(mid);
            lhs += c * slope * weighted_integral(lo, hi, a, |r| xi.d1(r));
            let (c, a) = load_weight.piece_at(mid);
            rhs += c * weighted_integral(lo, hi, a, |r| source.eval(r) * xi.value(r));
        }
    }
    let scale = rhs.abs();
    if scale == 0.0 {
        lhs.abs()
    } else {
        (lhs - rhs).abs() / scale
    }
}

fn default_test_function(mesh: &RadialMesh) -> Box<dyn TestFunction> {
    if mesh.is_ball() {
        Box::new(PolynomialBump::new(mesh.r_out()))
    } else {
        Box::new(AnnularBump::new(mesh.r_in(), mesh.r_out()).expect("mesh bounds are ordered"))
    }
}

/// Solves `L*_μ w = f + div F` (or its ε-regularised version).
pub fn solve_dual(problem: &DirichletProblem) -> Result<SolveResult> {
    if !problem.kind.is_dual() {
        return Err(HardyError::invalid("solve_dual needs a dual operator kind"));
    }
    let s = solve_system(problem)?;
    let u = RadialFunction::linear(problem.mesh.clone(), s.v)?;
    let defect = galerkin_defect(problem, &u);
    Ok(SolveResult {
        u,
        residual_linf: s.residual,
        weak_identity_defect: defect,
        node_residual: s.node_residual,
        stats: s.stats,
    })
}

/// Solves `L_μ u = f + div F` with `u·Φ_μ⁻¹ → 0` at the origin.
///
/// The result is stored as `r^{τ₊}·v`.
pub fn solve_direct(problem: &DirichletProblem) -> Result<SolveResult> {
    if problem.kind != OperatorKind::Direct {
        return Err(HardyError::invalid("solve_direct needs the direct operator kind"));
    }
    let s = solve_system(problem)?;
    let v = RadialFunction::linear(problem.mesh.clone(), s.v)?;
    let defect = galerkin_defect(problem, &v);
    let u = v.mul_power(problem.params.tau_plus());
    Ok(SolveResult {
        u,
        residual_linf: s.residual,
        weak_identity_defect: defect,
        node_residual: s.node_residual,
        stats: s.stats,
    })
}

pub fn solve(problem: &DirichletProblem) -> Result<SolveResult> {
    match problem.kind {
        OperatorKind::Direct => solve_direct(problem),
        _ => solve_dual(problem),
    }
}

/// Solution of `L_μ u = c_μ k δ₀` in `B_R` with `u = 0` on `∂B_R`.
///
/// Normalisation: the result satisfies `∫ u L*_μ ξ dγ_μ = c_μ·k·ξ(0)`; unit
/// strength is *not* divided by `c_μ`. The construction subtracts from
/// `Φ_μ η` (η a cutoff near the origin) the regular solution of
/// `L_μ w = L_μ(Φ_μ η)`, whose right side is smooth and supported in the
/// cutoff's transition annulus. The output is stored as `r^{τ₋}·V`.
pub fn solve_dirac(params: &HardyParams, mesh: &Arc<RadialMesh>, strength: f64) -> Result<SolveResult> {
    if !mesh.is_ball() {
        return Err(HardyError::invalid("the Dirac problem needs a ball (r_in = 0)"));
    }
    if params.is_critical() {
        return Err(HardyError::invalid(
            "the Dirac solver needs mu > mu0 (logarithmic case not supported)",
        ));
    }
    if !strength.is_finite() {
        return Err(HardyError::invalid("strength must be finite"));
    }
    let cutoff = Cutoff::for_ball(mesh.r_out())?;
    let (t0, t1) = cutoff.transition();
    let p = *params;
    let source = Source::function(
        move |r| {
            if r <= t0 || r >= t1 {
                return 0.0;
            }
            let eta = cutoff.eval(r);
            let (phi, dphi, _) = p.phi_derivatives(r).unwrap_or((0.0, 0.0, 0.0));
            -2.0 * eta.d1 * dphi - phi * (eta.d2 + (p.n() - 1.0) * eta.d1 / r)
        },
        vec![t0, t1],
    );
    let problem = DirichletProblem::new(*params, mesh.clone(), OperatorKind::Direct, source, Flux::Zero)?;
    let s = solve_system(&problem)?;
    let gap = params.tau_plus() - params.tau_minus();
    let regular: Vec<f64> = mesh
        .nodes()
        .iter()
        .zip(&s.v)
        .map(|(&r, &v)| strength * (cutoff.eval(r).value - pow(r, gap) * v))
        .collect();
    let u = RadialFunction::split(mesh.clone(), params.tau_minus(), regular)?;
    let xi = PolynomialBump::new(mesh.r_out());
    let rhs = params.c_mu() * strength;
    let raw = weak_identity_defect(params, mesh, &u, &xi, rhs)?;
    let defect = if rhs == 0.0 { raw } else { raw / rhs.abs() };
    Ok(SolveResult {
        u,
        residual_linf: s.residual,
        weak_identity_defect: defect,
        node_residual: s.node_residual,
        stats: s.stats,
    })
}

/// Closed form `k(r^{τ₋} - R^{τ₋-τ₊} r^{τ₊})` of the Dirac solution.
pub fn dirac_exact(params: &HardyParams, radius: f64, strength: f64, r: f64) -> f64 {
    let (tm, tp) = (params.tau_minus(), params.tau_plus());
    strength * (r.powf(tm) - radius.powf(tm - tp) * r.powf(tp))
}

/// Applies the radial operator at interior node `r` using three-point
/// differences; the power factor of a singular split is differentiated exactly.
pub fn radial_apply(params: &HardyParams, kind: OperatorKind, u: &RadialFunction, r: f64) -> Result<f64> {
    let mesh = u.mesh();
    let i = mesh
        .find_node(r)
        .ok_or_else(|| HardyError::invalid(format!("r = {r} is not a mesh node")))?;
    if i == 0 || i == mesh.intervals() || mesh.node(i) <= 0.0 {
        return Err(HardyError::invalid(format!("r = {r} is not an interior node")));
    }
    let x = mesh.nodes();
    let y = u.samples();
    let r = x[i];
    let (v, dv, d2v) = (y[i], fd_first(x, y, i), fd_second(x, y, i));
    let e = u.exponent();
    let (u0, u1, u2) = if e == 0.0 {
        (v, dv, d2v)
    } else {
        let p = r.powf(e);
        (
            p * v,
            p * (e * v / r + dv),
            p * (e * (e - 1.0) * v / (r * r) + 2.0 * e * dv / r + d2v),
        )
    };
    let n1 = params.n() - 1.0;
    let drift = 2.0 * params.tau_plus();
    Ok(match kind {
        OperatorKind::Direct => params.radial_direct(r, u0, u1, u2),
        OperatorKind::Dual => -u2 - (n1 + drift) * u1 / r,
        OperatorKind::DualRegularized { epsilon } => {
            let d = if r > epsilon { drift } else { 0.0 };
            -u2 - (n1 + d) * u1 / r
        }
    })
}

/// Radial test function with its first two derivatives.
pub trait TestFunction: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn d1(&self, r: f64) -> f64;
    fn d2(&self, r: f64) -> f64;
    /// Radii where the second derivative may jump.
    fn breakpoints(&self) -> Vec<f64>;
    /// `ξ = 0` for `r ≥ support_end()`.
    fn support_end(&self) -> f64;
}

/// `L*_μ ξ(r)`, with the limit `-(1+b)ξ''(0)` at the origin.
pub fn apply_dual(params: &HardyParams, xi: &dyn TestFunction, r: f64) -> f64 {
    let b = params.drift_weight_exponent();
    if r == 0.0 {
        -(1.0 + b) * xi.d2(0.0)
    } else {
        -xi.d2(r) - b * xi.d1(r) / r
    }
}

/// `(1 - (r/R)²)²` on `[0, R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialBump {
    radius: f64,
}

impl PolynomialBump {
    pub fn new(radius: f64) -> Self {
        Self { radius }
    }
}

impl TestFunction for PolynomialBump {
    fn value(&self, r: f64) -> f64 {
        let q = r / self.radius;
        if q >= 1.0 {
            0.0
        } else {
            (1.0 - q * q).powi(2)
        }
    }

    fn d1(&self, r: f64) -> f64 {
        let q = r / self.radius;
        if q >= 1.0 {
            0.0
        } else {
            -4.0 * q * (1.0 - q * q) / self.radius
        }
    }

    fn d2(&self, r: f64) -> f64 {
        let q = r / self.radius;
        if q >= 1.0 {
            0.0
        } else {
            (12.0 * q * q - 4.0) / (self.radius * self.radius)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.radius]
    }

    fn support_end(&self) -> f64 {
        self.radius
    }
}

/// The cutoff `η_{n₀}` used as a test function with `ξ(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffBump {
    cutoff: Cutoff,
}

impl CutoffBump {
    pub fn new(cutoff: Cutoff) -> Self {
        Self { cutoff }
    }
}

impl TestFunction for CutoffBump {
    fn value(&self, r: f64) -> f64 {
        self.cutoff.eval(r).value
    }

    fn d1(&self, r: f64) -> f64 {
        self.cutoff.eval(r).d1
    }

    fn d2(&self, r: f64) -> f64 {
        self.cutoff.eval(r).d2
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.cutoff.transition();
        vec![a, b]
    }

    fn support_end(&self) -> f64 {
        self.cutoff.transition().1
    }
}

/// `((r-a)(b-r))³` scaled to peak 1, zero outside `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnularBump {
    a: f64,
    b: f64,
    scale: f64,
}

impl AnnularBump {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b > a && b.is_finite()) {
            return Err(HardyError::invalid(format!("annular bump needs 0 <= a < b (got {a}, {b})")));
        }
        let half = 0.5 * (b - a);
        Ok(Self {
            a,
            b,
            scale: half.powi(-6),
        })
    }

    fn q(&self, r: f64) -> Option<(f64, f64)> {
        if r <= self.a || r >= self.b {
            None
        } else {
            Some(((r - self.a) * (self.b - r), self.a + self.b - 2.0 * r))
        }
    }
}

impl TestFunction for AnnularBump {
    fn value(&self, r: f64) -> f64 {
        self.q(r).map_or(0.0, |(q, _)| self.scale * q.powi(3))
    }

    fn d1(&self, r: f64) -> f64 {
        self.q(r).map_or(0.0, |(q, dq)| 3.0 * self.scale * q * q * dq)
    }

    fn d2(&self, r: f64) -> f64 {
        self.q(r)
            .map_or(0.0, |(q, dq)| self.scale * (6.0 * q * dq * dq - 6.0 * q * q))
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.a, self.b]
    }

    fn support_end(&self) -> f64 {
        self.b
    }
}

/// Something that can be integrated against a test function: a value and
/// the power `e` with `u ~ r^e` at the origin.
pub trait RadialProfile: Sync {
    fn value(&self, r: f64) -> f64;
    fn origin_exponent(&self) -> f64;
}

impl RadialProfile for RadialFunction {
    fn value(&self, r: f64) -> f64 {
        self.eval(r).unwrap_or(f64::NAN)
    }

    fn origin_exponent(&self) -> f64 {
        self.exponent()
    }
}

/// A closed-form profile.
pub struct ClosedProfile<F> {
    pub f: F,
    pub exponent: f64,
}

impl<F: Fn(f64) -> f64 + Sync> RadialProfile for ClosedProfile<F> {
    fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    fn origin_exponent(&self) -> f64 {
        self.exponent
    }
}

/// `∫ u · L*_μ ξ dγ_μ`, integrated cell by cell on `mesh` (split at the test
/// function's breakpoints); `L*_μ ξ` is evaluated analytically.
pub fn weak_identity_integral(
    params: &HardyParams,
    mesh: &RadialMesh,
    u: &dyn RadialProfile,
    xi: &dyn TestFunction,
) -> Result<f64> {
    let end = xi.support_end();
    if end > mesh.r_out() * (1.0 + 1e-12) {
        return Err(HardyError::invalid(format!(
            "test function must vanish at r_out = {} (support ends at {end})",
            mesh.r_out()
        )));
    }
    let a = params.n() - 1.0 + params.tau_plus();
    let e = u.origin_exponent();
    let mut cuts = xi.breakpoints();
    cuts.sort_by(f64::total_cmp);
    let x = mesh.nodes();
    let mut total = 0.0;
    for j in 0..mesh.intervals() {
        if x[j] >= end {
            break;
        }
        for (lo, hi) in cell_pieces(x[j], x[j + 1].min(end), &cuts) {
            let piece = if lo == 0.0 {
                weighted_integral(0.0, hi, a + e, |r| {
                    u.value(r) * r.powf(-e) * apply_dual(params, xi, r)
                })
            } else {
                weighted_integral(lo, hi, a, |r| u.value(r) * apply_dual(params, xi, r))
            };
            total += piece;
        }
    }
    Ok(params.sphere_area() * total)
}

/// `|∫ u L*_μ ξ dγ_μ - rhs|`.
pub fn weak_identity_defect(
    params: &HardyParams,
    mesh: &RadialMesh,
    u: &dyn RadialProfile,
    xi: &dyn TestFunction,
    rhs: f64,
) -> Result<f64> {
    Ok((weak_identity_integral(params, mesh, u, xi)? - rhs).abs())
}
