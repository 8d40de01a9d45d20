//! Mode-0 (spherically averaged) Green functions of `L_μ` on `B_R`, and
//! potentials of radial measures `ν = k δ₀ + Σ mᵢ σ_{sᵢ} + ρ dx`.
//!
//! With `P(r) = r^{τ₋} - R^{τ₋-τ₊} r^{τ₊}` the kernel for a unit-mass shell
//! at radius `s` is `G(r,s) = min(r,s)^{τ₊} P(max(r,s)) / c_μ`. The Dirac
//! part uses the same normalisation as [`crate::operator::solve_dirac`]:
//! strength `k` contributes `k·P(r)`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::grid::{RadialFunction, RadialMesh, RadialWeight};
use crate::operator::{assemble, DirichletProblem, Flux, OperatorKind, Source};
use crate::params::HardyParams;
use crate::quadrature::{gl8, linear_moment};

/// Nonnegative radial measure on `B_R`.
#[derive(Debug, Clone, Default)]
pub struct RadialMeasure {
    pub dirac_strength: f64,
    /// `(radius, mass)` of uniform shell measures.
    pub shells: Vec<(f64, f64)>,
    /// Density against `dx`.
    pub density: Option<RadialFunction>,
}

impl RadialMeasure {
    pub fn dirac(k: f64) -> Self {
        Self {
            dirac_strength: k,
            ..Self::default()
        }
    }

    pub fn shell(radius: f64, mass: f64) -> Self {
        Self {
            shells: vec![(radius, mass)],
            ..Self::default()
        }
    }

    pub fn density(rho: RadialFunction) -> Self {
        Self {
            density: Some(rho),
            ..Self::default()
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            dirac_strength: lambda * self.dirac_strength,
            shells: self.shells.iter().map(|&(s, m)| (s, lambda * m)).collect(),
            density: self.density.as_ref().map(|d| d.scale(lambda)),
        }
    }

    pub fn validate(&self, radius: f64) -> Result<()> {
        if !(self.dirac_strength >= 0.0 && self.dirac_strength.is_finite()) {
            return Err(HardyError::invalid("Dirac strength must be finite and >= 0"));
        }
        for &(s, m) in &self.shells {
            if !(s > 0.0 && s < radius) {
                return Err(HardyError::invalid(format!(
                    "shell radius {s} must lie strictly inside (0, {radius})"
                )));
            }
            if !(m >= 0.0 && m.is_finite()) {
                return Err(HardyError::invalid(format!("shell mass must be >= 0 (got {m})")));
            }
        }
        if let Some(d) = &self.density {
            if (d.mesh().r_out() - radius).abs() > 1e-12 * radius || !d.mesh().is_ball() {
                return Err(HardyError::MeshMismatch("density must live on the ball mesh".into()));
            }
            if d.samples().iter().any(|&v| v < 0.0) {
                return Err(HardyError::invalid("density must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Weighted total variation split into the part away from the origin and
/// the Dirac atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureNorm {
    /// `∫ Γ_μ d|ν|` over `Ω \ {0}`.
    pub weighted: f64,
    /// `k`.
    pub atom: f64,
}

impl MeasureNorm {
    pub fn total(&self) -> f64 {
        self.weighted + self.atom
    }
}

pub fn measure_norm(nu: &RadialMeasure, params: &HardyParams) -> MeasureNorm {
    let mut w: f64 = nu
        .shells
        .iter()
        .map(|&(s, m)| m.abs() * s.powf(params.tau_plus()))
        .sum();
    if let Some(d) = &nu.density {
        w += d.integrate(&RadialWeight::gamma_weighted(params));
    }
    MeasureNorm {
        weighted: w,
        atom: nu.dirac_strength.abs(),
    }
}

/// Closed-form mode-0 Green function on `B_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenMode0 {
    params: HardyParams,
    radius: f64,
}

impl GreenMode0 {
    pub fn new(params: HardyParams, radius: f64) -> Result<Self> {
        if params.is_critical() {
            return Err(HardyError::invalid("mode-0 Green function needs mu > mu0"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(HardyError::invalid(format!("radius must be > 0 (got {radius})")));
        }
        Ok(Self { params, radius })
    }

    pub fn params(&self) -> &HardyParams {
        &self.params
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `r^{τ₋} - R^{τ₋-τ₊} r^{τ₊}`: the singular solution vanishing at `R`.
    pub fn outer(&self, r: f64) -> f64 {
        let (tm, tp) = (self.params.tau_minus(), self.params.tau_plus());
        r.powf(tm) - self.radius.powf(tm - tp) * r.powf(tp)
    }

    /// `G(r, s)`, symmetric in its arguments.
    pub fn kernel(&self, r: f64, s: f64) -> f64 {
        let (lo, hi) = if r <= s { (r, s) } else { (s, r) };
        if hi >= self.radius {
            return 0.0;
        }
        let tp = self.params.tau_plus();
        let inner = if lo == 0.0 {
            match tp.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => 1.0,
                _ => f64::INFINITY,
            }
        } else {
            lo.powf(tp)
        };
        inner * self.outer(hi) / self.params.c_mu()
    }

    /// `G(·, s)` sampled on a ball mesh of radius `R`.
    pub fn profile(&self, mesh: &Arc<RadialMesh>, s: f64) -> Result<RadialFunction> {
        if !(s > 0.0 && s < self.radius) {
            return Err(HardyError::invalid(format!(
                "source radius {s} must lie in (0, {})",
                self.radius
            )));
        }
        check_ball(mesh, self.radius)?;
        let e = representation_exponent(&self.params, false);
        let regular = mesh
            .nodes()
            .iter()
            .map(|&r| {
                if r == 0.0 {
                    if self.params.tau_plus() > 0.0 {
                        0.0
                    } else {
                        self.outer(s) / self.params.c_mu()
                    }
                } else {
                    self.kernel(r, s) * r.powf(-e)
                }
            })
            .collect();
        RadialFunction::split(mesh.clone(), e, regular)
    }
}

pub fn green_mode0(params: &HardyParams, radius: f64, s: f64, mesh: &Arc<RadialMesh>) -> Result<RadialFunction> {
    GreenMode0::new(*params, radius)?.profile(mesh, s)
}

fn check_ball(mesh: &RadialMesh, radius: f64) -> Result<()> {
    if !mesh.is_ball() || (mesh.r_out() - radius).abs() > 1e-12 * radius {
        return Err(HardyError::invalid(format!(
            "potentials need a ball mesh [0, {radius}]"
        )));
    }
    Ok(())
}

/// Power factor used to store potentials: `τ₋` with a Dirac part, `τ₊` when
/// that is negative, otherwise none.
fn representation_exponent(params: &HardyParams, has_dirac: bool) -> f64 {
    if has_dirac {
        params.tau_minus()
    } else if params.tau_plus() < 0.0 {
        params.tau_plus()
    } else {
        0.0
    }
}

/// `𝔾_μ[ν]` on a ball mesh. The density part is integrated against the
/// kernel with exact power moments of the piecewise linear density.
pub fn potential(nu: &RadialMeasure, params: &HardyParams, mesh: &Arc<RadialMesh>) -> Result<RadialFunction> {
    let radius = mesh.r_out();
    check_ball(mesh, radius)?;
    nu.validate(radius)?;
    let g = GreenMode0::new(*params, radius)?;
    let has_dirac = nu.dirac_strength != 0.0;
    let e = representation_exponent(params, has_dirac);
    let x = mesh.nodes();
    let npts = x.len();
    let c = params.c_mu();
    let (tm, tp) = (params.tau_minus(), params.tau_plus());
    let n1 = params.n() - 1.0;
    let r_fac = radius.powf(tm - tp);

    // I1(r) = |S|∫_0^r s^{τ₊+N-1}ρ ds, I2(r) = |S|∫_r^R P(s) s^{N-1} ρ ds.
    let mut i1 = vec![0.0; npts];
    let mut i2 = vec![0.0; npts];
    if let Some(rho) = &nu.density {
        let er = rho.exponent();
        let v = rho.samples();
        let area = params.sphere_area();
        for j in 0..npts - 1 {
            i1[j + 1] = i1[j] + area * linear_moment(x[j], x[j + 1], tp + n1 + er, v[j], v[j + 1]);
        }
        for j in (0..npts - 1).rev() {
            let a = linear_moment(x[j], x[j + 1], tm + n1 + er, v[j], v[j + 1]);
            let b = linear_moment(x[j], x[j + 1], tp + n1 + er, v[j], v[j + 1]);
            i2[j] = i2[j + 1] + area * (a - r_fac * b);
        }
    }

    let regular: Vec<f64> = (0..npts)
        .map(|i| {
            let r = x[i];
            if r == 0.0 {
                if has_dirac {
                    nu.dirac_strength
                } else if tp > 0.0 {
                    0.0
                } else {
                    let shells: f64 = nu.shells.iter().map(|&(s, m)| m * g.outer(s)).sum();
                    (shells + i2[0]) / c
                }
            } else {
                let mut u = nu.dirac_strength * g.outer(r);
                u += nu.shells.iter().map(|&(s, m)| m * g.kernel(r, s)).sum::<f64>();
                if nu.density.is_some() {
                    u += (g.outer(r) * i1[i] + r.powf(tp) * i2[i]) / c;
                }
                if e == 0.0 {
                    u
                } else {
                    u * r.powf(-e)
                }
            }
        })
        .collect();
    RadialFunction::split(mesh.clone(), e, regular)
}

/// Spherical average of `|x - y|^{-a}` over `|x| = r`, `|y| = s` in `R^N`.
///
/// Returns `+∞` for the divergent diagonal configuration `r = s`, `a ≥ N-1`.
pub fn angular_riesz_average(dim: usize, r: f64, s: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    if s == 0.0 || r == 0.0 {
        let d = r.max(s);
        return if d == 0.0 { f64::INFINITY } else { d.powf(-a) };
    }
    let m = dim as i32 - 2;
    if r == s && a >= (dim - 1) as f64 {
        return f64::INFINITY;
    }
    let f = |t: f64| {
        let h = (0.5 * t).sin();
        let d2 = (r - s) * (r - s) + 4.0 * r * s * h * h;
        d2.powf(-0.5 * a) * t.sin().powi(m)
    };
    // Geometric panels towards θ = 0, where the kernel peaks when r ≈ s.
    let scale = (r - s).abs() / (r * s).sqrt();
    let floor = (scale * 1e-3).max(1e-18);
    let mut hi = std::f64::consts::PI;
    let mut total = 0.0;
    for _ in 0..200 {
        let lo = 0.5 * hi;
        total += gl8(lo, hi, f);
        hi = lo;
        if hi < floor {
            break;
        }
    }
    total += gl8(0.0, hi, f);
    total / wallis(m)
}

/// `∫_0^π sin^m θ dθ`.
fn wallis(m: i32) -> f64 {
    match m {
        0 => std::f64::consts::PI,
        1 => 2.0,
        _ => (m as f64 - 1.0) / m as f64 * wallis(m - 2),
    }
}

/// `G(r,s) / (Γ_μ(s)·avg |x-y|^{-(N-2+τ₊)})`, the shell-averaged form of the
/// pointwise kernel bound.
pub fn kernel_bound_ratio(green: &GreenMode0, r: f64, s: f64) -> f64 {
    let p = green.params();
    let a = p.n() - 2.0 + p.tau_plus();
    let avg = angular_riesz_average(p.dim(), r, s, a);
    green.kernel(r, s) / (s.powf(p.tau_plus()) * avg)
}

/// Discrete Green kernel of the direct operator: entry `(i, j)` approximates
/// `G(r_i, r_j)` (nodes without a Dirichlet condition only).
///
/// Built from the inverse of the symmetric stiffness matrix as
/// `r_i^{τ₊} (A⁻¹)_{ij} r_j^{τ₊} / |S^{N-1}|`, so it is symmetric up to the
/// rounding of the solves.
pub fn discrete_green_matrix(params: &HardyParams, mesh: &Arc<RadialMesh>) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    let problem = DirichletProblem::new(*params, mesh.clone(), OperatorKind::Direct, Source::Zero, Flux::Zero)?;
    let sys = assemble(&problem)?;
    let m = sys.nodes.len();
    let tp = params.tau_plus();
    let x = mesh.nodes();
    let area = params.sphere_area();
    let mut out = vec![vec![0.0; m]; m];
    for col in 0..m {
        let mut e = vec![0.0; m];
        e[col] = 1.0;
        let sol = sys.matrix.solve(&e)?;
        let rj = x[sys.nodes[col]];
        for row in 0..m {
            let ri = x[sys.nodes[row]];
            out[row][col] = ri.powf(tp) * sol.x[row] * rj.powf(tp) / area;
        }
    }
    Ok((sys.nodes, out))
}
