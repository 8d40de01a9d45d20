//! Exponents, fundamental solutions and the small closed-form helpers
//! (truncation, barrier, cutoff) used throughout the crate.
//!
//! Everything here is derived from the pair `(N, μ)`. [`HardyParams`]
//! computes the indicial roots and constants once at construction; the rest
//! of the crate reads them from there and never recomputes them.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{HardyError, Result};

/// Surface area `|S^{n-1}|` of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Hardy threshold `μ₀ = -(N-2)²/4`.
pub fn hardy_threshold(dim: usize) -> f64 {
    let h = dim as f64 - 2.0;
    -h * h / 4.0
}

/// Constants derived from `(N, μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedExponents {
    /// Singular indicial root `τ₋ = -(N-2)/2 - s`.
    pub tau_minus: f64,
    /// Regular indicial root `τ₊ = -(N-2)/2 + s`.
    pub tau_plus: f64,
    /// Normalisation of the weighted Dirac identity.
    pub c_mu: f64,
    /// Critical gradient exponent `(N+τ₊)/(N-1+τ₊)`.
    pub p_star: f64,
    /// `s = sqrt(μ - μ₀)`.
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyParams {
    dim: usize,
    mu: f64,
    mu0: f64,
    area: f64,
    exps: DerivedExponents,
}

impl HardyParams {
    pub fn new(dim: usize, mu: f64) -> Result<Self> {
        if dim < 3 {
            return Err(HardyError::UnsupportedDimension(dim));
        }
        if !mu.is_finite() {
            return Err(HardyError::invalid(format!("mu must be finite (got {mu})")));
        }
        let mu0 = hardy_threshold(dim);
        if mu < mu0 {
            return Err(HardyError::BelowHardyThreshold { mu, mu0 });
        }
        let half = (dim as f64 - 2.0) / 2.0;
        let s = (mu - mu0).sqrt();
        let tau_minus = -half - s;
        // τ₊τ₋ = -μ; dividing avoids the cancellation in -half + s when μ ≈ 0.
        let tau_plus = -mu / tau_minus;
        let area = sphere_area(dim);
        let c_mu = if mu > mu0 { 2.0 * s * area } else { area };
        let n = dim as f64;
        let p_star = (n + tau_plus) / (n - 1.0 + tau_plus);
        Ok(Self {
            dim,
            mu,
            mu0,
            area,
            exps: DerivedExponents {
                tau_minus,
                tau_plus,
                c_mu,
                p_star,
                s,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> f64 {
        self.dim as f64
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    /// `(3/4)·μ₀`, the lower bound (exclusive) for the dual problem.
    pub fn dual_threshold(&self) -> f64 {
        0.75 * self.mu0
    }

    pub fn exponents(&self) -> &DerivedExponents {
        &self.exps
    }

    pub fn tau_plus(&self) -> f64 {
        self.exps.tau_plus
    }

    pub fn tau_minus(&self) -> f64 {
        self.exps.tau_minus
    }

    pub fn c_mu(&self) -> f64 {
        self.exps.c_mu
    }

    pub fn p_star(&self) -> f64 {
        self.exps.p_star
    }

    pub fn sqrt_gap(&self) -> f64 {
        self.exps.s
    }

    /// `|S^{N-1}|`.
    pub fn sphere_area(&self) -> f64 {
        self.area
    }

    pub fn is_critical(&self) -> bool {
        self.mu == self.mu0
    }

    pub fn dual_solvable(&self) -> bool {
        self.mu > self.dual_threshold()
    }

    pub fn require_dual_solvable(&self) -> Result<()> {
        if self.dual_solvable() {
            Ok(())
        } else {
            Err(HardyError::NotDualSolvable {
                mu: self.mu,
                threshold: self.dual_threshold(),
            })
        }
    }

    /// Exponent of the drift-conjugating weight `ω = r^{N-1+2τ₊}`.
    pub fn drift_weight_exponent(&self) -> f64 {
        self.n() - 1.0 + 2.0 * self.exps.tau_plus
    }

    /// `min{p*_μ, N/(N-1)}`.
    pub fn gradient_threshold(&self) -> f64 {
        self.exps.p_star.min(self.n() / (self.n() - 1.0))
    }

    /// Endpoint exponent `(N+τ₊)/(N-2+τ₊)` of the Marcinkiewicz estimate.
    pub fn marcinkiewicz_endpoint(&self) -> f64 {
        let t = self.exps.tau_plus;
        (self.n() + t) / (self.n() - 2.0 + t)
    }

    /// Compares `p*_μ` with the alternative closed form `1 - 2/τ₋`.
    ///
    /// The two do not agree in general (for `N = 3, μ = 0` they are `3/2`
    /// and `3`); the `(N+τ₊)/(1-τ₋)` rewrite does agree and is reported too.
    pub fn p_star_alternative_forms(&self) -> PStarForms {
        let t_minus = self.exps.tau_minus;
        PStarForms {
            p_star: self.exps.p_star,
            one_minus_two_over_tau_minus: 1.0 - 2.0 / t_minus,
            via_tau_minus: (self.n() + self.exps.tau_plus) / (1.0 - t_minus),
        }
    }

    /// `Φ_μ(r)`: `r^{τ₋}`, or `-r^{τ₋} ln r` at `μ = μ₀`.
    pub fn phi(&self, r: f64) -> Result<f64> {
        check_positive_radius(r)?;
        let p = r.powf(self.exps.tau_minus);
        Ok(if self.is_critical() { -p * r.ln() } else { p })
    }

    /// `Φ_μ` together with its first two radial derivatives.
    pub fn phi_derivatives(&self, r: f64) -> Result<(f64, f64, f64)> {
        check_positive_radius(r)?;
        let t = self.exps.tau_minus;
        let p = r.powf(t);
        if self.is_critical() {
            let l = r.ln();
            let v = -p * l;
            let d1 = -p / r * (t * l + 1.0);
            let d2 = -p / (r * r) * (t * (t - 1.0) * l + 2.0 * t - 1.0);
            Ok((v, d1, d2))
        } else {
            Ok((p, t * p / r, t * (t - 1.0) * p / (r * r)))
        }
    }

    /// `Γ_μ(r) = r^{τ₊}`.
    pub fn gamma(&self, r: f64) -> Result<f64> {
        check_positive_radius(r)?;
        Ok(r.powf(self.exps.tau_plus))
    }

    /// Radial form of `L_μ u = -u'' - (N-1)/r·u' + μ/r²·u`.
    pub fn radial_direct(&self, r: f64, u: f64, du: f64, d2u: f64) -> f64 {
        -d2u - (self.n() - 1.0) / r * du + self.mu / (r * r) * u
    }

    /// Radial form of `L*_μ u = -u'' - (N-1+2τ₊)/r·u'`.
    pub fn radial_dual(&self, r: f64, du: f64, d2u: f64) -> f64 {
        -d2u - self.drift_weight_exponent() / r * du
    }
}

/// The forms reported by [`HardyParams::p_star_alternative_forms`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PStarForms {
    pub p_star: f64,
    pub one_minus_two_over_tau_minus: f64,
    pub via_tau_minus: f64,
}

impl PStarForms {
    pub fn discrepancy(&self) -> f64 {
        self.one_minus_two_over_tau_minus - self.p_star
    }
}

pub fn exponents(params: &HardyParams) -> DerivedExponents {
    *params.exponents()
}

fn check_positive_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(HardyError::OutOfDomain {
            r,
            lo: 0.0,
            hi: f64::INFINITY,
        })
    }
}

/// Level `k > 0` of the truncation `S_k`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TruncationLevel(f64);

impl TruncationLevel {
    pub fn new(k: f64) -> Result<Self> {
        if k > 0.0 && k.is_finite() {
            Ok(Self(k))
        } else {
            Err(HardyError::invalid(format!(
                "truncation level must be finite and > 0 (got {k})"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `S_k(t)`: shrink `t` towards zero by `k`, with a dead zone on `[-k, k]`.
pub fn s_k(k: TruncationLevel, t: f64) -> f64 {
    let k = k.0;
    if t > k {
        t - k
    } else if t < -k {
        t + k
    } else {
        0.0
    }
}

/// Quadratic barrier `W₀(r) = a₀/(N+2)·(R₀² - r²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    a0: f64,
    r0: f64,
}

impl Barrier {
    pub fn new(a0: f64, r0: f64) -> Result<Self> {
        if !(a0 >= 0.0 && a0.is_finite()) {
            return Err(HardyError::invalid(format!("barrier a0 must be >= 0 (got {a0})")));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(HardyError::invalid(format!("barrier R0 must be > 0 (got {r0})")));
        }
        Ok(Self { a0, r0 })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn value(&self, params: &HardyParams, r: f64) -> Result<f64> {
        if !(0.0..=self.r0).contains(&r) {
            return Err(HardyError::OutOfDomain {
                r,
                lo: 0.0,
                hi: self.r0,
            });
        }
        Ok(self.a0 / (params.n() + 2.0) * (self.r0 * self.r0 - r * r))
    }

    /// `(2N+2τ₊)/(N+2) - 1`: relative excess of `L*_μ W₀` over `a₀`.
    pub fn supersolution_margin(params: &HardyParams) -> f64 {
        let n = params.n();
        (2.0 * n + 2.0 * params.tau_plus()) / (n + 2.0) - 1.0
    }

    /// `L*_μ W₀ ≥ a₀` everywhere (strictly, via a positive margin).
    pub fn is_supersolution(params: &HardyParams) -> bool {
        Self::supersolution_margin(params) > 0.0
    }
}

/// Value and radial derivatives of a cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffValue {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// `η_{n₀}(r) = η₀(n₀ r)` where `η₀` is 1 on `[0,1]`, 0 on `[2,∞)` and the
/// quintic smoothstep `1 - (10s³ - 15s⁴ + 6s⁵)`, `s = t - 1`, in between.
///
/// The profile is C² (not C^∞); its second derivative vanishes at both ends
/// of the transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cutoff {
    n0: u32,
}

impl Cutoff {
    pub fn new(n0: u32) -> Result<Self> {
        if n0 == 0 {
            return Err(HardyError::invalid("cutoff scale n0 must be >= 1"));
        }
        Ok(Self { n0 })
    }

    /// Smallest scale whose transition `[1/n₀, 2/n₀]` lies in `[0, R/2]`.
    pub fn for_ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(HardyError::invalid(format!("radius must be > 0 (got {radius})")));
        }
        let n0 = (4.0 / radius).ceil().max(1.0);
        if n0 > u32::MAX as f64 {
            return Err(HardyError::invalid("radius too small for a cutoff"));
        }
        Self::new(n0 as u32)
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    /// Start and end of the transition region.
    pub fn transition(&self) -> (f64, f64) {
        let n = self.n0 as f64;
        (1.0 / n, 2.0 / n)
    }

    pub fn eval(&self, r: f64) -> CutoffValue {
        let n = self.n0 as f64;
        let (v, d1, d2) = profile(n * r);
        CutoffValue {
            value: v,
            d1: n * d1,
            d2: n * n * d2,
        }
    }
}

fn profile(t: f64) -> (f64, f64, f64) {
    if t <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if t >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = t - 1.0;
    let s2 = s * s;
    let step = s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
    let d1 = 30.0 * s2 * (1.0 - s) * (1.0 - s);
    let d2 = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    (1.0 - step, -d1, -d2)
}

/// Convenience wrapper matching [`Cutoff::eval`].
pub fn cutoff_value(c: &Cutoff, r: f64) -> Result<CutoffValue> {
    if r < 0.0 || !r.is_finite() {
        return Err(HardyError::OutOfDomain {
            r,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(c.eval(r))
}
