use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{HardyError, Result};
use crate::norms::truncation_energy_check;
use crate::operator::{solve_dual, DirichletProblem, Flux, OperatorKind, Source};
use crate::params::HardyParams;

use super::{closed_norm, rel_diff, SuiteConfig, SuiteName, SuiteReport, Table};

/// One random datum: `f = Σ a_k t^k + b cos(ωt + φ)`, `F = t·Σ c_k t^k` with
/// `t = r/R`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RandomDatum {
    poly: [f64; 4],
    amp: f64,
    omega: f64,
    phase: f64,
    flux: [f64; 3],
}

impl RandomDatum {
    pub(crate) fn family(seed: u64, count: usize) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| Self {
                poly: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
                amp: rng.random_range(-1.0..1.0),
                omega: rng.random_range(0.0..6.0 * std::f64::consts::PI),
                phase: rng.random_range(0.0..2.0 * std::f64::consts::PI),
                flux: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
            })
            .collect()
    }

    fn f(&self, t: f64) -> f64 {
        let p = self.poly;
        p[0] + t * (p[1] + t * (p[2] + t * p[3])) + self.amp * (self.omega * t + self.phase).cos()
    }

    fn flux(&self, t: f64) -> f64 {
        let c = self.flux;
        t * (c[0] + t * (c[1] + t * c[2]))
    }

    fn flux_dt(&self, t: f64) -> f64 {
        let c = self.flux;
        c[0] + t * (2.0 * c[1] + 3.0 * t * c[2])
    }

    /// Source and flux scaled to unit `‖f‖_r + ‖F‖_r` against `r^a dr`.
    pub(crate) fn normalized(&self, exponent: f64, a: f64, params: &HardyParams, radius: f64) -> (Source, Flux) {
        let d = *self;
        let area = params.sphere_area();
        let nf = closed_norm(|r| d.f(r / radius), exponent, a, area, radius);
        let nflux = closed_norm(|r| d.flux(r / radius), exponent, a, area, radius);
        let s = 1.0 / (nf + nflux);
        let f = Source::function(move |r| s * d.f(r / radius), Vec::new());
        let flux = Flux::Function {
            value: Arc::new(move |r| s * d.flux(r / radius)),
            derivative: Arc::new(move |r| s * d.flux_dt(r / radius) / radius),
            breakpoints: Vec::new(),
        };
        (f, flux)
    }
}

struct Variant {
    name: &'static str,
    exponent: f64,
    weight_exponent: f64,
}

/// `sup ‖u₀‖_∞` over a seeded family of unit-norm data, unweighted (`L^r`,
/// `r > N`) and, for `μ > 0`, weighted (`L^r(dγ_μ)`, `r > N + τ₊`). The
/// supremum must be finite and stable between the two finest meshes.
pub fn suite_dual_linfty(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let params = cfg.params()?;
    params.require_dual_solvable()?;
    let n = params.n();
    let tp = params.tau_plus();
    let r_plain = cfg.linfty_r.unwrap_or(2.0 * n);
    if !(r_plain > n) {
        return Err(HardyError::Hypothesis(format!(
            "unweighted data exponent must exceed N = {n} (got {r_plain})"
        )));
    }
    let mut variants = vec![Variant {
        name: "unweighted",
        exponent: r_plain,
        weight_exponent: n - 1.0,
    }];
    let mut notes = Vec::new();
    if params.mu() > 0.0 {
        let r_w = cfg.linfty_r_weighted.unwrap_or(n + tp + 1.0);
        if !(r_w > n + tp) {
            return Err(HardyError::Hypothesis(format!(
                "weighted data exponent must exceed N + tau_plus = {} (got {r_w})",
                n + tp
            )));
        }
        variants.push(Variant {
            name: "weighted",
            exponent: r_w,
            weight_exponent: n - 1.0 + tp,
        });
    } else {
        notes.push(format!("weighted variant skipped: it needs mu > 0 (got mu = {})", params.mu()));
    }

    let data = RandomDatum::family(cfg.seed, cfg.linfty_samples);
    let mut cells = cfg.linfty_cells.clone();
    cells.sort_unstable();
    let (coarse, fine) = match cells.as_slice() {
        [.., a, b] => (*a, *b),
        [b] => (*b, *b),
        [] => unreachable!("validated non-empty"),
    };
    let meshes = [cfg.mesh_with(coarse)?, cfg.mesh_with(fine)?];

    let mut family = Table::new("family", &["exponent", "sample", "sup_coarse", "sup_fine"]);
    let mut stability = Table::new(
        "stability",
        &["exponent", "cells_coarse", "cells_fine", "sup_coarse", "sup_fine", "variation"],
    );
    let mut energy = Table::new("energy", &["sample", "level", "gradient_l2", "data_l2", "ratio"]);
    for v in &variants {
        let rows = data
            .par_iter()
            .enumerate()
            .map(|(i, d)| {
                let (f, flux) = d.normalized(v.exponent, v.weight_exponent, &params, cfg.radius);
                let mut sups = [0.0; 2];
                let mut last = None;
                for (k, mesh) in meshes.iter().enumerate() {
                    let pr = DirichletProblem::new(params, mesh.clone(), OperatorKind::Dual, f.clone(), flux.clone())?;
                    let u = solve_dual(&pr)?.u;
                    sups[k] = u.sup_abs();
                    last = Some(u);
                }
                let u = last.expect("two meshes");
                let te = if v.name == "unweighted" && sups[1] > 0.0 {
                    Some(truncation_energy_check(&params, &u, 0.5 * sups[1], &f, &flux)?)
                } else {
                    None
                };
                Ok((i, sups, te))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sup = [0.0f64; 2];
        for (i, sups, te) in &rows {
            family.push(
                format!("{}-{i}", v.name),
                vec![v.exponent, *i as f64, sups[0], sups[1]],
                None,
            );
            sup[0] = sup[0].max(sups[0]);
            sup[1] = sup[1].max(sups[1]);
            if let Some(te) = te {
                energy.push(format!("sample-{i}"), vec![*i as f64, 0.5 * sups[1], te.lhs, te.rhs, te.ratio], None);
            }
        }
        let variation = rel_diff(sup[0], sup[1]);
        let ok = sup.iter().all(|s| s.is_finite()) && variation < cfg.linfty_tol;
        stability.push(
            v.name,
            vec![v.exponent, coarse as f64, fine as f64, sup[0], sup[1], variation],
            Some(ok),
        );
    }
    Ok(SuiteReport::from_tables(
        SuiteName::DualLinfty,
        vec![stability, family, energy],
        notes,
    ))
}
