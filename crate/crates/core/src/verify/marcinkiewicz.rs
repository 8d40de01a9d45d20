use rayon::prelude::*;

use crate::error::{HardyError, Result};
use crate::green::{kernel_bound_ratio, measure_norm, potential, GreenMode0, RadialMeasure};
use crate::grid::RadialWeight;
use crate::norms::{fit_line, marcinkiewicz_norm};

use super::duality::measure_family;
use super::{rel_diff, SuiteConfig, SuiteName, SuiteReport, Table};

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Largest `kernel_bound_ratio` over an off-diagonal log grid of `(r, s)`.
fn kernel_bound_max(g: &GreenMode0, points: usize) -> f64 {
    let radius = g.radius();
    let grid = log_grid(1e-3 * radius, 0.95 * radius, points);
    let mut worst: f64 = 0.0;
    for &r in &grid {
        for &s in &grid {
            if r != s {
                worst = worst.max(kernel_bound_ratio(g, r, s));
            }
        }
    }
    worst
}

/// Marcinkiewicz norms of Green potentials in `M^q(dγ_μ)` against the
/// measure norm of their sources, for `μ > 0` and `q` up to
/// `(N+τ₊)/(N-2+τ₊)`.
///
/// Also tabulates the distribution function `m_λ` of the Dirac potential,
/// whose decay exponent is the endpoint itself, the per-shell constants in
/// `m_λ ≤ C (Γ_μ(s)/λ)^q`, and the shell-averaged kernel bound.
pub fn suite_marcinkiewicz(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let params = cfg.params()?;
    if params.mu() <= 0.0 {
        return Err(HardyError::Hypothesis(format!(
            "the Marcinkiewicz bound needs mu > 0 (got mu = {}); for mu <= 0 only a much weaker \
             type of Marcinkiewicz estimate holds",
            params.mu()
        )));
    }
    let endpoint = params.marcinkiewicz_endpoint();
    let q = cfg.marcinkiewicz_q.unwrap_or(endpoint);
    if !(q > 1.0 && q <= endpoint * (1.0 + 1e-12)) {
        return Err(HardyError::Hypothesis(format!(
            "Marcinkiewicz exponent must lie in (1, {endpoint}] (got {q})"
        )));
    }
    let gamma = RadialWeight::gamma_weighted(&params);
    let meshes = [cfg.mesh()?, cfg.mesh_with(2 * cfg.cells)?];

    let ratios_on = |k: usize| -> Result<Vec<(String, f64)>> {
        let mesh = &meshes[k];
        let mut family = measure_family(cfg, mesh)?;
        family.push(("dirac".into(), RadialMeasure::dirac(1.0)));
        family
            .par_iter()
            .map(|(label, nu)| {
                let u = potential(nu, &params, mesh)?;
                let m = marcinkiewicz_norm(&u, q, &gamma)?.value;
                Ok((label.clone(), m / measure_norm(nu, &params).total()))
            })
            .collect()
    };
    let coarse = ratios_on(0)?;
    let fine = ratios_on(1)?;
    let mut ratios = Table::new("ratios", &["q", "ratio_coarse", "ratio_fine", "refinement_change"]);
    let mut spread_set = Vec::new();
    for ((label, a), (_, b)) in coarse.iter().zip(&fine) {
        let change = rel_diff(*a, *b);
        let ok = a.is_finite() && b.is_finite() && *b > 0.0 && change < cfg.stability_tol;
        ratios.push(label.clone(), vec![q, *a, *b, change], Some(ok));
        if label != "dirac" {
            spread_set.push(*b);
        }
    }
    let hi = spread_set.iter().cloned().fold(0.0, f64::max);
    let lo = spread_set.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut spread = Table::new("spread", &["max_ratio", "min_ratio", "spread"]);
    spread.push("shells+density", vec![hi, lo, hi / lo], Some(hi / lo < cfg.marcinkiewicz_spread));

    // Distribution function of the Dirac potential.
    let mesh = &meshes[1];
    let v0 = potential(&RadialMeasure::dirac(1.0), &params, mesh)?;
    let mut levels = Table::new("dirac_levels", &["lambda", "measure"]);
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for &l in &cfg.lambdas {
        let m = v0.level_set_measure(l, &gamma);
        levels.push(format!("lambda={l}"), vec![l, m], None);
        if m > 0.0 {
            lx.push(l.ln());
            ly.push(m.ln());
        }
    }
    let mut law = Table::new("power_law", &["fitted_exponent", "endpoint", "r_squared"]);
    if lx.len() >= 2 {
        let fit = fit_line(&lx, &ly)?;
        let err = rel_diff(-fit.slope, endpoint);
        law.push("dirac", vec![-fit.slope, endpoint, fit.r_squared], Some(err < cfg.power_law_tol));
    } else {
        law.push("dirac", vec![f64::NAN, endpoint, f64::NAN], Some(false));
    }

    // Per-shell constants of m_λ ≤ C (Γ_μ(s)/λ)^q at the endpoint.
    let mut shells = Table::new("shell_constants", &["radius", "gamma_at_shell", "constant"]);
    for &frac in &cfg.shell_radii {
        let s = frac * cfg.radius;
        let g = potential(&RadialMeasure::shell(s, 1.0), &params, mesh)?;
        let top = g.sup_abs();
        let gs = params.gamma(s)?;
        let c = (1..=16)
            .map(|j| top * 10f64.powf(-(j as f64) / 4.0))
            .map(|l| g.level_set_measure(l, &gamma) * (l / gs).powf(endpoint))
            .fold(0.0, f64::max);
        shells.push(format!("shell-{frac}"), vec![s, gs, c], Some(c.is_finite()));
    }

    let green = GreenMode0::new(params, cfg.radius)?;
    let (k16, k31) = (kernel_bound_max(&green, 16), kernel_bound_max(&green, 31));
    let change = rel_diff(k16, k31);
    let mut kernel = Table::new("kernel_bound", &["max_ratio_16", "max_ratio_31", "change"]);
    kernel.push(
        "shell-averaged",
        vec![k16, k31, change],
        Some(k31.is_finite() && change < cfg.stability_tol),
    );

    Ok(SuiteReport::from_tables(
        SuiteName::Marcinkiewicz,
        vec![ratios, spread, law, levels, shells, kernel],
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn default_marcinkiewicz_passes() {
        let rep = suite_marcinkiewicz(&SuiteConfig::default()).unwrap();
        assert!(rep.pass, "{:#?}", rep.tables);
        let dirac = rep.table("ratios").unwrap().rows.iter().find(|r| r.label == "dirac").unwrap();
        assert!(dirac.values[2] >= 2.0 * PI.sqrt() * (1.0 - 1e-3));
    }

    #[test]
    fn rejects_nonpositive_mu() {
        let cfg = SuiteConfig {
            mu: -0.1,
            ..SuiteConfig::default()
        };
        match suite_marcinkiewicz(&cfg) {
            Err(HardyError::Hypothesis(m)) => assert!(m.contains("much weaker type of Marcinkiewicz estimate")),
            other => panic!("{other:?}"),
        }
    }
}
