use rayon::prelude::*;

use crate::error::{HardyError, Result};
use crate::grid::{RadialFunction, RadialWeight};
use crate::norms::{classify_truncated, critical_exponent_estimate, w1p_norm_truncated, DivergenceCriteria};
use crate::operator::solve_dirac;

use super::{rel_diff, SuiteConfig, SuiteName, SuiteReport, Table};

struct Case {
    name: &'static str,
    prediction: f64,
    weight: RadialWeight,
    /// Extra power multiplied onto the Dirac solution.
    power: f64,
}

/// Integrability thresholds of the Dirac solution `v₀`: `v₀Γ_μ` in
/// unweighted `W^{1,q}` up to `N/(N-1)`, and `v₀` in `W^{1,q}(dγ_μ)` up to
/// `p*_μ`. Both the solver output and the closed form are analysed.
pub fn suite_critical_exponent(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let params = cfg.params()?;
    if params.is_critical() {
        return Err(HardyError::Hypothesis("critical exponents need mu > mu0".into()));
    }
    let n = params.n();
    let cases = [
        Case {
            name: "unweighted",
            prediction: n / (n - 1.0),
            weight: RadialWeight::lebesgue(&params),
            power: params.tau_plus(),
        },
        Case {
            name: "weighted",
            prediction: params.p_star(),
            weight: RadialWeight::gamma_weighted(&params),
            power: 0.0,
        },
    ];
    let (qmin, qmax) = (
        cfg.q_grid.iter().cloned().fold(f64::INFINITY, f64::min),
        cfg.q_grid.iter().cloned().fold(0.0, f64::max),
    );
    for c in &cases {
        if !(qmin < c.prediction && c.prediction < qmax) {
            return Err(HardyError::invalid(format!(
                "q_grid [{qmin}, {qmax}] does not straddle the {} threshold {}",
                c.name, c.prediction
            )));
        }
    }
    let mesh = cfg.mesh()?;
    let solver = solve_dirac(&params, &mesh, 1.0)?.u;
    let gap = params.tau_plus() - params.tau_minus();
    let r_fac = cfg.radius.powf(-gap);
    let oracle = RadialFunction::split_from_fn(mesh.clone(), params.tau_minus(), |r| 1.0 - r_fac * r.powf(gap))?;

    let mut estimates = Table::new("estimates", &["prediction", "estimate", "relative_error"]);
    let mut slopes = Table::new("increment_slopes", &["q", "slope"]);
    let mut classes = Table::new("truncated_norms", &["q", "log_slope", "r_squared", "divergent"]);
    let mut found = Vec::new();
    for (src, v0) in [("solver", &solver), ("oracle", &oracle)] {
        for c in &cases {
            let u = v0.mul_power(c.power);
            let est = critical_exponent_estimate(&u.differentiate(), &c.weight, &cfg.q_grid, &cfg.deltas)?;
            let err = rel_diff(est.critical_q, c.prediction);
            estimates.push(
                format!("{src}-{}", c.name),
                vec![c.prediction, est.critical_q, err],
                Some(err < cfg.critical_tol),
            );
            for (q, s) in est.q_grid.iter().zip(&est.slopes) {
                slopes.push(format!("{src}-{}", c.name), vec![*q, *s], None);
            }
            if src == "solver" {
                found.push(est.critical_q);
                let rows = cfg
                    .q_grid
                    .par_iter()
                    .map(|&q| {
                        let vals = cfg
                            .deltas
                            .iter()
                            .map(|&d| w1p_norm_truncated(&u, q, &c.weight, d))
                            .collect::<Result<Vec<_>>>()?;
                        Ok((q, classify_truncated(&cfg.deltas, &vals, DivergenceCriteria::default())?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for (q, fit) in rows {
                    classes.push(
                        c.name,
                        vec![q, fit.fit.slope, fit.fit.r_squared, if fit.divergent { 1.0 } else { 0.0 }],
                        None,
                    );
                }
            }
        }
    }
    let binding = cases[0].prediction.min(cases[1].prediction);
    let est = found[0].min(found[1]);
    let err = rel_diff(est, binding);
    estimates.push("solver-binding", vec![binding, est, err], Some(err < cfg.critical_tol));
    Ok(SuiteReport::from_tables(
        SuiteName::CriticalExponent,
        vec![estimates, slopes, classes],
        Vec::new(),
    ))
}
