use rayon::prelude::*;

use crate::error::{HardyError, Result};
use crate::grid::RadialFunction;
use crate::norms::fit_line;
use crate::operator::{solve_dual, DirichletProblem, Flux, OperatorKind, Source};
use crate::quadrature::power_integral;

use super::{SuiteConfig, SuiteName, SuiteReport, Table};

/// `‖∇(u - v)‖_{L²}` for piecewise linear functions on one mesh.
pub(crate) fn gradient_l2_distance(u: &RadialFunction, v: &RadialFunction, dim: usize, area: f64) -> f64 {
    let x = u.mesh().nodes();
    let (a, b) = (u.samples(), v.samples());
    let mut s = 0.0;
    for j in 0..x.len() - 1 {
        let slope = ((a[j + 1] - b[j + 1]) - (a[j] - b[j])) / (x[j + 1] - x[j]);
        s += slope * slope * power_integral(x[j], x[j + 1], dim as f64 - 1.0);
    }
    (area * s).sqrt()
}

/// Rate at which the regularised dual solutions `u_ε` form a Cauchy family.
///
/// The datum is the flux `F = x/|x|²` (so `f + div F = (N-2)/|x|²`), scaled by
/// `cauchy_scale`; its gradient-energy differences `‖∇(u_ε - u_{ε/2})‖₂`
/// saturate the `ε^{(N-2)/2}` rate. Smooth data converge faster.
pub fn suite_epsilon_cauchy(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let params = cfg.params()?;
    params.require_dual_solvable()?;
    if cfg.epsilons.len() < 4 {
        return Err(HardyError::invalid(format!(
            "epsilon ladder needs at least 4 rungs (got {})",
            cfg.epsilons.len()
        )));
    }
    if cfg.epsilons.iter().any(|&e| e >= cfg.radius) {
        return Err(HardyError::invalid("every epsilon must be smaller than the radius"));
    }
    let mesh = cfg.mesh()?;
    let flux = if cfg.cauchy_scale == 0.0 {
        Flux::Zero
    } else {
        Flux::Powers(vec![(cfg.cauchy_scale, -1.0)])
    };
    let mut eps: Vec<f64> = cfg.epsilons.iter().flat_map(|&e| [e, 0.5 * e]).collect();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let solutions = eps
        .par_iter()
        .map(|&e| {
            let pr = DirichletProblem::new(
                params,
                mesh.clone(),
                OperatorKind::DualRegularized { epsilon: e },
                Source::Zero,
                flux.clone(),
            )?;
            Ok((e, solve_dual(&pr)?.u))
        })
        .collect::<Result<Vec<_>>>()?;
    let find = |e: f64| {
        solutions
            .iter()
            .find(|(x, _)| *x == e)
            .map(|(_, u)| u)
            .expect("every rung and its half were solved")
    };

    let target = 0.5 * (params.n() - 2.0);
    let mut table = Table::new("differences", &["epsilon", "gradient_difference"]);
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &e in &cfg.epsilons {
        let d = gradient_l2_distance(find(e), find(0.5 * e), params.dim(), params.sphere_area());
        table.push(format!("eps={e}"), vec![e, d], None);
        if d > 0.0 {
            lx.push(e.ln());
            ly.push(d.ln());
        }
    }
    let mut notes = Vec::new();
    let mut fit = Table::new("fit", &["slope", "target", "r_squared"]);
    if ly.is_empty() {
        notes.push("degenerate-pass: zero data give identical solutions on every rung".into());
        fit.push("degenerate", vec![0.0, target, 1.0], Some(true));
    } else {
        let line = fit_line(&lx, &ly)?;
        let ok = (line.slope - target).abs() <= cfg.cauchy_tol * target && ly.len() == cfg.epsilons.len();
        fit.push("log-log", vec![line.slope, target, line.r_squared], Some(ok));
    }
    Ok(SuiteReport::from_tables(SuiteName::EpsilonCauchy, vec![table, fit], notes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_rate_in_three_and_four_dimensions() {
        for (dim, mu) in [(3, 2.0), (4, 1.0)] {
            let cfg = SuiteConfig {
                dim,
                mu,
                ..SuiteConfig::default()
            };
            let rep = suite_epsilon_cauchy(&cfg).unwrap();
            assert!(rep.pass, "{:#?}", rep.tables[1]);
        }
    }

    #[test]
    fn degenerate_and_short_ladders() {
        let cfg = SuiteConfig {
            cauchy_scale: 0.0,
            ..SuiteConfig::default()
        };
        let rep = suite_epsilon_cauchy(&cfg).unwrap();
        assert!(rep.pass);
        assert!(rep.notes[0].starts_with("degenerate-pass"));
        assert!(rep.tables[0].rows.iter().all(|r| r.values[1] == 0.0));
        let cfg = SuiteConfig {
            epsilons: vec![0.1, 0.05, 0.025],
            ..SuiteConfig::default()
        };
        assert!(suite_epsilon_cauchy(&cfg).is_err());
    }
}
