use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{HardyError, Result};
use crate::green::{measure_norm, potential, RadialMeasure};
use crate::grid::{RadialFunction, RadialMesh, RadialWeight};
use crate::norms::w1p_norm;
use crate::operator::{solve_dual, DirichletProblem, Flux, OperatorKind, Source};
use crate::params::HardyParams;

use super::{pair, rel_diff, SuiteConfig, SuiteName, SuiteReport, Table};

pub(crate) fn measure_family(cfg: &SuiteConfig, mesh: &Arc<RadialMesh>) -> Result<Vec<(String, RadialMeasure)>> {
    let mut out: Vec<(String, RadialMeasure)> = cfg
        .shell_radii
        .iter()
        .map(|&s| (format!("shell-{s}"), RadialMeasure::shell(s * cfg.radius, 1.0)))
        .collect();
    out.push((
        "density-1".into(),
        RadialMeasure::density(RadialFunction::from_fn(mesh.clone(), |_| 1.0)?),
    ));
    Ok(out)
}

/// `∫ ξ Γ_μ dν` with the atom counted as `c_μ k ξ(0)`.
fn measure_pairing(nu: &RadialMeasure, xi: &RadialFunction, params: &HardyParams) -> Result<f64> {
    let mut s = params.c_mu() * nu.dirac_strength * xi.node_value(0);
    for &(r, m) in &nu.shells {
        s += m * params.gamma(r)? * xi.eval(r)?;
    }
    if let Some(rho) = &nu.density {
        s += pair(xi, |r| rho.eval(r).unwrap_or(f64::NAN), &RadialWeight::gamma_weighted(params));
    }
    Ok(s)
}

/// Sobolev norms of potentials against the measure norm of their data,
/// and the duality pairing `∫ 𝔾[ν] f dγ_μ = ∫ ξ Γ_μ dν` with `L*_μ ξ = f`.
pub fn suite_measure_duality(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let params = cfg.params()?;
    params.require_dual_solvable()?;
    let n = params.n();
    let p_max = params.p_star().min(n / (n - 1.0));
    if let Some(&p) = cfg.duality_p.iter().find(|&&p| !(p >= 1.0 && p < p_max)) {
        return Err(HardyError::Hypothesis(format!(
            "Sobolev exponent {p} is inadmissible: need 1 <= p < {p_max}"
        )));
    }
    let mesh = cfg.mesh()?;
    let mut family = measure_family(cfg, &mesh)?;
    family.push(("dirac".into(), RadialMeasure::dirac(1.0)));
    let mut joint = RadialMeasure::shell(0.5 * cfg.radius, 1.0);
    joint.dirac_strength = 1.0;
    joint.density = Some(RadialFunction::from_fn(mesh.clone(), |_| 1.0)?);
    family.push(("joint".into(), joint));
    let scaled = family[0].1.scaled(3.0);
    family.push((format!("{}-x3", family[0].0), scaled));

    let lebesgue = RadialWeight::lebesgue(&params);
    let gamma = RadialWeight::gamma_weighted(&params);
    let tp = params.tau_plus();
    let potentials = family
        .par_iter()
        .map(|(_, nu)| potential(nu, &params, &mesh))
        .collect::<Result<Vec<_>>>()?;

    let mut norms = Table::new("sobolev_ratios", &["p", "measure_norm", "unweighted_ratio", "weighted_ratio"]);
    let mut ratio_of = Vec::new();
    for ((label, nu), u) in family.iter().zip(&potentials) {
        let m = measure_norm(nu, &params).total();
        let ug = u.mul_power(tp);
        for &p in &cfg.duality_p {
            let a = w1p_norm(&ug, p, &lebesgue)? / m;
            let b = w1p_norm(u, p, &gamma)? / m;
            ratio_of.push((label.clone(), p, a, b));
            norms.push(label.clone(), vec![p, m, a, b], Some(a.is_finite() && b.is_finite() && a > 0.0));
        }
    }
    // Linearity: the rescaled first measure must reproduce its ratios.
    let base = &family[0].0;
    let mut scaling = Table::new("scaling", &["p", "ratio", "scaled_ratio", "relative_change"]);
    for &p in &cfg.duality_p {
        let find = |l: &str| ratio_of.iter().find(|r| r.0 == l && r.1 == p).map(|r| r.2);
        if let (Some(a), Some(b)) = (find(base), find(&format!("{base}-x3"))) {
            let d = rel_diff(b, a);
            scaling.push(base.clone(), vec![p, a, b, d], Some(d < 1e-9));
        }
    }

    let tests: [(&str, Source); 3] = [
        ("f=1", Source::constant(1.0)),
        ("f=1+r^2", Source::polynomial(&[1.0, 0.0, 1.0])),
        ("f=cos", {
            let w = std::f64::consts::PI / cfg.radius;
            Source::function(move |r| (w * r).cos(), Vec::new())
        }),
    ];
    let duals = tests
        .par_iter()
        .map(|(_, f)| {
            let pr = DirichletProblem::new(params, mesh.clone(), OperatorKind::Dual, f.clone(), Flux::Zero)?;
            Ok(solve_dual(&pr)?.u)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairing = Table::new("pairing", &["potential_side", "measure_side", "defect", "duality_bound"]);
    for ((label, nu), u) in family.iter().zip(&potentials) {
        let mn = measure_norm(nu, &params);
        for ((fname, f), xi) in tests.iter().zip(&duals) {
            let lhs = pair(u, |r| f.eval(r), &gamma);
            let rhs = measure_pairing(nu, xi, &params)?;
            let defect = rel_diff(lhs, rhs);
            let bound = (mn.weighted + params.c_mu() * mn.atom) * xi.sup_abs();
            pairing.push(
                format!("{label}/{fname}"),
                vec![lhs, rhs, defect, bound],
                Some(defect < cfg.duality_tol && lhs.abs() <= bound * (1.0 + 1e-9)),
            );
        }
    }
    let notes = vec![
        "the Dirac part and the part away from the origin are tested separately and jointly; \
         the bound uses the norm of the full decomposition"
            .to_string(),
    ];
    Ok(SuiteReport::from_tables(
        SuiteName::MeasureDuality,
        vec![norms, scaling, pairing],
        notes,
    ))
}
