use crate::error::Result;
use crate::operator::{weak_identity_integral, AnnularBump, ClosedProfile, CutoffBump, PolynomialBump, TestFunction};
use crate::params::Cutoff;

use super::{SuiteConfig, SuiteName, SuiteReport, Table};

/// `∫ Φ_μ L*_μ ξ dγ_μ = c_μ ξ(0)` for bumps at the origin, an off-centre
/// annular bump and a bump touching the boundary. The last two vanish at
/// the origin, so their integrals must vanish as well.
pub fn suite_fundamental_identity(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let params = cfg.params()?;
    let mesh = cfg.mesh()?;
    let radius = cfg.radius;
    let c = params.c_mu();
    let phi = ClosedProfile {
        f: move |r: f64| params.phi(r).unwrap_or(f64::NAN),
        exponent: params.tau_minus(),
    };
    let battery: Vec<(&str, Box<dyn TestFunction>)> = vec![
        ("polynomial-bump", Box::new(PolynomialBump::new(radius))),
        ("cutoff-plateau", Box::new(CutoffBump::new(Cutoff::for_ball(radius)?))),
        ("annulus-interior", Box::new(AnnularBump::new(0.3 * radius, 0.7 * radius)?)),
        ("annulus-boundary", Box::new(AnnularBump::new(0.5 * radius, radius)?)),
    ];
    let mut table = Table::new(
        "identity",
        &["xi_at_origin", "integral", "reference", "defect", "defect_over_c_mu"],
    );
    for (label, xi) in &battery {
        let xi0 = xi.value(0.0);
        let integral = weak_identity_integral(&params, &mesh, &phi, xi.as_ref())?;
        let reference = c * xi0;
        let err = (integral - reference).abs();
        let defect = err / (c * xi0.abs()).max(1.0);
        table.push(
            *label,
            vec![xi0, integral, reference, defect, err / c],
            Some(defect < cfg.identity_tol),
        );
    }
    Ok(SuiteReport::from_tables(SuiteName::FundamentalIdentity, vec![table], Vec::new()))
}
