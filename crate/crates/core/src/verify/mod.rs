//! Named experiment suites. Each one checks a single estimate numerically and
//! returns its full diagnostic tables together with a pass flag; every pass
//! decision is backed by a row whose `pass` column is set.
//!
//! Estimates whose constants are not known explicitly are checked as
//! boundedness and mesh-stability claims, never against a value.

mod cauchy;
mod critical;
mod duality;
mod identity;
mod linfty;
mod marcinkiewicz;

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::grid::{build_mesh, RadialFunction, RadialMesh, RadialWeight};
use crate::params::HardyParams;
use crate::quadrature::weighted_integral;

pub use cauchy::suite_epsilon_cauchy;
pub use critical::suite_critical_exponent;
pub use duality::suite_measure_duality;
pub use identity::suite_fundamental_identity;
pub use linfty::suite_dual_linfty;
pub use marcinkiewicz::suite_marcinkiewicz;

fn dyadic(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|j| 2f64.powi(-j)).collect()
}

/// Inputs and thresholds shared by all suites. Missing keys take the
/// defaults below; `None` means "derived from the parameters".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub dim: usize,
    pub mu: f64,
    pub radius: f64,
    pub cells: usize,
    pub grading: f64,
    pub seed: u64,

    /// Relative defect allowed in the fundamental identity.
    pub identity_tol: f64,

    /// Regularisation ladder, largest first.
    pub epsilons: Vec<f64>,
    /// Multiplies the flux datum; 0 gives the degenerate run.
    pub cauchy_scale: f64,
    /// Relative tolerance on the fitted Cauchy rate.
    pub cauchy_tol: f64,

    pub linfty_samples: usize,
    /// Meshes compared for stability, coarse to fine.
    pub linfty_cells: Vec<usize>,
    /// Lebesgue exponent of the data (default `2N`).
    pub linfty_r: Option<f64>,
    /// Exponent for the weighted variant (default `N + τ₊ + 1`).
    pub linfty_r_weighted: Option<f64>,
    pub linfty_tol: f64,

    /// Exponents scanned by the critical-exponent estimator.
    pub q_grid: Vec<f64>,
    /// Truncation radii, largest first.
    pub deltas: Vec<f64>,
    pub critical_tol: f64,

    /// Shell radii as fractions of the ball radius.
    pub shell_radii: Vec<f64>,
    /// Sobolev exponents for the duality sweep.
    pub duality_p: Vec<f64>,
    /// Relative defect allowed in the duality pairing.
    pub duality_tol: f64,

    /// Marcinkiewicz exponent (default: the endpoint `(N+τ₊)/(N-2+τ₊)`).
    pub marcinkiewicz_q: Option<f64>,
    /// Largest allowed max/min ratio across the source family.
    pub marcinkiewicz_spread: f64,
    /// Allowed relative change of a ratio under 2× refinement.
    pub stability_tol: f64,
    /// Levels for the distribution-function power law.
    pub lambdas: Vec<f64>,
    /// Relative tolerance on the fitted power-law exponent.
    pub power_law_tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            mu: 2.0,
            radius: 1.0,
            cells: 1024,
            grading: 3.0,
            seed: 20_240_917,
            identity_tol: 1e-3,
            epsilons: dyadic(3, 8),
            cauchy_scale: 1.0,
            cauchy_tol: 0.2,
            linfty_samples: 50,
            linfty_cells: vec![512, 1024],
            linfty_r: None,
            linfty_r_weighted: None,
            linfty_tol: 0.1,
            q_grid: (0..14).map(|i| 1.1 + 0.05 * i as f64).collect(),
            deltas: dyadic(4, 10),
            critical_tol: 0.05,
            shell_radii: (1..10).map(|i| 0.1 * i as f64).collect(),
            duality_p: vec![1.1, 1.2],
            duality_tol: 1e-3,
            marcinkiewicz_q: None,
            marcinkiewicz_spread: 10.0,
            stability_tol: 0.1,
            lambdas: (2..13).map(|i| 10f64.powf(0.5 * i as f64)).collect(),
            power_law_tol: 0.1,
        }
    }
}

fn strictly_monotone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0]) || v.windows(2).all(|w| w[1] < w[0])
}

impl SuiteConfig {
    pub fn params(&self) -> Result<HardyParams> {
        HardyParams::new(self.dim, self.mu)
    }

    /// Checks grids and tolerances; parameter validation happens per suite.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HardyError::invalid(m.to_string()));
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("radius must be > 0");
        }
        if self.cells < 16 || !(self.grading >= 1.0) {
            return bad("cells must be >= 16 and grading >= 1");
        }
        let grids: [(&str, &[f64]); 7] = [
            ("epsilons", &self.epsilons),
            ("q_grid", &self.q_grid),
            ("deltas", &self.deltas),
            ("shell_radii", &self.shell_radii),
            ("duality_p", &self.duality_p),
            ("lambdas", &self.lambdas),
            ("linfty_cells", &self.linfty_cells.iter().map(|&c| c as f64).collect::<Vec<_>>()),
        ];
        for (name, g) in grids {
            if g.is_empty() || !strictly_monotone(g) || g.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(HardyError::invalid(format!(
                    "{name} must be a non-empty, strictly sorted list of positive numbers"
                )));
            }
        }
        if self.shell_radii.iter().any(|&s| s >= 1.0) {
            return bad("shell_radii are fractions of the radius and must lie in (0, 1)");
        }
        let tols = [
            ("identity_tol", self.identity_tol),
            ("cauchy_tol", self.cauchy_tol),
            ("linfty_tol", self.linfty_tol),
            ("critical_tol", self.critical_tol),
            ("duality_tol", self.duality_tol),
            ("marcinkiewicz_spread", self.marcinkiewicz_spread),
            ("stability_tol", self.stability_tol),
            ("power_law_tol", self.power_law_tol),
        ];
        for (name, t) in tols {
            if !(t > 0.0 && t.is_finite()) {
                return Err(HardyError::invalid(format!("{name} must be positive (got {t})")));
            }
        }
        if self.linfty_samples == 0 {
            return bad("linfty_samples must be >= 1");
        }
        if !self.cauchy_scale.is_finite() {
            return bad("cauchy_scale must be finite");
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<Arc<RadialMesh>> {
        build_mesh(0.0, self.radius, self.cells, self.grading)
    }

    pub(crate) fn mesh_with(&self, cells: usize) -> Result<Arc<RadialMesh>> {
        build_mesh(0.0, self.radius, cells, self.grading)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    FundamentalIdentity,
    EpsilonCauchy,
    DualLinfty,
    CriticalExponent,
    MeasureDuality,
    Marcinkiewicz,
}

impl SuiteName {
    pub const ALL: [SuiteName; 6] = [
        SuiteName::FundamentalIdentity,
        SuiteName::EpsilonCauchy,
        SuiteName::DualLinfty,
        SuiteName::CriticalExponent,
        SuiteName::MeasureDuality,
        SuiteName::Marcinkiewicz,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::FundamentalIdentity => "fundamental-identity",
            SuiteName::EpsilonCauchy => "epsilon-cauchy",
            SuiteName::DualLinfty => "dual-linfty",
            SuiteName::CriticalExponent => "critical-exponent",
            SuiteName::MeasureDuality => "measure-duality",
            SuiteName::Marcinkiewicz => "marcinkiewicz",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = HardyError;

    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = SuiteName::ALL.iter().map(|n| n.as_str()).collect();
                HardyError::invalid(format!("unknown suite '{s}' (known: {})", known.join(", ")))
            })
    }
}

pub fn run_suite(name: SuiteName, cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    match name {
        SuiteName::FundamentalIdentity => suite_fundamental_identity(cfg),
        SuiteName::EpsilonCauchy => suite_epsilon_cauchy(cfg),
        SuiteName::DualLinfty => suite_dual_linfty(cfg),
        SuiteName::CriticalExponent => suite_critical_exponent(cfg),
        SuiteName::MeasureDuality => suite_measure_duality(cfg),
        SuiteName::Marcinkiewicz => suite_marcinkiewicz(cfg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub label: String,
    pub values: Vec<f64>,
    /// `None` for purely informative rows.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, values: Vec<f64>, pass: Option<bool>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(Row {
            label: label.into(),
            values,
            pass,
        });
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    /// Header row, then one line per row; numbers in round-trip `{:.16e}`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push_str(",pass\n");
        for r in &self.rows {
            out.push_str(&csv_field(&r.label));
            for v in &r.values {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push_str(match r.pass {
                Some(true) => ",true\n",
                Some(false) => ",false\n",
                None => ",\n",
            });
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: SuiteName,
    pub pass: bool,
    pub tables: Vec<Table>,
    /// Free-form remarks carried into the output footer.
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn from_tables(name: SuiteName, tables: Vec<Table>, notes: Vec<String>) -> Self {
        Self {
            name,
            pass: tables.iter().all(Table::pass),
            tables,
            notes,
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `(|S^{N-1}| ∫_0^R |g|^p r^a dr)^{1/p}` for a smooth closed-form `g`.
pub(crate) fn closed_norm(g: impl Fn(f64) -> f64, p: f64, a: f64, area: f64, radius: f64) -> f64 {
    let panels = 64;
    let mut s = 0.0;
    for k in 0..panels {
        let lo = radius * k as f64 / panels as f64;
        let hi = radius * (k + 1) as f64 / panels as f64;
        s += weighted_integral(lo, hi, a, |r| g(r).abs().powf(p));
    }
    (area * s).powf(1.0 / p)
}

/// `∫ u·g dw` for a mesh function `u` and closed-form `g`.
pub(crate) fn pair(u: &RadialFunction, g: impl Fn(f64) -> f64, w: &RadialWeight) -> f64 {
    let x = u.mesh().nodes();
    let a = w.exponent();
    let e = u.exponent();
    let mut s = 0.0;
    for j in 0..x.len() - 1 {
        s += if x[j] == 0.0 {
            weighted_integral(0.0, x[j + 1], a + e, |r| u.regular(r).unwrap_or(f64::NAN) * g(r))
        } else {
            weighted_integral(x[j], x[j + 1], a, |r| u.eval(r).unwrap_or(f64::NAN) * g(r))
        };
    }
    w.area() * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = SuiteConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.epsilons.len(), 6);
        assert!((cfg.q_grid.last().unwrap() - 1.75).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_bad_grids() {
        let cfg = SuiteConfig {
            q_grid: vec![],
            ..SuiteConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SuiteConfig {
            deltas: vec![0.1, 0.2, 0.15],
            ..SuiteConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SuiteConfig {
            cauchy_tol: 0.0,
            ..SuiteConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn suite_names_round_trip() {
        for n in SuiteName::ALL {
            assert_eq!(n.as_str().parse::<SuiteName>().unwrap(), n);
        }
        assert!("nope".parse::<SuiteName>().is_err());
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push("one", vec![1.0, 0.1], Some(true));
        t.push("two, quoted", vec![-2.5, 1e-300], None);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "label,a,b,pass");
        assert_eq!(lines[1], "one,1.0000000000000000e0,1.0000000000000001e-1,true");
        assert!(lines[2].starts_with("\"two, quoted\",-2.5"));
        assert!(lines[2].ends_with(','));
        let v: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(v, 0.1);
    }

    #[test]
    fn closed_norm_and_pair() {
        let p = HardyParams::new(3, 0.0).unwrap();
        let area = p.sphere_area();
        let v = closed_norm(|_| 1.0, 2.0, 2.0, area, 1.0);
        assert!(rel_diff(v, (area / 3.0).sqrt()) < 1e-13);
        let mesh = build_mesh(0.0, 1.0, 64, 2.0).unwrap();
        let u = RadialFunction::split_from_fn(mesh, -1.0, |_| 1.0).unwrap();
        let w = RadialWeight::lebesgue(&p);
        assert!(rel_diff(pair(&u, |r| r, &w), area / 3.0) < 1e-12);
    }
}
