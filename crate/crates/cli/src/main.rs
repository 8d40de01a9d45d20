//! `hardy`: closed-form constants, radial solves and verification suites
//! for the operator `-Δ + μ/|x|²`.

mod config;
mod error;
mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use hardy_core::verify::{run_suite, SuiteName, SuiteReport};
use hardy_core::{
    build_mesh, solve, solve_dirac, DirichletProblem, Flux, HardyParams, OperatorKind, RadialWeight, Source,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{config_hash, solve_config, suite_config, Overrides, SolveConfig};
use crate::error::CliError;
use crate::output::{ensure_dir, resolve_out_dir, write_atomic, write_json, RunManifest, SuiteEntry};

#[derive(Parser)]
#[command(name = "hardy", version, about = "Radial Leray-Hardy solvers and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exponents and constants for one (N, mu).
    Exponents {
        #[arg(long)]
        dim: usize,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
    },
    /// Solve one radial problem and write its profile.
    Solve {
        kind: SolveKind,
        /// TOML problem file (dim and mu are required).
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites ("all" or suite names).
    Verify {
        #[arg(required = true)]
        suites: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: logical cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SolveKind {
    Dual,
    DualRegularized,
    Direct,
    Dirac,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Exponents { dim, mu } => cmd_exponents(dim, mu),
        Command::Solve {
            kind,
            config,
            overrides,
            out,
        } => cmd_solve(kind, &config, &overrides, out.as_deref()),
        Command::Verify {
            suites,
            config,
            overrides,
            seed,
            jobs,
            out,
        } => cmd_verify(&suites, config.as_deref(), &overrides, seed, jobs, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_exponents(dim: usize, mu: f64) -> Result<(), CliError> {
    let p = HardyParams::new(dim, mu)?;
    let rows: [(&str, String); 10] = [
        ("dim", dim.to_string()),
        ("mu", mu.to_string()),
        ("mu0", p.mu0().to_string()),
        ("dual_threshold", p.dual_threshold().to_string()),
        ("tau_plus", p.tau_plus().to_string()),
        ("tau_minus", p.tau_minus().to_string()),
        ("c_mu", p.c_mu().to_string()),
        ("p_star", p.p_star().to_string()),
        ("gradient_threshold", p.gradient_threshold().to_string()),
        ("dual_solvable", p.dual_solvable().to_string()),
    ];
    let mut s = String::new();
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<20}{v}");
    }
    print!("{s}");
    Ok(())
}

#[derive(Serialize)]
struct SolveNorms {
    sup: f64,
    l1: f64,
    l2: f64,
    l1_gamma: f64,
}

#[derive(Serialize)]
struct SolveSidecar<'a> {
    version: &'static str,
    config_hash: String,
    config: &'a SolveConfig,
    kind: SolveKind,
    residual_linf: f64,
    weak_identity_defect: f64,
    norms: SolveNorms,
    profile: String,
}

fn cmd_solve(kind: SolveKind, path: &Path, o: &Overrides, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = solve_config(path, o)?;
    let params = HardyParams::new(cfg.dim, cfg.mu)?;
    let mesh = build_mesh(0.0, cfg.radius, cfg.cells, cfg.grading)?;
    let result = match kind {
        SolveKind::Dirac => solve_dirac(&params, &mesh, cfg.strength)?,
        _ => {
            let op = match kind {
                SolveKind::Dual => OperatorKind::Dual,
                SolveKind::Direct => OperatorKind::Direct,
                _ => OperatorKind::DualRegularized {
                    epsilon: cfg
                        .epsilon
                        .ok_or_else(|| CliError::Usage("dual-regularized needs `epsilon` in the config".into()))?,
                },
            };
            let flux = if cfg.flux.is_empty() {
                Flux::Zero
            } else {
                Flux::Powers(cfg.flux.iter().enumerate().map(|(k, &c)| (c, k as f64)).collect())
            };
            let problem = DirichletProblem::new(params, mesh.clone(), op, Source::polynomial(&cfg.f), flux)?;
            solve(&problem)?
        }
    };
    let u = &result.u;
    let du = u.differentiate().node_values();
    let mut csv = String::from("r,u,du_dr,residual\n");
    for (i, (&r, v)) in mesh.nodes().iter().zip(u.node_values()).enumerate() {
        let _ = writeln!(csv, "{r:.16e},{v:.16e},{:.16e},{:.16e}", du[i], result.node_residual[i]);
    }
    let dir = resolve_out_dir(out);
    ensure_dir(&dir)?;
    let stem = format!("solve-{}", kind.to_possible_value().expect("no skipped variants").get_name());
    let profile = format!("{stem}.csv");
    write_atomic(&dir.join(&profile), csv.as_bytes())?;
    let leb = RadialWeight::lebesgue(&params);
    let sidecar = SolveSidecar {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(&cfg),
        config: &cfg,
        kind,
        residual_linf: result.residual_linf,
        weak_identity_defect: result.weak_identity_defect,
        norms: SolveNorms {
            sup: u.sup_abs(),
            l1: u.integrate_abs_pow(1.0, &leb),
            l2: u.integrate_abs_pow(2.0, &leb).sqrt(),
            l1_gamma: u.integrate_abs_pow(1.0, &RadialWeight::gamma_weighted(&params)),
        },
        profile: profile.clone(),
    };
    write_json(&dir.join(format!("{stem}.json")), &sidecar)?;
    println!(
        "wrote {} (residual {:.3e}, weak defect {:.3e})",
        dir.join(&profile).display(),
        result.residual_linf,
        result.weak_identity_defect
    );
    Ok(())
}

fn parse_suites(names: &[String]) -> Result<Vec<SuiteName>, CliError> {
    if names.iter().any(|n| n == "all") {
        return Ok(SuiteName::ALL.to_vec());
    }
    let mut out = Vec::new();
    for n in names {
        let s: SuiteName = n.parse().map_err(|e: hardy_core::HardyError| CliError::Usage(e.to_string()))?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

fn cmd_verify(
    names: &[String],
    config: Option<&Path>,
    o: &Overrides,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let suites = parse_suites(names)?;
    let cfg = suite_config(config, o, seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", jobs.unwrap_or(0))))?;
    let start = Instant::now();
    let results: Vec<(SuiteReport, u64)> = pool.install(|| {
        suites
            .par_iter()
            .map(|&name| {
                let t = Instant::now();
                run_suite(name, &cfg).map(|r| (r, t.elapsed().as_millis() as u64))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let dir = resolve_out_dir(out);
    ensure_dir(&dir)?;
    let mut entries = Vec::new();
    for (report, ms) in &results {
        let mut files = Vec::new();
        for table in &report.tables {
            let file = format!("{}-{}.csv", report.name, table.name);
            write_atomic(&dir.join(&file), table.to_csv().as_bytes())?;
            files.push(file);
        }
        println!("{} {} ({ms} ms)", if report.pass { "PASS" } else { "FAIL" }, report.name);
        entries.push(SuiteEntry {
            name: report.name.to_string(),
            pass: report.pass,
            wall_ms: *ms,
            files,
            notes: report.notes.clone(),
        });
    }
    let failed: Vec<String> = entries.iter().filter(|e| !e.pass).map(|e| e.name.clone()).collect();
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash(&cfg),
        config: &cfg,
        pass: failed.is_empty(),
        suites: entries,
        wall_ms: start.elapsed().as_millis() as u64,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::SuiteFailure(failed))
    }
}
