use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hardy_core::grid::{build_mesh, RadialWeight};
use hardy_core::norms::marcinkiewicz_norm;
use hardy_core::operator::{solve_dirac, solve_dual, DirichletProblem, Flux, OperatorKind, Source};
use hardy_core::tridiag::Tridiagonal;
use hardy_core::HardyParams;

fn tridiagonal(c: &mut Criterion) {
    let n = 4096;
    let mut a = Tridiagonal::zeros(n);
    a.diag.iter_mut().for_each(|d| *d = 2.0);
    a.lower.iter_mut().for_each(|d| *d = -1.0);
    a.upper.iter_mut().for_each(|d| *d = -1.0);
    let b = vec![1.0; n];
    c.bench_function("tridiagonal_solve_4096", |bch| bch.iter(|| a.solve(black_box(&b)).unwrap()));
}

fn solvers(c: &mut Criterion) {
    let p = HardyParams::new(3, 2.0).unwrap();
    let mesh = build_mesh(0.0, 1.0, 1024, 1.0).unwrap();
    let pr = DirichletProblem::new(p, mesh, OperatorKind::Dual, Source::constant(10.0), Flux::Zero).unwrap();
    c.bench_function("dual_solve_1024", |b| b.iter(|| solve_dual(black_box(&pr)).unwrap()));

    let graded = build_mesh(0.0, 1.0, 1024, 3.0).unwrap();
    c.bench_function("dirac_solve_1024", |b| b.iter(|| solve_dirac(&p, black_box(&graded), 1.0).unwrap()));

    let v0 = solve_dirac(&p, &graded, 1.0).unwrap().u;
    let w = RadialWeight::gamma_weighted(&p);
    c.bench_function("marcinkiewicz_norm_1024", |b| {
        b.iter(|| marcinkiewicz_norm(black_box(&v0), 2.0, &w).unwrap())
    });
}

criterion_group!(benches, tridiagonal, solvers);
criterion_main!(benches);
