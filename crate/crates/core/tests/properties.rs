use hardy_core::green::{angular_riesz_average, potential, RadialMeasure};
use hardy_core::norms::{lp_norm_truncated, marcinkiewicz_norm, stampacchia_k0, LevelData};
use hardy_core::{build_mesh, solve_dual, DirichletProblem, Flux, HardyParams, OperatorKind, RadialFunction, RadialWeight, Source};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = HardyParams> {
    (3usize..8, 0.0f64..1.0, -0.5f64..8.0).prop_map(|(n, t, extra)| {
        let mu0 = -((n as f64 - 2.0).powi(2)) / 4.0;
        // Anywhere above the Hardy threshold, biased towards it.
        let mu = if extra < 0.0 { mu0 * (1.0 - t) } else { mu0 + t * t * (extra - mu0) };
        HardyParams::new(n, mu).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exponent_roots(p in params()) {
        let (tp, tm) = (p.tau_plus(), p.tau_minus());
        let n = p.n();
        prop_assert!((tp + tm + n - 2.0).abs() < 1e-12);
        prop_assert!((tp * tm + p.mu()).abs() < 1e-10 * (1.0 + p.mu().abs()));
        prop_assert!(tp >= tm);
        prop_assert!(p.p_star() > 1.0);
    }

    #[test]
    fn marcinkiewicz_is_homogeneous(lambda in 0.01f64..100.0, e in -1.5f64..-0.2) {
        let p = HardyParams::new(3, 0.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 128, 2.0).unwrap();
        let u = RadialFunction::split_from_fn(mesh, e, |r| 1.0 + r).unwrap();
        let w = RadialWeight::lebesgue(&p);
        let a = marcinkiewicz_norm(&u, 1.5, &w).unwrap().value;
        let b = marcinkiewicz_norm(&u.scale(lambda), 1.5, &w).unwrap().value;
        prop_assert!((b - lambda * a).abs() <= 1e-8 * lambda * a);
    }

    #[test]
    fn potentials_superpose(s1 in 0.05f64..0.95, s2 in 0.05f64..0.95, a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let p = HardyParams::new(3, 2.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 64, 1.0).unwrap();
        let joint = RadialMeasure { shells: vec![(s1, a), (s2, b)], ..RadialMeasure::default() };
        let u = potential(&joint, &p, &mesh).unwrap();
        let u1 = potential(&RadialMeasure::shell(s1, a), &p, &mesh).unwrap();
        let u2 = potential(&RadialMeasure::shell(s2, b), &p, &mesh).unwrap();
        for i in 0..=64 {
            let sum = u1.node_value(i) + u2.node_value(i);
            prop_assert!((u.node_value(i) - sum).abs() <= 1e-12 * (1.0 + sum.abs()));
        }
    }

    #[test]
    fn dual_solver_is_linear(c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, k in -4.0f64..4.0) {
        let p = HardyParams::new(4, 1.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 64, 1.5).unwrap();
        let solve = |f: Source| {
            let pr = DirichletProblem::new(p, mesh.clone(), OperatorKind::Dual, f, Flux::Zero).unwrap();
            solve_dual(&pr).unwrap().u
        };
        let u = solve(Source::polynomial(&[c0, c1]));
        let v = solve(Source::polynomial(&[k * c0, k * c1]));
        for i in 0..=64 {
            prop_assert!((v.node_value(i) - k * u.node_value(i)).abs() <= 1e-10 * (1.0 + u.node_value(i).abs()));
        }
    }

    #[test]
    fn truncated_norms_grow_as_cutoff_shrinks(q in 1.0f64..3.0, d in 1e-4f64..0.5) {
        let p = HardyParams::new(3, 2.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 128, 3.0).unwrap();
        let u = RadialFunction::split_from_fn(mesh, -2.0, |r| 1.0 - r * r * r).unwrap();
        let w = RadialWeight::gamma_weighted(&p);
        let big = lp_norm_truncated(&u, q, &w, d).unwrap();
        let small = lp_norm_truncated(&u, q, &w, 0.5 * d).unwrap();
        prop_assert!(small >= big);
    }

    #[test]
    fn level_measure_is_nonincreasing(t in 0.0f64..50.0, dt in 0.0f64..50.0) {
        let p = HardyParams::new(3, 2.0).unwrap();
        let mesh = build_mesh(0.0, 1.0, 128, 3.0).unwrap();
        let u = RadialFunction::split_from_fn(mesh, -2.0, |r| 1.0 - r * r * r).unwrap();
        let w = RadialWeight::gamma_weighted(&p);
        prop_assert!(u.level_set_measure(t + dt, &w) <= u.level_set_measure(t, &w) * (1.0 + 1e-12));
    }

    #[test]
    fn riesz_average_is_symmetric(r in 0.01f64..1.0, s in 0.01f64..1.0, a in 0.0f64..2.5) {
        prop_assume!((r - s).abs() > 1e-3);
        let x = angular_riesz_average(3, r, s, a);
        let y = angular_riesz_average(3, s, r, a);
        prop_assert!((x - y).abs() <= 1e-10 * x);
    }

    #[test]
    fn stampacchia_bound_holds(steps in prop::collection::vec((0.01f64..1.0, 0.2f64..1.0), 2..40), alpha in 1.05f64..4.0) {
        let mut ts = vec![0.0];
        let mut ms = vec![1.0];
        for (dt, f) in &steps {
            ts.push(ts.last().unwrap() + dt);
            ms.push(ms.last().unwrap() * f);
        }
        *ms.last_mut().unwrap() = 0.0;
        let data = LevelData::new(ts, ms).unwrap();
        let rep = stampacchia_k0(&data, alpha, None).unwrap();
        prop_assert!(rep.hypothesis_holds);
        prop_assert!(rep.k0_data <= rep.bound * (1.0 + 1e-12));
    }
}

#[test]
fn newtonian_shell_theorem() {
    for &(r, s) in &[(0.3, 0.7), (0.9, 0.2), (0.5, 0.51)] {
        let v = angular_riesz_average(3, r, s, 1.0);
        assert!((v - 1.0 / f64::max(r, s)).abs() < 1e-10, "{r} {s} {v}");
    }
    assert_eq!(angular_riesz_average(3, 0.4, 0.0, 1.5), 0.4f64.powf(-1.5));
    assert!(angular_riesz_average(3, 0.4, 0.4, 2.0).is_infinite());
}
