//! Gauss-Legendre rules and exact moments of power weights.
//!
//! Radial integrals carry weights `r^a` with `a` possibly negative. Those are
//! never sampled at nodes: cells touching the origin are integrated either by
//! closed-form moments or after the substitution `r = h·y^{1/(a+1)}`, which
//! turns `r^a dr` into a constant multiple of `dy`.

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// 8-point Gauss-Legendre on `[a, b]`.
pub fn gl8(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..4 {
        let d = h * GL8_NODES[k];
        s += GL8_WEIGHTS[k] * (f(c - d) + f(c + d));
    }
    s * h
}

/// `∫_lo^hi r^p dr` for `lo > 0`, free of cancellation when `hi ≈ lo`.
pub fn power_integral(lo: f64, hi: f64, p: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo == 0.0 {
        return if p > -1.0 {
            hi.powf(p + 1.0) / (p + 1.0)
        } else {
            f64::INFINITY
        };
    }
    let l = (hi / lo).ln();
    let q = p + 1.0;
    if q == 0.0 {
        l
    } else {
        lo.powf(q) * (q * l).exp_m1() / q
    }
}

/// `[∫ r^a dr, ∫ r^a t dr, ∫ r^a t² dr]` over `[lo, hi]` with
/// `t = (r - lo)/(hi - lo)`.
///
/// Entries are `+∞` when the moment diverges at `r = 0`.
pub fn power_moments(lo: f64, hi: f64, a: f64) -> [f64; 3] {
    let h = hi - lo;
    if h <= 0.0 {
        return [0.0; 3];
    }
    if lo == 0.0 {
        let hp = h.powf(a + 1.0);
        let m = |k: f64| {
            if a + k + 1.0 > 0.0 {
                hp / (a + k + 1.0)
            } else {
                f64::INFINITY
            }
        };
        return [m(0.0), m(1.0), m(2.0)];
    }
    if lo > 4.0 * h {
        // Far from the origin r^a is smooth on the cell; the polynomial
        // expansion below would cancel badly here.
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = gl8(lo, hi, |r| {
                let t = (r - lo) / h;
                r.powf(a) * t.powi(k as i32)
            });
        }
        return out;
    }
    let m0 = power_integral(lo, hi, a);
    let m1 = power_integral(lo, hi, a + 1.0);
    let m2 = power_integral(lo, hi, a + 2.0);
    [
        m0,
        (m1 - lo * m0) / h,
        (m2 - 2.0 * lo * m1 + lo * lo * m0) / (h * h),
    ]
}

/// `∫_lo^hi r^a·(c0 + c1 t) dr` for a linear profile given by its end values.
pub fn linear_moment(lo: f64, hi: f64, a: f64, v_lo: f64, v_hi: f64) -> f64 {
    let [m0, m1, _] = power_moments(lo, hi, a);
    let mut s = 0.0;
    if v_lo != 0.0 {
        s += v_lo * (m0 - m1);
    }
    if v_hi != 0.0 {
        s += v_hi * m1;
    }
    s
}

/// `∫_lo^hi r^a g(r) dr` for smooth `g`.
///
/// Cells starting at the origin use the substitution `r = hi·y^{1/(a+1)}`;
/// the others are split into geometric panels with ratio at most 1.5 so that
/// `r^a` never varies too much across one Gauss rule.
pub fn weighted_integral(lo: f64, hi: f64, a: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo == 0.0 {
        if a <= -1.0 {
            return f64::INFINITY;
        }
        let q = a + 1.0;
        let inv = 1.0 / q;
        let body = gl8(0.0, 1.0, |y| g(hi * y.powf(inv)));
        return hi.powf(q) / q * body;
    }
    let mut s = 0.0;
    let mut x = lo;
    while x < hi {
        let next = (1.5 * x).min(hi);
        s += gl8(x, next, |r| r.powf(a) * g(r));
        x = next;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gl8_is_exact_for_degree_15() {
        let v = gl8(0.0, 2.0, |x| x.powi(15));
        assert!(rel(v, 2f64.powi(16) / 16.0) < 1e-14);
    }

    #[test]
    fn moments_from_origin() {
        let [m0, m1, m2] = power_moments(0.0, 0.5, 2.0);
        assert!(rel(m0, 0.125 / 3.0) < 1e-15);
        assert!(rel(m1, 0.125 / 4.0) < 1e-15);
        assert!(rel(m2, 0.125 / 5.0) < 1e-15);
        assert!(power_moments(0.0, 0.5, -1.5)[0].is_infinite());
        assert!(power_moments(0.0, 0.5, -1.5)[1].is_finite());
    }

    #[test]
    fn moments_agree_across_branches() {
        // lo = 4h sits on the branch boundary; compare both formulas around it.
        for &a in &[-1.7, -1.0, -0.3, 0.0, 2.5] {
            for &(lo, hi) in &[(0.3, 0.4), (0.39, 0.49), (0.41, 0.51), (1e-3, 2e-3)] {
                let gl = {
                    let h: f64 = hi - lo;
                    let mut s = [0.0; 3];
                    let n = 64;
                    for j in 0..n {
                        let x0 = lo + h * j as f64 / n as f64;
                        let x1 = lo + h * (j + 1) as f64 / n as f64;
                        for (k, o) in s.iter_mut().enumerate() {
                            *o += gl8(x0, x1, |r| r.powf(a) * ((r - lo) / h).powi(k as i32));
                        }
                    }
                    s
                };
                let m = power_moments(lo, hi, a);
                for k in 0..3 {
                    assert!(rel(m[k], gl[k]) < 1e-12, "a={a} lo={lo} k={k}");
                }
            }
        }
    }

    #[test]
    fn power_integral_log_case() {
        assert!(rel(power_integral(1.0, std::f64::consts::E, -1.0), 1.0) < 1e-15);
        let hi = 1.0 + 1e-12;
        assert!(rel(power_integral(1.0, hi, 3.0), hi - 1.0) < 1e-9);
    }

    #[test]
    fn weighted_integral_origin_substitution() {
        // ∫_0^1 r^{-0.5}(1 + r) dr = 2 + 2/3
        let v = weighted_integral(0.0, 1.0, -0.5, |r| 1.0 + r);
        assert!(rel(v, 2.0 + 2.0 / 3.0) < 1e-6);
        let v = weighted_integral(1e-3, 1.0, -1.9, |_| 1.0);
        let exact = power_integral(1e-3, 1.0, -1.9);
        assert!(rel(v, exact) < 1e-12, "{}", rel(v, exact));
        assert!(weighted_integral(0.0, 1.0, -1.0, |_| 1.0).is_infinite());
    }
}
