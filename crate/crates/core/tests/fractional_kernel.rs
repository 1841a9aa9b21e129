mod common;

use approx::assert_relative_eq;
use common::*;
use fracwave::fractional_kernel::*;
use fracwave::Error;
use proptest::prelude::*;
use statrs::function::gamma::{gamma, gamma_li};
use std::f64::consts::PI;

fn params(a: f64, e: f64) -> FractionalParams {
    FractionalParams::new(a, e).unwrap()
}

#[test]
fn params_reject_out_of_range() {
    assert!(FractionalParams::new(0.0, 1.0).is_err());
    assert!(FractionalParams::new(1.0, 1.0).is_err());
    assert!(FractionalParams::new(0.5, -0.1).is_err());
    assert!(FractionalParams::new(0.5, 0.0).is_ok());
}

#[test]
fn gamma_const_values() {
    assert_relative_eq!(gamma_const(0.5).unwrap(), 1.0 / PI, max_relative = 1e-15);
    assert_relative_eq!(gamma_const(0.25).unwrap(), 0.2250790790, max_relative = 1e-9);
    assert_relative_eq!(gamma_const(0.3).unwrap(), gamma_const(0.7).unwrap(), max_relative = 1e-15);
}

#[test]
fn p_weight_values() {
    assert_eq!(p_weight(1.0, 0.3), 1.0);
    assert_eq!(p_weight(7.0, 0.5), 1.0);
    assert_relative_eq!(p_weight(4.0, 0.75), 2f64.sqrt(), max_relative = 1e-15);
}

#[test]
fn direct_integral_of_constant_no_weight() {
    let v = SampledSignal::from_fn(0.01, 300, |_| 1.0).unwrap();
    for &beta in &[0.2, 0.5, 0.8] {
        let out = fractional_integral_direct(&v, &params(0.5, 0.0), beta).unwrap();
        for (t, o) in out.times().iter().zip(out.values()) {
            let exact = t.powf(beta) / gamma(1.0 + beta);
            assert!((o - exact).abs() < 1e-12, "beta {beta} t {t}");
        }
    }
}

#[test]
fn direct_integral_of_constant_weighted() {
    let v = SampledSignal::from_fn(0.02, 200, |_| 1.0).unwrap();
    for &(beta, eta) in &[(0.5, 1.0), (0.3, 0.5), (0.7, 2.0)] {
        let out = fractional_integral_direct(&v, &params(0.5, eta), beta).unwrap();
        for (t, o) in out.times().iter().zip(out.values()).skip(1) {
            let exact = gamma_li(beta, eta * t) / (gamma(beta) * eta.powf(beta));
            assert!((o - exact).abs() < 1e-10, "beta {beta} eta {eta} t {t}: {o} vs {exact}");
        }
    }
}

#[test]
fn direct_rejects_bad_order() {
    let v = SampledSignal::from_fn(0.1, 10, |_| 1.0).unwrap();
    assert!(fractional_integral_direct(&v, &params(0.5, 1.0), 1.0).is_err());
    assert!(fractional_integral_direct(&v, &params(0.5, 1.0), 0.0).is_err());
}

#[test]
fn direct_of_zero_is_zero() {
    let v = SampledSignal::from_fn(0.1, 50, |_| 0.0).unwrap();
    let out = fractional_integral_direct(&v, &params(0.4, 1.0), 0.6).unwrap();
    assert!(out.values().iter().all(|&x| x == 0.0));
}

#[test]
fn caputo_of_linear_and_quadratic() {
    let a = 0.5;
    let v = SampledSignal::from_fn(0.005, 400, |t| t).unwrap();
    let out = caputo_apply_direct(&v, &params(a, 0.0)).unwrap();
    for (t, o) in out.times().iter().zip(out.values()) {
        assert!((o - t.powf(1.0 - a) / gamma(2.0 - a)).abs() < 1e-11);
    }
    let v = SampledSignal::from_fn(0.005, 400, |t| t * t).unwrap();
    let out = caputo_apply_direct(&v, &params(a, 0.0)).unwrap();
    for (t, o) in out.times().iter().zip(out.values()) {
        // v' = 2t is exact for central differences; the second-order ends are exact too.
        assert!((o - 2.0 * t.powf(1.5) / gamma(2.5)).abs() < 1e-10, "t {t}");
    }
}

#[test]
fn caputo_of_constant_and_short_input() {
    let v = SampledSignal::from_fn(0.1, 20, |_| 3.0).unwrap();
    let out = caputo_apply_direct(&v, &params(0.3, 1.0)).unwrap();
    assert!(out.values().iter().all(|x| x.abs() < 1e-14));
    let one = SampledSignal::new(0.1, vec![1.0]).unwrap();
    assert!(matches!(caputo_apply_direct(&one, &params(0.3, 1.0)), Err(Error::TooFewSamples { .. })));
}

#[test]
fn closed_forms_match_quadrature_grid() {
    for &a in &[0.25, 0.5, 0.75] {
        for &eta in &[0.5, 1.0, 2.0] {
            for &w in &[0.5, -0.5, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0] {
                let p = params(a, eta);
                let i = closed_integral_resolvent(&p, w).unwrap();
                let io = resolvent_oracle(a, eta, w);
                assert!((i - io).norm() / io.norm() < 1e-10, "I a={a} eta={eta} w={w}");
                let j = closed_integral_squared(&p, w).unwrap();
                assert!(rel(j, squared_oracle(a, eta, w)) < 1e-10, "J a={a} eta={eta} w={w}");
            }
        }
    }
}

#[test]
fn uncorrected_forms_show_the_known_defects() {
    let p = params(0.25, 1.0);
    // residue branch is right for omega > 0, conjugated for omega < 0
    let good = uncorrected::resolvent_integral(&p, 1.0).unwrap();
    assert!((good - resolvent_oracle(0.25, 1.0, 1.0)).norm() < 1e-10);
    let bad = uncorrected::resolvent_integral(&p, -1.0).unwrap();
    assert!((bad - resolvent_oracle(0.25, 1.0, 1.0)).norm() < 1e-10);
    // half-order branch is off by a factor -i
    let h = params(0.5, 1.0);
    let u = uncorrected::resolvent_integral(&h, 2.0).unwrap();
    let o = resolvent_oracle(0.5, 1.0, 2.0);
    assert!((u * num_complex::Complex64::new(0.0, 1.0) - o).norm() / o.norm() < 1e-10);
    // squared residue branch is off by 2/pi
    let j = uncorrected::squared_integral(&p, 3.0).unwrap();
    assert_relative_eq!(j * PI / 2.0, squared_oracle(0.25, 1.0, 3.0), max_relative = 1e-10);
}

#[test]
fn closed_forms_reject_bad_inputs() {
    assert!(matches!(closed_integral_resolvent(&params(0.5, 0.0), 1.0), Err(Error::EtaZero)));
    assert!(closed_integral_resolvent(&params(0.5, 1.0), 0.0).is_err());
    assert!(closed_integral_squared(&params(0.5, 0.0), 1.0).is_err());
}

#[test]
fn resolvent_integral_decays_like_power() {
    let p = params(0.3, 1.0);
    let ws = [1e2, 1e3, 1e4];
    let mags: Vec<f64> = ws.iter().map(|&w| resolvent_oracle(0.3, 1.0, w).norm()).collect();
    let slope = (mags[2] / mags[0]).ln() / (ws[2] / ws[0]).ln();
    assert!((slope - (0.3 - 1.0)).abs() < 1e-3);
    let closed: Vec<f64> = ws.iter().map(|&w| closed_integral_resolvent(&p, w).unwrap().norm()).collect();
    for (c, m) in closed.iter().zip(&mags) {
        assert_relative_eq!(*c, *m, max_relative = 1e-9);
    }
}

#[test]
fn kv_coefficients_values() {
    let p = params(0.5, 1.0);
    let (c1, c2) = kv_coefficients(&p, 0.0).unwrap();
    assert_relative_eq!(c2, gamma_const(0.5).unwrap() * PI, max_relative = 1e-11);
    assert!(c1 > 0.0);
    for &(a, eta, w) in &[(0.3, 0.5, 2.0), (0.5, 1.0, 1.0), (0.8, 2.0, 30.0)] {
        let p = params(a, eta);
        let (c1, c2) = kv_coefficients(&p, w).unwrap();
        let g = gamma_const(a).unwrap();
        assert_relative_eq!(c1, 2.0 * g * closed_integral_squared(&p, w).unwrap(), max_relative = 1e-14);
        // c2 = 2 gamma Re int rho^(2a-1)/(rho^2 + eta + i w), independent of the adaptive rule
        let c2_oracle = 2.0 * g * resolvent_oracle(a, eta, w).re;
        assert_relative_eq!(c2, c2_oracle, max_relative = 1e-10);
    }
    // omega = 0 limit of c1
    let (c1_0, _) = kv_coefficients(&params(0.4, 1.5), 0.0).unwrap();
    let g = gamma_const(0.4).unwrap();
    assert_relative_eq!(c1_0, 2.0 * g * squared_oracle(0.4, 1.5, 0.0), max_relative = 1e-10);
}

#[test]
fn quadrature_certificate_and_refinement() {
    let p = params(0.5, 1.0);
    let q = build_quadrature(&p, 128, 1e4, QuadratureStrategy::TailClosed).unwrap();
    assert!(q.certificate.error <= 1e-8);
    assert!(q.nodes.windows(2).all(|w| w[0] < w[1]));
    assert!(q.nodes[0] > 0.0 && q.weights.iter().all(|&w| w > 0.0));
    assert_eq!(q.nodes.len(), 128);
    let v = q.integrate_even(|x| 1.0 / (x * x + 2.0));
    assert_relative_eq!(v, PI / 2f64.sqrt(), max_relative = 1e-8);

    let coarse = build_quadrature(&p, 64, 1e3, QuadratureStrategy::TailClosed).unwrap();
    let fine = build_quadrature(&p, 128, 2e3, QuadratureStrategy::TailClosed).unwrap();
    assert!(fine.certificate.error < coarse.certificate.error);

    assert!(matches!(
        build_quadrature(&p, 128, 10.0, QuadratureStrategy::TailClosed),
        Err(Error::Certificate { .. })
    ));
    // without the tail node, the cut at 1e4 alone costs about 1/xi_max
    assert!(matches!(
        build_quadrature(&p, 128, 1e4, QuadratureStrategy::Truncated),
        Err(Error::Certificate { .. })
    ));
    assert!(build_quadrature(&p, 3, 1e4, QuadratureStrategy::TailClosed).is_err());
    assert!(build_quadrature(&p, 64, 1.0, QuadratureStrategy::TailClosed).is_err());
}

#[test]
fn quadrature_builds_across_alpha() {
    for &a in &[0.05, 0.25, 0.5, 0.75, 0.9] {
        for &eta in &[0.0, 0.5, 2.0] {
            let q = build_quadrature(&params(a, eta), 128, 1e4, QuadratureStrategy::TailClosed).unwrap();
            assert!(q.certificate.error < 1e-10, "a {a} eta {eta}: {}", q.certificate.error);
        }
    }
}

#[test]
fn diffusive_matches_direct_constant_input() {
    let p = params(0.5, 1.0);
    let q = build_quadrature(&p, 128, 1e4, QuadratureStrategy::TailClosed).unwrap();
    let u = SampledSignal::from_fn(2.0 / 400.0, 400, |_| 1.0).unwrap();
    let d = diffusive_apply(&u, &q).unwrap();
    let o = fractional_integral_direct(&u, &p, 0.5).unwrap();
    let err = d.values().iter().zip(o.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3 * o.max_abs(), "err {err}");
}

#[test]
fn diffusive_matches_direct_sine() {
    let p = params(0.3, 0.5);
    let q = build_quadrature(&p, 128, 1e4, QuadratureStrategy::TailClosed).unwrap();
    let u = SampledSignal::from_fn(0.01, 1000, f64::sin).unwrap();
    let d = diffusive_apply(&u, &q).unwrap();
    let o = fractional_integral_direct(&u, &p, 0.7).unwrap();
    let err = d.values().iter().zip(o.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3 * o.max_abs(), "err {err}");
}

#[test]
fn diffusive_zero_input() {
    let p = params(0.6, 1.0);
    let q = build_quadrature(&p, 64, 1e4, QuadratureStrategy::TailClosed).unwrap();
    let u = SampledSignal::from_fn(0.1, 30, |_| 0.0).unwrap();
    assert!(diffusive_apply(&u, &q).unwrap().values().iter().all(|&x| x == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resolvent_conjugate_symmetry(a in 0.05f64..0.95, eta in 0.05f64..5.0, w in 0.01f64..500.0) {
        let p = params(a, eta);
        let plus = closed_integral_resolvent(&p, w).unwrap();
        let minus = closed_integral_resolvent(&p, -w).unwrap();
        prop_assert!((plus - minus.conj()).norm() <= 1e-14 * plus.norm());
    }

    #[test]
    fn squared_positive_and_decreasing(a in 0.05f64..0.95, eta in 0.05f64..5.0, w in 0.01f64..100.0) {
        let p = params(a, eta);
        let j1 = closed_integral_squared(&p, w).unwrap();
        let j2 = closed_integral_squared(&p, w * 1.5).unwrap();
        prop_assert!(j1 > 0.0 && j2 > 0.0 && j2 < j1);
    }

    #[test]
    fn closed_resolvent_matches_oracle(a in 0.05f64..0.95, eta in 0.1f64..3.0, w in 0.1f64..200.0) {
        let i = closed_integral_resolvent(&params(a, eta), w).unwrap();
        let o = resolvent_oracle(a, eta, w);
        prop_assert!((i - o).norm() <= 1e-9 * o.norm());
    }

    #[test]
    fn node_states_bounded(a in 0.1f64..0.9, eta in 0.0f64..2.0, amp in 0.1f64..5.0) {
        // the output is real and bounded by gamma * sum c_j p_j^2 ||U|| / (xi^2 + eta)
        let p = params(a, eta.max(1e-3));
        let q = build_quadrature(&p, 96, 1e4, QuadratureStrategy::TailClosed).unwrap();
        let u = SampledSignal::from_fn(0.05, 100, |t| amp * (3.0 * t).cos()).unwrap();
        let out = diffusive_apply(&u, &q).unwrap();
        let bound: f64 = gamma_const(a).unwrap() * q.integrate_even(|x| {
            let pp = p_weight(x, a);
            pp * pp / (x * x + p.eta())
        }) * amp;
        prop_assert!(out.values().iter().all(|o| o.is_finite() && o.abs() <= bound * (1.0 + 1e-12)));
    }

    #[test]
    fn quadrature_invariants(a in 0.05f64..0.95, n in 16usize..200) {
        let q = build_quadrature(&params(a, 1.0), n, 1e4, QuadratureStrategy::TailClosed);
        if let Ok(q) = q {
            prop_assert_eq!(q.nodes.len(), n);
            prop_assert!(q.nodes.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(q.weights.iter().all(|&w| w > 0.0));
        }
    }
}
