#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh quadrature of int_0^1 f, robust to endpoint singularities.
pub fn tanh_sinh(f: impl Fn(f64) -> Complex64, rel_tol: f64) -> Complex64 {
    let level = |h: f64| {
        let mut acc = Complex64::new(0.0, 0.0);
        let k = (6.0 / h).ceil() as i64;
        for i in -k..=k {
            let t = i as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let x = 1.0 / (1.0 + (-2.0 * u).exp());
            let e = (-2.0 * u.abs()).exp();
            let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
            let dx = 0.5 * FRAC_PI_2 * t.cosh() * sech2;
            if x <= 0.0 || x >= 1.0 || dx == 0.0 {
                continue;
            }
            let v = f(x) * dx;
            if v.re.is_finite() && v.im.is_finite() {
                acc += v;
            }
        }
        acc * h
    };
    let mut h = 0.25;
    let mut prev = level(h);
    for _ in 0..8 {
        h /= 2.0;
        let cur = level(h);
        if (cur - prev).norm() <= rel_tol * cur.norm() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// int_0^inf rho^(2a-1) g(rho) for g = O(rho^-2). [1, inf) is folded by rho = 1/t, with
/// `g_fold(t) = g(1/t)/t^2` supplied in closed form, and the power singularities are
/// removed by s = rho^(2a), s = t^(2-2a).
pub fn half_line_power(
    alpha: f64,
    g: impl Fn(f64) -> Complex64,
    g_fold: impl Fn(f64) -> Complex64,
) -> Complex64 {
    let lo = tanh_sinh(|s| g(s.powf(0.5 / alpha)), 1e-15) / (2.0 * alpha);
    let hi = tanh_sinh(|s| g_fold(s.powf(1.0 / (2.0 - 2.0 * alpha))), 1e-15)
        / (2.0 - 2.0 * alpha);
    lo + hi
}

pub fn resolvent_oracle(alpha: f64, eta: f64, omega: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    half_line_power(
        alpha,
        |r| one / Complex64::new(r * r + eta, omega),
        |t| one / Complex64::new(1.0 + eta * t * t, omega * t * t),
    )
}

pub fn squared_oracle(alpha: f64, eta: f64, omega: f64) -> f64 {
    half_line_power(
        alpha,
        |r| {
            let q = r * r + eta;
            Complex64::new(1.0 / (q * q + omega * omega), 0.0)
        },
        |t| {
            let t2 = t * t;
            let q = 1.0 + eta * t2;
            Complex64::new(t2 / (q * q + omega * omega * t2 * t2), 0.0)
        },
    )
    .re
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Test-family input signals on [0, T].
pub fn signal_family() -> Vec<(&'static str, fn(f64) -> f64)> {
    vec![
        ("one", |_t| 1.0),
        ("t", |t| t),
        ("sin", |t: f64| t.sin()),
        ("pulse", |t: f64| (-(t - 3.0).powi(2) * 2.0).exp()),
    ]
}
