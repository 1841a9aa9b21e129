//! Exponentially weighted fractional operators, their diffusive approximation,
//! and closed forms for the resolvent integrals of the kernel.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre, integrate_adaptive};
use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Relative tolerance of the self-consistency certificate stored with each rule.
pub const CERTIFICATE_TOL: f64 = 1e-8;
pub const DEFAULT_N_NODES: usize = 128;
pub const DEFAULT_XI_MAX: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalParams {
    alpha: f64,
    eta: f64,
}

impl FractionalParams {
    pub fn new(alpha: f64, eta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::Domain(format!("eta must be finite and >= 0, got {eta}")));
        }
        Ok(Self { alpha, eta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn require_positive_eta(&self) -> Result<()> {
        if self.eta > 0.0 {
            Ok(())
        } else {
            Err(Error::EtaZero)
        }
    }
}

/// gamma = 2 sin(alpha pi) Gamma(3/2) / pi^(3/2), which reduces to sin(alpha pi)/pi.
pub fn gamma_const(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok((alpha * PI).sin() / PI)
}

/// p(xi) = |xi|^((2 alpha - 1)/2). Returns +inf at xi = 0 when alpha < 1/2.
pub fn p_weight(xi: f64, alpha: f64) -> f64 {
    let e = alpha - 0.5;
    if xi == 0.0 {
        return if e < 0.0 {
            f64::INFINITY
        } else if e == 0.0 {
            1.0
        } else {
            0.0
        };
    }
    xi.abs().powf(e)
}

/// Real samples on the uniform grid t_i = i dt, i = 0..len.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    dt: f64,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::GridMismatch(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { dt, values })
    }

    pub fn from_fn(dt: f64, steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(dt, (0..=steps).map(|i| f(i as f64 * dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| i as f64 * self.dt).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

const LAG_POINTS: usize = 12;

/// Weights (left, right) of the hat functions on lag interval [j dt, (j+1) dt]
/// against the kernel tau^(beta-1) e^(-eta tau), for j = 0..count.
fn lag_weights(beta: f64, eta: f64, dt: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    let (xj, wj) = gauss_jacobi(LAG_POINTS, 0.0, beta - 1.0)?;
    let (xl, wl) = gauss_legendre(LAG_POINTS)?;
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let lo = j as f64 * dt;
        let (mut a, mut b) = (0.0, 0.0);
        if j == 0 {
            let scale = (0.5 * dt).powf(beta);
            for (x, w) in xj.iter().zip(&wj) {
                let tau = 0.5 * dt * (1.0 + x);
                let k = w * scale * (-eta * tau).exp();
                a += k * tau / dt;
                b += k * (dt - tau) / dt;
            }
        } else {
            for (x, w) in xl.iter().zip(&wl) {
                let tau = lo + 0.5 * dt * (1.0 + x);
                let k = 0.5 * dt * w * tau.powf(beta - 1.0) * (-eta * tau).exp();
                a += k * (tau - lo) / dt;
                b += k * (lo + dt - tau) / dt;
            }
        }
        out.push((a, b));
    }
    Ok(out)
}

/// I^(order, eta) v by product integration of the exact kernel against the
/// piecewise-linear interpolant of v.
pub fn fractional_integral_direct(
    v: &SampledSignal,
    params: &FractionalParams,
    order: f64,
) -> Result<SampledSignal> {
    if !(order > 0.0 && order < 1.0) {
        return Err(Error::Domain(format!("order must lie in (0, 1), got {order}")));
    }
    let n = v.len();
    let vals = v.values();
    let w = lag_weights(order, params.eta(), v.dt(), n.saturating_sub(1))?;
    let g = gamma(order);
    let mut out = vec![0.0; n];
    for i in 1..n {
        let mut acc = 0.0;
        for (j, &(a, b)) in w.iter().enumerate().take(i) {
            acc += a * vals[i - j - 1] + b * vals[i - j];
        }
        out[i] = acc / g;
    }
    SampledSignal::new(v.dt(), out)
}

fn derivative(v: &SampledSignal) -> Result<SampledSignal> {
    let n = v.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let x = v.values();
    let dt = v.dt();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = (x[1] - x[0]) / dt;
        d[1] = d[0];
    } else {
        d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt);
        d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * dt);
        for i in 1..n - 1 {
            d[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
        }
    }
    SampledSignal::new(dt, d)
}

/// Caputo-type derivative: I^(1 - alpha, eta) applied to the discrete derivative of v.
pub fn caputo_apply_direct(v: &SampledSignal, params: &FractionalParams) -> Result<SampledSignal> {
    let d = derivative(v)?;
    fractional_integral_direct(&d, params, 1.0 - params.alpha())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureStrategy {
    /// Jacobi body, log-mapped panels, plus one Gauss–Jacobi node for the tail beyond xi_max.
    #[default]
    TailClosed,
    /// Jacobi body and panels only; the integral is cut at xi_max.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub error: f64,
    pub tol: f64,
}

/// Half-line rule: sum_j weights[j] f(nodes[j]) approximates int_0^inf f.
/// The factor for the full line is kept separate as `symmetry_factor`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusiveQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub symmetry_factor: f64,
    pub params: FractionalParams,
    pub certificate: Certificate,
    pub strategy: QuadratureStrategy,
    pub xi_max: f64,
}

impl DiffusiveQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    pub fn eta(&self) -> f64 {
        self.params.eta()
    }

    pub fn p(&self) -> Vec<f64> {
        self.nodes.iter().map(|&x| p_weight(x, self.alpha())).collect()
    }

    /// symmetry_factor * sum_j w_j f(xi_j), the full-line integral of an even f.
    pub fn integrate_even<T>(&self, f: impl Fn(f64) -> T) -> T
    where
        T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
    {
        let s: T = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum();
        s * self.symmetry_factor
    }

    /// int_0^inf p^2 / (xi^2 + eta + s) by the rule.
    pub fn resolvent_integral(&self, s: Complex64) -> Complex64 {
        let a = self.alpha();
        let eta = self.eta();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * x.powf(2.0 * a - 1.0) / (x * x + eta + s))
            .sum()
    }
}

fn rule_nodes(alpha: f64, n_nodes: usize, xi_max: f64, tail: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    const PANEL_POINTS: usize = 24;
    let r = if tail { n_nodes - 1 } else { n_nodes };
    let nb = (r / 8).max(3).min(r - 1);
    let rest = r - nb;
    let npan = (rest / PANEL_POINTS).max(1);
    let (xb, wb) = gauss_jacobi(nb, 0.0, 2.0 * alpha - 1.0)?;
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    let scale = 2f64.powf(-2.0 * alpha);
    for (x, w) in xb.iter().zip(&wb) {
        let xi = 0.5 * (1.0 + x);
        nodes.push(xi);
        weights.push(w * scale / xi.powf(2.0 * alpha - 1.0));
    }
    let len = xi_max.ln();
    for i in 0..npan {
        let per = rest / npan + usize::from(i < rest % npan);
        let (a, b) = (len * i as f64 / npan as f64, len * (i + 1) as f64 / npan as f64);
        let (x, w) = gauss_legendre(per)?;
        for (x, w) in x.iter().zip(&w) {
            let s = 0.5 * (a + b) + 0.5 * (b - a) * x;
            nodes.push(s.exp());
            weights.push(0.5 * (b - a) * w * s.exp());
        }
    }
    if tail {
        // One-node Gauss–Jacobi rule for int_X^inf rho^(2a-1) g(rho), g ~ rho^-2, in y = (X/rho)^2.
        let y1 = (1.0 - alpha) / (2.0 - alpha);
        let xt = xi_max / y1.sqrt();
        let wt = xi_max.powf(2.0 * alpha) / 2.0 / ((1.0 - alpha) * y1 * xt.powf(2.0 * alpha - 1.0));
        nodes.push(xt);
        weights.push(wt);
    }
    Ok((nodes, weights))
}

/// Builds the half-line rule and its certificate: relative error of the rule
/// on p^2/(xi^2 + eta + i) against the closed form.
pub fn build_quadrature(
    params: &FractionalParams,
    n_nodes: usize,
    xi_max: f64,
    strategy: QuadratureStrategy,
) -> Result<DiffusiveQuadrature> {
    build_quadrature_with_tol(params, n_nodes, xi_max, strategy, CERTIFICATE_TOL)
}

/// As `build_quadrature` with a caller-chosen certificate tolerance; an
/// infinite tolerance builds coarse rules for convergence studies.
pub fn build_quadrature_with_tol(
    params: &FractionalParams,
    n_nodes: usize,
    xi_max: f64,
    strategy: QuadratureStrategy,
    tol: f64,
) -> Result<DiffusiveQuadrature> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("certificate tolerance must be positive, got {tol}")));
    }
    if n_nodes < 4 {
        return Err(Error::Domain(format!("n_nodes must be >= 4, got {n_nodes}")));
    }
    if !(xi_max > 1.0 && xi_max.is_finite()) {
        return Err(Error::Domain(format!("xi_max must exceed 1, got {xi_max}")));
    }
    let tail = strategy == QuadratureStrategy::TailClosed;
    let (nodes, weights) = rule_nodes(params.alpha(), n_nodes, xi_max, tail)?;
    let mut quad = DiffusiveQuadrature {
        nodes,
        weights,
        symmetry_factor: 2.0,
        params: *params,
        certificate: Certificate { error: f64::NAN, tol },
        strategy,
        xi_max,
    };
    // Evaluated at eta + i, so the certificate is defined for eta = 0 as well.
    let exact = resolvent_integral_at(params.alpha(), Complex64::new(params.eta(), 1.0));
    let approx = quad.resolvent_integral(Complex64::new(0.0, 1.0));
    let error = (approx - exact).norm() / exact.norm();
    quad.certificate.error = error;
    if !(error <= tol) {
        return Err(Error::Certificate { error, tol });
    }
    Ok(quad)
}

fn expm1_ratio(x: f64) -> (f64, f64) {
    // (1 - e^-x)/x and (x - (1 - e^-x))/x^2
    if x < 1e-2 {
        let a1 = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0 + x.powi(4) / 120.0;
        let a2 = 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0 + x.powi(4) / 720.0;
        (a1, a2)
    } else {
        let e = -(-x).exp_m1();
        (e / x, (x - e) / (x * x))
    }
}

/// Output O = gamma * symmetry_factor * sum_j w_j p_j phi_j of the node ODEs
/// phi' + (xi^2 + eta) phi = p U, phi(0) = 0, stepped exactly for piecewise-linear U.
pub fn diffusive_apply(u: &SampledSignal, quad: &DiffusiveQuadrature) -> Result<SampledSignal> {
    if u.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let dt = u.dt();
    let g = gamma_const(quad.alpha())?;
    let p = quad.p();
    let mut coef = Vec::with_capacity(quad.len());
    for (&xi, &pj) in quad.nodes.iter().zip(&p) {
        let lam = xi * xi + quad.eta();
        let x = lam * dt;
        let (r1, r2) = expm1_ratio(x);
        coef.push(((-x).exp(), pj * dt * r1, pj * dt * r2));
    }
    let out_w: Vec<f64> = quad
        .weights
        .iter()
        .zip(&p)
        .map(|(w, pj)| g * quad.symmetry_factor * w * pj)
        .collect();
    let vals = u.values();
    let mut phi = vec![0.0; quad.len()];
    let mut out = vec![0.0; vals.len()];
    for i in 1..vals.len() {
        let u0 = vals[i - 1];
        let du = vals[i] - vals[i - 1];
        let mut acc = 0.0;
        for (j, &(decay, a1, a2)) in coef.iter().enumerate() {
            phi[j] = decay * phi[j] + a1 * u0 + a2 * du;
            acc += out_w[j] * phi[j];
        }
        out[i] = acc;
    }
    SampledSignal::new(dt, out)
}

/// Which closed-form expression is used for the resolvent integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormBranch {
    Residue,
    HalfOrder,
}

pub fn branch_for(alpha: f64) -> ClosedFormBranch {
    if alpha == 0.5 {
        ClosedFormBranch::HalfOrder
    } else {
        ClosedFormBranch::Residue
    }
}

fn theta(eta: f64, omega: f64) -> f64 {
    let m = eta.hypot(omega);
    (-((m - eta) / 2.0).sqrt() / m.sqrt()).clamp(-1.0, 1.0).acos()
}

fn phi_angle(eta: f64, omega: f64) -> f64 {
    let m = eta.hypot(omega);
    (((m - eta) / 2.0).sqrt() / m.sqrt()).clamp(-1.0, 1.0).acos()
}

/// int_0^inf rho^(2a-1)/(rho^2 + c) for Re c > 0 or Im c != 0, principal branch.
fn resolvent_integral_at(alpha: f64, c: Complex64) -> Complex64 {
    PI * c.powf(alpha - 1.0) / (2.0 * (alpha * PI).sin())
}

fn check_closed_inputs(params: &FractionalParams, omega: f64) -> Result<()> {
    params.require_positive_eta()?;
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Domain(format!("omega must be finite and nonzero, got {omega}")));
    }
    Ok(())
}

/// int_0^inf rho^(2 alpha - 1) / (rho^2 + eta + i omega) d rho via residues.
/// The residue expression holds for omega > 0; negative omega uses conjugation.
pub fn closed_integral_resolvent(params: &FractionalParams, omega: f64) -> Result<Complex64> {
    check_closed_inputs(params, omega)?;
    let a = params.alpha();
    let eta = params.eta();
    let w = omega.abs();
    let th = theta(eta, w);
    let m = eta.hypot(w);
    let val = match branch_for(a) {
        ClosedFormBranch::Residue => {
            // (1 + e^{-2i a pi}) / sin(2 a pi) = e^{-i a pi} / sin(a pi)
            -Complex64::from_polar(1.0, -a * PI + 2.0 * (a - 1.0) * th) * PI
                / (2.0 * m.powf(1.0 - a) * (a * PI).sin())
        }
        ClosedFormBranch::HalfOrder => {
            let z1 = Complex64::from_polar(m.sqrt(), th);
            Complex64::i() * PI / (2.0 * z1)
        }
    };
    Ok(if omega > 0.0 { val } else { val.conj() })
}

/// int_0^inf rho^(2 alpha - 1) / ((rho^2 + eta)^2 + omega^2) d rho.
pub fn closed_integral_squared(params: &FractionalParams, omega: f64) -> Result<f64> {
    check_closed_inputs(params, omega)?;
    let a = params.alpha();
    let eta = params.eta();
    let m = eta.hypot(omega);
    let ph = phi_angle(eta, omega);
    Ok(match branch_for(a) {
        ClosedFormBranch::Residue => {
            // (pi/2)[sin(2(a-1)(pi-phi)) - sin(2(a-1)phi)] / (sin(2 a pi) sin(2 phi) m^(2-a))
            PI / 2.0 * ((1.0 - a) * (PI - 2.0 * ph)).sin()
                / ((a * PI).sin() * (2.0 * ph).sin() * m.powf(2.0 - a))
        }
        ClosedFormBranch::HalfOrder => PI / (4.0 * ph.sin() * m.powf(1.5)),
    })
}

/// Closed forms with the original branch constants, kept for the branch report.
pub mod uncorrected {
    use super::*;

    pub fn resolvent_integral(params: &FractionalParams, omega: f64) -> Result<Complex64> {
        check_closed_inputs(params, omega)?;
        let a = params.alpha();
        let eta = params.eta();
        let m2 = eta * eta + omega * omega;
        let th = theta(eta, omega);
        Ok(match branch_for(a) {
            ClosedFormBranch::Residue => {
                -(Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, -2.0 * a * PI)) * PI
                    / (2.0 * m2.powf((1.0 - a) / 2.0) * (2.0 * a * PI).sin())
                    * Complex64::from_polar(1.0, 2.0 * (a - 1.0) * th)
            }
            ClosedFormBranch::HalfOrder => {
                PI / (2.0 * m2.powf(0.25) * Complex64::from_polar(1.0, th))
            }
        })
    }

    pub fn squared_integral(params: &FractionalParams, omega: f64) -> Result<f64> {
        check_closed_inputs(params, omega)?;
        let a = params.alpha();
        let eta = params.eta();
        let m2 = eta * eta + omega * omega;
        let ph = phi_angle(eta, omega);
        Ok(match branch_for(a) {
            ClosedFormBranch::Residue => {
                ((2.0 * (a - 1.0) * (PI - ph)).sin() - (2.0 * (a - 1.0) * ph).sin())
                    / ((2.0 * a * PI).sin() * (2.0 * ph).sin() * m2.powf(1.0 - a / 2.0))
            }
            ClosedFormBranch::HalfOrder => 3.0 * (2.0 * PI - ph) / (8.0 * m2.powf(0.75)),
        })
    }
}

/// int_0^inf rho^(2a-1) g(rho) d rho for g bounded near 0 and g = O(rho^-2) at infinity.
/// `g_inv(t)` must return g(1/t)/t^2, finite at t = 0.
fn power_weighted_half_line(
    alpha: f64,
    g: impl Fn(f64) -> f64,
    g_inv: impl Fn(f64) -> f64,
) -> Result<f64> {
    let lo = integrate_adaptive(
        |t| Complex64::new(g(t.powf(1.0 / (2.0 * alpha))), 0.0),
        0.0,
        1.0,
        1e-13,
        4000,
    )?;
    let hi = integrate_adaptive(
        |u| Complex64::new(g_inv(u.powf(1.0 / (2.0 - 2.0 * alpha))), 0.0),
        0.0,
        1.0,
        1e-13,
        4000,
    )?;
    Ok(lo.re / (2.0 * alpha) + hi.re / (2.0 - 2.0 * alpha))
}

/// Kelvin–Voigt coefficients c1 = gamma int p^2/((xi^2+eta)^2+omega^2) and
/// c2 = gamma int p^2 (xi^2+eta)/((xi^2+eta)^2+omega^2), over the full line.
pub fn kv_coefficients(params: &FractionalParams, omega: f64) -> Result<(f64, f64)> {
    params.require_positive_eta()?;
    if !omega.is_finite() {
        return Err(Error::Domain(format!("omega must be finite, got {omega}")));
    }
    let a = params.alpha();
    let eta = params.eta();
    let g = gamma_const(a)?;
    let j = if omega == 0.0 {
        PI * (1.0 - a) * eta.powf(a - 2.0) / (2.0 * (a * PI).sin())
    } else {
        closed_integral_squared(params, omega)?
    };
    let w2 = omega * omega;
    let c2_half = power_weighted_half_line(
        a,
        |r| {
            let q = r * r + eta;
            q / (q * q + w2)
        },
        |t| {
            let q = 1.0 + eta * t * t;
            q / (q * q + w2 * t.powi(4))
        },
    )?;
    Ok((2.0 * g * j, 2.0 * g * c2_half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_simplification() {
        for &a in &[0.1, 0.25, 0.5, 0.77] {
            let unsimplified = 2.0 * (a * PI).sin() * gamma(1.5) / PI.powf(1.5);
            assert_relative_eq!(gamma_const(a).unwrap(), unsimplified, max_relative = 1e-14);
        }
        assert!(gamma_const(1.0).is_err());
    }

    #[test]
    fn p_at_zero() {
        assert_eq!(p_weight(0.0, 0.3), f64::INFINITY);
        assert_eq!(p_weight(0.0, 0.5), 1.0);
        assert_eq!(p_weight(0.0, 0.7), 0.0);
    }

    #[test]
    fn half_order_branch_is_residue_limit() {
        let near = FractionalParams::new(0.5 + 1e-9, 1.3).unwrap();
        let at = FractionalParams::new(0.5, 1.3).unwrap();
        for &w in &[0.7, -4.0] {
            let a = closed_integral_resolvent(&near, w).unwrap();
            let b = closed_integral_resolvent(&at, w).unwrap();
            assert!((a - b).norm() / b.norm() < 1e-7);
            let a = closed_integral_squared(&near, w).unwrap();
            let b = closed_integral_squared(&at, w).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-7);
        }
    }

    #[test]
    fn squared_is_imaginary_part_over_omega() {
        let p = FractionalParams::new(0.35, 0.8).unwrap();
        for &w in &[0.3, 2.0, 50.0] {
            let i = closed_integral_resolvent(&p, w).unwrap();
            let j = closed_integral_squared(&p, w).unwrap();
            assert_relative_eq!(j, -i.im / w, max_relative = 1e-12);
        }
    }

    #[test]
    fn expm1_ratio_continuous() {
        let (a, b) = expm1_ratio(0.01 - 1e-12);
        let (c, d) = expm1_ratio(0.01 + 1e-12);
        assert!((a - c).abs() < 5e-12 && (b - d).abs() < 5e-12);
    }
}
