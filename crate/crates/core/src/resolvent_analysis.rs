//! Resolvent norms of the augmented and classical generators on the imaginary
//! axis, growth-exponent fits, the non-uniform-stability witness, and decay
//! predictions derived from the classical growth.

use crate::augmented_system::{AugmentedState, Generator, GeneratorKind};
use crate::error::{Error, Result};
use crate::spatial_operators::{continuum_modes, DampingConfig, Grid1D};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Above this state dimension `Backend::Auto` switches from the dense SVD to Lanczos.
pub const DENSE_DIM_LIMIT: usize = 128;
/// sigma_min below this fraction of the operator scale flags iw as numerically in the spectrum.
pub const SPECTRUM_TOL: f64 = 1e-13;

const LANCZOS_TOL: f64 = 1e-13;
const LANCZOS_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Augmented,
    Classical,
}

impl Which {
    pub fn as_str(&self) -> &'static str {
        match self {
            Which::Augmented => "Augmented",
            Which::Classical => "Classical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Auto,
    /// 1 / sigma_min of F (iw - A) F^-1 by a full SVD.
    Dense,
    /// Largest eigenvalue of R# R by Lanczos, R = (iw - A)^-1 applied through the shifted solves.
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormPoint {
    pub omega: f64,
    pub norm: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventScan {
    pub omegas: Vec<f64>,
    pub norms: Vec<f64>,
    pub flagged: Vec<bool>,
    pub which: Which,
}

impl ResolventScan {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub exponent: f64,
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub window: (f64, f64),
    pub points: usize,
}

pub fn which(gen: &Generator) -> Which {
    match gen.kind() {
        GeneratorKind::Augmented => Which::Augmented,
        GeneratorKind::Classical => Which::Classical,
    }
}

/// The classical generator (0 I; -A -BB*) on (u, v).
pub fn assemble_classical(grid: &Grid1D, config: &DampingConfig) -> Result<Generator> {
    Generator::classical(grid, config)
}

fn check_generator(gen: &Generator) -> Result<()> {
    if let Some(p) = gen.params() {
        p.require_positive_eta()?;
    }
    Ok(())
}

fn operator_scale(gen: &Generator, omega: f64) -> f64 {
    let h = gen.grid().h();
    let dmax = (0..gen.n_xi()).map(|j| gen.node(j).2).fold(0.0, f64::max);
    omega.abs() + 2.0 / h + dmax + 1.0
}

/// Weighted resolvent norm at iw.
pub fn resolvent_norm(gen: &Generator, omega: f64) -> Result<f64> {
    Ok(resolvent_norm_with(gen, omega, Backend::Auto)?.norm)
}

pub fn resolvent_norm_with(gen: &Generator, omega: f64, backend: Backend) -> Result<NormPoint> {
    check_generator(gen)?;
    if !(omega != 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("omega must be finite and nonzero, got {omega}")));
    }
    let backend = match backend {
        Backend::Auto if gen.dim() <= DENSE_DIM_LIMIT => Backend::Dense,
        Backend::Auto => Backend::Lanczos,
        b => b,
    };
    let scale = operator_scale(gen, omega);
    let norm = match backend {
        Backend::Dense => dense_norm(gen, omega, scale),
        _ => lanczos_norm(gen, omega)?,
    };
    let flagged = !norm.is_finite() || norm * scale * SPECTRUM_TOL > 1.0;
    Ok(NormPoint { omega, norm, flagged })
}

/// F A F^-1 as a dense real matrix, F the metric factor.
pub fn weighted_dense(gen: &Generator) -> DMatrix<f64> {
    let dim = gen.dim();
    let mut m = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut y = AugmentedState::<f64>::zeros(gen);
    for k in 0..dim {
        e[k] = 1.0;
        gen.apply(&gen.metric_factor_inv(&e), &mut y);
        for (i, v) in gen.metric_factor(&y).into_iter().enumerate() {
            m[(i, k)] = v;
        }
        e[k] = 0.0;
    }
    m
}

fn dense_norm(gen: &Generator, omega: f64, scale: f64) -> f64 {
    let a = weighted_dense(gen);
    let dim = a.nrows();
    let m = DMatrix::<Complex64>::from_fn(dim, dim, |i, j| {
        Complex64::new(-a[(i, j)], if i == j { omega } else { 0.0 })
    });
    let sv = m.singular_values();
    let smin = sv.min();
    if smin <= SPECTRUM_TOL * scale {
        f64::INFINITY
    } else {
        1.0 / smin
    }
}

fn start_vector(gen: &Generator) -> AugmentedState<Complex64> {
    // fixed, generic (no special symmetry) start vector
    let v: Vec<Complex64> =
        (0..gen.dim()).map(|k| Complex64::new(1.0 + 0.5 * (1.3 * k as f64).sin(), 0.3 * (0.7 * k as f64).cos())).collect();
    AugmentedState::from_slice(gen, &v)
}

fn lanczos_norm(gen: &Generator, omega: f64) -> Result<f64> {
    let s = Complex64::new(0.0, omega);
    let fwd = match gen.shifted(s) {
        Ok(f) => f,
        Err(Error::Singular(_)) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let adj = gen.shifted(s.conj())?;
    let mut q = start_vector(gen);
    let nq = gen.inner(&q, &q).re.sqrt();
    q.scale(Complex64::new(1.0 / nq, 0.0));
    let mut basis = vec![q];
    let (mut alphas, mut betas): (Vec<f64>, Vec<f64>) = (vec![], vec![]);
    let mut tmp = AugmentedState::zeros(gen);
    let mut w = AugmentedState::zeros(gen);
    let max_iter = LANCZOS_MAX_ITER.min(gen.dim());
    let mut theta = 0.0;
    for k in 0..max_iter {
        fwd.solve(&basis[k], &mut tmp);
        adj.solve_adjoint(&tmp, &mut w);
        let a = gen.inner(&w, &basis[k]).re;
        alphas.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = gen.inner(&w, b);
                w.axpy(-c, b);
            }
        }
        let beta = gen.inner(&w, &w).re.sqrt();
        let kk = alphas.len();
        let t = DMatrix::from_fn(kk, kk, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (imax, &tmax) =
            eig.eigenvalues.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        theta = tmax;
        let resid = beta * eig.eigenvectors[(kk - 1, imax)].abs();
        if resid <= LANCZOS_TOL * theta || beta <= LANCZOS_TOL * theta || k + 1 == max_iter {
            if k + 1 == max_iter && resid > 1e-9 * theta {
                return Err(Error::NoConvergence(format!("Lanczos at omega = {omega}: residual {resid:e}")));
            }
            break;
        }
        betas.push(beta);
        w.scale(Complex64::new(1.0 / beta, 0.0));
        basis.push(w.clone());
    }
    Ok(theta.max(0.0).sqrt())
}

/// Pointwise norms on a grid; flagged points are kept.
pub fn scan(gen: &Generator, omegas: &[f64], backend: Backend) -> Result<ResolventScan> {
    check_generator(gen)?;
    if omegas.windows(2).any(|w| !(w[1] > w[0])) || omegas.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Domain("scan frequencies must be positive and increasing".into()));
    }
    let mut out = ResolventScan { omegas: vec![], norms: vec![], flagged: vec![], which: which(gen) };
    for &w in omegas {
        let p = resolvent_norm_with(gen, w, backend)?;
        out.omegas.push(w);
        out.norms.push(p.norm);
        out.flagged.push(p.flagged);
    }
    Ok(out)
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::Domain(format!("log grid needs 0 < lo < hi and >= 2 points, got [{lo}, {hi}] x {points}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points).map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp()).collect())
}

/// [2 pi, omega_Nyquist / 4].
pub fn default_band(grid: &Grid1D) -> (f64, f64) {
    (2.0 * std::f64::consts::PI, grid.nyquist() / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    /// Samples per bracket before refinement.
    pub coarse: usize,
    /// Golden-section refinement steps.
    pub refine: usize,
    pub backend: Backend,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { coarse: 9, refine: 16, backend: Backend::Auto }
    }
}

/// Upper envelope of the norm over a band: one local maximum per discrete
/// eigenfrequency of the undamped stencil inside the band. Each bracket runs
/// between the midpoints to the neighbouring frequencies.
pub fn envelope_scan(gen: &Generator, band: (f64, f64), opts: EnvelopeOptions) -> Result<ResolventScan> {
    check_generator(gen)?;
    let grid = gen.grid();
    let (lo, hi) = band;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("invalid band [{lo}, {hi}]")));
    }
    let n = grid.n();
    let freq = |k: usize| grid.frequency(k);
    let mut out = ResolventScan { omegas: vec![], norms: vec![], flagged: vec![], which: which(gen) };
    let eval = |w: f64| resolvent_norm_with(gen, w, opts.backend);
    for k in 1..=n {
        let wk = freq(k);
        if wk < lo || wk > hi {
            continue;
        }
        let left = if k > 1 { 0.5 * (freq(k - 1) + wk) } else { 0.5 * wk };
        let right = if k < n { 0.5 * (wk + freq(k + 1)) } else { wk + 0.5 * (wk - freq(k - 1)) };
        let m = opts.coarse.max(3);
        let xs: Vec<f64> = (0..m).map(|i| left + (right - left) * i as f64 / (m - 1) as f64).collect();
        let mut best = eval(xs[0])?;
        let mut ib = 0;
        for (i, &x) in xs.iter().enumerate().skip(1) {
            let p = eval(x)?;
            if p.flagged || p.norm > best.norm {
                best = p;
                ib = i;
            }
            if p.flagged {
                break;
            }
        }
        if !best.flagged {
            let (mut a, mut b) = (xs[ib.saturating_sub(1)], xs[(ib + 1).min(m - 1)]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let (mut fc, mut fd) = (eval(c)?, eval(d)?);
            for _ in 0..opts.refine {
                if fc.flagged || fd.flagged {
                    best = if fc.flagged { fc } else { fd };
                    break;
                }
                if fc.norm > fd.norm {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = eval(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = eval(d)?;
                }
            }
            for p in [fc, fd] {
                if p.flagged || p.norm > best.norm {
                    best = p;
                }
            }
        }
        out.omegas.push(best.omega);
        out.norms.push(best.norm);
        out.flagged.push(best.flagged);
    }
    Ok(out)
}

/// Least-squares slope of log norm against log omega over unflagged points in the window.
pub fn fit_growth(scan: &ResolventScan, window: (f64, f64)) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = scan
        .omegas
        .iter()
        .zip(&scan.norms)
        .zip(&scan.flagged)
        .filter(|((w, n), f)| !**f && **w >= window.0 && **w <= window.1 && n.is_finite() && **n > 0.0)
        .map(|((w, n), _)| (w.ln(), n.ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::InsufficientPoints { needed: 8, got: pts.len() });
    }
    let (slope, intercept, residual) = least_squares(&pts);
    Ok(GrowthFit { exponent: slope, intercept, residual, window, points: pts.len() })
}

/// (slope, intercept, RMS residual) of y = slope x + intercept.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessPoint {
    pub k: usize,
    pub omega: f64,
    /// ||(iw - A) X|| / ||X||.
    pub ratio: f64,
    /// ratio * omega^(1 - alpha).
    pub scaled: f64,
    /// Largest relative entry of the first and third components of (iw - A) X.
    pub side_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessOutcome {
    Point(WitnessPoint),
    /// B* mode_k = 0: X_k = (mode_k / (i w_k), mode_k, 0) is an eigenvector on the axis.
    Rejected { k: usize, omega: f64, eigen_residual: f64 },
}

/// X_k = (mode_k / (i w_k), mode_k, phi_k) with phi_kj = p_j / (xi_j^2 + eta + i w_k) B* mode_k,
/// w_k the discrete eigenfrequency; reports ||(i w_k - A) X_k|| / ||X_k||.
pub fn witness_sequence(k_list: &[usize], gen: &Generator) -> Result<Vec<WitnessOutcome>> {
    check_generator(gen)?;
    let params = gen.params().ok_or_else(|| Error::Domain("witness needs the augmented generator".into()))?;
    let grid = *gen.grid();
    let (n, m) = (gen.n(), gen.m());
    let mut out = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let mode = continuum_modes(k, &grid)?;
        let omega = grid.frequency(k);
        let iw = Complex64::new(0.0, omega);
        let v: Vec<Complex64> = mode.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let u: Vec<Complex64> = v.iter().map(|&x| x / iw).collect();
        let mut bsv = vec![Complex64::new(0.0, 0.0); m];
        gen.config().apply_bstar(&grid, &v, &mut bsv);
        let bnorm = bsv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut phi = vec![Complex64::new(0.0, 0.0); gen.phi_len()];
        if bnorm > 1e-12 {
            for j in 0..gen.n_xi() {
                let (_, pj, dj) = gen.node(j);
                let f = Complex64::new(pj, 0.0) / (iw + dj);
                for i in 0..m {
                    phi[j * m + i] = bsv[i] * f;
                }
            }
        }
        let x = AugmentedState::extended(gen, u, v, phi)?;
        let mut ax = AugmentedState::zeros(gen);
        gen.apply(&x, &mut ax);
        let mut y = x.clone();
        y.scale(iw);
        y.axpy(Complex64::new(-1.0, 0.0), &ax);
        let xn = gen.inner(&x, &x).re.sqrt();
        let ratio = gen.inner(&y, &y).re.sqrt() / xn;
        if bnorm <= 1e-12 {
            out.push(WitnessOutcome::Rejected { k, omega, eigen_residual: ratio });
            continue;
        }
        let xmax = x.to_vec().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let side = y.u.iter().chain(&y.phi).map(|z| z.norm()).fold(0.0, f64::max) / xmax;
        debug_assert_eq!(y.u.len(), n);
        out.push(WitnessOutcome::Point(WitnessPoint {
            k,
            omega,
            ratio,
            scaled: ratio * omega.powf(1.0 - params.alpha()),
            side_residual: side,
        }));
    }
    Ok(out)
}

/// Growth of the classical resolvent, M(w).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalGrowth {
    /// M(w) = w^ell; ell = 0 is exponential stability of the classical system.
    Power(f64),
    /// M(w) = e^(K w).
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayDescriptor {
    /// E(t) <= C (1 + t)^(-rate).
    Polynomial { rate: f64 },
    /// E(t) <= C / ln(1 + t)^power.
    Logarithmic { power: f64 },
    /// E(t) <= C e^(-rate t); rate None when not predicted quantitatively.
    Exponential { rate: Option<f64> },
}

impl DecayDescriptor {
    pub fn model_name(&self) -> &'static str {
        match self {
            DecayDescriptor::Polynomial { .. } => "polynomial",
            DecayDescriptor::Logarithmic { .. } => "logarithmic",
            DecayDescriptor::Exponential { .. } => "exponential",
        }
    }
}

/// Energy decay implied by the augmented resolvent bound w^(1 - alpha) M(w).
pub fn predict_decay(alpha: f64, growth: ClassicalGrowth) -> Result<DecayDescriptor> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    match growth {
        ClassicalGrowth::Power(ell) if ell >= 0.0 && ell.is_finite() => {
            Ok(DecayDescriptor::Polynomial { rate: 2.0 / (1.0 - alpha + ell) })
        }
        ClassicalGrowth::Power(ell) => Err(Error::Domain(format!("ell must be finite and >= 0, got {ell}"))),
        ClassicalGrowth::Exponential => Ok(DecayDescriptor::Logarithmic { power: 2.0 }),
    }
}

/// M(w) read off a classical scan: exponents within `tol` of zero count as bounded.
pub fn classical_growth_from_fit(fit: &GrowthFit, tol: f64) -> ClassicalGrowth {
    if fit.exponent.abs() <= tol {
        ClassicalGrowth::Power(0.0)
    } else {
        ClassicalGrowth::Power(fit.exponent.max(0.0))
    }
}
