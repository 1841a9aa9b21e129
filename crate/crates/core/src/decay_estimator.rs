//! Decay-law fits on energy traces and comparison with predicted rates.

use crate::augmented_system::EnergyRecord;
use crate::error::{Error, Result};
use crate::resolvent_analysis::{least_squares, DecayDescriptor};
use crate::spatial_operators::{continuum_modes, Grid1D};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Minimum window length in decades of t.
pub const MIN_DECADES: f64 = 1.0;
/// Fitted rates at or below this are treated as no decay.
pub const MIN_ACCEPTED_RATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// E ~ (1 + t)^(-rate)
    Polynomial,
    /// E ~ ln(1 + t)^(-2 rate)
    Logarithmic,
    /// E ~ exp(-rate t)
    Exponential,
}

impl DecayModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecayModel::Polynomial => "polynomial",
            DecayModel::Logarithmic => "logarithmic",
            DecayModel::Exponential => "exponential",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub model: DecayModel,
    pub rate: f64,
    /// RMS of the residuals of log E.
    pub goodness: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// Half-width of the 95% confidence interval of the rate.
    pub confidence: f64,
    pub accepted: bool,
}

fn window_points(trace: &[EnergyRecord], window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (t_min, t_max) = window;
    if !(t_min > 0.0 && t_max > t_min) || t_max / t_min < 10f64.powf(MIN_DECADES) * (1.0 - 1e-9) {
        return Err(Error::WindowTooShort { decades: (t_max / t_min).log10(), needed: MIN_DECADES });
    }
    let mut pts = vec![];
    for r in trace.iter().filter(|r| r.t >= t_min * (1.0 - 1e-12) && r.t <= t_max * (1.0 + 1e-12)) {
        if !(r.e > 0.0) {
            return Err(Error::NonPositiveEnergy { t: r.t });
        }
        pts.push((r.t, r.e.ln()));
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: pts.len() });
    }
    Ok(pts)
}

fn fit(model: DecayModel, pts: Vec<(f64, f64)>, window: (f64, f64)) -> DecayFit {
    let (slope, _, goodness) = least_squares(&pts);
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let se = (goodness * goodness * n / (n - 2.0) / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, n - 2.0).map(|d| d.inverse_cdf(0.975)).unwrap_or(1.96);
    let rate = -slope;
    DecayFit { model, rate, goodness, window, points: pts.len(), confidence: q * se, accepted: rate > MIN_ACCEPTED_RATE }
}

fn horizon(trace: &[EnergyRecord]) -> Result<f64> {
    trace.last().map(|r| r.t).ok_or(Error::InsufficientPoints { needed: 3, got: 0 })
}

/// Slope of log E against log(1 + t) on [t_min, T]; t_min defaults to T / 10.
pub fn fit_polynomial_rate(trace: &[EnergyRecord], t_min: Option<f64>) -> Result<DecayFit> {
    let t_end = horizon(trace)?;
    fit_polynomial_window(trace, (t_min.unwrap_or(t_end / 10.0), t_end))
}

pub fn fit_polynomial_window(trace: &[EnergyRecord], window: (f64, f64)) -> Result<DecayFit> {
    let pts = window_points(trace, window)?;
    let pts = pts.into_iter().map(|(t, le)| ((1.0 + t).ln(), le)).collect();
    Ok(fit(DecayModel::Polynomial, pts, window))
}

/// Slope of log E against t on [t_min, T]; t_min defaults to T / 10.
pub fn fit_exponential_rate(trace: &[EnergyRecord], t_min: Option<f64>) -> Result<DecayFit> {
    let t_end = horizon(trace)?;
    fit_exponential_window(trace, (t_min.unwrap_or(t_end / 10.0), t_end))
}

pub fn fit_exponential_window(trace: &[EnergyRecord], window: (f64, f64)) -> Result<DecayFit> {
    let pts = window_points(trace, window)?;
    Ok(fit(DecayModel::Exponential, pts, window))
}

/// Slope of log E against log log(1 + t) on the window, halved, so that
/// E ~ ln(1 + t)^(-2 rate).
pub fn fit_logarithmic_window(trace: &[EnergyRecord], window: (f64, f64)) -> Result<DecayFit> {
    let pts = window_points(trace, window)?;
    let pts: Vec<(f64, f64)> = pts.into_iter().map(|(t, le)| ((1.0 + t).ln().ln(), le)).collect();
    let mut f = fit(DecayModel::Logarithmic, pts, window);
    f.rate /= 2.0;
    f.confidence /= 2.0;
    f.accepted = f.rate > MIN_ACCEPTED_RATE;
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Pass,
    Fail,
    /// The fit and the prediction describe different decay laws.
    ModelMismatch,
    /// The fitted rate is not positive.
    NonDecaying,
}

impl VerdictStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictStatus::Pass => "pass",
            VerdictStatus::Fail => "fail",
            VerdictStatus::ModelMismatch => "model-mismatch",
            VerdictStatus::NonDecaying => "non-decaying",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub model: DecayModel,
    pub rate: f64,
    /// NaN when the prediction carries no rate for this model.
    pub predicted: f64,
    /// |rate - predicted| / predicted, NaN when undefined.
    pub deviation: f64,
    pub status: VerdictStatus,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.status == VerdictStatus::Pass
    }
}

pub fn compare_to_prediction(fit: &DecayFit, predicted: &DecayDescriptor, tol: f64) -> Verdict {
    let target = match (fit.model, predicted) {
        (DecayModel::Polynomial, DecayDescriptor::Polynomial { rate }) => Some(*rate),
        (DecayModel::Logarithmic, DecayDescriptor::Logarithmic { power }) => Some(power / 2.0),
        (DecayModel::Exponential, DecayDescriptor::Exponential { rate }) => Some(rate.unwrap_or(f64::NAN)),
        _ => None,
    };
    let mut v = Verdict {
        model: fit.model,
        rate: fit.rate,
        predicted: target.unwrap_or(f64::NAN),
        deviation: f64::NAN,
        status: VerdictStatus::ModelMismatch,
    };
    if !fit.accepted {
        v.status = VerdictStatus::NonDecaying;
        return v;
    }
    if target.is_none() {
        return v;
    }
    if v.predicted.is_nan() {
        // qualitative prediction: any accepted decay of this form passes
        v.status = VerdictStatus::Pass;
        return v;
    }
    v.deviation = (fit.rate - v.predicted).abs() / v.predicted;
    v.status = if v.deviation <= tol { VerdictStatus::Pass } else { VerdictStatus::Fail };
    v
}

/// u0 = sum_k k^(-s) sin(k pi x) over all grid modes; for s = 2.5 the modal
/// energies fall like k^-3 and reach the slowly damped high frequencies.
pub fn spectral_edge_data(grid: &Grid1D, s: f64) -> Vec<f64> {
    let x = grid.x();
    let mut u = vec![0.0; grid.n()];
    for k in 1..=grid.n() {
        let c = (k as f64).powf(-s);
        let kp = k as f64 * std::f64::consts::PI;
        for (ui, xi) in u.iter_mut().zip(&x) {
            *ui += c * (kp * xi).sin();
        }
    }
    u
}

/// (mode_1 + mode_3) / sqrt(2) with unit discrete modes.
pub fn low_mode_data(grid: &Grid1D) -> Result<Vec<f64>> {
    let m1 = continuum_modes(1, grid)?;
    let m3 = continuum_modes(3, grid)?;
    Ok(m1.iter().zip(&m3).map(|(a, b)| (a + b) / 2f64.sqrt()).collect())
}

/// Step for decay runs: T / 4096, capped at h / 4 so that the midpoint rule
/// keeps the damping of the fastest grid mode within a few percent.
pub fn resolved_dt(t_end: f64, grid: &Grid1D) -> f64 {
    (t_end / 4096.0).min(grid.h() / 4.0)
}
