//! The four subcommands. Each returns the lines to print on success.

use crate::config::*;
use crate::output::{num, write_meta, Csv};
use fracwave::augmented_system::{assemble_generator, simulate as run, AugmentedState, EnergyRecord, Generator, Trajectory};
use fracwave::decay_estimator::*;
use fracwave::fractional_kernel::*;
use fracwave::quadrature::integrate_adaptive;
use fracwave::resolvent_analysis::*;
use fracwave::spatial_operators::{continuum_modes, DampingConfig, Grid1D, Profile};
use fracwave::Error;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::path::Path;

/// Tolerance of the diffusive representation against direct product integration.
pub const KERNEL_TOL: f64 = 1e-3;
/// Tolerance of the closed-form integrals against adaptive quadrature.
pub const CLOSED_FORM_TOL: f64 = 1e-6;
/// Classical growth exponents within this of zero count as bounded.
pub const BOUNDED_TOL: f64 = 0.1;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Module(Error),
    Breach(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Breach(_) | CliError::Module(Error::Certificate { .. }) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) if m.contains('\n') => write!(f, "bad config:\n{m}"),
            CliError::Config(m) => write!(f, "bad config: {m}"),
            CliError::Module(Error::Certificate { error, tol }) => {
                write!(f, "tolerance breach: quadrature certificate failed: relative error {error:.3e} exceeds {tol:.1e} (increase quadrature.xi_max or quadrature.n_nodes)")
            }
            CliError::Module(e) => write!(f, "error: {e}"),
            CliError::Breach(m) => write!(f, "tolerance breach: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Module(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Res<T> = Result<T, CliError>;

/// Fills the defaults that depend on the grid, so the meta file states every value used.
pub fn resolve(cfg: &mut RunConfig) -> Res<()> {
    let grid = Grid1D::new(cfg.n())?;
    if cfg.time.dt.is_none() {
        cfg.time.dt = Some(resolved_dt(cfg.time.t_end, &grid));
    }
    let (lo, hi) = default_band(&grid);
    let lo = *cfg.scan.omega_min.get_or_insert(lo);
    let hi = *cfg.scan.omega_max.get_or_insert(hi);
    if !(hi > lo) {
        return Err(CliError::Config(format!("scan band [{lo}, {hi}] is empty; set scan.omega_min and scan.omega_max")));
    }
    Ok(())
}

fn params(cfg: &RunConfig) -> Res<FractionalParams> {
    Ok(FractionalParams::new(cfg.params.alpha, cfg.params.eta)?)
}

fn strategy(cfg: &RunConfig) -> QuadratureStrategy {
    match cfg.quadrature.strategy {
        Strategy::TailClosed => QuadratureStrategy::TailClosed,
        Strategy::Truncated => QuadratureStrategy::Truncated,
    }
}

fn quadrature(cfg: &RunConfig) -> Res<DiffusiveQuadrature> {
    let q = &cfg.quadrature;
    Ok(build_quadrature(&params(cfg)?, q.n_nodes as usize, q.xi_max, strategy(cfg))?)
}

fn damping(cfg: &RunConfig, grid: &Grid1D) -> Res<DampingConfig> {
    let d = &cfg.damping;
    let [lo, hi] = d.support;
    let profile = match d.profile {
        ProfileKind::Smooth => Profile::Smooth { lo, hi, a0: d.a0, ramp: d.ramp },
        ProfileKind::Indicator => Profile::Indicator { lo, hi, a0: d.a0 },
        ProfileKind::Constant => Profile::Constant { a0: d.a0 },
    };
    Ok(match d.kind {
        DampingKind::Internal => DampingConfig::internal(grid, profile)?,
        DampingKind::KelvinVoigt => DampingConfig::kelvin_voigt(grid, profile)?,
        DampingKind::Pointwise => DampingConfig::pointwise(d.zeta)?,
        DampingKind::None => DampingConfig::undamped(grid),
    })
}

struct Model {
    grid: Grid1D,
    gen: Generator,
    quad: Option<DiffusiveQuadrature>,
}

fn model(cfg: &RunConfig) -> Res<Model> {
    let grid = Grid1D::new(cfg.n())?;
    let dc = damping(cfg, &grid)?;
    if cfg.params.fractional {
        let quad = quadrature(cfg)?;
        let gen = assemble_generator(&grid, &dc, &quad)?;
        Ok(Model { grid, gen, quad: Some(quad) })
    } else {
        Ok(Model { gen: assemble_classical(&grid, &dc)?, grid, quad: None })
    }
}

fn initial_state(cfg: &RunConfig, m: &Model) -> Res<AugmentedState<f64>> {
    let n = m.grid.n();
    let i = &cfg.initial;
    let (u, v) = match i.kind {
        InitialKind::Edge => (spectral_edge_data(&m.grid, i.s), vec![0.0; n]),
        InitialKind::Low => (low_mode_data(&m.grid)?, vec![0.0; n]),
        InitialKind::Mode => (continuum_modes(i.k as usize, &m.grid)?, vec![0.0; n]),
        InitialKind::Zero => (vec![0.0; n], vec![0.0; n]),
        InitialKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(i.seed);
            let u = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let v = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            (u, v)
        }
    };
    Ok(AugmentedState::new(&m.gen, u, v)?)
}

fn notes(command: &str, quad: Option<&DiffusiveQuadrature>) -> Vec<(String, String)> {
    let mut out = vec![("command".to_string(), command.to_string())];
    match quad {
        Some(q) => {
            out.push(("certificate_error".into(), num(q.certificate.error)));
            out.push(("certificate_tol".into(), num(q.certificate.tol)));
        }
        None => out.push(("certificate".into(), "none (classical generator)".into())),
    }
    out
}

fn prepare(out: &Path) -> Res<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn trajectory(cfg: &RunConfig, m: &Model) -> Res<Trajectory> {
    let x0 = initial_state(cfg, m)?;
    let dt = cfg.time.dt.expect("resolved");
    Ok(run(&x0, cfg.time.t_end, dt, &m.gen, cfg.time.record_every as usize)?)
}

fn energy_csv(records: &[EnergyRecord]) -> Csv {
    let mut csv = Csv::new("t,E,E1,E2,dissipation,hoE");
    for r in records {
        csv.row(&[num(r.t), num(r.e), num(r.e1), num(r.e2), num(r.dissipation), num(r.hoe)]);
    }
    csv
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Res<Vec<String>> {
    let m = model(cfg)?;
    let tr = trajectory(cfg, &m)?;
    let hash = cfg.hash();
    prepare(out)?;
    let path = energy_csv(&tr.records).write(out, "energy.csv", &hash)?;
    write_meta(out, &hash, &notes("simulate", m.quad.as_ref()), &cfg.canonical())?;
    let (first, last) = (tr.records[0], *tr.records.last().expect("nonempty"));
    Ok(vec![
        format!("wrote {} ({} rows)", path.display(), tr.records.len()),
        format!("E(0) = {:.6e}, E({}) = {:.6e}", first.e, last.t, last.e),
        format!("largest per-step energy-law residual {:.2e}", tr.max_law_residual),
    ])
}

fn scan_one(gen: &Generator, cfg: &RunConfig, band: (f64, f64)) -> fracwave::Result<(ResolventScan, GrowthFit)> {
    let scan = match cfg.scan.method {
        ScanMethod::Envelope => envelope_scan(gen, band, EnvelopeOptions::default())?,
        ScanMethod::Grid => scan(gen, &log_grid(band.0, band.1, cfg.scan.points as usize)?, Backend::Auto)?,
    };
    let fit = fit_growth(&scan, band)?;
    Ok((scan, fit))
}

pub fn resolvent(cfg: &RunConfig, out: &Path) -> Res<Vec<String>> {
    if params(cfg)?.require_positive_eta().is_err() {
        return Err(CliError::Config(
            "params.eta = 0: zero lies in the spectrum of the augmented generator, so its resolvent is unbounded near omega = 0; use eta > 0".into(),
        ));
    }
    let grid = Grid1D::new(cfg.n())?;
    let dc = damping(cfg, &grid)?;
    let quad = quadrature(cfg)?;
    let aug = assemble_generator(&grid, &dc, &quad)?;
    let cls = assemble_classical(&grid, &dc)?;
    let band = (cfg.scan.omega_min.expect("resolved"), cfg.scan.omega_max.expect("resolved"));
    let (a, c) = std::thread::scope(|s| {
        let h = s.spawn(|| scan_one(&cls, cfg, band));
        let a = scan_one(&aug, cfg, band);
        (a, h.join().expect("scan thread"))
    });
    let results = [a?, c?];
    let hash = cfg.hash();
    prepare(out)?;
    let mut scans = Csv::new("omega,norm,flagged,which");
    let mut fits = Csv::new("which,exponent,intercept,residual,window_lo,window_hi");
    let mut lines = vec![];
    for (s, f) in &results {
        let which = s.which.as_str();
        for i in 0..s.omegas.len() {
            scans.row(&[num(s.omegas[i]), num(s.norms[i]), s.flagged[i].to_string(), which.to_string()]);
        }
        fits.row(&[which.to_string(), num(f.exponent), num(f.intercept), num(f.residual), num(f.window.0), num(f.window.1)]);
        lines.push(format!("{which}: growth exponent {:.4} (residual {:.3}, {} points)", f.exponent, f.residual, f.points));
    }
    scans.write(out, "resolvent.csv", &hash)?;
    fits.write(out, "growthfit.csv", &hash)?;
    write_meta(out, &hash, &notes("resolvent", Some(&quad)), &cfg.canonical())?;
    let growth = classical_growth_from_fit(&results[1].1, BOUNDED_TOL);
    lines.push(match growth {
        ClassicalGrowth::Power(ell) if ell == 0.0 => format!("classical resolvent bounded (|exponent| <= {BOUNDED_TOL})"),
        ClassicalGrowth::Power(ell) => format!("classical resolvent grows like omega^{ell:.3}"),
        ClassicalGrowth::Exponential => "classical resolvent grows exponentially".into(),
    });
    let flagged: usize = results.iter().map(|(s, _)| s.flagged.iter().filter(|&&f| f).count()).sum();
    if flagged > 0 {
        lines.push(format!("warning: {flagged} scan points flagged as numerically unreliable"));
    }
    Ok(lines)
}

/// Predicted energy decay for the configured generator; None when no decay is predicted.
pub fn prediction(cfg: &RunConfig) -> Res<Option<DecayDescriptor>> {
    let growth = match cfg.classical_growth() {
        None => return Ok(None),
        Some(GrowthKind::Bounded) => ClassicalGrowth::Power(0.0),
        Some(GrowthKind::Power) => ClassicalGrowth::Power(cfg.decay.growth_power),
        Some(GrowthKind::Exponential) => ClassicalGrowth::Exponential,
    };
    if cfg.params.fractional {
        return Ok(Some(predict_decay(cfg.params.alpha, growth)?));
    }
    // classical system: bounded resolvent gives exponential decay, w^ell gives t^(-2/ell)
    Ok(Some(match growth {
        ClassicalGrowth::Power(ell) if ell == 0.0 => DecayDescriptor::Exponential { rate: None },
        ClassicalGrowth::Power(ell) => DecayDescriptor::Polynomial { rate: 2.0 / ell },
        ClassicalGrowth::Exponential => DecayDescriptor::Logarithmic { power: 2.0 },
    }))
}

pub fn decay(cfg: &RunConfig, out: &Path) -> Res<Vec<String>> {
    if cfg.decay.window[1] > cfg.time.t_end {
        return Err(CliError::Config(format!(
            "decay.window upper end {} exceeds time.T = {}",
            cfg.decay.window[1], cfg.time.t_end
        )));
    }
    let m = model(cfg)?;
    let tr = trajectory(cfg, &m)?;
    let window = (cfg.decay.window[0], cfg.decay.window[1]);
    let fits = [
        fit_polynomial_window(&tr.records, window)?,
        fit_exponential_window(&tr.records, window)?,
        fit_logarithmic_window(&tr.records, window)?,
    ];
    let pred = prediction(cfg)?;
    let hash = cfg.hash();
    prepare(out)?;
    let mut csv = Csv::new("model,rate,predicted,deviation,pass");
    let mut lines = vec![match pred {
        Some(p) => format!("predicted decay: {}", describe(&p)),
        None => "predicted decay: none (undamped)".to_string(),
    }];
    for f in &fits {
        let v = match &pred {
            Some(p) => compare_to_prediction(f, p, cfg.decay.tolerance),
            None => Verdict {
                model: f.model,
                rate: f.rate,
                predicted: f64::NAN,
                deviation: f64::NAN,
                status: if f.accepted { VerdictStatus::Fail } else { VerdictStatus::NonDecaying },
            },
        };
        csv.row(&[f.model.as_str().into(), num(v.rate), num(v.predicted), num(v.deviation), v.status.as_str().into()]);
        lines.push(format!(
            "{}: rate {:.4} +- {:.2e}, residual {:.3}: {}",
            f.model.as_str(),
            f.rate,
            f.confidence,
            f.goodness,
            v.status.as_str()
        ));
    }
    csv.write(out, "decay.csv", &hash)?;
    energy_csv(&tr.records).write(out, "energy.csv", &hash)?;
    write_meta(out, &hash, &notes("decay", m.quad.as_ref()), &cfg.canonical())?;
    Ok(lines)
}

fn describe(p: &DecayDescriptor) -> String {
    match p {
        DecayDescriptor::Polynomial { rate } => format!("polynomial, E ~ t^-{rate:.4}"),
        DecayDescriptor::Logarithmic { power } => format!("logarithmic, E ~ ln(t)^-{power}"),
        DecayDescriptor::Exponential { rate: Some(r) } => format!("exponential, rate {r:.4}"),
        DecayDescriptor::Exponential { rate: None } => "exponential".into(),
    }
}

/// int_0^inf r^(2a-1) g(r) dr with the power singularities mapped out on [0, 1]
/// (s = r^(2a)) and on [1, inf) (r = 1/t, s = t^(2-2a)); `g_fold(t) = g(1/t)/t^2`.
fn half_line(alpha: f64, g: impl Fn(f64) -> Complex64, g_fold: impl Fn(f64) -> Complex64) -> fracwave::Result<Complex64> {
    let lo = integrate_adaptive(|s| g(s.powf(0.5 / alpha)), 0.0, 1.0, 1e-13, 4000)? / (2.0 * alpha);
    let hi = integrate_adaptive(|s| g_fold(s.powf(1.0 / (2.0 - 2.0 * alpha))), 0.0, 1.0, 1e-13, 4000)?
        / (2.0 - 2.0 * alpha);
    Ok(lo + hi)
}

struct Check {
    name: String,
    omega: f64,
    error: f64,
    tol: f64,
}

pub const VERIFY_OMEGAS: [f64; 8] = [0.5, -0.5, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0];

pub fn verify_kernel(cfg: &RunConfig, out: &Path) -> Res<Vec<String>> {
    let p = params(cfg)?;
    let q = &cfg.quadrature;
    // built without the certificate gate, so a failing certificate is still reported
    let mut quad = build_quadrature_with_tol(&p, q.n_nodes as usize, q.xi_max, strategy(cfg), f64::INFINITY)?;
    quad.certificate.tol = CERTIFICATE_TOL;
    let mut checks = vec![Check { name: "certificate".into(), omega: 1.0, error: quad.certificate.error, tol: CERTIFICATE_TOL }];

    let steps = 1000;
    let signals: [(&str, fn(f64) -> f64); 4] =
        [("one", |_| 1.0), ("t", |t| t), ("sin", f64::sin), ("pulse", |t| (-2.0 * (t - 3.0).powi(2)).exp())];
    for (name, f) in signals {
        let u = SampledSignal::from_fn(10.0 / steps as f64, steps, f)?;
        let direct = fractional_integral_direct(&u, &p, 1.0 - p.alpha())?;
        let diff = diffusive_apply(&u, &quad)?;
        let err = diff.values().iter().zip(direct.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        checks.push(Check { name: format!("diffusive:{name}"), omega: f64::NAN, error: err / direct.max_abs(), tol: KERNEL_TOL });
    }

    let mut skipped = None;
    if p.eta() > 0.0 {
        let (a, eta) = (p.alpha(), p.eta());
        let one = Complex64::new(1.0, 0.0);
        for w in VERIFY_OMEGAS {
            let i_ref = half_line(a, |r| one / Complex64::new(r * r + eta, w), |t| one / Complex64::new(1.0 + eta * t * t, w * t * t))?;
            let j_ref = half_line(
                a,
                |r| Complex64::new(1.0 / ((r * r + eta).powi(2) + w * w), 0.0),
                |t| Complex64::new(t * t / ((1.0 + eta * t * t).powi(2) + w * w * t.powi(4)), 0.0),
            )?
            .re;
            let i_cf = closed_integral_resolvent(&p, w)?;
            let j_cf = closed_integral_squared(&p, w)?;
            checks.push(Check { name: "closed:resolvent".into(), omega: w, error: (i_cf - i_ref).norm() / i_ref.norm(), tol: CLOSED_FORM_TOL });
            checks.push(Check { name: "closed:squared".into(), omega: w, error: (j_cf - j_ref).abs() / j_ref, tol: CLOSED_FORM_TOL });
        }
    } else {
        skipped = Some("closed-form checks skipped: they need eta > 0");
    }

    let hash = cfg.hash();
    prepare(out)?;
    let mut csv = Csv::new("check,alpha,eta,omega,error,tol,pass");
    let mut failed = vec![];
    let mut worst = std::collections::BTreeMap::<String, f64>::new();
    for c in &checks {
        let ok = c.error <= c.tol;
        if !ok {
            failed.push(format!("{} (error {:.3e} > {:.1e})", c.name, c.error, c.tol));
        }
        let w = worst.entry(c.name.split(':').next().unwrap_or("").to_string()).or_insert(0.0);
        *w = w.max(c.error);
        csv.row(&[c.name.clone(), num(p.alpha()), num(p.eta()), num(c.omega), num(c.error), num(c.tol), ok.to_string()]);
    }
    let path = csv.write(out, "kernel_report.csv", &hash)?;
    write_meta(out, &hash, &notes("verify-kernel", Some(&quad)), &cfg.canonical())?;
    failed.dedup();
    if !failed.is_empty() {
        return Err(CliError::Breach(format!("{} of {} kernel checks failed: {}", failed.len(), checks.len(), failed.join("; "))));
    }
    let mut lines = vec![format!("wrote {}", path.display())];
    lines.extend(worst.iter().map(|(k, v)| format!("max {k} error {v:.3e}")));
    lines.extend(skipped.map(String::from));
    Ok(lines)
}
