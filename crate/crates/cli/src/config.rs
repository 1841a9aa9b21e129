//! Run configuration: TOML parsing, defaults, validation and the config hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: Params,
    pub damping: Damping,
    pub grid: GridSection,
    pub quadrature: QuadratureSection,
    pub time: TimeSection,
    pub initial: Initial,
    pub scan: ScanSection,
    pub decay: DecaySection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub alpha: f64,
    pub eta: f64,
    /// false runs the classical (undelayed) damped wave equation instead.
    pub fractional: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self { alpha: 0.5, eta: 1.0, fractional: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampingKind {
    Internal,
    KelvinVoigt,
    Pointwise,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Smooth,
    Indicator,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Damping {
    pub kind: DampingKind,
    pub profile: ProfileKind,
    pub support: [f64; 2],
    pub a0: f64,
    pub ramp: f64,
    pub zeta: f64,
}

impl Default for Damping {
    fn default() -> Self {
        Self { kind: DampingKind::Internal, profile: ProfileKind::Smooth, support: [0.3, 0.7], a0: 1.0, ramp: 0.1, zeta: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: i64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    TailClosed,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSection {
    pub n_nodes: i64,
    pub xi_max: f64,
    pub strategy: Strategy,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self { n_nodes: 128, xi_max: 1e4, strategy: Strategy::TailClosed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    /// Defaults to min(T / 4096, h / 4).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub record_every: i64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { dt: None, t_end: 200.0, record_every: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// sum_k k^-s sin(k pi x)
    Edge,
    /// (mode 1 + mode 3) / sqrt 2
    Low,
    Mode,
    Zero,
    /// u and v uniform on [-1, 1], seeded
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Initial {
    pub kind: InitialKind,
    pub k: i64,
    pub s: f64,
    pub seed: u64,
}

impl Default for Initial {
    fn default() -> Self {
        Self { kind: InitialKind::Edge, k: 2, s: 2.5, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMethod {
    /// one local maximum per stencil eigenfrequency in the band
    Envelope,
    /// `points` log-spaced frequencies
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    /// Defaults to 2 pi.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    /// Defaults to a quarter of the grid Nyquist frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    pub points: i64,
    pub method: ScanMethod,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { omega_min: None, omega_max: None, points: 64, method: ScanMethod::Envelope }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthKind {
    Bounded,
    Power,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecaySection {
    pub window: [f64; 2],
    pub tolerance: f64,
    /// Growth of the classical resolvent; defaults by damping kind.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_growth: Option<GrowthKind>,
    pub growth_power: f64,
}

impl Default for DecaySection {
    fn default() -> Self {
        Self { window: [20.0, 200.0], tolerance: 0.2, classical_growth: None, growth_power: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: "out".into(), formats: vec!["csv".into()] }
    }
}

/// One located configuration problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source_name: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match d.line {
                Some(l) => write!(f, "{}:{}: {}: {}", self.source_name, l, d.field, d.message)?,
                None => write!(f, "{}: {}: {}", self.source_name, d.field, d.message)?,
            }
        }
        Ok(())
    }
}

/// 1-based line of `key = ...` inside `[section]`, if the key is written out.
fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    pub fn parse(src: &str, source_name: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1);
            ConfigError {
                source_name: source_name.into(),
                diagnostics: vec![Diagnostic { line, field: "parse".into(), message: e.message().trim().to_string() }],
            }
        })?;
        let diagnostics = cfg.check(src);
        if diagnostics.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { source_name: source_name.into(), diagnostics })
        }
    }

    fn check(&self, src: &str) -> Vec<Diagnostic> {
        let mut out = vec![];
        let mut bad = |section: &str, key: &str, message: String| {
            out.push(Diagnostic { line: locate(src, section, key), field: format!("{section}.{key}"), message });
        };
        let p = &self.params;
        if !(p.alpha > 0.0 && p.alpha < 1.0) {
            bad("params", "alpha", format!("must lie in (0, 1), got {}", p.alpha));
        }
        if !(p.eta >= 0.0 && p.eta.is_finite()) {
            bad("params", "eta", format!("must be finite and >= 0, got {}", p.eta));
        }
        let d = &self.damping;
        match d.kind {
            DampingKind::Internal | DampingKind::KelvinVoigt => {
                let [lo, hi] = d.support;
                if d.profile != ProfileKind::Constant && !(0.0 <= lo && lo < hi && hi <= 1.0) {
                    bad("damping", "support", format!("needs 0 <= lo < hi <= 1, got [{lo}, {hi}]"));
                }
                if !(d.a0 > 0.0 && d.a0.is_finite()) {
                    bad("damping", "a0", format!("must be positive, got {}", d.a0));
                }
                if d.profile == ProfileKind::Smooth && !(d.ramp > 0.0 && d.ramp.is_finite()) {
                    bad("damping", "ramp", format!("must be positive, got {}", d.ramp));
                }
            }
            DampingKind::Pointwise => {
                if !(d.zeta > 0.0 && d.zeta < 1.0) {
                    bad("damping", "zeta", format!("must lie in (0, 1), got {}", d.zeta));
                }
            }
            DampingKind::None => {}
        }
        let n = self.grid.n;
        if n < 3 {
            bad("grid", "n", format!("needs at least 3 interior points, got {n}"));
        }
        let q = &self.quadrature;
        if q.n_nodes < 4 {
            bad("quadrature", "n_nodes", format!("must be >= 4, got {}", q.n_nodes));
        }
        if !(q.xi_max > 1.0 && q.xi_max.is_finite()) {
            bad("quadrature", "xi_max", format!("must exceed 1, got {}", q.xi_max));
        }
        let t = &self.time;
        if !(t.t_end > 0.0 && t.t_end.is_finite()) {
            bad("time", "T", format!("must be positive, got {}", t.t_end));
        }
        if let Some(dt) = t.dt {
            if !(dt > 0.0 && dt <= t.t_end) {
                bad("time", "dt", format!("must lie in (0, T], got {dt}"));
            }
        }
        if t.record_every < 1 {
            bad("time", "record_every", format!("must be >= 1, got {}", t.record_every));
        }
        let i = &self.initial;
        if i.kind == InitialKind::Mode && !(1..=n.max(1)).contains(&i.k) {
            bad("initial", "k", format!("mode index must lie in 1..={n}, got {}", i.k));
        }
        if i.kind == InitialKind::Edge && !(i.s > 0.0 && i.s.is_finite()) {
            bad("initial", "s", format!("must be positive, got {}", i.s));
        }
        let s = &self.scan;
        if let Some(lo) = s.omega_min {
            if !(lo > 0.0 && lo.is_finite()) {
                bad("scan", "omega_min", format!("must be positive, got {lo}"));
            }
        }
        if let (Some(lo), Some(hi)) = (s.omega_min, s.omega_max) {
            if !(hi > lo && hi.is_finite()) {
                bad("scan", "omega_max", format!("must exceed omega_min = {lo}, got {hi}"));
            }
        }
        if s.points < 8 {
            bad("scan", "points", format!("a growth fit needs at least 8 points, got {}", s.points));
        }
        let dc = &self.decay;
        let [wlo, whi] = dc.window;
        if !(wlo > 0.0 && whi >= 10.0 * wlo && whi.is_finite()) {
            bad("decay", "window", format!("needs 0 < lo and hi >= 10 lo, got [{wlo}, {whi}]"));
        }
        if !(dc.tolerance > 0.0) {
            bad("decay", "tolerance", format!("must be positive, got {}", dc.tolerance));
        }
        if !(dc.growth_power >= 0.0 && dc.growth_power.is_finite()) {
            bad("decay", "growth_power", format!("must be finite and >= 0, got {}", dc.growth_power));
        }
        if dc.classical_growth == Some(GrowthKind::Power) && dc.growth_power == 0.0 {
            bad("decay", "growth_power", "classical_growth = \"power\" needs growth_power > 0".into());
        }
        let o = &self.output;
        if o.formats.is_empty() || o.formats.iter().any(|f| f != "csv") {
            bad("output", "formats", format!("only \"csv\" is supported, got {:?}", o.formats));
        }
        if o.directory.is_empty() {
            bad("output", "directory", "must not be empty".into());
        }
        out
    }

    pub fn n(&self) -> usize {
        self.grid.n as usize
    }

    /// Growth of the classical resolvent used for decay predictions.
    pub fn classical_growth(&self) -> Option<GrowthKind> {
        self.decay.classical_growth.or(match self.damping.kind {
            DampingKind::Internal => Some(GrowthKind::Bounded),
            DampingKind::KelvinVoigt | DampingKind::Pointwise => Some(GrowthKind::Exponential),
            DampingKind::None => None,
        })
    }

    /// Canonical TOML text; hashed and echoed into the meta file.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical text with the output section reset, so the
    /// hash names the computation and not where it was written.
    pub fn hash(&self) -> String {
        let mut numeric = self.clone();
        numeric.output = OutputSection::default();
        Sha256::digest(numeric.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let back = RunConfig::parse(&c.canonical(), "x").unwrap();
        assert_eq!(c, back);
        assert_eq!(c.hash(), back.hash());
        assert_eq!(c.hash().len(), 64);
        let mut moved = c.clone();
        moved.output.directory = "elsewhere".into();
        assert_eq!(moved.hash(), c.hash());
        moved.params.alpha = 0.25;
        assert_ne!(moved.hash(), c.hash());
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::parse("", "x").unwrap(), RunConfig::default());
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let src = "[params]\nalpha = 0.5\neta = -1.0\n\n[grid]\nn = 0\n";
        let e = RunConfig::parse(src, "cfg.toml").unwrap_err();
        let text = e.to_string();
        assert!(text.contains("cfg.toml:3: params.eta"), "{text}");
        assert!(text.contains("cfg.toml:6: grid.n"), "{text}");
    }

    #[test]
    fn unknown_keys_and_syntax_errors_are_located() {
        let e = RunConfig::parse("[params]\nalpah = 0.5\n", "c").unwrap_err();
        assert_eq!(e.diagnostics[0].line, Some(2));
        assert!(e.to_string().contains("alpah"));
        let e = RunConfig::parse("[grid]\nn = \n", "c").unwrap_err();
        assert_eq!(e.diagnostics[0].line, Some(2));
    }

    #[test]
    fn default_growth_by_kind() {
        let mut c = RunConfig::default();
        assert_eq!(c.classical_growth(), Some(GrowthKind::Bounded));
        c.damping.kind = DampingKind::KelvinVoigt;
        assert_eq!(c.classical_growth(), Some(GrowthKind::Exponential));
        c.decay.classical_growth = Some(GrowthKind::Bounded);
        assert_eq!(c.classical_growth(), Some(GrowthKind::Bounded));
    }
}
