//! TOML run configuration.
//!
//! ```toml
//! name = "mathieu"
//!
//! [spec]
//! tau = "pi"            # number, or "pi", "2pi", "3pi/2", "pi/2"
//! hbar = 1.0
//! mass = { constant = 1.0 }
//! w_sq = { constant = 1.5, harmonics = [{ order = 1, cos = 0.2 }] }
//! force = { period_ratio = [3, 2], harmonics = [{ order = 1, cos = 0.3 }] }
//!
//! [solver]
//! tolerance = 1e-12
//!
//! [pair]
//! kind = "explicit"
//! initial = { u0 = 1.4142135623730951, udot0 = 0.0, v0 = 0.0, vdot0 = 0.7071067811865476 }
//! ```
//!
//! Harmonic orders count cycles per coefficient base period, which is `tau`
//! unless `period_ratio = [p, q]` sets it to `(p/q)·tau`.

use std::path::{Path, PathBuf};

use hannay_core::model::{Harmonic, OscillatorSpec, PeriodicFunction};
use hannay_core::numerics::OdeOptions;
use hannay_core::quantum::{ReportOptions, GRID_POINTS};
use serde::{Deserialize, Serialize};

use crate::error::KitError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub spec: SpecConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub pair: PairConfig,
    #[serde(default)]
    pub report: ReportConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// `tau` as a plain number or a multiple of `pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tau {
    Value(f64),
    Expr(String),
}

impl Tau {
    pub fn value(&self) -> Result<f64, KitError> {
        match self {
            Tau::Value(v) => Ok(*v),
            Tau::Expr(s) => parse_pi_multiple(s).ok_or_else(|| KitError::Config(format!("cannot read tau = {s:?}"))),
        }
    }
}

fn parse_pi_multiple(text: &str) -> Option<f64> {
    let s: String = text
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '*')
        .collect::<String>()
        .to_lowercase();
    let Some(at) = s.find("pi") else {
        return s.parse().ok();
    };
    let (head, tail) = (&s[..at], &s[at + 2..]);
    let coef: f64 = if head.is_empty() { 1.0 } else { head.parse().ok()? };
    let div: f64 = match tail {
        "" => 1.0,
        t => t.strip_prefix('/')?.parse().ok()?,
    };
    Some(coef * std::f64::consts::PI / div)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub tau: Tau,
    #[serde(default = "one")]
    pub hbar: f64,
    pub mass: Coefficient,
    pub w_sq: Coefficient,
    #[serde(default)]
    pub a: Coefficient,
    #[serde(default)]
    pub b: Coefficient,
    #[serde(default)]
    pub force: Coefficient,
    #[serde(default)]
    pub f: Coefficient,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    #[serde(default)]
    pub constant: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub harmonics: Vec<Harmonic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_ratio: Option<[u64; 2]>,
}

impl Coefficient {
    fn build(&self, tau: f64, name: &str) -> Result<PeriodicFunction, KitError> {
        let base = match self.period_ratio {
            None => tau,
            Some([p, q]) if p > 0 && q > 0 => tau * p as f64 / q as f64,
            Some(r) => return Err(KitError::Config(format!("{name}.period_ratio must be positive, got {r:?}"))),
        };
        Ok(PeriodicFunction {
            base_period: base,
            constant: self.constant,
            harmonics: self.harmonics.clone(),
        })
    }
}

impl SpecConfig {
    pub fn build(&self) -> Result<OscillatorSpec, KitError> {
        let tau = self.tau.value()?;
        Ok(OscillatorSpec {
            tau,
            mass: self.mass.build(tau, "mass")?,
            w_sq: self.w_sq.build(tau, "w_sq")?,
            a: self.a.build(tau, "a")?,
            b: self.b.build(tau, "b")?,
            force: self.force.build(tau, "force")?,
            f: self.f.build(tau, "f")?,
            hbar: self.hbar,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub t0: f64,
    /// Largest multiple of `tau` searched for a common period.
    pub period_cap: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            t0: 0.0,
            period_cap: hannay_core::floquet::DEFAULT_PERIOD_CAP,
        }
    }
}

impl SolverConfig {
    pub fn ode_options(&self) -> Result<OdeOptions, KitError> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(KitError::Config(format!("solver.tolerance out of range: {}", self.tolerance)));
        }
        Ok(OdeOptions::with_tolerance(self.tolerance))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairChoice {
    #[default]
    Canonical,
    Explicit,
}

impl std::str::FromStr for PairChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(PairChoice::Canonical),
            "explicit" => Ok(PairChoice::Explicit),
            other => Err(format!("unknown pair choice {other:?}")),
        }
    }
}

/// `u(t0), u̇(t0), v(t0), v̇(t0)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairInitial {
    pub u0: f64,
    pub udot0: f64,
    pub v0: f64,
    pub vdot0: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    #[serde(default)]
    pub kind: PairChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<PairInitial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    pub m_max: usize,
    pub grid_checks: bool,
    pub grid_points: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            m_max: 9,
            grid_checks: true,
            grid_points: GRID_POINTS,
        }
    }
}

impl ReportConfig {
    pub fn options(&self) -> Result<ReportOptions, KitError> {
        if self.m_max > hannay_core::numerics::MAX_HERMITE_ORDER - 1 {
            return Err(KitError::Config(format!("report.m_max too large: {}", self.m_max)));
        }
        if self.grid_points < 64 {
            return Err(KitError::Config("report.grid_points must be at least 64".into()));
        }
        Ok(ReportOptions {
            m_max: self.m_max,
            grid_checks: self.grid_checks,
            grid_points: self.grid_points,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub format: Format,
    /// Also write plot-ready CSV files.
    pub plot: bool,
    /// Rows per `tau′` in the trajectory CSV.
    pub plot_samples: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            format: Format::Json,
            plot: false,
            plot_samples: 256,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, KitError> {
        toml::from_str(text).map_err(|e| KitError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, KitError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KitError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Replace the number at a dotted path such as `spec.w_sq.constant` or
    /// `spec.w_sq.harmonics.0.cos`.
    pub fn with_value(&self, key: &str, value: f64) -> Result<Self, KitError> {
        let mut tree = toml::Value::try_from(self).map_err(|e| KitError::Config(e.to_string()))?;
        let mut node = &mut tree;
        let parts: Vec<&str> = key.split('.').collect();
        let bad = || KitError::Config(format!("no numeric field at {key:?}"));
        for (depth, part) in parts.iter().enumerate() {
            let last = depth + 1 == parts.len();
            node = match node {
                toml::Value::Table(t) => {
                    if last && !t.contains_key(*part) {
                        t.insert((*part).to_string(), toml::Value::Float(0.0));
                    }
                    t.get_mut(*part).ok_or_else(bad)?
                }
                toml::Value::Array(a) => {
                    let i: usize = part.parse().map_err(|_| bad())?;
                    a.get_mut(i).ok_or_else(bad)?
                }
                _ => return Err(bad()),
            };
        }
        match node {
            toml::Value::Float(_) | toml::Value::Integer(_) | toml::Value::String(_) => {
                *node = if node.is_integer() && value.fract() == 0.0 {
                    toml::Value::Integer(value as i64)
                } else {
                    toml::Value::Float(value)
                };
            }
            _ => return Err(bad()),
        }
        tree.try_into().map_err(|e: toml::de::Error| KitError::Config(e.to_string()))
    }
}
