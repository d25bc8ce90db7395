//! Experiment configuration files.
//!
//! A config is a TOML document with a few top-level keys and one table per
//! experiment. Unknown keys anywhere are rejected.

use std::fmt;
use std::path::Path;

use qst_core::{Sampler, Spin, ThermalChoice};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Fig2,
    Fig3a,
    Fig3b,
    VerifyEffective,
    Sweep,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Fig2 => "fig2",
            Kind::Fig3a => "fig3a",
            Kind::Fig3b => "fig3b",
            Kind::VerifyEffective => "verify-effective",
            Kind::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerName {
    #[default]
    FubiniStudy,
    Hurwitz,
}

impl From<SamplerName> for Sampler {
    fn from(s: SamplerName) -> Self {
        match s {
            SamplerName::FubiniStudy => Sampler::FubiniStudy,
            SamplerName::Hurwitz => Sampler::Hurwitz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalName {
    BusOnly,
    #[default]
    BusPlusField,
}

impl From<ThermalName> for ThermalChoice {
    fn from(t: ThermalName) -> Self {
        match t {
            ThermalName::BusOnly => ThermalChoice::BusOnly,
            ThermalName::BusPlusField => ThermalChoice::BusPlusField,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fig2: Option<Fig2Config>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fig3a: Option<Fig3aConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fig3b: Option<Fig3bConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

/// Average fidelity against `S` for a few `(bus_z, reg_z)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig2Config {
    pub bus_sites: usize,
    pub levels: usize,
    pub reg_xy: f64,
    pub spins: Vec<f64>,
    /// `[bus_z, reg_z]` pairs, at most three.
    pub z_couplings: Vec<[f64; 2]>,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Fig2Config {
            bus_sites: 3,
            levels: 3,
            reg_xy: 0.1,
            spins: (1..=10).map(f64::from).collect(),
            z_couplings: vec![[0.1, 0.1], [0.5, 0.1], [1.0, 0.1]],
        }
    }
}

/// Temperature sweep at fixed `S` for several `reg_z`; `h = reg_z·S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3aConfig {
    pub bus_sites: usize,
    pub levels: usize,
    pub reg_xy: f64,
    pub bus_z: f64,
    pub spin: f64,
    pub reg_z: Vec<f64>,
    /// Temperatures in units of `reg_xy`.
    pub temperatures: Vec<f64>,
    pub thermal: ThermalName,
}

impl Default for Fig3aConfig {
    fn default() -> Self {
        Fig3aConfig {
            bus_sites: 1,
            levels: 3,
            reg_xy: 0.1,
            bus_z: 0.0,
            spin: 3.0,
            reg_z: vec![0.05, 0.1, 0.2],
            temperatures: default_temperatures(),
            thermal: ThermalName::default(),
        }
    }
}

/// Temperature sweep for several `S` with `reg_z = reg_xy`; `h = reg_z·S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3bConfig {
    pub bus_sites: usize,
    pub levels: usize,
    pub reg_xy: f64,
    pub bus_z: f64,
    pub spins: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub thermal: ThermalName,
}

impl Default for Fig3bConfig {
    fn default() -> Self {
        Fig3bConfig {
            bus_sites: 1,
            levels: 3,
            reg_xy: 0.1,
            bus_z: 0.0,
            spins: vec![2.0, 3.0, 4.0],
            temperatures: default_temperatures(),
            thermal: ThermalName::default(),
        }
    }
}

fn default_temperatures() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
}

/// Full-model check of the ideal swap over `(N, S, reg_xy)` grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub bus_sites: Vec<usize>,
    pub spins: Vec<f64>,
    /// `reg_xy` values (ratios to the bus coupling).
    pub ratios: Vec<f64>,
    pub levels: usize,
    pub bus_z: f64,
    pub reg_z: f64,
    /// Points with `|t_κ| / gap` below this are treated as resonant.
    pub threshold: f64,
    /// Largest accepted `1 − F` at resonant points.
    pub tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            bus_sites: vec![3, 7],
            spins: vec![5.0],
            ratios: vec![0.01, 0.3],
            levels: 2,
            bus_z: 0.0,
            reg_z: 0.0,
            threshold: 0.1,
            tolerance: 1e-3,
        }
    }
}

/// Cartesian grid over every chain parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub bus_sites: Vec<usize>,
    pub spins: Vec<f64>,
    pub levels: Vec<usize>,
    pub reg_xy: Vec<f64>,
    pub bus_z: Vec<f64>,
    pub reg_z: Vec<f64>,
    pub field_offset: Vec<f64>,
    /// Empty for a vacuum bus, otherwise temperatures in units of `reg_xy`.
    pub temperatures: Vec<f64>,
    pub thermal: ThermalName,
    /// Evolution time; the optimal time when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            bus_sites: vec![3],
            spins: vec![1.0, 2.0],
            levels: vec![2],
            reg_xy: vec![0.1],
            bus_z: vec![0.5],
            reg_z: vec![0.5],
            field_offset: vec![0.0],
            temperatures: vec![],
            thermal: ThermalName::default(),
            time: None,
        }
    }
}

/// A config problem, located in the source when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.field.is_empty()) {
            (Some(l), false) => write!(f, "line {l}: `{}`: {}", self.field, self.message),
            (Some(l), true) => write!(f, "line {l}: {}", self.message),
            (None, false) => write!(f, "`{}`: {}", self.field, self.message),
            (None, true) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn at(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into(), line: None }
    }
}

pub fn parse(src: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(src).map_err(|e| {
        let line = e.span().map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1);
        ConfigError { field: String::new(), message: e.message().trim().to_string(), line }
    })?;
    cfg.validate().map_err(|mut e| {
        e.line = locate(src, &e.field);
        e
    })?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::at("", format!("cannot read {}: {e}", path.display())))?;
    parse(&src)
}

/// Line of `key` inside `[table]` for a dotted field path like
/// `fig2.spins[3]`.
fn locate(src: &str, field: &str) -> Option<usize> {
    let path = field.split('[').next()?;
    let (table, key) = match path.rsplit_once('.') {
        Some((t, k)) => (Some(t), k),
        None => (None, path),
    };
    let mut current: Option<&str> = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(h.trim());
            continue;
        }
        let Some((k, _)) = line.split_once('=') else { continue };
        if k.trim() == key && current == table {
            return Some(i + 1);
        }
    }
    table.and_then(|t| src.lines().position(|l| l.trim() == format!("[{t}]")).map(|i| i + 1))
}

fn nonempty<T>(field: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        return Err(ConfigError::at(field, "grid must be non-empty"));
    }
    Ok(())
}

fn spin(field: &str, s: f64) -> Result<Spin, ConfigError> {
    Spin::new(s).map_err(|_| ConfigError::at(field, format!("{s} is not a positive multiple of 1/2")))
}

fn positive(field: &str, x: f64) -> Result<(), ConfigError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(ConfigError::at(field, format!("{x} must be positive")));
    }
    Ok(())
}

fn non_negative(field: &str, x: f64) -> Result<(), ConfigError> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(ConfigError::at(field, format!("{x} must be non-negative")));
    }
    Ok(())
}

fn odd_bus(field: &str, n: usize) -> Result<(), ConfigError> {
    if n.is_multiple_of(2) {
        return Err(ConfigError::at(field, format!("bus length {n} must be odd")));
    }
    Ok(())
}

fn levels(field: &str, d: usize, s: Spin) -> Result<(), ConfigError> {
    if d < 2 || d > s.levels() {
        return Err(ConfigError::at(field, format!("{d} levels do not fit a spin-{} site", s.value())));
    }
    Ok(())
}

fn each<T: Copy>(field: &str, v: &[T], f: impl Fn(&str, T) -> Result<(), ConfigError>) -> Result<(), ConfigError> {
    nonempty(field, v)?;
    v.iter().enumerate().try_for_each(|(i, &x)| f(&format!("{field}[{i}]"), x))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.samples == Some(0) {
            return Err(ConfigError::at("samples", "must be at least 1"));
        }
        if let Some(c) = &self.fig2 {
            odd_bus("fig2.bus_sites", c.bus_sites)?;
            positive("fig2.reg_xy", c.reg_xy)?;
            each("fig2.spins", &c.spins, |f, s| levels("fig2.levels", c.levels, spin(f, s)?))?;
            nonempty("fig2.z_couplings", &c.z_couplings)?;
            if c.z_couplings.len() > 3 {
                return Err(ConfigError::at("fig2.z_couplings", "at most three pairs"));
            }
            each("fig2.z_couplings", &c.z_couplings, |f, [a, b]| {
                non_negative(f, a)?;
                non_negative(f, b)
            })?;
        }
        if let Some(c) = &self.fig3a {
            odd_bus("fig3a.bus_sites", c.bus_sites)?;
            positive("fig3a.reg_xy", c.reg_xy)?;
            non_negative("fig3a.bus_z", c.bus_z)?;
            levels("fig3a.levels", c.levels, spin("fig3a.spin", c.spin)?)?;
            each("fig3a.reg_z", &c.reg_z, non_negative)?;
            each("fig3a.temperatures", &c.temperatures, non_negative)?;
        }
        if let Some(c) = &self.fig3b {
            odd_bus("fig3b.bus_sites", c.bus_sites)?;
            positive("fig3b.reg_xy", c.reg_xy)?;
            non_negative("fig3b.bus_z", c.bus_z)?;
            each("fig3b.spins", &c.spins, |f, s| levels("fig3b.levels", c.levels, spin(f, s)?))?;
            each("fig3b.temperatures", &c.temperatures, non_negative)?;
        }
        if let Some(c) = &self.verify {
            each("verify.bus_sites", &c.bus_sites, odd_bus)?;
            each("verify.spins", &c.spins, |f, s| levels("verify.levels", c.levels, spin(f, s)?))?;
            each("verify.ratios", &c.ratios, positive)?;
            non_negative("verify.bus_z", c.bus_z)?;
            non_negative("verify.reg_z", c.reg_z)?;
            positive("verify.threshold", c.threshold)?;
            positive("verify.tolerance", c.tolerance)?;
        }
        if let Some(c) = &self.sweep {
            each("sweep.bus_sites", &c.bus_sites, odd_bus)?;
            nonempty("sweep.levels", &c.levels)?;
            each("sweep.spins", &c.spins, |f, s| {
                let s = spin(f, s)?;
                c.levels.iter().try_for_each(|&d| levels("sweep.levels", d, s))
            })?;
            each("sweep.reg_xy", &c.reg_xy, positive)?;
            each("sweep.bus_z", &c.bus_z, non_negative)?;
            each("sweep.reg_z", &c.reg_z, non_negative)?;
            each("sweep.field_offset", &c.field_offset, non_negative)?;
            c.temperatures.iter().enumerate().try_for_each(|(i, &t)| non_negative(&format!("sweep.temperatures[{i}]"), t))?;
            if let Some(t) = c.time {
                non_negative("sweep.time", t)?;
            }
        }
        Ok(())
    }

    /// TOML text of the config, used for the CSV header echo.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig {
            experiment: Some(Kind::Fig2),
            seed: Some(7),
            samples: Some(100),
            sampler: Some(SamplerName::Hurwitz),
            fig2: Some(Fig2Config::default()),
            fig3a: Some(Fig3aConfig::default()),
            fig3b: Some(Fig3bConfig::default()),
            verify: Some(VerifyConfig::default()),
            sweep: Some(SweepConfig::default()),
        };
        assert_eq!(parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let src = "seed = 1\n\n[fig2]\nspins = [1.0]\nomega = 3\n";
        let e = parse(src).unwrap_err();
        assert_eq!(e.line, Some(5));
        assert!(e.message.contains("omega"), "{e}");
    }

    #[test]
    fn validation_errors_point_at_the_key() {
        let src = "[fig2]\nbus_sites = 3\nspins = [1.0, 0.3]\n";
        let e = parse(src).unwrap_err();
        assert_eq!(e.field, "fig2.spins[1]");
        assert_eq!(e.line, Some(3));
        let e = parse("[verify]\nbus_sites = [3, 4]\n").unwrap_err();
        assert_eq!(e.field, "verify.bus_sites[1]");
        assert_eq!(e.line, Some(2));
        let e = parse("[fig3a]\nspin = 0.5\n").unwrap_err();
        assert_eq!(e.field, "fig3a.levels");
        let e = parse("samples = 0\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        let e = parse("[sweep]\nspins = []\n").unwrap_err();
        assert!(e.to_string().contains("non-empty"));
    }

    #[test]
    fn bad_types_and_names() {
        assert!(parse("experiment = \"fig4\"\n").is_err());
        assert!(parse("sampler = \"uniform\"\n").is_err());
        assert_eq!(parse("[fig2]\nspins = \"ten\"\n").unwrap_err().line, Some(2));
    }
}
