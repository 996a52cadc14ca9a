//! `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys, duplicates, type errors
//! and missing required keys are all collected and reported together.

use std::collections::BTreeMap;
use std::fmt;

use crate::analysis::{RevivalConfig, SeparationConfig};
use crate::lattice::ModelParams;
use crate::measures::{LogBase, Measure};
use crate::sweep::{SweepError, UniformAxis};

pub const REQUIRED_KEYS: [&str; 7] = ["N", "gamma", "J0", "J1", "h0", "h1", "T"];

pub const OPTIONAL_KEYS: [&str; 18] = [
    "t_min",
    "t_max",
    "dt",
    "h1_min",
    "h1_max",
    "dh1",
    "sizes",
    "scan",
    "scan_measure",
    "t_max_per_site",
    "relax_fraction",
    "window_fraction",
    "threshold_k",
    "peak_fraction",
    "separation_tol",
    "log_base",
    "verify_points",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Syntax { line: usize, text: String },
    UnknownKey { line: usize, key: String },
    DuplicateKey { line: usize, key: String },
    Missing(&'static str),
    Invalid { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, text } => {
                write!(f, "line {line}: expected `key = value`, got `{text}`")
            }
            ConfigError::UnknownKey { line, key } => write!(f, "line {line}: unknown key `{key}`"),
            ConfigError::DuplicateKey { line, key } => {
                write!(f, "line {line}: duplicate key `{key}`")
            }
            ConfigError::Missing(key) => write!(f, "missing required key `{key}`"),
            ConfigError::Invalid { key, message } => write!(f, "{key}: {message}"),
        }
    }
}

/// Every problem found in one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    Revival,
    Separation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: f64,
    pub h1_min: f64,
    pub h1_max: f64,
    pub dh1: f64,
    pub sizes: Vec<usize>,
    pub scan: ScanKind,
    pub scan_measure: Measure,
    pub t_max_per_site: f64,
    pub revival: RevivalConfig,
    pub separation_tol: f64,
    pub log_base: LogBase,
    pub verify_points: usize,
    pub seed: u64,
}

impl RunConfig {
    /// Time axis for `evolve` and `map`: [t_min, t_max], defaulting to [0, t_max_per_site · N].
    pub fn series_axis(&self) -> Result<UniformAxis, SweepError> {
        let n = self.params.n as f64;
        let lo = self.t_min.unwrap_or(0.0);
        let hi = self.t_max.unwrap_or(self.t_max_per_site * n);
        UniformAxis::with_max_step(lo, hi, self.dt)
    }

    /// Time axis for `critical-scan`: defaults to [0.05 N, 0.2 N], after the initial
    /// transient and before the first finite-size revival.
    pub fn critical_axis(&self) -> Result<UniformAxis, SweepError> {
        let n = self.params.n as f64;
        let lo = self.t_min.unwrap_or(0.05 * n);
        let hi = self.t_max.unwrap_or(0.2 * n);
        UniformAxis::with_max_step(lo, hi, self.dt)
    }

    pub fn field_axis(&self) -> Result<UniformAxis, SweepError> {
        UniformAxis::with_max_step(self.h1_min, self.h1_max, self.dh1)
    }

    pub fn separation(&self) -> SeparationConfig {
        SeparationConfig {
            tol: self.separation_tol,
            detector: self.revival,
        }
    }
}

fn split_lines(text: &str) -> (Vec<(usize, String, String)>, Vec<ConfigError>) {
    let mut pairs = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()))
            }
            _ => errors.push(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            }),
        }
    }
    (pairs, errors)
}

fn known(key: &str) -> bool {
    REQUIRED_KEYS.contains(&key) || OPTIONAL_KEYS.contains(&key)
}

struct Fields<'a> {
    map: &'a BTreeMap<String, String>,
    errors: Vec<ConfigError>,
}

impl Fields<'_> {
    fn invalid(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError::Invalid {
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn float(&mut self, key: &'static str, default: Option<f64>) -> Option<f64> {
        match self.map.get(key) {
            None => {
                if default.is_none() && REQUIRED_KEYS.contains(&key) {
                    self.errors.push(ConfigError::Missing(key));
                }
                default
            }
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Some(x),
                _ => {
                    self.invalid(key, format!("expected a finite number, got `{v}`"));
                    None
                }
            },
        }
    }

    fn positive(&mut self, key: &'static str, default: f64) -> f64 {
        let x = self.float(key, Some(default)).unwrap_or(default);
        if x <= 0.0 {
            self.invalid(key, "must be > 0");
        }
        x
    }

    fn unsigned(&mut self, key: &'static str, default: u64) -> u64 {
        match self.map.get(key) {
            None => default,
            Some(v) => v.parse::<u64>().unwrap_or_else(|_| {
                self.invalid(key, format!("expected a non-negative integer, got `{v}`"));
                default
            }),
        }
    }

    fn size(&mut self, key: &str, text: &str) -> Option<usize> {
        match text.trim().parse::<usize>() {
            Ok(n) if n % 2 == 0 && n >= 4 => Some(n),
            Ok(n) if n % 2 == 0 => {
                self.invalid(key, format!("must be >= 4, got {n}"));
                None
            }
            _ => {
                self.invalid(key, format!("expected even integer, got `{}`", text.trim()));
                None
            }
        }
    }
}

/// Parses configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_with_overrides(text, &[])
}

/// Parses configuration text, then applies `key=value` overrides on top.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[String],
) -> Result<RunConfig, ConfigErrors> {
    let (pairs, mut errors) = split_lines(text);
    let mut map = BTreeMap::new();
    for (line, key, value) in pairs {
        if !known(&key) {
            errors.push(ConfigError::UnknownKey { line, key });
        } else if map.insert(key.clone(), value).is_some() {
            errors.push(ConfigError::DuplicateKey { line, key });
        }
    }
    for (i, ov) in overrides.iter().enumerate() {
        match ov.split_once('=') {
            Some((k, v)) if known(k.trim()) => {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
            Some((k, _)) => errors.push(ConfigError::UnknownKey {
                line: 0,
                key: k.trim().to_string(),
            }),
            None => errors.push(ConfigError::Syntax {
                line: i + 1,
                text: format!("--set {ov}"),
            }),
        }
    }
    let mut f = Fields { map: &map, errors };

    let n = match map.get("N") {
        None => {
            f.errors.push(ConfigError::Missing("N"));
            None
        }
        Some(v) => f.size("N", v),
    };
    let gamma = f.float("gamma", None);
    let j0 = f.float("J0", None);
    let j1 = f.float("J1", None);
    let h0 = f.float("h0", None);
    let h1 = f.float("h1", None);
    let temperature = f.float("T", None);
    if temperature.is_some_and(|x| x < 0.0) {
        f.invalid("T", "must be ≥ 0");
    }

    let t_min = f.float("t_min", None);
    let t_max = f.float("t_max", None);
    let dt = f.positive("dt", 0.05);
    let h1_min = f.float("h1_min", Some(0.05)).unwrap_or(0.05);
    let h1_max = f.float("h1_max", Some(2.0)).unwrap_or(2.0);
    let dh1 = f.positive("dh1", 0.01);
    let t_max_per_site = f.positive("t_max_per_site", 0.5);
    let separation_tol = f.positive("separation_tol", 1e-6);
    let revival = RevivalConfig {
        relax_fraction: f.float("relax_fraction", Some(0.05)).unwrap_or(0.05),
        window_fraction: f.float("window_fraction", Some(0.4)).unwrap_or(0.4),
        threshold_k: f.positive("threshold_k", 5.0),
        peak_fraction: f.float("peak_fraction", Some(0.1)).unwrap_or(0.1),
    };
    if !(0.0..1.0).contains(&revival.relax_fraction)
        || !(revival.relax_fraction < revival.window_fraction && revival.window_fraction < 1.0)
    {
        f.invalid(
            "window_fraction",
            "need 0 <= relax_fraction < window_fraction < 1",
        );
    }

    let sizes = match map.get("sizes") {
        None => vec![100, 200, 300, 400, 500, 600],
        Some(v) => {
            let parsed: Vec<Option<usize>> = v.split(',').map(|s| f.size("sizes", s)).collect();
            parsed.into_iter().flatten().collect()
        }
    };
    let scan = match map.get("scan").map(String::as_str) {
        None | Some("revival") => ScanKind::Revival,
        Some("separation") => ScanKind::Separation,
        Some(other) => {
            f.invalid(
                "scan",
                format!("expected `revival` or `separation`, got `{other}`"),
            );
            ScanKind::Revival
        }
    };
    let scan_measure = match map.get("scan_measure") {
        None => Measure::Rec,
        Some(v) => v.parse::<Measure>().unwrap_or_else(|e| {
            f.invalid("scan_measure", e);
            Measure::Rec
        }),
    };
    let log_base = match map.get("log_base").map(String::as_str) {
        None | Some("2") => LogBase::Two,
        Some("e") => LogBase::E,
        Some(other) => {
            f.invalid("log_base", format!("expected `2` or `e`, got `{other}`"));
            LogBase::Two
        }
    };
    let verify_points = f.unsigned("verify_points", 1000) as usize;
    let seed = f.unsigned("seed", 1);

    if !f.errors.is_empty() {
        return Err(ConfigErrors(f.errors));
    }
    let params = ModelParams::new(
        n.unwrap(),
        gamma.unwrap(),
        j0.unwrap(),
        j1.unwrap(),
        h0.unwrap(),
        h1.unwrap(),
        temperature.unwrap(),
    )
    .map_err(|e| {
        ConfigErrors(vec![ConfigError::Invalid {
            key: "params".into(),
            message: e.to_string(),
        }])
    })?;
    Ok(RunConfig {
        params,
        t_min,
        t_max,
        dt,
        h1_min,
        h1_max,
        dh1,
        sizes,
        scan,
        scan_measure,
        t_max_per_site,
        revival,
        separation_tol,
        log_base,
        verify_points,
        seed,
    })
}
