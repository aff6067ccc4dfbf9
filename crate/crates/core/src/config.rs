//! Flat `key = value` configuration documents.
//!
//! Keys are the [`ModelParams`] field names plus the simulation controls
//! `t_end`, `dt`, `seed`, `record_stride` and the initial state `omega0`,
//! `e0`, `m0`, `ell0`, `s0`, `mu0`. Blank lines and text after `#` are
//! ignored. Missing keys keep their defaults; a missing `mu0` starts the
//! trend indicator at `r_l`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::params::{default_params, validate, ConfigError, ModelParams, SimConfig, Violation};

/// Simulation-control keys, in the order [`serialize`] writes them.
pub const SIM_KEYS: &[&str] = &[
    "t_end",
    "dt",
    "seed",
    "record_stride",
    "omega0",
    "e0",
    "m0",
    "ell0",
    "s0",
    "mu0",
];

/// Problem with a single `key = value` assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum SettingError {
    UnknownKey(String),
    BadValue { key: String, value: String },
}

impl fmt::Display for SettingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SettingError::UnknownKey(k) => write!(f, "unknown key '{k}'"),
            SettingError::BadValue { key, value } => {
                write!(f, "cannot parse '{value}' as a value for '{key}'")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadError {
    Syntax { line: usize, text: String },
    Setting { line: usize, error: SettingError },
    Duplicate { line: usize, key: String },
    Invalid(Invalid),
}

/// All problems of a parsed but inadmissible configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Invalid {
    pub violations: Vec<Violation>,
    pub config: Option<ConfigError>,
}

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.violations {
            if !first {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        if let Some(c) = &self.config {
            if !first {
                f.write_str("; ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Syntax { line, text } => {
                write!(f, "line {line}: expected 'key = value', got '{text}'")
            }
            LoadError::Setting { line, error } => write!(f, "line {line}: {error}"),
            LoadError::Duplicate { line, key } => write!(f, "line {line}: '{key}' set twice"),
            LoadError::Invalid(inv) => write!(f, "invalid configuration: {inv}"),
        }
    }
}

fn parse_value<T: core::str::FromStr>(key: &str, value: &str) -> Result<T, SettingError> {
    value.parse().map_err(|_| SettingError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

/// Applies one assignment. Values are parsed but not range-checked.
pub fn apply_setting(
    p: &mut ModelParams,
    cfg: &mut SimConfig,
    key: &str,
    value: &str,
) -> Result<(), SettingError> {
    let value = value.trim();
    match key {
        "t_end" => cfg.t_end = parse_value(key, value)?,
        "dt" => cfg.dt = parse_value(key, value)?,
        "seed" => cfg.seed = parse_value(key, value)?,
        "record_stride" => cfg.record_stride = parse_value(key, value)?,
        "omega0" => cfg.init_econ.omega = parse_value(key, value)?,
        "e0" => cfg.init_econ.e = parse_value(key, value)?,
        "m0" => cfg.init_econ.m = parse_value(key, value)?,
        "ell0" => cfg.init_econ.ell = parse_value(key, value)?,
        "s0" => cfg.init_s = parse_value(key, value)?,
        "mu0" => cfg.init_mu = Some(parse_value(key, value)?),
        _ => {
            let v: f64 = match ModelParams::range_of(key) {
                Some(_) => parse_value(key, value)?,
                None => return Err(SettingError::UnknownKey(key.to_string())),
            };
            p.set(key, v)
                .map_err(|_| SettingError::UnknownKey(key.to_string()))?;
        }
    }
    Ok(())
}

/// Range and consistency checks of a complete configuration.
pub fn check(p: &ModelParams, cfg: &SimConfig) -> Result<(), Invalid> {
    let inv = Invalid {
        violations: validate(p),
        config: cfg.check().err(),
    };
    if inv.violations.is_empty() && inv.config.is_none() {
        Ok(())
    } else {
        Err(inv)
    }
}

/// Parses assignments without the final admissibility check, starting from
/// the given values.
pub fn apply_document(
    text: &str,
    p: &mut ModelParams,
    cfg: &mut SimConfig,
) -> Result<(), LoadError> {
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| LoadError::Syntax {
            line,
            text: body.to_string(),
        })?;
        let key = key.trim();
        if key.is_empty() || value.trim().is_empty() {
            return Err(LoadError::Syntax {
                line,
                text: body.to_string(),
            });
        }
        apply_setting(p, cfg, key, value).map_err(|error| LoadError::Setting { line, error })?;
        if seen.iter().any(|k| k == key) {
            return Err(LoadError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        seen.push(key.to_string());
    }
    Ok(())
}

/// Parses a configuration document on top of the defaults and checks it.
pub fn load_config(text: &str) -> Result<(ModelParams, SimConfig), LoadError> {
    let mut p = default_params();
    let mut cfg = SimConfig::default();
    apply_document(text, &mut p, &mut cfg)?;
    check(&p, &cfg).map_err(LoadError::Invalid)?;
    Ok((p, cfg))
}

/// Writes every key. Floats use the shortest representation that parses
/// back to the same value.
pub fn serialize(p: &ModelParams, cfg: &SimConfig) -> String {
    let mut out = String::new();
    for &name in ModelParams::FIELDS {
        let _ = writeln!(out, "{name} = {:?}", p.get(name).unwrap_or(f64::NAN));
    }
    let _ = writeln!(out, "t_end = {:?}", cfg.t_end);
    let _ = writeln!(out, "dt = {:?}", cfg.dt);
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "record_stride = {}", cfg.record_stride);
    let _ = writeln!(out, "omega0 = {:?}", cfg.init_econ.omega);
    let _ = writeln!(out, "e0 = {:?}", cfg.init_econ.e);
    let _ = writeln!(out, "m0 = {:?}", cfg.init_econ.m);
    let _ = writeln!(out, "ell0 = {:?}", cfg.init_econ.ell);
    let _ = writeln!(out, "s0 = {:?}", cfg.init_s);
    match cfg.init_mu {
        Some(mu) => {
            let _ = writeln!(out, "mu0 = {mu:?}");
        }
        None => out.push_str("# mu0 follows r_l\n"),
    }
    out
}

/// `serialize` with every line prefixed by `prefix`.
pub fn serialize_prefixed(p: &ModelParams, cfg: &SimConfig, prefix: &str) -> String {
    serialize(p, cfg)
        .lines()
        .map(|l| format!("{prefix}{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_document_gives_defaults() {
        let (p, cfg) = load_config("").unwrap();
        assert_eq!(p, default_params());
        assert_eq!(cfg, SimConfig::default());
        let (p2, _) = load_config("# only a comment\n\n   \n").unwrap();
        assert_eq!(p2, p);
    }

    #[test]
    fn single_override() {
        let (p, cfg) = load_config("sigma = 0.25\n").unwrap();
        let mut expected = default_params();
        expected.sigma = 0.25;
        assert_eq!(p, expected);
        assert_eq!(cfg, SimConfig::default());
    }

    #[test]
    fn typo_is_named() {
        let err = load_config("sigma = 0.1\nsgima = 0.25\n").unwrap_err();
        assert_eq!(
            err,
            LoadError::Setting {
                line: 2,
                error: SettingError::UnknownKey("sgima".into())
            }
        );
        assert!(err.to_string().contains("sgima"));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = load_config("\n\nsigma 0.1\n").unwrap_err();
        assert!(matches!(err, LoadError::Syntax { line: 3, .. }));
        let err = load_config("sigma = abc").unwrap_err();
        assert!(matches!(
            err,
            LoadError::Setting {
                line: 1,
                error: SettingError::BadValue { .. }
            }
        ));
        let err = load_config("seed = -1").unwrap_err();
        assert!(matches!(err, LoadError::Setting { line: 1, .. }));
        let err = load_config("sigma = 0.1\nsigma = 0.2").unwrap_err();
        assert!(matches!(err, LoadError::Duplicate { line: 2, .. }));
    }

    #[test]
    fn validation_aggregates_everything() {
        let err = load_config("j_up = 1.0\nr_l = 0.25\ndt = 0").unwrap_err();
        let LoadError::Invalid(inv) = err else {
            panic!("expected validation failure")
        };
        let fields: Vec<_> = inv.violations.iter().map(|v| v.field).collect();
        assert_eq!(fields, ["r_l", "j_up"]);
        assert!(inv.config.is_some());
    }

    #[test]
    fn comments_and_sim_keys() {
        let doc = "seed = 42 # trailing\nmu0 = 0.05\nomega0=0.7\nrecord_stride = 5\n";
        let (_, cfg) = load_config(doc).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.init_mu, Some(0.05));
        assert_eq!(cfg.init_econ.omega, 0.7);
        assert_eq!(cfg.record_stride, 5);
    }

    #[test]
    fn serialized_defaults_reload() {
        let p = default_params();
        let cfg = SimConfig::default();
        let text = serialize(&p, &cfg);
        assert_eq!(load_config(&text).unwrap(), (p, cfg));
        assert!(serialize_prefixed(&p, &cfg, "# ").lines().all(|l| l.starts_with("# ")));
    }

    proptest! {
        #[test]
        fn round_trip(
            sigma in 0.0..1.0f64,
            j_up in 0.001..0.999f64,
            r_l in 0.0..0.2f64,
            eta_mu in 1e-3..10.0f64,
            rho_2 in 0.0..20.0f64,
            seed in any::<u64>(),
            dt in 1e-4..0.1f64,
            mu0 in proptest::option::of(-1.0..1.0f64),
            stride in 1usize..100,
        ) {
            let doc = format!(
                "sigma = {sigma:?}\nj_up = {j_up:?}\nr_l = {r_l:?}\neta_mu = {eta_mu:?}\n\
                 rho_2 = {rho_2:?}\nseed = {seed}\ndt = {dt:?}\nrecord_stride = {stride}\n{}",
                mu0.map(|m| format!("mu0 = {m:?}\n")).unwrap_or_default()
            );
            let first = load_config(&doc).unwrap();
            let again = load_config(&serialize(&first.0, &first.1)).unwrap();
            prop_assert_eq!(first, again);
        }
    }
}
