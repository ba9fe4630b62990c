//! Experiment configuration.
//!
//! A config file is a TOML document with one table per experiment:
//!
//! ```toml
//! n_trials = 20000          # top-level keys are defaults for every table
//!
//! [distance]
//! sweep = "x0"
//! start = 0.5
//! stop = "R_T"              # the association radius of the resolved params
//! step = 0.5
//! modes = ["analytic", "mc-full"]
//!
//! [threshold]
//! sweep = "tau_dB"
//! values = [-5, 0, 5, 10]
//! x0 = 5.0
//! lambda_A = 0.05
//! los_conditioned = true
//! ```
//!
//! Unset parameters take the reference values of [`ConfigParams::default`].
//! Powers and gains are given in dB here and converted to linear units when
//! [`SystemParams`] are built.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use toml::{Table, Value};

use crate::antenna::AntennaPattern;
use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::sim::{BlockageCoupling, Mode};
use crate::{db_to_linear, dbm_to_watts};

/// Base seed used when neither the config, the command line nor
/// `TERASCOPE_SEED` provides one.
pub const DEFAULT_SEED: u64 = 20_240_611;

pub const DEFAULT_TRIALS: u64 = 100_000;

pub const MIN_MC_TRIALS: u64 = 1000;

/// System parameters in configuration units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigParams {
    pub h_a: f64,
    pub h_u: f64,
    pub h_b: f64,
    pub r_b: f64,
    pub frequency_hz: f64,
    /// Recorded for completeness; the noise power is given directly.
    pub bandwidth_hz: f64,
    pub absorption: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub ap_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub tau_db: f64,
}

impl Default for ConfigParams {
    fn default() -> Self {
        Self {
            h_a: 3.0,
            h_u: 1.0,
            h_b: 1.5,
            r_b: 0.3,
            frequency_hz: 1.07e12,
            bandwidth_hz: 10e9,
            absorption: 0.192,
            tx_power_dbm: 20.0,
            noise_dbm: -74.4,
            ap_gain_dbi: 17.5,
            ue_gain_dbi: 12.5,
            lambda_a: 0.1,
            lambda_b: 0.2,
            tau_db: 3.0,
        }
    }
}

impl ConfigParams {
    pub const KEYS: [&'static str; 14] = [
        "h_A",
        "h_U",
        "h_B",
        "r_B",
        "f_Hz",
        "bandwidth_Hz",
        "K",
        "P_T_dBm",
        "sigma2_dBm",
        "G_A_dBi",
        "G_U_dBi",
        "lambda_A",
        "lambda_B",
        "tau_dB",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "h_A" => &mut self.h_a,
            "h_U" => &mut self.h_u,
            "h_B" => &mut self.h_b,
            "r_B" => &mut self.r_b,
            "f_Hz" => &mut self.frequency_hz,
            "bandwidth_Hz" => &mut self.bandwidth_hz,
            "K" => &mut self.absorption,
            "P_T_dBm" => &mut self.tx_power_dbm,
            "sigma2_dBm" => &mut self.noise_dbm,
            "G_A_dBi" => &mut self.ap_gain_dbi,
            "G_U_dBi" => &mut self.ue_gain_dbi,
            "lambda_A" => &mut self.lambda_a,
            "lambda_B" => &mut self.lambda_b,
            "tau_dB" => &mut self.tau_db,
            _ => return None,
        })
    }

    /// Value of the parameter named `key`, if it is one.
    pub fn get(&self, key: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(key).map(|v| *v)
    }

    /// Sets the parameter named `key`; returns `false` for unknown keys.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        self.slot(key).map(|v| *v = value).is_some()
    }

    /// Linear-unit parameters with square beams derived from the gains.
    pub fn to_system_params(&self) -> Result<SystemParams> {
        let p = SystemParams {
            h_a: self.h_a,
            h_u: self.h_u,
            h_b: self.h_b,
            r_b: self.r_b,
            frequency: self.frequency_hz,
            absorption: self.absorption,
            tx_power: dbm_to_watts(self.tx_power_dbm),
            noise_power: dbm_to_watts(self.noise_dbm),
            ap_pattern: AntennaPattern::square_dbi(self.ap_gain_dbi)?,
            ue_pattern: AntennaPattern::square_dbi(self.ue_gain_dbi)?,
            lambda_a: self.lambda_a,
            lambda_b: self.lambda_b,
            tau: db_to_linear(self.tau_db),
        };
        p.validate()?;
        Ok(p)
    }
}

/// The swept quantity of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    X0,
    TauDb,
    LambdaA,
    LambdaB,
    ApGainDbi,
    UeGainDbi,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 6] = [
        Self::X0,
        Self::TauDb,
        Self::LambdaA,
        Self::LambdaB,
        Self::ApGainDbi,
        Self::UeGainDbi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::X0 => "x0",
            Self::TauDb => "tau_dB",
            Self::LambdaA => "lambda_A",
            Self::LambdaB => "lambda_B",
            Self::ApGainDbi => "G_A_dBi",
            Self::UeGainDbi => "G_U_dBi",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown sweep variable `{s}`")))
    }
}

/// One output series of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMode {
    Analytic,
    Mc(Mode),
}

impl CurveMode {
    pub fn name(self) -> String {
        match self {
            Self::Analytic => "analytic".to_owned(),
            Self::Mc(m) => format!("mc-{m}"),
        }
    }
}

impl fmt::Display for CurveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for CurveMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "analytic" {
            return Ok(Self::Analytic);
        }
        s.strip_prefix("mc-")
            .and_then(|m| m.parse().ok())
            .map(Self::Mc)
            .ok_or_else(|| Error::Parse(format!("unknown curve mode `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub params: ConfigParams,
    /// Link distance when the sweep is not over `x0`.
    pub x0: f64,
    pub sweep: Sweep,
    pub modes: Vec<CurveMode>,
    pub n_trials: u64,
    pub base_seed: u64,
    /// Report coverage given that the tagged link is LOS.
    pub los_conditioned: bool,
    pub blockage_field: BlockageCoupling,
}

impl ExperimentSpec {
    pub fn has_mc(&self) -> bool {
        self.modes.iter().any(|m| matches!(m, CurveMode::Mc(_)))
    }

    /// Configuration-unit parameters and link distance at one sweep value.
    pub fn point(&self, value: f64) -> (ConfigParams, f64) {
        let mut params = self.params;
        let mut x0 = self.x0;
        match self.sweep.variable {
            SweepVariable::X0 => x0 = value,
            v => {
                params.set(v.as_str(), value);
            }
        }
        (params, x0)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidParams(format!("experiment `{}`: {msg}", self.name)));
        if self.modes.is_empty() {
            return invalid("no modes requested".into());
        }
        if self.has_mc() && self.n_trials < MIN_MC_TRIALS {
            return invalid(format!("n_trials = {} is below {MIN_MC_TRIALS} for Monte Carlo modes", self.n_trials));
        }
        let values = &self.sweep.values;
        if values.is_empty() {
            return invalid("empty sweep".into());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("sweep values must be finite".into());
        }
        let increasing = values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return invalid("sweep values are not strictly monotone".into());
        }
        self.params.to_system_params()?;
        for &v in values {
            let (params, x0) = self.point(v);
            if !(x0 >= 0.0 && x0.is_finite()) {
                return invalid(format!("link distance {x0} must be finite and non-negative"));
            }
            params.to_system_params()?;
        }
        Ok(())
    }

    /// The experiment as a single TOML table that [`parse_config`] reads back to an
    /// equal experiment.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[{}]", toml_key(&self.name));
        let _ = writeln!(out, "sweep = \"{}\"", self.sweep.variable);
        let values: Vec<String> = self.sweep.values.iter().map(|v| format_float(*v)).collect();
        let _ = writeln!(out, "values = [{}]", values.join(", "));
        let modes: Vec<String> = self.modes.iter().map(|m| format!("\"{m}\"")).collect();
        let _ = writeln!(out, "modes = [{}]", modes.join(", "));
        let _ = writeln!(out, "x0 = {}", format_float(self.x0));
        let _ = writeln!(out, "n_trials = {}", self.n_trials);
        if self.base_seed <= i64::MAX as u64 {
            let _ = writeln!(out, "base_seed = {}", self.base_seed);
        } else {
            let _ = writeln!(out, "base_seed = \"{}\"", self.base_seed);
        }
        let _ = writeln!(out, "los_conditioned = {}", self.los_conditioned);
        let _ = writeln!(out, "blockage_field = \"{}\"", self.blockage_field.as_str());
        for key in ConfigParams::KEYS {
            let _ = writeln!(out, "{key} = {}", format_float(self.params.get(key).expect("known key")));
        }
        out
    }
}

/// Shortest decimal that parses back to the same `f64`, valid as TOML.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

fn toml_key(name: &str) -> String {
    let bare = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if bare {
        name.to_owned()
    } else {
        Value::String(name.to_owned()).to_string()
    }
}

const EXPERIMENT_KEYS: [&str; 11] = [
    "sweep",
    "values",
    "start",
    "stop",
    "step",
    "modes",
    "x0",
    "n_trials",
    "base_seed",
    "los_conditioned",
    "blockage_field",
];

/// Parses every experiment table of a config document, falling back to
/// [`DEFAULT_SEED`] when no seed is given.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentSpec>> {
    parse_config_with_seed(text, DEFAULT_SEED)
}

/// Like [`parse_config`], with `default_seed` for tables without `base_seed`.
pub fn parse_config_with_seed(text: &str, default_seed: u64) -> Result<Vec<ExperimentSpec>> {
    let doc: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string().trim_end().to_owned()))?;
    let mut defaults = Table::new();
    let mut sections = Vec::new();
    for (key, value) in doc {
        match value {
            Value::Table(t) => sections.push((key, t)),
            v => {
                check_key("<top level>", &key)?;
                defaults.insert(key, v);
            }
        }
    }
    if sections.is_empty() {
        return Err(Error::Parse("config defines no experiment tables".into()));
    }
    sections
        .into_iter()
        .map(|(name, table)| {
            let mut merged = defaults.clone();
            for (k, v) in table {
                check_key(&name, &k)?;
                merged.insert(k, v);
            }
            let spec = resolve(&name, &merged, default_seed)?;
            spec.validate()?;
            Ok(spec)
        })
        .collect()
}

fn check_key(section: &str, key: &str) -> Result<()> {
    if EXPERIMENT_KEYS.contains(&key) || ConfigParams::KEYS.contains(&key) {
        Ok(())
    } else {
        Err(key_error(section, key, "unknown key"))
    }
}

fn key_error(section: &str, key: &str, detail: impl Into<String>) -> Error {
    Error::ConfigKey {
        section: section.to_owned(),
        key: key.to_owned(),
        detail: detail.into(),
    }
}

fn number(section: &str, key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(key_error(section, key, "expected a number")),
    }
}

fn string<'a>(section: &str, key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| key_error(section, key, "expected a string"))
}

fn resolve(name: &str, t: &Table, default_seed: u64) -> Result<ExperimentSpec> {
    let mut params = ConfigParams::default();
    for key in ConfigParams::KEYS {
        if let Some(v) = t.get(key) {
            params.set(key, number(name, key, v)?);
        }
    }

    let variable: SweepVariable = match t.get("sweep") {
        Some(v) => string(name, "sweep", v)?.parse().map_err(|e: Error| key_error(name, "sweep", e.to_string()))?,
        None => return Err(key_error(name, "sweep", "missing sweep variable")),
    };
    let values = sweep_values(name, t, &params)?;

    let modes = match t.get("modes") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                string(name, "modes", v)?
                    .parse()
                    .map_err(|e: Error| key_error(name, "modes", e.to_string()))
            })
            .collect::<Result<Vec<CurveMode>>>()?,
        Some(_) => return Err(key_error(name, "modes", "expected an array of strings")),
        None => vec![CurveMode::Analytic],
    };

    let n_trials = match t.get("n_trials") {
        Some(Value::Integer(n)) if *n >= 0 => *n as u64,
        Some(_) => return Err(key_error(name, "n_trials", "expected a non-negative integer")),
        None => DEFAULT_TRIALS,
    };
    let base_seed = match t.get("base_seed") {
        Some(Value::Integer(n)) if *n >= 0 => *n as u64,
        Some(Value::String(s)) => s
            .parse()
            .map_err(|_| key_error(name, "base_seed", "expected an unsigned 64-bit integer"))?,
        Some(_) => return Err(key_error(name, "base_seed", "expected an unsigned 64-bit integer")),
        None => default_seed,
    };
    let x0 = match t.get("x0") {
        Some(v) => number(name, "x0", v)?,
        None => 5.0,
    };
    let los_conditioned = match t.get("los_conditioned") {
        Some(v) => v.as_bool().ok_or_else(|| key_error(name, "los_conditioned", "expected a boolean"))?,
        None => false,
    };
    let blockage_field = match t.get("blockage_field") {
        Some(v) => string(name, "blockage_field", v)?
            .parse()
            .map_err(|e: Error| key_error(name, "blockage_field", e.to_string()))?,
        None => BlockageCoupling::default(),
    };

    Ok(ExperimentSpec {
        name: name.to_owned(),
        params,
        x0,
        sweep: Sweep { variable, values },
        modes,
        n_trials,
        base_seed,
        los_conditioned,
        blockage_field,
    })
}

fn sweep_values(name: &str, t: &Table, params: &ConfigParams) -> Result<Vec<f64>> {
    let range = ["start", "stop", "step"].map(|k| t.get(k));
    match (t.get("values"), range) {
        (Some(Value::Array(items)), [None, None, None]) => {
            items.iter().map(|v| number(name, "values", v)).collect()
        }
        (Some(Value::Array(_)), _) => Err(key_error(name, "values", "give either `values` or start/stop/step")),
        (Some(_), _) => Err(key_error(name, "values", "expected an array of numbers")),
        (None, [Some(start), Some(stop), Some(step)]) => {
            let start = number(name, "start", start)?;
            let step = number(name, "step", step)?;
            let stop = match stop {
                Value::String(s) if s == "R_T" => params.to_system_params()?.max_association_radius()?,
                v => number(name, "stop", v)?,
            };
            linear_range(start, stop, step).map_err(|e| key_error(name, "step", e))
        }
        (None, _) => Err(key_error(name, "values", "missing sweep values (or start/stop/step)")),
    }
}

/// `start, start + step, …` up to and including `stop` (with a relative
/// slack of 1e-9 steps). Each point is computed directly from its index.
pub fn linear_range(start: f64, stop: f64, step: f64) -> std::result::Result<Vec<f64>, String> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step == 0.0 {
        return Err("start, stop and step must be finite with a non-zero step".into());
    }
    let span = (stop - start) / step;
    if span < -1e-9 {
        return Err("step points away from stop".into());
    }
    let n = (span + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(format!("sweep of {n} points is too long"));
    }
    Ok((0..n).map(|k| start + k as f64 * step).collect())
}

/// Default base seed from `TERASCOPE_SEED`, or [`DEFAULT_SEED`].
pub fn env_seed() -> Result<u64> {
    match std::env::var("TERASCOPE_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("TERASCOPE_SEED=`{s}` is not an unsigned 64-bit integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(text: &str) -> Result<ExperimentSpec> {
        parse_config(text).map(|mut v| v.remove(0))
    }

    #[test]
    fn empty_overrides_give_reference_params() {
        let spec = one("[e]\nsweep = \"x0\"\nvalues = [5]\n").unwrap();
        assert_eq!(spec.params, ConfigParams::default());
        assert_eq!(spec.params.to_system_params().unwrap(), SystemParams::default());
        assert_eq!(spec.modes, vec![CurveMode::Analytic]);
        assert_eq!(spec.base_seed, DEFAULT_SEED);
        assert_eq!(spec.blockage_field, BlockageCoupling::Independent);
    }

    #[test]
    fn threshold_is_converted_from_db() {
        let spec = one("[e]\nsweep = \"x0\"\nvalues = [5]\ntau_dB = 3\n").unwrap();
        let tau = spec.params.to_system_params().unwrap().tau;
        assert!((tau - 1.9952623149688795).abs() < 1e-15);
    }

    #[test]
    fn height_ordering_is_enforced() {
        let err = one("[e]\nsweep = \"x0\"\nvalues = [5]\nh_B = 4.0\n").unwrap_err();
        assert!(err.to_string().contains("height ordering"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = one("[e]\nsweep = \"x0\"\nvalues = [5]\nh_C = 4.0\n").unwrap_err();
        assert!(matches!(&err, Error::ConfigKey { section, key, .. } if section == "e" && key == "h_C"), "{err}");
        assert!(one("colour = 1\n[e]\nsweep = \"x0\"\nvalues = [5]\n").is_err());
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        let err = one("[e]\nsweep = \"x0\"\nvalues = [5\n").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn sweep_invariants() {
        assert!(one("[e]\nsweep = \"x0\"\nvalues = [1, 3, 2]\n").is_err());
        assert!(one("[e]\nsweep = \"x0\"\nvalues = [1, 1]\n").is_err());
        assert!(one("[e]\nsweep = \"x0\"\nvalues = [3, 2, 1]\n").is_ok());
        assert!(one("[e]\nsweep = \"x0\"\nvalues = [-1, 2]\n").is_err());
        assert!(one("[e]\nsweep = \"x0\"\nvalues = []\n").is_err());
        assert!(one("[e]\nsweep = \"G_A_dBi\"\nvalues = [1, 20]\n").is_err());
        assert!(one("[e]\nsweep = \"x0\"\nvalues = [1]\nstart = 1\n").is_err());
        assert!(one("[e]\nsweep = \"depth\"\nvalues = [1]\n").is_err());
    }

    #[test]
    fn monte_carlo_needs_enough_trials() {
        let mc = "[e]\nsweep = \"x0\"\nvalues = [5]\nmodes = [\"mc-full\"]\nn_trials = 999\n";
        assert!(one(mc).is_err());
        let analytic = "[e]\nsweep = \"x0\"\nvalues = [5]\nn_trials = 10\n";
        assert!(one(analytic).is_ok());
        assert!(one("[e]\nsweep = \"x0\"\nvalues = [5]\nmodes = [\"mc-partial\"]\n").is_err());
    }

    #[test]
    fn ranges_include_the_stop_value() {
        let spec = one("[e]\nsweep = \"tau_dB\"\nstart = -5\nstop = 15\nstep = 1\n").unwrap();
        assert_eq!(spec.sweep.values.len(), 21);
        assert_eq!(spec.sweep.values[20], 15.0);
        let spec = one("[e]\nsweep = \"x0\"\nstart = 0.5\nstop = \"R_T\"\nstep = 0.5\n").unwrap();
        assert_eq!(spec.sweep.values.len(), 19);
        assert_eq!(linear_range(0.0, 0.3, 0.1).unwrap().len(), 4);
        assert!(linear_range(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn top_level_keys_are_defaults() {
        let specs = parse_config(
            "n_trials = 5000\nlambda_A = 0.05\nsweep = \"x0\"\nvalues = [5]\n[a]\n[b]\nlambda_A = 0.2\n",
        )
        .unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!((specs[0].name.as_str(), specs[0].params.lambda_a), ("a", 0.05));
        assert_eq!((specs[1].name.as_str(), specs[1].params.lambda_a), ("b", 0.2));
        assert!(specs.iter().all(|s| s.n_trials == 5000));
    }

    #[test]
    fn seed_fallback_and_large_seeds() {
        let spec = parse_config_with_seed("[e]\nsweep = \"x0\"\nvalues = [5]\n", 77).unwrap();
        assert_eq!(spec[0].base_seed, 77);
        let mut big = spec[0].clone();
        big.base_seed = u64::MAX;
        big.name = "needs quoting.1".into();
        assert_eq!(one(&big.to_toml()).unwrap(), big);
    }

    proptest! {
        #[test]
        fn emitted_tables_parse_back(
            x0 in 0.0f64..50.0,
            lambda_a in 0.0f64..1.0,
            tau_db in -10.0f64..20.0,
            k in 0.0f64..1.0,
            seed in any::<u64>(),
            first in 0.0f64..10.0,
            gaps in proptest::collection::vec(1e-6f64..3.0, 0..6),
        ) {
            let mut values = vec![first];
            for g in gaps {
                let next = values.last().unwrap() + g;
                values.push(next);
            }
            let spec = ExperimentSpec {
                name: "p".into(),
                params: ConfigParams { lambda_a, tau_db, absorption: k, ..ConfigParams::default() },
                x0,
                sweep: Sweep { variable: SweepVariable::X0, values },
                modes: vec![CurveMode::Analytic, CurveMode::Mc(Mode::DominantOnly)],
                n_trials: 1000,
                base_seed: seed,
                los_conditioned: true,
                blockage_field: BlockageCoupling::Shared,
            };
            prop_assert_eq!(one(&spec.to_toml()).unwrap(), spec);
        }
    }
}
