//! Flat key-value config file and parameter resolution.
//!
//! The file is TOML restricted to top-level scalars:
//!
//! ```text
//! N = 100
//! delta = 0.1
//! eta_c = 0.25
//! ```
//!
//! Command-line flags override file values; file values override defaults.

use std::path::Path;

use log::warn;
use serde_json::{json, Map, Value};

use crate::error::{ChainError, Result};
use crate::model::{derive_parameters, ChainParams, PhysicalInput};

pub const KNOWN_KEYS: &[&str] = &[
    "N",
    "delta",
    "nu_t",
    "eta_c",
    "theta",
    "ion_mass_kg",
    "ion_charge_c",
    "spacing_m",
    "laser_wavenumber",
    "transverse_frequency",
    "temperature_k",
    "t_min",
    "t_max",
    "dt",
    "samples",
    "window",
    "prominence",
    "delta_min",
    "delta_max",
    "points",
    "cusp_n",
    "cusp_points",
    "scan_points",
    "budget",
];

#[derive(Clone, Debug, Default)]
pub struct Config {
    table: toml::Table,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| ChainError::invalid(format!("config file: {e}")))?;
        for (key, value) in &table {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ChainError::invalid(format!("config file: unknown key `{key}`")));
            }
            if value.is_table() || value.is_array() {
                return Err(ChainError::invalid(format!("config file: `{key}` must be a scalar")));
            }
        }
        Ok(Self { table })
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(*v)),
            Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(other) => Err(ChainError::invalid(format!("config `{key}`: expected a number, got {other}"))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(Some(*v as usize)),
            Some(other) => {
                Err(ChainError::invalid(format!("config `{key}`: expected a non-negative integer, got {other}")))
            }
        }
    }
}

/// Flag value, else config value, else default; records the choice in `inputs`.
pub fn pick_f64(
    cli: Option<f64>,
    cfg: &Config,
    key: &str,
    default: f64,
    inputs: &mut Map<String, Value>,
) -> Result<f64> {
    let v = match cli {
        Some(v) => v,
        None => cfg.f64(key)?.unwrap_or(default),
    };
    inputs.insert(key.into(), json!(v));
    Ok(v)
}

pub fn pick_usize(
    cli: Option<usize>,
    cfg: &Config,
    key: &str,
    default: usize,
    inputs: &mut Map<String, Value>,
) -> Result<usize> {
    let v = match cli {
        Some(v) => v,
        None => cfg.usize(key)?.unwrap_or(default),
    };
    inputs.insert(key.into(), json!(v));
    Ok(v)
}

/// Chain-level values as given on the command line.
#[derive(Clone, Debug, Default)]
pub struct ChainInputs {
    pub n_ions: Option<usize>,
    pub delta: Option<f64>,
    pub nu_t: Option<f64>,
    pub eta_c: Option<f64>,
    pub theta: Option<f64>,
    pub ion_mass_kg: Option<f64>,
    pub ion_charge_c: Option<f64>,
    pub spacing_m: Option<f64>,
    pub laser_wavenumber: Option<f64>,
    pub transverse_frequency: Option<f64>,
    pub temperature_k: Option<f64>,
}

/// Per-subcommand defaults for the dimensionless chain.
#[derive(Clone, Copy, Debug)]
pub struct ChainDefaults {
    pub n_ions: usize,
    pub delta: f64,
    pub eta_c: f64,
}

pub fn resolve_chain(
    cli: &ChainInputs,
    cfg: &Config,
    defaults: ChainDefaults,
    inputs: &mut Map<String, Value>,
) -> Result<ChainParams<f64>> {
    let n_ions = pick_usize(cli.n_ions, cfg, "N", defaults.n_ions, inputs)?;

    let layer = |c: Option<f64>, key: &str| -> Result<Option<f64>> {
        Ok(match c {
            Some(v) => Some(v),
            None => cfg.f64(key)?,
        })
    };
    let physical = [
        ("ion_mass_kg", layer(cli.ion_mass_kg, "ion_mass_kg")?),
        ("ion_charge_c", layer(cli.ion_charge_c, "ion_charge_c")?),
        ("spacing_m", layer(cli.spacing_m, "spacing_m")?),
        ("laser_wavenumber", layer(cli.laser_wavenumber, "laser_wavenumber")?),
        ("transverse_frequency", layer(cli.transverse_frequency, "transverse_frequency")?),
    ];
    let temperature_k = layer(cli.temperature_k, "temperature_k")?;
    let any_physical = physical.iter().any(|(_, v)| v.is_some()) || temperature_k.is_some();

    // a flag beats the config entry for the other frequency form
    let (delta, nu_t) = match (cli.delta, cli.nu_t) {
        (Some(d), _) => (Some(d), None),
        (None, Some(n)) => (None, Some(n)),
        (None, None) => {
            let (d, n) = (cfg.f64("delta")?, cfg.f64("nu_t")?);
            if d.is_some() && n.is_some() {
                return Err(ChainError::invalid("config sets both `delta` and `nu_t`; keep one"));
            }
            (d, n)
        }
    };
    let eta_c = layer(cli.eta_c, "eta_c")?;
    let theta = layer(cli.theta, "theta")?;
    let any_dimensionless = delta.is_some() || nu_t.is_some() || eta_c.is_some() || theta.is_some();

    if any_physical && !any_dimensionless {
        let mut input = PhysicalInput {
            ion_mass_kg: 0.0,
            ion_charge_c: 0.0,
            spacing_m: 0.0,
            laser_wavenumber_per_m: 0.0,
            transverse_frequency: 0.0,
            temperature_k: temperature_k.unwrap_or(0.0),
        };
        for (key, value) in physical {
            let v = value.ok_or_else(|| ChainError::invalid(format!("physical input incomplete: `{key}` missing")))?;
            inputs.insert(key.into(), json!(v));
            match key {
                "ion_mass_kg" => input.ion_mass_kg = v,
                "ion_charge_c" => input.ion_charge_c = v,
                "spacing_m" => input.spacing_m = v,
                "laser_wavenumber" => input.laser_wavenumber_per_m = v,
                _ => input.transverse_frequency = v,
            }
        }
        inputs.insert("temperature_k".into(), json!(input.temperature_k));
        let derived = derive_parameters::<f64>(&input, n_ions)?;
        inputs.insert("omega0_rad_per_s".into(), json!(derived.omega0));
        inputs.insert("nu_t".into(), json!(derived.params.nu_t));
        inputs.insert("eta_c".into(), json!(derived.params.eta_c));
        inputs.insert("theta".into(), json!(derived.params.theta));
        return Ok(derived.params);
    }
    if any_physical {
        warn!("both physical and dimensionless parameters given; using the dimensionless ones");
    }
    let eta_c = eta_c.unwrap_or(defaults.eta_c);
    let theta = theta.unwrap_or(0.0);
    let params = match (delta, nu_t) {
        (_, Some(n)) => ChainParams::new(n_ions, n, eta_c, theta)?,
        (d, None) => ChainParams::from_delta(n_ions, d.unwrap_or(defaults.delta), eta_c, theta)?,
    };
    inputs.insert("nu_t".into(), json!(params.nu_t));
    inputs.insert("delta".into(), json!(params.delta()));
    inputs.insert("eta_c".into(), json!(eta_c));
    inputs.insert("theta".into(), json!(theta));
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULTS: ChainDefaults = ChainDefaults { n_ions: 100, delta: 0.1, eta_c: 0.25 };

    #[test]
    fn flags_override_config_override_defaults() {
        let cfg = Config::parse("N = 40\neta_c = 0.3\n").unwrap();
        let mut inputs = Map::new();
        let cli = ChainInputs { eta_c: Some(0.1), ..Default::default() };
        let p = resolve_chain(&cli, &cfg, DEFAULTS, &mut inputs).unwrap();
        assert_eq!(p.n_ions, 40);
        assert_eq!(p.eta_c, 0.1);
        assert!((p.delta() - 0.1).abs() < 1e-12);
        assert_eq!(inputs["N"], json!(40));
    }

    #[test]
    fn rejects_nested_and_unknown_keys() {
        assert!(Config::parse("[section]\nN = 4\n").is_err());
        assert!(Config::parse("colour = 1\n").is_err());
        assert!(Config::parse("N = [1, 2]\n").is_err());
        assert!(Config::parse("N = \"ten\"\n").unwrap().usize("N").is_err());
    }

    #[test]
    fn physical_inputs_used_when_alone_and_ignored_otherwise() {
        let m = 24.0 * crate::model::ATOMIC_MASS_UNIT;
        let omega0 = crate::model::omega0_si(m, crate::model::ELEMENTARY_CHARGE, 33e-6);
        let text = format!(
            "ion_mass_kg = {m:e}\nion_charge_c = {:e}\nspacing_m = 33e-6\nlaser_wavenumber = 1.5e7\ntransverse_frequency = {:e}\n",
            crate::model::ELEMENTARY_CHARGE,
            2.2 * omega0
        );
        let cfg = Config::parse(&text).unwrap();
        let mut inputs = Map::new();
        let p = resolve_chain(&ChainInputs::default(), &cfg, DEFAULTS, &mut inputs).unwrap();
        assert!((p.nu_t - 2.2).abs() < 1e-9);
        let cli = ChainInputs { nu_t: Some(2.5), ..Default::default() };
        let p = resolve_chain(&cli, &cfg, DEFAULTS, &mut Map::new()).unwrap();
        assert_eq!(p.nu_t, 2.5);
    }

    #[test]
    fn incomplete_physical_input_is_an_error() {
        let cfg = Config::parse("spacing_m = 3e-5\n").unwrap();
        assert!(resolve_chain(&ChainInputs::default(), &cfg, DEFAULTS, &mut Map::new()).is_err());
    }

    #[test]
    fn both_frequency_forms_in_config_rejected() {
        let cfg = Config::parse("delta = 0.1\nnu_t = 2.2\n").unwrap();
        assert!(resolve_chain(&ChainInputs::default(), &cfg, DEFAULTS, &mut Map::new()).is_err());
        let cli = ChainInputs { delta: Some(0.2), ..Default::default() };
        let p = resolve_chain(&cli, &cfg, DEFAULTS, &mut Map::new()).unwrap();
        assert!((p.delta() - 0.2).abs() < 1e-12);
    }
}
