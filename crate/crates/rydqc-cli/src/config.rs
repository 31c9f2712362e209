//! Run configuration: a TOML file of flat keys, optionally grouped under a
//! `[<subcommand>]` table, checked against a per-subcommand schema.

use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Float,
    Int,
    Bool,
    Str,
    FloatList,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Float => "a number",
            Kind::Int => "an integer",
            Kind::Bool => "a boolean",
            Kind::Str => "a string",
            Kind::FloatList => "an array of numbers",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Default {
    F(f64),
    I(i64),
    B(bool),
    S(&'static str),
    L(&'static [f64]),
    /// filled in by the subcommand from other inputs
    Derived,
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: Default,
}

const fn f(name: &'static str, v: f64) -> Key {
    Key {
        name,
        kind: Kind::Float,
        default: Default::F(v),
    }
}
const fn i(name: &'static str, v: i64) -> Key {
    Key {
        name,
        kind: Kind::Int,
        default: Default::I(v),
    }
}
const fn b(name: &'static str, v: bool) -> Key {
    Key {
        name,
        kind: Kind::Bool,
        default: Default::B(v),
    }
}
const fn s(name: &'static str, v: &'static str) -> Key {
    Key {
        name,
        kind: Kind::Str,
        default: Default::S(v),
    }
}

pub const GLOBAL_KEYS: &[Key] = &[i("seed", 1), i("samples", 20)];

pub const COMMANDS: &[&str] = &[
    "interactions",
    "magic-lattice",
    "rabi",
    "lifetime",
    "check-sequence",
    "dd-storage",
    "dd-gate",
    "dd-motion",
    "measure-budget",
];

pub fn schema(command: &str) -> &'static [Key] {
    match command {
        "interactions" => {
            const {
                &[
                    f("ez_v_per_cm", 0.313),
                    f("bz_gauss", 1.39),
                    f("separation_um", 12.0),
                    f("scan_min_um", 10.0),
                    f("scan_max_um", 16.0),
                    i("scan_points", 4),
                    i("n_window", 2),
                    i("m_depth", 5),
                    i("multipole_order", 2),
                ]
            }
        }
        "magic-lattice" => {
            const {
                &[
                    i("storage_n0", 59),
                    i("storage_n1", 61),
                    i("active_n0", 56),
                    i("active_n1", 64),
                    s("orientation", "in-plane"),
                    f("lambda_min_nm", 625.0),
                    f("lambda_max_nm", 633.0),
                    i("scan_points", 81),
                    i("root_steps", 16),
                ]
            }
        }
        "rabi" => {
            const {
                &[
                    i("n", 59),
                    i("n_prime", 61),
                    i("m1", 1),
                    i("m2", -1),
                    f("numerical_aperture", 0.5),
                    f("power_mw", 1.0),
                    Key {
                        name: "wavelengths_nm",
                        kind: Kind::FloatList,
                        default: Default::L(&[532.0, 1064.0, 1550.0]),
                    },
                ]
            }
        }
        "lifetime" => {
            const {
                &[
                    i("n_min", 50),
                    i("n_max", 68),
                    f("temperature", 4.0),
                    s("ldos", "bandstop"),
                    f("p_min", 1e-4),
                    f("f_low_hz", 20e9),
                    f("f_high_hz", 40e9),
                    s("ldos_file", ""),
                ]
            }
        }
        "check-sequence" => {
            const {
                &[
                    s("sequence", "2"),
                    s("sequence_file", ""),
                    i("n_periods", 1),
                    f("duty", 0.025),
                ]
            }
        }
        "dd-storage" => {
            const {
                &[
                    s("sequence", "2"),
                    s("sequence_file", ""),
                    i("n_atoms", 8),
                    f("separation_um", 12.0),
                    Key {
                        name: "t_c_s",
                        kind: Kind::Float,
                        default: Default::Derived,
                    },
                    f("duty", 0.025),
                    i("cycles", 32),
                    b("twirl", false),
                    f("pulse_angle_error", 0.0),
                    i("substeps", 1),
                    f("j_offset_hz2pi", 0.0),
                ]
            }
        }
        "dd-gate" => {
            const {
                &[
                    s("sequence", "2"),
                    s("sequence_file", ""),
                    i("n_atoms", 4),
                    f("separation_um", 12.0),
                    f("duty", 0.025),
                    i("max_gate_cycles", 2),
                    b("swap_after_pulse", true),
                ]
            }
        }
        "dd-motion" => {
            const {
                &[
                    s("sequence", "2"),
                    s("sequence_file", ""),
                    i("n_atoms", 4),
                    f("separation_um", 16.0),
                    f("duty", 0.025),
                    f("trap_frequency_khz", 100.0),
                    f("temperature_uk", 10.0),
                    f("eta", 2e-3),
                    b("matched", true),
                    f("t_c_periods", 1.5),
                    i("cycles", 1),
                    f("tau_circ_s", 3.0),
                ]
            }
        }
        "measure-budget" => {
            const {
                &[
                    f("v_blockade_mhz", 20.0),
                    f("tau_a_us", 200.0),
                    f("p_eps_target", 0.2),
                    f("p_eps_others", 1e-4),
                    f("p_eps_nn", 1e-3),
                    f("neighbor_shift_khz", 1.0),
                    f("t_meas_ms", 10.0),
                    f("tau_circ_s", 3.33),
                    i("scan_points", 41),
                ]
            }
        }
        _ => &[],
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn nearest<'a>(word: &str, candidates: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .map(|c| (strsim::damerau_levenshtein(word, c), c))
        .min_by_key(|&(d, _)| d)
        .filter(|&(d, c)| d <= c.len().max(word.len()) / 2 + 1)
        .map(|(_, c)| c)
}

fn unknown(what: &str, key: &str, valid: &[&str]) -> ConfigError {
    match nearest(key, valid.iter().copied()) {
        Some(n) => ConfigError(format!("unknown {what} `{key}`; did you mean `{n}`?")),
        None => ConfigError(format!(
            "unknown {what} `{key}`; valid keys: {}",
            valid.join(", ")
        )),
    }
}

fn convert(key: &Key, v: &toml::Value) -> Result<Value, ConfigError> {
    let bad = || ConfigError(format!("key `{}` must be {}", key.name, key.kind));
    Ok(match (key.kind, v) {
        (Kind::Float, toml::Value::Float(x)) => json!(x),
        (Kind::Float, toml::Value::Integer(x)) => json!(*x as f64),
        (Kind::Int, toml::Value::Integer(x)) => json!(x),
        (Kind::Bool, toml::Value::Boolean(x)) => json!(x),
        (Kind::Str, toml::Value::String(x)) => json!(x),
        (Kind::FloatList, toml::Value::Array(xs)) => {
            let mut out = Vec::new();
            for x in xs {
                out.push(match x {
                    toml::Value::Float(x) => *x,
                    toml::Value::Integer(x) => *x as f64,
                    _ => return Err(bad()),
                });
            }
            json!(out)
        }
        _ => return Err(bad()),
    })
}

fn default_value(d: Default) -> Option<Value> {
    match d {
        Default::F(x) => Some(json!(x)),
        Default::I(x) => Some(json!(x)),
        Default::B(x) => Some(json!(x)),
        Default::S(x) => Some(json!(x)),
        Default::L(x) => Some(json!(x)),
        Default::Derived => None,
    }
}

/// Normalized parameters for one subcommand, with every default filled.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub values: BTreeMap<String, Value>,
}

impl RunConfig {
    pub fn f64(&self, key: &str) -> f64 {
        self.values[key]
            .as_f64()
            .unwrap_or_else(|| panic!("{key} is not numeric"))
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        self.values.get(key).and_then(Value::as_f64)
    }

    pub fn int(&self, key: &str) -> i64 {
        self.values[key]
            .as_i64()
            .unwrap_or_else(|| panic!("{key} is not an integer"))
    }

    pub fn bool(&self, key: &str) -> bool {
        self.values[key]
            .as_bool()
            .unwrap_or_else(|| panic!("{key} is not a boolean"))
    }

    pub fn str(&self, key: &str) -> &str {
        self.values[key]
            .as_str()
            .unwrap_or_else(|| panic!("{key} is not a string"))
    }

    pub fn list(&self, key: &str) -> Vec<f64> {
        self.values[key]
            .as_array()
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
            .unwrap_or_default()
    }

    /// Non-negative integer key as usize, rejecting negatives.
    pub fn count(&self, key: &str) -> Result<usize, ConfigError> {
        usize::try_from(self.int(key)).map_err(|_| ConfigError(format!("key `{key}` must be ≥ 0")))
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.values.insert(key.to_string(), v);
    }

    pub fn to_json(&self) -> Value {
        Value::Object(
            self.values
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect::<Map<_, _>>(),
        )
    }
}

/// Parses `text` for `command`; an empty text yields all defaults.
pub fn validate_config(command: &str, text: &str) -> Result<RunConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigError(format!("config is not valid TOML: {}", e.message()))
    })?;
    let keys = schema(command);
    let mut values = BTreeMap::new();
    for k in GLOBAL_KEYS.iter().chain(keys) {
        if let Some(v) = default_value(k.default) {
            values.insert(k.name.to_string(), v);
        }
    }
    let top_valid: Vec<&str> = GLOBAL_KEYS
        .iter()
        .chain(keys)
        .map(|k| k.name)
        .chain(COMMANDS.iter().copied())
        .collect();
    for (name, v) in &table {
        if let toml::Value::Table(section) = v {
            if !COMMANDS.contains(&name.as_str()) {
                return Err(unknown("section", name, COMMANDS));
            }
            let sec_keys = schema(name);
            let valid: Vec<&str> = sec_keys.iter().map(|k| k.name).collect();
            for (k, v) in section {
                let key = sec_keys
                    .iter()
                    .find(|s| s.name == k)
                    .ok_or_else(|| unknown("key", k, &valid))?;
                let v = convert(key, v)?;
                if name == command {
                    values.insert(k.clone(), v);
                }
            }
            continue;
        }
        let key = GLOBAL_KEYS
            .iter()
            .chain(keys)
            .find(|k| k.name == name)
            .ok_or_else(|| unknown("key", name, &top_valid))?;
        values.insert(name.clone(), convert(key, v)?);
    }
    Ok(RunConfig {
        command: command.to_string(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = validate_config("lifetime", "").unwrap();
        assert_eq!(c.f64("temperature"), 4.0);
        assert_eq!(c.int("seed"), 1);
        assert_eq!(c.str("ldos"), "bandstop");
    }

    #[test]
    fn misspelled_key_suggests_nearest() {
        let e = validate_config("lifetime", "tempratuer = 4").unwrap_err();
        assert!(e.0.contains("`temperature`"), "{e}");
        let e = validate_config("lifetime", "[dd-storage]\ncylces = 3").unwrap_err();
        assert!(e.0.contains("`cycles`"), "{e}");
        let e = validate_config("lifetime", "[lifetme]\nn_min = 3").unwrap_err();
        assert!(e.0.contains("`lifetime`"), "{e}");
    }

    #[test]
    fn sections_apply_only_to_their_command() {
        let text = "seed = 7\n[lifetime]\ntemperature = 0\n[dd-motion]\ntemperature_uk = 5";
        let c = validate_config("lifetime", text).unwrap();
        assert_eq!(c.f64("temperature"), 0.0);
        assert_eq!(c.int("seed"), 7);
        assert!(!c.values.contains_key("temperature_uk"));
    }

    #[test]
    fn integers_widen_to_floats_but_not_back() {
        assert_eq!(
            validate_config("lifetime", "temperature = 3")
                .unwrap()
                .f64("temperature"),
            3.0
        );
        assert!(validate_config("lifetime", "n_min = 3.5").is_err());
        assert!(validate_config("lifetime", "ldos = 1").is_err());
    }

    #[test]
    fn every_schema_key_is_unique() {
        for c in COMMANDS {
            let mut names: Vec<&str> = GLOBAL_KEYS
                .iter()
                .chain(schema(c))
                .map(|k| k.name)
                .collect();
            let n = names.len();
            names.sort();
            names.dedup();
            assert_eq!(n, names.len(), "{c}");
        }
    }
}
