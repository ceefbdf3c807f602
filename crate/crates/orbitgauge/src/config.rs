//! Parameter resolution: config file (or manifest), then command-line overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_SHARDS: usize = 8;
pub const SEED_ENV: &str = "ORBITGAUGE_SEED";

/// Parses a count written as an integer or in scientific notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
        _ => Err(format!("'{s}' is not a non-negative integer")),
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a number"))
}

/// Inclusive integer range written `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub lo: u64,
    pub hi: u64,
}

impl IntRange {
    pub fn new(lo: u64, hi: u64) -> Self {
        IntRange { lo, hi }
    }

    pub fn to_vec_u32(self) -> Vec<u32> {
        (self.lo..=self.hi).map(|j| j as u32).collect()
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = match s.split_once(':') {
            Some((a, b)) => (parse_count(a)?, parse_count(b)?),
            None => {
                let v = parse_count(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range '{s}'"));
        }
        Ok(IntRange { lo, hi })
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl Serialize for IntRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IntRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            Value::Array(v) if v.len() == 2 => {
                let get = |x: &Value| x.as_u64().ok_or_else(|| serde::de::Error::custom("range bounds must be integers"));
                Ok(IntRange { lo: get(&v[0])?, hi: get(&v[1])? })
            }
            other => Err(serde::de::Error::custom(format!("expected \"lo:hi\", got {other}"))),
        }
    }
}

/// Time grid written `start:stop:step`, `a,b,c` or a single value.
/// Serialized as the explicit list of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let points = match parts.as_slice() {
            [a, b, h] => {
                let (a, b, h) = (parse_f64(a)?, parse_f64(b)?, parse_f64(h)?);
                if !(h > 0.0) || b < a {
                    return Err(format!("bad grid '{s}'"));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                (0..=n).map(|i| a + i as f64 * h).collect()
            }
            [one] => one.split(',').map(parse_f64).collect::<Result<_, _>>()?,
            _ => return Err(format!("bad grid '{s}': use start:stop:step or a,b,c")),
        };
        Ok(Grid(points))
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            Value::Number(n) => Ok(Grid(vec![n.as_f64().unwrap_or(f64::NAN)])),
            v @ Value::Array(_) => Vec::<f64>::deserialize(v).map(Grid).map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!("expected a grid, got {other}"))),
        }
    }
}

/// Reads a JSON command-line value: `@path` loads a file, anything that is
/// not valid JSON is taken as a string.
pub fn read_json_arg(arg: &str) -> CliResult<Value> {
    if let Some(path) = arg.strip_prefix('@') {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return serde_json::from_str(&text).map_err(|e| CliError::config(format!("{path}: {e}")));
    }
    Ok(serde_json::from_str(arg).unwrap_or_else(|_| Value::String(arg.to_string())))
}

/// `serialize_with` helper for optional JSON-valued flags.
pub fn ser_json_arg<S: Serializer>(v: &Option<String>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(a) => read_json_arg(a).map_err(serde::ser::Error::custom)?.serialize(s),
    }
}

/// `serialize_with` helper for repeated JSON-valued flags.
pub fn ser_json_args<S: Serializer>(v: &[String], s: S) -> Result<S::Ok, S::Error> {
    if v.is_empty() {
        return s.serialize_none();
    }
    let values = v.iter().map(|a| read_json_arg(a)).collect::<CliResult<Vec<Value>>>();
    values.map_err(serde::ser::Error::custom)?.serialize(s)
}

/// Loads a config object. A manifest written by this tool is accepted too,
/// in which case its recorded configuration is used.
pub fn load_config(path: &Path, subcommand: &str) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::config(format!("{}: expected a JSON object", path.display())));
    };
    if obj.get("tool").and_then(Value::as_str) == Some(crate::TOOL) {
        let recorded = obj.get("subcommand").and_then(Value::as_str).unwrap_or("");
        if recorded != subcommand {
            return Err(CliError::config(format!("manifest is for '{recorded}', not '{subcommand}'")));
        }
        return match obj.remove("config") {
            Some(Value::Object(cfg)) => Ok(cfg),
            _ => Err(CliError::config("manifest has no config object")),
        };
    }
    Ok(obj)
}

/// Object of set flags: `null` entries (flags not given) are dropped.
pub fn overrides<T: Serialize>(args: &T) -> CliResult<Map<String, Value>> {
    match serde_json::to_value(args).map_err(|e| CliError::config(e.to_string()))? {
        Value::Object(mut m) => {
            m.retain(|_, v| !v.is_null());
            Ok(m)
        }
        _ => Ok(Map::new()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Globals {
    pub seed: u64,
    pub samples: u64,
    pub shards: usize,
}

fn take_u64(map: &mut Map<String, Value>, key: &str) -> CliResult<Option<u64>> {
    match map.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Number(n)) => match (n.as_u64(), n.as_f64()) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(x)) => parse_count(&x.to_string()).map(Some).map_err(|e| CliError::config(format!("{key}: {e}"))),
            _ => Err(CliError::config(format!("{key}: not a non-negative integer"))),
        },
        Some(Value::String(s)) => parse_count(&s).map(Some).map_err(|e| CliError::config(format!("{key}: {e}"))),
        Some(other) => Err(CliError::config(format!("{key}: expected an integer, got {other}"))),
    }
}

/// Removes the global keys from `merged` and resolves them. The seed falls
/// back to `ORBITGAUGE_SEED` when neither the flags nor the file set it.
pub fn resolve_globals(merged: &mut Map<String, Value>, env_seed: Option<String>) -> CliResult<Globals> {
    let seed = match take_u64(merged, "seed")? {
        Some(s) => s,
        None => match env_seed {
            Some(s) => parse_u64(&s).map_err(|e| CliError::config(format!("{SEED_ENV}: {e}")))?,
            None => DEFAULT_SEED,
        },
    };
    let samples = take_u64(merged, "samples")?.unwrap_or(DEFAULT_SAMPLES);
    let shards = take_u64(merged, "shards")?.map(|s| s as usize).unwrap_or(DEFAULT_SHARDS);
    if shards == 0 {
        return Err(CliError::config("shards must be at least 1"));
    }
    Ok(Globals { seed, samples, shards })
}

/// Deserializes the remaining keys; unknown keys are rejected by name.
pub fn parse_params<P: DeserializeOwned>(map: Map<String, Value>) -> CliResult<P> {
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::config(e.to_string()))
}

pub fn merge(mut base: Map<String, Value>, over: Map<String, Value>) -> Map<String, Value> {
    base.extend(over);
    base
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_ranges() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
        assert_eq!("10:1000".parse::<IntRange>(), Ok(IntRange::new(10, 1000)));
        assert!("5:4".parse::<IntRange>().is_err());
    }

    #[test]
    fn grids() {
        assert_eq!("3:8:1".parse::<Grid>().unwrap().0, vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!("1,2.5".parse::<Grid>().unwrap().0, vec![1.0, 2.5]);
        assert_eq!("2".parse::<Grid>().unwrap().0, vec![2.0]);
        let g: Grid = serde_json::from_value(serde_json::json!([1.0, 2.0])).unwrap();
        assert_eq!(g.0, vec![1.0, 2.0]);
    }

    #[test]
    fn globals_precedence() {
        let mut m = Map::new();
        m.insert("samples".into(), Value::String("1e3".into()));
        let g = resolve_globals(&mut m, Some("42".into())).unwrap();
        assert_eq!((g.seed, g.samples, g.shards), (42, 1000, DEFAULT_SHARDS));
        m.insert("seed".into(), Value::from(7u64));
        assert_eq!(resolve_globals(&mut m, Some("42".into())).unwrap().seed, 7);
        assert!(m.is_empty());
    }
}
