//! Grid specifications and layered settings (flag > input file > config file > default).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::InputError;

/// `min:max:count` sample points along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        AxisSpec { min, max, count }
    }

    /// Evenly spaced values including both ends (`min` alone when `count == 1`).
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 })
            .collect()
    }
}

impl FromStr for AxisSpec {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || InputError::Grid(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let ordered = if count == 1 { min <= max } else { min < max };
        if count == 0 || !min.is_finite() || !max.is_finite() || !ordered {
            return Err(bad());
        }
        Ok(AxisSpec { min, max, count })
    }
}

impl fmt::Display for AxisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

impl TryFrom<String> for AxisSpec {
    type Error = InputError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<AxisSpec> for String {
    fn from(a: AxisSpec) -> String {
        a.to_string()
    }
}

/// One [`AxisSpec`] per axis, comma separated on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridSpec(pub Vec<AxisSpec>);

impl GridSpec {
    pub fn axes(&self, n: usize) -> Result<&[AxisSpec], InputError> {
        if self.0.len() != n {
            return Err(InputError::GridAxes { expected: n, got: self.0.len() });
        }
        Ok(&self.0)
    }
}

impl FromStr for GridSpec {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',').map(str::parse).collect::<Result<Vec<_>, _>>().map(GridSpec)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl TryFrom<String> for GridSpec {
    type Error = InputError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> String {
        g.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Flag,
    /// The command's own input file (the simulation file).
    InputFile,
    ConfigFile,
    Default,
}

/// Effective value of one setting and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub value: Value,
    pub source: Source,
}

/// Keys accepted in a `--config` file.
pub const CONFIG_KEYS: &[&str] = &[
    "grid",
    "real_grid",
    "quad_points",
    "truncation",
    "seed",
    "chains",
    "steps",
    "step_size",
    "fit",
    "theta_grid",
    "profile_radius",
];

/// Resolves settings and records the outcome for the run manifest.
#[derive(Debug, Default)]
pub struct Resolver {
    input: Map<String, Value>,
    config: Map<String, Value>,
    log: BTreeMap<String, Setting>,
}

impl Resolver {
    /// Reads an optional JSON config file; unknown keys are rejected.
    pub fn new(config: Option<&Path>) -> anyhow::Result<Self> {
        let config = match config {
            Some(path) => {
                let map = read_object(path)?;
                if let Some(k) = map.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
                    return Err(InputError::UnknownKey(k.clone()).into());
                }
                map
            }
            None => Map::new(),
        };
        Ok(Resolver { config, ..Default::default() })
    }

    /// Layer between flags and the config file.
    pub fn with_input(mut self, input: Map<String, Value>) -> Self {
        self.input = input;
        self
    }

    pub fn pick<T>(&mut self, key: &str, flag: Option<T>, default: T) -> anyhow::Result<T>
    where
        T: Serialize + DeserializeOwned,
    {
        let (value, source) = if let Some(v) = flag {
            (v, Source::Flag)
        } else if let Some(v) = self.input.get(key) {
            (from_value(key, v)?, Source::InputFile)
        } else if let Some(v) = self.config.get(key) {
            (from_value(key, v)?, Source::ConfigFile)
        } else {
            (default, Source::Default)
        };
        self.record(key, &value, source)?;
        Ok(value)
    }

    /// Optional setting with no default.
    pub fn pick_optional<T>(&mut self, key: &str, flag: Option<T>) -> anyhow::Result<Option<T>>
    where
        T: Serialize + DeserializeOwned,
    {
        let picked = if flag.is_some() {
            flag.map(|v| (v, Source::Flag))
        } else if let Some(v) = self.input.get(key) {
            Some((from_value(key, v)?, Source::InputFile))
        } else if let Some(v) = self.config.get(key) {
            Some((from_value(key, v)?, Source::ConfigFile))
        } else {
            None
        };
        match picked {
            Some((v, s)) => {
                self.record(key, &v, s)?;
                Ok(Some(v))
            }
            None => {
                self.log.insert(key.to_string(), Setting { value: Value::Null, source: Source::Default });
                Ok(None)
            }
        }
    }

    fn record<T: Serialize>(&mut self, key: &str, value: &T, source: Source) -> anyhow::Result<()> {
        let value = serde_json::to_value(value)?;
        self.log.insert(key.to_string(), Setting { value, source });
        Ok(())
    }

    pub fn into_log(self) -> BTreeMap<String, Setting> {
        self.log
    }
}

fn from_value<T: DeserializeOwned>(key: &str, v: &Value) -> anyhow::Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| InputError::Setting(key.to_string(), e.to_string()).into())
}

pub(crate) fn read_object(path: &Path) -> anyhow::Result<Map<String, Value>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(InputError::NotAnObject(path.display().to_string()).into()),
    }
}
