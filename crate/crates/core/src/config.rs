//! Run configuration files.
//!
//! ```toml
//! [model]
//! variant = "power_law"      # power_law | tight_binding | fractal | phase_modulated
//!                            # | selective | antipodal | kitaev
//! n_sites = 2004
//! alpha = 2.0
//! filling = "1/4"            # or 0.25
//!
//! [sweep]
//! axis = "distance"          # distance | mu | alpha | subsystem_size
//! start = 1                  # or: values = [1, 2, 3]
//! stop = 200
//! count = 200
//!
//! [partition]
//! l = 10
//! d = 4                      # fixed gap for non-distance sweeps
//! a_start = 1
//!
//! [output]
//! path = "mi.csv"
//! precision = 12             # significant digits
//! holographic_c = 1.0
//!
//! [compute]
//! workers = 4
//! ```

use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::{Table, Value};

use crate::analysis::SweepAxis;
use crate::lattice::{
    Boundary, ChainGeometry, KitaevHopping, ModelSpec, OccupationRule, Variant,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Syntax(String),
    #[error("{key}: {message}")]
    Key { key: String, message: String },
}

fn key_error(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Key {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
    /// Every gap `d = 1 ..= N/2 - l`.
    DefaultDistances,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub axis: SweepAxis,
    pub values: SweepValues,
    pub l: usize,
    pub d: usize,
    pub a_start: usize,
    pub output: PathBuf,
    pub precision: usize,
    pub holographic_c: f64,
    pub workers: Option<usize>,
    /// SHA-256 of the configuration text.
    pub digest: String,
}

impl RunConfig {
    /// Sweep values after expanding ranges and defaults.
    pub fn sweep_values(&self) -> Vec<f64> {
        match &self.values {
            SweepValues::List(v) => v.clone(),
            SweepValues::Range { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                _ => (0..*count)
                    .map(|i| start + (stop - start) * i as f64 / (*count - 1) as f64)
                    .collect(),
            },
            SweepValues::DefaultDistances => {
                let last = (self.model.n_sites() / 2).saturating_sub(self.l);
                (1..=last).map(|d| d as f64).collect()
            }
        }
    }
}

/// Typed access to one section, tracking which keys were consumed.
struct Section<'a> {
    name: &'a str,
    table: Table,
}

impl<'a> Section<'a> {
    fn take(root: &mut Table, name: &'a str, required: bool) -> Result<Self, ConfigError> {
        match root.remove(name) {
            Some(Value::Table(table)) => Ok(Self { name, table }),
            Some(_) => Err(key_error(name, "expected a section")),
            None if required => Err(key_error(name, "missing section")),
            None => Ok(Self {
                name,
                table: Table::new(),
            }),
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn raw(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(f)),
            Some(Value::Integer(i)) => Ok(Some(i as f64)),
            Some(Value::String(s)) if s == "inf" => Ok(Some(f64::INFINITY)),
            Some(other) => Err(key_error(
                &self.path(key),
                format!("expected a number, got {other}"),
            )),
        }
    }

    fn float_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.float(key)?.unwrap_or(default))
    }

    fn require_float(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.float(key)?
            .ok_or_else(|| key_error(&self.path(key), "missing value"))
    }

    fn integer(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if i >= 0 => Ok(Some(i as usize)),
            Some(other) => Err(key_error(
                &self.path(key),
                format!("expected a non-negative integer, got {other}"),
            )),
        }
    }

    fn require_integer(&mut self, key: &str) -> Result<usize, ConfigError> {
        self.integer(key)?
            .ok_or_else(|| key_error(&self.path(key), "missing value"))
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(key_error(
                &self.path(key),
                format!("expected a string, got {other}"),
            )),
        }
    }

    fn require_string(&mut self, key: &str) -> Result<String, ConfigError> {
        self.string(key)?
            .ok_or_else(|| key_error(&self.path(key), "missing value"))
    }

    /// A filling written as a number or as a `"p/q"` fraction.
    fn filling(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            Some(Value::String(s)) => {
                let parse = |t: &str| t.trim().parse::<f64>().ok();
                let value = match s.split_once('/') {
                    Some((p, q)) => parse(p).zip(parse(q)).map(|(p, q)| p / q),
                    None => parse(&s),
                };
                value
                    .filter(|v| v.is_finite())
                    .map(Some)
                    .ok_or_else(|| key_error(&self.path(key), format!("cannot read \"{s}\" as a filling")))
            }
            Some(other) => {
                self.table.insert(key.to_string(), other);
                self.float(key)
            }
            None => Ok(None),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.table.keys().next() {
            Some(k) => Err(key_error(&self.path(k), "unknown key")),
            None => Ok(()),
        }
    }
}

fn parse_model(mut s: Section) -> Result<ModelSpec, ConfigError> {
    let variant = s.require_string("variant")?;
    let n = s.require_integer("n_sites")?;
    let invalid = |key: &str, e: crate::Error| key_error(key, e.to_string());
    let pairing = variant == "kitaev";
    let boundary = match s.string("boundary")?.as_deref() {
        None if pairing => Boundary::Antiperiodic,
        None => Boundary::Periodic,
        Some("periodic") => Boundary::Periodic,
        Some("antiperiodic") => Boundary::Antiperiodic,
        Some(other) => {
            return Err(key_error(
                "model.boundary",
                format!("expected \"periodic\" or \"antiperiodic\", got \"{other}\""),
            ))
        }
    };
    let geometry = ChainGeometry::new(n, boundary).map_err(|e| invalid("model.n_sites", e))?;
    let variant = match variant.as_str() {
        "power_law" => Variant::PowerLawHopping {
            alpha: s.require_float("alpha")?,
            t: s.float_or("t", 1.0)?,
        },
        "tight_binding" => Variant::PowerLawHopping {
            alpha: f64::INFINITY,
            t: s.float_or("t", 1.0)?,
        },
        "fractal" => Variant::FractalDispersion {
            gamma: u32::try_from(s.require_integer("gamma")?)
                .map_err(|_| key_error("model.gamma", "value too large"))?,
            t: s.float_or("t", 1.0)?,
        },
        "phase_modulated" => Variant::PhaseModulatedHopping {
            alpha: s.require_float("alpha")?,
            phi: s.require_float("phi")?,
            t: s.float_or("t", 1.0)?,
        },
        "selective" => Variant::SelectiveHopping {
            s1: s.require_integer("s1")?,
            s2: s.integer("s2")?.unwrap_or(0),
            t1: s.float_or("t1", 1.0)?,
            t2: s.float_or("t2", 0.0)?,
            r: s.integer("r")?.unwrap_or(0),
        },
        "antipodal" => Variant::SelectiveHopping {
            s1: n / 2,
            s2: 0,
            t1: s.float_or("t1", 1.0)?,
            t2: 0.0,
            r: s.integer("r")?.unwrap_or(0),
        },
        "kitaev" => {
            let hopping = match s.float("beta")? {
                None => KitaevHopping::NearestNeighbor,
                Some(beta) => KitaevHopping::PowerLaw { beta },
            };
            Variant::KitaevChain {
                alpha: s.require_float("alpha")?,
                hopping,
                t: s.float_or("t", 0.5)?,
                delta: s.float_or("delta", 1.0)?,
            }
        }
        other => {
            return Err(key_error(
                "model.variant",
                format!("unknown variant \"{other}\""),
            ))
        }
    };
    let occupation = if pairing {
        OccupationRule::ChemicalPotential(s.require_float("mu")?)
    } else {
        let f = s
            .filling("filling")?
            .ok_or_else(|| key_error("model.filling", "missing value"))?;
        OccupationRule::FixedFilling(f)
    };
    s.finish()?;
    ModelSpec::new(geometry, variant, occupation).map_err(|e| invalid("model", e))
}

fn parse_values(s: &mut Section) -> Result<Option<SweepValues>, ConfigError> {
    if let Some(v) = s.raw("values") {
        let Value::Array(items) = v else {
            return Err(key_error("sweep.values", "expected an array of numbers"));
        };
        let values = items
            .into_iter()
            .enumerate()
            .map(|(i, item)| match item {
                Value::Float(f) => Ok(f),
                Value::Integer(n) => Ok(n as f64),
                other => Err(key_error(
                    &format!("sweep.values[{i}]"),
                    format!("expected a number, got {other}"),
                )),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        for key in ["start", "stop", "count"] {
            if s.table.contains_key(key) {
                return Err(key_error(
                    &s.path(key),
                    "give either an explicit list or start/stop/count",
                ));
            }
        }
        return Ok(Some(SweepValues::List(values)));
    }
    let start = s.float("start")?;
    let stop = s.float("stop")?;
    let count = s.integer("count")?;
    match (start, stop, count) {
        (None, None, None) => Ok(None),
        (Some(start), Some(stop), Some(count)) => Ok(Some(SweepValues::Range { start, stop, count })),
        (None, _, _) => Err(key_error("sweep.start", "missing value")),
        (_, None, _) => Err(key_error("sweep.stop", "missing value")),
        (_, _, None) => Err(key_error("sweep.count", "missing value")),
    }
}

impl std::str::FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let digest = hex::encode(Sha256::digest(text.as_bytes()));
        let mut root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;

        let model = parse_model(Section::take(&mut root, "model", true)?)?;

        let mut sweep = Section::take(&mut root, "sweep", true)?;
        let axis = match sweep.require_string("axis")?.as_str() {
            "distance" => SweepAxis::Distance,
            "mu" => SweepAxis::Mu,
            "alpha" => SweepAxis::Alpha,
            "subsystem_size" => SweepAxis::SubsystemSize,
            other => {
                return Err(key_error(
                    "sweep.axis",
                    format!("unknown axis \"{other}\""),
                ))
            }
        };
        let values = match (parse_values(&mut sweep)?, axis) {
            (Some(v), _) => v,
            (None, SweepAxis::Distance) => SweepValues::DefaultDistances,
            (None, _) => return Err(key_error("sweep.values", "missing sweep values")),
        };
        sweep.finish()?;

        let mut partition = Section::take(&mut root, "partition", true)?;
        let l = match axis {
            SweepAxis::SubsystemSize => partition.integer("l")?.unwrap_or(0),
            _ => partition.require_integer("l")?,
        };
        let d = match axis {
            SweepAxis::Distance => partition.integer("d")?.unwrap_or(0),
            _ => partition.require_integer("d")?,
        };
        let a_start = partition.integer("a_start")?.unwrap_or(1);
        if a_start == 0 || a_start > model.n_sites() {
            return Err(key_error("partition.a_start", "must lie within the chain"));
        }
        partition.finish()?;

        let mut output = Section::take(&mut root, "output", true)?;
        let path = PathBuf::from(output.require_string("path")?);
        let precision = output.integer("precision")?.unwrap_or(12);
        if !(1..=17).contains(&precision) {
            return Err(key_error("output.precision", "must lie in 1..=17"));
        }
        let holographic_c = output.float_or("holographic_c", 1.0)?;
        if !(holographic_c > 0.0) {
            return Err(key_error("output.holographic_c", "must be positive"));
        }
        output.finish()?;

        let mut compute = Section::take(&mut root, "compute", false)?;
        let workers = compute.integer("workers")?;
        if workers == Some(0) {
            return Err(key_error("compute.workers", "must be at least 1"));
        }
        compute.finish()?;

        if let Some(k) = root.keys().next() {
            return Err(key_error(k, "unknown section"));
        }

        Ok(RunConfig {
            model,
            axis,
            values,
            l,
            d,
            a_start,
            output: path,
            precision,
            holographic_c,
            workers,
            digest,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[model]
variant = "power_law"
n_sites = 2004
alpha = 2
filling = "1/4"

[sweep]
axis = "distance"
start = 1
stop = 5
count = 5

[partition]
l = 10

[output]
path = "out.csv"
"#;

    fn err_key(text: &str) -> String {
        match text.parse::<RunConfig>().unwrap_err() {
            ConfigError::Key { key, .. } => key,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn parses_base_config() {
        let c: RunConfig = BASE.parse().unwrap();
        assert_eq!(c.model.occupation, OccupationRule::FixedFilling(0.25));
        assert_eq!(c.sweep_values(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(c.precision, 12);
        assert_eq!(c.digest.len(), 64);
    }

    #[test]
    fn default_distance_range() {
        let text = BASE.replace("start = 1\nstop = 5\ncount = 5\n", "");
        let c: RunConfig = text.parse().unwrap();
        let v = c.sweep_values();
        assert_eq!(v.len(), 1002 - 10);
        assert_eq!(v[0], 1.0);
    }

    #[test]
    fn malformed_values_name_their_key() {
        assert_eq!(err_key(&BASE.replace("alpha = 2", "alpha = \"two\"")), "model.alpha");
        assert_eq!(err_key(&BASE.replace("l = 10", "l = -3")), "partition.l");
        assert_eq!(err_key(&BASE.replace("l = 10", "l = 10\nwidth = 3")), "partition.width");
        assert_eq!(err_key(&BASE.replace("filling = \"1/4\"", "filling = \"a/b\"")), "model.filling");
        assert_eq!(err_key(&BASE.replace("power_law", "power-law")), "model.variant");
        assert_eq!(err_key(&format!("{BASE}\n[extra]\nx = 1\n")), "extra");
        assert!(matches!("[model".parse::<RunConfig>(), Err(ConfigError::Syntax(_))));
    }

    #[test]
    fn kitaev_config() {
        let text = r#"
[model]
variant = "kitaev"
n_sites = 2000
alpha = 10
mu = 0.0

[sweep]
axis = "mu"
values = [-1.0, 0, 1.0]

[partition]
l = 16
d = 4

[output]
path = "mu.csv"

[compute]
workers = 2
"#;
        let c: RunConfig = text.parse().unwrap();
        assert_eq!(c.axis, SweepAxis::Mu);
        assert_eq!(c.workers, Some(2));
        assert!(c.model.variant.has_pairing());
        assert_eq!(err_key(&text.replace("mu = 0.0\n", "")), "model.mu");
    }
}
