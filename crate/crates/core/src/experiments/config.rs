use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{QlbmError, Result};
use crate::lattice::{
    make_velocity_set, DensityField, LatticeGrid, VelocityField, VelocitySet, VelocitySetName,
    DEFAULT_CS2,
};

use super::initial::{boxcar_with, uniform_ic, BOXCAR_AMPLITUDE, BOXCAR_BACKGROUND, BOXCAR_WIDTH};
use super::velocity::{linear_velocity_with, CoordinateMap, DoubleVortex};

fn scalar_or_vec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// Which estimator a case runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Classical reference only.
    Digital,
    /// Independent per-shot circuit simulation.
    Sampled,
    /// Measurement-tree walk with binomial shot splitting.
    Ensemble,
    /// Presampled branch instructions.
    Hybrid,
    /// Exact enumeration of all outcome sequences.
    Oracle,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Digital,
        Mode::Sampled,
        Mode::Ensemble,
        Mode::Hybrid,
        Mode::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Digital => "digital",
            Mode::Sampled => "sampled",
            Mode::Ensemble => "ensemble",
            Mode::Hybrid => "hybrid",
            Mode::Oracle => "oracle",
        }
    }

    /// Whether the mode draws shots.
    pub fn is_sampled(self) -> bool {
        matches!(self, Mode::Sampled | Mode::Ensemble | Mode::Hybrid)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = QlbmError;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Mode::ALL.iter().map(|m| m.as_str()).collect();
                QlbmError::Config(format!(
                    "unknown mode `{s}`, expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum InitialCondition {
    Boxcar {
        background: f64,
        amplitude: f64,
        width: usize,
    },
    Uniform {
        value: f64,
    },
    /// Explicit per-site values in flattened order.
    Values {
        values: Vec<f64>,
    },
}

impl InitialCondition {
    pub fn boxcar() -> Self {
        InitialCondition::Boxcar {
            background: BOXCAR_BACKGROUND,
            amplitude: BOXCAR_AMPLITUDE,
            width: BOXCAR_WIDTH,
        }
    }

    pub fn build(&self, grid: LatticeGrid) -> Result<DensityField> {
        match self {
            InitialCondition::Boxcar {
                background,
                amplitude,
                width,
            } => boxcar_with(grid, *background, *amplitude, *width),
            InitialCondition::Uniform { value } => uniform_ic(grid, *value),
            InitialCondition::Values { values } => DensityField::new(grid, values.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum VelocitySpec {
    Zero,
    /// Constant vector; a single component is applied along every grid axis.
    Uniform {
        #[serde(deserialize_with = "scalar_or_vec")]
        u: Vec<f64>,
    },
    /// `u0 + slope * x` along the first axis.
    Linear {
        u0: f64,
        slope: f64,
        coordinates: CoordinateMap,
    },
    DoubleVortex(DoubleVortex),
}

impl VelocitySpec {
    pub fn linear() -> Self {
        VelocitySpec::Linear {
            u0: 0.1,
            slope: 0.1,
            coordinates: CoordinateMap::Endpoint,
        }
    }

    pub fn build(&self, grid: LatticeGrid) -> Result<VelocityField> {
        match self {
            VelocitySpec::Zero => Ok(VelocityField::zero(grid)),
            VelocitySpec::Uniform { u } => {
                let mut v = [0.0; 3];
                match u.as_slice() {
                    [s] => v[..grid.dims()].fill(*s),
                    comps if comps.len() == grid.dims() => v[..comps.len()].copy_from_slice(comps),
                    comps => {
                        return Err(QlbmError::Config(format!(
                            "velocity_field.params.u has {} components for a {}-d grid",
                            comps.len(),
                            grid.dims()
                        )))
                    }
                }
                VelocityField::uniform(grid, v)
            }
            VelocitySpec::Linear {
                u0,
                slope,
                coordinates,
            } => linear_velocity_with(grid, *u0, *slope, *coordinates),
            VelocitySpec::DoubleVortex(v) => v.field(grid),
        }
    }
}

/// One runnable case. Parsed from JSON, see [`CaseConfig::from_json`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub velocity_set: VelocitySetName,
    pub grid: Vec<usize>,
    pub cs2: f64,
    pub initial_condition: InitialCondition,
    pub velocity_field: VelocitySpec,
    pub steps: usize,
    pub shots: u64,
    pub mode: Mode,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Everything a case needs to run, resolved from a [`CaseConfig`].
#[derive(Debug, Clone)]
pub struct CaseInputs {
    pub set: VelocitySet,
    pub grid: LatticeGrid,
    pub rho0: DensityField,
    pub u: VelocityField,
}

impl CaseConfig {
    /// Parses JSON. Field names accept the short forms `set`, `N`, `ic`,
    /// `u` and `T`; `shots` may be written as a float such as `1e6`.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                QlbmError::Config(inner.to_string())
            } else {
                QlbmError::Config(format!("{path}: {inner}"))
            }
        })?;
        let config = raw.resolve()?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QlbmError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            QlbmError::Config(m) => QlbmError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that the case can be built. Does not run anything.
    pub fn validate(&self) -> Result<()> {
        let inputs = self.inputs()?;
        if self.mode.is_sampled() && self.shots == 0 {
            return Err(QlbmError::Config("shots must be at least 1".into()));
        }
        inputs.u.check_constraint(&inputs.set)
    }

    pub fn inputs(&self) -> Result<CaseInputs> {
        if !(self.cs2 > 0.0 && self.cs2.is_finite()) {
            return Err(QlbmError::Config(format!(
                "cs2 must be positive, got {}",
                self.cs2
            )));
        }
        let set = make_velocity_set(self.velocity_set).with_cs2(self.cs2)?;
        let grid = LatticeGrid::new(&self.grid)?;
        if set.dim() != grid.dims() {
            return Err(QlbmError::Config(format!(
                "{} needs a {}-d grid, got {:?}",
                set.label(),
                set.dim(),
                self.grid
            )));
        }
        let rho0 = self.initial_condition.build(grid)?;
        let u = self.velocity_field.build(grid)?;
        Ok(CaseInputs { set, grid, rho0, u })
    }
}

fn default_cs2() -> f64 {
    DEFAULT_CS2
}

fn default_mode() -> Mode {
    Mode::Ensemble
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    name: Option<String>,
    #[serde(alias = "set")]
    velocity_set: VelocitySetName,
    #[serde(alias = "N", deserialize_with = "de_grid")]
    grid: Vec<usize>,
    #[serde(default = "default_cs2")]
    cs2: f64,
    #[serde(alias = "ic")]
    initial_condition: Tagged,
    #[serde(alias = "u")]
    velocity_field: Tagged,
    #[serde(alias = "T")]
    steps: usize,
    #[serde(default, deserialize_with = "de_count")]
    shots: u64,
    #[serde(default = "default_mode")]
    mode: Mode,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

/// `"name"`, `{"type": name, "params": {...}}` or the shorthand
/// `{name: params}`.
struct Tagged {
    kind: String,
    params: Value,
}

impl<'de> Deserialize<'de> for Tagged {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(kind) => Ok(Tagged {
                kind,
                params: Value::Null,
            }),
            Value::Object(mut map) => {
                if let Some(kind) = map.remove("type") {
                    let kind = kind
                        .as_str()
                        .ok_or_else(|| de::Error::custom("`type` must be a string"))?
                        .to_owned();
                    let params = map.remove("params").unwrap_or(Value::Null);
                    if let Some(extra) = map.keys().next() {
                        return Err(de::Error::unknown_field(extra, &["type", "params"]));
                    }
                    Ok(Tagged { kind, params })
                } else if map.len() == 1 {
                    let (kind, params) = map.into_iter().next().expect("one entry");
                    Ok(Tagged { kind, params })
                } else {
                    Err(de::Error::custom(
                        "expected a name, {\"type\": .., \"params\": ..} or {name: params}",
                    ))
                }
            }
            other => Err(de::Error::custom(format!(
                "expected a name or an object, found {other}"
            ))),
        }
    }
}

impl Tagged {
    fn parse<T: serde::de::DeserializeOwned>(&self, field: &str) -> Result<T> {
        let mut obj = serde_json::Map::new();
        obj.insert("type".into(), Value::String(self.kind.clone()));
        if !self.params.is_null() {
            obj.insert("params".into(), self.params.clone());
        }
        serde_path_to_error::deserialize(Value::Object(obj)).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                QlbmError::Config(format!("{field}: {inner}"))
            } else {
                QlbmError::Config(format!("{field}.{path}: {inner}"))
            }
        })
    }
}

impl RawConfig {
    fn resolve(self) -> Result<CaseConfig> {
        let initial_condition = match (self.initial_condition.kind.as_str(), &self.initial_condition.params) {
            ("boxcar", p) => {
                let p: BoxcarParams = params(p, "initial_condition")?;
                InitialCondition::Boxcar {
                    background: p.background,
                    amplitude: p.amplitude,
                    width: p.width,
                }
            }
            ("uniform", Value::Number(n)) => InitialCondition::Uniform {
                value: n.as_f64().unwrap_or(f64::NAN),
            },
            _ => self.initial_condition.parse("initial_condition")?,
        };
        let velocity_field = match (self.velocity_field.kind.as_str(), &self.velocity_field.params) {
            ("uniform", Value::Number(n)) => VelocitySpec::Uniform {
                u: vec![n.as_f64().unwrap_or(f64::NAN)],
            },
            ("uniform", Value::Array(_)) => VelocitySpec::Uniform {
                u: params(&self.velocity_field.params, "velocity_field.params")?,
            },
            ("zero", _) => VelocitySpec::Zero,
            ("linear", p) => {
                let p: LinearParams = params(p, "velocity_field")?;
                VelocitySpec::Linear {
                    u0: p.u0,
                    slope: p.slope,
                    coordinates: p.coordinates,
                }
            }
            ("double_vortex", p) => {
                VelocitySpec::DoubleVortex(params(p, "velocity_field.params")?)
            }
            _ => self.velocity_field.parse("velocity_field")?,
        };
        Ok(CaseConfig {
            name: self.name,
            velocity_set: self.velocity_set,
            grid: self.grid,
            cs2: self.cs2,
            initial_condition,
            velocity_field,
            steps: self.steps,
            shots: self.shots,
            mode: self.mode,
            seed: self.seed,
            output_dir: self.output_dir,
        })
    }
}

fn params<T: serde::de::DeserializeOwned + Default>(value: &Value, field: &str) -> Result<T> {
    if value.is_null() {
        return Ok(T::default());
    }
    serde_path_to_error::deserialize(value.clone()).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            QlbmError::Config(format!("{field}: {inner}"))
        } else {
            QlbmError::Config(format!("{field}.{path}: {inner}"))
        }
    })
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BoxcarParams {
    background: f64,
    amplitude: f64,
    width: usize,
}

impl Default for BoxcarParams {
    fn default() -> Self {
        BoxcarParams {
            background: BOXCAR_BACKGROUND,
            amplitude: BOXCAR_AMPLITUDE,
            width: BOXCAR_WIDTH,
        }
    }
}

#[derive(Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LinearParams {
    u0: f64,
    slope: f64,
    coordinates: CoordinateMap,
}

impl Default for LinearParams {
    fn default() -> Self {
        LinearParams {
            u0: 0.1,
            slope: 0.1,
            coordinates: CoordinateMap::Endpoint,
        }
    }
}

fn de_grid<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Grid {
        One(usize),
        Many(Vec<usize>),
    }
    match Grid::deserialize(d) {
        Ok(Grid::One(n)) => Ok(vec![n]),
        Ok(Grid::Many(v)) => Ok(v),
        Err(_) => Err(de::Error::custom(
            "expected a positive integer or an array of positive integers",
        )),
    }
}

/// Accepts `1000000` as well as `1e6`.
fn de_count<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
    match Value::deserialize(d)? {
        Value::Number(n) => {
            if let Some(v) = n.as_u64() {
                return Ok(v);
            }
            match n.as_f64() {
                Some(f) if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 => Ok(f as u64),
                _ => Err(de::Error::custom(format!(
                    "expected a non-negative integer, found {n}"
                ))),
            }
        }
        other => Err(de::Error::custom(format!(
            "expected a non-negative integer, found {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_short_form() {
        let c = CaseConfig::from_json(
            r#"{"set":"D1Q3","N":32,"ic":"boxcar","u":{"uniform":0.1},"T":1,"shots":1e6}"#,
        )
        .unwrap();
        assert_eq!(c.grid, vec![32]);
        assert_eq!(c.shots, 1_000_000);
        assert_eq!(c.mode, Mode::Ensemble);
        assert_eq!(c.seed, 0);
        assert_eq!(c.cs2, DEFAULT_CS2);
        assert_eq!(c.initial_condition, InitialCondition::boxcar());
        assert_eq!(c.velocity_field, VelocitySpec::Uniform { u: vec![0.1] });
        let tagged = CaseConfig::from_json(
            r#"{"set":"D1Q3","N":32,"ic":"boxcar","u":{"type":"uniform","params":{"u":0.1}},"T":1,"shots":10}"#,
        )
        .unwrap();
        assert_eq!(tagged.velocity_field, c.velocity_field);
    }

    #[test]
    fn canonical_round_trip() {
        let c = CaseConfig::from_json(
            r#"{"velocity_set":"d2q9","grid":[32,16],
                "initial_condition":{"type":"uniform","params":{"value":1.0}},
                "velocity_field":{"type":"double_vortex"},
                "steps":5,"shots":1000,"mode":"sampled","seed":7}"#,
        )
        .unwrap();
        let again = CaseConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.velocity_field, VelocitySpec::DoubleVortex(DoubleVortex::default()));
    }

    #[test]
    fn errors_name_the_field() {
        let bad_grid = CaseConfig::from_json(
            r#"{"set":"D1Q3","N":24,"ic":"boxcar","u":"zero","T":1,"shots":10}"#,
        )
        .unwrap_err();
        assert!(matches!(bad_grid, QlbmError::Config(ref m) if m.contains("power of two")), "{bad_grid}");

        let bad_mode = CaseConfig::from_json(
            r#"{"set":"D1Q3","N":32,"ic":"boxcar","u":"zero","T":1,"shots":10,"mode":"noisy"}"#,
        )
        .unwrap_err();
        let m = bad_mode.to_string();
        assert!(m.contains("mode") && m.contains("ensemble") && m.contains("oracle"), "{m}");

        let bad_steps = CaseConfig::from_json(
            r#"{"set":"D1Q3","N":32,"ic":"boxcar","u":"zero","T":"x","shots":10}"#,
        )
        .unwrap_err();
        assert!(bad_steps.to_string().contains("T: invalid type"), "{bad_steps}");

        let missing = CaseConfig::from_json(r#"{"set":"D1Q3","N":32}"#).unwrap_err();
        assert!(missing.to_string().contains("initial_condition"), "{missing}");

        let bad_param = CaseConfig::from_json(
            r#"{"set":"D1Q3","N":32,"ic":{"type":"boxcar","params":{"width":"six"}},"u":"zero","T":1}"#,
        )
        .unwrap_err();
        assert!(bad_param.to_string().contains("width"), "{bad_param}");
    }

    #[test]
    fn constraint_violation_is_domain_error() {
        let err = CaseConfig::from_json(
            r#"{"set":"D1Q3","N":8,"ic":"boxcar","u":{"uniform":0.5},"T":1,"shots":10}"#,
        )
        .unwrap_err();
        assert!(matches!(err, QlbmError::Domain(_)));
    }
}
