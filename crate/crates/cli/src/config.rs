//! Run configuration: parsing, defaults and validation.
//!
//! Everything that can be rejected is rejected here, before any sweep runs.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use modmetric::fixedpoint::{ContractionParams, MapSpec, SelfMap};
use modmetric::induced::{BisectionConfig, InducedMetric};
use modmetric::sets::{MembershipConfig, SequenceSpec};
use modmetric::spaces::{FiniteMetric, DEFAULT_BOX};
use modmetric::{builtin_modular, BuiltinKind, ExtReal, LandmassGrid, Modular, ModularFlags, Point, PointSpace, Property, SamplingPlan, SpaceKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("command `{command}` does not match task.op `{op}`")]
    CommandMismatch { command: String, op: String },
}

fn invalid(path: impl Into<String>, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Metric,
    Partition,
    Converge,
    Contract,
    Fixpoint,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Metric => "metric",
            Command::Partition => "partition",
            Command::Converge => "converge",
            Command::Contract => "contract",
            Command::Fixpoint => "fixpoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceSpec,
    pub modular: ModularSpec,
    pub task: TaskSpec,
    #[serde(default)]
    pub plan: SamplingPlan,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Destination only; never echoed, so reports do not depend on it.
    #[serde(default, skip_serializing)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Euclidean {
        dim: usize,
        #[serde(default = "default_box", rename = "box")]
        bounds: [f64; 2],
    },
    Finite {
        matrix: Vec<Vec<f64>>,
    },
    Landmass {
        /// Map file, relative to the config file.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map_text: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cell_size: Option<f64>,
    },
}

fn default_box() -> [f64; 2] {
    [DEFAULT_BOX.0, DEFAULT_BOX.1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModularSpec {
    MetricAsModular,
    AverageSpeed,
    Step,
    Table {
        knots: Vec<f64>,
        tables: Vec<Vec<Vec<ExtReal>>>,
        #[serde(default)]
        flags: ModularFlags,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TaskSpec {
    Check(CheckTask),
    Metric(MetricTask),
    Partition(PartitionTask),
    Converge(ConvergeTask),
    Contract(ContractTask),
    Fixpoint(FixpointTask),
}

impl TaskSpec {
    pub fn command(&self) -> Command {
        match self {
            TaskSpec::Check(_) => Command::Check,
            TaskSpec::Metric(_) => Command::Metric,
            TaskSpec::Partition(_) => Command::Partition,
            TaskSpec::Converge(_) => Command::Converge,
            TaskSpec::Contract(_) => Command::Contract,
            TaskSpec::Fixpoint(_) => Command::Fixpoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckTask {
    #[serde(default = "default_properties")]
    pub properties: Vec<Property>,
}

fn default_properties() -> Vec<Property> {
    vec![Property::Axiom1, Property::Symmetry, Property::Triangle3, Property::MonotoneLambda]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricTask {
    /// Defaults to both metrics for convex modulars, `d_w` otherwise.
    #[serde(default)]
    pub metrics: Option<Vec<InducedMetric>>,
    #[serde(default)]
    pub pairs: Vec<[Value; 2]>,
    /// Sweep the metric axioms for every listed metric.
    #[serde(default)]
    pub axioms: bool,
    /// Check `d_w <= d_w* <= 2 d_w` on `pairs`, or on sampled pairs if none
    /// are given.
    #[serde(default)]
    pub equivalence: bool,
    #[serde(default)]
    pub bisection: BisectionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionTask {
    /// Defaults to the plan's λ grid.
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub prop2: bool,
    #[serde(default)]
    pub membership: MembershipConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeTask {
    pub sequences: Vec<SequenceConfig>,
    #[serde(default = "default_converge_grid")]
    pub grid: Vec<f64>,
    #[serde(default = "default_converge_tol")]
    pub tol: f64,
    #[serde(default)]
    pub prop3: bool,
    #[serde(default)]
    pub bisection: BisectionConfig,
}

fn default_converge_grid() -> Vec<f64> {
    vec![1.0, 10.0, 100.0]
}

fn default_converge_tol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// `1/n`
    Reciprocal,
    /// `n`
    Linear,
    /// `2^-n`
    Geometric,
    /// `(-1)^n`
    Alternating,
    Constant,
}

impl Formula {
    fn term(self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            Formula::Reciprocal => 1.0 / x,
            Formula::Linear => x,
            Formula::Geometric => 0.5f64.powi(n as i32),
            Formula::Alternating => if n % 2 == 0 { 1.0 } else { -1.0 },
            Formula::Constant => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<Formula>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Value>>,
    #[serde(default = "default_len")]
    pub len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

fn default_len() -> usize {
    200
}

/// Expected verdicts; a mismatch counts as a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cauchy: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractCheck {
    Contraction,
    StrongContraction,
    Fund1,
    Fund2,
    Palais,
    MinK,
    MinKStrong,
    Conditions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractTask {
    pub map: MapSpec,
    pub k: f64,
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
    #[serde(default = "default_contract_checks")]
    pub checks: Vec<ContractCheck>,
    #[serde(default = "default_min_k_tol")]
    pub min_k_tol: f64,
    /// λ grid for the theorem-condition search; defaults to the plan's grid.
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
}

fn default_lambda0() -> f64 {
    1.0
}

fn default_contract_checks() -> Vec<ContractCheck> {
    vec![ContractCheck::Contraction]
}

fn default_min_k_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixpointTask {
    pub map: MapSpec,
    pub x0: Value,
    pub lambda: f64,
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_max_iter() -> usize {
    1000
}

/// A sequence ready to evaluate.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub spec: SequenceSpec,
    pub limit: Option<Point>,
    pub expect: Option<Expectation>,
}

/// Built objects for one task.
#[derive(Debug, Clone)]
pub enum Task {
    Check {
        properties: Vec<Property>,
    },
    Metric {
        metrics: Vec<InducedMetric>,
        pairs: Vec<(Point, Point)>,
        axioms: bool,
        equivalence: bool,
        bisection: BisectionConfig,
    },
    Partition {
        grid: Vec<f64>,
        prop2: bool,
        membership: MembershipConfig,
    },
    Converge {
        sequences: Vec<Sequence>,
        grid: Vec<f64>,
        tol: f64,
        prop3: bool,
        bisection: BisectionConfig,
    },
    Contract {
        map: SelfMap,
        params: ContractionParams,
        checks: Vec<ContractCheck>,
        min_k_tol: f64,
        grid: Vec<f64>,
    },
    Fixpoint {
        map: SelfMap,
        x0: Point,
        lambda: f64,
        tol: f64,
        max_iter: usize,
    },
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub command: Command,
    pub space: PointSpace,
    pub modular: Modular,
    pub task: Task,
}

/// Parses a JSON config document. Unknown keys are rejected and errors name
/// the offending field.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Schema {
            path: if path == "." { "config".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Validates `config` and builds the space, modular and task. Relative map
/// paths resolve against `base`.
pub fn prepare(mut config: RunConfig, command: Command, base: &Path) -> Result<Prepared, ConfigError> {
    let op = config.task.command();
    if op != command {
        return Err(ConfigError::CommandMismatch {
            command: command.name().into(),
            op: op.name().into(),
        });
    }
    config.plan.validate().map_err(|e| invalid("plan", e))?;
    let space = build_space(&config.space, base)?;
    let modular = build_modular(&config.modular, &space)?;
    let task = build_task(&mut config, &space, &modular)?;
    Ok(Prepared {
        config,
        command,
        space,
        modular,
        task,
    })
}

fn build_space(spec: &SpaceSpec, base: &Path) -> Result<PointSpace, ConfigError> {
    match spec {
        SpaceSpec::Euclidean { dim, bounds } => {
            PointSpace::euclidean_in_box(*dim, bounds[0], bounds[1]).map_err(|e| invalid("space", e))
        }
        SpaceSpec::Finite { matrix } => {
            let metric = FiniteMetric::new(matrix.clone()).map_err(|e| invalid("space.matrix", e))?;
            Ok(PointSpace::from_finite(metric))
        }
        SpaceSpec::Landmass { map, map_text, cell_size } => {
            let grid = match (map, map_text) {
                (Some(path), None) => {
                    LandmassGrid::from_path(&base.join(path)).map_err(|e| invalid("space.map", e))?
                }
                (None, Some(text)) => LandmassGrid::parse(text).map_err(|e| invalid("space.map_text", e))?,
                _ => return Err(invalid("space", "give exactly one of map, map_text")),
            };
            let grid = match cell_size {
                Some(size) => grid.with_cell_size(*size).map_err(|e| invalid("space.cell_size", e))?,
                None => grid,
            };
            Ok(PointSpace::from_landmass(grid))
        }
    }
}

fn build_modular(spec: &ModularSpec, space: &PointSpace) -> Result<Modular, ConfigError> {
    let kind = match spec {
        ModularSpec::MetricAsModular => BuiltinKind::MetricAsModular,
        ModularSpec::AverageSpeed => BuiltinKind::AverageSpeed,
        ModularSpec::Step => BuiltinKind::Step,
        ModularSpec::Table { knots, tables, flags } => {
            return Modular::tabulated("table", space.clone(), *flags, knots.clone(), tables.clone())
                .map_err(|e| invalid("modular", e));
        }
    };
    Ok(builtin_modular(space, kind))
}

fn point(space: &PointSpace, value: &Value, path: impl Into<String>) -> Result<Point, ConfigError> {
    space.parse_point(value).map_err(|e| invalid(path, e))
}

fn check_grid(grid: &[f64], path: &str) -> Result<(), ConfigError> {
    if grid.is_empty() || grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(invalid(path, "must be nonempty with finite positive entries"));
    }
    Ok(())
}

fn check_positive(v: f64, path: &str) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive, got {v}")))
    }
}

fn build_map(spec: &MapSpec, space: &PointSpace, modular: &Modular) -> Result<SelfMap, ConfigError> {
    // the modular was built on `space`; the map must share it
    debug_assert!(modular.space().same_as(space));
    spec.build(space).map_err(|e| invalid("task.map", e))
}

fn build_task(config: &mut RunConfig, space: &PointSpace, modular: &Modular) -> Result<Task, ConfigError> {
    let plan_grid = config.plan.lambda_grid.clone();
    let convex = modular.is_convex();
    let requires_convex = |what: &str| invalid("task", format!("{what} requires a convex modular, {} is not", modular.name()));
    match &mut config.task {
        TaskSpec::Check(t) => {
            if t.properties.is_empty() {
                return Err(invalid("task.properties", "must not be empty"));
            }
            Ok(Task::Check {
                properties: t.properties.clone(),
            })
        }
        TaskSpec::Metric(t) => {
            let metrics = t
                .metrics
                .get_or_insert_with(|| {
                    if convex {
                        vec![InducedMetric::Dw, InducedMetric::DwStar]
                    } else {
                        vec![InducedMetric::Dw]
                    }
                })
                .clone();
            if metrics.contains(&InducedMetric::DwStar) && !convex {
                return Err(requires_convex("d_w_star"));
            }
            if t.equivalence && !convex {
                return Err(requires_convex("the equivalence check"));
            }
            t.bisection.validate().map_err(|e| invalid("task.bisection", e))?;
            let pairs = t
                .pairs
                .iter()
                .enumerate()
                .map(|(i, [a, b])| {
                    Ok((
                        point(space, a, format!("task.pairs[{i}][0]"))?,
                        point(space, b, format!("task.pairs[{i}][1]"))?,
                    ))
                })
                .collect::<Result<_, ConfigError>>()?;
            Ok(Task::Metric {
                metrics,
                pairs,
                axioms: t.axioms,
                equivalence: t.equivalence,
                bisection: t.bisection,
            })
        }
        TaskSpec::Partition(t) => {
            let grid = t.grid.get_or_insert(plan_grid).clone();
            check_grid(&grid, "task.grid")?;
            if space.kind() == SpaceKind::Euclidean && !t.prop2 {
                return Err(invalid("task", "partition needs a finite or landmass carrier"));
            }
            if t.prop2 && !convex {
                return Err(requires_convex("prop2"));
            }
            if t.membership.schedule.is_empty() || t.membership.schedule.windows(2).any(|s| s[0] >= s[1]) {
                return Err(invalid("task.membership.schedule", "must be nonempty and increasing"));
            }
            check_positive(t.membership.zero_tol, "task.membership.zero_tol")?;
            Ok(Task::Partition {
                grid,
                prop2: t.prop2,
                membership: t.membership.clone(),
            })
        }
        TaskSpec::Converge(t) => {
            check_grid(&t.grid, "task.grid")?;
            check_positive(t.tol, "task.tol")?;
            t.bisection.validate().map_err(|e| invalid("task.bisection", e))?;
            if t.prop3 && !convex {
                return Err(requires_convex("prop3"));
            }
            if t.sequences.is_empty() {
                return Err(invalid("task.sequences", "must not be empty"));
            }
            let sequences = t
                .sequences
                .iter()
                .enumerate()
                .map(|(i, s)| build_sequence(s, i, space, t.prop3))
                .collect::<Result<_, _>>()?;
            Ok(Task::Converge {
                sequences,
                grid: t.grid.clone(),
                tol: t.tol,
                prop3: t.prop3,
                bisection: t.bisection,
            })
        }
        TaskSpec::Contract(t) => {
            let params = ContractionParams::new(t.k, t.lambda0).map_err(|e| match e {
                modmetric::Error::Invalid { name, reason } => invalid(format!("task.{name}"), reason),
                other => invalid("task", other),
            })?;
            if t.checks.is_empty() {
                return Err(invalid("task.checks", "must not be empty"));
            }
            if t.checks.contains(&ContractCheck::Fund1) && !convex {
                return Err(requires_convex("fund1"));
            }
            if !(t.min_k_tol > 0.0 && t.min_k_tol < 0.5) {
                return Err(invalid("task.min_k_tol", "must lie in (0, 0.5)"));
            }
            let grid = t.grid.get_or_insert(plan_grid).clone();
            check_grid(&grid, "task.grid")?;
            Ok(Task::Contract {
                map: build_map(&t.map, space, modular)?,
                params,
                checks: t.checks.clone(),
                min_k_tol: t.min_k_tol,
                grid,
            })
        }
        TaskSpec::Fixpoint(t) => {
            check_positive(t.lambda, "task.lambda")?;
            check_positive(t.tol, "task.tol")?;
            if t.max_iter == 0 {
                return Err(invalid("task.max_iter", "must be at least 1"));
            }
            Ok(Task::Fixpoint {
                map: build_map(&t.map, space, modular)?,
                x0: point(space, &t.x0, "task.x0")?,
                lambda: t.lambda,
                tol: t.tol,
                max_iter: t.max_iter,
            })
        }
    }
}

fn build_sequence(s: &SequenceConfig, i: usize, space: &PointSpace, prop3: bool) -> Result<Sequence, ConfigError> {
    let at = |field: &str| format!("task.sequences[{i}].{field}");
    let spec = match (&s.formula, &s.points) {
        (Some(formula), None) => {
            let dim = space.dim().ok_or_else(|| invalid(at("formula"), "formulas need a euclidean carrier"))?;
            if s.len == 0 {
                return Err(invalid(at("len"), "must be at least 1"));
            }
            let formula = *formula;
            SequenceSpec::from_fn(space, s.len, |n| Point::Vector(vec![formula.term(n); dim]))
                .map_err(|e| invalid(at("formula"), e))?
        }
        (None, Some(points)) => {
            let pts = points
                .iter()
                .enumerate()
                .map(|(j, v)| point(space, v, format!("task.sequences[{i}].points[{j}]")))
                .collect::<Result<Vec<_>, _>>()?;
            SequenceSpec::from_points(space, pts).map_err(|e| invalid(at("points"), e))?
        }
        _ => return Err(invalid(format!("task.sequences[{i}]"), "give exactly one of formula, points")),
    };
    let limit = s.limit.as_ref().map(|v| point(space, v, at("limit"))).transpose()?;
    if prop3 && limit.is_none() {
        return Err(invalid(at("limit"), "prop3 needs a limit for every sequence"));
    }
    if s.expect.and_then(|e| e.convergent).is_some() && limit.is_none() {
        return Err(invalid(at("limit"), "expect.convergent needs a limit"));
    }
    Ok(Sequence {
        name: s.name.clone(),
        spec,
        limit,
        expect: s.expect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prepare_str(text: &str, command: Command) -> Result<Prepared, ConfigError> {
        prepare(parse_config(text)?, command, Path::new("."))
    }

    const FIXPOINT: &str = r#"{
        "space": {"kind": "euclidean", "dim": 1},
        "modular": {"kind": "average_speed"},
        "task": {"op": "fixpoint", "map": "halving", "x0": 1, "lambda": 1, "tol": 1e-8}
    }"#;

    #[test]
    fn spec_example_is_valid() {
        let p = prepare_str(FIXPOINT, Command::Fixpoint).unwrap();
        let Task::Fixpoint { x0, max_iter, .. } = p.task else {
            panic!("wrong task");
        };
        assert_eq!(x0, Point::real(1.0));
        assert_eq!(max_iter, 1000);
        assert_eq!(p.config.plan, SamplingPlan::default());
    }

    #[test]
    fn missing_modular_kind_names_the_field() {
        let text = FIXPOINT.replace(r#"{"kind": "average_speed"}"#, "{}");
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("modular") && msg.contains("kind"), "{msg}");
    }

    #[test]
    fn negative_lambda0_is_rejected() {
        let text = r#"{
            "space": {"kind": "euclidean", "dim": 1},
            "modular": {"kind": "average_speed"},
            "task": {"op": "contract", "map": "halving", "k": 0.5, "lambda0": -1}
        }"#;
        let err = prepare_str(text, Command::Contract).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lambda0") && msg.contains("must be positive"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = FIXPOINT.replace(r#""tol": 1e-8"#, r#""tol": 1e-8, "speed": 2"#);
        assert!(parse_config(&text).is_err());
        let text = FIXPOINT.replace(r#""dim": 1"#, r#""dim": 1, "colour": "red""#);
        let msg = parse_config(&text).unwrap_err().to_string();
        assert!(msg.contains("colour"), "{msg}");
    }

    #[test]
    fn command_must_match_task() {
        let err = prepare_str(FIXPOINT, Command::Check).unwrap_err();
        assert!(matches!(err, ConfigError::CommandMismatch { .. }));
    }

    #[test]
    fn metric_defaults_follow_convexity() {
        let text = r#"{
            "space": {"kind": "euclidean", "dim": 1},
            "modular": {"kind": "metric_as_modular"},
            "task": {"op": "metric", "pairs": [[0, 1]]}
        }"#;
        let p = prepare_str(text, Command::Metric).unwrap();
        let TaskSpec::Metric(t) = &p.config.task else { panic!() };
        assert_eq!(t.metrics, Some(vec![InducedMetric::Dw]));
        let bad = text.replace(r#""pairs""#, r#""metrics": ["d_w_star"], "pairs""#);
        assert!(prepare_str(&bad, Command::Metric).is_err());
    }

    #[test]
    fn points_are_checked_against_the_carrier() {
        let text = r#"{
            "space": {"kind": "finite", "matrix": [[0, 1], [1, 0]]},
            "modular": {"kind": "step"},
            "task": {"op": "metric", "pairs": [[0, 5]]}
        }"#;
        let msg = prepare_str(text, Command::Metric).unwrap_err().to_string();
        assert!(msg.contains("task.pairs[0][1]"), "{msg}");
    }

    #[test]
    fn table_modular_parses_infinity() {
        let text = r#"{
            "space": {"kind": "finite", "matrix": [[0, 1], [1, 0]]},
            "modular": {"kind": "table", "knots": [1], "tables": [[[0, "inf"], ["inf", 0]]]},
            "task": {"op": "partition"}
        }"#;
        let p = prepare_str(text, Command::Partition).unwrap();
        let v = p.modular.eval(3.0, &Point::Index(0), &Point::Index(1)).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn output_path_is_not_echoed() {
        let text = FIXPOINT.replace(r#""task""#, r#""output": {"path": "x.json", "format": "text"}, "task""#);
        let config = parse_config(&text).unwrap();
        assert_eq!(config.output.format, Format::Text);
        let echoed = serde_json::to_value(&config).unwrap();
        assert!(echoed["output"].get("path").is_none());
        assert_eq!(echoed["output"]["format"], "text");
    }
}
