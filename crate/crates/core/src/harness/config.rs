//! Experiment specification: JSON loading with defaults, `SKYSIM_`
//! environment overrides and sweep expansion.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{ConfigError, Error, FieldIssue, Result};
use crate::mc_kpi::McPath;
use crate::optimizer::{LossCriterion, QosConstraint};
use crate::scenario::{Band, ScenarioConfig};

/// Prefix of environment variables overriding configuration keys.
pub const ENV_PREFIX: &str = "SKYSIM_";

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    DataRate,
    BandwidthRbs,
    CompClusterSize,
    PInterf,
    Band,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [
        SweepParam::DataRate,
        SweepParam::BandwidthRbs,
        SweepParam::CompClusterSize,
        SweepParam::PInterf,
        SweepParam::Band,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::DataRate => "data_rate",
            SweepParam::BandwidthRbs => "bandwidth_rbs",
            SweepParam::CompClusterSize => "comp_cluster_size",
            SweepParam::PInterf => "p_interf",
            SweepParam::Band => "band",
        }
    }

    /// Output column, with units.
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::DataRate => "data_rate_bps",
            SweepParam::PInterf => "p_interf",
            other => other.name(),
        }
    }

    pub fn parse(s: &str) -> Option<SweepParam> {
        Self::ALL.into_iter().find(|p| p.name() == s || p.column() == s)
    }

    /// Parses one command-line value.
    pub fn parse_value(self, s: &str) -> Option<SweepValue> {
        match self {
            SweepParam::Band => Band::parse(s).map(|b| SweepValue::Text(b.label().to_string())),
            _ => s.trim().parse().ok().map(SweepValue::Number),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Text(String),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Number(x) => write!(f, "{x}"),
            SweepValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<SweepValue>,
}

impl Sweep {
    pub fn numbers(param: SweepParam, values: &[f64]) -> Self {
        Self { param, values: values.iter().map(|&v| SweepValue::Number(v)).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    KpiTable,
    Ccdf,
    OptimizerReport,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    /// Cartesian product, first sweep outermost.
    pub sweeps: Vec<Sweep>,
    pub n_outer_drops: u64,
    pub n_inner_packets: u64,
    pub master_seed: u64,
    pub outputs: Vec<OutputKind>,
    /// Paths to evaluate; the full candidate set when absent.
    pub paths: Option<Vec<McPath>>,
    pub ccdf_thresholds_s: Vec<f64>,
    /// Availability threshold of the optimizer.
    pub p_th: f64,
    pub loss_criterion: LossCriterion,
    /// Extra `(eps_th, p_th)` demands for the optimizer; the scenario
    /// thresholds alone when empty.
    pub qos_grid: Vec<QosTarget>,
    /// Report wall-clock time per sweep point. Off by default so that
    /// result files are reproducible byte for byte.
    pub record_runtime: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            sweeps: Vec::new(),
            n_outer_drops: 2000,
            n_inner_packets: 500,
            master_seed: 1,
            outputs: vec![OutputKind::KpiTable],
            paths: None,
            ccdf_thresholds_s: (0..=100).map(|i| i as f64 / 2000.0).collect(),
            p_th: 0.9,
            loss_criterion: LossCriterion::Mean,
            qos_grid: Vec::new(),
            record_runtime: false,
        }
    }
}

/// Reliability and availability demand of one optimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosTarget {
    pub eps_th: f64,
    pub p_th: f64,
}

/// One point of the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub coords: Vec<(SweepParam, SweepValue)>,
    pub scenario: ScenarioConfig,
}

impl ExperimentSpec {
    pub fn qos(&self) -> QosConstraint {
        QosConstraint {
            eps_th: self.scenario.eps_th,
            d_th_s: self.scenario.d_th_s,
            p_th: self.p_th,
            loss: self.loss_criterion,
        }
    }

    /// Demands the optimizer is run against at every sweep point.
    pub fn qos_list(&self) -> Vec<QosConstraint> {
        if self.qos_grid.is_empty() {
            return vec![self.qos()];
        }
        self.qos_grid.iter().map(|t| QosConstraint { eps_th: t.eps_th, p_th: t.p_th, ..self.qos() }).collect()
    }

    pub fn validate(&self) -> Vec<FieldIssue> {
        let mut issues: Vec<FieldIssue> = self
            .scenario
            .validate()
            .into_iter()
            .map(|i| FieldIssue::new(format!("scenario.{}", i.field), i.reason))
            .collect();
        if self.n_outer_drops == 0 {
            issues.push(FieldIssue::new("n_outer_drops", "must be at least 1"));
        }
        if self.n_inner_packets == 0 {
            issues.push(FieldIssue::new("n_inner_packets", "must be at least 1"));
        }
        if self.outputs.is_empty() {
            issues.push(FieldIssue::new("outputs", "must name at least one output"));
        }
        if let Some(p) = &self.paths {
            if p.is_empty() {
                issues.push(FieldIssue::new("paths", "must not be empty"));
            }
        }
        if self.ccdf_thresholds_s.windows(2).any(|w| !(w[0] < w[1])) {
            issues.push(FieldIssue::new("ccdf_thresholds_s", "must be strictly increasing"));
        }
        for q in self.qos_list() {
            issues.extend(q.validate());
        }
        let mut seen = Vec::new();
        for (i, s) in self.sweeps.iter().enumerate() {
            let field = format!("sweeps[{i}]");
            if seen.contains(&s.param) {
                issues.push(FieldIssue::new(&field, format!("parameter {} swept twice", s.param)));
            }
            seen.push(s.param);
            if s.values.is_empty() {
                issues.push(FieldIssue::new(&field, "needs at least one value"));
            }
            for v in &s.values {
                let mut cfg = self.scenario.clone();
                match apply(&mut cfg, s.param, v) {
                    Err(reason) => issues.push(FieldIssue::new(&field, reason)),
                    Ok(()) => {
                        for issue in cfg.validate() {
                            issues.push(FieldIssue::new(&field, format!("value {v}: {issue}")));
                        }
                    }
                }
            }
        }
        if let Some(paths) = &self.paths {
            for p in paths {
                let uses_sat = p.members().iter().filter_map(|k| match k {
                    crate::mc_kpi::PathKind::Sat(b) => Some(*b),
                    _ => None,
                });
                for b in uses_sat {
                    let swept = self.sweeps.iter().any(|s| s.param == SweepParam::Band);
                    if !swept && !self.scenario.sat_bands.contains(&b) {
                        issues.push(FieldIssue::new("paths", format!("{p} uses a disabled satellite band")));
                    }
                }
                for k in p.members() {
                    if let crate::mc_kpi::PathKind::A2A { relays, .. } = k {
                        if *relays > self.scenario.swarm_size {
                            issues.push(FieldIssue::new("paths", format!("{p} needs more relays than swarm_size")));
                        }
                    }
                }
            }
        }
        issues
    }

    /// Sweep grid in row-major order, first sweep outermost.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut points = vec![SweepPoint { coords: Vec::new(), scenario: self.scenario.clone() }];
        for s in &self.sweeps {
            points = points
                .into_iter()
                .flat_map(|p| {
                    s.values.iter().map(move |v| {
                        let mut q = p.clone();
                        apply(&mut q.scenario, s.param, v).expect("validated sweep value");
                        q.coords.push((s.param, v.clone()));
                        q
                    })
                })
                .collect();
        }
        points
    }
}

fn apply(cfg: &mut ScenarioConfig, param: SweepParam, v: &SweepValue) -> std::result::Result<(), String> {
    let count = |x: f64| -> std::result::Result<u64, String> {
        if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
            Ok(x as u64)
        } else {
            Err(format!("{param} needs whole numbers, got {x}"))
        }
    };
    match (param, v) {
        (SweepParam::DataRate, SweepValue::Number(x)) => cfg.data_rate_bps = *x,
        (SweepParam::PInterf, SweepValue::Number(x)) => cfg.p_interf = *x,
        (SweepParam::BandwidthRbs, SweepValue::Number(x)) => cfg.bandwidth_rbs = count(*x)? as u32,
        (SweepParam::CompClusterSize, SweepValue::Number(x)) => cfg.comp_cluster_size = count(*x)? as usize,
        (SweepParam::Band, SweepValue::Text(s)) => {
            let b = Band::parse(s).ok_or_else(|| format!("unknown band {s:?}"))?;
            cfg.sat_bands = vec![b];
        }
        (p, v) => return Err(format!("value {v} does not fit parameter {p}")),
    }
    Ok(())
}

/// Parses, applies environment overrides and validates. Empty text yields
/// the defaults.
pub fn load_config_with_env<I>(text: &str, env: I) -> Result<ExperimentSpec>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut tree: Value = if text.trim().is_empty() {
        Value::Object(Map::new())
    } else {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?
    };
    apply_env(&mut tree, env)?;
    let spec: ExperimentSpec =
        serde_json::from_value(tree).map_err(|e| ConfigError::Parse { line: 0, column: 0, message: e.to_string() })?;
    let issues = spec.validate();
    if issues.is_empty() {
        Ok(spec)
    } else {
        Err(ConfigError::Validation(issues).into())
    }
}

/// [`load_config_with_env`] with the process environment.
pub fn load_config(text: &str) -> Result<ExperimentSpec> {
    load_config_with_env(text, std::env::vars())
}

pub fn load_config_file(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(Error::Io)?;
    load_config(&text)
}

/// `SKYSIM_<KEY>=<value>` sets a top-level key, or a scenario key when no
/// top-level key matches. Values are read as JSON, falling back to a string.
fn apply_env<I>(tree: &mut Value, env: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let top_keys = key_names(&serde_json::to_value(ExperimentSpec::default()).expect("serializable"));
    let scenario_keys = key_names(&serde_json::to_value(ScenarioConfig::default()).expect("serializable"));
    let Value::Object(root) = tree else {
        return Err(ConfigError::Parse { line: 1, column: 1, message: "top level must be an object".into() }.into());
    };
    let mut issues = Vec::new();
    let mut vars: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (k, raw) in vars {
        let key = k[ENV_PREFIX.len()..].to_ascii_lowercase();
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        if key != "scenario" && top_keys.contains(&key) {
            root.insert(key, value);
        } else if scenario_keys.contains(&key) {
            let scenario = root.entry("scenario").or_insert_with(|| Value::Object(Map::new()));
            match scenario {
                Value::Object(m) => {
                    m.insert(key, value);
                }
                _ => issues.push(FieldIssue::new(k, "scenario is not an object")),
            }
        } else {
            issues.push(FieldIssue::new(k, "unknown configuration key"));
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(ConfigError::Validation(issues).into())
    }
}

fn key_names(v: &Value) -> Vec<String> {
    match v {
        Value::Object(m) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}
