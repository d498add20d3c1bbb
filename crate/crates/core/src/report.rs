//! Run statistics, report emission and run comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgingSummary {
    pub per_circuit: Vec<f64>,
    pub max: f64,
    pub failure_threshold: f64,
}

impl AgingSummary {
    pub fn from_circuits(accrued: impl IntoIterator<Item = f64>, failure_threshold: f64) -> Self {
        let per_circuit: Vec<f64> = accrued.into_iter().collect();
        let max = per_circuit.iter().copied().fold(0.0, f64::max);
        Self { per_circuit, max, failure_threshold }
    }

    pub fn total(&self) -> f64 {
        self.per_circuit.iter().sum()
    }
}

/// Totals shared by the PCM-bank and hybrid-memory simulators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub engine: String,
    pub policy: String,
    pub requests: u64,
    pub reads: u64,
    pub writes: u64,
    /// Sum of per-request latencies, stalls and migration time included.
    pub total_latency: u64,
    pub effective_access_latency: f64,
    pub stall_cycles: u64,
    pub demand_energy: f64,
    pub background_energy: f64,
    pub total_energy: f64,
    pub redirections: u64,
    pub pool_misses: u64,
    pub migrations: u64,
    pub access_histogram: BTreeMap<String, u64>,
    pub aging: AgingSummary,
    pub failed: bool,
    pub trace_digest: String,
    pub seed: u64,
    pub config: Value,
}

impl StatsReport {
    pub fn empty(engine: &str, policy: &str, trace_digest: &str, seed: u64, config: Value) -> Self {
        Self {
            engine: engine.to_string(),
            policy: policy.to_string(),
            requests: 0,
            reads: 0,
            writes: 0,
            total_latency: 0,
            effective_access_latency: 0.0,
            stall_cycles: 0,
            demand_energy: 0.0,
            background_energy: 0.0,
            total_energy: 0.0,
            redirections: 0,
            pool_misses: 0,
            migrations: 0,
            access_histogram: BTreeMap::new(),
            aging: AgingSummary { per_circuit: Vec::new(), max: 0.0, failure_threshold: 0.0 },
            failed: false,
            trace_digest: trace_digest.to_string(),
            seed,
            config,
        }
    }

    /// Recomputes the derived totals.
    pub fn finalize(&mut self) {
        self.total_energy = self.demand_energy + self.background_energy;
        self.effective_access_latency = if self.requests == 0 {
            0.0
        } else {
            self.total_latency as f64 / self.requests as f64
        };
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// Flattens nested objects and arrays into dotted keys, in key order.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match value {
            Value::Object(map) => {
                for (k, v) in map {
                    walk(&key(k), v, out);
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&key(&i.to_string()), v, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            Value::Null => out.push((prefix.to_string(), String::new())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

/// Serializes any report. JSON is pretty-printed with a trailing newline;
/// CSV is a header row of dotted keys plus one value row.
pub fn emit<T: Serialize>(report: &T, format: Format) -> String {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
            text.push('\n');
            text
        }
        Format::Csv => {
            let value = serde_json::to_value(report).expect("reports serialize");
            let pairs = flatten(&value);
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(pairs.iter().map(|(k, _)| k)).expect("in-memory write");
            writer.write_record(pairs.iter().map(|(_, v)| v)).expect("in-memory write");
            String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
        }
    }
}

pub fn emit_report(report: &StatsReport, format: Format) -> String {
    emit(report, format)
}

pub fn parse_report(text: &str) -> Result<StatsReport, serde_json::Error> {
    serde_json::from_str(text)
}

/// Percentage deltas of `a` relative to `b`; negative means `a` is lower.
/// `None` when `b` is zero and `a` is not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub trace_digest: String,
    pub a_policy: String,
    pub b_policy: String,
    pub latency_pct: Option<f64>,
    pub energy_pct: Option<f64>,
    pub aging_pct: Option<f64>,
    pub migrations_pct: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CompareError {
    #[error("reports come from different traces ({a} vs {b})")]
    MismatchedTrace { a: String, b: String },
}

fn pct(a: f64, b: f64) -> Option<f64> {
    if b == 0.0 {
        (a == 0.0).then_some(0.0)
    } else {
        Some((a - b) / b * 100.0)
    }
}

pub fn compare_runs(a: &StatsReport, b: &StatsReport) -> Result<DeltaReport, CompareError> {
    if a.trace_digest != b.trace_digest {
        return Err(CompareError::MismatchedTrace { a: a.trace_digest.clone(), b: b.trace_digest.clone() });
    }
    Ok(DeltaReport {
        trace_digest: a.trace_digest.clone(),
        a_policy: a.policy.clone(),
        b_policy: b.policy.clone(),
        latency_pct: pct(a.effective_access_latency, b.effective_access_latency),
        energy_pct: pct(a.total_energy, b.total_energy),
        aging_pct: pct(a.aging.max, b.aging.max),
        migrations_pct: pct(a.migrations as f64, b.migrations as f64),
    })
}

/// Provenance of one CLI run. Kept apart from the report because it
/// carries wall-clock time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub engine: String,
    pub inputs: Vec<String>,
    pub config_digest: String,
    pub tool_version: String,
    pub wall_clock_secs: f64,
}

/// SHA-256 over compact JSON with object keys in sorted order.
pub fn config_digest(config: &Value) -> String {
    let canonical = serde_json::to_string(config).expect("values serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
