//! Command-line front end. The `pcmkit` binary only forwards to [`run`].

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SimConfig;
use crate::datacon::{self, PcmError, Policy};
use crate::device::ConfigError;
use crate::mneme::{self, MnemeError, PagePolicy, PredictorKind};
use crate::reneu::{self, MapConfig, Objective, PsoParams, ReneuError};
use crate::report::{self, compare_runs, config_digest, Format, RunManifest, StatsReport};
use crate::trace::{self, PageTraceSpec, SnnError, SnnSpec, TraceError, TraceSpec};

#[derive(Debug, Parser)]
#[command(name = "pcmkit", version, about = "PCM memory-system simulators and SNN mapper")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceKind {
    /// Line-granular read/write trace for the PCM bank.
    Pcm,
    /// Page-granular trace with allocation records for the hybrid memory.
    Pages,
    /// Random spiking network in JSON.
    Snn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Pcm,
    Hybrid,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Output {
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    pub format: Format,
    /// Also write a run manifest here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic workload.
    GenTrace {
        #[arg(long, value_enum)]
        kind: TraceKind,
        /// Generator parameters as JSON; missing fields take defaults.
        #[arg(long, default_value = "{}")]
        spec: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a line trace through the PCM bank.
    SimulatePcm {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_policy)]
        policy: Option<Policy>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Run a page trace through the four-tier hybrid memory.
    SimulateHybrid {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_page_policy)]
        policy: Option<PagePolicy>,
        #[arg(long, value_parser = parse_predictor)]
        predictor: Option<PredictorKind>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Cluster a spiking network and map the clusters onto tiles.
    MapSnn {
        #[arg(long)]
        snn: PathBuf,
        #[arg(long)]
        tiles: u32,
        #[arg(long)]
        neuron_cap: u64,
        #[arg(long)]
        synapse_cap: u64,
        #[arg(long, default_value = "aging", value_parser = parse_objective)]
        objective: Objective,
        /// PSO parameters as JSON; missing fields take defaults.
        #[arg(long, default_value = "{}")]
        pso: String,
        /// Supplies aging coefficients and the clustering strategy.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Percentage deltas of report A relative to report B.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every policy and seed combination on one trace, in parallel.
    Sweep {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        engine: Engine,
        /// Comma-separated policy names.
        #[arg(long, value_delimiter = ',', required = true)]
        policies: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse()
}

fn parse_page_policy(s: &str) -> Result<PagePolicy, String> {
    s.parse()
}

fn parse_predictor(s: &str) -> Result<PredictorKind, String> {
    match s {
        "site" => Ok(PredictorKind::Site),
        "clairvoyant" => Ok(PredictorKind::Clairvoyant),
        other => Err(format!("unknown predictor `{other}`")),
    }
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse()
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("input error: {0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::InvalidSpec(msg) => CliError::Config(ConfigError::new("spec", msg)),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SnnError> for CliError {
    fn from(e: SnnError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PcmError> for CliError {
    fn from(e: PcmError) -> Self {
        match e {
            PcmError::Config(c) => CliError::Config(c),
            PcmError::AddressOutOfRange { .. } | PcmError::Payload(_) => CliError::Input(e.to_string()),
            PcmError::OutOfSpareLines | PcmError::DeviceFailed => CliError::Infeasible(e.to_string()),
            PcmError::Invariant(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<MnemeError> for CliError {
    fn from(e: MnemeError) -> Self {
        match e {
            MnemeError::Config(c) => CliError::Config(c),
            MnemeError::UnallocatedAccess(_) | MnemeError::AlreadyAllocated(_) => CliError::Input(e.to_string()),
            MnemeError::OutOfMemory | MnemeError::DeviceFailed => CliError::Infeasible(e.to_string()),
        }
    }
}

impl From<ReneuError> for CliError {
    fn from(e: ReneuError) -> Self {
        match e {
            ReneuError::Config(c) => CliError::Config(c),
            ReneuError::TooLarge { .. } => CliError::Config(ConfigError::new("reneu", e.to_string())),
            ReneuError::NeuronTooLarge { .. } | ReneuError::Infeasible => CliError::Infeasible(e.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<SimConfig, CliError> {
    match path {
        Some(p) => Ok(SimConfig::from_json(&read_input(p)?)?),
        None => Ok(SimConfig::default()),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { what.to_string() } else { format!("{what}.{path}") };
        CliError::Config(ConfigError::new(path, e.into_inner().to_string()))
    })
}

struct Emitted<'a> {
    engine: &'a str,
    inputs: Vec<&'a Path>,
    config: serde_json::Value,
    started: Instant,
}

impl Emitted<'_> {
    fn write<T: Serialize>(self, report: &T, output: &Output) -> Result<(), CliError> {
        write_output(output.out.as_deref(), &report::emit(report, output.format))?;
        if let Some(path) = &output.manifest {
            let manifest = RunManifest {
                engine: self.engine.to_string(),
                inputs: self.inputs.iter().map(|p| p.display().to_string()).collect(),
                config_digest: config_digest(&self.config),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_clock_secs: self.started.elapsed().as_secs_f64(),
            };
            write_output(Some(path), &report::emit(&manifest, Format::Json))?;
        }
        Ok(())
    }
}

fn run_pcm(trace: &[trace::MemoryRequest], cfg: &SimConfig) -> Result<StatsReport, CliError> {
    Ok(datacon::simulate(trace, &cfg.datacon, &cfg.device, cfg.seed)?)
}

fn run_hybrid(trace: &[trace::MemoryRequest], cfg: &SimConfig) -> Result<StatsReport, CliError> {
    Ok(mneme::simulate_hybrid(trace, &cfg.mneme, &cfg.device, cfg.seed)?)
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match cli.command {
        Command::GenTrace { kind, spec, seed, out } => {
            let text = match kind {
                TraceKind::Pcm => {
                    let mut spec: TraceSpec = parse_json(&spec, "spec")?;
                    spec.seed = seed.unwrap_or(spec.seed);
                    trace::serialize_trace(&trace::generate_trace(&spec)?)
                }
                TraceKind::Pages => {
                    let mut spec: PageTraceSpec = parse_json(&spec, "spec")?;
                    spec.seed = seed.unwrap_or(spec.seed);
                    let (requests, hot) = trace::generate_page_trace(&spec)?;
                    log::info!("{} hot pages", hot.len());
                    trace::serialize_trace(&requests)
                }
                TraceKind::Snn => {
                    let mut spec: SnnSpec = parse_json(&spec, "spec")?;
                    spec.seed = seed.unwrap_or(spec.seed);
                    report::emit(&trace::generate_snn(&spec)?, Format::Json)
                }
            };
            write_output(out.as_deref(), &text)
        }
        Command::SimulatePcm { trace: path, config, policy, seed, output } => {
            let mut cfg = load_config(config.as_deref())?;
            cfg.datacon.policy = policy.unwrap_or(cfg.datacon.policy);
            cfg.seed = seed.unwrap_or(cfg.seed);
            let requests = trace::parse_trace_str(&read_input(&path)?, cfg.datacon.line_bits)?;
            log::info!("{} requests under {}", requests.len(), cfg.datacon.policy.name());
            let report = run_pcm(&requests, &cfg)?;
            let inputs = [Some(path.as_path()), config.as_deref()].into_iter().flatten().collect();
            Emitted { engine: "pcm", inputs, config: cfg.to_value(), started }.write(&report, &output)
        }
        Command::SimulateHybrid { trace: path, config, policy, predictor, seed, output } => {
            let mut cfg = load_config(config.as_deref())?;
            cfg.mneme.policy = policy.unwrap_or(cfg.mneme.policy);
            cfg.mneme.predictor = predictor.unwrap_or(cfg.mneme.predictor);
            cfg.seed = seed.unwrap_or(cfg.seed);
            let requests = trace::parse_trace_str(&read_input(&path)?, cfg.mneme.line_bits)?;
            log::info!("{} records under {}", requests.len(), cfg.mneme.policy.name());
            let report = run_hybrid(&requests, &cfg)?;
            let inputs = [Some(path.as_path()), config.as_deref()].into_iter().flatten().collect();
            Emitted { engine: "hybrid", inputs, config: cfg.to_value(), started }.write(&report, &output)
        }
        Command::MapSnn { snn, tiles, neuron_cap, synapse_cap, objective, pso, config, seed, output } => {
            let cfg = load_config(config.as_deref())?;
            let mut pso: PsoParams = parse_json(&pso, "pso")?;
            pso.seed = seed.unwrap_or(pso.seed);
            let map = MapConfig {
                tiles,
                neuron_cap,
                synapse_cap,
                objective,
                strategy: cfg.reneu.strategy,
                coefficients: cfg.reneu.coefficients,
                pso,
            };
            let graph = trace::parse_snn(read_input(&snn)?.as_bytes())?;
            let report = reneu::map_snn(&graph, &map)?;
            log::info!("{} clusters, max aging {}", report.clusters, report.max_aging);
            let config_value = serde_json::to_value(&map).expect("config serializes");
            let inputs = [Some(snn.as_path()), config.as_deref()].into_iter().flatten().collect();
            Emitted { engine: "reneu", inputs, config: config_value, started }.write(&report, &output)
        }
        Command::Compare { a, b, out } => {
            let parse = |p: &Path| {
                report::parse_report(&read_input(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
            };
            let delta = compare_runs(&parse(&a)?, &parse(&b)?).map_err(|e| CliError::Input(e.to_string()))?;
            write_output(out.as_deref(), &report::emit(&delta, Format::Json))
        }
        Command::Sweep { trace: path, config, engine, policies, seeds, out_dir } => {
            let base = load_config(config.as_deref())?;
            let text = read_input(&path)?;
            let mut runs = Vec::new();
            for name in &policies {
                for &seed in &seeds {
                    let mut cfg = base.clone();
                    cfg.seed = seed;
                    match engine {
                        Engine::Pcm => cfg.datacon.policy = name.parse().map_err(CliError::Input)?,
                        Engine::Hybrid => cfg.mneme.policy = name.parse().map_err(CliError::Input)?,
                    }
                    runs.push((name.clone(), seed, cfg));
                }
            }
            let line_bits = match engine {
                Engine::Pcm => base.datacon.line_bits,
                Engine::Hybrid => base.mneme.line_bits,
            };
            let requests = trace::parse_trace_str(&text, line_bits)?;
            fs::create_dir_all(&out_dir).map_err(|e| CliError::Input(format!("{}: {e}", out_dir.display())))?;
            let reports: Vec<StatsReport> = runs
                .par_iter()
                .map(|(_, _, cfg)| match engine {
                    Engine::Pcm => run_pcm(&requests, cfg),
                    Engine::Hybrid => run_hybrid(&requests, cfg),
                })
                .collect::<Result<_, _>>()?;
            let mut summary = csv::Writer::from_writer(Vec::new());
            summary
                .write_record(["policy", "seed", "effective_access_latency", "total_energy", "max_aging", "migrations"])
                .expect("in-memory write");
            for ((name, seed, _), r) in runs.iter().zip(&reports) {
                let file = out_dir.join(format!("{name}-seed{seed}.json"));
                write_output(Some(&file), &report::emit(r, Format::Json))?;
                summary
                    .serialize((name, seed, r.effective_access_latency, r.total_energy, r.aging.max, r.migrations))
                    .expect("in-memory write");
            }
            let bytes = summary.into_inner().expect("in-memory flush");
            write_output(Some(&out_dir.join("summary.csv")), &String::from_utf8(bytes).expect("utf-8 csv"))
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter("PCMKIT_LOG")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pcmkit: {e}");
            e.exit_code()
        }
    }
}
