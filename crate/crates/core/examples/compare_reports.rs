//! Serialize two reports, read them back and print percentage deltas.

use pcmkit::datacon::{simulate, DataconConfig, Policy};
use pcmkit::device::DeviceConfig;
use pcmkit::report::{compare_runs, emit_report, parse_report, Format};
use pcmkit::trace::{generate_trace, TraceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trace = generate_trace(&TraceSpec { n_requests: 10_000, seed: 2, ..TraceSpec::default() })?;
    let dev = DeviceConfig::default();
    let run = |policy| simulate(&trace, &DataconConfig { policy, ..DataconConfig::default() }, &dev, 0);
    let a = parse_report(&emit_report(&run(Policy::Datacon)?, Format::Json))?;
    let b = parse_report(&emit_report(&run(Policy::InPlace)?, Format::Json))?;
    let delta = compare_runs(&a, &b)?;
    let show = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:+.1}%"));
    println!("{} vs {}", delta.a_policy, delta.b_policy);
    println!("  latency {}", show(delta.latency_pct));
    println!("  energy  {}", show(delta.energy_pct));
    println!("  aging   {}", show(delta.aging_pct));
    Ok(())
}
