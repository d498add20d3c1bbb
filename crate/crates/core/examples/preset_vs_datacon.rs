//! Run one trace under every write policy and tabulate latency, energy and
//! peripheral aging.

use pcmkit::datacon::{simulate, DataconConfig, Policy};
use pcmkit::device::DeviceConfig;
use pcmkit::trace::{generate_trace, TraceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dev = DeviceConfig::default();
    println!("{:>7} {:>8} {:>12} {:>14} {:>12} {:>10}", "density", "policy", "eff latency", "demand energy", "bg energy", "max aging");
    for density in [0.2, 0.5, 0.8] {
        let spec = TraceSpec { n_requests: 20_000, read_ratio: 0.5, set_bit_density: density, seed: 3, ..TraceSpec::default() };
        let trace = generate_trace(&spec)?;
        for policy in [Policy::InPlace, Policy::PreSet, Policy::Datacon] {
            let r = simulate(&trace, &DataconConfig { policy, ..DataconConfig::default() }, &dev, 0)?;
            println!(
                "{density:>7} {:>8} {:>12.3} {:>14.0} {:>12.0} {:>10.3e}",
                r.policy, r.effective_access_latency, r.demand_energy, r.background_energy, r.aging.max
            );
        }
    }
    Ok(())
}
