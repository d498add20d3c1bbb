//! Generate a seeded line trace and a spiking network, then show that the
//! same seed reproduces the same digest.

use pcmkit::trace::{generate_snn, generate_trace, serialize_trace, trace_digest, AddressModel, SnnSpec, TraceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = TraceSpec {
        n_requests: 2_000,
        read_ratio: 0.4,
        set_bit_density: 0.3,
        address_model: AddressModel::Zipf { s: 1.0 },
        seed: 7,
        ..TraceSpec::default()
    };
    let trace = generate_trace(&spec)?;
    let again = generate_trace(&spec)?;
    assert_eq!(trace_digest(&trace), trace_digest(&again));

    let writes = trace.iter().filter(|r| r.is_write()).count();
    println!("{} requests, {writes} writes, digest {}", trace.len(), &trace_digest(&trace)[..16]);
    for line in serialize_trace(&trace[..3]).lines() {
        println!("  {}...", &line[..line.len().min(72)]);
    }

    let graph = generate_snn(&SnnSpec { n_neurons: 16, seed: 7, ..SnnSpec::default() })?;
    let spikes: u64 = graph.neurons.iter().map(|n| n.spikes).sum();
    println!("snn: {} neurons, {} synapses, {spikes} spikes", graph.neurons.len(), graph.synapses.len());
    Ok(())
}
