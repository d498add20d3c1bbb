//! Cluster a spiking network, map it onto tiles with PSO and compare the
//! aging objective against the traffic objective.

use pcmkit::reneu::{map_snn, MapConfig, Objective, PsoParams};
use pcmkit::trace::{generate_snn, SnnSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = generate_snn(&SnnSpec { n_neurons: 48, seed: 5, ..SnnSpec::default() })?;
    for objective in [Objective::Aging, Objective::Traffic] {
        let cfg = MapConfig {
            tiles: 4,
            neuron_cap: 4,
            synapse_cap: 64,
            objective,
            strategy: Default::default(),
            coefficients: Default::default(),
            pso: PsoParams { seed: 5, ..PsoParams::default() },
        };
        let r = map_snn(&graph, &cfg)?;
        println!(
            "{objective:?}: {} clusters, max aging {:.3e}, spread {:.3e}, inter-tile traffic {}",
            r.clusters,
            r.max_aging,
            r.aging_spread,
            r.traffic
        );
        println!("  mapping {:?}", r.mapping.0);
        println!("  tile aging {:?}", r.tile_aging.iter().map(|a| format!("{a:.2e}")).collect::<Vec<_>>());
    }
    Ok(())
}
