//! Aging-aware mapping of spiking networks onto neuromorphic tiles.
//!
//! A network is packed into clusters that each fit one core slot, the
//! clusters are assigned to tiles, and the assignment is scored by the most
//! aged tile. A tile ages at the sum of its neurons' rates (series model),
//! and a neuron ages linearly in the spikes it propagates.
//!
//! Synapses are charged to the cluster of their postsynaptic neuron, so
//! every synapse occupies exactly one slot and cluster loads add up on a tile.

mod search;

pub use search::{
    brute_force_optimize, brute_force_search, greedy_first_fit, pso_optimize, pso_search, random_feasible_mapping,
    PsoParams, PsoResult,
};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::device::ConfigError;
use crate::trace::SnnGraph;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReneuError {
    #[error("neuron {id} has {synapses} incoming synapses, above the cap of {cap}")]
    NeuronTooLarge { id: u32, synapses: u64, cap: u64 },
    #[error("no feasible mapping found")]
    Infeasible,
    #[error("{mappings} mappings is too many to enumerate")]
    TooLarge { mappings: f64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Per-spike aging rates of the three wear mechanisms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgingCoefficients {
    pub c_nbti: f64,
    pub c_tddb: f64,
    pub c_hci: f64,
}

impl Default for AgingCoefficients {
    fn default() -> Self {
        Self { c_nbti: 1e-6, c_tddb: 1e-6, c_hci: 1e-6 }
    }
}

impl AgingCoefficients {
    pub fn sum(&self) -> f64 {
        self.c_nbti + self.c_tddb + self.c_hci
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, c) in [("c_nbti", self.c_nbti), ("c_tddb", self.c_tddb), ("c_hci", self.c_hci)] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(ConfigError::new(format!("reneu.coefficients.{name}"), "must be finite and nonnegative"));
            }
        }
        if self.sum() <= 0.0 {
            return Err(ConfigError::new("reneu.coefficients", "at least one coefficient must be positive"));
        }
        Ok(())
    }
}

pub fn neuron_aging(spikes: u64, coeffs: &AgingCoefficients) -> f64 {
    coeffs.sum() * spikes as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub neurons: Vec<u32>,
    /// Synapses with both ends inside the cluster.
    pub internal_synapses: u64,
    /// Synapses whose postsynaptic neuron is inside the cluster.
    pub synapse_load: u64,
    pub spikes: u64,
}

impl Cluster {
    pub fn aging(&self, coeffs: &AgingCoefficients) -> f64 {
        neuron_aging(self.spikes, coeffs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterStrategy {
    /// Breadth-first packing from the lowest unassigned id.
    #[default]
    Bfs,
    /// Greedily grows each cluster with the neuron most connected to it.
    MinCut,
}

struct Packing {
    index: BTreeMap<u32, usize>,
    fan_in: Vec<u64>,
    adjacent: Vec<BTreeSet<usize>>,
}

impl Packing {
    fn new(graph: &SnnGraph) -> Self {
        let mut order: Vec<usize> = (0..graph.neurons.len()).collect();
        order.sort_by_key(|&i| graph.neurons[i].id);
        let index: BTreeMap<u32, usize> = order.iter().enumerate().map(|(k, &i)| (graph.neurons[i].id, k)).collect();
        let n = order.len();
        let mut fan_in = vec![0; n];
        let mut adjacent = vec![BTreeSet::new(); n];
        for s in &graph.synapses {
            let (pre, post) = (index[&s.pre], index[&s.post]);
            fan_in[post] += 1;
            if pre != post {
                adjacent[pre].insert(post);
                adjacent[post].insert(pre);
            }
        }
        Self { index, fan_in, adjacent }
    }
}

/// Breadth-first packing; see [`partition_with`].
pub fn partition_into_clusters(
    graph: &SnnGraph,
    neuron_cap: u64,
    synapse_cap: u64,
) -> Result<Vec<Cluster>, ReneuError> {
    partition_with(graph, neuron_cap, synapse_cap, ClusterStrategy::Bfs)
}

/// Splits the network into clusters of at most `neuron_cap` neurons and
/// `synapse_cap` incoming synapses. A cluster that runs out of connected
/// candidates continues with the lowest unassigned neuron that still fits.
pub fn partition_with(
    graph: &SnnGraph,
    neuron_cap: u64,
    synapse_cap: u64,
    strategy: ClusterStrategy,
) -> Result<Vec<Cluster>, ReneuError> {
    if neuron_cap == 0 {
        return Err(ConfigError::new("reneu.neuron_cap", "must be at least 1").into());
    }
    if synapse_cap == 0 {
        return Err(ConfigError::new("reneu.synapse_cap", "must be at least 1").into());
    }
    let p = Packing::new(graph);
    let n = p.fan_in.len();
    let ids: Vec<u32> = p.index.keys().copied().collect();
    if let Some(k) = (0..n).find(|&k| p.fan_in[k] > synapse_cap) {
        return Err(ReneuError::NeuronTooLarge { id: ids[k], synapses: p.fan_in[k], cap: synapse_cap });
    }

    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    while let Some(start) = owner.iter().position(Option::is_none) {
        let cid = groups.len();
        let mut members = Vec::new();
        let mut load = 0;
        let fits = |k: usize, members: &Vec<usize>, load: u64| {
            (members.len() as u64) < neuron_cap && load + p.fan_in[k] <= synapse_cap
        };
        match strategy {
            ClusterStrategy::Bfs => {
                let mut queue = VecDeque::from([start]);
                let mut queued = BTreeSet::from([start]);
                loop {
                    while let Some(k) = queue.pop_front() {
                        if owner[k].is_some() || !fits(k, &members, load) {
                            continue;
                        }
                        owner[k] = Some(cid);
                        members.push(k);
                        load += p.fan_in[k];
                        for &m in &p.adjacent[k] {
                            if owner[m].is_none() && queued.insert(m) {
                                queue.push_back(m);
                            }
                        }
                    }
                    match (0..n).find(|&k| owner[k].is_none() && fits(k, &members, load)) {
                        Some(k) => {
                            queued.insert(k);
                            queue.push_back(k);
                        }
                        None => break,
                    }
                }
            }
            ClusterStrategy::MinCut => {
                let mut links = vec![0u64; n];
                let mut next = Some(start);
                while let Some(k) = next {
                    owner[k] = Some(cid);
                    members.push(k);
                    load += p.fan_in[k];
                    for &m in &p.adjacent[k] {
                        links[m] += 1;
                    }
                    next = (0..n)
                        .filter(|&m| owner[m].is_none() && fits(m, &members, load))
                        .max_by_key(|&m| (links[m], std::cmp::Reverse(m)));
                }
            }
        }
        groups.push(members);
    }

    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .enumerate()
        .map(|(id, mut members)| {
            members.sort_unstable();
            Cluster {
                id,
                neurons: members.iter().map(|&k| ids[k]).collect(),
                internal_synapses: 0,
                synapse_load: members.iter().map(|&k| p.fan_in[k]).sum(),
                spikes: 0,
            }
        })
        .collect();
    for neuron in &graph.neurons {
        clusters[owner[p.index[&neuron.id]].expect("all assigned")].spikes += neuron.spikes;
    }
    for s in &graph.synapses {
        let (a, b) = (owner[p.index[&s.pre]], owner[p.index[&s.post]]);
        if a == b {
            clusters[a.expect("all assigned")].internal_synapses += 1;
        }
    }
    Ok(clusters)
}

/// Tile count and per-tile capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tiles {
    pub count: u32,
    pub neuron_capacity: u64,
    pub synapse_capacity: u64,
}

impl Tiles {
    /// Tiles with room for an even share of `n_clusters` cluster slots.
    pub fn with_slots(count: u32, neuron_cap: u64, synapse_cap: u64, n_clusters: usize) -> Self {
        let slots = (n_clusters as u64).div_ceil(count.max(1) as u64).max(1);
        Self { count, neuron_capacity: neuron_cap * slots, synapse_capacity: synapse_cap * slots }
    }
}

/// Tile index of each cluster.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mapping(pub Vec<u32>);

impl Mapping {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sum of member neuron aging on one tile.
pub fn tile_aging(mapping: &Mapping, tile: u32, clusters: &[Cluster], coeffs: &AgingCoefficients) -> f64 {
    clusters.iter().zip(&mapping.0).filter(|(_, &t)| t == tile).map(|(c, _)| c.aging(coeffs)).sum()
}

/// Neurons plus synapses over capacity, summed over tiles.
pub fn capacity_excess(mapping: &Mapping, clusters: &[Cluster], tiles: &Tiles) -> u64 {
    let mut neurons = vec![0u64; tiles.count as usize];
    let mut synapses = vec![0u64; tiles.count as usize];
    for (c, &t) in clusters.iter().zip(&mapping.0) {
        neurons[t as usize] += c.neurons.len() as u64;
        synapses[t as usize] += c.synapse_load;
    }
    neurons.iter().map(|&n| n.saturating_sub(tiles.neuron_capacity)).sum::<u64>()
        + synapses.iter().map(|&s| s.saturating_sub(tiles.synapse_capacity)).sum::<u64>()
}

/// Max tile aging plus a penalty of `1e6 * total aging` per unit of
/// capacity excess.
pub fn fitness(mapping: &Mapping, clusters: &[Cluster], tiles: &Tiles, coeffs: &AgingCoefficients) -> f64 {
    MappingProblem::aging(clusters, *tiles, coeffs).evaluate(&mapping.0)
}

/// Spikes that cross tiles: for every synapse whose ends sit on different
/// tiles, the presynaptic neuron's spike count.
pub fn performance_proxy(mapping: &Mapping, graph: &SnnGraph, clusters: &[Cluster]) -> u64 {
    let tile_of = neuron_tiles(mapping, clusters);
    let spikes: BTreeMap<u32, u64> = graph.neurons.iter().map(|n| (n.id, n.spikes)).collect();
    graph.synapses.iter().filter(|s| tile_of[&s.pre] != tile_of[&s.post]).map(|s| spikes[&s.pre]).sum()
}

fn neuron_tiles(mapping: &Mapping, clusters: &[Cluster]) -> BTreeMap<u32, u32> {
    clusters.iter().zip(&mapping.0).flat_map(|(c, &t)| c.neurons.iter().map(move |&n| (n, t))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Minimize the most aged tile.
    #[default]
    Aging,
    /// Minimize spikes crossing tiles.
    Traffic,
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "aging" => Ok(Objective::Aging),
            "traffic" => Ok(Objective::Traffic),
            other => Err(format!("unknown objective `{other}`")),
        }
    }
}

/// A cluster-to-tile assignment problem with its scores precomputed.
#[derive(Debug, Clone)]
pub struct MappingProblem {
    tiles: Tiles,
    neurons: Vec<u64>,
    synapses: Vec<u64>,
    weight: Vec<f64>,
    /// Cluster pairs joined by synapses, with the spikes they carry.
    links: Vec<(usize, usize, f64)>,
    objective: Objective,
    penalty: f64,
}

impl MappingProblem {
    pub fn aging(clusters: &[Cluster], tiles: Tiles, coeffs: &AgingCoefficients) -> Self {
        let weight: Vec<f64> = clusters.iter().map(|c| c.aging(coeffs)).collect();
        let total: f64 = weight.iter().sum();
        Self::build(clusters, tiles, weight, Vec::new(), Objective::Aging, total)
    }

    pub fn traffic(graph: &SnnGraph, clusters: &[Cluster], tiles: Tiles) -> Self {
        let owner: BTreeMap<u32, usize> =
            clusters.iter().flat_map(|c| c.neurons.iter().map(move |&n| (n, c.id))).collect();
        let spikes: BTreeMap<u32, u64> = graph.neurons.iter().map(|n| (n.id, n.spikes)).collect();
        let mut pairs: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for s in &graph.synapses {
            let (a, b) = (owner[&s.pre], owner[&s.post]);
            if a != b {
                *pairs.entry((a.min(b), a.max(b))).or_default() += spikes[&s.pre];
            }
        }
        let total = pairs.values().sum::<u64>() as f64;
        let links = pairs.into_iter().map(|((a, b), w)| (a, b, w as f64)).collect();
        Self::build(clusters, tiles, vec![0.0; clusters.len()], links, Objective::Traffic, total)
    }

    fn build(
        clusters: &[Cluster],
        tiles: Tiles,
        weight: Vec<f64>,
        links: Vec<(usize, usize, f64)>,
        objective: Objective,
        total: f64,
    ) -> Self {
        Self {
            tiles,
            neurons: clusters.iter().map(|c| c.neurons.len() as u64).collect(),
            synapses: clusters.iter().map(|c| c.synapse_load).collect(),
            weight,
            links,
            objective,
            penalty: 1e6 * if total > 0.0 { total } else { 1.0 },
        }
    }

    pub fn n_clusters(&self) -> usize {
        self.neurons.len()
    }

    pub fn tiles(&self) -> Tiles {
        self.tiles
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn excess(&self, mapping: &[u32]) -> u64 {
        let t = self.tiles.count as usize;
        let mut load = vec![(0u64, 0u64); t];
        for (c, &tile) in mapping.iter().enumerate() {
            load[tile as usize].0 += self.neurons[c];
            load[tile as usize].1 += self.synapses[c];
        }
        load.iter()
            .map(|&(n, s)| {
                n.saturating_sub(self.tiles.neuron_capacity) + s.saturating_sub(self.tiles.synapse_capacity)
            })
            .sum()
    }

    pub fn is_feasible(&self, mapping: &[u32]) -> bool {
        self.excess(mapping) == 0
    }

    /// Objective value without the capacity penalty.
    pub fn score(&self, mapping: &[u32]) -> f64 {
        match self.objective {
            Objective::Aging => {
                let mut per_tile = vec![0.0; self.tiles.count as usize];
                for (c, &tile) in mapping.iter().enumerate() {
                    per_tile[tile as usize] += self.weight[c];
                }
                per_tile.into_iter().fold(0.0, f64::max)
            }
            Objective::Traffic => {
                self.links.iter().filter(|&&(a, b, _)| mapping[a] != mapping[b]).map(|&(_, _, w)| w).sum()
            }
        }
    }

    pub fn evaluate(&self, mapping: &[u32]) -> f64 {
        self.score(mapping) + self.penalty * self.excess(mapping) as f64
    }
}

/// Outcome of mapping one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingReport {
    pub objective: Objective,
    pub tiles: Tiles,
    pub clusters: usize,
    pub mapping: Mapping,
    pub tile_aging: Vec<f64>,
    pub max_aging: f64,
    /// Most minus least aged tile.
    pub aging_spread: f64,
    pub traffic: u64,
    pub fitness: f64,
    pub fitness_trace: Vec<f64>,
    pub seed: u64,
    pub snn_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub tiles: u32,
    pub neuron_cap: u64,
    pub synapse_cap: u64,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub strategy: ClusterStrategy,
    #[serde(default)]
    pub coefficients: AgingCoefficients,
    #[serde(default)]
    pub pso: PsoParams,
}

/// Clusters the network, searches for a mapping and scores it.
pub fn map_snn(graph: &SnnGraph, cfg: &MapConfig) -> Result<MappingReport, ReneuError> {
    if cfg.tiles == 0 {
        return Err(ConfigError::new("reneu.tiles", "must be at least 1").into());
    }
    cfg.coefficients.validate()?;
    cfg.pso.validate()?;
    let clusters = partition_with(graph, cfg.neuron_cap, cfg.synapse_cap, cfg.strategy)?;
    let tiles = Tiles::with_slots(cfg.tiles, cfg.neuron_cap, cfg.synapse_cap, clusters.len());
    let problem = match cfg.objective {
        Objective::Aging => MappingProblem::aging(&clusters, tiles, &cfg.coefficients),
        Objective::Traffic => MappingProblem::traffic(graph, &clusters, tiles),
    };
    let result = pso_search(&problem, &cfg.pso)?;
    let tile_aging: Vec<f64> =
        (0..tiles.count).map(|t| tile_aging(&result.mapping, t, &clusters, &cfg.coefficients)).collect();
    let max_aging = tile_aging.iter().copied().fold(0.0, f64::max);
    let min_aging = tile_aging.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MappingReport {
        objective: cfg.objective,
        tiles,
        clusters: clusters.len(),
        traffic: performance_proxy(&result.mapping, graph, &clusters),
        mapping: result.mapping,
        max_aging,
        aging_spread: max_aging - min_aging,
        tile_aging,
        fitness: result.fitness,
        fitness_trace: result.trace,
        seed: cfg.pso.seed,
        snn_digest: graph.digest(),
    })
}
