use std::collections::{BTreeSet, HashSet};
use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TraceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neuron {
    pub id: u32,
    pub spikes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synapse {
    pub pre: u32,
    pub post: u32,
}

/// A spiking network with per-neuron spike counts over an evaluation window.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnnGraph {
    pub neurons: Vec<Neuron>,
    pub synapses: Vec<Synapse>,
}

#[derive(Debug, thiserror::Error)]
pub enum SnnError {
    #[error("synapse {pre} -> {post} references an unknown neuron")]
    DanglingSynapse { pre: u32, post: u32 },
    #[error("neuron {0} has a negative spike count")]
    NegativeSpikeCount(u32),
    #[error("neuron id {0} appears more than once")]
    DuplicateNeuron(u32),
    #[error("malformed SNN file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
struct RawNeuron {
    id: u32,
    spikes: i64,
}

#[derive(Deserialize)]
struct RawGraph {
    #[serde(default)]
    neurons: Vec<RawNeuron>,
    #[serde(default)]
    synapses: Vec<Synapse>,
}

impl SnnGraph {
    /// Checks id uniqueness and synapse endpoints.
    pub fn validate(&self) -> Result<(), SnnError> {
        let mut ids = HashSet::with_capacity(self.neurons.len());
        for n in &self.neurons {
            if !ids.insert(n.id) {
                return Err(SnnError::DuplicateNeuron(n.id));
            }
        }
        for s in &self.synapses {
            if !ids.contains(&s.pre) || !ids.contains(&s.post) {
                return Err(SnnError::DanglingSynapse { pre: s.pre, post: s.post });
            }
        }
        Ok(())
    }

    pub fn total_spikes(&self) -> u64 {
        self.neurons.iter().map(|n| n.spikes).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// Parameters of a random network with heavy-tailed spike counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnnSpec {
    pub n_neurons: u32,
    /// Distinct outgoing synapses per neuron.
    pub fan_out: u32,
    /// Zipf exponent of the spike-count distribution.
    pub spike_exponent: f64,
    pub max_spikes: u64,
    pub seed: u64,
}

impl Default for SnnSpec {
    fn default() -> Self {
        Self { n_neurons: 48, fan_out: 3, spike_exponent: 1.2, max_spikes: 1000, seed: 0 }
    }
}

/// Neuron ids are `0..n_neurons`; spike counts are Zipf draws on
/// `1..=max_spikes` and targets are uniform over the other neurons.
pub fn generate_snn(spec: &SnnSpec) -> Result<SnnGraph, TraceError> {
    if spec.n_neurons > 1 && spec.fan_out >= spec.n_neurons {
        return Err(TraceError::InvalidSpec("fan_out must be below n_neurons".into()));
    }
    if !(spec.spike_exponent > 0.0) || spec.max_spikes == 0 {
        return Err(TraceError::InvalidSpec("spike_exponent and max_spikes must be positive".into()));
    }
    let zipf = Zipf::new(spec.max_spikes as f64, spec.spike_exponent)
        .map_err(|e| TraceError::InvalidSpec(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let neurons = (0..spec.n_neurons)
        .map(|id| Neuron { id, spikes: zipf.sample(&mut rng) as u64 })
        .collect();
    let mut synapses = Vec::new();
    if spec.n_neurons > 1 {
        for pre in 0..spec.n_neurons {
            let mut posts = BTreeSet::new();
            while posts.len() < spec.fan_out as usize {
                let post = rng.random_range(0..spec.n_neurons - 1);
                posts.insert(if post >= pre { post + 1 } else { post });
            }
            synapses.extend(posts.into_iter().map(|post| Synapse { pre, post }));
        }
    }
    Ok(SnnGraph { neurons, synapses })
}

pub fn parse_snn<R: Read>(reader: R) -> Result<SnnGraph, SnnError> {
    let raw: RawGraph = serde_json::from_reader(reader)?;
    let mut neurons = Vec::with_capacity(raw.neurons.len());
    for n in raw.neurons {
        let spikes = u64::try_from(n.spikes).map_err(|_| SnnError::NegativeSpikeCount(n.id))?;
        neurons.push(Neuron { id: n.id, spikes });
    }
    let graph = SnnGraph { neurons, synapses: raw.synapses };
    graph.validate()?;
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_neurons_one_synapse() {
        let text = r#"{"neurons":[{"id":0,"spikes":4},{"id":1,"spikes":0}],"synapses":[{"pre":0,"post":1}]}"#;
        let g = parse_snn(text.as_bytes()).unwrap();
        assert_eq!(g.neurons.len(), 2);
        assert_eq!(g.synapses.len(), 1);
        assert_eq!(g.total_spikes(), 4);
    }

    #[test]
    fn dangling_synapse() {
        let text = r#"{"neurons":[{"id":0,"spikes":1}],"synapses":[{"pre":0,"post":99}]}"#;
        assert!(matches!(
            parse_snn(text.as_bytes()),
            Err(SnnError::DanglingSynapse { pre: 0, post: 99 })
        ));
    }

    #[test]
    fn generated_graph_is_valid_and_seeded() {
        let spec = SnnSpec { seed: 4, ..SnnSpec::default() };
        let g = generate_snn(&spec).unwrap();
        g.validate().unwrap();
        assert_eq!(g.neurons.len(), 48);
        assert_eq!(g.synapses.len(), 48 * 3);
        assert!(g.synapses.iter().all(|s| s.pre != s.post));
        assert!(g.neurons.iter().all(|n| (1..=1000).contains(&n.spikes)));
        assert_eq!(generate_snn(&spec).unwrap(), g);
        let back = parse_snn(g.to_json().as_bytes()).unwrap();
        assert_eq!(back.digest(), g.digest());
    }

    #[test]
    fn empty_is_valid() {
        let g = parse_snn(r#"{"neurons":[],"synapses":[]}"#.as_bytes()).unwrap();
        assert!(g.neurons.is_empty());
    }

    #[test]
    fn negative_and_duplicate() {
        assert!(matches!(
            parse_snn(r#"{"neurons":[{"id":3,"spikes":-1}]}"#.as_bytes()),
            Err(SnnError::NegativeSpikeCount(3))
        ));
        assert!(matches!(
            parse_snn(r#"{"neurons":[{"id":3,"spikes":1},{"id":3,"spikes":2}]}"#.as_bytes()),
            Err(SnnError::DuplicateNeuron(3))
        ));
    }
}
