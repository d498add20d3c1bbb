use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AgingCoefficients, Cluster, Mapping, MappingProblem, ReneuError, Tiles};
use crate::device::ConfigError;

const BRUTE_FORCE_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoParams {
    pub swarm_size: usize,
    pub iterations: usize,
    pub w: f64,
    pub c1: f64,
    pub c2: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self { swarm_size: 32, iterations: 500, w: 0.7, c1: 1.5, c2: 1.5, restarts: 4, seed: 0 }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.swarm_size < 2 {
            return Err(ConfigError::new("pso.swarm_size", "must be at least 2"));
        }
        if self.iterations == 0 {
            return Err(ConfigError::new("pso.iterations", "must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(ConfigError::new("pso.restarts", "must be at least 1"));
        }
        if !(self.w > 0.0 && self.w <= 1.0) {
            return Err(ConfigError::new("pso.w", "must lie in (0, 1]"));
        }
        if !(self.c1 > 0.0) {
            return Err(ConfigError::new("pso.c1", "must be positive"));
        }
        if !(self.c2 > 0.0) {
            return Err(ConfigError::new("pso.c2", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoResult {
    pub mapping: Mapping,
    pub fitness: f64,
    /// Best fitness seen so far, one entry per iteration across all restarts.
    pub trace: Vec<f64>,
}

/// First-fit over clusters in decreasing size order.
pub fn greedy_first_fit(problem: &MappingProblem) -> Option<Vec<u32>> {
    let tiles = problem.tiles();
    let n = problem.n_clusters();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse((problem.neurons[c], problem.synapses[c])), c));
    let mut load = vec![(0u64, 0u64); tiles.count as usize];
    let mut mapping = vec![0u32; n];
    for c in order {
        let t = load.iter().position(|&(neurons, synapses)| {
            neurons + problem.neurons[c] <= tiles.neuron_capacity
                && synapses + problem.synapses[c] <= tiles.synapse_capacity
        })?;
        load[t].0 += problem.neurons[c];
        load[t].1 += problem.synapses[c];
        mapping[c] = t as u32;
    }
    Some(mapping)
}

fn decode(position: &[f64], n_tiles: u32, out: &mut [u32]) {
    for (slot, &x) in out.iter_mut().zip(position) {
        *slot = (x.floor().max(0.0) as u32).min(n_tiles - 1);
    }
}

/// Particle swarm search over continuous positions in `[0, n_tiles)`,
/// decoded by floor. The swarm restarts from fresh random positions
/// `restarts` times and the best feasible mapping found is returned.
pub fn pso_search(problem: &MappingProblem, params: &PsoParams) -> Result<PsoResult, ReneuError> {
    params.validate()?;
    let greedy = greedy_first_fit(problem).ok_or(ReneuError::Infeasible)?;
    let dims = problem.n_clusters();
    let n_tiles = problem.tiles().count;
    let upper = n_tiles as f64;
    let vmax = upper;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trace = Vec::with_capacity(params.restarts * params.iterations);
    let mut best: Option<(Vec<u32>, f64)> = None;
    let mut decoded = vec![0u32; dims];

    for _ in 0..params.restarts {
        let mut x: Vec<Vec<f64>> =
            (0..params.swarm_size).map(|_| (0..dims).map(|_| rng.random_range(0.0..upper)).collect()).collect();
        let mut v: Vec<Vec<f64>> =
            (0..params.swarm_size).map(|_| (0..dims).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut pbest = x.clone();
        let mut pbest_fit: Vec<f64> = x
            .iter()
            .map(|p| {
                decode(p, n_tiles, &mut decoded);
                problem.evaluate(&decoded)
            })
            .collect();
        let mut g = 0;
        for p in 1..params.swarm_size {
            if pbest_fit[p] < pbest_fit[g] {
                g = p;
            }
        }
        let mut gbest = pbest[g].clone();
        let mut gbest_fit = pbest_fit[g];

        for _ in 0..params.iterations {
            for p in 0..params.swarm_size {
                for d in 0..dims {
                    let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                    let vel = params.w * v[p][d]
                        + params.c1 * r1 * (pbest[p][d] - x[p][d])
                        + params.c2 * r2 * (gbest[d] - x[p][d]);
                    v[p][d] = vel.clamp(-vmax, vmax);
                    x[p][d] = (x[p][d] + v[p][d]).clamp(0.0, upper);
                }
                decode(&x[p], n_tiles, &mut decoded);
                let fit = problem.evaluate(&decoded);
                if fit < pbest_fit[p] {
                    pbest_fit[p] = fit;
                    pbest[p].clone_from(&x[p]);
                }
            }
            // lowest particle index wins ties
            for p in 0..params.swarm_size {
                if pbest_fit[p] < gbest_fit {
                    gbest_fit = pbest_fit[p];
                    gbest.clone_from(&pbest[p]);
                }
            }
            decode(&gbest, n_tiles, &mut decoded);
            if problem.is_feasible(&decoded) && best.as_ref().is_none_or(|(_, f)| gbest_fit < *f) {
                best = Some((decoded.clone(), gbest_fit));
            }
            trace.push(best.as_ref().map_or(gbest_fit, |&(_, f)| f.min(gbest_fit)));
        }
    }

    let (mapping, fitness) = best.unwrap_or_else(|| {
        let f = problem.evaluate(&greedy);
        (greedy, f)
    });
    Ok(PsoResult { mapping: Mapping(mapping), fitness, trace })
}

/// Min-max-aging PSO over `clusters` placed on `tiles`.
pub fn pso_optimize(
    clusters: &[Cluster],
    tiles: &Tiles,
    coeffs: &AgingCoefficients,
    params: &PsoParams,
) -> Result<PsoResult, ReneuError> {
    pso_search(&MappingProblem::aging(clusters, *tiles, coeffs), params)
}

/// Exhaustive search in lexicographic order; the first optimum found wins.
pub fn brute_force_search(problem: &MappingProblem) -> Result<(Mapping, f64), ReneuError> {
    let n = problem.n_clusters();
    let t = problem.tiles().count;
    let count = (t as f64).powi(n as i32);
    if count > BRUTE_FORCE_LIMIT {
        return Err(ReneuError::TooLarge { mappings: count });
    }
    let mut digits = vec![0u32; n];
    let mut best: Option<(Vec<u32>, f64)> = None;
    loop {
        if problem.is_feasible(&digits) {
            let f = problem.score(&digits);
            if best.as_ref().is_none_or(|(_, b)| f < *b) {
                best = Some((digits.clone(), f));
            }
        }
        // odometer with the last cluster as the fastest digit
        let Some(pos) = (0..n).rev().find(|&i| digits[i] + 1 < t) else { break };
        digits[pos] += 1;
        digits[pos + 1..].fill(0);
    }
    best.map(|(m, f)| (Mapping(m), f)).ok_or(ReneuError::Infeasible)
}

pub fn brute_force_optimize(
    clusters: &[Cluster],
    tiles: &Tiles,
    coeffs: &AgingCoefficients,
) -> Result<(Mapping, f64), ReneuError> {
    brute_force_search(&MappingProblem::aging(clusters, *tiles, coeffs))
}

/// Uniform draw among feasible mappings by rejection; `None` after
/// `max_tries` infeasible draws.
pub fn random_feasible_mapping<R: Rng>(problem: &MappingProblem, rng: &mut R, max_tries: usize) -> Option<Mapping> {
    let t = problem.tiles().count;
    (0..max_tries)
        .map(|_| (0..problem.n_clusters()).map(|_| rng.random_range(0..t)).collect::<Vec<u32>>())
        .find(|m| problem.is_feasible(m))
        .map(Mapping)
}
