//! Seeded synthetic trace generation.
//!
//! All randomness comes from ChaCha8 seeded with the spec's `seed`, so a
//! given spec yields the same trace on every host.

use rand::distr::{Bernoulli, Distribution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Zipf;
use serde::{Deserialize, Serialize};

use super::{MemoryRequest, TraceError, DEFAULT_LINE_BITS};
use crate::bits::BitLine;

/// Page size used by hybrid-memory traces.
pub const PAGE_BYTES: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AddressModel {
    Uniform,
    Zipf { s: f64 },
    HotCold { hot_fraction: f64, hot_access_share: f64 },
}

/// Parameters for a read/write line trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceSpec {
    pub n_requests: usize,
    pub read_ratio: f64,
    pub set_bit_density: f64,
    pub address_model: AddressModel,
    pub seed: u64,
    pub line_bits: usize,
    /// Number of distinct logical lines addressed.
    pub n_lines: u64,
    /// Cycles between consecutive requests.
    pub cycle_step: u64,
}

impl Default for TraceSpec {
    fn default() -> Self {
        Self {
            n_requests: 10_000,
            read_ratio: 0.5,
            set_bit_density: 0.5,
            address_model: AddressModel::Uniform,
            seed: 0,
            line_bits: DEFAULT_LINE_BITS,
            n_lines: 4000,
            cycle_step: 10,
        }
    }
}

fn check_fraction(name: &str, v: f64) -> Result<(), TraceError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(TraceError::InvalidSpec(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn check_line_bits(line_bits: usize) -> Result<(), TraceError> {
    if line_bits == 0 || !line_bits.is_multiple_of(8) {
        return Err(TraceError::InvalidSpec(format!(
            "line_bits must be a positive multiple of 8, got {line_bits}"
        )));
    }
    Ok(())
}

impl TraceSpec {
    pub fn validate(&self) -> Result<(), TraceError> {
        if self.n_requests == 0 {
            return Err(TraceError::InvalidSpec("n_requests must be at least 1".into()));
        }
        check_fraction("read_ratio", self.read_ratio)?;
        check_fraction("set_bit_density", self.set_bit_density)?;
        check_line_bits(self.line_bits)?;
        if self.n_lines == 0 {
            return Err(TraceError::InvalidSpec("n_lines must be at least 1".into()));
        }
        match self.address_model {
            AddressModel::Uniform => {}
            AddressModel::Zipf { s } => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(TraceError::InvalidSpec(format!("zipf exponent must be > 0, got {s}")));
                }
            }
            AddressModel::HotCold { hot_fraction, hot_access_share } => {
                check_fraction("hot_fraction", hot_fraction)?;
                check_fraction("hot_access_share", hot_access_share)?;
            }
        }
        Ok(())
    }
}

enum LinePicker {
    Uniform(u64),
    Zipf(Zipf<f64>, u64),
    HotCold { hot: u64, total: u64, share: f64 },
}

impl LinePicker {
    fn new(model: AddressModel, n_lines: u64) -> Self {
        match model {
            AddressModel::Uniform => Self::Uniform(n_lines),
            AddressModel::Zipf { s } => Self::Zipf(Zipf::new(n_lines as f64, s).expect("validated zipf"), n_lines),
            AddressModel::HotCold { hot_fraction, hot_access_share } => {
                let hot = ((hot_fraction * n_lines as f64).round() as u64).clamp(1, n_lines);
                Self::HotCold { hot, total: n_lines, share: hot_access_share }
            }
        }
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> u64 {
        match *self {
            Self::Uniform(n) => rng.random_range(0..n),
            // Zipf samples rank 1..=n; rank 1 is the hottest line.
            Self::Zipf(ref z, n) => (z.sample(rng) as u64).clamp(1, n) - 1,
            Self::HotCold { hot, total, share } => {
                if hot == total || rng.random_bool(share) {
                    rng.random_range(0..hot)
                } else {
                    rng.random_range(hot..total)
                }
            }
        }
    }
}

fn random_payload(rng: &mut ChaCha8Rng, bits: &Bernoulli, len: usize) -> BitLine {
    BitLine::from_fn(len, |_| bits.sample(rng))
}

/// Generates a line-granular read/write trace.
pub fn generate_trace(spec: &TraceSpec) -> Result<Vec<MemoryRequest>, TraceError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bits = Bernoulli::new(spec.set_bit_density).expect("validated density");
    let picker = LinePicker::new(spec.address_model, spec.n_lines);
    let line_bytes = (spec.line_bits / 8) as u64;

    let mut out = Vec::with_capacity(spec.n_requests);
    for i in 0..spec.n_requests {
        let cycle = i as u64 * spec.cycle_step;
        let is_read = rng.random_bool(spec.read_ratio);
        let address = picker.pick(&mut rng) * line_bytes;
        if is_read {
            out.push(MemoryRequest::read(cycle, address));
        } else {
            let payload = random_payload(&mut rng, &bits, spec.line_bits);
            out.push(MemoryRequest::write(cycle, address, payload));
        }
    }
    Ok(out)
}

/// Parameters for a page-granular hybrid-memory trace with a stationary
/// hot/cold split. Each page is allocated up front; hot pages carry site id
/// 1 and cold pages site id 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PageTraceSpec {
    pub n_pages: u64,
    pub hot_fraction: f64,
    pub hot_access_share: f64,
    pub n_accesses: usize,
    /// Write probability for accesses to hot pages.
    pub hot_write_ratio: f64,
    /// Write probability for accesses to cold pages.
    pub cold_write_ratio: f64,
    pub set_bit_density: f64,
    pub cycle_step: u64,
    pub seed: u64,
    pub line_bits: usize,
}

impl Default for PageTraceSpec {
    fn default() -> Self {
        Self {
            n_pages: 100,
            hot_fraction: 0.1,
            hot_access_share: 0.9,
            n_accesses: 40_000,
            hot_write_ratio: 0.5,
            cold_write_ratio: 0.5,
            set_bit_density: 0.5,
            cycle_step: 50,
            seed: 0,
            line_bits: DEFAULT_LINE_BITS,
        }
    }
}

impl PageTraceSpec {
    pub fn validate(&self) -> Result<(), TraceError> {
        if self.n_pages == 0 || self.n_accesses == 0 {
            return Err(TraceError::InvalidSpec("n_pages and n_accesses must be at least 1".into()));
        }
        check_fraction("hot_fraction", self.hot_fraction)?;
        check_fraction("hot_access_share", self.hot_access_share)?;
        check_fraction("hot_write_ratio", self.hot_write_ratio)?;
        check_fraction("cold_write_ratio", self.cold_write_ratio)?;
        check_fraction("set_bit_density", self.set_bit_density)?;
        check_line_bits(self.line_bits)?;
        if self.line_bits as u64 / 8 > PAGE_BYTES {
            return Err(TraceError::InvalidSpec("line larger than a page".into()));
        }
        Ok(())
    }

    /// Number of pages designated hot.
    pub fn hot_pages(&self) -> u64 {
        ((self.hot_fraction * self.n_pages as f64).round() as u64).min(self.n_pages)
    }
}

/// Generates a hybrid-memory trace: one `A` record per page, then accesses.
///
/// Returns the trace and the list of hot page numbers.
pub fn generate_page_trace(spec: &PageTraceSpec) -> Result<(Vec<MemoryRequest>, Vec<u64>), TraceError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bits = Bernoulli::new(spec.set_bit_density).expect("validated density");
    let line_bytes = (spec.line_bits / 8) as u64;
    let lines_per_page = PAGE_BYTES / line_bytes;

    let mut vpns: Vec<u64> = (0..spec.n_pages).collect();
    vpns.shuffle(&mut rng);
    let n_hot = spec.hot_pages() as usize;
    let (hot, cold) = vpns.split_at(n_hot);
    let mut hot = hot.to_vec();
    let mut cold = cold.to_vec();
    hot.sort_unstable();
    cold.sort_unstable();

    let mut out = Vec::with_capacity(spec.n_pages as usize + spec.n_accesses);
    for vpn in 0..spec.n_pages {
        let site = u32::from(hot.binary_search(&vpn).is_ok());
        out.push(MemoryRequest::alloc(0, vpn * PAGE_BYTES, site));
    }
    for i in 0..spec.n_accesses {
        let cycle = (i as u64 + 1) * spec.cycle_step;
        let use_hot = cold.is_empty() || (!hot.is_empty() && rng.random_bool(spec.hot_access_share));
        let (pool, write_ratio) = if use_hot {
            (&hot, spec.hot_write_ratio)
        } else {
            (&cold, spec.cold_write_ratio)
        };
        let vpn = pool[rng.random_range(0..pool.len())];
        let address = vpn * PAGE_BYTES + rng.random_range(0..lines_per_page) * line_bytes;
        if rng.random_bool(write_ratio) {
            let payload = random_payload(&mut rng, &bits, spec.line_bits);
            out.push(MemoryRequest::write(cycle, address, payload));
        } else {
            out.push(MemoryRequest::read(cycle, address));
        }
    }
    Ok((out, hot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::RequestKind;

    fn spec() -> TraceSpec {
        TraceSpec { n_requests: 500, seed: 7, ..TraceSpec::default() }
    }

    #[test]
    fn full_density_gives_all_ones() {
        let trace = generate_trace(&TraceSpec { set_bit_density: 1.0, read_ratio: 0.0, ..spec() }).unwrap();
        assert!(trace.iter().all(|r| r.payload().unwrap().is_all_ones()));
    }

    #[test]
    fn zero_read_ratio_is_all_writes() {
        let trace = generate_trace(&TraceSpec { read_ratio: 0.0, ..spec() }).unwrap();
        assert!(trace.iter().all(MemoryRequest::is_write));
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = crate::trace::serialize_trace(&generate_trace(&spec()).unwrap());
        let b = crate::trace::serialize_trace(&generate_trace(&spec()).unwrap());
        assert_eq!(a, b);
        let c = crate::trace::serialize_trace(&generate_trace(&TraceSpec { seed: 8, ..spec() }).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn density_within_one_percent() {
        for density in [0.1, 0.5, 0.83] {
            let trace = generate_trace(&TraceSpec {
                n_requests: 10_000,
                read_ratio: 0.0,
                set_bit_density: density,
                ..spec()
            })
            .unwrap();
            let ones: usize = trace.iter().map(|r| r.payload().unwrap().count_ones()).sum();
            let measured = ones as f64 / (trace.len() * 512) as f64;
            assert!((measured - density).abs() < 0.01, "{density} vs {measured}");
        }
    }

    #[test]
    fn addresses_stay_in_range() {
        for model in [
            AddressModel::Uniform,
            AddressModel::Zipf { s: 1.1 },
            AddressModel::HotCold { hot_fraction: 0.1, hot_access_share: 0.9 },
        ] {
            let trace = generate_trace(&TraceSpec { address_model: model, n_lines: 50, ..spec() }).unwrap();
            assert!(trace.iter().all(|r| r.address < 50 * 64 && r.address % 64 == 0));
        }
    }

    #[test]
    fn hot_cold_concentrates_accesses() {
        let trace = generate_trace(&TraceSpec {
            n_requests: 5000,
            address_model: AddressModel::HotCold { hot_fraction: 0.1, hot_access_share: 0.9 },
            n_lines: 100,
            ..spec()
        })
        .unwrap();
        let hot = trace.iter().filter(|r| r.address < 10 * 64).count() as f64 / 5000.0;
        assert!((hot - 0.9).abs() < 0.03, "{hot}");
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_trace(&TraceSpec { n_requests: 0, ..spec() }).is_err());
        assert!(generate_trace(&TraceSpec { read_ratio: 1.5, ..spec() }).is_err());
        assert!(generate_trace(&TraceSpec { address_model: AddressModel::Zipf { s: 0.0 }, ..spec() }).is_err());
        assert!(generate_trace(&TraceSpec { line_bits: 12, ..spec() }).is_err());
    }

    #[test]
    fn page_trace_allocates_first() {
        let (trace, hot) = generate_page_trace(&PageTraceSpec { n_accesses: 2000, seed: 3, ..Default::default() }).unwrap();
        assert_eq!(hot.len(), 10);
        let allocs = trace.iter().take_while(|r| matches!(r.kind, RequestKind::Alloc { .. })).count();
        assert_eq!(allocs, 100);
        assert_eq!(trace.len(), 2100);
        for r in &trace[..100] {
            let RequestKind::Alloc { site } = r.kind else { unreachable!() };
            assert_eq!(site == 1, hot.contains(&(r.address / PAGE_BYTES)));
        }
    }
}
