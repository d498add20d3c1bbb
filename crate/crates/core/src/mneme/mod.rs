//! Hybrid DRAM-PCM page management over segmented bitlines.
//!
//! Each device's bitlines are split into a near and a far segment, giving
//! four tiers. The prediction-based policy classifies a new page from its
//! allocation site and places it in the matching tier; it migrates a page
//! only after it has been observed in the wrong class for two consecutive
//! epochs. The reactive baseline places pages at random and promotes
//! intensely accessed PCM pages into DRAM each epoch.

mod sim;

pub use sim::{oracle_classes, simulate_hybrid, HybridSim, Migration, PageDescriptor};

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::device::{ConfigError, Segment, SegmentParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Device {
    Dram,
    Pcm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TierId {
    pub device: Device,
    pub segment: Segment,
}

impl TierId {
    pub const DRAM_NEAR: TierId = TierId { device: Device::Dram, segment: Segment::Near };
    pub const DRAM_FAR: TierId = TierId { device: Device::Dram, segment: Segment::Far };
    pub const PCM_NEAR: TierId = TierId { device: Device::Pcm, segment: Segment::Near };
    pub const PCM_FAR: TierId = TierId { device: Device::Pcm, segment: Segment::Far };

    /// All tiers in fallback order, fastest first.
    pub const ALL: [TierId; 4] = [Self::DRAM_NEAR, Self::DRAM_FAR, Self::PCM_NEAR, Self::PCM_FAR];

    pub fn index(self) -> usize {
        match (self.device, self.segment) {
            (Device::Dram, Segment::Near) => 0,
            (Device::Dram, Segment::Far) => 1,
            (Device::Pcm, Segment::Near) => 2,
            (Device::Pcm, Segment::Far) => 3,
        }
    }

    /// The class this tier is meant to hold.
    pub fn matching_class(self) -> IntensityClass {
        match (self.device, self.segment) {
            (Device::Dram, _) => IntensityClass::WriteIntensive,
            (Device::Pcm, Segment::Near) => IntensityClass::ReadIntensive,
            (Device::Pcm, Segment::Far) => IntensityClass::Cold,
        }
    }
}

impl fmt::Display for TierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let device = match self.device {
            Device::Dram => "dram",
            Device::Pcm => "pcm",
        };
        let segment = match self.segment {
            Segment::Near => "near",
            Segment::Far => "far",
        };
        write!(f, "{device}.{segment}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityClass {
    WriteIntensive,
    ReadIntensive,
    Cold,
}

impl IntensityClass {
    pub fn preferred_tier(self) -> TierId {
        match self {
            IntensityClass::WriteIntensive => TierId::DRAM_NEAR,
            IntensityClass::ReadIntensive => TierId::PCM_NEAR,
            IntensityClass::Cold => TierId::PCM_FAR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PagePolicy {
    Mneme,
    Nimble,
}

impl PagePolicy {
    pub fn name(self) -> &'static str {
        match self {
            PagePolicy::Mneme => "mneme",
            PagePolicy::Nimble => "nimble",
        }
    }
}

impl std::str::FromStr for PagePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mneme" => Ok(PagePolicy::Mneme),
            "nimble" => Ok(PagePolicy::Nimble),
            other => Err(format!("unknown page policy `{other}`")),
        }
    }
}

/// How new pages are classified at allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    /// Running averages per allocation site.
    Site,
    /// Each page's majority class over the whole trace, computed up front.
    Clairvoyant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierFrames {
    pub dram_near: u32,
    pub dram_far: u32,
    pub pcm_near: u32,
    pub pcm_far: u32,
}

impl TierFrames {
    pub fn get(&self, tier: TierId) -> u32 {
        [self.dram_near, self.dram_far, self.pcm_near, self.pcm_far][tier.index()]
    }

    /// Same near/far split for both devices.
    pub fn from_segments(s: &SegmentParams) -> Self {
        Self { dram_near: s.near_frames, dram_far: s.far_frames, pcm_near: s.near_frames, pcm_far: s.far_frames }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MnemeConfig {
    /// Frames per tier; defaults to the device segment geometry.
    pub frames: Option<TierFrames>,
    pub epoch_length: u64,
    pub migration_budget: u32,
    pub writes_hot: u64,
    pub reads_hot: u64,
    pub decay: f64,
    pub policy: PagePolicy,
    pub predictor: PredictorKind,
    /// Place every page in this tier and never migrate.
    pub pin_tier: Option<TierId>,
    pub line_bits: usize,
}

impl Default for MnemeConfig {
    fn default() -> Self {
        Self {
            frames: None,
            epoch_length: 100_000,
            migration_budget: 64,
            writes_hot: 10,
            reads_hot: 10,
            decay: 0.5,
            policy: PagePolicy::Mneme,
            predictor: PredictorKind::Site,
            pin_tier: None,
            line_bits: crate::trace::DEFAULT_LINE_BITS,
        }
    }
}

impl MnemeConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(f) = &self.frames {
            for tier in TierId::ALL {
                if f.get(tier) == 0 {
                    return Err(ConfigError::new(format!("mneme.frames.{}", tier.to_string().replace('.', "_")), "must be positive"));
                }
            }
        }
        if self.epoch_length == 0 {
            return Err(ConfigError::new("mneme.epoch_length", "must be positive"));
        }
        if self.writes_hot == 0 {
            return Err(ConfigError::new("mneme.writes_hot", "must be positive"));
        }
        if self.reads_hot == 0 {
            return Err(ConfigError::new("mneme.reads_hot", "must be positive"));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(ConfigError::new("mneme.decay", "must lie in (0, 1]"));
        }
        if self.line_bits == 0 || !self.line_bits.is_multiple_of(8) || self.line_bits as u64 / 8 > crate::trace::PAGE_BYTES {
            return Err(ConfigError::new("mneme.line_bits", "must be a positive multiple of 8 no larger than a page"));
        }
        Ok(())
    }

    pub fn classify(&self, reads: f64, writes: f64) -> IntensityClass {
        if writes >= self.writes_hot as f64 {
            IntensityClass::WriteIntensive
        } else if reads >= self.reads_hot as f64 {
            IntensityClass::ReadIntensive
        } else {
            IntensityClass::Cold
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteHistory {
    pub reads: f64,
    pub writes: f64,
    pub samples: u64,
}

/// Per-site running averages of per-epoch page access counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictorState {
    sites: BTreeMap<u32, SiteHistory>,
}

impl PredictorState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one page-epoch observation into the site's averages.
    pub fn observe(&mut self, site: u32, reads: u64, writes: u64, decay: f64) {
        let (r, w) = (reads as f64, writes as f64);
        self.sites
            .entry(site)
            .and_modify(|h| {
                h.reads = decay * r + (1.0 - decay) * h.reads;
                h.writes = decay * w + (1.0 - decay) * h.writes;
                h.samples += 1;
            })
            .or_insert(SiteHistory { reads: r, writes: w, samples: 1 });
    }

    pub fn history(&self, site: u32) -> Option<&SiteHistory> {
        self.sites.get(&site)
    }
}

/// Class predicted for a new page from `site`; unseen sites are cold.
pub fn predict_intensity(site: u32, predictor: &PredictorState, cfg: &MnemeConfig) -> IntensityClass {
    match predictor.history(site) {
        Some(h) => cfg.classify(h.reads, h.writes),
        None => IntensityClass::Cold,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MnemeError {
    #[error("access to unallocated page {0:#x}")]
    UnallocatedAccess(u64),
    #[error("page {0:#x} allocated twice")]
    AlreadyAllocated(u64),
    #[error("every tier is full")]
    OutOfMemory,
    #[error("a peripheral circuit has failed")]
    DeviceFailed,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Free frames per tier, indexed by [`TierId::index`].
pub type Occupancy = [u32; 4];

/// Preferred tier for `class`, else the first tier with room in
/// fastest-first order.
pub fn initial_place(class: IntensityClass, free: &Occupancy) -> Result<TierId, MnemeError> {
    let preferred = class.preferred_tier();
    std::iter::once(preferred)
        .chain(TierId::ALL.into_iter().filter(|&t| t != preferred))
        .find(|t| free[t.index()] > 0)
        .ok_or(MnemeError::OutOfMemory)
}

/// Uniform choice among tiers that have a free frame.
pub fn nimble_place<R: Rng>(rng: &mut R, free: &Occupancy) -> Result<TierId, MnemeError> {
    let open: Vec<TierId> = TierId::ALL.into_iter().filter(|t| free[t.index()] > 0).collect();
    if open.is_empty() {
        return Err(MnemeError::OutOfMemory);
    }
    Ok(open[rng.random_range(0..open.len())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unseen_site_is_cold() {
        let cfg = MnemeConfig::default();
        assert_eq!(predict_intensity(9, &PredictorState::new(), &cfg), IntensityClass::Cold);
    }

    #[test]
    fn write_heavy_site() {
        let cfg = MnemeConfig::default();
        let mut p = PredictorState::new();
        p.observe(4, 0, 100, cfg.decay);
        assert_eq!(predict_intensity(4, &p, &cfg), IntensityClass::WriteIntensive);
        p.observe(5, 0, 0, cfg.decay);
        assert_eq!(predict_intensity(5, &p, &cfg), IntensityClass::Cold);
    }

    #[test]
    fn ewma_update() {
        let mut p = PredictorState::new();
        p.observe(1, 8, 0, 0.5);
        p.observe(1, 0, 4, 0.5);
        let h = p.history(1).unwrap();
        assert_eq!((h.reads, h.writes, h.samples), (4.0, 2.0, 2));
    }

    #[test]
    fn placement_matrix() {
        let empty = [4, 4, 4, 4];
        assert_eq!(initial_place(IntensityClass::WriteIntensive, &empty).unwrap(), TierId::DRAM_NEAR);
        assert_eq!(initial_place(IntensityClass::ReadIntensive, &empty).unwrap(), TierId::PCM_NEAR);
        assert_eq!(initial_place(IntensityClass::Cold, &empty).unwrap(), TierId::PCM_FAR);
        assert_eq!(initial_place(IntensityClass::WriteIntensive, &[0, 4, 4, 4]).unwrap(), TierId::DRAM_FAR);
        assert_eq!(initial_place(IntensityClass::Cold, &[0, 4, 4, 0]).unwrap(), TierId::DRAM_FAR);
        assert_eq!(initial_place(IntensityClass::Cold, &[0, 0, 0, 0]), Err(MnemeError::OutOfMemory));
    }

    #[test]
    fn fallback_never_returns_full_tier() {
        for mask in 1u32..16 {
            let free: Occupancy = std::array::from_fn(|i| (mask >> i) & 1);
            for class in [IntensityClass::WriteIntensive, IntensityClass::ReadIntensive, IntensityClass::Cold] {
                let tier = initial_place(class, &free).unwrap();
                assert!(free[tier.index()] > 0);
            }
        }
    }

    #[test]
    fn nimble_forced_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(nimble_place(&mut rng, &[0, 0, 3, 0]).unwrap(), TierId::PCM_NEAR);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| nimble_place(&mut rng, &[1, 1, 1, 1]).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_eq!(nimble_place(&mut rng, &[0; 4]), Err(MnemeError::OutOfMemory));
    }

    #[test]
    fn nimble_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0u32; 4];
        for _ in 0..10_000 {
            counts[nimble_place(&mut rng, &[1, 1, 1, 1]).unwrap().index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.25).abs() <= 0.02, "{counts:?}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(MnemeConfig::default().validate().is_ok());
        let bad = MnemeConfig { decay: 0.0, ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().path, "mneme.decay");
        let bad = MnemeConfig {
            frames: Some(TierFrames { dram_near: 0, dram_far: 1, pcm_near: 1, pcm_far: 1 }),
            ..Default::default()
        };
        assert_eq!(bad.validate().unwrap_err().path, "mneme.frames.dram_near");
    }

    #[test]
    fn tier_names() {
        let names: Vec<String> = TierId::ALL.iter().map(ToString::to_string).collect();
        assert_eq!(names, ["dram.near", "dram.far", "pcm.near", "pcm.far"]);
    }
}
