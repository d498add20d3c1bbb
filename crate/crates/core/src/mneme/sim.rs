use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    initial_place, nimble_place, predict_intensity, Device, IntensityClass, MnemeConfig, MnemeError, Occupancy,
    PagePolicy, PredictorKind, PredictorState, TierFrames, TierId,
};
use crate::bits::BitLine;
use crate::device::{access_latency, write_cost, CircuitBank, DeviceConfig};
use crate::report::{AgingSummary, StatsReport};
use crate::trace::{MemoryRequest, RequestKind, PAGE_BYTES};

#[derive(Debug, Clone, PartialEq)]
pub struct PageDescriptor {
    pub vpn: u64,
    pub site: u32,
    pub tier: TierId,
    pub frame: u32,
    pub reads_epoch: u64,
    pub writes_epoch: u64,
    pub predicted: IntensityClass,
    pub observed: IntensityClass,
    /// Consecutive epochs observed outside the current tier's class.
    pub mismatch_streak: u32,
}

impl PageDescriptor {
    fn accesses(&self) -> u64 {
        self.reads_epoch + self.writes_epoch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Migration {
    pub vpn: u64,
    pub from: TierId,
    pub to: TierId,
}

#[derive(Debug, Clone)]
struct Tier {
    capacity: u32,
    free: BTreeSet<u32>,
}

#[derive(Debug, Clone, Default)]
struct Counters {
    reads: u64,
    writes: u64,
    total_latency: u64,
    migration_cycles: u64,
    demand_energy: f64,
    background_energy: f64,
    migrations: u64,
    tier_accesses: [u64; 4],
}

/// Cost of one line access at a tier: latency, energy, and the base
/// duration the peripheral circuit is stressed for.
struct LineCost {
    latency: u64,
    energy: f64,
    stress: u64,
}

/// Four-tier hybrid memory advanced one trace record at a time.
///
/// Page frames map onto a device's peripheral circuits by
/// `frame % circuits`, near and far segments sharing the same circuits.
/// Circuits are stressed for the base access duration at the segment
/// voltage; the far-segment latency penalty does not add stress.
#[derive(Debug, Clone)]
pub struct HybridSim {
    cfg: MnemeConfig,
    dev: DeviceConfig,
    frames: TierFrames,
    tiers: [Tier; 4],
    pages: BTreeMap<u64, PageDescriptor>,
    contents: HashMap<u64, BitLine>,
    predictor: PredictorState,
    oracle: BTreeMap<u64, IntensityClass>,
    rng: ChaCha8Rng,
    dram_aging: CircuitBank,
    pcm_aging: CircuitBank,
    stats: Counters,
    next_epoch: u64,
    epochs: u64,
}

impl HybridSim {
    pub fn new(cfg: MnemeConfig, dev: DeviceConfig, seed: u64) -> Result<Self, MnemeError> {
        cfg.validate()?;
        dev.validate()?;
        let frames = cfg.frames.unwrap_or_else(|| TierFrames::from_segments(&dev.segment));
        let tiers = TierId::ALL.map(|t| {
            let capacity = frames.get(t);
            Tier { capacity, free: (0..capacity).collect() }
        });
        let circuits = dev.aging.circuits as usize;
        Ok(Self {
            tiers,
            frames,
            pages: BTreeMap::new(),
            contents: HashMap::new(),
            predictor: PredictorState::new(),
            oracle: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            dram_aging: CircuitBank::new(circuits, &dev.aging),
            pcm_aging: CircuitBank::new(circuits, &dev.aging),
            stats: Counters::default(),
            next_epoch: cfg.epoch_length,
            epochs: 0,
            cfg,
            dev,
        })
    }

    /// Supplies the classes a clairvoyant predictor hands out.
    pub fn set_oracle(&mut self, classes: BTreeMap<u64, IntensityClass>) {
        self.oracle = classes;
    }

    pub fn page(&self, vpn: u64) -> Option<&PageDescriptor> {
        self.pages.get(&vpn)
    }

    pub fn pages(&self) -> impl Iterator<Item = &PageDescriptor> {
        self.pages.values()
    }

    pub fn predictor(&self) -> &PredictorState {
        &self.predictor
    }

    pub fn epochs(&self) -> u64 {
        self.epochs
    }

    pub fn free_frames(&self) -> Occupancy {
        std::array::from_fn(|i| self.tiers[i].free.len() as u32)
    }

    pub fn is_failed(&self) -> bool {
        self.dram_aging.any_failed() || self.pcm_aging.any_failed()
    }

    fn take_frame(&mut self, tier: TierId) -> u32 {
        self.tiers[tier.index()].free.pop_first().expect("tier chosen with a free frame")
    }

    pub fn allocate(&mut self, vpn: u64, site: u32) -> Result<TierId, MnemeError> {
        if self.pages.contains_key(&vpn) {
            return Err(MnemeError::AlreadyAllocated(vpn));
        }
        let predicted = match self.cfg.predictor {
            PredictorKind::Clairvoyant => self.oracle.get(&vpn).copied().unwrap_or(IntensityClass::Cold),
            PredictorKind::Site => predict_intensity(site, &self.predictor, &self.cfg),
        };
        let free = self.free_frames();
        let tier = match (self.cfg.pin_tier, self.cfg.policy) {
            (Some(tier), _) if free[tier.index()] > 0 => tier,
            (Some(_), _) => return Err(MnemeError::OutOfMemory),
            (None, PagePolicy::Mneme) => initial_place(predicted, &free)?,
            (None, PagePolicy::Nimble) => nimble_place(&mut self.rng, &free)?,
        };
        let frame = self.take_frame(tier);
        self.pages.insert(
            vpn,
            PageDescriptor {
                vpn,
                site,
                tier,
                frame,
                reads_epoch: 0,
                writes_epoch: 0,
                predicted,
                observed: predicted,
                mismatch_streak: 0,
            },
        );
        Ok(tier)
    }

    fn bank(&mut self, device: Device) -> &mut CircuitBank {
        match device {
            Device::Dram => &mut self.dram_aging,
            Device::Pcm => &mut self.pcm_aging,
        }
    }

    fn line_bits(&self) -> usize {
        self.cfg.line_bits
    }

    fn read_cost(&self, tier: TierId) -> LineCost {
        let bits = self.line_bits() as f64;
        let (base, energy) = match tier.device {
            Device::Dram => (self.dev.dram.t_access_near, self.dev.dram.e_access_bit * bits),
            Device::Pcm => (self.dev.pcm.t_read, self.dev.pcm.e_read_bit * bits),
        };
        LineCost { latency: access_latency(tier.segment, base, &self.dev.segment), energy, stress: base }
    }

    fn write_line_cost(&self, tier: TierId, old: &BitLine, new: &BitLine) -> LineCost {
        match tier.device {
            Device::Dram => {
                let base = self.dev.dram.t_access_near;
                LineCost {
                    latency: access_latency(tier.segment, base, &self.dev.segment),
                    energy: self.dev.dram.e_access_bit * self.line_bits() as f64,
                    stress: base,
                }
            }
            Device::Pcm => {
                let cost = write_cost(old, new, &self.dev.pcm).expect("lines share one width");
                LineCost {
                    latency: access_latency(tier.segment, cost.latency, &self.dev.segment),
                    energy: cost.energy,
                    stress: cost.latency,
                }
            }
        }
    }

    fn stress(&mut self, tier: TierId, frame: u32, duration: u64) {
        let voltage = self.dev.segment.voltage(tier.segment);
        self.bank(tier.device).stress(frame as usize, voltage, duration);
    }

    /// Runs epoch boundaries up to `cycle`, then one trace record.
    pub fn step(&mut self, req: &MemoryRequest) -> Result<(), MnemeError> {
        while req.cycle >= self.next_epoch {
            self.end_epoch();
            self.next_epoch += self.cfg.epoch_length;
        }
        let vpn = req.address / PAGE_BYTES;
        if let RequestKind::Alloc { site } = req.kind {
            self.allocate(vpn, site)?;
            return Ok(());
        }
        if self.is_failed() {
            return Err(MnemeError::DeviceFailed);
        }
        let page = self.pages.get(&vpn).ok_or(MnemeError::UnallocatedAccess(vpn))?;
        let (tier, frame) = (page.tier, page.frame);
        let line_addr = req.address / (self.line_bits() as u64 / 8);
        let cost = match &req.kind {
            RequestKind::Read => {
                self.stats.reads += 1;
                self.pages.get_mut(&vpn).expect("present").reads_epoch += 1;
                self.read_cost(tier)
            }
            RequestKind::Write(payload) => {
                self.stats.writes += 1;
                self.pages.get_mut(&vpn).expect("present").writes_epoch += 1;
                let old = self.contents.get(&line_addr).cloned().unwrap_or_else(|| BitLine::zeros(payload.len()));
                let cost = self.write_line_cost(tier, &old, payload);
                self.contents.insert(line_addr, payload.clone());
                cost
            }
            RequestKind::Alloc { .. } => unreachable!(),
        };
        self.stats.total_latency += cost.latency;
        self.stats.demand_energy += cost.energy;
        self.stats.tier_accesses[tier.index()] += 1;
        self.stress(tier, frame, cost.stress);
        Ok(())
    }

    /// Charges a page move: every line read at the source, written at the
    /// destination. Destination frames are treated as all zeros.
    fn charge_migration(&mut self, vpn: u64, from: (TierId, u32), to: (TierId, u32)) {
        let line_bytes = self.line_bits() as u64 / 8;
        let lines = PAGE_BYTES / line_bytes;
        let first = vpn * PAGE_BYTES / line_bytes;
        let zeros = BitLine::zeros(self.line_bits());
        let mut latency = 0;
        let mut energy = 0.0;
        for line in first..first + lines {
            let read = self.read_cost(from.0);
            let content = self.contents.get(&line).unwrap_or(&zeros);
            let write = self.write_line_cost(to.0, &zeros, content);
            latency += read.latency + write.latency;
            energy += read.energy + write.energy;
            self.stress(from.0, from.1, read.stress);
            self.stress(to.0, to.1, write.stress);
        }
        self.stats.migration_cycles += latency;
        self.stats.total_latency += latency;
        self.stats.background_energy += energy;
        self.stats.migrations += 1;
    }

    fn move_page(&mut self, vpn: u64, to: TierId, frame: u32) -> Migration {
        let page = self.pages.get_mut(&vpn).expect("migrating a resident page");
        let from = (page.tier, page.frame);
        page.tier = to;
        page.frame = frame;
        page.mismatch_streak = 0;
        self.tiers[from.0.index()].free.insert(from.1);
        self.charge_migration(vpn, from, (to, frame));
        Migration { vpn, from: from.0, to }
    }

    /// Classifies the finished epoch, updates the predictor, migrates, and
    /// resets the per-page counters.
    pub fn end_epoch(&mut self) -> Vec<Migration> {
        self.epochs += 1;
        for page in self.pages.values_mut() {
            page.observed = self.cfg.classify(page.reads_epoch as f64, page.writes_epoch as f64);
            self.predictor.observe(page.site, page.reads_epoch, page.writes_epoch, self.cfg.decay);
        }
        let migrations = match (self.cfg.pin_tier, self.cfg.policy) {
            (Some(_), _) => Vec::new(),
            (None, PagePolicy::Mneme) => self.mneme_migrations(),
            (None, PagePolicy::Nimble) => self.nimble_migrations(),
        };
        for page in self.pages.values_mut() {
            page.reads_epoch = 0;
            page.writes_epoch = 0;
        }
        migrations
    }

    fn mneme_migrations(&mut self) -> Vec<Migration> {
        let mut candidates = Vec::new();
        for page in self.pages.values_mut() {
            if page.observed == page.tier.matching_class() {
                page.mismatch_streak = 0;
            } else {
                page.mismatch_streak += 1;
                if page.mismatch_streak >= 2 {
                    candidates.push((page.accesses(), page.vpn));
                }
            }
        }
        candidates.sort_by_key(|&(accesses, vpn)| (std::cmp::Reverse(accesses), vpn));

        let mut moved = Vec::new();
        for (_, vpn) in candidates {
            if moved.len() >= self.cfg.migration_budget as usize {
                break;
            }
            let class = self.pages[&vpn].observed;
            let preferred = class.preferred_tier();
            let dest = std::iter::once(preferred)
                .chain(TierId::ALL.into_iter().filter(|&t| t != preferred))
                .find(|t| t.matching_class() == class && !self.tiers[t.index()].free.is_empty());
            if let Some(dest) = dest {
                let frame = self.take_frame(dest);
                moved.push(self.move_page(vpn, dest, frame));
            }
        }
        moved
    }

    fn nimble_migrations(&mut self) -> Vec<Migration> {
        let mut hot: Vec<(u64, u64)> = self
            .pages
            .values()
            .filter(|p| p.tier.device == Device::Pcm && p.observed != IntensityClass::Cold)
            .map(|p| (p.accesses(), p.vpn))
            .collect();
        hot.sort_by_key(|&(accesses, vpn)| (std::cmp::Reverse(accesses), vpn));

        let budget = self.cfg.migration_budget as usize;
        let mut moved = Vec::new();
        for (accesses, vpn) in hot {
            if moved.len() >= budget {
                break;
            }
            let free = self.free_frames();
            let open: Vec<TierId> =
                [TierId::DRAM_NEAR, TierId::DRAM_FAR].into_iter().filter(|t| free[t.index()] > 0).collect();
            if !open.is_empty() {
                let dest = open[rand::Rng::random_range(&mut self.rng, 0..open.len())];
                let frame = self.take_frame(dest);
                moved.push(self.move_page(vpn, dest, frame));
                continue;
            }
            // DRAM is full: swap with its coldest resident if that is colder.
            let victim = self
                .pages
                .values()
                .filter(|p| p.tier.device == Device::Dram)
                .min_by_key(|p| (p.accesses(), p.vpn))
                .map(|p| (p.accesses(), p.vpn, p.tier, p.frame));
            let Some((victim_accesses, victim, dram_tier, dram_frame)) = victim else { break };
            if victim_accesses >= accesses || moved.len() + 2 > budget {
                break;
            }
            let (pcm_tier, pcm_frame) = {
                let p = &self.pages[&vpn];
                (p.tier, p.frame)
            };
            // Each move frees the frame the other move is about to occupy.
            let up = self.move_page(vpn, dram_tier, dram_frame);
            self.tiers[pcm_tier.index()].free.remove(&pcm_frame);
            let down = self.move_page(victim, pcm_tier, pcm_frame);
            self.tiers[dram_tier.index()].free.remove(&dram_frame);
            moved.push(up);
            moved.push(down);
        }
        moved
    }

    /// Each resident page owns exactly one frame and no tier is over capacity.
    pub fn check_residence(&self) -> Result<(), String> {
        let mut used: [BTreeSet<u32>; 4] = Default::default();
        for page in self.pages.values() {
            let t = page.tier.index();
            if page.frame >= self.tiers[t].capacity {
                return Err(format!("page {} in frame {} beyond capacity", page.vpn, page.frame));
            }
            if !used[t].insert(page.frame) || self.tiers[t].free.contains(&page.frame) {
                return Err(format!("frame {} of {} double booked", page.frame, page.tier));
            }
        }
        for (t, tier) in self.tiers.iter().enumerate() {
            if used[t].len() + tier.free.len() != tier.capacity as usize {
                return Err(format!("tier {} leaks frames", TierId::ALL[t]));
            }
        }
        Ok(())
    }

    pub fn report(&self, trace_digest: &str, seed: u64, config: serde_json::Value) -> StatsReport {
        let s = &self.stats;
        let mut report = StatsReport::empty("hybrid", self.cfg.policy.name(), trace_digest, seed, config);
        report.reads = s.reads;
        report.writes = s.writes;
        report.requests = s.reads + s.writes;
        report.total_latency = s.total_latency;
        report.stall_cycles = s.migration_cycles;
        report.demand_energy = s.demand_energy;
        report.background_energy = s.background_energy;
        report.migrations = s.migrations;
        report.access_histogram =
            TierId::ALL.iter().map(|t| (t.to_string(), s.tier_accesses[t.index()])).collect();
        report.aging = AgingSummary::from_circuits(
            self.dram_aging.accrued().chain(self.pcm_aging.accrued()),
            self.dev.aging.failure_threshold,
        );
        report.failed = self.is_failed();
        report.finalize();
        report
    }

    pub fn frames(&self) -> TierFrames {
        self.frames
    }
}

/// Each page's most frequent class over the complete epochs of `trace`
/// (over the whole trace when it is shorter than one epoch). Ties go to the
/// more intense class.
pub fn oracle_classes(trace: &[MemoryRequest], cfg: &MnemeConfig) -> BTreeMap<u64, IntensityClass> {
    let mut counts: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    let mut votes: BTreeMap<u64, [u64; 3]> = BTreeMap::new();
    let mut boundary = cfg.epoch_length;
    let mut complete_epochs = 0;
    let tally = |counts: &mut BTreeMap<u64, (u64, u64)>, votes: &mut BTreeMap<u64, [u64; 3]>| {
        for (vpn, c) in counts.iter_mut() {
            let class = cfg.classify(c.0 as f64, c.1 as f64);
            votes.entry(*vpn).or_default()[class as usize] += 1;
            *c = (0, 0);
        }
    };
    for req in trace {
        while req.cycle >= boundary {
            tally(&mut counts, &mut votes);
            complete_epochs += 1;
            boundary += cfg.epoch_length;
        }
        let vpn = req.address / PAGE_BYTES;
        let entry = counts.entry(vpn).or_default();
        match req.kind {
            RequestKind::Read => entry.0 += 1,
            RequestKind::Write(_) => entry.1 += 1,
            RequestKind::Alloc { .. } => {}
        }
    }
    if complete_epochs == 0 {
        tally(&mut counts, &mut votes);
    }
    votes
        .into_iter()
        .map(|(vpn, v)| {
            let classes = [IntensityClass::WriteIntensive, IntensityClass::ReadIntensive, IntensityClass::Cold];
            // max_by_key keeps the last maximum; scan from coldest so ties favor intensity.
            let best = (0..3).rev().max_by_key(|&i| v[i]).expect("three classes");
            (vpn, classes[best])
        })
        .collect()
}

/// Runs a trace through a fresh hybrid memory.
pub fn simulate_hybrid(
    trace: &[MemoryRequest],
    cfg: &MnemeConfig,
    dev: &DeviceConfig,
    seed: u64,
) -> Result<StatsReport, MnemeError> {
    let mut sim = HybridSim::new(cfg.clone(), dev.clone(), seed)?;
    if cfg.predictor == PredictorKind::Clairvoyant {
        sim.set_oracle(oracle_classes(trace, cfg));
    }
    for req in trace {
        sim.step(req)?;
    }
    let config = serde_json::json!({ "device": dev, "mneme": cfg });
    Ok(sim.report(&crate::trace::trace_digest(trace), seed, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{generate_page_trace, PageTraceSpec};

    fn small_cfg(policy: PagePolicy) -> MnemeConfig {
        MnemeConfig {
            frames: Some(TierFrames { dram_near: 2, dram_far: 2, pcm_near: 2, pcm_far: 4 }),
            epoch_length: 100,
            policy,
            ..MnemeConfig::default()
        }
    }

    fn sim(cfg: MnemeConfig) -> HybridSim {
        HybridSim::new(cfg, DeviceConfig::default(), 7).unwrap()
    }

    fn page_addr(vpn: u64) -> u64 {
        vpn * PAGE_BYTES
    }

    #[test]
    fn unallocated_access_is_an_error() {
        let mut s = sim(small_cfg(PagePolicy::Mneme));
        let err = s.step(&MemoryRequest::read(0, page_addr(3))).unwrap_err();
        assert_eq!(err, MnemeError::UnallocatedAccess(3));
        s.step(&MemoryRequest::alloc(0, page_addr(3), 0)).unwrap();
        assert_eq!(s.step(&MemoryRequest::alloc(1, page_addr(3), 0)), Err(MnemeError::AlreadyAllocated(3)));
    }

    #[test]
    fn pinned_far_costs_extra_latency_per_access() {
        let run = |tier| {
            let cfg = MnemeConfig { pin_tier: Some(tier), ..small_cfg(PagePolicy::Mneme) };
            let mut trace = vec![MemoryRequest::alloc(0, 0, 0)];
            trace.extend((0..50).map(|i| MemoryRequest::read(i * 10 + 1, 64 * (i % 64))));
            simulate_hybrid(&trace, &cfg, &DeviceConfig::default(), 1).unwrap()
        };
        let near = run(TierId::DRAM_NEAR);
        let far = run(TierId::DRAM_FAR);
        assert_eq!(far.total_latency - near.total_latency, 50 * 6);
        let ratio = far.aging.max / near.aging.max;
        assert!((ratio - 1.2f64.powi(4)).abs() < 1e-9);
        assert_eq!(far.access_histogram["dram.far"], 50);
        assert_eq!(far.migrations, 0);
    }

    #[test]
    fn pcm_write_costs_in_place() {
        let cfg = MnemeConfig { pin_tier: Some(TierId::PCM_NEAR), ..small_cfg(PagePolicy::Mneme) };
        let mut s = sim(cfg);
        s.step(&MemoryRequest::alloc(0, 0, 0)).unwrap();
        s.step(&MemoryRequest::write(1, 0, BitLine::ones(512))).unwrap();
        s.step(&MemoryRequest::write(2, 0, BitLine::zeros(512))).unwrap();
        let r = s.report("d", 0, serde_json::Value::Null);
        // zeros -> ones is SET only, ones -> zeros RESET only
        assert_eq!(r.total_latency, 8 + 1);
        assert_eq!(r.demand_energy, 512.0 * 1.0 + 512.0 * 1.5);
    }

    #[test]
    fn one_mismatched_epoch_does_not_migrate() {
        let mut s = sim(small_cfg(PagePolicy::Mneme));
        s.step(&MemoryRequest::alloc(0, 0, 0)).unwrap();
        assert_eq!(s.page(0).unwrap().tier, TierId::PCM_FAR);
        let payload = BitLine::zeros(512);
        let hammer = |s: &mut HybridSim, epoch: u64| {
            for i in 0..20 {
                s.step(&MemoryRequest::write(epoch * 100 + i, 0, payload.clone())).unwrap();
            }
        };
        hammer(&mut s, 0);
        s.step(&MemoryRequest::read(150, 0)).unwrap();
        assert_eq!(s.page(0).unwrap().tier, TierId::PCM_FAR);
        assert_eq!(s.page(0).unwrap().mismatch_streak, 1);
        hammer(&mut s, 1);
        s.step(&MemoryRequest::read(250, 0)).unwrap();
        let page = s.page(0).unwrap();
        assert_eq!(page.tier, TierId::DRAM_NEAR);
        assert_eq!(page.mismatch_streak, 0);
        s.check_residence().unwrap();
        let r = s.report("d", 0, serde_json::Value::Null);
        assert_eq!(r.migrations, 1);
        assert!(r.background_energy > 0.0);
    }

    #[test]
    fn streak_resets_when_class_returns() {
        let mut s = sim(small_cfg(PagePolicy::Mneme));
        s.step(&MemoryRequest::alloc(0, 0, 0)).unwrap();
        for i in 0..20 {
            s.step(&MemoryRequest::write(i, 0, BitLine::zeros(512))).unwrap();
        }
        s.end_epoch();
        assert_eq!(s.page(0).unwrap().mismatch_streak, 1);
        s.end_epoch();
        assert_eq!(s.page(0).unwrap().mismatch_streak, 0);
    }

    #[test]
    fn nimble_promotes_hot_pcm_pages() {
        let cfg = MnemeConfig { pin_tier: None, ..small_cfg(PagePolicy::Nimble) };
        let mut s = sim(cfg);
        for vpn in 0..10 {
            s.step(&MemoryRequest::alloc(0, page_addr(vpn), 0)).unwrap();
        }
        assert_eq!(s.free_frames(), [0, 0, 0, 0]);
        let hot = s.pages().find(|p| p.tier.device == Device::Pcm).unwrap().vpn;
        for i in 0..30 {
            s.step(&MemoryRequest::read(i, page_addr(hot))).unwrap();
        }
        let moves = s.end_epoch();
        assert_eq!(moves.len(), 2);
        assert_eq!(moves[0].vpn, hot);
        assert_eq!(moves[0].to.device, Device::Dram);
        assert_eq!(moves[1].to, moves[0].from);
        s.check_residence().unwrap();
    }

    #[test]
    fn clairvoyant_mneme_never_migrates_stationary_pages() {
        let spec = PageTraceSpec { n_accesses: 8000, seed: 3, ..PageTraceSpec::default() };
        let (trace, hot) = generate_page_trace(&spec).unwrap();
        let cfg = MnemeConfig {
            frames: Some(TierFrames { dram_near: 16, dram_far: 16, pcm_near: 32, pcm_far: 128 }),
            predictor: PredictorKind::Clairvoyant,
            ..MnemeConfig::default()
        };
        let classes = oracle_classes(&trace, &cfg);
        for vpn in &hot {
            assert_eq!(classes[vpn], IntensityClass::WriteIntensive);
        }
        let r = simulate_hybrid(&trace, &cfg, &DeviceConfig::default(), 3).unwrap();
        assert_eq!(r.migrations, 0);
        assert_eq!(r.requests, 8000);
    }

    #[test]
    fn same_seed_same_report() {
        let spec = PageTraceSpec { n_accesses: 3000, seed: 5, ..PageTraceSpec::default() };
        let (trace, _) = generate_page_trace(&spec).unwrap();
        let cfg = MnemeConfig { policy: PagePolicy::Nimble, ..MnemeConfig::default() };
        let a = simulate_hybrid(&trace, &cfg, &DeviceConfig::default(), 9).unwrap();
        let b = simulate_hybrid(&trace, &cfg, &DeviceConfig::default(), 9).unwrap();
        assert_eq!(a, b);
    }
}
