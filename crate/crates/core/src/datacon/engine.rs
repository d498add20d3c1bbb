use std::collections::{BTreeMap, VecDeque};

use super::{choose_precursor, DataconConfig, PcmError, Policy, Precursor};
use crate::bits::BitLine;
use crate::device::{write_cost, CircuitBank, DeviceConfig};
use crate::report::{AgingSummary, StatsReport};
use crate::trace::{MemoryRequest, RequestKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activity {
    Idle,
    Demand,
    Reinit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PulseKind {
    /// Prepare a released line for the pool.
    Reinit(Precursor),
    /// Background SET of a mapped line under the PreSET baseline.
    Preset,
}

#[derive(Debug, Clone, Copy)]
struct Pulse {
    line: u32,
    kind: PulseKind,
    end: u64,
}

#[derive(Debug, Clone)]
struct Partition {
    busy_until: u64,
    activity: Activity,
    pending: VecDeque<(u32, PulseKind)>,
    pulse: Option<Pulse>,
}

/// Where a physical line currently sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineState {
    Mapped(u32),
    Pooled(Precursor),
    Pending(Precursor),
    InFlight(Precursor),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PresetState {
    Ready,
    Queued,
    InFlight,
}

/// A background pulse started by [`PcmEngine::schedule_reinit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledPulse {
    pub partition: usize,
    pub line: u32,
    pub start: u64,
    pub end: u64,
}

/// Result of a demand write. Total latency is `latency + stall`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WriteOutcome {
    /// Programming latency of the write itself.
    pub latency: u64,
    /// Cycles spent waiting for a busy partition.
    pub stall: u64,
    pub demand_energy: f64,
    pub redirected: bool,
    pub pool_miss: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadOutcome {
    pub data: BitLine,
    pub latency: u64,
    pub stall: u64,
    pub energy: f64,
}

#[derive(Debug, Clone, Default)]
struct Counters {
    reads: u64,
    writes: u64,
    total_latency: u64,
    stall_cycles: u64,
    demand_energy: f64,
    background_energy: f64,
    redirections: u64,
    pool_misses: u64,
    partition_accesses: Vec<u64>,
}

/// A partitioned PCM bank running one write policy.
///
/// Physical line `i` belongs to partition `i % n_partitions`, and each
/// partition has one peripheral circuit. Without a segmented bitline every
/// access is driven at the far-segment voltage.
#[derive(Debug, Clone)]
pub struct PcmEngine {
    cfg: DataconConfig,
    dev: DeviceConfig,
    store: Vec<BitLine>,
    /// Logical to physical; identity for the baselines once written.
    table: Vec<Option<u32>>,
    states: Vec<LineState>,
    presets: Vec<PresetState>,
    pools: [VecDeque<u32>; 2],
    /// Pool length plus lines heading to that pool.
    projected: [usize; 2],
    partitions: Vec<Partition>,
    aging: CircuitBank,
    stats: Counters,
    last_cycle: u64,
}

impl PcmEngine {
    pub fn new(cfg: DataconConfig, dev: DeviceConfig) -> Result<Self, PcmError> {
        cfg.validate()?;
        dev.validate()?;
        let bits = cfg.line_bits;
        let n = cfg.n_lines;
        let mut store = Vec::with_capacity(n);
        let mut states = Vec::with_capacity(n);
        let mut pools = [VecDeque::new(), VecDeque::new()];
        if cfg.policy == Policy::Datacon {
            // Every line starts free; alternate the two precursors.
            for i in 0..n {
                let prec = if i % 2 == 0 { Precursor::AllOnes } else { Precursor::AllZeros };
                store.push(prec.line(bits));
                states.push(LineState::Pooled(prec));
                pools[prec.index()].push_back(i as u32);
            }
        } else {
            store.resize(n, BitLine::zeros(bits));
            for i in 0..n {
                states.push(LineState::Mapped(i as u32));
            }
        }
        let projected = [pools[0].len(), pools[1].len()];
        let partition = Partition {
            busy_until: 0,
            activity: Activity::Idle,
            pending: VecDeque::new(),
            pulse: None,
        };
        Ok(Self {
            table: vec![None; cfg.logical_lines()],
            presets: vec![PresetState::Ready; if cfg.policy == Policy::PreSet { n } else { 0 }],
            partitions: vec![partition; cfg.n_partitions],
            aging: CircuitBank::new(cfg.n_partitions, &dev.aging),
            stats: Counters { partition_accesses: vec![0; cfg.n_partitions], ..Counters::default() },
            store,
            states,
            pools,
            projected,
            last_cycle: 0,
            cfg,
            dev,
        })
    }

    pub fn config(&self) -> &DataconConfig {
        &self.cfg
    }

    pub fn pool_len(&self, prec: Precursor) -> usize {
        self.pools[prec.index()].len()
    }

    pub fn pending_len(&self) -> usize {
        self.partitions
            .iter()
            .map(|p| p.pending.len() + usize::from(p.pulse.is_some()))
            .sum()
    }

    pub fn partition_busy_until(&self, partition: usize) -> u64 {
        self.partitions[partition].busy_until
    }

    pub fn partition_activity(&self, partition: usize) -> Activity {
        self.partitions[partition].activity
    }

    /// Physical line backing a logical line, if it was ever written.
    pub fn translate(&self, logical: usize) -> Option<u32> {
        self.table.get(logical).copied().flatten()
    }

    pub fn partition_of(&self, line: u32) -> usize {
        line as usize % self.cfg.n_partitions
    }

    pub fn is_failed(&self) -> bool {
        self.aging.any_failed()
    }

    fn logical(&self, address: u64) -> Result<usize, PcmError> {
        let line = address / (self.cfg.line_bits as u64 / 8);
        let lines = self.cfg.logical_lines();
        if line >= lines as u64 {
            return Err(PcmError::AddressOutOfRange { address, lines });
        }
        Ok(line as usize)
    }

    fn pulse_length(&self, kind: PulseKind) -> u64 {
        match kind {
            PulseKind::Reinit(Precursor::AllZeros) => self.dev.pcm.t_reset,
            PulseKind::Reinit(Precursor::AllOnes) | PulseKind::Preset => self.dev.pcm.t_set,
        }
    }

    fn finish_pulse(&mut self, part: usize) {
        if let Some(pulse) = self.partitions[part].pulse.take() {
            self.apply_pulse(pulse);
        }
    }

    fn apply_pulse(&mut self, pulse: Pulse) {
        let line = pulse.line as usize;
        match pulse.kind {
            PulseKind::Reinit(prec) => {
                self.store[line] = prec.line(self.cfg.line_bits);
                self.states[line] = LineState::Pooled(prec);
                self.pools[prec.index()].push_back(pulse.line);
            }
            PulseKind::Preset => self.presets[line] = PresetState::Ready,
        }
    }

    /// Replays background work up to `now`: every partition that went idle
    /// before `now` with queued work started its next pulse at that moment.
    /// Completed pulses join their pools in order of completion.
    fn advance(&mut self, now: u64) {
        let mut done: Vec<(u64, usize, Pulse)> = Vec::new();
        for part in 0..self.partitions.len() {
            loop {
                if let Some(pulse) = self.partitions[part].pulse {
                    if pulse.end > now {
                        break;
                    }
                    self.partitions[part].pulse = None;
                    done.push((pulse.end, part, pulse));
                }
                let p = &self.partitions[part];
                if p.busy_until >= now || p.pending.is_empty() {
                    break;
                }
                self.start_pulse(part, p.busy_until);
            }
        }
        done.sort_unstable_by_key(|&(end, part, _)| (end, part));
        for (_, _, pulse) in done {
            self.apply_pulse(pulse);
        }
        for p in &mut self.partitions {
            if p.busy_until <= now {
                p.activity = Activity::Idle;
            }
        }
    }

    /// Waits for `part` to be free at or after `now`; returns (start, stall).
    fn acquire(&mut self, part: usize, now: u64) -> (u64, u64) {
        let start = now.max(self.partitions[part].busy_until);
        if self.partitions[part].pulse.is_some_and(|p| p.end <= start) {
            self.finish_pulse(part);
        }
        (start, start - now)
    }

    fn occupy(&mut self, part: usize, start: u64, duration: u64) {
        let p = &mut self.partitions[part];
        p.busy_until = p.busy_until.max(start + duration);
        if duration > 0 {
            p.activity = Activity::Demand;
        }
        self.aging.stress(part, self.dev.segment.v_far, duration);
        self.stats.partition_accesses[part] += 1;
    }

    fn start_pulse(&mut self, part: usize, start: u64) -> Option<ScheduledPulse> {
        let (line, kind) = self.partitions[part].pending.pop_front()?;
        let len = self.pulse_length(kind);
        let target = match kind {
            PulseKind::Reinit(prec) => prec,
            PulseKind::Preset => Precursor::AllOnes,
        };
        let energy = write_cost(&self.store[line as usize], &target.line(self.cfg.line_bits), &self.dev.pcm)
            .expect("store lines share one width")
            .energy;
        self.stats.background_energy += energy;
        match kind {
            PulseKind::Reinit(prec) => self.states[line as usize] = LineState::InFlight(prec),
            PulseKind::Preset => self.presets[line as usize] = PresetState::InFlight,
        }
        let end = start + len;
        let p = &mut self.partitions[part];
        p.pulse = Some(Pulse { line, kind, end });
        p.busy_until = end;
        p.activity = Activity::Reinit;
        self.aging.stress(part, self.dev.segment.v_far, len);
        Some(ScheduledPulse { partition: part, line, start, end })
    }

    /// Starts one pulse on every idle partition that has pending work.
    pub fn schedule_reinit(&mut self, now: u64) -> Vec<ScheduledPulse> {
        (0..self.partitions.len())
            .filter(|&part| self.partitions[part].busy_until <= now && self.partitions[part].pulse.is_none())
            .collect::<Vec<_>>()
            .into_iter()
            .filter_map(|part| self.start_pulse(part, now))
            .collect()
    }

    /// Queues a line that just lost its mapping for re-initialization
    /// toward whichever precursor is projected to run shorter.
    fn release(&mut self, line: u32) {
        let target = if self.projected[1] < self.projected[0] { Precursor::AllOnes } else { Precursor::AllZeros };
        self.projected[target.index()] += 1;
        if target.matches(&self.store[line as usize]) {
            self.states[line as usize] = LineState::Pooled(target);
            self.pools[target.index()].push_back(line);
            return;
        }
        self.states[line as usize] = LineState::Pending(target);
        let part = self.partition_of(line);
        self.partitions[part].pending.push_back((line, PulseKind::Reinit(target)));
    }

    /// Converts free lines from the longer pool until the projected pool
    /// sizes differ by at most one.
    fn rebalance(&mut self, now: u64) {
        loop {
            let [zeros, ones] = self.projected;
            let (long, short) = match zeros.abs_diff(ones) {
                0 | 1 => return,
                _ if zeros > ones => (Precursor::AllZeros, Precursor::AllOnes),
                _ => (Precursor::AllOnes, Precursor::AllZeros),
            };
            let Some(line) = self.take_from_pool(long, now) else { return };
            self.projected[short.index()] += 1;
            self.states[line as usize] = LineState::Pending(short);
            let part = self.partition_of(line);
            self.partitions[part].pending.push_back((line, PulseKind::Reinit(short)));
        }
    }

    /// Picks a pooled line, preferring one whose partition is free now.
    fn take_from_pool(&mut self, prec: Precursor, now: u64) -> Option<u32> {
        let pool = &self.pools[prec.index()];
        let pos = pool
            .iter()
            .position(|&l| self.partitions[l as usize % self.cfg.n_partitions].busy_until <= now)
            .or(if pool.is_empty() { None } else { Some(0) })?;
        let line = self.pools[prec.index()].remove(pos)?;
        self.projected[prec.index()] -= 1;
        Some(line)
    }

    pub fn handle_write(&mut self, req: &MemoryRequest) -> Result<WriteOutcome, PcmError> {
        let RequestKind::Write(payload) = &req.kind else {
            panic!("handle_write called with a non-write request");
        };
        self.begin(req.cycle)?;
        let now = req.cycle;
        if payload.len() != self.cfg.line_bits {
            return Err(crate::device::DeviceError::LengthMismatch { old: self.cfg.line_bits, new: payload.len() }.into());
        }
        let logical = self.logical(req.address)?;
        let outcome = match self.cfg.policy {
            Policy::Datacon => self.write_datacon(logical, payload, now)?,
            Policy::InPlace => self.write_in_place(logical as u32, payload, now),
            Policy::PreSet => self.write_preset(logical, payload, now),
        };
        self.stats.writes += 1;
        self.stats.total_latency += outcome.latency + outcome.stall;
        self.stats.stall_cycles += outcome.stall;
        self.stats.demand_energy += outcome.demand_energy;
        self.stats.redirections += u64::from(outcome.redirected);
        self.stats.pool_misses += u64::from(outcome.pool_miss);
        self.finish(now)?;
        Ok(outcome)
    }

    fn write_line(&mut self, line: u32, payload: &BitLine, now: u64) -> (u64, u64, f64) {
        let part = self.partition_of(line);
        let (start, stall) = self.acquire(part, now);
        let cost = write_cost(&self.store[line as usize], payload, &self.dev.pcm).expect("width checked");
        self.store[line as usize] = payload.clone();
        self.occupy(part, start, cost.latency);
        (cost.latency, stall, cost.energy)
    }

    fn write_datacon(&mut self, logical: usize, payload: &BitLine, now: u64) -> Result<WriteOutcome, PcmError> {
        let fraction = payload.count_ones() as f64 / payload.len() as f64;
        let prec = choose_precursor(fraction, self.cfg.threshold);
        let previous = self.table[logical];

        if let Some(line) = self.take_from_pool(prec, now) {
            let (latency, stall, energy) = self.write_line(line, payload, now);
            self.map(logical, line);
            if let Some(old) = previous {
                self.release(old);
            }
            return Ok(WriteOutcome { latency, stall, demand_energy: energy, redirected: true, pool_miss: false });
        }

        // Pool miss: overwrite the current line in place when there is one.
        let (line, extra_stall) = match previous {
            Some(line) => (line, 0),
            None => {
                let other = match prec {
                    Precursor::AllZeros => Precursor::AllOnes,
                    Precursor::AllOnes => Precursor::AllZeros,
                };
                match self.take_from_pool(other, now) {
                    Some(line) => (line, 0),
                    None => self.take_pending_line(now).ok_or(PcmError::OutOfSpareLines)?,
                }
            }
        };
        let (latency, stall, energy) = self.write_line(line, payload, now + extra_stall);
        if previous.is_none() {
            self.map(logical, line);
        }
        Ok(WriteOutcome {
            latency,
            stall: stall + extra_stall,
            demand_energy: energy,
            redirected: previous.is_none(),
            pool_miss: true,
        })
    }

    /// Pulls a line out of the re-initialization queues for a first write
    /// when both pools are empty; waits out an in-flight pulse if nothing
    /// is queued. Returns the line and the wait.
    fn take_pending_line(&mut self, now: u64) -> Option<(u32, u64)> {
        for part in 0..self.partitions.len() {
            if let Some(&(line, PulseKind::Reinit(prec))) = self.partitions[part].pending.front() {
                self.partitions[part].pending.pop_front();
                self.projected[prec.index()] -= 1;
                return Some((line, 0));
            }
        }
        let part = (0..self.partitions.len())
            .filter(|&p| self.partitions[p].pulse.is_some())
            .min_by_key(|&p| (self.partitions[p].pulse.map(|x| x.end), p))?;
        let pulse = self.partitions[part].pulse?;
        let PulseKind::Reinit(prec) = pulse.kind else { return None };
        self.finish_pulse(part);
        let line = self.take_from_pool(prec, u64::MAX)?;
        Some((line, pulse.end.saturating_sub(now)))
    }

    fn map(&mut self, logical: usize, line: u32) {
        self.table[logical] = Some(line);
        self.states[line as usize] = LineState::Mapped(logical as u32);
    }

    fn write_in_place(&mut self, line: u32, payload: &BitLine, now: u64) -> WriteOutcome {
        self.table[line as usize] = Some(line);
        let (latency, stall, energy) = self.write_line(line, payload, now);
        WriteOutcome { latency, stall, demand_energy: energy, redirected: false, pool_miss: false }
    }

    fn write_preset(&mut self, logical: usize, payload: &BitLine, now: u64) -> WriteOutcome {
        // Reads are served from the logical contents in `store`; the cells
        // are modeled as all ones whenever the line is `Ready`.
        let line = logical as u32;
        let part = self.partition_of(line);
        let mut stall = 0;
        let mut now_eff = now;
        match self.presets[logical] {
            PresetState::Ready => {}
            PresetState::InFlight => {
                let (start, s) = self.acquire(part, now);
                stall += s;
                now_eff = start;
            }
            PresetState::Queued => {
                // The SET has not run yet: run it now, ahead of the write.
                let queue = &mut self.partitions[part].pending;
                if let Some(pos) = queue.iter().position(|&(l, k)| l == line && k == PulseKind::Preset) {
                    queue.remove(pos);
                }
                let (start, s) = self.acquire(part, now);
                let len = self.dev.pcm.t_set;
                let energy = write_cost(&self.store[logical], &BitLine::ones(self.cfg.line_bits), &self.dev.pcm)
                    .expect("width checked")
                    .energy;
                self.stats.background_energy += energy;
                self.aging.stress(part, self.dev.segment.v_far, len);
                self.presets[logical] = PresetState::Ready;
                stall += s + len;
                now_eff = start + len;
                let p = &mut self.partitions[part];
                p.busy_until = p.busy_until.max(now_eff);
            }
        }
        let ones = BitLine::ones(self.cfg.line_bits);
        let cost = write_cost(&ones, payload, &self.dev.pcm).expect("width checked");
        self.store[logical] = payload.clone();
        self.table[logical] = Some(line);
        self.occupy(part, now_eff, cost.latency);
        self.presets[logical] = PresetState::Queued;
        self.partitions[part].pending.push_back((line, PulseKind::Preset));
        WriteOutcome { latency: cost.latency, stall, demand_energy: cost.energy, redirected: false, pool_miss: false }
    }

    pub fn handle_read(&mut self, req: &MemoryRequest) -> Result<ReadOutcome, PcmError> {
        assert!(req.is_read(), "handle_read called with a non-read request");
        self.begin(req.cycle)?;
        let now = req.cycle;
        let logical = self.logical(req.address)?;
        let t_read = self.dev.pcm.t_read;
        let energy = self.dev.pcm.e_read_bit * self.cfg.line_bits as f64;
        let outcome = match self.table[logical] {
            None => ReadOutcome { data: BitLine::zeros(self.cfg.line_bits), latency: t_read, stall: 0, energy },
            Some(line) => {
                let part = self.partition_of(line);
                let (start, stall) = self.acquire(part, now);
                self.occupy(part, start, t_read);
                let data = match self.cfg.policy {
                    Policy::PreSet => self.store[logical].clone(),
                    _ => self.store[line as usize].clone(),
                };
                ReadOutcome { data, latency: t_read, stall, energy }
            }
        };
        self.stats.reads += 1;
        self.stats.total_latency += outcome.latency + outcome.stall;
        self.stats.stall_cycles += outcome.stall;
        self.stats.demand_energy += outcome.energy;
        self.finish(now)?;
        Ok(outcome)
    }

    fn begin(&mut self, cycle: u64) -> Result<(), PcmError> {
        if self.is_failed() {
            return Err(PcmError::DeviceFailed);
        }
        self.last_cycle = self.last_cycle.max(cycle);
        self.advance(self.last_cycle);
        Ok(())
    }

    fn finish(&mut self, now: u64) -> Result<(), PcmError> {
        if self.cfg.policy == Policy::Datacon {
            self.rebalance(now);
        }
        self.schedule_reinit(now);
        if self.cfg.check_invariants {
            self.check_invariants()?;
        }
        Ok(())
    }

    /// Verifies line conservation, table injectivity and pool contents.
    pub fn check_invariants(&self) -> Result<(), PcmError> {
        let fail = |msg: String| Err(PcmError::Invariant(msg));
        let n = self.cfg.n_lines;
        let mut seen = vec![0u8; n];
        let mut mapped = 0usize;
        for (logical, entry) in self.table.iter().enumerate() {
            let Some(line) = *entry else { continue };
            let line = line as usize;
            if self.cfg.policy == Policy::Datacon {
                if self.states[line] != LineState::Mapped(logical as u32) {
                    return fail(format!("logical {logical} -> {line} but line state is {:?}", self.states[line]));
                }
                seen[line] += 1;
            }
            mapped += 1;
            if seen[line] > 1 {
                return fail(format!("physical line {line} mapped twice"));
            }
        }
        if self.cfg.policy != Policy::Datacon {
            return Ok(());
        }
        let mut pooled = 0usize;
        for prec in [Precursor::AllZeros, Precursor::AllOnes] {
            for &line in &self.pools[prec.index()] {
                let line = line as usize;
                seen[line] += 1;
                pooled += 1;
                if self.states[line] != LineState::Pooled(prec) {
                    return fail(format!("pooled line {line} has state {:?}", self.states[line]));
                }
                if !prec.matches(&self.store[line]) {
                    return fail(format!("pooled line {line} does not hold {prec:?}"));
                }
            }
        }
        let mut pending = 0usize;
        for p in &self.partitions {
            for &(line, kind) in &p.pending {
                let PulseKind::Reinit(prec) = kind else { return fail("preset pulse under datacon".into()) };
                seen[line as usize] += 1;
                pending += 1;
                if self.states[line as usize] != LineState::Pending(prec) {
                    return fail(format!("pending line {line} has state {:?}", self.states[line as usize]));
                }
            }
            if let Some(pulse) = p.pulse {
                seen[pulse.line as usize] += 1;
                pending += 1;
            }
        }
        if mapped + pooled + pending != n {
            return fail(format!("{mapped} mapped + {pooled} pooled + {pending} pending != {n}"));
        }
        if let Some(line) = seen.iter().position(|&c| c != 1) {
            return fail(format!("physical line {line} tracked {} times", seen[line]));
        }
        for prec in [Precursor::AllZeros, Precursor::AllOnes] {
            let heading = self
                .states
                .iter()
                .filter(|s| matches!(s, LineState::Pooled(p) | LineState::Pending(p) | LineState::InFlight(p) if *p == prec))
                .count();
            if heading != self.projected[prec.index()] {
                return fail(format!("projected {prec:?} count drifted"));
            }
        }
        Ok(())
    }

    /// Runs one trace record. Alloc records are ignored by the PCM bank.
    pub fn step(&mut self, req: &MemoryRequest) -> Result<(), PcmError> {
        match req.kind {
            RequestKind::Read => self.handle_read(req).map(drop),
            RequestKind::Write(_) => self.handle_write(req).map(drop),
            RequestKind::Alloc { .. } => Ok(()),
        }
    }

    pub fn report(&self, trace_digest: &str, seed: u64, config: serde_json::Value) -> StatsReport {
        let s = &self.stats;
        let access_histogram: BTreeMap<String, u64> = s
            .partition_accesses
            .iter()
            .enumerate()
            .map(|(i, &n)| (format!("partition.{i:03}"), n))
            .collect();
        let mut report = StatsReport::empty("pcm", self.cfg.policy.name(), trace_digest, seed, config);
        report.reads = s.reads;
        report.writes = s.writes;
        report.requests = s.reads + s.writes;
        report.total_latency = s.total_latency;
        report.stall_cycles = s.stall_cycles;
        report.demand_energy = s.demand_energy;
        report.background_energy = s.background_energy;
        report.redirections = s.redirections;
        report.pool_misses = s.pool_misses;
        report.access_histogram = access_histogram;
        report.aging = AgingSummary::from_circuits(self.aging.accrued(), self.dev.aging.failure_threshold);
        report.failed = self.is_failed();
        report.finalize();
        report
    }
}

/// Runs a whole trace through a fresh engine.
pub fn simulate(
    trace: &[MemoryRequest],
    cfg: &DataconConfig,
    dev: &DeviceConfig,
    seed: u64,
) -> Result<StatsReport, PcmError> {
    let mut engine = PcmEngine::new(cfg.clone(), dev.clone())?;
    for req in trace {
        engine.step(req)?;
    }
    let config = serde_json::json!({ "device": dev, "datacon": cfg });
    Ok(engine.report(&crate::trace::trace_digest(trace), seed, config))
}
