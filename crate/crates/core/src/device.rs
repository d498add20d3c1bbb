//! Timing, energy and peripheral-circuit aging models for PCM and DRAM.
//!
//! Time is in normalized cycles and energy in normalized units. The PCM
//! defaults put the demand-energy crossover between an all-zeros and an
//! all-ones precursor at a SET-bit fraction of exactly 0.6:
//! `f * e_set_bit = (1 - f) * e_reset_bit` with `e_set_bit = 1.0` and
//! `e_reset_bit = 1.5`.

use serde::{Deserialize, Serialize};

use crate::bits::BitLine;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PcmParams {
    pub t_set: u64,
    pub t_reset: u64,
    pub t_read: u64,
    pub e_set_bit: f64,
    pub e_reset_bit: f64,
    pub e_read_bit: f64,
    /// Overlap the SET and RESET phases of an in-place write
    /// (`max(t_set, t_reset)`) instead of serializing them.
    pub overlap_phases: bool,
}

impl Default for PcmParams {
    fn default() -> Self {
        Self {
            t_set: 8,
            t_reset: 1,
            t_read: 1,
            e_set_bit: 1.0,
            e_reset_bit: 1.5,
            e_read_bit: 0.1,
            overlap_phases: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DramParams {
    pub t_access_near: u64,
    pub t_access_far: u64,
    pub e_access_bit: f64,
}

impl Default for DramParams {
    fn default() -> Self {
        Self { t_access_near: 1, t_access_far: 7, e_access_bit: 0.05 }
    }
}

/// Segmented-bitline geometry shared by DRAM and PCM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentParams {
    /// Default page frames per near segment of each device.
    pub near_frames: u32,
    /// Default page frames per far segment of each device.
    pub far_frames: u32,
    pub extra_far_latency: u64,
    pub v_near: f64,
    pub v_far: f64,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self { near_frames: 64, far_frames: 256, extra_far_latency: 6, v_near: 1.0, v_far: 1.2 }
    }
}

/// Power-law stress accrual `k * V^gamma * t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgingParams {
    pub k: f64,
    pub gamma: f64,
    pub failure_threshold: f64,
    /// Peripheral circuits per device; frame or line `i` uses circuit `i % circuits`.
    pub circuits: u32,
}

impl Default for AgingParams {
    fn default() -> Self {
        Self { k: 1e-9, gamma: 4.0, failure_threshold: 1.0, circuits: 4 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceConfig {
    pub pcm: PcmParams,
    pub dram: DramParams,
    pub segment: SegmentParams,
    pub aging: AgingParams,
}

/// A configuration value that violates a model invariant.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

fn ensure(ok: bool, path: &str, message: impl Into<String>) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(path, message))
    }
}

fn nonneg(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

impl PcmParams {
    pub fn validate(&self, prefix: &str) -> Result<(), ConfigError> {
        ensure(self.t_set > self.t_reset, &format!("{prefix}.t_set"), "must exceed t_reset")?;
        ensure(self.t_reset >= 1, &format!("{prefix}.t_reset"), "must be at least 1")?;
        ensure(self.t_read >= 1, &format!("{prefix}.t_read"), "must be at least 1")?;
        ensure(nonneg(self.e_set_bit), &format!("{prefix}.e_set_bit"), "must be finite and nonnegative")?;
        ensure(
            nonneg(self.e_reset_bit) && self.e_reset_bit > self.e_set_bit,
            &format!("{prefix}.e_reset_bit"),
            "must be finite and exceed e_set_bit",
        )?;
        ensure(nonneg(self.e_read_bit), &format!("{prefix}.e_read_bit"), "must be finite and nonnegative")
    }
}

impl DeviceConfig {
    /// Checks every model invariant; errors carry a dotted field path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.pcm.validate("device.pcm")?;
        let s = &self.segment;
        ensure(s.near_frames > 0, "device.segment.near_frames", "must be positive")?;
        ensure(s.far_frames > 0, "device.segment.far_frames", "must be positive")?;
        ensure(s.extra_far_latency >= 1, "device.segment.extra_far_latency", "must be at least 1")?;
        ensure(s.v_near.is_finite() && s.v_near > 0.0, "device.segment.v_near", "must be positive")?;
        ensure(s.v_far.is_finite() && s.v_far > s.v_near, "device.segment.v_far", "must exceed v_near")?;
        let d = &self.dram;
        ensure(d.t_access_near >= 1, "device.dram.t_access_near", "must be at least 1")?;
        ensure(d.t_access_far > d.t_access_near, "device.dram.t_access_far", "must exceed t_access_near")?;
        ensure(
            d.t_access_far == d.t_access_near + s.extra_far_latency,
            "device.dram.t_access_far",
            "must equal t_access_near + segment.extra_far_latency",
        )?;
        ensure(nonneg(d.e_access_bit), "device.dram.e_access_bit", "must be finite and nonnegative")?;
        let a = &self.aging;
        ensure(nonneg(a.k), "device.aging.k", "must be finite and nonnegative")?;
        ensure(a.gamma.is_finite() && a.gamma > 0.0, "device.aging.gamma", "must be positive")?;
        ensure(
            a.failure_threshold.is_finite() && a.failure_threshold > 0.0,
            "device.aging.failure_threshold",
            "must be positive",
        )?;
        ensure(a.circuits >= 1, "device.aging.circuits", "must be at least 1")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Near,
    Far,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeviceError {
    #[error("bit vectors differ in length ({old} vs {new})")]
    LengthMismatch { old: usize, new: usize },
    #[error("voltage must be positive, got {0}")]
    NonPositiveVoltage(f64),
}

/// Cost of programming one line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WriteCost {
    pub latency: u64,
    pub energy: f64,
    pub n_set: usize,
    pub n_reset: usize,
}

/// Prices overwriting `old` with `new` in place.
///
/// A write needing both transition kinds runs a SET phase and a RESET phase
/// back to back, or overlapped when `overlap_phases` is set.
pub fn write_cost(old: &BitLine, new: &BitLine, p: &PcmParams) -> Result<WriteCost, DeviceError> {
    let (n_set, n_reset) = old
        .transitions_to(new)
        .ok_or(DeviceError::LengthMismatch { old: old.len(), new: new.len() })?;
    let latency = match (n_set > 0, n_reset > 0) {
        (false, false) => 0,
        (true, false) => p.t_set,
        (false, true) => p.t_reset,
        (true, true) if p.overlap_phases => p.t_set.max(p.t_reset),
        (true, true) => p.t_set + p.t_reset,
    };
    let energy = n_set as f64 * p.e_set_bit + n_reset as f64 * p.e_reset_bit;
    Ok(WriteCost { latency, energy, n_set, n_reset })
}

/// Far-segment accesses pay a flat additive penalty.
pub fn access_latency(segment: Segment, base: u64, s: &SegmentParams) -> u64 {
    match segment {
        Segment::Near => base,
        Segment::Far => base + s.extra_far_latency,
    }
}

impl SegmentParams {
    pub fn voltage(&self, segment: Segment) -> f64 {
        match segment {
            Segment::Near => self.v_near,
            Segment::Far => self.v_far,
        }
    }
}

/// Accumulated stress of one sense-amplifier/write-driver pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeripheralAgingState {
    pub accrued: f64,
    pub failure_threshold: f64,
}

impl PeripheralAgingState {
    pub fn new(failure_threshold: f64) -> Self {
        Self { accrued: 0.0, failure_threshold }
    }

    pub fn is_failed(&self) -> bool {
        self.accrued >= self.failure_threshold
    }
}

pub fn accrue_aging(
    state: PeripheralAgingState,
    voltage: f64,
    duration: u64,
    k: f64,
    gamma: f64,
) -> Result<PeripheralAgingState, DeviceError> {
    if !(voltage > 0.0) {
        return Err(DeviceError::NonPositiveVoltage(voltage));
    }
    Ok(PeripheralAgingState {
        accrued: state.accrued + k * voltage.powf(gamma) * duration as f64,
        ..state
    })
}

pub fn is_failed(state: &PeripheralAgingState) -> bool {
    state.is_failed()
}

/// A bank of peripheral circuits sharing one aging law.
#[derive(Debug, Clone)]
pub(crate) struct CircuitBank {
    circuits: Vec<PeripheralAgingState>,
    k: f64,
    gamma: f64,
}

impl CircuitBank {
    pub(crate) fn new(count: usize, params: &AgingParams) -> Self {
        Self {
            circuits: vec![PeripheralAgingState::new(params.failure_threshold); count],
            k: params.k,
            gamma: params.gamma,
        }
    }

    /// Stresses the circuit serving `index` (taken modulo the bank size).
    pub(crate) fn stress(&mut self, index: usize, voltage: f64, duration: u64) {
        let slot = index % self.circuits.len();
        // voltages come from validated configs
        self.circuits[slot] = accrue_aging(self.circuits[slot], voltage, duration, self.k, self.gamma)
            .expect("validated voltage");
    }

    pub(crate) fn accrued(&self) -> impl Iterator<Item = f64> + '_ {
        self.circuits.iter().map(|c| c.accrued)
    }

    pub(crate) fn any_failed(&self) -> bool {
        self.circuits.iter().any(PeripheralAgingState::is_failed)
    }
}
