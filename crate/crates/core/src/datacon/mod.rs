//! Content-aware PCM write path.
//!
//! Each write counts the SET bits of its payload and is redirected to a
//! spare line that already holds all zeros (SET fraction below the
//! threshold) or all ones (otherwise), so only one programming phase is
//! needed. A translation table keeps reads correct. Released lines are
//! re-initialized in the background, one pulse per idle partition at a time.
//!
//! Two baselines share the same bank model: `InPlace` overwrites the mapped
//! line with a two-phase write, and `PreSet` charges only the RESET phase at
//! demand time and SETs the line to all ones in the background.

mod engine;

pub use engine::{simulate, Activity, PcmEngine, ReadOutcome, ScheduledPulse, WriteOutcome};

use serde::{Deserialize, Serialize};

use crate::bits::BitLine;
use crate::device::{ConfigError, DeviceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Datacon,
    #[serde(rename = "preset")]
    PreSet,
    #[serde(rename = "inplace")]
    InPlace,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Datacon => "datacon",
            Policy::PreSet => "preset",
            Policy::InPlace => "inplace",
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "datacon" => Ok(Policy::Datacon),
            "preset" => Ok(Policy::PreSet),
            "inplace" => Ok(Policy::InPlace),
            other => Err(format!("unknown pcm policy `{other}`")),
        }
    }
}

/// Content a spare line is prepared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precursor {
    AllZeros,
    AllOnes,
}

impl Precursor {
    pub(crate) fn index(self) -> usize {
        match self {
            Precursor::AllZeros => 0,
            Precursor::AllOnes => 1,
        }
    }

    pub fn line(self, bits: usize) -> BitLine {
        match self {
            Precursor::AllZeros => BitLine::zeros(bits),
            Precursor::AllOnes => BitLine::ones(bits),
        }
    }

    pub(crate) fn matches(self, line: &BitLine) -> bool {
        match self {
            Precursor::AllZeros => line.is_all_zeros(),
            Precursor::AllOnes => line.is_all_ones(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataconConfig {
    /// Physical lines in the bank, spares included.
    pub n_lines: usize,
    pub n_partitions: usize,
    pub spare_fraction: f64,
    pub threshold: f64,
    pub policy: Policy,
    pub line_bits: usize,
    /// Re-check pool and table invariants after every request.
    pub check_invariants: bool,
}

impl Default for DataconConfig {
    fn default() -> Self {
        Self {
            n_lines: 4096,
            n_partitions: 16,
            spare_fraction: 0.02,
            threshold: 0.60,
            policy: Policy::Datacon,
            line_bits: crate::trace::DEFAULT_LINE_BITS,
            check_invariants: false,
        }
    }
}

impl DataconConfig {
    pub fn spare_lines(&self) -> usize {
        (self.spare_fraction * self.n_lines as f64).floor() as usize
    }

    /// Number of addressable logical lines.
    pub fn logical_lines(&self) -> usize {
        self.n_lines - self.spare_lines()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ConfigError::new("datacon.threshold", "must lie strictly between 0 and 1"));
        }
        if !(0.0..1.0).contains(&self.spare_fraction) || self.spare_lines() < 2 {
            return Err(ConfigError::new(
                "datacon.spare_fraction",
                "spare_fraction * n_lines must be at least 2 and spare_fraction below 1",
            ));
        }
        if self.n_partitions == 0 || !self.n_lines.is_multiple_of(self.n_partitions) {
            return Err(ConfigError::new("datacon.n_partitions", "must be positive and divide n_lines"));
        }
        if self.n_lines > u32::MAX as usize {
            return Err(ConfigError::new("datacon.n_lines", "too many lines"));
        }
        if self.line_bits == 0 || !self.line_bits.is_multiple_of(8) {
            return Err(ConfigError::new("datacon.line_bits", "must be a positive multiple of 8"));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PcmError {
    #[error("no spare line available for a first write")]
    OutOfSpareLines,
    #[error("address {address:#x} is outside the {lines}-line logical space")]
    AddressOutOfRange { address: u64, lines: usize },
    #[error("payload width: {0}")]
    Payload(#[from] DeviceError),
    #[error("a peripheral circuit has failed")]
    DeviceFailed,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

pub fn count_set_bits(payload: &BitLine) -> usize {
    payload.count_ones()
}

/// All-zeros iff the SET fraction is strictly below `threshold`.
pub fn choose_precursor(set_fraction: f64, threshold: f64) -> Precursor {
    if set_fraction < threshold {
        Precursor::AllZeros
    } else {
        Precursor::AllOnes
    }
}
