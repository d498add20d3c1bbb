//! Memory traces and SNN workload files.
//!
//! Trace files are line oriented:
//!
//! ```text
//! <cycle> W <hex-address> <hex-payload>
//! <cycle> R <hex-address>
//! <cycle> A <hex-address> <site_id>
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Blank lines are
//! ignored. Cycles must be nondecreasing.

mod gen;
mod snn;

pub use gen::{generate_page_trace, generate_trace, AddressModel, PageTraceSpec, TraceSpec, PAGE_BYTES};
pub use snn::{generate_snn, parse_snn, Neuron, SnnError, SnnGraph, SnnSpec, Synapse};

use std::fmt;
use std::io::BufRead;

use sha2::{Digest, Sha256};

use crate::bits::BitLine;

/// Default memory line size (one 64-byte cache line).
pub const DEFAULT_LINE_BITS: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RequestKind {
    Read,
    Write(BitLine),
    Alloc { site: u32 },
}

/// One timestamped trace record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryRequest {
    pub cycle: u64,
    pub address: u64,
    pub kind: RequestKind,
}

impl MemoryRequest {
    pub fn read(cycle: u64, address: u64) -> Self {
        Self { cycle, address, kind: RequestKind::Read }
    }

    pub fn write(cycle: u64, address: u64, payload: BitLine) -> Self {
        Self { cycle, address, kind: RequestKind::Write(payload) }
    }

    pub fn alloc(cycle: u64, address: u64, site: u32) -> Self {
        Self { cycle, address, kind: RequestKind::Alloc { site } }
    }

    pub fn payload(&self) -> Option<&BitLine> {
        match &self.kind {
            RequestKind::Write(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_write(&self) -> bool {
        matches!(self.kind, RequestKind::Write(_))
    }

    pub fn is_read(&self) -> bool {
        matches!(self.kind, RequestKind::Read)
    }
}

impl fmt::Display for MemoryRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RequestKind::Read => write!(f, "{} R {:#x}", self.cycle, self.address),
            RequestKind::Write(p) => write!(f, "{} W {:#x} {}", self.cycle, self.address, p.to_hex()),
            RequestKind::Alloc { site } => write!(f, "{} A {:#x} {}", self.cycle, self.address, site),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: malformed record ({reason})")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: cycle goes backwards")]
    NonMonotonicCycle { line: usize },
    #[error("line {line}: payload has {found} hex digits, expected {expected}")]
    BadPayloadWidth { line: usize, expected: usize, found: usize },
    #[error("invalid trace spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_address(text: &str) -> Option<u64> {
    let digits = text
        .strip_prefix("0x")
        .or_else(|| text.strip_prefix("0X"))
        .unwrap_or(text);
    u64::from_str_radix(digits, 16).ok()
}

/// Parses a trace in file order. `line_bits` must be a multiple of 8.
pub fn parse_trace<R: BufRead>(reader: R, line_bits: usize) -> Result<Vec<MemoryRequest>, TraceError> {
    let mut requests = Vec::new();
    let mut last_cycle = 0u64;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let body = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let malformed = |reason: &str| TraceError::MalformedLine {
            line: line_no,
            reason: reason.to_string(),
        };
        if fields.len() < 3 {
            return Err(malformed("too few fields"));
        }
        let cycle: u64 = fields[0].parse().map_err(|_| malformed("bad cycle"))?;
        let address = parse_address(fields[2]).ok_or_else(|| malformed("bad address"))?;
        let kind = match (fields[1], fields.len()) {
            ("R", 3) => RequestKind::Read,
            ("W", 4) => {
                let hex = fields[3];
                if hex.len() != line_bits / 4 {
                    return Err(TraceError::BadPayloadWidth {
                        line: line_no,
                        expected: line_bits / 4,
                        found: hex.len(),
                    });
                }
                let payload = BitLine::from_hex(hex, line_bits).ok_or_else(|| malformed("bad payload digits"))?;
                RequestKind::Write(payload)
            }
            ("A", 4) => {
                let site = fields[3].parse().map_err(|_| malformed("bad site id"))?;
                RequestKind::Alloc { site }
            }
            ("R" | "W" | "A", _) => return Err(malformed("wrong field count")),
            _ => return Err(malformed("unknown record kind")),
        };
        if cycle < last_cycle {
            return Err(TraceError::NonMonotonicCycle { line: line_no });
        }
        last_cycle = cycle;
        requests.push(MemoryRequest { cycle, address, kind });
    }
    Ok(requests)
}

pub fn parse_trace_str(text: &str, line_bits: usize) -> Result<Vec<MemoryRequest>, TraceError> {
    parse_trace(text.as_bytes(), line_bits)
}

/// Canonical text form, one record per line.
pub fn serialize_trace(requests: &[MemoryRequest]) -> String {
    let mut out = String::new();
    for req in requests {
        out.push_str(&req.to_string());
        out.push('\n');
    }
    out
}

/// SHA-256 of the canonical serialization, hex encoded.
pub fn trace_digest(requests: &[MemoryRequest]) -> String {
    let mut hasher = Sha256::new();
    for req in requests {
        hasher.update(req.to_string().as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}
