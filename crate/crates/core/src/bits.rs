//! Fixed-width bit lines used as memory-line payloads.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. The hex form is a
//! byte sequence where byte `k` carries bits `8k..8k+8`, least significant
//! bit first, written as two lowercase hex digits per byte.

use std::fmt;

/// A memory line of `len` bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitLine {
    len: usize,
    words: Vec<u64>,
}

impl BitLine {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut line = Self {
            len,
            words: vec![u64::MAX; len.div_ceil(64)],
        };
        line.trim();
        line
    }

    /// Builds a line from a bit predicate.
    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut line = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                line.set(i, true);
            }
        }
        line
    }

    /// Builds a line from raw words; bits past `len` are cleared.
    pub fn from_words(len: usize, words: Vec<u64>) -> Self {
        assert_eq!(words.len(), len.div_ceil(64), "word count does not match bit length");
        let mut line = Self { len, words };
        line.trim();
        line
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for {} bits", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for {} bits", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    pub fn is_all_zeros(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_all_ones(&self) -> bool {
        self.count_ones() == self.len
    }

    /// Counts `(0 -> 1, 1 -> 0)` transitions needed to turn `self` into `new`.
    ///
    /// Returns `None` when the lengths differ.
    pub fn transitions_to(&self, new: &BitLine) -> Option<(usize, usize)> {
        if self.len != new.len {
            return None;
        }
        let mut sets = 0;
        let mut resets = 0;
        for (&old, &new) in self.words.iter().zip(&new.words) {
            sets += (!old & new).count_ones() as usize;
            resets += (old & !new).count_ones() as usize;
        }
        Some((sets, resets))
    }

    /// Lowercase hex, two digits per byte. Requires `len % 8 == 0`.
    pub fn to_hex(&self) -> String {
        debug_assert_eq!(self.len % 8, 0);
        let bytes: Vec<u8> = (0..self.len / 8)
            .map(|k| (self.words[k / 8] >> ((k % 8) * 8)) as u8)
            .collect();
        hex::encode(bytes)
    }

    /// Parses the [`to_hex`](Self::to_hex) form. Returns `None` on bad digits
    /// or when the digit count is not `len / 4`.
    pub fn from_hex(text: &str, len: usize) -> Option<Self> {
        if !len.is_multiple_of(8) || text.len() != len / 4 {
            return None;
        }
        let bytes = hex::decode(text).ok()?;
        let mut line = Self::zeros(len);
        for (k, byte) in bytes.into_iter().enumerate() {
            line.words[k / 8] |= u64::from(byte) << ((k % 8) * 8);
        }
        Some(line)
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitLine({} bits, {} ones)", self.len, self.count_ones())
    }
}
