//! Fixed-length packed bit array, bit `i` stored in word `i / 64` at
//! position `i % 64`. Bits past `len` in the last word are always zero.

use serde::{Deserialize, Serialize};

const EVEN_BITS: u64 = 0x5555_5555_5555_5555;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bits({})", self.to_string01())
    }
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut b = Self { len, words };
        b.clear_tail();
        b
    }

    /// Parses a string of `0`/`1` characters; other characters are skipped.
    pub fn from_str01(s: &str) -> Self {
        let digits: Vec<bool> = s
            .chars()
            .filter_map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        let mut b = Self::zeros(digits.len());
        for (i, &d) in digits.iter().enumerate() {
            b.set(i, d);
        }
        b
    }

    pub fn to_string01(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Sets bits `start, start + 2, ...` below `end`.
    pub fn set_alternating(&mut self, start: usize, end: usize) {
        let end = end.min(self.len);
        if start >= end {
            return;
        }
        let first_word = start >> 6;
        let last_word = (end - 1) >> 6;
        for w in first_word..=last_word {
            let base = w << 6;
            // bits of this word whose global index has the parity of `start`
            let pattern = if (base ^ start) & 1 == 0 { EVEN_BITS } else { !EVEN_BITS };
            let lo = start.max(base) - base;
            let hi = end.min(base + 64) - base;
            let range = if hi - lo == 64 { !0 } else { ((1u64 << (hi - lo)) - 1) << lo };
            self.words[w] |= pattern & range;
        }
    }

    /// Indices of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let tz = word.trailing_zeros() as usize;
                word &= word - 1;
                Some((wi << 6) | tz)
            })
        })
    }

    /// Copies `len` bits starting at `start`, reading cyclically.
    pub fn cyclic_slice(&self, start: usize, len: usize) -> Bits {
        let mut out = Bits::zeros(len);
        for k in 0..len {
            if self.get((start + k) % self.len) {
                out.set(k, true);
            }
        }
        out
    }

    /// Little-endian byte image, bit `i` in byte `i / 8` at position `i % 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        bytes.truncate(self.len.div_ceil(8));
        bytes
    }

    pub fn from_bytes(len: usize, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let mut words = vec![0u64; len.div_ceil(64)];
        for (i, &b) in bytes.iter().enumerate() {
            words[i >> 3] |= (b as u64) << ((i & 7) * 8);
        }
        let b = Self { len, words };
        // reject stray bits beyond `len`
        let mut check = b.clone();
        check.clear_tail();
        (check == b).then_some(b)
    }

    pub(crate) fn clear_tail(&mut self) {
        let r = self.len & 63;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alternating_fill_matches_naive() {
        for len in [1usize, 63, 64, 65, 130, 200] {
            for start in 0..len.min(70) {
                for end in start..=len.min(start + 140) {
                    let mut fast = Bits::zeros(len);
                    fast.set_alternating(start, end);
                    let mut slow = Bits::zeros(len);
                    let mut i = start;
                    while i < end {
                        slow.set(i, true);
                        i += 2;
                    }
                    assert_eq!(fast, slow, "len {len} start {start} end {end}");
                }
            }
        }
    }

    #[test]
    fn ones_iterator() {
        let b = Bits::from_str01("0100000000000000000000000000000000000000000000000000000000000000011");
        assert_eq!(b.iter_ones().collect::<Vec<_>>(), vec![1, 65, 66]);
        assert_eq!(b.count_ones(), 3);
    }

    proptest! {
        #[test]
        fn byte_image_round_trips(bits in proptest::collection::vec(any::<bool>(), 0..300)) {
            let mut b = Bits::zeros(bits.len());
            for (i, &v) in bits.iter().enumerate() { b.set(i, v); }
            let back = Bits::from_bytes(b.len(), &b.to_bytes()).unwrap();
            prop_assert_eq!(back, b);
        }
    }
}
