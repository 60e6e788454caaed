//! Finite binary strings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite binary string, most significant (first) bit at index 0.
///
/// Ordering is the lexicographic string order, so a proper prefix sorts
/// before its extensions.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn empty() -> Self {
        Bits(Vec::new())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    /// The `len`-bit big-endian representation of `value`.
    ///
    /// Panics if `len > 64` or `value` does not fit.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "Bits::from_u64 supports at most 64 bits");
        assert!(
            len == 64 || value >> len == 0,
            "value {value} does not fit in {len} bits"
        );
        Bits((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect())
    }

    /// Big-endian integer value. Panics if longer than 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.0.len() <= 64, "Bits::to_u64 supports at most 64 bits");
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// `self * bit`.
    pub fn child(&self, bit: bool) -> Self {
        let mut out = self.clone();
        out.push(bit);
        out
    }

    /// The first `len` bits. Panics if `len > self.len()`.
    pub fn prefix(&self, len: usize) -> Self {
        Bits(self.0[..len].to_vec())
    }

    pub fn slice(&self, start: usize, end: usize) -> Self {
        Bits(self.0[start..end].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Bits) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn concat(&self, other: &Bits) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Bits(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "'{other}' is not a binary digit in {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Bits(iter.into_iter().collect())
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
