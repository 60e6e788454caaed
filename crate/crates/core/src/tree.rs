//! Finite prefix-closed binary trees with exact measure.
//!
//! A tree is stored as its set of leaves at `top_level`; interior nodes are
//! the prefixes of leaves. The measure of the tree is `|leaves|·2^{-L}`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::ratio::{self, Rational};
use crate::schedule::LevelSchedule;
use crate::MAX_MATERIALIZED_LEVEL;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteTree {
    top_level: usize,
    words: Vec<u64>,
}

/// Outcome of the two-extension check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwoExtension {
    Holds,
    /// A node at some level `ℓ_n` with fewer than two extensions at `ℓ_{n+1}`.
    Fails {
        witness: Bits,
        extensions: u64,
    },
}

impl TwoExtension {
    pub fn holds(&self) -> bool {
        matches!(self, TwoExtension::Holds)
    }
}

impl FiniteTree {
    fn check_level(top_level: usize) -> Result<()> {
        if top_level > MAX_MATERIALIZED_LEVEL {
            return Err(Error::TooLarge {
                level: top_level,
                limit: MAX_MATERIALIZED_LEVEL,
            });
        }
        Ok(())
    }

    fn word_count(top_level: usize) -> usize {
        (1usize << top_level).div_ceil(64)
    }

    pub fn empty(top_level: usize) -> Result<Self> {
        Self::check_level(top_level)?;
        Ok(FiniteTree {
            top_level,
            words: vec![0; Self::word_count(top_level)],
        })
    }

    pub fn full(top_level: usize) -> Result<Self> {
        let mut t = Self::empty(top_level)?;
        t.set_range(0, 1u64 << top_level, true);
        Ok(t)
    }

    pub fn from_leaf_indices(top_level: usize, leaves: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut t = Self::empty(top_level)?;
        for v in leaves {
            if v >> top_level != 0 {
                return Err(Error::InvalidTree(format!(
                    "leaf index {v} out of range for top level {top_level}"
                )));
            }
            t.words[(v / 64) as usize] |= 1 << (v % 64);
        }
        Ok(t)
    }

    pub fn from_leaves<'a>(top_level: usize, leaves: impl IntoIterator<Item = &'a Bits>) -> Result<Self> {
        let mut idx = Vec::new();
        for b in leaves {
            if b.len() != top_level {
                return Err(Error::InvalidTree(format!(
                    "leaf {b} has length {}, expected {top_level}",
                    b.len()
                )));
            }
            idx.push(b.to_u64());
        }
        Self::from_leaf_indices(top_level, idx)
    }

    /// Parses leaves written as bit strings, e.g. `["00", "01", "10"]`.
    pub fn from_leaf_strs(top_level: usize, leaves: &[&str]) -> Result<Self> {
        let bits = leaves.iter().map(|s| s.parse::<Bits>()).collect::<Result<Vec<_>>>()?;
        Self::from_leaves(top_level, &bits)
    }

    pub fn top_level(&self) -> usize {
        self.top_level
    }

    pub fn leaf_count(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `|leaves|·2^{-L}`.
    pub fn measure(&self) -> Rational {
        ratio::dyadic(BigInt::from(self.leaf_count()), self.top_level as u64)
    }

    pub fn leaf_indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64)
                .filter(move |b| (w >> b) & 1 == 1)
                .map(move |b| i as u64 * 64 + b)
        })
    }

    pub fn leaves(&self) -> Vec<Bits> {
        self.leaf_indices().map(|v| Bits::from_u64(v, self.top_level)).collect()
    }

    fn count_range(&self, start: u64, len: u64) -> u64 {
        let end = start + len;
        let mut count = 0u64;
        let mut i = start;
        while i < end {
            let w = (i / 64) as usize;
            let off = i % 64;
            let take = (64 - off).min(end - i);
            let mask = if take == 64 {
                u64::MAX
            } else {
                ((1u64 << take) - 1) << off
            };
            count += u64::from((self.words[w] & mask).count_ones());
            i += take;
        }
        count
    }

    fn set_range(&mut self, start: u64, len: u64, value: bool) {
        let end = start + len;
        let mut i = start;
        while i < end {
            let w = (i / 64) as usize;
            let off = i % 64;
            let take = (64 - off).min(end - i);
            let mask = if take == 64 {
                u64::MAX
            } else {
                ((1u64 << take) - 1) << off
            };
            if value {
                self.words[w] |= mask;
            } else {
                self.words[w] &= !mask;
            }
            i += take;
        }
    }

    /// Number of leaves extending the node `value` of length `len`.
    pub fn leaves_below(&self, value: u64, len: usize) -> u64 {
        debug_assert!(len <= self.top_level);
        let shift = self.top_level - len;
        self.count_range(value << shift, 1u64 << shift)
    }

    pub fn contains_node(&self, value: u64, len: usize) -> bool {
        len <= self.top_level && self.leaves_below(value, len) > 0
    }

    pub fn is_node(&self, node: &Bits) -> bool {
        node.len() <= self.top_level && self.contains_node(node.to_u64(), node.len())
    }

    /// Node values at depth `len`, ascending.
    pub fn nodes_at(&self, len: usize) -> Vec<u64> {
        assert!(len <= self.top_level);
        (0..1u64 << len).filter(|&v| self.contains_node(v, len)).collect()
    }

    /// Node values at depth `ext_len` extending the node `value` of length `len`.
    pub fn extensions(&self, value: u64, len: usize, ext_len: usize) -> Vec<u64> {
        assert!(len <= ext_len && ext_len <= self.top_level);
        let d = ext_len - len;
        (0..1u64 << d)
            .map(|j| (value << d) | j)
            .filter(|&c| self.contains_node(c, ext_len))
            .collect()
    }

    pub fn extension_count(&self, value: u64, len: usize, ext_len: usize) -> u64 {
        let d = ext_len - len;
        (0..1u64 << d)
            .filter(|&j| self.contains_node((value << d) | j, ext_len))
            .count() as u64
    }

    /// `μ_σ = 2^{|σ|}·μ(tree ∩ ⟦σ⟧)`; zero when `σ` is not a node.
    pub fn conditional_density(&self, sigma: &Bits) -> Result<Rational> {
        if sigma.len() > self.top_level {
            return Err(Error::TooLong {
                len: sigma.len(),
                top: self.top_level,
            });
        }
        let below = self.leaves_below(sigma.to_u64(), sigma.len());
        Ok(ratio::dyadic(
            BigInt::from(below),
            (self.top_level - sigma.len()) as u64,
        ))
    }

    fn density_exceeds(&self, value: u64, len: usize, q: &Rational) -> bool {
        // count / 2^{L - len} > q
        let count = BigInt::from(self.leaves_below(value, len));
        count * q.denom() > q.numer() << (self.top_level - len)
    }

    fn require_top(&self, s: &LevelSchedule) -> Result<()> {
        if s.top_level() != self.top_level as u64 {
            return Err(Error::InvalidArgument(format!(
                "tree top level {} differs from schedule top level ℓ_N = {}",
                self.top_level,
                s.top_level()
            )));
        }
        Ok(())
    }

    /// Removes every node at a schedule level whose conditional density is
    /// not above `q_n`, with all its extensions, until nothing changes.
    pub fn prune_to_density(&self, s: &LevelSchedule) -> Result<FiniteTree> {
        self.require_top(s)?;
        let mut t = self.clone();
        loop {
            let mut changed = false;
            for n in (0..=s.horizon()).rev() {
                let len = s.level(n) as usize;
                let q = s.density(n);
                for v in t.nodes_at(len) {
                    if !t.density_exceeds(v, len, q) {
                        let shift = t.top_level - len;
                        t.set_range(v << shift, 1u64 << shift, false);
                        changed = true;
                    }
                }
            }
            if !changed {
                return Ok(t);
            }
        }
    }

    /// Checks that every node at `ℓ_n` has at least two extensions at
    /// `ℓ_{n+1}`, for all `n < min(N, depth)` with `ℓ_{n+1} <= L`.
    pub fn check_two_extension_upto(&self, s: &LevelSchedule, depth: usize) -> TwoExtension {
        for n in 0..s.horizon().min(depth) {
            let (len, next) = (s.level(n) as usize, s.level(n + 1) as usize);
            if next > self.top_level {
                break;
            }
            for v in self.nodes_at(len) {
                let ext = self.extension_count(v, len, next);
                if ext < 2 {
                    return TwoExtension::Fails {
                        witness: Bits::from_u64(v, len),
                        extensions: ext,
                    };
                }
            }
        }
        TwoExtension::Holds
    }

    pub fn check_two_extension(&self, s: &LevelSchedule) -> TwoExtension {
        self.check_two_extension_upto(s, usize::MAX)
    }

    /// Canonical text form: `L=<top_level>` then one sorted leaf per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("L={}\n", self.top_level);
        for leaf in self.leaves() {
            let _ = writeln!(out, "{leaf}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut lines = body.split('\n');
        let header = lines.next().unwrap_or("");
        let top_level: usize = header
            .strip_prefix("L=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(1, format!("expected header L=<top_level>, got {header:?}")))?;
        Self::check_level(top_level)?;
        let mut prev: Option<u64> = None;
        let mut idx = Vec::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let leaf: Bits = line.parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
            if leaf.len() != top_level {
                return Err(Error::parse(
                    lineno,
                    format!("leaf {line:?} has length {}, expected {top_level}", leaf.len()),
                ));
            }
            let v = leaf.to_u64();
            if prev.is_some_and(|p| p >= v) {
                return Err(Error::parse(lineno, "leaves must be strictly increasing"));
            }
            prev = Some(v);
            idx.push(v);
        }
        Self::from_leaf_indices(top_level, idx)
    }
}

impl std::fmt::Debug for FiniteTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteTree")
            .field("top_level", &self.top_level)
            .field("leaves", &self.leaves())
            .finish()
    }
}

/// The full tree of depth `ℓ_N` minus a seeded random set of leaves whose
/// total measure is at most `budget`.
pub fn generate_complement_tree(s: &LevelSchedule, budget: &Rational, seed: u64) -> Result<FiniteTree> {
    if budget.is_negative() || budget >= &Rational::from_integer(1.into()) {
        return Err(Error::InvalidArgument(format!(
            "budget {} must lie in [0, 1)",
            ratio::to_pq(budget)
        )));
    }
    let top = s.top_level() as usize;
    let mut t = FiniteTree::full(top)?;
    let total = 1u64 << top;
    let remove = ratio::floor_to_biguint(&(budget * ratio::pow2(top as u64)))
        .and_then(|b| u64::try_from(b).ok())
        .unwrap_or(0);
    if remove.is_zero() {
        return Ok(t);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in rand::seq::index::sample(&mut rng, total as usize, remove as usize) {
        t.set_range(v as u64, 1, false);
    }
    Ok(t)
}
