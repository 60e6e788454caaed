//! Partition systems of finite height.
//!
//! A system of height `h` assigns to each `σ` with `|σ| <= h` a class
//! `D_σ ⊆ 2^{ℓ_{|σ|}}`. At every level each `τ ∈ D_σ` splits its
//! `2^{m_n}` extensions into two halves, one for `D_{σ0}` and one for
//! `D_{σ1}`.
//!
//! Systems are named by bit strings: the block of bits `u_n..u_{n+1}` is
//! read as an integer, reduced modulo `E_n = C(2^{m_n}, 2^{m_n-1})^{2^{ℓ_n}}`
//! and decomposed in mixed radix into one subset rank per `τ ∈ 2^{ℓ_n}`
//! (lexicographic order of `τ`, least significant digit first). Each rank
//! is unranked in the combinatorial number system to the half going to
//! class bit 0.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::Bits;
use crate::combinatorics::{uniform_below, unrank_subset};
use crate::error::{Error, Result};
use crate::schedule::{level_system_count, split_count, LevelSchedule};
use crate::MAX_MATERIALIZED_LEVEL;

/// Default refusal threshold for [`count_systems`], in decimal digits.
pub const DEFAULT_COUNT_DIGIT_BOUND: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartitionSystem {
    schedule: LevelSchedule,
    height: usize,
    /// `classes[n][σ]` holds the sorted values of `D_σ` for `|σ| = n`.
    classes: Vec<Vec<Vec<u64>>>,
}

/// Clause of the partition-system definition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `D_ε = {ε}`.
    Root,
    /// `D_{σ0} ∩ D_{σ1} = ∅`.
    Disjoint,
    /// Every member of `D_{σi}` has a prefix in `D_σ`.
    Monotone,
    /// `[τ] ∩ (D_{σ0} ∪ D_{σ1})` is every extension of `τ ∈ D_σ`.
    Cover,
    /// `|[τ] ∩ D_{σ0}| = |[τ] ∩ D_{σ1}| = 2^{m_n - 1}`.
    EqualSplit,
    /// The classes of one level partition `2^{ℓ_n}`.
    LevelPartition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: Clause,
    pub sigma: Bits,
    pub tau: Option<Bits>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validation {
    Valid,
    Invalid(Violation),
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validation::Valid)
    }
}

fn level_len(s: &LevelSchedule, n: usize) -> Result<usize> {
    let len = s.level(n) as usize;
    if len > MAX_MATERIALIZED_LEVEL {
        return Err(Error::TooLarge {
            level: len,
            limit: MAX_MATERIALIZED_LEVEL,
        });
    }
    Ok(len)
}

fn check_height(s: &LevelSchedule, height: usize) -> Result<()> {
    if height > s.horizon() {
        return Err(Error::InvalidArgument(format!(
            "height {height} exceeds schedule horizon {}",
            s.horizon()
        )));
    }
    if height > 62 {
        return Err(Error::InvalidArgument(format!("height {height} is too large")));
    }
    level_len(s, height).map(|_| ())
}

impl PartitionSystem {
    /// Wraps raw classes without checking the partition clauses; see
    /// [`PartitionSystem::validate`]. Only the shape is checked.
    pub fn from_classes(schedule: LevelSchedule, height: usize, classes: Vec<Vec<Vec<u64>>>) -> Result<Self> {
        check_height(&schedule, height)?;
        if classes.len() != height + 1 {
            return Err(Error::InvalidSystem(format!(
                "{} class levels for height {height}",
                classes.len()
            )));
        }
        let mut classes = classes;
        for (n, level) in classes.iter_mut().enumerate() {
            if level.len() != 1 << n {
                return Err(Error::InvalidSystem(format!(
                    "level {n} has {} classes, expected {}",
                    level.len(),
                    1u64 << n
                )));
            }
            let len = schedule.level(n);
            for class in level.iter_mut() {
                class.sort_unstable();
                class.dedup();
                if class.iter().any(|&t| t >> len != 0) {
                    return Err(Error::InvalidSystem(format!(
                        "class at level {n} holds a string longer than ℓ_{n} = {len}"
                    )));
                }
            }
        }
        Ok(PartitionSystem {
            schedule,
            height,
            classes,
        })
    }

    /// Builds a system from classes given as bit strings, `(σ, D_σ)` pairs.
    /// Missing `σ` get empty classes.
    pub fn from_named_classes(schedule: LevelSchedule, height: usize, named: &[(&str, &[&str])]) -> Result<Self> {
        let mut classes: Vec<Vec<Vec<u64>>> = (0..=height).map(|n| vec![Vec::new(); 1 << n]).collect();
        for (sigma, taus) in named {
            let sigma: Bits = sigma.parse()?;
            if sigma.len() > height {
                return Err(Error::InvalidSystem(format!("σ = {sigma} is above height {height}")));
            }
            for tau in *taus {
                let tau: Bits = tau.parse()?;
                if tau.len() as u64 != schedule.level(sigma.len()) {
                    return Err(Error::InvalidSystem(format!(
                        "τ = {tau} in D_{sigma} does not have length ℓ_{}",
                        sigma.len()
                    )));
                }
                classes[sigma.len()][sigma.to_u64() as usize].push(tau.to_u64());
            }
        }
        Self::from_classes(schedule, height, classes)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn schedule(&self) -> &LevelSchedule {
        &self.schedule
    }

    /// `ℓ_n` as a length.
    pub fn level_len(&self, n: usize) -> usize {
        self.schedule.level(n) as usize
    }

    /// Sorted members of `D_σ` for `σ` given by value at level `n`.
    pub fn class_values(&self, n: usize, sigma: u64) -> &[u64] {
        &self.classes[n][sigma as usize]
    }

    pub fn class(&self, sigma: &Bits) -> Vec<Bits> {
        let n = sigma.len();
        let len = self.level_len(n);
        self.class_values(n, sigma.to_u64())
            .iter()
            .map(|&t| Bits::from_u64(t, len))
            .collect()
    }

    /// `τ ∈ D_σ`, both given by value at level `n`.
    pub fn contains(&self, n: usize, sigma: u64, tau: u64) -> bool {
        self.classes[n][sigma as usize].binary_search(&tau).is_ok()
    }

    /// The `σ` at level `n` whose class holds `τ`, if exactly one does.
    pub fn class_index(&self, n: usize, tau: u64) -> Option<u64> {
        let mut hits = self.classes[n]
            .iter()
            .enumerate()
            .filter(|(_, c)| c.binary_search(&tau).is_ok())
            .map(|(i, _)| i as u64);
        let first = hits.next()?;
        hits.next().is_none().then_some(first)
    }

    /// The unique `σ ∈ 2^n` with `τ ∈ D_σ`, where `|τ| = ℓ_n`.
    pub fn class_of(&self, tau: &Bits) -> Result<Bits> {
        let n = self
            .schedule
            .level_index(tau.len() as u64)
            .filter(|&n| n <= self.height)
            .ok_or_else(|| Error::NotALevel {
                len: tau.len(),
                expected: self.schedule.levels()[..=self.height]
                    .iter()
                    .map(|&l| l as usize)
                    .collect(),
            })?;
        self.class_index(n, tau.to_u64())
            .map(|s| Bits::from_u64(s, n))
            .ok_or_else(|| Error::InvalidSystem(format!("τ = {tau} is not in exactly one class")))
    }

    /// The restriction to height `h <= self.height()`.
    pub fn restrict(&self, h: usize) -> PartitionSystem {
        assert!(h <= self.height);
        PartitionSystem {
            schedule: self.schedule.clone(),
            height: h,
            classes: self.classes[..=h].to_vec(),
        }
    }

    /// Checks all clauses; reports the first violation found, level by level
    /// and lexicographically within a level.
    pub fn validate(&self) -> Validation {
        let bad = |clause, sigma: Bits, tau: Option<Bits>| Validation::Invalid(Violation { clause, sigma, tau });
        if self.classes[0][0] != [0] {
            return bad(Clause::Root, Bits::empty(), None);
        }
        for n in 0..self.height {
            let len = self.level_len(n);
            let m = self.level_len(n + 1) - len;
            let half = 1usize << (m - 1);
            for sigma in 0..1u64 << n {
                let sig = Bits::from_u64(sigma, n);
                let c0: BTreeSet<u64> = self.classes[n + 1][(2 * sigma) as usize].iter().copied().collect();
                let c1: BTreeSet<u64> = self.classes[n + 1][(2 * sigma + 1) as usize].iter().copied().collect();
                if let Some(&t) = c0.intersection(&c1).next() {
                    return bad(Clause::Disjoint, sig, Some(Bits::from_u64(t, len + m)));
                }
                for (bit, class) in [(false, &c0), (true, &c1)] {
                    if let Some(&t) = class.iter().find(|&&t| !self.contains(n, sigma, t >> m)) {
                        return bad(Clause::Monotone, sig.child(bit), Some(Bits::from_u64(t, len + m)));
                    }
                }
                for &tau in &self.classes[n][sigma as usize] {
                    let exts = (tau << m)..((tau + 1) << m);
                    let in0 = c0.range(exts.clone()).count();
                    let in1 = c1.range(exts).count();
                    let t = Some(Bits::from_u64(tau, len));
                    if in0 + in1 != 1 << m {
                        return bad(Clause::Cover, sig.clone(), t);
                    }
                    if in0 != half || in1 != half {
                        return bad(Clause::EqualSplit, sig.clone(), t);
                    }
                }
            }
            if let Some(v) = self.level_partition_violation(n + 1) {
                return Validation::Invalid(v);
            }
        }
        Validation::Valid
    }

    fn level_partition_violation(&self, n: usize) -> Option<Violation> {
        let len = self.level_len(n);
        let mut owner = vec![u64::MAX; 1 << len];
        for (sigma, class) in self.classes[n].iter().enumerate() {
            for &t in class {
                if owner[t as usize] != u64::MAX {
                    return Some(Violation {
                        clause: Clause::LevelPartition,
                        sigma: Bits::from_u64(sigma as u64, n),
                        tau: Some(Bits::from_u64(t, len)),
                    });
                }
                owner[t as usize] = sigma as u64;
            }
        }
        owner.iter().position(|&o| o == u64::MAX).map(|t| Violation {
            clause: Clause::LevelPartition,
            sigma: Bits::from_u64(0, n),
            tau: Some(Bits::from_u64(t as u64, len)),
        })
    }

    /// Text form: header `h=<height>;schedule=<ℓ_0,..,ℓ_h>`, then
    /// `σ:τ1,τ2,..` for every `σ` of length `h`, all sorted.
    pub fn to_text(&self) -> String {
        let levels: Vec<String> = self.schedule.levels()[..=self.height]
            .iter()
            .map(|l| l.to_string())
            .collect();
        let mut out = format!("h={};schedule={}\n", self.height, levels.join(","));
        let len = self.level_len(self.height);
        for (sigma, class) in self.classes[self.height].iter().enumerate() {
            let taus: Vec<String> = class.iter().map(|&t| Bits::from_u64(t, len).to_string()).collect();
            let _ = writeln!(out, "{}:{}", Bits::from_u64(sigma as u64, self.height), taus.join(","));
        }
        out
    }

    /// Parses the text form against `schedule`; lower levels are derived
    /// from the top one. The result is not validated.
    pub fn parse(text: &str, schedule: &LevelSchedule) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut lines = body.split('\n');
        let header = lines.next().unwrap_or("");
        let parsed = header.split_once(';').and_then(|(h, sch)| {
            let h: usize = h.strip_prefix("h=")?.parse().ok()?;
            let levels = sch.strip_prefix("schedule=")?;
            let levels: Option<Vec<u64>> = levels.split(',').map(|l| l.parse().ok()).collect();
            Some((h, levels?))
        });
        let (height, levels) =
            parsed.ok_or_else(|| Error::parse(1, format!("expected h=<height>;schedule=<levels>, got {header:?}")))?;
        if height > schedule.horizon() || levels != schedule.levels()[..=height] {
            return Err(Error::parse(
                1,
                format!("schedule levels {levels:?} do not match the given schedule"),
            ));
        }
        check_height(schedule, height)?;
        let len = schedule.level(height) as usize;
        let mut top: Vec<Option<Vec<u64>>> = vec![None; 1 << height];
        let mut count = 0usize;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let (sigma, taus) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(lineno, "expected σ:τ1,τ2,.."))?;
            let sigma: Bits = sigma.parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
            if sigma.len() != height {
                return Err(Error::parse(
                    lineno,
                    format!("σ = {sigma} does not have length {height}"),
                ));
            }
            if sigma.to_u64() as usize != count {
                return Err(Error::parse(lineno, "σ lines must list every σ in lexicographic order"));
            }
            let mut values = Vec::new();
            if len == 0 {
                if !taus.is_empty() {
                    return Err(Error::parse(lineno, "ℓ_0 class must be written as an empty string"));
                }
                values.push(0);
            } else if !taus.is_empty() {
                for tau in taus.split(',') {
                    let tau: Bits = tau.parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
                    if tau.len() != len {
                        return Err(Error::parse(lineno, format!("τ = {tau} does not have length {len}")));
                    }
                    values.push(tau.to_u64());
                }
                if values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::parse(lineno, "τ lists must be strictly increasing"));
                }
            }
            top[count] = Some(values);
            count += 1;
        }
        if count != 1 << height {
            return Err(Error::parse(
                count + 2,
                format!("expected {} σ lines, got {count}", 1u64 << height),
            ));
        }
        let mut classes: Vec<Vec<Vec<u64>>> = vec![Vec::new(); height + 1];
        classes[height] = top.into_iter().map(Option::unwrap).collect();
        for n in (0..height).rev() {
            let m = schedule.gap(n);
            classes[n] = (0..1usize << n)
                .map(|sigma| {
                    let mut c: Vec<u64> = classes[n + 1][2 * sigma]
                        .iter()
                        .chain(&classes[n + 1][2 * sigma + 1])
                        .map(|&t| t >> m)
                        .collect();
                    c.sort_unstable();
                    c.dedup();
                    c
                })
                .collect();
        }
        Self::from_classes(schedule.clone(), height, classes)
    }
}

/// Builds a valid system level by level; `digit(n, τ)` supplies the subset
/// rank (below `C(2^{m_n}, 2^{m_n - 1})`) used to split `τ`.
fn build_system(
    s: &LevelSchedule,
    height: usize,
    mut digit: impl FnMut(usize, u64, &BigUint) -> BigUint,
) -> Result<PartitionSystem> {
    check_height(s, height)?;
    let mut classes: Vec<Vec<Vec<u64>>> = vec![vec![vec![0]]];
    let mut owner: Vec<u64> = vec![0];
    for n in 0..height {
        let len = s.level(n) as usize;
        let m = s.gap(n);
        let half = 1u64 << (m - 1);
        let c = split_count(m);
        let mut next_classes = vec![Vec::new(); 1 << (n + 1)];
        let mut next_owner = vec![0u64; 1 << (len + m as usize)];
        for tau in 0..1u64 << len {
            let rank = digit(n, tau, &c);
            let zero_half = unrank_subset(1 << m, half, &rank);
            let sigma = owner[tau as usize];
            let mut zi = zero_half.iter().peekable();
            for j in 0..1u64 << m {
                let bit = if zi.peek() == Some(&&j) {
                    zi.next();
                    0
                } else {
                    1
                };
                let child = (tau << m) | j;
                let child_sigma = (sigma << 1) | bit;
                next_owner[child as usize] = child_sigma;
                next_classes[child_sigma as usize].push(child);
            }
        }
        classes.push(next_classes);
        owner = next_owner;
    }
    Ok(PartitionSystem {
        schedule: s.clone(),
        height,
        classes,
    })
}

/// The largest height whose naming length fits in `len` bits.
pub fn name_height(s: &LevelSchedule, len: usize) -> usize {
    s.naming_lengths()
        .iter()
        .take(s.horizon() + 1)
        .rposition(|&u| u <= len as u64)
        .unwrap_or(0)
}

/// The system named by `bits`, of the largest height `h` with `u_h <= |bits|`.
pub fn name_to_system(bits: &Bits, s: &LevelSchedule) -> Result<PartitionSystem> {
    let u1 = s
        .naming_length(1)
        .ok_or_else(|| Error::InvalidArgument("schedule has no tabulated naming length u_1".into()))?;
    if (bits.len() as u64) < u1 {
        return Err(Error::InvalidArgument(format!(
            "name has {} bits, at least u_1 = {u1} needed",
            bits.len()
        )));
    }
    name_to_system_height(bits, s, name_height(s, bits.len()))
}

/// The height-`h` system named by the first `u_h` bits of `bits`.
pub fn name_to_system_height(bits: &Bits, s: &LevelSchedule, height: usize) -> Result<PartitionSystem> {
    let need = s.naming_length(height).ok_or_else(|| {
        Error::InvalidArgument(format!("naming length u_{height} is not tabulated for this schedule"))
    })?;
    if (bits.len() as u64) < need {
        return Err(Error::InvalidArgument(format!(
            "name has {} bits, u_{height} = {need} needed",
            bits.len()
        )));
    }
    let mut residue = BigUint::zero();
    let mut current_level = usize::MAX;
    build_system(s, height, |n, _tau, c| {
        if n != current_level {
            current_level = n;
            let start = s.naming_length(n).unwrap() as usize;
            let end = s.naming_length(n + 1).unwrap() as usize;
            let block = bits.as_slice()[start..end]
                .iter()
                .fold(BigUint::zero(), |acc, &b| (acc << 1u32) + u32::from(b));
            let e = level_system_count(s.levels(), n).expect("tabulated level has a count");
            residue = block % e;
        }
        let (q, r) = residue.div_rem(c);
        residue = q;
        r
    })
}

/// A uniformly random height-`h` system drawn from `rng`.
pub fn sample_uniform_with<R: RngCore>(s: &LevelSchedule, height: usize, rng: &mut R) -> Result<PartitionSystem> {
    build_system(s, height, |_, _, c| uniform_below(rng, c))
}

/// A uniformly random height-`h` system, deterministic in `seed`.
pub fn sample_uniform(s: &LevelSchedule, height: usize, seed: u64) -> Result<PartitionSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_uniform_with(s, height, &mut rng)
}

/// `|B_h| = Π_{n<h} C(2^{m_n}, 2^{m_n-1})^{2^{ℓ_n}}`.
///
/// Refuses with [`Error::DigitBound`] when the count has more than
/// `max_digits` decimal digits.
pub fn count_systems(s: &LevelSchedule, height: usize, max_digits: usize) -> Result<BigUint> {
    if height > s.horizon() {
        return Err(Error::InvalidArgument(format!(
            "height {height} exceeds schedule horizon {}",
            s.horizon()
        )));
    }
    // bits(C^k) <= k·bits(C); refuse early when even the lower estimate is too big
    let bit_budget = (max_digits as f64 * std::f64::consts::LOG2_10).ceil() as u64 + 1;
    let mut lower_bits = 0u64;
    for n in 0..height {
        let m = s.gap(n);
        let ell = s.level(n);
        if m >= 63 || ell >= 63 {
            return Err(Error::DigitBound { bound: max_digits });
        }
        let c_bits = split_count(m).bits();
        lower_bits = lower_bits.saturating_add((c_bits - 1).saturating_mul(1u64 << ell));
        if lower_bits > bit_budget {
            return Err(Error::DigitBound { bound: max_digits });
        }
    }
    let mut total = BigUint::from(1u32);
    for n in 0..height {
        let c = split_count(s.gap(n));
        total *= c.pow(1u32 << s.level(n));
    }
    if total.to_string().len() > max_digits {
        return Err(Error::DigitBound { bound: max_digits });
    }
    Ok(total)
}

/// How unevenly the naming spreads names over systems at one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelDistortion {
    pub n: usize,
    pub block_bits: u64,
    /// Number of distinct level-`n` splittings, `E_n`.
    pub systems: String,
    pub min_preimages: String,
    pub max_preimages: String,
}

impl LevelDistortion {
    /// `max_preimages / min_preimages` as a float, for reporting.
    pub fn ratio(&self) -> f64 {
        let hi: BigUint = self.max_preimages.parse().unwrap();
        let lo: BigUint = self.min_preimages.parse().unwrap();
        hi.to_f64().unwrap_or(f64::INFINITY) / lo.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Per-level preimage counts of the naming: a block of `b` bits hits each
/// residue mod `E_n` either `⌊2^b/E_n⌋` or `⌈2^b/E_n⌉` times.
pub fn naming_distortion(s: &LevelSchedule, height: usize) -> Result<Vec<LevelDistortion>> {
    (0..height)
        .map(|n| {
            let (Some(start), Some(end), Some(e)) = (
                s.naming_length(n),
                s.naming_length(n + 1),
                level_system_count(s.levels(), n),
            ) else {
                return Err(Error::InvalidArgument(format!(
                    "naming length u_{} is not tabulated",
                    n + 1
                )));
            };
            let b = end - start;
            let total = BigUint::from(1u32) << b;
            let (q, r) = total.div_rem(&e);
            let max = if r.is_zero() { q.clone() } else { &q + 1u32 };
            Ok(LevelDistortion {
                n,
                block_bits: b,
                systems: e.to_string(),
                min_preimages: q.to_string(),
                max_preimages: max.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::ratio;

    fn s012() -> LevelSchedule {
        LevelSchedule::new(vec![0, 1, 2], vec![ratio(1, 3), ratio(1, 2), ratio(1, 2)]).unwrap()
    }

    fn s024() -> LevelSchedule {
        LevelSchedule::new(vec![0, 2, 4], vec![ratio(1, 2), ratio(1, 4), ratio(1, 9)]).unwrap()
    }

    fn identity_system() -> PartitionSystem {
        PartitionSystem::from_named_classes(
            s012(),
            2,
            &[
                ("", &[""]),
                ("0", &["0"]),
                ("1", &["1"]),
                ("00", &["00"]),
                ("01", &["01"]),
                ("10", &["10"]),
                ("11", &["11"]),
            ],
        )
        .unwrap()
    }

    fn b(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(identity_system().validate().is_valid());

        let bad = PartitionSystem::from_named_classes(
            s012(),
            2,
            &[
                ("", &[""]),
                ("0", &["0"]),
                ("1", &["1"]),
                ("00", &["00", "01"]),
                ("10", &["10"]),
                ("11", &["11"]),
            ],
        )
        .unwrap();
        assert_eq!(
            bad.validate(),
            Validation::Invalid(Violation {
                clause: Clause::EqualSplit,
                sigma: b("0"),
                tau: Some(b("0")),
            })
        );

        let h0 = PartitionSystem::from_named_classes(s012(), 0, &[("", &[""])]).unwrap();
        assert!(h0.validate().is_valid());
    }

    #[test]
    fn validate_catches_each_clause() {
        let s = s012();
        let sys = |named: &[(&str, &[&str])]| PartitionSystem::from_named_classes(s.clone(), 2, named).unwrap();
        let root = PartitionSystem::from_named_classes(s.clone(), 0, &[]).unwrap();
        assert!(matches!(
            root.validate(),
            Validation::Invalid(Violation {
                clause: Clause::Root,
                ..
            })
        ));

        let overlap = sys(&[("", &[""]), ("0", &["0", "1"]), ("1", &["1"])]);
        assert!(matches!(
            overlap.validate(),
            Validation::Invalid(Violation {
                clause: Clause::Disjoint,
                ..
            })
        ));

        let orphan = sys(&[
            ("", &[""]),
            ("0", &["0"]),
            ("1", &["1"]),
            ("00", &["00"]),
            ("01", &["10"]),
            ("10", &["01"]),
            ("11", &["11"]),
        ]);
        assert_eq!(
            orphan.validate(),
            Validation::Invalid(Violation {
                clause: Clause::Monotone,
                sigma: b("01"),
                tau: Some(b("10"))
            })
        );

        let uncovered = sys(&[("", &[""]), ("0", &["0"]), ("1", &[]), ("10", &["10"]), ("11", &["11"])]);
        assert!(matches!(
            uncovered.validate(),
            Validation::Invalid(Violation {
                clause: Clause::Cover,
                ..
            })
        ));
    }

    #[test]
    fn class_of_examples() {
        let ps = identity_system();
        assert_eq!(ps.class_of(&Bits::empty()).unwrap(), Bits::empty());
        assert_eq!(ps.class_of(&b("10")).unwrap(), b("10"));
        assert!(matches!(ps.class_of(&b("100")), Err(Error::NotALevel { .. })));
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_systems(&s012(), 1, 100).unwrap(), BigUint::from(2u32));
        assert_eq!(count_systems(&s012(), 2, 100).unwrap(), BigUint::from(8u32));
        assert_eq!(count_systems(&s024(), 2, 100).unwrap(), BigUint::from(7776u32));
        assert_eq!(count_systems(&s024(), 2, 3), Err(Error::DigitBound { bound: 3 }));
        assert_eq!(count_systems(&s024(), 0, 3).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn zero_name_is_rank_zero_split() {
        let s = s012();
        let ps = name_to_system(&Bits::from_u64(0, 3), &s).unwrap();
        assert_eq!(ps.height(), 1);
        // rank 0 puts the first extension in class 0
        assert_eq!(ps.class(&b("0")), vec![b("0")]);
        assert_eq!(ps.class(&b("1")), vec![b("1")]);
        assert!(name_to_system(&b("00"), &s).is_err());
    }

    #[test]
    fn naming_is_prefix_monotone_on_samples() {
        let s = s024();
        let name: Bits = (0..40).map(|i| (i * 7 + 3) % 5 < 2).collect();
        let full = name_to_system(&name, &s).unwrap();
        assert_eq!(full.height(), 2);
        let short = name_to_system(&name.prefix(5), &s).unwrap();
        assert_eq!(full.restrict(1), short);
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let s = s024();
        let a = sample_uniform(&s, 2, 11).unwrap();
        assert_eq!(a, sample_uniform(&s, 2, 11).unwrap());
        assert!(a.validate().is_valid());
        let h0 = sample_uniform(&s, 0, 11).unwrap();
        assert_eq!(h0.class(&Bits::empty()), vec![Bits::empty()]);
    }

    #[test]
    fn text_round_trip() {
        let ps = identity_system();
        let text = ps.to_text();
        assert_eq!(text, "h=2;schedule=0,1,2\n00:00\n01:01\n10:10\n11:11\n");
        assert_eq!(PartitionSystem::parse(&text, &s012()).unwrap(), ps);

        let s = s024();
        let ps = sample_uniform(&s, 2, 5).unwrap();
        assert_eq!(
            PartitionSystem::parse(&ps.to_text(), &s).unwrap().to_text(),
            ps.to_text()
        );

        let h0 = sample_uniform(&s, 0, 5).unwrap();
        assert_eq!(h0.to_text(), "h=0;schedule=0\n:\n");
        assert_eq!(PartitionSystem::parse(&h0.to_text(), &s).unwrap(), h0);

        assert!(PartitionSystem::parse("h=2;schedule=0,2,4\n", &s012()).is_err());
        assert!(PartitionSystem::parse("h=1;schedule=0,1\n1:1\n0:0\n", &s012()).is_err());
    }

    #[test]
    fn distortion_per_level_is_bounded() {
        let s = s024();
        let d = naming_distortion(&s, 2).unwrap();
        assert_eq!(d[0].block_bits, 5);
        assert_eq!((d[0].min_preimages.as_str(), d[0].max_preimages.as_str()), ("5", "6"));
        let c = f64::from(s.naming_slack());
        let bound = (1.0 + 2f64.powf(-c)) / (1.0 - 2f64.powf(-c));
        assert!(d.iter().all(|l| l.ratio() <= bound));
    }
}
