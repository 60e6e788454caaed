//! The failure test for partition-system coding.
//!
//! Coding fails at a tree node `τ ∈ 2^{ℓ_n}` when one of the halves of
//! `τ`'s extensions handed to `D_{σ_τ 0}` or `D_{σ_τ 1}` misses the tree.
//! Over a uniform split the number of tree extensions in a half is
//! hypergeometric, so each failure probability is an exact rational. This
//! module computes those values, checks them against the exponential and
//! power-of-two bounds, sums them per level, estimates them by Monte Carlo
//! and finds the failure horizon `n₀` of a named system.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::Bits;
use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::partition::{name_to_system_height, sample_uniform_with, PartitionSystem};
use crate::ratio::{self, Rational, EXP_PRECISION_BITS};
use crate::schedule::LevelSchedule;
use crate::tree::FiniteTree;

/// `C(N-K, d) / C(N, d)`: a uniform `d`-subset of `N` items avoids all `K`
/// marked ones.
pub fn hypergeom_zero_prob(population: u64, marked: u64, draws: u64) -> Result<Rational> {
    if marked > population || draws > population {
        return Err(Error::InvalidArgument(format!(
            "need K <= N and d <= N, got N = {population}, K = {marked}, d = {draws}"
        )));
    }
    if draws > population - marked {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(
        BigInt::from(binomial(population - marked, draws)),
        BigInt::from(binomial(population, draws)),
    ))
}

/// A node `τ` at level `ℓ_n` of a tree and a class bit.
#[derive(Clone, Copy, Debug)]
pub struct FailureQuery<'a> {
    pub tree: &'a FiniteTree,
    pub schedule: &'a LevelSchedule,
    pub level: usize,
    pub node: &'a Bits,
    pub class_bit: u8,
}

impl FailureQuery<'_> {
    /// `(m_n, s)`: the gap and the number of tree extensions of `τ` at `ℓ_{n+1}`.
    fn gap_and_survivors(&self) -> Result<(u64, u64)> {
        let s = self.schedule;
        let n = self.level;
        if self.class_bit > 1 {
            return Err(Error::InvalidArgument(format!(
                "class bit {} is not 0 or 1",
                self.class_bit
            )));
        }
        if n >= s.horizon() {
            return Err(Error::InvalidArgument(format!("level {n} has no next level")));
        }
        let len = s.level(n) as usize;
        let next = s.level(n + 1) as usize;
        if self.node.len() != len {
            return Err(Error::NotALevel {
                len: self.node.len(),
                expected: vec![len],
            });
        }
        if next > self.tree.top_level() {
            return Err(Error::InvalidArgument(format!(
                "level ℓ_{} = {next} is above the tree top level {}",
                n + 1,
                self.tree.top_level()
            )));
        }
        if !self.tree.is_node(self.node) {
            return Err(Error::InvalidArgument(format!("{} is not a tree node", self.node)));
        }
        let survivors = self.tree.extension_count(self.node.to_u64(), len, next);
        Ok((s.gap(n), survivors))
    }
}

/// Probability over a uniform split of `τ`'s extensions that the half
/// assigned to class bit `i` contains no tree node.
pub fn failure_prob_at_node(q: &FailureQuery<'_>) -> Result<Rational> {
    let (m, survivors) = q.gap_and_survivors()?;
    split_failure_prob(m, survivors)
}

/// The same probability from the gap and survivor count alone.
pub fn split_failure_prob(m: u64, survivors: u64) -> Result<Rational> {
    if !(1..63).contains(&m) {
        return Err(Error::InvalidArgument(format!("gap {m} out of range")));
    }
    hypergeom_zero_prob(1 << m, survivors, 1 << (m - 1))
}

/// The exact failure probability next to its bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub m: u64,
    pub survivors: u64,
    #[serde(serialize_with = "ser_pq")]
    pub q: Rational,
    #[serde(serialize_with = "ser_pq")]
    pub exact: Rational,
    /// Certified enclosure of `e^{-2q²·2^{m-1}}`.
    #[serde(serialize_with = "ser_pq")]
    pub hoeffding_lower: Rational,
    #[serde(serialize_with = "ser_pq")]
    pub hoeffding_upper: Rational,
    /// `exact <= hoeffding_lower`, so `exact <= e^{-2q²·2^{m-1}}` is certain.
    pub hoeffding_ok: bool,
    /// `2^{-⌊q²·2^m⌋}`.
    #[serde(serialize_with = "ser_pq")]
    pub power2_bound: Rational,
    pub power2_ok: bool,
}

fn ser_pq<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&ratio::to_pq(r))
}

/// `q²·2^m`, the exponent shared by both bounds.
pub fn bound_exponent(q: &Rational, m: u64) -> Rational {
    q * q * ratio::pow2(m)
}

/// `e^{-2q²·2^{m-1}} < 2^{-q²·2^m}` reduces, with `x = q²·2^m > 0`, to
/// `e^x > 2^x`, i.e. `e > 2`. Decided from the certified lower bound on `e`.
pub fn exponential_below_power2(q: &Rational, m: u64) -> bool {
    let x = bound_exponent(q, m);
    let (e_lo, _) = ratio::e_bounds(EXP_PRECISION_BITS);
    x > Rational::zero() && e_lo > ratio::from_int(2)
}

/// Compares the exact failure probability of a split with `survivors` tree
/// extensions out of `2^m` against both bounds at density `q`.
pub fn bound_check(m: u64, q: &Rational, survivors: u64) -> Result<BoundCheck> {
    let exact = split_failure_prob(m, survivors)?;
    let x = bound_exponent(q, m);
    let (lo, hi) = ratio::exp_neg_bounds(&x, EXP_PRECISION_BITS);
    let floor = ratio::floor_to_biguint(&x).expect("exponent is nonnegative");
    let floor: u64 = floor
        .try_into()
        .map_err(|_| Error::InvalidArgument("exponent too large".into()))?;
    let power2_bound = ratio::pow2_neg(floor);
    Ok(BoundCheck {
        m,
        survivors,
        q: q.clone(),
        hoeffding_ok: exact <= lo,
        power2_ok: exact <= power2_bound,
        exact,
        hoeffding_lower: lo,
        hoeffding_upper: hi,
        power2_bound,
    })
}

/// [`bound_check`] at a tree node; requires `μ_τ > q_n`.
pub fn bound_check_at_node(q: &FailureQuery<'_>) -> Result<BoundCheck> {
    let (m, survivors) = q.gap_and_survivors()?;
    let threshold = q.schedule.density(q.level);
    let density = q.tree.conditional_density(q.node)?;
    if &density <= threshold {
        return Err(Error::PreconditionOutOfRegime {
            node: q.node.clone(),
            density: ratio::to_pq(&density),
            threshold: ratio::to_pq(threshold),
        });
    }
    bound_check(m, threshold, survivors)
}

/// Failure mass of one level of the test, against the power-of-two bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelBound {
    pub n: usize,
    pub nodes: usize,
    /// `Σ_τ 2·P(failure at τ)` over tree nodes at `ℓ_n`.
    #[serde(serialize_with = "ser_pq")]
    pub sum_exact: Rational,
    /// `2^{ℓ_n+1}·2^{-⌊q_n²·2^{m_n}⌋}`.
    #[serde(rename = "paper_bound", serialize_with = "ser_pq")]
    pub power2_bound: Rational,
    /// `sum_exact <= power2_bound`.
    pub satisfied: bool,
    /// `power2_bound < 2^{-n}`.
    pub bound_below_2_pow_neg_n: bool,
    /// The schedule's exact level condition `q_n²·2^{m_n} > ℓ_n + 1 + n`.
    pub level_condition: bool,
    /// Nodes at `ℓ_n` whose density is not above `q_n`.
    pub out_of_regime: Vec<Bits>,
}

/// Sums the union-bounded failure probabilities over the tree nodes at `ℓ_n`.
pub fn level_failure_bound(t: &FiniteTree, s: &LevelSchedule, n: usize) -> Result<LevelBound> {
    if n >= s.horizon() {
        return Err(Error::InvalidArgument(format!("level {n} has no next level")));
    }
    let len = s.level(n) as usize;
    let next = s.level(n + 1) as usize;
    if next > t.top_level() {
        return Err(Error::InvalidArgument(format!(
            "level ℓ_{} = {next} is above the tree top level {}",
            n + 1,
            t.top_level()
        )));
    }
    let m = s.gap(n);
    let q = s.density(n);
    let mut sum = Rational::zero();
    let mut out_of_regime = Vec::new();
    let nodes = t.nodes_at(len);
    for &v in &nodes {
        let node = Bits::from_u64(v, len);
        if &t.conditional_density(&node)? <= q {
            out_of_regime.push(node);
        }
        let p = split_failure_prob(m, t.extension_count(v, len, next))?;
        sum += p * ratio::from_int(2);
    }
    let x = bound_exponent(q, m);
    let floor: u64 = ratio::floor_to_biguint(&x)
        .and_then(|f| f.try_into().ok())
        .ok_or_else(|| Error::InvalidArgument("exponent too large".into()))?;
    let power2_bound = if floor > len as u64 {
        ratio::pow2_neg(floor - len as u64 - 1)
    } else {
        ratio::pow2(len as u64 + 1 - floor)
    };
    Ok(LevelBound {
        n,
        nodes: nodes.len(),
        satisfied: sum <= power2_bound,
        bound_below_2_pow_neg_n: power2_bound < ratio::pow2_neg(n as u64),
        level_condition: x > ratio::from_int(len as u64 + 1 + n as u64),
        sum_exact: sum,
        power2_bound,
        out_of_regime,
    })
}

/// Which failures a Monte Carlo trial counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureEvent {
    /// Some node at the level has an empty class on either side.
    Any,
    /// Some node at the level has an empty class on the given side.
    Class(u8),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub n: usize,
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
    pub event: FailureEvent,
}

/// Tree nodes at `ℓ_n` with their extensions at `ℓ_{n+1}`.
fn level_nodes(t: &FiniteTree, ps_levels: (usize, usize)) -> Vec<(u64, Vec<u64>)> {
    let (len, next) = ps_levels;
    t.nodes_at(len)
        .into_iter()
        .map(|v| (v, t.extensions(v, len, next)))
        .collect()
}

fn class_empty(ps: &PartitionSystem, n: usize, sigma: u64, bit: u8, exts: &[u64]) -> bool {
    let target = (sigma << 1) | u64::from(bit);
    !exts.iter().any(|&c| ps.contains(n + 1, target, c))
}

fn first_failure(ps: &PartitionSystem, n: usize, nodes: &[(u64, Vec<u64>)], event: FailureEvent) -> Option<(u64, u8)> {
    nodes.iter().find_map(|(tau, exts)| {
        let sigma = ps.class_index(n, *tau)?;
        let bits: &[u8] = match event {
            FailureEvent::Any => &[0, 1],
            FailureEvent::Class(0) => &[0],
            FailureEvent::Class(_) => &[1],
        };
        bits.iter()
            .find(|&&b| class_empty(ps, n, sigma, b, exts))
            .map(|&b| (*tau, b))
    })
}

/// A tree node at `ℓ_n` and a class bit whose class misses the tree, if any.
pub fn level_failure_witness(ps: &PartitionSystem, t: &FiniteTree, n: usize) -> Option<(Bits, u8)> {
    let len = ps.level_len(n);
    let nodes = level_nodes(t, (len, ps.level_len(n + 1)));
    first_failure(ps, n, &nodes, FailureEvent::Any).map(|(tau, b)| (Bits::from_u64(tau, len), b))
}

/// Estimates the probability that a uniform system fails at level `n`.
///
/// Trial `i` draws from a ChaCha8 stream keyed by `(seed, i)`, so the hit
/// count does not depend on how trials are scheduled across threads.
pub fn mc_failure_estimate(
    t: &FiniteTree,
    s: &LevelSchedule,
    n: usize,
    trials: u64,
    seed: u64,
    event: FailureEvent,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if n >= s.horizon() || s.level(n + 1) as usize > t.top_level() {
        return Err(Error::InvalidArgument(format!(
            "level {n} needs ℓ_{} within the schedule and tree",
            n + 1
        )));
    }
    if let FailureEvent::Class(b) = event {
        if b > 1 {
            return Err(Error::InvalidArgument(format!("class bit {b} is not 0 or 1")));
        }
    }
    let nodes = level_nodes(t, (s.level(n) as usize, s.level(n + 1) as usize));
    let hits = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let ps = sample_uniform_with(s, n + 1, &mut rng)?;
            Ok(u64::from(first_failure(&ps, n, &nodes, event).is_some()))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p = hits as f64 / trials as f64;
    Ok(McEstimate {
        n,
        hits,
        trials,
        estimate: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        seed,
        event,
    })
}

/// Least `n₀` such that no tree node at any level `n ∈ [n₀, N)` has an
/// empty class under `ps`; `None` when level `N-1` itself fails.
pub fn find_n0_in(ps: &PartitionSystem, t: &FiniteTree) -> Result<Option<usize>> {
    let top = ps.height();
    if ps.level_len(top) > t.top_level() {
        return Err(Error::InvalidArgument(format!(
            "system top level ℓ_{top} = {} is above the tree top level {}",
            ps.level_len(top),
            t.top_level()
        )));
    }
    for n in (0..top).rev() {
        if level_failure_witness(ps, t, n).is_some() {
            return Ok((n + 1 < top).then_some(n + 1));
        }
    }
    Ok(Some(0))
}

/// [`find_n0_in`] for the height-`N` system named by `name`.
pub fn find_n0(name: &Bits, t: &FiniteTree, s: &LevelSchedule) -> Result<Option<usize>> {
    let ps = name_to_system_height(name, s, s.horizon())?;
    find_n0_in(&ps, t)
}

/// The coding start at level `n₀`: `τ₀` the leftmost tree node at
/// `ℓ_{n₀}`, `σ₀` its class.
pub fn start_point(ps: &PartitionSystem, t: &FiniteTree, n0: usize) -> Option<(Bits, Bits)> {
    let len = ps.level_len(n0);
    let tau = *t.nodes_at(len).first()?;
    let sigma = ps.class_index(n0, tau)?;
    Some((Bits::from_u64(sigma, n0), Bits::from_u64(tau, len)))
}

/// `Σ_{n∈[from,to)} sum_exact` against `Σ_{n∈[from,to)} 2^{-n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summability {
    pub from: usize,
    pub to: usize,
    #[serde(serialize_with = "ser_pq")]
    pub total_exact: Rational,
    #[serde(serialize_with = "ser_pq")]
    pub total_bound: Rational,
    pub below: bool,
}

pub fn summability(t: &FiniteTree, s: &LevelSchedule, from: usize, to: usize) -> Result<Summability> {
    let mut total_exact = Rational::zero();
    let mut total_bound = Rational::zero();
    for n in from..to {
        total_exact += level_failure_bound(t, s, n)?.sum_exact;
        total_bound += ratio::pow2_neg(n as u64);
    }
    Ok(Summability {
        from,
        to,
        below: total_exact < total_bound || (from == to && total_exact.is_zero()),
        total_exact,
        total_bound,
    })
}
