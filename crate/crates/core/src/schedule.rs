//! Level schedules: the levels `ℓ_n`, gaps `m_n = ℓ_{n+1} - ℓ_n`, densities
//! `q_n` and naming lengths `u_n`, plus the finite-horizon convergence and
//! threshold report.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::ratio::{self, Rational};

/// Default number of slack bits added per naming block.
pub const DEFAULT_NAMING_SLACK: u32 = 2;

/// Naming lengths are only tabulated while a block stays below this many bits.
pub const NAMING_BIT_LIMIT: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelKind {
    /// `ℓ_n = 2^n` for `n > 0`, `ℓ_0 = 0`.
    Exponential,
    /// `ℓ_n = n·⌈log₂ n⌉`, with `ℓ_0 = 0, ℓ_1 = 1`.
    NLogN,
    /// `ℓ_n = c·n·⌈log₂ n⌉`, with `ℓ_0 = 0, ℓ_1 = 1`.
    ScaledNLogN(u64),
    Custom(Vec<u64>),
}

impl LevelKind {
    pub fn label(&self) -> String {
        match self {
            LevelKind::Exponential => "exponential".into(),
            LevelKind::NLogN => "nlogn".into(),
            LevelKind::ScaledNLogN(c) => format!("scaled_nlogn({c})"),
            LevelKind::Custom(_) => "custom".into(),
        }
    }

    fn levels(&self, n_max: usize) -> Result<Vec<u64>> {
        let nlogn = |c: u64| -> Vec<u64> {
            (0..=n_max as u64)
                .map(|n| match n {
                    0 => 0,
                    1 => 1,
                    _ => c * n * ceil_log2(n),
                })
                .collect()
        };
        Ok(match self {
            LevelKind::Exponential => {
                if n_max > 62 {
                    return Err(Error::InvalidSchedule(format!(
                        "exponential schedule supports n_max <= 62, got {n_max}"
                    )));
                }
                (0..=n_max).map(|n| if n == 0 { 0 } else { 1u64 << n }).collect()
            }
            LevelKind::NLogN => nlogn(1),
            LevelKind::ScaledNLogN(0) => return Err(Error::InvalidSchedule("scale factor must be positive".into())),
            LevelKind::ScaledNLogN(c) => nlogn(*c),
            LevelKind::Custom(levels) => levels.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityKind {
    /// `q_n = 1/(n+1)²`, with `q_0` clamped to `1/2`.
    InverseSquare,
    Custom(Vec<Rational>),
}

impl DensityKind {
    fn densities(&self, len: usize) -> Vec<Rational> {
        match self {
            DensityKind::InverseSquare => (0..len)
                .map(|n| {
                    if n == 0 {
                        ratio::ratio(1, 2)
                    } else {
                        let d = (n as i64 + 1) * (n as i64 + 1);
                        ratio::ratio(1, d)
                    }
                })
                .collect(),
            DensityKind::Custom(q) => q.clone(),
        }
    }
}

/// `⌈log₂ n⌉` for `n >= 1`.
pub fn ceil_log2(n: u64) -> u64 {
    assert!(n >= 1);
    u64::from(64 - (n - 1).leading_zeros())
}

/// A validated level schedule on the finite horizon `0..=N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct LevelSchedule {
    kind: String,
    levels: Vec<u64>,
    densities: Vec<Rational>,
    naming_slack: u32,
    naming_lengths: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    kind: String,
    levels: Vec<u64>,
    densities: Vec<String>,
    naming_lengths: Vec<u64>,
    #[serde(default = "default_slack")]
    naming_slack: u32,
}

fn default_slack() -> u32 {
    DEFAULT_NAMING_SLACK
}

impl From<LevelSchedule> for ScheduleRepr {
    fn from(s: LevelSchedule) -> Self {
        ScheduleRepr {
            densities: s.densities.iter().map(ratio::to_pq).collect(),
            kind: s.kind,
            levels: s.levels,
            naming_lengths: s.naming_lengths,
            naming_slack: s.naming_slack,
        }
    }
}

impl TryFrom<ScheduleRepr> for LevelSchedule {
    type Error = Error;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        let densities = r
            .densities
            .iter()
            .map(|s| ratio::parse_pq(s))
            .collect::<Result<Vec<_>>>()?;
        let s = LevelSchedule::with_slack(r.kind, r.levels, densities, r.naming_slack)?;
        if r.naming_lengths != s.naming_lengths {
            return Err(Error::InvalidSchedule(format!(
                "naming lengths {:?} do not match the derived {:?}",
                r.naming_lengths, s.naming_lengths
            )));
        }
        Ok(s)
    }
}

impl LevelSchedule {
    pub fn new(levels: Vec<u64>, densities: Vec<Rational>) -> Result<Self> {
        Self::with_slack("custom".into(), levels, densities, DEFAULT_NAMING_SLACK)
    }

    pub fn with_slack(kind: String, levels: Vec<u64>, densities: Vec<Rational>, naming_slack: u32) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidSchedule("need at least levels ℓ_0, ℓ_1".into()));
        }
        if levels[0] != 0 {
            return Err(Error::InvalidSchedule(format!("ℓ_0 must be 0, got {}", levels[0])));
        }
        if let Some(n) = (1..levels.len()).find(|&n| levels[n] <= levels[n - 1]) {
            return Err(Error::InvalidSchedule(format!(
                "levels not strictly increasing at n = {n}: {} then {}",
                levels[n - 1],
                levels[n]
            )));
        }
        if densities.len() != levels.len() {
            return Err(Error::InvalidSchedule(format!(
                "{} densities for {} levels",
                densities.len(),
                levels.len()
            )));
        }
        let zero = Rational::zero();
        let one = Rational::one();
        if let Some((n, q)) = densities.iter().enumerate().find(|(_, q)| **q <= zero || **q >= one) {
            return Err(Error::InvalidSchedule(format!(
                "q_{n} = {} is outside (0, 1)",
                ratio::to_pq(q)
            )));
        }
        let naming_lengths = naming_lengths(&levels, naming_slack);
        Ok(LevelSchedule {
            kind,
            levels,
            densities,
            naming_slack,
            naming_lengths,
        })
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    /// The horizon `N`: levels are `ℓ_0..=ℓ_N`.
    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> u64 {
        self.levels[n]
    }

    /// `ℓ_N`.
    pub fn top_level(&self) -> u64 {
        *self.levels.last().unwrap()
    }

    /// `m_n` for `n < N`.
    pub fn gap(&self, n: usize) -> u64 {
        self.levels[n + 1] - self.levels[n]
    }

    pub fn gaps(&self) -> Vec<u64> {
        self.levels.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn densities(&self) -> &[Rational] {
        &self.densities
    }

    pub fn density(&self, n: usize) -> &Rational {
        &self.densities[n]
    }

    pub fn naming_slack(&self) -> u32 {
        self.naming_slack
    }

    /// `u_0, u_1, ..` as far as they are tabulated; may stop short of `N`
    /// when a naming block would be astronomically long.
    pub fn naming_lengths(&self) -> &[u64] {
        &self.naming_lengths
    }

    pub fn naming_length(&self, n: usize) -> Option<u64> {
        self.naming_lengths.get(n).copied()
    }

    /// Index `n` with `ℓ_n = len`.
    pub fn level_index(&self, len: u64) -> Option<usize> {
        self.levels.binary_search(&len).ok()
    }

    /// A copy with a different naming slack `c`.
    pub fn with_naming_slack(&self, slack: u32) -> Self {
        let mut s = self.clone();
        s.naming_slack = slack;
        s.naming_lengths = naming_lengths(&s.levels, slack);
        s
    }

    /// The schedule truncated to levels `0..=n`.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.horizon() {
            return Err(Error::InvalidSchedule(format!(
                "cannot truncate horizon {} to {n}",
                self.horizon()
            )));
        }
        Self::with_slack(
            self.kind.clone(),
            self.levels[..=n].to_vec(),
            self.densities[..=n].to_vec(),
            self.naming_slack,
        )
    }
}

/// Builds a schedule of the given kinds on the horizon `0..=n_max`.
pub fn make_schedule(kind: LevelKind, n_max: usize, densities: DensityKind) -> Result<LevelSchedule> {
    if n_max < 1 {
        return Err(Error::InvalidSchedule("n_max must be at least 1".into()));
    }
    let levels = kind.levels(n_max)?;
    if let LevelKind::Custom(l) = &kind {
        if l.len() != n_max + 1 {
            return Err(Error::InvalidSchedule(format!(
                "custom levels have {} entries, expected n_max + 1 = {}",
                l.len(),
                n_max + 1
            )));
        }
    }
    let q = densities.densities(levels.len());
    if q.len() != levels.len() {
        return Err(Error::InvalidSchedule(format!(
            "custom densities have {} entries, expected {}",
            q.len(),
            levels.len()
        )));
    }
    LevelSchedule::with_slack(kind.label(), levels, q, DEFAULT_NAMING_SLACK)
}

/// `C(2^m, 2^{m-1})`: the number of ways to split one node's extensions.
pub fn split_count(m: u64) -> BigUint {
    assert!((1..64).contains(&m), "gap {m} out of range");
    binomial(1u64 << m, 1u64 << (m - 1))
}

/// `E_n = C(2^{m_n}, 2^{m_n-1})^{2^{ℓ_n}}`, or `None` if its bit length
/// would exceed `NAMING_BIT_LIMIT`.
pub fn level_system_count(levels: &[u64], n: usize) -> Option<BigUint> {
    let m = levels[n + 1] - levels[n];
    let ell = levels[n];
    if m >= 24 || ell >= 32 {
        return None;
    }
    // C(2k, k) >= 4^k / (2k + 1) bounds the bit length from below
    let min_bits = ((1u64 << m) - m - 1).max(1);
    if min_bits.checked_mul(1u64 << ell)? > NAMING_BIT_LIMIT {
        return None;
    }
    let c = split_count(m);
    let est = c.bits().checked_mul(1u64 << ell)?;
    if est > NAMING_BIT_LIMIT {
        return None;
    }
    let mut e = c;
    for _ in 0..ell {
        e = &e * &e;
    }
    Some(e)
}

/// `⌈log₂ x⌉` for `x >= 1`.
pub fn ceil_log2_big(x: &BigUint) -> u64 {
    assert!(!x.is_zero());
    let bits = x.bits();
    if x.trailing_zeros() == Some(bits - 1) {
        bits - 1
    } else {
        bits
    }
}

fn naming_lengths(levels: &[u64], slack: u32) -> Vec<u64> {
    let mut out = vec![0u64];
    for n in 0..levels.len() - 1 {
        let Some(e) = level_system_count(levels, n) else { break };
        let prev = *out.last().unwrap();
        out.push(prev + ceil_log2_big(&e) + u64::from(slack));
    }
    out
}

/// One row of the convergence report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub ell_n: u64,
    pub m_n: Option<u64>,
    #[serde(serialize_with = "ser_pq")]
    pub q_n: Rational,
    /// `Σ_{k <= n, k < N} 2^{-m_k}`.
    #[serde(serialize_with = "ser_pq")]
    pub sum_inv_pow2_gap: Rational,
    /// `Σ_{k <= n} q_k`.
    #[serde(serialize_with = "ser_pq")]
    pub sum_q: Rational,
    /// `q_n²·2^{m_n} > ℓ_n + 1 + n`.
    pub level_bound: Option<bool>,
    /// `q_n²·2^{m_n} > ℓ_n + 1 + 2·log₂ n` (undefined at `n = 0`).
    pub relaxed_bound: Option<bool>,
    /// `m_n > 5·log₂ n` (undefined at `n = 0`).
    pub gap_exceeds_5log: Option<bool>,
}

fn ser_pq<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&ratio::to_pq(r))
}

/// Summary of where each condition starts to hold on the horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionSummary {
    /// Smallest `n` where the condition holds.
    pub first_true: Option<usize>,
    /// Smallest `k` such that the condition holds for every defined `n >= k`.
    pub holds_from: Option<usize>,
    /// Largest `n` where the condition fails.
    pub last_false: Option<usize>,
    pub false_count: usize,
}

impl ConditionSummary {
    fn from_column(col: &[Option<bool>]) -> Self {
        let defined = || col.iter().enumerate().filter_map(|(n, b)| b.map(|b| (n, b)));
        let first_true = defined().find(|&(_, b)| b).map(|(n, _)| n);
        let last_false = defined().filter(|&(_, b)| !b).map(|(n, _)| n).next_back();
        let last_defined = defined().map(|(n, _)| n).next_back();
        let holds_from = match (last_false, last_defined) {
            (None, Some(_)) => defined().map(|(n, _)| n).next(),
            (Some(f), Some(l)) if f < l => defined().map(|(n, _)| n).find(|&n| n > f),
            _ => None,
        };
        ConditionSummary {
            first_true,
            holds_from,
            last_false,
            false_count: defined().filter(|&(_, b)| !b).count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub level_bound: ConditionSummary,
    pub relaxed_bound: ConditionSummary,
    pub gap_exceeds_5log: ConditionSummary,
}

/// `q²·2^m > a + b·log₂ n`, decided in integers. Requires `n >= 1`.
fn exceeds_with_log(q: &Rational, m: u64, a: u64, b: u64, n: u64) -> bool {
    let x = q * q * ratio::pow2(m);
    // x is reduced, so (numer - a·denom) / denom is too; skip the gcd pass
    let excess = Rational::new_raw(x.numer() - x.denom() * BigInt::from(a), x.denom().clone());
    if excess <= Rational::zero() {
        return false;
    }
    if b == 0 || n == 1 {
        return true;
    }
    // excess = p/r > b·log₂ n  <=>  2^p > n^{b·r}
    let p = excess.numer().to_biguint().unwrap();
    let r = excess.denom().to_biguint().unwrap();
    let nbits = 64 - u64::from(n.leading_zeros());
    let br = &r * b;
    // log₂ n lies in [nbits-1, nbits)
    if p >= &br * nbits {
        return true;
    }
    if p <= &br * (nbits - 1) {
        return false;
    }
    let p: u64 = p.try_into().expect("exponent bounded by b·r·nbits");
    let br: u32 = br.try_into().expect("b·r fits in u32");
    BigUint::one() << p > BigUint::from(n).pow(br)
}

/// `m > 5·log₂ n` <=> `2^m > n^5`.
fn gap_exceeds_5log(m: u64, n: u64) -> bool {
    let nbits = 64 - u64::from(n.leading_zeros());
    if m >= 5 * nbits {
        return true;
    }
    BigUint::one() << m > BigUint::from(n).pow(5)
}

/// Partial sums, threshold conditions and their summaries on the horizon.
pub fn convergence_report(s: &LevelSchedule) -> ConvergenceReport {
    let big_n = s.horizon();
    let mut rows = Vec::with_capacity(big_n + 1);
    // Σ 2^{-m_k} kept as num / 2^exp
    let mut gap_num = BigInt::zero();
    let mut gap_exp = 0u64;
    let mut sum_q = Rational::zero();
    for n in 0..=big_n {
        let q = s.density(n).clone();
        sum_q += &q;
        let m = (n < big_n).then(|| s.gap(n));
        if let Some(m) = m {
            if m > gap_exp {
                gap_num <<= m - gap_exp;
                gap_exp = m;
            }
            gap_num += BigInt::one() << (gap_exp - m);
        }
        let ell = s.level(n);
        let level_bound = m.map(|m| {
            let x = &q * &q * ratio::pow2(m);
            x > ratio::from_int(ell + 1 + n as u64)
        });
        let relaxed_bound = match m {
            Some(m) if n >= 1 => Some(exceeds_with_log(&q, m, ell + 1, 2, n as u64)),
            _ => None,
        };
        let gap_5log = match m {
            Some(m) if n >= 1 => Some(gap_exceeds_5log(m, n as u64)),
            _ => None,
        };
        rows.push(ConvergenceRow {
            n,
            ell_n: ell,
            m_n: m,
            q_n: q,
            sum_inv_pow2_gap: ratio::dyadic(gap_num.clone(), gap_exp),
            sum_q: sum_q.clone(),
            level_bound,
            relaxed_bound,
            gap_exceeds_5log: gap_5log,
        });
    }
    let col = |f: fn(&ConvergenceRow) -> Option<bool>| rows.iter().map(f).collect::<Vec<_>>();
    ConvergenceReport {
        level_bound: ConditionSummary::from_column(&col(|r| r.level_bound)),
        relaxed_bound: ConditionSummary::from_column(&col(|r| r.relaxed_bound)),
        gap_exceeds_5log: ConditionSummary::from_column(&col(|r| r.gap_exceeds_5log)),
        rows,
    }
}

/// The `m_n > 5·log₂ n` condition tabulated for one schedule kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapConditionFinding {
    pub kind: String,
    pub horizon: usize,
    pub gap_exceeds_5log: ConditionSummary,
    pub relaxed_bound: ConditionSummary,
}

/// Compares `ℓ_n = n⌈log₂ n⌉` with `ℓ_n = 6n⌈log₂ n⌉` on `n <= horizon`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleRemarkFindings {
    pub nlogn: GapConditionFinding,
    pub scaled_6_nlogn: GapConditionFinding,
}

pub fn gap_condition_findings(horizon: usize) -> Result<ScheduleRemarkFindings> {
    let find = |kind: LevelKind| -> Result<GapConditionFinding> {
        let s = make_schedule(kind, horizon + 1, DensityKind::InverseSquare)?;
        let rep = convergence_report(&s);
        Ok(GapConditionFinding {
            kind: s.kind().to_string(),
            horizon,
            gap_exceeds_5log: rep.gap_exceeds_5log,
            relaxed_bound: rep.relaxed_bound,
        })
    };
    Ok(ScheduleRemarkFindings {
        nlogn: find(LevelKind::NLogN)?,
        scaled_6_nlogn: find(LevelKind::ScaledNLogN(6))?,
    })
}
