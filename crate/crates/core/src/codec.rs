//! Coding a payload `z` into a path `y` of a tree.
//!
//! [`encode`]/[`decode`] code through a partition system: at step `k` the
//! next segment of `y` is taken from `D_{σ_k z(k)}` and the decoder recovers
//! `z(k)` as the class holding that segment, without looking at the tree.
//! [`kg_encode`]/[`kg_decode`] are the classic leftmost/rightmost coding,
//! which needs the tree on both sides.

use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::partition::PartitionSystem;
use crate::schedule::LevelSchedule;
use crate::tree::{FiniteTree, TwoExtension};

/// Oracle use after some number of coding steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleUse {
    /// Bits of the system name needed, `u_n` of the output level; `None`
    /// when `u_n` is not tabulated.
    pub name_bits: Option<u64>,
    /// Bits of `y` produced or read, `ℓ_n` of the output level.
    pub payload_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub k: usize,
    pub sigma: Bits,
    pub tau: Bits,
    pub class_bit: u8,
    pub candidate_count: u64,
    pub name_bits: Option<u64>,
    pub payload_bits: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CodecTrace {
    pub steps: Vec<TraceStep>,
    pub oracle_use: OracleUse,
}

fn oracle_use(s: &LevelSchedule, n: usize) -> OracleUse {
    OracleUse {
        name_bits: s.naming_length(n),
        payload_bits: s.level(n),
    }
}

fn expected_levels(s: &LevelSchedule, from: usize, to: usize) -> Vec<usize> {
    (from..=to).map(|n| s.level(n) as usize).collect()
}

/// Encodes `z` starting from `σ_0`, `τ_0`, choosing the leftmost
/// candidate in `[τ_k] ∩ t ∩ D_{σ_k z(k)}` at every step.
///
/// Returns [`Error::CodingFailure`] when that set is empty.
pub fn encode(
    z: &Bits,
    ps: &PartitionSystem,
    t: &FiniteTree,
    sigma0: &Bits,
    tau0: &Bits,
) -> Result<(Bits, CodecTrace)> {
    let s = ps.schedule();
    let n0 = sigma0.len();
    let end = n0 + z.len();
    if end > ps.height() {
        return Err(Error::InvalidArgument(format!(
            "|σ_0| + |z| = {end} exceeds system height {}",
            ps.height()
        )));
    }
    if tau0.len() != ps.level_len(n0) {
        return Err(Error::NotALevel {
            len: tau0.len(),
            expected: vec![ps.level_len(n0)],
        });
    }
    if ps.level_len(end) > t.top_level() {
        return Err(Error::InvalidArgument(format!(
            "output level ℓ_{end} = {} exceeds tree top level {}",
            ps.level_len(end),
            t.top_level()
        )));
    }
    if !t.is_node(tau0) {
        return Err(Error::InvalidArgument(format!("τ_0 = {tau0} is not a tree node")));
    }
    if !ps.contains(n0, sigma0.to_u64(), tau0.to_u64()) {
        return Err(Error::InvalidArgument(format!("τ_0 = {tau0} is not in D_{sigma0}")));
    }

    let mut sigma = sigma0.to_u64();
    let mut tau = tau0.to_u64();
    let mut steps = Vec::with_capacity(z.len());
    for (k, bit) in z.iter().enumerate() {
        let n = n0 + k;
        let (len, next) = (ps.level_len(n), ps.level_len(n + 1));
        let target = (sigma << 1) | u64::from(bit);
        let candidates: Vec<u64> = t
            .extensions(tau, len, next)
            .into_iter()
            .filter(|&c| ps.contains(n + 1, target, c))
            .collect();
        let Some(&chosen) = candidates.first() else {
            return Err(Error::CodingFailure {
                step: k,
                class_bit: u8::from(bit),
            });
        };
        sigma = target;
        tau = chosen;
        let used = oracle_use(s, n + 1);
        steps.push(TraceStep {
            k: k + 1,
            sigma: Bits::from_u64(sigma, n + 1),
            tau: Bits::from_u64(tau, next),
            class_bit: u8::from(bit),
            candidate_count: candidates.len() as u64,
            name_bits: used.name_bits,
            payload_bits: used.payload_bits,
        });
    }
    let y = Bits::from_u64(tau, ps.level_len(end));
    Ok((
        y,
        CodecTrace {
            steps,
            oracle_use: oracle_use(s, end),
        },
    ))
}

/// Recovers `z` from `y` using only the partition system: `z(k)` is the
/// unique `i` with `y↾ℓ_{n+1} ∈ D_{σ_k i}`.
pub fn decode(ps: &PartitionSystem, y: &Bits, sigma0: &Bits, tau0: &Bits) -> Result<Bits> {
    let s = ps.schedule();
    let n0 = sigma0.len();
    if n0 > ps.height() {
        return Err(Error::InvalidArgument(format!(
            "|σ_0| = {n0} exceeds system height {}",
            ps.height()
        )));
    }
    if tau0.len() != ps.level_len(n0) {
        return Err(Error::NotALevel {
            len: tau0.len(),
            expected: vec![ps.level_len(n0)],
        });
    }
    let end = s
        .level_index(y.len() as u64)
        .filter(|&n| n >= n0 && n <= ps.height())
        .ok_or_else(|| Error::NotALevel {
            len: y.len(),
            expected: expected_levels(s, n0, ps.height()),
        })?;
    if !tau0.is_prefix_of(y) {
        return Err(Error::InvalidArgument(format!("τ_0 = {tau0} is not a prefix of y")));
    }
    if !ps.contains(n0, sigma0.to_u64(), tau0.to_u64()) {
        return Err(Error::InvalidArgument(format!("τ_0 = {tau0} is not in D_{sigma0}")));
    }
    let mut sigma = sigma0.to_u64();
    let mut z = Bits::empty();
    for n in n0..end {
        let seg = y.prefix(ps.level_len(n + 1)).to_u64();
        let in0 = ps.contains(n + 1, sigma << 1, seg);
        let in1 = ps.contains(n + 1, (sigma << 1) | 1, seg);
        let bit = match (in0, in1) {
            (true, false) => false,
            (false, true) => true,
            (true, true) => {
                return Err(Error::InvalidSystem(format!(
                    "{} lies in both child classes of σ at level {}",
                    y.prefix(ps.level_len(n + 1)),
                    n + 1
                )))
            }
            (false, false) => {
                return Err(Error::InvalidArgument(format!(
                    "{} lies in neither child class of the current σ",
                    y.prefix(ps.level_len(n + 1))
                )))
            }
        };
        z.push(bit);
        sigma = (sigma << 1) | u64::from(bit);
    }
    Ok(z)
}

/// Leftmost (`z(n) = 0`) or rightmost (`z(n) = 1`) extension coding.
pub fn kg_encode(z: &Bits, t: &FiniteTree, s: &LevelSchedule) -> Result<(Bits, CodecTrace)> {
    let r = z.len();
    if r > s.horizon() || s.level(r) as usize > t.top_level() {
        return Err(Error::InvalidArgument(format!(
            "{r} payload bits need level ℓ_{r} within the tree and schedule"
        )));
    }
    if t.is_empty() {
        return Err(Error::InvalidTree("cannot code into the empty tree".into()));
    }
    if let TwoExtension::Fails { witness, .. } = t.check_two_extension_upto(s, r) {
        return Err(Error::TwoExtension { witness });
    }
    let mut y = 0u64;
    let mut steps = Vec::with_capacity(r);
    for (n, bit) in z.iter().enumerate() {
        let (len, next) = (s.level(n) as usize, s.level(n + 1) as usize);
        let ext = t.extensions(y, len, next);
        y = if bit { *ext.last().unwrap() } else { ext[0] };
        steps.push(TraceStep {
            k: n + 1,
            sigma: z.prefix(n + 1),
            tau: Bits::from_u64(y, next),
            class_bit: u8::from(bit),
            candidate_count: ext.len() as u64,
            name_bits: Some(0),
            payload_bits: next as u64,
        });
    }
    let trace = CodecTrace {
        steps,
        oracle_use: OracleUse {
            name_bits: Some(0),
            payload_bits: s.level(r),
        },
    };
    Ok((Bits::from_u64(y, s.level(r) as usize), trace))
}

/// Inverse of [`kg_encode`]; fails with [`Error::NotBoundary`] when some
/// segment of `y` is neither the leftmost nor the rightmost extension.
pub fn kg_decode(y: &Bits, t: &FiniteTree, s: &LevelSchedule) -> Result<Bits> {
    let r = s
        .level_index(y.len() as u64)
        .filter(|_| y.len() <= t.top_level())
        .ok_or_else(|| Error::NotALevel {
            len: y.len(),
            expected: s
                .levels()
                .iter()
                .map(|&l| l as usize)
                .take_while(|&l| l <= t.top_level())
                .collect(),
        })?;
    if !t.is_node(y) {
        return Err(Error::InvalidArgument(format!("{y} is not a tree node")));
    }
    let mut z = Bits::empty();
    for n in 0..r {
        let (len, next) = (s.level(n) as usize, s.level(n + 1) as usize);
        let here = y.prefix(len).to_u64();
        let seg = y.prefix(next).to_u64();
        let ext = t.extensions(here, len, next);
        if ext.len() < 2 {
            return Err(Error::TwoExtension { witness: y.prefix(len) });
        }
        if seg == ext[0] {
            z.push(false);
        } else if seg == *ext.last().unwrap() {
            z.push(true);
        } else {
            return Err(Error::NotBoundary { step: n });
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::ratio;

    fn s012() -> LevelSchedule {
        LevelSchedule::new(vec![0, 1, 2], vec![ratio(1, 3), ratio(1, 2), ratio(1, 2)]).unwrap()
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
    fn encode_decode_hand_trace() {
        let ps = identity_system();
        let t = FiniteTree::full(2).unwrap();
        let (y, trace) = encode(&b("10"), &ps, &t, &Bits::empty(), &Bits::empty()).unwrap();
        assert_eq!(y, b("10"));
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(
            (trace.steps[0].sigma.clone(), trace.steps[0].tau.clone()),
            (b("1"), b("1"))
        );
        assert_eq!(trace.steps[1].candidate_count, 1);
        assert_eq!(
            trace.oracle_use,
            OracleUse {
                name_bits: Some(7),
                payload_bits: 2
            }
        );
        assert_eq!(decode(&ps, &y, &Bits::empty(), &Bits::empty()).unwrap(), b("10"));
    }

    #[test]
    fn empty_payload() {
        let ps = identity_system();
        let t = FiniteTree::full(2).unwrap();
        let (y, trace) = encode(&Bits::empty(), &ps, &t, &Bits::empty(), &Bits::empty()).unwrap();
        assert_eq!(y, Bits::empty());
        assert!(trace.steps.is_empty());
        assert_eq!(
            decode(&ps, &Bits::empty(), &Bits::empty(), &Bits::empty()).unwrap(),
            Bits::empty()
        );
    }

    #[test]
    fn coding_failure_is_reported() {
        let ps = identity_system();
        let t = FiniteTree::from_leaf_strs(2, &["00", "01"]).unwrap();
        assert_eq!(
            encode(&b("1"), &ps, &t, &Bits::empty(), &Bits::empty()),
            Err(Error::CodingFailure { step: 0, class_bit: 1 })
        );
    }

    #[test]
    fn decode_rejects_bad_length() {
        let ps = identity_system();
        assert!(matches!(
            decode(&ps, &b("101"), &Bits::empty(), &Bits::empty()),
            Err(Error::NotALevel { len: 3, .. })
        ));
    }

    #[test]
    fn kg_examples() {
        let s = s012();
        let t = FiniteTree::full(2).unwrap();
        assert_eq!(kg_encode(&b("01"), &t, &s).unwrap().0, b("01"));
        assert_eq!(kg_encode(&Bits::empty(), &t, &s).unwrap().0, Bits::empty());
        assert_eq!(kg_decode(&b("01"), &t, &s).unwrap(), b("01"));
        assert_eq!(kg_decode(&b("00"), &t, &s).unwrap(), b("00"));
        assert_eq!(kg_decode(&b("10"), &t, &s).unwrap(), b("10"));
    }

    #[test]
    fn kg_needs_two_extensions() {
        let s = s012();
        let t = FiniteTree::from_leaf_strs(2, &["00", "01", "10"]).unwrap();
        assert_eq!(
            kg_encode(&b("10"), &t, &s),
            Err(Error::TwoExtension { witness: b("1") })
        );
        // one level deep is still fine
        assert_eq!(kg_encode(&b("1"), &t, &s).unwrap().0, b("1"));
    }

    #[test]
    fn kg_decode_rejects_interior() {
        let s = LevelSchedule::new(vec![0, 2], vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let t = FiniteTree::full(2).unwrap();
        assert_eq!(kg_decode(&b("01"), &t, &s), Err(Error::NotBoundary { step: 0 }));
        assert_eq!(kg_decode(&b("11"), &t, &s).unwrap(), b("1"));
    }
}
