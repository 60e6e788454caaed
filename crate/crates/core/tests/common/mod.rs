//! Independent brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use randjoin::ratio::Rational;
use randjoin::schedule::{make_schedule, DensityKind, LevelKind, LevelSchedule};
use randjoin::{FiniteTree, PartitionSystem};

pub fn custom(levels: &[u64]) -> LevelSchedule {
    make_schedule(
        LevelKind::Custom(levels.to_vec()),
        levels.len() - 1,
        DensityKind::InverseSquare,
    )
    .unwrap()
}

pub fn custom_q(levels: &[u64], q: &[Rational]) -> LevelSchedule {
    make_schedule(
        LevelKind::Custom(levels.to_vec()),
        levels.len() - 1,
        DensityKind::Custom(q.to_vec()),
    )
    .unwrap()
}

/// Bit masks over `width` positions with exactly `ones` bits set.
pub fn masks_with_popcount(width: u32, ones: u32) -> Vec<u64> {
    (0u64..1 << width).filter(|m| m.count_ones() == ones).collect()
}

/// Every height-`h` partition system on `s`, built by choosing, for each
/// node at every level below `h`, which half of its extensions joins the
/// class with bit 0.
pub fn enumerate_systems(s: &LevelSchedule, h: usize) -> Vec<PartitionSystem> {
    let slots: Vec<(usize, u64)> = (0..h)
        .flat_map(|n| (0..1u64 << s.level(n)).map(move |tau| (n, tau)))
        .collect();
    let options: Vec<Vec<u64>> = slots
        .iter()
        .map(|&(n, _)| {
            let m = s.gap(n) as u32;
            masks_with_popcount(1 << m, 1 << (m - 1))
        })
        .collect();
    let mut counter = vec![0usize; slots.len()];
    let mut out = Vec::new();
    loop {
        out.push(build(s, h, &slots, &options, &counter));
        let mut i = 0;
        loop {
            if i == counter.len() {
                return out;
            }
            counter[i] += 1;
            if counter[i] < options[i].len() {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
}

fn build(
    s: &LevelSchedule,
    h: usize,
    slots: &[(usize, u64)],
    options: &[Vec<u64>],
    choice: &[usize],
) -> PartitionSystem {
    // sigma_of[n][tau] is the class index of tau at level n
    let mut sigma_of: Vec<Vec<u64>> = vec![vec![0]];
    let mut classes: Vec<Vec<Vec<u64>>> = vec![vec![vec![0]]];
    for n in 0..h {
        let m = s.gap(n);
        let mut next_sigma = vec![0u64; 1 << s.level(n + 1)];
        let mut level = vec![Vec::new(); 1 << (n + 1)];
        for (i, &(ln, tau)) in slots.iter().enumerate() {
            if ln != n {
                continue;
            }
            let mask = options[i][choice[i]];
            for j in 0..1u64 << m {
                let child = (tau << m) | j;
                let bit = u64::from(mask >> j & 1 == 0);
                let sigma = (sigma_of[n][tau as usize] << 1) | bit;
                next_sigma[child as usize] = sigma;
                level[sigma as usize].push(child);
            }
        }
        sigma_of.push(next_sigma);
        classes.push(level);
    }
    PartitionSystem::from_classes(s.clone(), h, classes).unwrap()
}

/// Counts, over every half of `2^m` positions, those avoiding all `marked`.
pub fn brute_zero_prob(m: u32, marked: u64) -> Rational {
    let halves = masks_with_popcount(1 << m, 1 << (m - 1));
    let avoid = halves.iter().filter(|&&h| h & marked == 0).count();
    Rational::new(BigInt::from(avoid), BigInt::from(halves.len()))
}

/// Leaves of `t` below the length-`len` string with value `v`, by scanning.
pub fn leaves_below_scan(t: &FiniteTree, v: u64, len: usize) -> u64 {
    let shift = t.top_level() - len;
    t.leaf_indices().filter(|&x| x >> shift == v).count() as u64
}

/// Every nonempty tree of top level `top`, one per nonempty leaf subset.
pub fn all_trees(top: usize) -> Vec<FiniteTree> {
    let width = 1u64 << top;
    (1u64..1 << width)
        .map(|mask| FiniteTree::from_leaf_indices(top, (0..width).filter(|&i| mask >> i & 1 == 1)).unwrap())
        .collect()
}
