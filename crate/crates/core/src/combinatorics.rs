//! Binomials and the combinatorial number system.
//!
//! A `k`-subset `c_1 < c_2 < ... < c_k` of `{0, .., n-1}` has colex rank
//! `sum_i C(c_i, i)`; ranks run over `0..C(n, k)`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Colex rank of a strictly increasing subset.
pub fn rank_subset(subset: &[u64]) -> BigUint {
    debug_assert!(subset.windows(2).all(|w| w[0] < w[1]));
    subset.iter().enumerate().map(|(i, &c)| binomial(c, i as u64 + 1)).sum()
}

/// The `k`-subset of `{0, .., n-1}` with colex rank `rank`, ascending.
///
/// Panics if `rank >= C(n, k)`.
pub fn unrank_subset(n: u64, k: u64, rank: &BigUint) -> Vec<u64> {
    assert!(rank < &binomial(n, k), "rank out of range for C({n}, {k})");
    let mut out = vec![0u64; k as usize];
    let mut rank = rank.clone();
    let mut hi = n;
    for i in (1..=k).rev() {
        // largest c < hi with C(c, i) <= rank
        let mut c = hi - 1;
        let mut value = binomial(c, i);
        while value > rank {
            // C(c-1, i) = C(c, i) * (c - i) / c
            value = value * (c - i) / c;
            c -= 1;
        }
        rank -= &value;
        out[(i - 1) as usize] = c;
        hi = c;
    }
    out
}

/// Uniform integer in `0..bound` by rejection on the bit length of `bound`.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "uniform_below needs a positive bound");
    let bits = bound.bits();
    if bits <= 64 {
        let b = bound.iter_u64_digits().next().unwrap_or(0);
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        loop {
            let v = rng.next_u64() & mask;
            if v < b {
                return BigUint::from(v);
            }
        }
    }
    let words = bits.div_ceil(32) as usize;
    let top_bits = bits - 32 * (words as u64 - 1);
    let top_mask = if top_bits == 32 {
        u32::MAX
    } else {
        (1u32 << top_bits) - 1
    };
    let mut digits = vec![0u32; words];
    loop {
        for d in digits.iter_mut() {
            *d = rng.next_u32();
        }
        digits[words - 1] &= top_mask;
        let v = BigUint::new(digits.clone());
        if &v < bound {
            return v;
        }
    }
}
