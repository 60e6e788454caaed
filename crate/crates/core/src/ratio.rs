//! Exact rational helpers: `p/q` text form, dyadic construction, directed
//! rounding and a certified enclosure of `e^{-x}`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Precision, in bits, of the directed roundings used for `e^{-x}`.
pub const EXP_PRECISION_BITS: u32 = 128;

/// Number of series terms used when bounding `e` and `e^{-f}`.
const SERIES_TERMS: u32 = 48;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// `2^{-exp}`.
pub fn pow2_neg(exp: u64) -> Rational {
    Rational::new_raw(BigInt::one(), BigInt::one() << exp)
}

/// `2^{exp}`.
pub fn pow2(exp: u64) -> Rational {
    from_int(BigInt::one() << exp)
}

/// `num / 2^{exp}` in lowest terms without a gcd pass.
pub fn dyadic(num: BigInt, exp: u64) -> Rational {
    if num.is_zero() {
        return Rational::zero();
    }
    let tz = num.trailing_zeros().unwrap_or(0).min(exp);
    Rational::new_raw(num >> tz, BigInt::one() << (exp - tz))
}

/// Renders `p/q` with `q >= 1`, always including the denominator.
pub fn to_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_pq(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("{s:?} is not a rational of the form p/q"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn floor_to_biguint(r: &Rational) -> Option<BigUint> {
    if r.is_negative() {
        return None;
    }
    r.floor().to_integer().to_biguint()
}

/// Largest multiple of `2^{-prec}` that is `<= r`.
pub fn round_down(r: &Rational, prec: u32) -> Rational {
    let scaled = r.numer() << prec;
    let (q, _) = scaled.div_mod_floor(r.denom());
    dyadic(q, u64::from(prec))
}

/// Smallest multiple of `2^{-prec}` that is `>= r`.
pub fn round_up(r: &Rational, prec: u32) -> Rational {
    let scaled = r.numer() << prec;
    let q = Integer::div_ceil(&scaled, r.denom());
    dyadic(q, u64::from(prec))
}

/// Dyadic enclosure `[lo, hi]` of Euler's number.
pub fn e_bounds(prec: u32) -> (Rational, Rational) {
    let mut sum = Rational::zero();
    let mut term = Rational::one();
    for j in 0..=SERIES_TERMS {
        if j > 0 {
            term /= from_int(j);
        }
        sum += &term;
    }
    // tail after the last term is below term / SERIES_TERMS
    let tail = &term / from_int(SERIES_TERMS);
    let hi = &sum + tail;
    (round_down(&sum, prec), round_up(&hi, prec))
}

/// Dyadic enclosure of `e^{-f}` for `0 <= f < 1` via the alternating series.
fn exp_neg_fraction_bounds(f: &Rational, prec: u32) -> (Rational, Rational) {
    debug_assert!(!f.is_negative() && f < &Rational::one());
    if f.is_zero() {
        return (Rational::one(), Rational::one());
    }
    let mut partial = Rational::one();
    let mut term = Rational::one();
    let mut lo = None;
    let mut hi = None;
    // Partial sums ending on an even index overshoot, odd ones undershoot.
    for j in 1..=(SERIES_TERMS + 1) {
        term = -term * f / from_int(j);
        partial += &term;
        if j == SERIES_TERMS {
            hi = Some(partial.clone());
        }
        if j == SERIES_TERMS + 1 {
            lo = Some(partial.clone());
        }
    }
    let (lo, hi) = if SERIES_TERMS.is_multiple_of(2) {
        (lo.unwrap(), hi.unwrap())
    } else {
        (hi.unwrap(), lo.unwrap())
    };
    (round_down(&lo, prec), round_up(&hi, prec))
}

/// Certified enclosure `[lo, hi]` of `e^{-x}` for rational `x >= 0`.
///
/// Splits `x = k + f` with integer `k`, bounds `e` and `e^{-f}` with
/// outward-rounded dyadics at `prec` bits, then rounds the quotient outward
/// at `prec + 2k` bits.
pub fn exp_neg_bounds(x: &Rational, prec: u32) -> (Rational, Rational) {
    assert!(!x.is_negative(), "exp_neg_bounds needs x >= 0");
    let k = x.floor();
    let f = x - &k;
    let k = k.to_integer().to_u32().expect("exponent too large for exp_neg_bounds");
    let (e_lo, e_hi) = e_bounds(prec);
    let (f_lo, f_hi) = exp_neg_fraction_bounds(&f, prec);
    // e^{-k} >= 2^{-2k}, so 2k extra bits keep `prec` significant bits
    let out_prec = prec + 2 * k;
    let quotient = |num: &Rational, den: &Rational| {
        Rational::new_raw(num.numer() * den.denom().pow(k), num.denom() * den.numer().pow(k))
    };
    let lo = round_down(&quotient(&f_lo, &e_hi), out_prec);
    let hi = round_up(&quotient(&f_hi, &e_lo), out_prec);
    (lo, hi)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
