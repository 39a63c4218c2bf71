//! Certified integer roundings of rational powers.
//!
//! Every function here computes an integer rounding of `x^(a/b)` for a
//! non-negative integer `x` and a positive rational exponent. A floating point
//! estimate picks the candidate and an exact big-integer comparison
//! (`c^b` against `x^a`) settles it, so boundary values are never off by one.

use num_bigint::BigUint;

use crate::rational::Rational;

fn big_pow(base: u64, exp: u64) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

/// `c^b <= x^a`, i.e. `c <= x^(a/b)`.
fn le_pow(c: u64, x: u64, e: Rational) -> bool {
    big_pow(c, e.denom()) <= big_pow(x, e.numer())
}

/// `c^b >= x^a`, i.e. `c >= x^(a/b)`.
fn ge_pow(c: u64, x: u64, e: Rational) -> bool {
    big_pow(c, e.denom()) >= big_pow(x, e.numer())
}

fn estimate(x: u64, e: Rational) -> u64 {
    let v = (x as f64).powf(e.to_f64());
    if v.is_finite() && v >= 0.0 {
        v as u64
    } else {
        u64::MAX / 4
    }
}

/// `floor(x^e)`.
pub fn floor_pow(x: u64, e: Rational) -> u64 {
    if x == 0 {
        return 0;
    }
    let mut c = estimate(x, e);
    while c > 0 && !le_pow(c, x, e) {
        c -= 1;
    }
    while le_pow(c + 1, x, e) {
        c += 1;
    }
    c
}

/// `ceil(x^e)`.
pub fn ceil_pow(x: u64, e: Rational) -> u64 {
    if x == 0 {
        return 0;
    }
    let mut c = estimate(x, e).max(1);
    while !ge_pow(c, x, e) {
        c += 1;
    }
    while c > 0 && ge_pow(c - 1, x, e) {
        c -= 1;
    }
    c
}

/// `x^e` rounded to the nearest integer, halves rounded away from zero.
///
/// `round(v) >= c` iff `v >= c - 1/2` iff `(2c - 1)^b <= 2^b * x^a`.
pub fn round_pow(x: u64, e: Rational) -> u64 {
    if x == 0 {
        return 0;
    }
    let lhs_scale = big_pow(2, e.denom()) * big_pow(x, e.numer());
    let reaches = |c: u64| -> bool {
        if c == 0 {
            return true;
        }
        big_pow(2 * c - 1, e.denom()) <= lhs_scale
    };
    let mut c = estimate(x, e);
    while c > 0 && !reaches(c) {
        c -= 1;
    }
    while reaches(c + 1) {
        c += 1;
    }
    c
}

/// Exact test of `s^e >= t` for integers `s, t >= 0`.
pub fn pow_at_least(s: u64, e: Rational, t: u64) -> bool {
    if t == 0 {
        return true;
    }
    big_pow(s, e.numer()) >= big_pow(t, e.denom())
}
