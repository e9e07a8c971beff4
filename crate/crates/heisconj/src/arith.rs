//! Checked integer primitives shared by every module.
//!
//! The whole crate computes in `i64` with explicit overflow checks; any
//! overflow fails loudly as [`Error::Overflow`].

use crate::error::{Error, Result};

#[inline]
pub fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow("add"))
}

#[inline]
pub fn sub(a: i64, b: i64) -> Result<i64> {
    a.checked_sub(b).ok_or(Error::Overflow("sub"))
}

#[inline]
pub fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow("mul"))
}

#[inline]
pub fn neg(a: i64) -> Result<i64> {
    a.checked_neg().ok_or(Error::Overflow("neg"))
}

#[inline]
pub fn abs(a: i64) -> Result<i64> {
    a.checked_abs().ok_or(Error::Overflow("abs"))
}

/// Least non-negative residue; `m = 0` means "no reduction" (the value is
/// returned as-is), matching the mod-0-is-equality convention.
#[inline]
pub fn modulo(a: i64, m: i64) -> Result<i64> {
    debug_assert!(m >= 0);
    if m == 0 {
        Ok(a)
    } else {
        a.checked_rem_euclid(m).ok_or(Error::Overflow("rem_euclid"))
    }
}

/// Floor division (rounds towards negative infinity).
#[inline]
pub fn div_floor(a: i64, b: i64) -> Result<i64> {
    if b == 0 {
        return Err(Error::InvariantViolation("division by zero".into()));
    }
    let q = a.checked_div(b).ok_or(Error::Overflow("div_floor"))?;
    if a % b != 0 && (a < 0) != (b < 0) {
        sub(q, 1)
    } else {
        Ok(q)
    }
}

/// Non-negative gcd, with `gcd(0, 0) = 0`.
pub fn gcd(a: i64, b: i64) -> Result<i64> {
    let mut a = abs(a)?;
    let mut b = abs(b)?;
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    Ok(a)
}

pub fn gcd3(a: i64, b: i64, c: i64) -> Result<i64> {
    gcd(gcd(a, b)?, c)
}

/// `n(n-1)/2`, exact for every integer (the product of consecutive
/// integers is even).
pub fn tri(n: i64) -> Result<i64> {
    let p = mul(n, sub(n, 1)?)?;
    Ok(p / 2)
}

/// True iff `m | a`, with `0 | a` meaning `a = 0`.
#[inline]
pub fn divides(m: i64, a: i64) -> bool {
    if m == 0 {
        a == 0
    } else {
        a % m == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_conventions() {
        assert_eq!(gcd(0, 0).unwrap(), 0);
        assert_eq!(gcd(-12, 18).unwrap(), 6);
        assert_eq!(gcd(7, 0).unwrap(), 7);
        assert_eq!(gcd(0, -5).unwrap(), 5);
    }

    #[test]
    fn tri_is_exact_on_negatives() {
        assert_eq!(tri(0).unwrap(), 0);
        assert_eq!(tri(1).unwrap(), 0);
        assert_eq!(tri(3).unwrap(), 3);
        assert_eq!(tri(-1).unwrap(), 1);
        assert_eq!(tri(-3).unwrap(), 6);
    }

    #[test]
    fn div_floor_rounds_down() {
        assert_eq!(div_floor(7, 2).unwrap(), 3);
        assert_eq!(div_floor(-7, 2).unwrap(), -4);
        assert_eq!(div_floor(7, -2).unwrap(), -4);
        assert_eq!(div_floor(-7, -2).unwrap(), 3);
    }

    #[test]
    fn overflow_is_loud() {
        assert_eq!(mul(i64::MAX, 2), Err(Error::Overflow("mul")));
        assert_eq!(abs(i64::MIN), Err(Error::Overflow("abs")));
    }

    #[test]
    fn modulo_zero_is_identity() {
        assert_eq!(modulo(-17, 0).unwrap(), -17);
        assert_eq!(modulo(-1, 4).unwrap(), 3);
    }
}
