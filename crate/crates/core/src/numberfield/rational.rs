//! Exact rationals and p-adic valuations on them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type BigRat = BigRational;

pub fn rat(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

/// `v_p(n)` for nonzero `n`.
pub fn val_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `v_p(x)` for nonzero rational `x`.
pub fn val_rat(x: &BigRat, p: u64) -> i64 {
    val_int(x.numer(), p) - val_int(x.denom(), p)
}

/// Strips every factor `p` from `n` and returns the cofactor.
pub fn strip(n: &BigInt, p: u64) -> BigInt {
    let p = BigInt::from(p);
    let mut n = n.clone();
    while !n.is_zero() && (&n % &p).is_zero() {
        n /= &p;
    }
    n
}

pub fn pow_big(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// Least nonnegative residue.
pub fn modp(n: &BigInt, m: &BigInt) -> BigInt {
    n.mod_floor(m)
}

/// Inverse modulo `m`, if it exists.
pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Reduces a rational with denominator prime to `m` into `Z/m`.
pub fn rat_mod(x: &BigRat, m: &BigInt) -> Option<BigInt> {
    let inv = inv_mod(x.denom(), m)?;
    Some((x.numer() * inv).mod_floor(m))
}

pub fn to_f64(x: &BigRat) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations() {
        assert_eq!(val_rat(&rat(-24, 5), 2), 3);
        assert_eq!(val_rat(&rat(3, 40), 2), -3);
        assert_eq!(val_rat(&rat(7, 9), 3), -2);
        assert_eq!(strip(&BigInt::from(-48), 2), BigInt::from(-3));
    }

    #[test]
    fn modular() {
        let m = BigInt::from(7);
        assert_eq!(inv_mod(&BigInt::from(3), &m), Some(BigInt::from(5)));
        assert_eq!(rat_mod(&rat(1, 2), &m), Some(BigInt::from(4)));
        assert_eq!(inv_mod(&BigInt::from(14), &m), None);
        assert_eq!(modp(&BigInt::from(-1), &m), BigInt::from(6));
    }
}
