//! Integer factorization for the supports of norms and denominators.
//!
//! Trial division by small primes, then Miller-Rabin and Brent's variant of
//! Pollard rho on whatever cofactor remains. Inputs must fit in `u128`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

const TRIAL_LIMIT: u64 = 1 << 12;

pub(crate) fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if let Some(prod) = a.checked_mul(b) {
        return prod % m;
    }
    // double-and-add when the plain product overflows
    let (mut a, mut b, mut acc) = (a % m, b % m, 0u128);
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    acc
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

pub(crate) fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for `n < 3.3e24`, and a strong probable-prime
/// test with 24 fixed bases above that.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u128; 24] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83,
        89,
    ];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn pollard_brent(n: u128) -> u128 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u128;
    loop {
        let f = |x: u128| add_mod(mul_mod(x, x, n), c, n);
        let (mut y, m) = (2u128, 128usize);
        let (mut g, mut r, mut q) = (1u128, 1usize, 1u128);
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn factor_into(n: u128, out: &mut BTreeMap<u128, u32>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_brent(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Prime factorization of `|n|` as a map prime -> exponent. `n = 0` is rejected.
pub fn factorize(n: &BigInt) -> Result<BTreeMap<u64, u32>> {
    if n.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mag: BigUint = n.magnitude().clone();
    let mut m = mag
        .to_u128()
        .ok_or_else(|| Error::Factorization(n.to_string()))?;
    let mut out: BTreeMap<u128, u32> = BTreeMap::new();
    let mut p = 2u128;
    while p < TRIAL_LIMIT as u128 && p * p <= m {
        while m % p == 0 {
            *out.entry(p).or_insert(0) += 1;
            m /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    factor_into(m, &mut out);
    out.into_iter()
        .map(|(p, e)| {
            u64::try_from(p)
                .map(|p| (p, e))
                .map_err(|_| Error::Factorization(n.to_string()))
        })
        .collect()
}

/// The distinct prime divisors of `|n|`.
pub fn prime_support(n: &BigInt) -> Result<Vec<u64>> {
    Ok(factorize(n)?.into_keys().collect())
}

pub fn is_squarefree(n: i64) -> bool {
    if n == 0 {
        return false;
    }
    factorize(&BigInt::from(n))
        .map(|f| f.values().all(|&e| e == 1))
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product(f: &BTreeMap<u64, u32>) -> BigInt {
        f.iter()
            .fold(BigInt::from(1), |acc, (&p, &e)| acc * BigInt::from(p).pow(e))
    }

    #[test]
    fn small_factorizations() {
        let f = factorize(&BigInt::from(-360)).unwrap();
        assert_eq!(f.into_iter().collect::<Vec<_>>(), vec![(2, 3), (3, 2), (5, 1)]);
        assert!(factorize(&BigInt::from(1)).unwrap().is_empty());
        assert_eq!(factorize(&BigInt::zero()), Err(Error::ZeroElement));
    }

    #[test]
    fn large_semiprime() {
        let n = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        let f = factorize(&n).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(product(&f), n);
        let n = BigInt::from(4_294_967_311u64) * BigInt::from(4_294_967_357u64) * 12;
        assert_eq!(product(&factorize(&n).unwrap()), n);
    }

    #[test]
    fn squarefree() {
        assert!(is_squarefree(2));
        assert!(is_squarefree(-3));
        assert!(!is_squarefree(12));
        assert!(!is_squarefree(0));
    }

    #[test]
    fn primality() {
        let primes: Vec<u128> = (0..200).filter(|&n| is_prime(n)).collect();
        let sieve: Vec<u128> = (0..200u128)
            .filter(|&n| n >= 2 && (2..n).all(|d| n % d != 0))
            .collect();
        assert_eq!(primes, sieve);
        assert!(is_prime(18_446_744_073_709_551_557));
    }
}
