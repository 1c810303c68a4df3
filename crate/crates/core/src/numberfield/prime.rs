//! Primes and places of the real quadratic field `F = Q(√D)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::factor::{mul_mod, pow_mod};
use super::rational::pow_big;
use crate::error::{Error, Result};

/// Decomposition type of a rational prime in `F`. Split primes carry a branch
/// label 1 or 2; branch 1 is the embedding with the smaller root of `D` mod p
/// (mod 4 when p = 2).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PrimeKind {
    Split { branch: u8 },
    Inert,
    Ramified,
}

/// A prime ideal of `O_F` together with its splitting data over `Q`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FPrime {
    pub p: u64,
    pub kind: PrimeKind,
    /// ramification index over Q
    pub e: u8,
    /// residue degree over Q
    pub f: u8,
    /// root of D mod p defining the branch (mod 4 for p = 2); 0 when not split
    pub hensel_root: u64,
}

impl FPrime {
    pub fn is_split(&self) -> bool {
        matches!(self.kind, PrimeKind::Split { .. })
    }

    pub fn branch(&self) -> u8 {
        match self.kind {
            PrimeKind::Split { branch } => branch,
            _ => 0,
        }
    }

    /// Order of the residue field, `p^f`.
    pub fn residue_order(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    /// The p-adic square root of `d` defining this branch, modulo `p^k`.
    pub fn root_lift(&self, d: i64, k: u32) -> BigInt {
        debug_assert!(self.is_split());
        let k = k.max(3);
        if self.p == 2 {
            let s = dyadic_sqrt(&BigInt::from(d), k);
            let m = pow_big(2, k);
            if self.hensel_root == 1 {
                s
            } else {
                (m - s).mod_floor(&pow_big(2, k))
            }
        } else {
            let s = hensel_sqrt(&BigInt::from(d), self.p, k).expect("split prime has a root");
            if s.mod_floor(&BigInt::from(self.p)) == BigInt::from(self.hensel_root) {
                s
            } else {
                let m = pow_big(self.p, k);
                (&m - s).mod_floor(&m)
            }
        }
    }
}

impl fmt::Display for FPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PrimeKind::Split { branch } => write!(f, "q{}.{}", self.p, branch),
            _ => write!(f, "q{}", self.p),
        }
    }
}

/// A place of `F`: one of the two real embeddings, or a finite prime.
/// `Arch(1)` is the special place sending √D to the positive root.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FPlace {
    Arch(u8),
    Finite(FPrime),
}

impl FPlace {
    pub const SPECIAL: FPlace = FPlace::Arch(1);

    pub fn is_arch(&self) -> bool {
        matches!(self, FPlace::Arch(_))
    }
}

impl fmt::Display for FPlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FPlace::Arch(i) => write!(f, "inf{i}"),
            FPlace::Finite(q) => write!(f, "{q}"),
        }
    }
}

/// Euler's criterion for odd `p`; returns 0 when `p | n`.
pub fn legendre(n: &BigInt, p: u64) -> i8 {
    let r = n.mod_floor(&BigInt::from(p)).to_u64().unwrap();
    if r == 0 {
        return 0;
    }
    if pow_mod(r as u128, ((p - 1) / 2) as u128, p as u128) == 1 {
        1
    } else {
        -1
    }
}

/// Kronecker symbol `(disc | p)` for a quadratic discriminant.
pub fn kronecker(disc: i64, p: u64) -> i8 {
    if p == 2 {
        match disc.rem_euclid(8) {
            1 => 1,
            5 => -1,
            _ => 0,
        }
    } else {
        legendre(&BigInt::from(disc), p)
    }
}

/// Square root of a quadratic residue modulo an odd prime (Tonelli-Shanks).
fn sqrt_mod_prime(n: u64, p: u64) -> Option<u64> {
    let (n, p) = (n as u128 % p as u128, p as u128);
    if n == 0 {
        return Some(0);
    }
    if pow_mod(n, (p - 1) / 2, p) != 1 {
        return None;
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2u128;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let (mut m, mut c, mut t, mut r) = (s, pow_mod(z, q, p), pow_mod(n, q, p), pow_mod(n, q.div_ceil(2), p));
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r as u64)
}

/// `s` with `s^2 ≡ n (mod p^k)` and `s` congruent to the smaller square root
/// of `n` modulo `p`. Newton iteration doubling the precision each step.
pub fn hensel_sqrt(n: &BigInt, p: u64, k: u32) -> Result<BigInt> {
    if p == 2 {
        return Err(Error::EvenResidueChar);
    }
    let pb = BigInt::from(p);
    let not_res = || Error::NotAResidue { n: n.to_string(), p };
    let r = n.mod_floor(&pb).to_u64().unwrap();
    if r == 0 {
        return Err(not_res());
    }
    let root = sqrt_mod_prime(r, p).ok_or_else(not_res)?;
    let root = root.min(p - root);
    let mut s = BigInt::from(root);
    let mut prec = 1u32;
    while prec < k {
        prec = (2 * prec).min(k);
        let m = pow_big(p, prec);
        let two_s_inv = super::rational::inv_mod(&(BigInt::from(2) * &s), &m).unwrap();
        s = (&s - (&s * &s - n) * two_s_inv).mod_floor(&m);
    }
    Ok(s.mod_floor(&pow_big(p, k)))
}

/// 2-adic square root of `n ≡ 1 (mod 8)` modulo `2^k`, normalized to `≡ 1 (mod 4)`.
pub fn dyadic_sqrt(n: &BigInt, k: u32) -> BigInt {
    debug_assert_eq!(n.mod_floor(&BigInt::from(8)), BigInt::from(1));
    let mut s = BigInt::from(1);
    for j in 3..k {
        let m = pow_big(2, j + 1);
        if !((&s * &s - n).mod_floor(&m)).is_zero() {
            s += pow_big(2, j - 1);
        }
    }
    s.mod_floor(&pow_big(2, k))
}

/// Discriminant of `Q(√d)` for squarefree `d`.
pub fn field_disc(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}

/// Primes of `F = Q(√d)` above the rational prime `p`.
pub fn splitting_in_f(d: i64, p: u64) -> Vec<FPrime> {
    match kronecker(field_disc(d), p) {
        1 => {
            let (r1, r2) = if p == 2 {
                (1, 3)
            } else {
                let r = sqrt_mod_prime(d.rem_euclid(p as i64) as u64, p).unwrap();
                (r.min(p - r), r.max(p - r))
            };
            [(1, r1), (2, r2)]
                .into_iter()
                .map(|(branch, root)| FPrime {
                    p,
                    kind: PrimeKind::Split { branch },
                    e: 1,
                    f: 1,
                    hensel_root: root,
                })
                .collect()
        }
        -1 => vec![FPrime { p, kind: PrimeKind::Inert, e: 1, f: 2, hensel_root: 0 }],
        _ => vec![FPrime { p, kind: PrimeKind::Ramified, e: 2, f: 1, hensel_root: 0 }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitting_examples() {
        let q7 = splitting_in_f(2, 7);
        assert_eq!(q7.len(), 2);
        assert_eq!((q7[0].hensel_root, q7[1].hensel_root), (3, 4));
        // 3^2 = 9 = 2 mod 7, found by exhaustive search
        assert!((0..7u64).filter(|x| x * x % 7 == 2).eq([3u64, 4]));
        let q2 = splitting_in_f(2, 2);
        assert_eq!((q2[0].kind, q2[0].e, q2[0].f), (PrimeKind::Ramified, 2, 1));
        let q3 = splitting_in_f(2, 3);
        assert_eq!((q3[0].kind, q3[0].f), (PrimeKind::Inert, 2));
        assert!((0..3u64).all(|x| x * x % 3 != 2));
        // 17 = 1 mod 8 splits in Q(√17)
        assert_eq!(splitting_in_f(17, 2).len(), 2);
        assert_eq!(splitting_in_f(5, 2)[0].kind, PrimeKind::Inert);
    }

    #[test]
    fn efg_identity() {
        for d in [2i64, 3, 5, 6, 7, 13, 17, 21] {
            for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23] {
                let ps = splitting_in_f(d, p);
                let sum: u32 = ps.iter().map(|q| (q.e * q.f) as u32).sum();
                assert_eq!(sum, 2, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn hensel_examples() {
        assert_eq!(hensel_sqrt(&BigInt::from(2), 7, 2).unwrap(), BigInt::from(10));
        // exhaustive search mod 49 for the root congruent to 3
        let brute: Vec<u64> = (0..49).filter(|x| x * x % 49 == 2).collect();
        assert!(brute.contains(&10) && 10 % 7 == 3);
        assert_eq!(hensel_sqrt(&BigInt::from(4), 5, 3).unwrap(), BigInt::from(2));
        assert!(matches!(
            hensel_sqrt(&BigInt::from(3), 5, 1),
            Err(Error::NotAResidue { .. })
        ));
    }

    #[test]
    fn dyadic_root() {
        for n in [17i64, 41, -7, 1, 33] {
            let s = dyadic_sqrt(&BigInt::from(n), 40);
            let m = pow_big(2, 40);
            assert_eq!((&s * &s - BigInt::from(n)).mod_floor(&m), BigInt::zero(), "n={n}");
            assert_eq!(s.mod_floor(&BigInt::from(4)), BigInt::from(1));
        }
    }

    #[test]
    fn branch_roots_lift_consistently() {
        for q in splitting_in_f(2, 7) {
            let s = q.root_lift(2, 6);
            assert_eq!(s.mod_floor(&BigInt::from(7)), BigInt::from(q.hensel_root));
        }
        for q in splitting_in_f(17, 2) {
            let s = q.root_lift(17, 20);
            assert_eq!(s.mod_floor(&BigInt::from(4)), BigInt::from(q.hensel_root));
            assert_eq!((&s * &s - BigInt::from(17)).mod_floor(&pow_big(2, 20)), BigInt::zero());
        }
    }
}
