//! The real quadratic field `F = Q(√D)`: valuations, principal ideals,
//! residue symbols, the tame Hilbert symbol, units and generators.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::factor::prime_support;
use super::ideal::FIdeal;
use super::prime::{field_disc, splitting_in_f, FPrime, PrimeKind};
use super::quad::QuadElem;
use super::rational::{inv_mod, pow_big, val_int, BigRat};
use crate::error::{Error, Result};

/// Search bound on the `ω`-coordinate when looking for prime generators.
const GENERATOR_SEARCH: i64 = 200_000;

/// An element of a residue field `F_p` or `F_p[t]/(t^2 - D)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ResidueElem {
    pub c0: BigInt,
    pub c1: BigInt,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct QuadraticField {
    pub d: i64,
}

impl QuadraticField {
    pub fn new(d: i64) -> Self {
        Self { d }
    }

    pub fn disc(&self) -> i64 {
        field_disc(self.d)
    }

    pub fn primes_over(&self, p: u64) -> Vec<FPrime> {
        splitting_in_f(self.d, p)
    }

    /// Looks up a prime by rational prime and branch. Non-split primes accept
    /// branch 0 or 1.
    pub fn prime(&self, p: u64, branch: u8) -> Result<FPrime> {
        if p < 2 || !super::factor::is_prime(p as u128) {
            return Err(Error::UnknownPrime { p, branch });
        }
        self.primes_over(p)
            .into_iter()
            .find(|q| match q.kind {
                PrimeKind::Split { branch: b } => b == branch,
                _ => branch <= 1,
            })
            .ok_or(Error::UnknownPrime { p, branch })
    }

    pub fn elem(&self, u: i64, v: i64, w: i64) -> QuadElem {
        QuadElem::from_ints(self.d, u, v, w)
    }

    /// `ω` with `O_F = Z[ω]`.
    pub fn omega(&self) -> QuadElem {
        if self.d.rem_euclid(4) == 1 {
            self.elem(1, 1, 2)
        } else {
            QuadElem::sqrt_d(self.d)
        }
    }

    /// `√disc(F)`, a generator of the different of `F/Q`.
    pub fn sqrt_disc(&self) -> QuadElem {
        if self.d.rem_euclid(4) == 1 {
            QuadElem::sqrt_d(self.d)
        } else {
            self.elem(0, 2, 1)
        }
    }

    pub fn different(&self) -> FIdeal {
        self.principal_ideal(&self.sqrt_disc()).expect("√disc is nonzero")
    }

    /// Valuation of `a` at the prime `q`.
    pub fn ord_at(&self, a: &QuadElem, q: &FPrime) -> Result<i64> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let n = a.norm();
        let vn = val_int(n.numer(), q.p) - val_int(n.denom(), q.p);
        match q.kind {
            PrimeKind::Ramified => Ok(vn),
            PrimeKind::Inert => Ok(vn / 2),
            PrimeKind::Split { .. } => {
                let (x, y, den) = a.integral_parts();
                let nint = &x * &x - BigInt::from(self.d) * &y * &y;
                // the branch valuation of x + y√D is bounded by v_p(N)
                let k = val_int(&nint, q.p) as u32 + 3;
                let s = q.root_lift(self.d, k);
                let t = (&x + &y * s).mod_floor(&pow_big(q.p, k));
                Ok(val_int(&t, q.p) - val_int(&den, q.p))
            }
        }
    }

    /// Rational primes at which `a` can have nonzero valuation.
    pub fn support_primes(&self, a: &QuadElem) -> Result<Vec<u64>> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let (x, y, den) = a.integral_parts();
        let nint = &x * &x - BigInt::from(self.d) * &y * &y;
        let mut ps: BTreeSet<u64> = prime_support(&nint)?.into_iter().collect();
        ps.extend(prime_support(&den)?);
        Ok(ps.into_iter().collect())
    }

    pub fn principal_ideal(&self, a: &QuadElem) -> Result<FIdeal> {
        let mut out = Vec::new();
        for p in self.support_primes(a)? {
            for q in self.primes_over(p) {
                let v = self.ord_at(a, &q)?;
                if v != 0 {
                    out.push((q, v));
                }
            }
        }
        Ok(FIdeal::from_factors(out))
    }

    /// Image of a `q`-unit in the residue field at an odd prime `q`.
    pub fn reduce_unit(&self, a: &QuadElem, q: &FPrime) -> Result<ResidueElem> {
        if q.p == 2 {
            return Err(Error::EvenResidueChar);
        }
        if self.ord_at(a, q)? != 0 {
            return Err(Error::NotAUnit { p: q.p });
        }
        let p = BigInt::from(q.p);
        let (x, y, den) = a.integral_parts();
        let t = val_int(&den, q.p) as u32;
        let pt = pow_big(q.p, t);
        let den_red = inv_mod(&(&den / &pt), &p).expect("cofactor is prime to p");
        match q.kind {
            PrimeKind::Split { .. } => {
                let k = t + 2;
                let s = q.root_lift(self.d, k);
                let num = (&x + &y * s).mod_floor(&pow_big(q.p, k));
                let c0 = (num / &pt * den_red).mod_floor(&p);
                Ok(ResidueElem { c0, c1: BigInt::zero() })
            }
            PrimeKind::Inert => Ok(ResidueElem {
                c0: (&x / &pt * &den_red).mod_floor(&p),
                c1: (&y / &pt * &den_red).mod_floor(&p),
            }),
            PrimeKind::Ramified => Ok(ResidueElem {
                c0: (&x / &pt * &den_red).mod_floor(&p),
                c1: BigInt::zero(),
            }),
        }
    }

    fn residue_mul(&self, a: &ResidueElem, b: &ResidueElem, p: &BigInt) -> ResidueElem {
        let d = BigInt::from(self.d);
        ResidueElem {
            c0: (&a.c0 * &b.c0 + d * &a.c1 * &b.c1).mod_floor(p),
            c1: (&a.c0 * &b.c1 + &a.c1 * &b.c0).mod_floor(p),
        }
    }

    pub fn residue_pow(&self, a: &ResidueElem, e: &BigInt, p: &BigInt) -> ResidueElem {
        let mut acc = ResidueElem { c0: BigInt::one(), c1: BigInt::zero() };
        let mut base = a.clone();
        let mut e = e.clone();
        let two = BigInt::from(2);
        while e.is_positive() {
            if e.is_odd() {
                acc = self.residue_mul(&acc, &base, p);
            }
            base = self.residue_mul(&base, &base, p);
            e /= &two;
        }
        acc
    }

    /// `+1` iff the residue of the `q`-unit `x` is a square in the residue
    /// field, by exponentiation to `(|κ| - 1)/2`.
    pub fn residue_symbol(&self, x: &QuadElem, q: &FPrime) -> Result<i8> {
        let r = self.reduce_unit(x, q)?;
        let p = BigInt::from(q.p);
        let e = (pow_big(q.p, q.f as u32) - 1) / 2;
        let pw = self.residue_pow(&r, &e, &p);
        if pw.c0.is_one() && pw.c1.is_zero() {
            Ok(1)
        } else {
            debug_assert!(pw.c0 == &p - 1 && pw.c1.is_zero());
            Ok(-1)
        }
    }

    /// Tame Hilbert symbol `(a, b)_q` at an odd prime:
    /// `(-1)^{mn(|κ|-1)/2} · symbol(a^n / b^m)` with `m = ord a`, `n = ord b`.
    pub fn tame_hilbert(&self, a: &QuadElem, b: &QuadElem, q: &FPrime) -> Result<i8> {
        if q.p == 2 {
            return Err(Error::EvenResidueChar);
        }
        let m = self.ord_at(a, q)?;
        let n = self.ord_at(b, q)?;
        let u = &a.pow(n)? * &b.pow(-m)?;
        let kappa = q.residue_order();
        let sign_exp = (m * n).rem_euclid(2) as u64 * ((kappa - 1) / 2);
        let sign = if sign_exp % 2 == 1 { -1 } else { 1 };
        Ok(sign * self.residue_symbol(&u, q)?)
    }

    /// Fundamental unit `ε > 1` of `O_F`, from the continued fraction of `ω`.
    pub fn fundamental_unit(&self) -> QuadElem {
        let d = BigInt::from(self.d);
        let sq = d.sqrt();
        let (p0, q0) = if self.d.rem_euclid(4) == 1 { (1i64, 2i64) } else { (0, 1) };
        let (mut pk, mut qk) = (BigInt::from(p0), BigInt::from(q0));
        let (mut h1, mut h2) = (BigInt::one(), BigInt::zero());
        let (mut k1, mut k2) = (BigInt::zero(), BigInt::one());
        let omega_bar = {
            let w = self.omega();
            w.conj()
        };
        loop {
            let a = (&pk + &sq).div_floor(&qk);
            let h = &a * &h1 + &h2;
            let k = &a * &k1 + &k2;
            let eta = &QuadElem::from_rat(self.d, BigRat::from_integer(h.clone()))
                - &(&QuadElem::from_rat(self.d, BigRat::from_integer(k.clone())) * &omega_bar);
            let n = eta.norm();
            if n.abs().is_one() && !k.is_zero() {
                return eta;
            }
            h2 = std::mem::replace(&mut h1, h);
            k2 = std::mem::replace(&mut k1, k);
            pk = &a * &qk - &pk;
            qk = (&d - &pk * &pk) / &qk;
        }
    }

    /// A generator of the prime `q`, searched over `x + yω` with norm `±N(q)`.
    pub fn prime_generator(&self, q: &FPrime) -> Result<QuadElem> {
        if q.kind == PrimeKind::Inert {
            return Ok(QuadElem::from_int(self.d, q.p as i64));
        }
        let target = q.p as i64;
        let omega = self.omega();
        let tr = omega.trace().to_integer().to_i64().unwrap();
        let nw = omega.norm().to_integer().to_i64().unwrap();
        for y in 0..GENERATOR_SEARCH {
            for s in [1i64, -1] {
                // x^2 + tr*y*x + nw*y^2 - s*p = 0
                let disc = (tr * y) as i128 * (tr * y) as i128
                    - 4 * (nw as i128 * (y as i128) * (y as i128) - (s * target) as i128);
                if disc < 0 {
                    continue;
                }
                let r = disc.sqrt();
                if r * r != disc {
                    continue;
                }
                for root in [r, -r] {
                    let num = -(tr as i128) * y as i128 + root;
                    if num % 2 != 0 {
                        continue;
                    }
                    let x = (num / 2) as i64;
                    let g = &self.elem(x, 0, 1) + &(&self.elem(y, 0, 1) * &omega);
                    if g.is_zero() {
                        continue;
                    }
                    if self.principal_ideal(&g)? == FIdeal::prime(*q) {
                        return Ok(g);
                    }
                }
            }
        }
        Err(Error::NonPrincipal(q.to_string()))
    }

    /// A generator of a fractional ideal built from prime generators.
    pub fn generator(&self, ideal: &FIdeal) -> Result<QuadElem> {
        let mut g = QuadElem::one(self.d);
        for (q, &e) in ideal.factors() {
            g = &g * &self.prime_generator(q)?.pow(e)?;
        }
        Ok(g)
    }

    /// Multiplies `x` by one of `±1, ±ε` to reach the sign pattern
    /// (`neg_at_1`, `neg_at_2`) under the two real embeddings.
    pub fn adjust_signs(&self, x: &QuadElem, neg_at_1: bool, neg_at_2: bool) -> Result<QuadElem> {
        use std::cmp::Ordering::Less;
        let eps = self.fundamental_unit();
        let candidates = [x.clone(), -x, x * &eps, -(x * &eps)];
        candidates
            .into_iter()
            .find(|c| (c.sign_at(1) == Less) == neg_at_1 && (c.sign_at(2) == Less) == neg_at_2)
            .ok_or(Error::SignPatternUnreachable)
    }
}
