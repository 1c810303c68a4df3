//! The CM configuration `K = F(√Δ)` over `F = Q(√D)` with `K₀ = Q(√Δ)`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;

use super::factor::{is_squarefree, prime_support};
use super::field::QuadraticField;
use super::ideal::FIdeal;
use super::prime::{field_disc, FPlace, FPrime, PrimeKind};
use super::quad::QuadElem;
use super::rational::BigRat;
use crate::error::{Error, Result};

/// Behaviour of a prime of `F` in the quadratic extension `K/F`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RelSplit {
    Split,
    Inert,
    Ramified,
}

/// A polarization-ideal factor as given on input: rational prime, branch, exponent.
pub type PrimePowerSpec = (u64, u8, i64);

/// A fully derived CM instance. Immutable after construction.
#[derive(Clone, Debug)]
pub struct CmInstance {
    pub field: QuadraticField,
    pub d: i64,
    pub delta: i64,
    /// polarization ideal of `O_F`
    pub a: FIdeal,
    pub disc_f: i64,
    pub disc_k0: i64,
    /// different of `F/Q`
    pub different: FIdeal,
    /// relative discriminant `d_{K/F}`
    pub d_kf: FIdeal,
    /// places of `F` ramified in `K`, archimedean included
    pub r: u32,
    pub w_k0: u32,
    pub deg_k: u32,
    /// finite representative of `c`: `c·O_F = ∂^{-1}·a`, negative at the special place only
    pub c_fin: QuadElem,
    pub y_default: (f64, f64),
    pub fundamental_unit: QuadElem,
    ramified: Vec<FPrime>,
}

impl CmInstance {
    pub fn new(d: i64, delta: i64, a_spec: &[PrimePowerSpec]) -> Result<Self> {
        if d <= 1 || !is_squarefree(d) {
            return Err(Error::NotSquarefree { what: "D", value: d });
        }
        if delta >= 0 || !is_squarefree(delta) {
            return Err(Error::NotSquarefree { what: "Delta", value: delta });
        }
        let field = QuadraticField::new(d);
        let disc_f = field_disc(d);
        let disc_k0 = field_disc(delta);
        if disc_f.gcd(&disc_k0) != 1 {
            return Err(Error::CoprimalityViolated { disc_k0, disc_f });
        }

        let k0_ramified = prime_support(&BigInt::from(disc_k0))?;
        let ramified: Vec<FPrime> = k0_ramified
            .iter()
            .filter(|&&p| p != 2)
            .flat_map(|&p| field.primes_over(p))
            .collect();
        if k0_ramified.is_empty() {
            return Err(Error::NoFiniteRamification);
        }
        if k0_ramified.contains(&2) {
            return Err(Error::DyadicRamification);
        }
        let d_kf = FIdeal::from_factors(ramified.iter().map(|q| (*q, 1)));

        let mut a = FIdeal::unit();
        for &(p, branch, e) in a_spec {
            a = a.mul(&FIdeal::prime_power(field.prime(p, branch)?, e));
        }

        let different = field.different();
        let w_k0 = match delta {
            -3 => 6,
            -1 => 4,
            _ => 2,
        };
        let r = 2 + ramified.len() as u32;

        let g = field.generator(&a)?;
        let c0 = &g / &field.sqrt_disc();
        let c_fin = field.adjust_signs(&c0, true, false)?;

        Ok(Self {
            field,
            d,
            delta,
            a,
            disc_f,
            disc_k0,
            different,
            d_kf,
            r,
            w_k0,
            deg_k: 4,
            c_fin,
            y_default: (1.0, 1.0),
            fundamental_unit: field.fundamental_unit(),
            ramified,
        })
    }

    /// Finite primes of `F` ramified in `K`.
    pub fn ramified_primes(&self) -> &[FPrime] {
        &self.ramified
    }

    /// `√N(d_{K/F})`, which is `|Δ|` under the coprimality hypothesis.
    pub fn sqrt_norm_dkf(&self) -> BigInt {
        let n = self.d_kf.norm();
        let s = num_integer::Roots::sqrt(n.numer());
        debug_assert_eq!(&s * &s, *n.numer());
        s
    }

    /// The constant `-√N(d_{K/F}) / (w(K₀)·2^{r-1}·[K:Q])` relating degree and coefficient.
    pub fn identity_constant(&self) -> BigRat {
        let den = BigInt::from(self.w_k0) * BigInt::from(2u64.pow(self.r - 1)) * BigInt::from(self.deg_k);
        -BigRat::new(self.sqrt_norm_dkf(), den)
    }

    pub fn splitting_in_f(&self, p: u64) -> Vec<FPrime> {
        self.field.primes_over(p)
    }

    pub fn ord_at(&self, a: &QuadElem, q: &FPrime) -> Result<i64> {
        self.field.ord_at(a, q)
    }

    pub fn principal_ideal(&self, a: &QuadElem) -> Result<FIdeal> {
        self.field.principal_ideal(a)
    }

    pub fn elem(&self, u: i64, v: i64, w: i64) -> QuadElem {
        self.field.elem(u, v, w)
    }

    /// Behaviour of `q` in `K/F`.
    pub fn splitting_in_k(&self, q: &FPrime) -> RelSplit {
        if self.ramified.contains(q) {
            return RelSplit::Ramified;
        }
        if q.p == 2 {
            return self.dyadic_splitting(q);
        }
        let delta = QuadElem::from_int(self.d, self.delta);
        match self.field.residue_symbol(&delta, q) {
            Ok(1) => RelSplit::Split,
            Ok(_) => RelSplit::Inert,
            Err(e) => unreachable!("Δ is a unit at unramified odd {q}: {e}"),
        }
    }

    /// `Δ` is a square in `F_q` iff it is a square modulo `q^{2e+1}`; the
    /// classes of `O_F/8` cover all residues at that precision.
    fn dyadic_splitting(&self, q: &FPrime) -> RelSplit {
        let omega = self.field.omega();
        let delta = QuadElem::from_int(self.d, self.delta);
        let need = 2 * q.e as i64 + 1;
        for a in 0..8 {
            for b in 0..8 {
                let x = &self.elem(a, 0, 1) + &(&self.elem(b, 0, 1) * &omega);
                let diff = &(&x * &x) - &delta;
                if self.field.ord_at(&diff, q).expect("Δ is not a square in F") >= need {
                    return RelSplit::Split;
                }
            }
        }
        RelSplit::Inert
    }

    /// Local component of the quadratic character of `K/F` at `v`.
    pub fn chi_local(&self, x: &QuadElem, v: &FPlace) -> Result<i8> {
        if x.is_zero() {
            return Err(Error::ZeroElement);
        }
        match v {
            FPlace::Arch(i) => Ok(if x.sign_at(*i) == Ordering::Less { -1 } else { 1 }),
            FPlace::Finite(q) => match self.splitting_in_k(q) {
                RelSplit::Split => Ok(1),
                RelSplit::Inert => Ok(if self.ord_at(x, q)?.rem_euclid(2) == 1 { -1 } else { 1 }),
                RelSplit::Ramified => {
                    let delta = QuadElem::from_int(self.d, self.delta);
                    self.field.tame_hilbert(x, &delta, q)
                }
            },
        }
    }

    /// Finite places where `χ_v(x)` can differ from 1: the support of `x`
    /// together with the primes ramified in `K`.
    pub fn character_support(&self, x: &QuadElem) -> Result<Vec<FPrime>> {
        let mut out: BTreeSet<FPrime> = self.ramified.iter().copied().collect();
        for p in self.field.support_primes(x)? {
            out.extend(self.field.primes_over(p));
        }
        Ok(out.into_iter().collect())
    }

    /// `∏_v χ_v(α)` over both real places and the character support; always +1.
    pub fn chi_product_check(&self, alpha: &QuadElem) -> Result<i8> {
        let mut prod = self.chi_local(alpha, &FPlace::Arch(1))? * self.chi_local(alpha, &FPlace::Arch(2))?;
        for q in self.character_support(alpha)? {
            prod *= self.chi_local(alpha, &FPlace::Finite(q))?;
        }
        Ok(prod)
    }

    /// `∏_{finite v} χ_v(c_fin)`: the value of `χ(c)` once the archimedean
    /// components of `c` are replaced by positive ones.
    pub fn chi_of_c(&self) -> Result<i8> {
        let mut prod = 1;
        for q in self.character_support(&self.c_fin)? {
            prod *= self.chi_local(&self.c_fin, &FPlace::Finite(q))?;
        }
        Ok(prod)
    }

    pub fn is_split_in_f(&self, q: &FPrime) -> bool {
        matches!(q.kind, PrimeKind::Split { .. })
    }
}
