//! Fractional ideals of `O_F`, stored in factored form.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use super::prime::FPrime;
use super::rational::BigRat;

/// A fractional ideal as a finite map prime -> nonzero exponent. The empty map is `O_F`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct FIdeal {
    factors: BTreeMap<FPrime, i64>,
}

impl FIdeal {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn prime(q: FPrime) -> Self {
        Self::prime_power(q, 1)
    }

    pub fn prime_power(q: FPrime, e: i64) -> Self {
        let mut out = Self::unit();
        out.add_exponent(q, e);
        out
    }

    pub fn from_factors<I: IntoIterator<Item = (FPrime, i64)>>(it: I) -> Self {
        let mut out = Self::unit();
        for (q, e) in it {
            out.add_exponent(q, e);
        }
        out
    }

    fn add_exponent(&mut self, q: FPrime, e: i64) {
        let v = self.factors.entry(q).or_insert(0);
        *v += e;
        if *v == 0 {
            self.factors.remove(&q);
        }
    }

    pub fn exponent(&self, q: &FPrime) -> i64 {
        self.factors.get(q).copied().unwrap_or(0)
    }

    pub fn factors(&self) -> impl Iterator<Item = (&FPrime, &i64)> {
        self.factors.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &FPrime> {
        self.factors.keys()
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.factors.values().all(|&e| e >= 0)
    }

    pub fn mul(&self, other: &FIdeal) -> FIdeal {
        let mut out = self.clone();
        for (q, &e) in &other.factors {
            out.add_exponent(*q, e);
        }
        out
    }

    pub fn inv(&self) -> FIdeal {
        FIdeal { factors: self.factors.iter().map(|(q, e)| (*q, -e)).collect() }
    }

    pub fn div(&self, other: &FIdeal) -> FIdeal {
        self.mul(&other.inv())
    }

    pub fn pow(&self, k: i64) -> FIdeal {
        if k == 0 {
            return FIdeal::unit();
        }
        FIdeal { factors: self.factors.iter().map(|(q, e)| (*q, e * k)).collect() }
    }

    /// Absolute norm `∏ N(q)^e` with `N(q) = p^f`.
    pub fn norm(&self) -> BigRat {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (q, &e) in &self.factors {
            let nq = num_traits::pow(BigInt::from(q.p), q.f as usize);
            let pw = num_traits::pow(nq, e.unsigned_abs() as usize);
            if e > 0 {
                num *= pw;
            } else {
                den *= pw;
            }
        }
        BigRat::new(num, den)
    }
}

impl fmt::Display for FIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "(1)");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(q, e)| if *e == 1 { q.to_string() } else { format!("{q}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}
