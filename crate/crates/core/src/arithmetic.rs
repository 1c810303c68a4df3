//! The geometric side: ideal counts, Diff sets, local orbital integrals,
//! lifting lengths and the assembled arithmetic degree of `Z(α)`.
//!
//! All prefactors are kept as exact rationals; logarithms and the
//! exponential integral enter only in the final `f64` assembly.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::analytic::beta1;
use crate::error::{Error, Result};
use crate::numberfield::rational::to_f64;
use crate::numberfield::{BigRat, CmInstance, FIdeal, FPlace, FPrime, QuadElem, RelSplit};

/// `Diff(α, c)`: the places where `χ_v(α·c) = -1`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DiffSet {
    pub places: BTreeSet<FPlace>,
}

impl DiffSet {
    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    pub fn finite_part(&self) -> impl Iterator<Item = &FPrime> {
        self.places.iter().filter_map(|v| match v {
            FPlace::Finite(q) => Some(q),
            FPlace::Arch(_) => None,
        })
    }

    pub fn arch_part(&self) -> impl Iterator<Item = u8> + '_ {
        self.places.iter().filter_map(|v| match v {
            FPlace::Arch(i) => Some(*i),
            FPlace::Finite(_) => None,
        })
    }

    /// The single member, if there is exactly one.
    pub fn single(&self) -> Option<FPlace> {
        if self.places.len() == 1 {
            self.places.iter().next().copied()
        } else {
            None
        }
    }
}

impl std::fmt::Display for DiffSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.places.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

/// Contribution of one nonsplit prime to the finite part of the degree.
#[derive(Clone, Debug)]
pub struct DegreeTerm {
    pub q: FPrime,
    pub rho: u64,
    pub ord_factor: i64,
    pub eps_q: u8,
    pub log_nq: f64,
    /// `ρ / w(K₀)`
    pub mass: BigRat,
    /// `½·ord_q(α a^{-1} q ∂)`
    pub length: BigRat,
    /// `ρ·ord / (w(K₀)·[K:Q])`, the rational coefficient of `log N(q)`
    pub prefactor: BigRat,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct DegreeResult {
    pub alpha: QuadElem,
    pub diff: DiffSet,
    pub terms: Vec<DegreeTerm>,
    pub arch_value: f64,
    /// `4π|y_w α_w|` when the archimedean branch is active
    pub beta1_arg: Option<f64>,
    pub total: f64,
}

pub fn epsilon_q(inst: &CmInstance, q: &FPrime) -> u8 {
    match inst.splitting_in_k(q) {
        RelSplit::Ramified => 0,
        _ => 1,
    }
}

/// Number of integral ideals `J ◁ O_K` with `N_{K/F} J = b`.
pub fn rho(inst: &CmInstance, b: &FIdeal) -> u64 {
    let mut count = 1u64;
    for (q, &k) in b.factors() {
        if k < 0 {
            return 0;
        }
        count *= match inst.splitting_in_k(q) {
            RelSplit::Split => k as u64 + 1,
            RelSplit::Inert => u64::from(k % 2 == 0),
            RelSplit::Ramified => 1,
        };
    }
    count
}

/// Local factor of `ρ` at `q` for the ideal `b`.
pub fn rho_local(inst: &CmInstance, b: &FIdeal, q: &FPrime) -> u64 {
    let k = b.exponent(q);
    if k < 0 {
        return 0;
    }
    match inst.splitting_in_k(q) {
        RelSplit::Split => k as u64 + 1,
        RelSplit::Inert => u64::from(k % 2 == 0),
        RelSplit::Ramified => 1,
    }
}

/// `α·∂·a^{-1}` as an ideal; it equals `(α / c_fin)`.
pub fn twisted_ideal(inst: &CmInstance, alpha: &QuadElem) -> Result<FIdeal> {
    Ok(inst.principal_ideal(alpha)?.mul(&inst.different).div(&inst.a))
}

pub fn diff_set(inst: &CmInstance, alpha: &QuadElem) -> Result<DiffSet> {
    if alpha.is_zero() {
        return Err(Error::ZeroElement);
    }
    let ac = alpha * &inst.c_fin;
    let mut places = BTreeSet::new();
    for q in inst.character_support(&ac)? {
        let v = FPlace::Finite(q);
        if inst.chi_local(&ac, &v)? == -1 {
            places.insert(v);
        }
    }
    // c has positive archimedean components
    for i in [1u8, 2] {
        if inst.chi_local(alpha, &FPlace::Arch(i))? == -1 {
            places.insert(FPlace::Arch(i));
        }
    }
    Ok(DiffSet { places })
}

fn require_nonsplit(inst: &CmInstance, q: &FPrime) -> Result<()> {
    if inst.splitting_in_k(q) == RelSplit::Split {
        Err(Error::SplitPrime { p: q.p })
    } else {
        Ok(())
    }
}

/// `a·∂^{-1}·q^{ε_q}` for a prime nonsplit in `K`.
pub fn beta_ideal(inst: &CmInstance, q: &FPrime) -> Result<FIdeal> {
    require_nonsplit(inst, q)?;
    Ok(inst
        .a
        .div(&inst.different)
        .mul(&FIdeal::prime_power(*q, epsilon_q(inst, q) as i64)))
}

/// A totally positive generator of [`beta_ideal`].
pub fn beta_element(inst: &CmInstance, q: &FPrime) -> Result<QuadElem> {
    let ideal = beta_ideal(inst, q)?;
    let g = inst.field.generator(&ideal)?;
    inst.field.adjust_signs(&g, false, false)
}

/// Local orbital integral at a finite prime for the ratio `α/β`.
pub fn orbital_local(inst: &CmInstance, alpha: &QuadElem, beta: &QuadElem, v: &FPrime) -> Result<u64> {
    if alpha.is_zero() || beta.is_zero() {
        return Err(Error::ZeroElement);
    }
    let ord = inst.ord_at(&(alpha / beta), v)?;
    if ord < 0 {
        return Ok(0);
    }
    Ok(match inst.splitting_in_k(v) {
        RelSplit::Split => 1 + ord as u64,
        _ => 1,
    })
}

/// Product of the local orbital integrals over the support of `α/β`.
pub fn orbital_product(inst: &CmInstance, alpha: &QuadElem, beta: &QuadElem) -> Result<u64> {
    if alpha.is_zero() || beta.is_zero() {
        return Err(Error::ZeroElement);
    }
    let ratio = alpha / beta;
    let mut prod = 1;
    for p in inst.field.support_primes(&ratio)? {
        for q in inst.splitting_in_f(p) {
            let ord = inst.ord_at(&ratio, &q)?;
            // the nonsplit display is the characteristic function of O_{F,v};
            // its parity constraint comes from the norm condition
            let local = if ord < 0 {
                0
            } else {
                match inst.splitting_in_k(&q) {
                    RelSplit::Split => 1 + ord as u64,
                    RelSplit::Inert => u64::from(ord % 2 == 0),
                    RelSplit::Ramified => 1,
                }
            };
            prod *= local;
        }
    }
    Ok(prod)
}

/// `(1/w(K₀))·ρ(α ∂ a^{-1} q^{-ε_q})` when `Diff(α,c) = {q}`, else 0.
pub fn stacky_point_mass(inst: &CmInstance, alpha: &QuadElem, q: &FPrime) -> Result<BigRat> {
    require_nonsplit(inst, q)?;
    let diff = diff_set(inst, alpha)?;
    if diff.single() != Some(FPlace::Finite(*q)) {
        return Ok(BigRat::zero());
    }
    let b = twisted_ideal(inst, alpha)?.mul(&FIdeal::prime_power(*q, -(epsilon_q(inst, q) as i64)));
    Ok(BigRat::new(BigInt::from(rho(inst, &b)), BigInt::from(inst.w_k0)))
}

/// `½·ord_q(α a^{-1} q ∂)` for `Diff(α,c) = {q}`.
pub fn lifting_length_ord(inst: &CmInstance, alpha: &QuadElem, q: &FPrime) -> Result<BigRat> {
    require_nonsplit(inst, q)?;
    let diff = diff_set(inst, alpha)?;
    if diff.single() != Some(FPlace::Finite(*q)) {
        return Err(Error::ConditionFailed(format!("Diff(alpha, c) = {diff} is not {{{q}}}")));
    }
    let ord = twisted_ideal(inst, alpha)?.exponent(q) + 1;
    Ok(BigRat::new(BigInt::from(ord), BigInt::from(2)))
}

fn log_norm(q: &FPrime) -> f64 {
    q.f as f64 * (q.p as f64).ln()
}

/// Finite part of the arithmetic degree.
pub fn degree_finite(inst: &CmInstance, alpha: &QuadElem) -> Result<DegreeResult> {
    let diff = diff_set(inst, alpha)?;
    let mut terms = Vec::new();
    if let Some(FPlace::Finite(q)) = diff.single() {
        let eps = epsilon_q(inst, &q);
        let twisted = twisted_ideal(inst, alpha)?;
        let r = rho(inst, &twisted.mul(&FIdeal::prime_power(q, -(eps as i64))));
        let ord_factor = twisted.exponent(&q) + 1;
        let w = BigInt::from(inst.w_k0);
        let mass = BigRat::new(BigInt::from(r), w.clone());
        let length = BigRat::new(BigInt::from(ord_factor), BigInt::from(2));
        let prefactor = BigRat::new(
            BigInt::from(r) * BigInt::from(ord_factor),
            w * BigInt::from(inst.deg_k),
        );
        let log_nq = log_norm(&q);
        terms.push(DegreeTerm {
            q,
            rho: r,
            ord_factor,
            eps_q: eps,
            log_nq,
            mass,
            length,
            value: to_f64(&prefactor) * log_nq,
            prefactor,
        });
    }
    // + 0.0 normalizes the -0.0 of an empty float sum
    let total = terms.iter().map(|t| t.value).sum::<f64>() + 0.0;
    Ok(DegreeResult {
        alpha: alpha.clone(),
        diff,
        terms,
        arch_value: 0.0,
        beta1_arg: None,
        total,
    })
}

/// `4π|y_w α_w|` at the real place `w`.
pub fn beta1_argument(alpha: &QuadElem, w: u8, y: (f64, f64)) -> f64 {
    let yw = if w == 1 { y.0 } else { y.1 };
    4.0 * PI * (yw * alpha.embed(w)).abs()
}

/// Green-function contribution for `α` negative at exactly one real place `w`
/// with `Diff(α,c) = {w}`; zero otherwise.
pub fn degree_archimedean(inst: &CmInstance, alpha: &QuadElem, y: (f64, f64)) -> Result<f64> {
    Ok(archimedean_parts(inst, alpha, y)?.map(|(v, _)| v).unwrap_or(0.0))
}

fn archimedean_parts(inst: &CmInstance, alpha: &QuadElem, y: (f64, f64)) -> Result<Option<(f64, f64)>> {
    let diff = diff_set(inst, alpha)?;
    let Some(FPlace::Arch(w)) = diff.single() else {
        return Ok(None);
    };
    let negatives = [1u8, 2]
        .iter()
        .filter(|&&i| inst.chi_local(alpha, &FPlace::Arch(i)).map(|s| s == -1).unwrap_or(false))
        .count();
    if negatives != 1 {
        return Ok(None);
    }
    let r = rho(inst, &twisted_ideal(inst, alpha)?);
    let arg = beta1_argument(alpha, w, y);
    let pref = r as f64 / (inst.w_k0 as f64 * inst.deg_k as f64);
    Ok(Some((pref * beta1(arg)?, arg)))
}

/// The full arithmetic degree: finite part plus Green-function part.
pub fn degree(inst: &CmInstance, alpha: &QuadElem, y: (f64, f64)) -> Result<DegreeResult> {
    let mut res = degree_finite(inst, alpha)?;
    if let Some((v, arg)) = archimedean_parts(inst, alpha, y)? {
        res.arch_value = v;
        res.beta1_arg = Some(arg);
        res.total += v;
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::rational::{int, rat};

    fn standard() -> CmInstance {
        CmInstance::new(2, -3, &[]).unwrap()
    }

    #[test]
    fn epsilon_examples() {
        let inst = standard();
        assert_eq!(epsilon_q(&inst, &inst.field.prime(3, 1).unwrap()), 0);
        assert_eq!(epsilon_q(&inst, &inst.field.prime(2, 1).unwrap()), 1);
        assert_eq!(epsilon_q(&inst, &inst.field.prime(7, 1).unwrap()), 1);
    }

    #[test]
    fn rho_examples() {
        let inst = standard();
        let q2 = inst.field.prime(2, 1).unwrap();
        let q7 = inst.field.prime(7, 1).unwrap();
        assert_eq!(rho(&inst, &FIdeal::unit()), 1);
        assert_eq!(rho(&inst, &FIdeal::prime_power(q2, 2)), 1);
        assert_eq!(rho(&inst, &FIdeal::prime(q2)), 0);
        assert_eq!(rho(&inst, &FIdeal::prime(q7)), 2);
        assert_eq!(rho(&inst, &FIdeal::prime_power(q7, -1)), 0);
    }

    #[test]
    fn diff_examples() {
        let inst = standard();
        let q2 = inst.field.prime(2, 1).unwrap();
        let d = diff_set(&inst, &QuadElem::one(2)).unwrap();
        assert_eq!(d.single(), Some(FPlace::Finite(q2)));
        let d = diff_set(&inst, &inst.elem(1, -1, 1)).unwrap();
        assert!(d.places.contains(&FPlace::SPECIAL));
        assert_eq!(d.len() % 2, 1);
        assert_eq!(diff_set(&inst, &inst.elem(0, 0, 1)).unwrap_err(), Error::ZeroElement);
    }

    #[test]
    fn beta_ideal_examples() {
        let inst = standard();
        let q2 = inst.field.prime(2, 1).unwrap();
        let q3 = inst.field.prime(3, 1).unwrap();
        assert_eq!(beta_ideal(&inst, &q2).unwrap(), FIdeal::prime_power(q2, -2));
        assert_eq!(beta_ideal(&inst, &q3).unwrap(), FIdeal::prime_power(q2, -3));
        let q7 = inst.field.prime(7, 1).unwrap();
        assert_eq!(beta_ideal(&inst, &q7), Err(Error::SplitPrime { p: 7 }));

        let with_a = CmInstance::new(2, -3, &[(7, 1, 1)]).unwrap();
        let q5 = with_a.field.prime(5, 0).unwrap(); // 5 is inert in F, split in K
        assert!(beta_ideal(&with_a, &q5).is_err());
        let expect = FIdeal::prime(q7).mul(&FIdeal::prime_power(q2, -3)).mul(&FIdeal::prime(q2));
        assert_eq!(beta_ideal(&with_a, &q2).unwrap(), expect);
        let b = beta_element(&with_a, &q2).unwrap();
        assert!(b.is_totally_positive());
        assert_eq!(with_a.principal_ideal(&b).unwrap(), expect);
    }

    #[test]
    fn orbital_examples() {
        let inst = standard();
        let q7 = inst.field.prime(7, 1).unwrap();
        let g7 = inst.field.prime_generator(&q7).unwrap();
        let one = QuadElem::one(2);
        assert_eq!(orbital_local(&inst, &one, &one, &q7).unwrap(), 1);
        let q2 = inst.field.prime(2, 1).unwrap();
        assert_eq!(orbital_local(&inst, &one, &one, &q2).unwrap(), 1);
        let sq = &g7 * &g7;
        assert_eq!(orbital_local(&inst, &sq, &one, &q7).unwrap(), 3);
        assert_eq!(orbital_local(&inst, &one, &g7, &q7).unwrap(), 0);
        assert_eq!(orbital_product(&inst, &one, &one).unwrap(), 1);
        // √2 has odd exponent at the inert-in-K prime q2
        assert_eq!(orbital_product(&inst, &QuadElem::sqrt_d(2), &one).unwrap(), 0);
    }

    #[test]
    fn mass_and_length_examples() {
        let inst = standard();
        let q2 = inst.field.prime(2, 1).unwrap();
        let q3 = inst.field.prime(3, 1).unwrap();
        let one = QuadElem::one(2);
        assert_eq!(stacky_point_mass(&inst, &one, &q2).unwrap(), rat(1, 6));
        assert_eq!(stacky_point_mass(&inst, &one, &q3).unwrap(), int(0));
        assert_eq!(lifting_length_ord(&inst, &one, &q2).unwrap(), int(2));
        // Diff(√2, c) is archimedean, so the length is not defined at q2
        assert!(matches!(
            lifting_length_ord(&inst, &QuadElem::sqrt_d(2), &q2),
            Err(Error::ConditionFailed(_))
        ));
        // arch-Diff elements have zero mass at every finite prime
        let s = QuadElem::sqrt_d(2);
        assert_eq!(diff_set(&inst, &s).unwrap().single(), Some(FPlace::Arch(2)));
        assert_eq!(stacky_point_mass(&inst, &s, &q2).unwrap(), int(0));
        assert_eq!(stacky_point_mass(&inst, &s, &q3).unwrap(), int(0));
    }

    #[test]
    fn unit_length_at_ramified_prime() {
        // a q3-unit with Diff = {q3}: only the explicit q3 contributes to the length
        let inst = standard();
        let q3 = inst.field.prime(3, 1).unwrap();
        let alpha = (1..40)
            .flat_map(|u| (-20..20).map(move |v| (u, v)))
            .map(|(u, v)| inst.elem(u, v, 1))
            .find(|a| {
                a.is_totally_positive()
                    && inst.ord_at(a, &q3).unwrap() == 0
                    && diff_set(&inst, a).unwrap().single() == Some(FPlace::Finite(q3))
            })
            .expect("some totally positive q3-unit has Diff = {q3}");
        assert_eq!(lifting_length_ord(&inst, &alpha, &q3).unwrap(), rat(1, 2));
    }

    #[test]
    fn golden_degree_at_one() {
        let inst = standard();
        let res = degree_finite(&inst, &QuadElem::one(2)).unwrap();
        assert_eq!(res.terms.len(), 1);
        let t = &res.terms[0];
        assert_eq!((t.rho, t.ord_factor), (1, 4));
        assert_eq!(t.prefactor, rat(1, 6));
        assert!((res.total - 2f64.ln() / 6.0).abs() < 1e-15);
        assert_eq!(res.arch_value, 0.0);
    }

    #[test]
    fn archimedean_guards() {
        let inst = standard();
        let y = (1.0, 1.0);
        // totally positive: no archimedean contribution
        assert_eq!(degree_archimedean(&inst, &inst.elem(3, 1, 1), y).unwrap(), 0.0);
        // totally negative: Diff has both real places
        assert_eq!(degree_archimedean(&inst, &inst.elem(-3, 0, 1), y).unwrap(), 0.0);
        // √2 is negative only at the second place and Diff(√2, c) = {inf2}
        let v = degree_archimedean(&inst, &QuadElem::sqrt_d(2), y).unwrap();
        let expect = beta1(4.0 * PI * 2f64.sqrt()).unwrap() / 24.0;
        assert!((v - expect).abs() < 1e-15 * expect.abs().max(1e-300));
        assert!(v > 0.0);
    }
}
