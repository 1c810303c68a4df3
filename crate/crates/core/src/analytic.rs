//! The analytic side: the exponential integral, local Whittaker factors and
//! the Fourier coefficient `b(α, y)` of the central derivative of the
//! incoherent Eisenstein series.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::arithmetic::{beta1_argument, diff_set, epsilon_q, rho, twisted_ideal, DiffSet};
use crate::error::{Error, Result};
use crate::numberfield::rational::to_f64;
use crate::numberfield::{BigRat, CmInstance, FIdeal, FPlace, FPrime, QuadElem, RelSplit};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `β₁(t) = ∫₁^∞ e^{-tu} du/u`, the exponential integral `E₁(t)`.
pub fn beta1(t: f64) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::NonpositiveArgument(t));
    }
    if t <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -t / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        return Ok(-EULER_GAMMA - t.ln() - sum);
    }
    // modified Lentz evaluation of the continued fraction
    let tiny = 1e-300;
    let mut b = t + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    Ok(h * (-t).exp())
}

/// Evaluation point `τ = iy` and the order in `s` being extracted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EisParams {
    pub y: (f64, f64),
    /// 0 for the value at `s = 0`, 1 for the first derivative
    pub s_order: u8,
}

impl EisParams {
    pub fn new(y: (f64, f64), s_order: u8) -> Result<Self> {
        if !(y.0 > 0.0 && y.1 > 0.0) || !y.0.is_finite() || !y.1.is_finite() {
            return Err(Error::InvalidInput(format!("y = ({}, {}) must be totally positive", y.0, y.1)));
        }
        if s_order > 1 {
            return Err(Error::InvalidInput(format!("s order {s_order} is not 0 or 1")));
        }
        Ok(EisParams { y, s_order })
    }

    pub fn derivative(y: (f64, f64)) -> Result<Self> {
        Self::new(y, 1)
    }

    pub fn norm_y(&self) -> f64 {
        self.y.0 * self.y.1
    }

    fn y_at(&self, w: u8) -> f64 {
        if w == 1 {
            self.y.0
        } else {
            self.y.1
        }
    }
}

/// Normalized local Whittaker function at `s = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WhittakerFactor {
    pub place: FPlace,
    pub chi: i8,
    pub value_at0: f64,
    /// Only evaluated at places where the value vanishes.
    pub deriv_at0: Option<f64>,
    /// The α-independent root-number constant is carried symbolically.
    pub unit_ambiguity: bool,
}

#[derive(Clone, Debug)]
pub struct FourierCoefficient {
    pub alpha: QuadElem,
    pub diff: DiffSet,
    /// exact coefficient of `log N(p)` (finite Diff) or of `β₁` (archimedean Diff)
    pub rational_part: BigRat,
    pub rho: u64,
    /// `ord_p(α ∂ a^{-1} p)`; 0 for archimedean Diff
    pub ord_factor: i64,
    pub eps: Option<u8>,
    pub log_np: Option<f64>,
    pub beta1_arg: Option<f64>,
    pub b_stripped: f64,
    pub exp_factor: f64,
    pub b_full: f64,
}

/// Local density of the ideal `b` at `q`: split `k+1`, inert parity, ramified 1.
fn rho_v(inst: &CmInstance, b: &FIdeal, q: &FPrime) -> f64 {
    let k = b.exponent(q);
    if k < 0 {
        return 0.0;
    }
    match inst.splitting_in_k(q) {
        RelSplit::Split => (k + 1) as f64,
        RelSplit::Inert => (k % 2 == 0) as u8 as f64,
        RelSplit::Ramified => 1.0,
    }
}

fn log_norm(q: &FPrime) -> f64 {
    q.f as f64 * (q.p as f64).ln()
}

/// `2 N(π)^{-ord(d)/2}` at a ramified prime; 1 elsewhere.
fn ramified_weight(inst: &CmInstance, q: &FPrime) -> f64 {
    if inst.splitting_in_k(q) == RelSplit::Ramified {
        let ord_d = inst.d_kf.exponent(q) as f64;
        2.0 * (q.residue_order() as f64).powf(-ord_d / 2.0)
    } else {
        1.0
    }
}

pub fn whittaker_factor(inst: &CmInstance, alpha: &QuadElem, v: &FPlace, params: &EisParams) -> Result<WhittakerFactor> {
    if alpha.is_zero() {
        return Err(Error::ZeroElement);
    }
    match v {
        FPlace::Arch(w) => {
            let chi = inst.chi_local(alpha, v)?;
            let yw = params.y_at(*w);
            let osc = (-2.0 * PI * alpha.embed(*w) * yw).exp();
            let (value, deriv) = if chi == 1 {
                (2.0 * yw.sqrt() * osc, None)
            } else {
                let b = beta1(beta1_argument(alpha, *w, params.y))?;
                (0.0, Some(yw.sqrt() * b * osc))
            };
            Ok(WhittakerFactor { place: *v, chi, value_at0: value, deriv_at0: deriv, unit_ambiguity: true })
        }
        FPlace::Finite(q) => {
            let chi = inst.chi_local(&(alpha * &inst.c_fin), v)?;
            let b = twisted_ideal(inst, alpha)?;
            let ramified = inst.splitting_in_k(q) == RelSplit::Ramified;
            let (value, deriv) = if chi == 1 {
                (rho_v(inst, &b, q) * ramified_weight(inst, q), None)
            } else {
                let half = (b.exponent(q) + 1) as f64 / 2.0;
                let local = if ramified {
                    ramified_weight(inst, q) * rho_v(inst, &b, q)
                } else {
                    rho_v(inst, &b.mul(&FIdeal::prime_power(*q, -1)), q)
                };
                (0.0, Some(log_norm(q) * half * local))
            };
            Ok(WhittakerFactor { place: *v, chi, value_at0: value, deriv_at0: deriv, unit_ambiguity: ramified })
        }
    }
}

/// Places where the local factor can differ from 1: both real places, the
/// support of `α ∂ a^{-1}` and the primes ramified in `K`.
pub fn relevant_places(inst: &CmInstance, alpha: &QuadElem) -> Result<Vec<FPlace>> {
    let mut set: BTreeSet<FPlace> = [FPlace::Arch(1), FPlace::Arch(2)].into_iter().collect();
    for q in twisted_ideal(inst, alpha)?.support() {
        set.insert(FPlace::Finite(*q));
    }
    for q in inst.ramified_primes() {
        set.insert(FPlace::Finite(*q));
    }
    set.extend(diff_set(inst, alpha)?.places);
    Ok(set.into_iter().collect())
}

/// `e^{-2π tr(α y)}`.
pub fn exp_factor(alpha: &QuadElem, y: (f64, f64)) -> f64 {
    (-2.0 * PI * (alpha.embed(1) * y.0 + alpha.embed(2) * y.1)).exp()
}

/// Closed form of the coefficient, selected by the shape of `Diff(α, c)`.
pub fn coefficient_bphi(inst: &CmInstance, alpha: &QuadElem, params: &EisParams) -> Result<FourierCoefficient> {
    let diff = diff_set(inst, alpha)?;
    let sqrt_nd = inst.sqrt_norm_dkf();
    let two_r1 = BigInt::from(2).pow(inst.r - 1);
    let ef = exp_factor(alpha, params.y);
    let mut out = FourierCoefficient {
        alpha: alpha.clone(),
        diff: diff.clone(),
        rational_part: BigRat::zero(),
        rho: 0,
        ord_factor: 0,
        eps: None,
        log_np: None,
        beta1_arg: None,
        b_stripped: 0.0,
        exp_factor: ef,
        b_full: 0.0,
    };
    match diff.single() {
        Some(FPlace::Finite(p)) => {
            let eps = epsilon_q(inst, &p);
            let b = twisted_ideal(inst, alpha)?;
            let r = rho(inst, &b.mul(&FIdeal::prime_power(p, -(eps as i64))));
            let ord = b.exponent(&p) + 1;
            out.rational_part = BigRat::new(-&two_r1 * BigInt::from(r) * BigInt::from(ord), sqrt_nd);
            out.rho = r;
            out.ord_factor = ord;
            out.eps = Some(eps);
            out.log_np = Some(log_norm(&p));
            out.b_stripped = to_f64(&out.rational_part) * log_norm(&p);
        }
        Some(FPlace::Arch(w)) => {
            let r = rho(inst, &twisted_ideal(inst, alpha)?);
            let arg = beta1_argument(alpha, w, params.y);
            out.rational_part = BigRat::new(BigInt::from(r), two_r1 * sqrt_nd);
            out.rho = r;
            out.beta1_arg = Some(arg);
            out.b_stripped = to_f64(&out.rational_part) * beta1(arg)?;
        }
        None => {}
    }
    out.b_full = out.b_stripped * ef;
    Ok(out)
}

/// `N(y)^{-1/2} ∏_v W_v` at the requested order in `s`. For the derivative
/// the single Diff place contributes its derivative and every other place
/// its value; root-number constants are omitted.
pub fn coefficient_via_product(inst: &CmInstance, alpha: &QuadElem, params: &EisParams) -> Result<f64> {
    let places = relevant_places(inst, alpha)?;
    let factors = places
        .iter()
        .map(|v| whittaker_factor(inst, alpha, v, params))
        .collect::<Result<Vec<_>>>()?;
    let scale = params.norm_y().powf(-0.5);
    if params.s_order == 0 {
        return Ok(scale * factors.iter().map(|f| f.value_at0).product::<f64>());
    }
    let diff = diff_set(inst, alpha)?;
    if diff.len() != 1 {
        return Err(Error::MultiDiff(diff.len()));
    }
    let mut prod = scale;
    for f in &factors {
        prod *= match f.deriv_at0 {
            Some(d) => d,
            None => f.value_at0,
        };
    }
    Ok(prod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::rational::rat;

    fn standard() -> CmInstance {
        CmInstance::new(2, -3, &[]).unwrap()
    }

    #[test]
    fn beta1_reference_values() {
        assert!((beta1(1.0).unwrap() - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((beta1(0.5).unwrap() - 0.559_773_594_776_160_8).abs() < 1e-14);
        assert!((beta1(2.0).unwrap() - 0.048_900_510_708_061_12).abs() < 1e-15);
        let t = 50.0;
        let lead = beta1(t).unwrap() * t * t.exp();
        assert!((lead - 1.0).abs() < 0.03);
        assert_eq!(beta1(0.0), Err(Error::NonpositiveArgument(0.0)));
        assert!(beta1(-1.0).is_err());
    }

    #[test]
    fn beta1_is_continuous_at_switch() {
        let below = beta1(1.0 - 1e-12).unwrap();
        let above = beta1(1.0 + 1e-12).unwrap();
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn golden_coefficient_at_one() {
        let inst = standard();
        let p = EisParams::derivative((1.0, 1.0)).unwrap();
        let c = coefficient_bphi(&inst, &QuadElem::one(2), &p).unwrap();
        assert_eq!(c.rational_part, rat(-16, 3));
        assert!((c.b_stripped + 16.0 * 2f64.ln() / 3.0).abs() < 1e-12);
        assert!((c.exp_factor - (-4.0 * PI).exp()).abs() < 1e-18);
    }

    #[test]
    fn whittaker_examples() {
        let inst = standard();
        let p = EisParams::derivative((1.0, 1.0)).unwrap();
        let one = QuadElem::one(2);
        let q2 = FPlace::Finite(inst.field.prime(2, 1).unwrap());
        let w = whittaker_factor(&inst, &one, &q2, &p).unwrap();
        assert_eq!((w.chi, w.value_at0), (-1, 0.0));
        assert!(w.deriv_at0.unwrap() > 0.0);
        let w = whittaker_factor(&inst, &one, &FPlace::Arch(1), &p).unwrap();
        assert!((w.value_at0 - 2.0 * (-2.0 * PI).exp()).abs() < 1e-18);
        assert!(w.unit_ambiguity);

        // q7 splits in K; an element with ord 2 there has local density 3
        let q7 = inst.field.prime(7, 1).unwrap();
        let g = inst.field.prime_generator(&q7).unwrap();
        let alpha = &(&g * &g) * &inst.c_fin;
        let w = whittaker_factor(&inst, &alpha, &FPlace::Finite(q7), &p).unwrap();
        assert_eq!((w.chi, w.value_at0), (1, 3.0));
    }

    #[test]
    fn incoherent_value_vanishes() {
        let inst = standard();
        let p = EisParams::new((0.7, 1.3), 0).unwrap();
        for (u, v, w) in [(1, 0, 1), (1, -1, 1), (0, 1, 1), (3, 2, 2), (-5, 1, 3)] {
            let a = inst.elem(u, v, w);
            assert_eq!(coefficient_via_product(&inst, &a, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn multi_diff_is_rejected() {
        let inst = standard();
        let p = EisParams::derivative((1.0, 1.0)).unwrap();
        let a = inst.elem(1, -1, 1);
        let n = diff_set(&inst, &a).unwrap().len();
        assert!(n > 1);
        assert_eq!(coefficient_via_product(&inst, &a, &p), Err(Error::MultiDiff(n)));
        assert_eq!(coefficient_bphi(&inst, &a, &p).unwrap().b_stripped, 0.0);
    }

    #[test]
    fn finite_product_ratio_is_minus_one() {
        let inst = standard();
        let p = EisParams::derivative((0.8, 1.1)).unwrap();
        let a = QuadElem::one(2);
        let prod = coefficient_via_product(&inst, &a, &p).unwrap();
        let closed = coefficient_bphi(&inst, &a, &p).unwrap().b_full;
        assert!((prod / closed + 1.0).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(EisParams::new((0.0, 1.0), 1).is_err());
        assert!(EisParams::new((1.0, 1.0), 2).is_err());
    }
}
