//! Brute-force oracles and the harness comparing the two sides.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{coefficient_bphi, EisParams, FourierCoefficient};
use crate::arithmetic::{degree, DegreeResult, DiffSet};
use crate::error::{Error, Result};
use crate::numberfield::factor::is_squarefree;
use crate::numberfield::rational::{pow_big, rat_mod, to_f64, val_rat};
use crate::numberfield::{BigRat, CmInstance, FIdeal, FPlace, FPrime, QuadElem, RelSplit};

/// Counts integral `O_K`-ideals of relative norm `b` by enumerating every
/// exponent vector over the primes of `K` above the support of `b`.
pub fn brute_rho(inst: &CmInstance, b: &FIdeal) -> Result<u64> {
    if !b.is_integral() {
        return Err(Error::NonIntegral);
    }
    // (prime of F below, relative norm exponent per unit exponent, max exponent)
    let mut k_primes: Vec<(FPrime, i64, i64)> = Vec::new();
    for (q, &k) in b.factors() {
        match inst.splitting_in_k(q) {
            RelSplit::Split => {
                k_primes.push((*q, 1, k));
                k_primes.push((*q, 1, k));
            }
            RelSplit::Inert => k_primes.push((*q, 2, k / 2 + 1)),
            RelSplit::Ramified => k_primes.push((*q, 1, k)),
        }
    }
    let mut count = 0;
    let mut exps = vec![0i64; k_primes.len()];
    loop {
        let norm = FIdeal::from_factors(k_primes.iter().zip(&exps).map(|((q, f, _), e)| (*q, f * e)));
        if &norm == b {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == exps.len() {
                return Ok(count);
            }
            exps[i] += 1;
            if exps[i] <= k_primes[i].2 {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
    }
}

fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Every integral ideal of `O_F` with norm at most `bound`.
pub fn integral_ideals_up_to(inst: &CmInstance, bound: u64) -> Vec<FIdeal> {
    let primes: Vec<FPrime> = primes_up_to(bound)
        .into_iter()
        .flat_map(|p| inst.splitting_in_f(p))
        .filter(|q| q.residue_order() <= bound)
        .collect();
    let mut out = Vec::new();
    fn walk(primes: &[FPrime], start: usize, cur: FIdeal, norm: u64, bound: u64, out: &mut Vec<FIdeal>) {
        out.push(cur.clone());
        for i in start..primes.len() {
            let n = primes[i].residue_order();
            if norm * n > bound {
                continue;
            }
            walk(primes, i, cur.mul(&FIdeal::prime(primes[i])), norm * n, bound, out);
        }
    }
    walk(&primes, 0, FIdeal::unit(), 1, bound, &mut out);
    out
}

/// Local norm group of `K_q/F_q` at an odd ramified prime, modelled in the
/// residue ring `O_F/q^k` with `√Δ` adjoined.
pub struct LocalNormOracle {
    q: FPrime,
    k: u32,
    modulus: u64,
    d: u64,
    /// root of `D` defining the branch when `q` splits in `F`
    root: Option<u64>,
    delta: u64,
    norms: HashSet<(u64, u64)>,
}

const ORACLE_RING_LIMIT: u64 = 1 << 22;

impl LocalNormOracle {
    pub fn new(inst: &CmInstance, q: &FPrime, k: u32) -> Result<Self> {
        if q.p == 2 {
            return Err(Error::EvenResidueChar);
        }
        if inst.splitting_in_k(q) != RelSplit::Ramified {
            return Err(Error::ConditionFailed(format!("{q} is not ramified in K")));
        }
        let m_big = pow_big(q.p, k);
        let modulus = m_big
            .to_u64()
            .filter(|m| m.pow(q.f as u32) <= ORACLE_RING_LIMIT)
            .ok_or_else(|| Error::InvalidInput(format!("residue ring of {q} at precision {k} is too large")))?;
        let root = q.is_split().then(|| q.root_lift(inst.d, k).mod_floor(&m_big).to_u64().unwrap());
        let reduce = |n: i64| n.rem_euclid(modulus as i64) as u64;
        let mut oracle = LocalNormOracle {
            q: *q,
            k,
            modulus,
            d: reduce(inst.d),
            root,
            delta: reduce(inst.delta),
            norms: HashSet::new(),
        };
        let second = if root.is_some() { 1 } else { modulus };
        let mut squares = HashSet::new();
        for c0 in 0..modulus {
            for c1 in 0..second {
                let z = (c0, c1);
                squares.insert(oracle.mul(z, z));
            }
        }
        let delta = (oracle.delta, 0);
        let scaled: HashSet<_> = squares.iter().map(|&s| oracle.mul(delta, s)).collect();
        for &s in &squares {
            for &t in &scaled {
                oracle.norms.insert(oracle.sub(s, t));
            }
        }
        Ok(oracle)
    }

    fn mul(&self, a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
        let m = self.modulus as u128;
        let (a0, a1, b0, b1) = (a.0 as u128, a.1 as u128, b.0 as u128, b.1 as u128);
        let c0 = (a0 * b0 % m + (self.d as u128) * (a1 * b1 % m)) % m;
        let c1 = (a0 * b1 + a1 * b0) % m;
        (c0 as u64, c1 as u64)
    }

    fn sub(&self, a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
        let m = self.modulus;
        ((a.0 + m - b.0) % m, (a.1 + m - b.1) % m)
    }

    /// +1 if `a` is a norm from `K_q`, -1 otherwise.
    pub fn query(&self, inst: &CmInstance, a: &QuadElem) -> Result<i8> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let p = self.q.p;
        // p^2 is a norm, so clearing p from denominators keeps the class
        let low = [&a.x, &a.y]
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| val_rat(c, p))
            .min()
            .unwrap();
        let j = if low < 0 { (-low + 1) / 2 } else { 0 };
        let scale = BigRat::from_integer(pow_big(p, 2 * j as u32));
        let a = QuadElem::new(a.d, &a.x * &scale, &a.y * &scale);
        let ord = inst.ord_at(&a, &self.q)?;
        let need = ord as u32 + 1;
        if self.k < need {
            return Err(Error::InsufficientPrecision { k: self.k, need });
        }
        let m = BigInt::from(self.modulus);
        let x = rat_mod(&a.x, &m).expect("p-integral").to_u64().unwrap();
        let y = rat_mod(&a.y, &m).expect("p-integral").to_u64().unwrap();
        let elem = match self.root {
            Some(s) => (((x as u128 + y as u128 * s as u128) % self.modulus as u128) as u64, 0),
            None => (x, y),
        };
        Ok(if self.norms.contains(&elem) { 1 } else { -1 })
    }

    /// Unit classes of `O_F/q^k`, as elements of `F`.
    pub fn unit_classes(&self, inst: &CmInstance) -> Vec<QuadElem> {
        let p = self.q.p;
        let mut out = Vec::new();
        let m = self.modulus as i64;
        if self.root.is_some() {
            for n in (1..m).filter(|n| n % p as i64 != 0) {
                out.push(inst.elem(n, 0, 1));
            }
        } else {
            for c0 in 0..m {
                for c1 in 0..m {
                    if c0 % p as i64 != 0 || c1 % p as i64 != 0 {
                        out.push(inst.elem(c0, c1, 1));
                    }
                }
            }
        }
        out
    }
}

/// Decides whether `a` is a local norm at `q` by exhaustive search modulo `q^k`.
pub fn brute_norm_oracle(inst: &CmInstance, a: &QuadElem, q: &FPrime, k: u32) -> Result<i8> {
    LocalNormOracle::new(inst, q, k)?.query(inst, a)
}

/// Outcome of comparing the character against the norm oracle.
#[derive(Clone, Debug, Default)]
pub struct ChiSweep {
    pub checked: usize,
    pub mismatches: Vec<(QuadElem, i8, i8)>,
}

/// `χ_q(u·π^m)` against the oracle for every unit class `u` of `O_F/q^k`
/// and every `m` in `ords`.
pub fn chi_oracle_sweep(inst: &CmInstance, q: &FPrime, k: u32, ords: &[u32]) -> Result<ChiSweep> {
    let oracle = LocalNormOracle::new(inst, q, k)?;
    let pi = inst.field.prime_generator(q)?;
    let units = oracle.unit_classes(inst);
    let mut sweep = ChiSweep::default();
    for &m in ords {
        let pm = pi.pow(m as i64)?;
        let results: Vec<_> = units
            .par_iter()
            .map(|u| {
                let a = u * &pm;
                let chi = inst.chi_local(&a, &FPlace::Finite(*q))?;
                let brute = oracle.query(inst, &a)?;
                Ok((a, chi, brute))
            })
            .collect::<Result<_>>()?;
        sweep.checked += results.len();
        sweep.mismatches.extend(results.into_iter().filter(|(_, c, b)| c != b));
    }
    Ok(sweep)
}

/// `ρ` against [`brute_rho`] on every integral ideal of norm at most `bound`;
/// returns the number checked and the ideals that disagree.
pub fn rho_oracle_sweep(inst: &CmInstance, bound: u64) -> Result<(usize, Vec<FIdeal>)> {
    let ideals = integral_ideals_up_to(inst, bound);
    let bad: Vec<FIdeal> = ideals
        .par_iter()
        .filter_map(|b| match brute_rho(inst, b) {
            Ok(n) if n == crate::arithmetic::rho(inst, b) => None,
            _ => Some(b.clone()),
        })
        .collect();
    Ok((ideals.len(), bad))
}

fn sort_key(a: &QuadElem) -> (BigInt, BigInt, BigInt, BigInt) {
    (a.x.numer().clone(), a.x.denom().clone(), a.y.numer().clone(), a.y.denom().clone())
}

/// Sorts by the numerators and denominators of both coordinates, dropping repeats.
pub fn sort_alphas(v: &mut Vec<QuadElem>) {
    v.sort_by_key(sort_key);
    v.dedup();
}

/// `(u + v√D)/w` for `u, v ∈ [-B, B]`, `w ∈ {1, 2, 3}`, nonzero, deduplicated.
pub fn alpha_box(d: i64, bound: i64) -> Vec<QuadElem> {
    let mut out = Vec::new();
    for w in 1..=3 {
        for u in -bound..=bound {
            for v in -bound..=bound {
                if u != 0 || v != 0 {
                    out.push(QuadElem::from_ints(d, u, v, w));
                }
            }
        }
    }
    sort_alphas(&mut out);
    out
}

/// Reproducible pseudorandom nonzero elements `(u + v√D)/w` with
/// `|u|, |v|, w ≤ 10⁴`.
pub fn random_alphas(d: i64, n: usize, seed: u64) -> Vec<QuadElem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = rng.gen_range(-10_000..=10_000);
        let v = rng.gen_range(-10_000..=10_000);
        let w = rng.gen_range(1..=10_000);
        if u != 0 || v != 0 {
            out.push(QuadElem::from_ints(d, u, v, w));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    /// `|Diff| ≥ 3`: both sides vanish
    Vanishing,
    Finite,
    Archimedean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Pass,
    Fail,
    /// archimedean rows are recorded, not asserted
    Measured,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Pass => "pass",
            RowStatus::Fail => "fail",
            RowStatus::Measured => "measured",
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyRow {
    pub alpha: QuadElem,
    pub diff: DiffSet,
    pub family: Family,
    pub geometric: f64,
    pub b_stripped: f64,
    pub exp_factor: f64,
    pub rho: Option<u64>,
    pub ord_factor: Option<i64>,
    pub eps_q: Option<u8>,
    pub log_nq: Option<f64>,
    pub beta1_arg: Option<f64>,
    pub residual: f64,
    /// `geometric / b_stripped`
    pub measured_ratio: Option<f64>,
    pub status: RowStatus,
    /// first disagreeing factor, or the error that stopped the row
    pub mismatch: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ArchMeasurement {
    pub rows: usize,
    pub mean_ratio: f64,
    /// `(max - min) / |mean|` of the measured ratios
    pub spread: f64,
    /// measured ratio divided by the predicted constant
    pub ratio_to_constant: f64,
    pub agrees_as_printed: bool,
    /// the same ratio if the archimedean prefactor were `2^{r-1}`
    pub ratio_with_positive_power: f64,
    /// agreement if the archimedean prefactor were `2^{r-1}` instead
    pub agrees_with_positive_power: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub instance: String,
    pub constant: BigRat,
    pub rows: Vec<VerifyRow>,
    pub passed: usize,
    pub failed: usize,
    pub measured: usize,
    pub worst_residual: f64,
    pub arch: Option<ArchMeasurement>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

pub const REL_TOL: f64 = 1e-9;

/// One-line description of an instance.
pub fn instance_summary(inst: &CmInstance) -> String {
    format!("D={} Delta={} a={} r={} w={}", inst.d, inst.delta, inst.a, inst.r, inst.w_k0)
}

fn localize(deg: &DegreeResult, coef: &FourierCoefficient, constant: &BigRat) -> Option<String> {
    if deg.diff != coef.diff {
        return Some(format!("Diff: {} vs {}", deg.diff, coef.diff));
    }
    let Some(t) = deg.terms.first() else {
        return Some("Diff: degree has no finite term".into());
    };
    if t.rho != coef.rho {
        return Some(format!("rho: {} vs {}", t.rho, coef.rho));
    }
    if t.ord_factor != coef.ord_factor {
        return Some(format!("ord: {} vs {}", t.ord_factor, coef.ord_factor));
    }
    if Some(t.eps_q) != coef.eps {
        return Some(format!("eps_q: {} vs {:?}", t.eps_q, coef.eps));
    }
    let predicted = constant * &coef.rational_part;
    if t.prefactor != predicted {
        return Some(format!("prefactor: {} vs {}", t.prefactor, predicted));
    }
    None
}

fn evaluate_row(inst: &CmInstance, alpha: &QuadElem, params: &EisParams, constant: &BigRat) -> VerifyRow {
    let c = to_f64(constant);
    let computed = degree(inst, alpha, params.y).and_then(|d| Ok((d, coefficient_bphi(inst, alpha, params)?)));
    let (deg, coef) = match computed {
        Ok(x) => x,
        Err(e) => {
            return VerifyRow {
                alpha: alpha.clone(),
                diff: DiffSet::default(),
                family: Family::Vanishing,
                geometric: f64::NAN,
                b_stripped: f64::NAN,
                exp_factor: f64::NAN,
                rho: None,
                ord_factor: None,
                eps_q: None,
                log_nq: None,
                beta1_arg: None,
                residual: f64::INFINITY,
                measured_ratio: None,
                status: RowStatus::Fail,
                mismatch: Some(e.to_string()),
            }
        }
    };
    let family = match deg.diff.single() {
        None => Family::Vanishing,
        Some(FPlace::Finite(_)) => Family::Finite,
        Some(FPlace::Arch(_)) => Family::Archimedean,
    };
    let geometric = deg.total;
    let residual = (geometric - c * coef.b_stripped).abs();
    let within = residual < REL_TOL * geometric.abs().max(1.0);
    let (status, mismatch) = match family {
        Family::Archimedean => (RowStatus::Measured, None),
        Family::Vanishing => {
            let ok = within && geometric == 0.0 && coef.b_stripped == 0.0;
            let why = (!ok).then(|| format!("vanishing: geometric {geometric}, analytic {}", coef.b_stripped));
            (if ok { RowStatus::Pass } else { RowStatus::Fail }, why)
        }
        Family::Finite => {
            let why = localize(&deg, &coef, constant)
                .or_else(|| (!within).then(|| format!("residual {residual:e}")));
            (if why.is_none() { RowStatus::Pass } else { RowStatus::Fail }, why)
        }
    };
    let term = deg.terms.first();
    VerifyRow {
        alpha: alpha.clone(),
        diff: deg.diff.clone(),
        family,
        geometric,
        b_stripped: coef.b_stripped,
        exp_factor: coef.exp_factor,
        rho: (family != Family::Vanishing).then_some(coef.rho),
        ord_factor: term.map(|t| t.ord_factor),
        eps_q: term.map(|t| t.eps_q),
        log_nq: term.map(|t| t.log_nq),
        beta1_arg: deg.beta1_arg,
        residual,
        measured_ratio: (coef.b_stripped != 0.0).then(|| geometric / coef.b_stripped),
        status,
        mismatch,
    }
}

fn measure_arch(inst: &CmInstance, rows: &[VerifyRow], constant: f64) -> Option<ArchMeasurement> {
    let ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.family == Family::Archimedean)
        .filter_map(|r| r.measured_ratio)
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let to_constant = mean / constant;
    let shift = 4f64.powi(inst.r as i32 - 1);
    Some(ArchMeasurement {
        rows: ratios.len(),
        mean_ratio: mean,
        spread: (hi - lo) / mean.abs(),
        ratio_to_constant: to_constant,
        agrees_as_printed: (to_constant - 1.0).abs() < REL_TOL,
        ratio_with_positive_power: to_constant / shift,
        agrees_with_positive_power: (to_constant / shift - 1.0).abs() < REL_TOL,
    })
}

/// Evaluates both sides for every `α` (in parallel) and compares them
/// through the constant `-√N(d_{K/F}) / (w(K₀)·2^{r-1}·[K:Q])`.
pub fn check_main_theorem(inst: &CmInstance, alphas: &[QuadElem], params: &EisParams) -> VerifyReport {
    let constant = inst.identity_constant();
    let mut sorted = alphas.to_vec();
    sort_alphas(&mut sorted);
    let rows: Vec<VerifyRow> = sorted.par_iter().map(|a| evaluate_row(inst, a, params, &constant)).collect();
    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    let worst_residual = rows
        .iter()
        .filter(|r| r.status != RowStatus::Measured)
        .map(|r| r.residual)
        .fold(0.0, f64::max);
    VerifyReport {
        instance: instance_summary(inst),
        arch: measure_arch(inst, &rows, to_f64(&constant)),
        passed: count(RowStatus::Pass),
        failed: count(RowStatus::Fail),
        measured: count(RowStatus::Measured),
        worst_residual,
        constant,
        rows,
    }
}

/// First valid instance other than `(D, Δ)` = `exclude`, scanning squarefree
/// `D ≤ 60` and `Δ ≥ -200` in order of `(D, |Δ|)`.
pub fn find_second_instance(exclude: (i64, i64)) -> Option<CmInstance> {
    for d in 2..=60i64 {
        if d == exclude.0 || !is_squarefree(d) {
            continue;
        }
        for delta in (-200..=-3i64).rev() {
            if delta == exclude.1 || !is_squarefree(delta) {
                continue;
            }
            if let Ok(inst) = CmInstance::new(d, delta, &[]) {
                if inst.chi_of_c() == Ok(-1) {
                    return Some(inst);
                }
            }
        }
    }
    None
}
