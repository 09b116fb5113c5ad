//! The arithmetic factor of the main term: the arc-sum coefficients f(q),
//! their Dirichlet factorization into a modulus part g and a coprime part h,
//! exact local factors G(p) with their product and defining-sum routes, the
//! truncated Euler product for the h-series, and the assembled densities
//! sigma and sigma'.
//!
//! Every quantity with a closed form is computed both from its defining sum
//! and from the closed form; the pairs are cross-asserted in tests. Exact
//! values are big rationals, numeric ones are complex accumulations whose
//! imaginary parts must cancel.

use crate::arith::{divisors, euler_phi, factorize, gcd, mobius};
use crate::circle_method::unit_phase;
use crate::error::{Error, Result};
use crate::representation_counts::profile_h;
use crate::residue_system::{AdmissibleSystem, ResidueCover};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact rational scalar used for local factors, combinatorial identities
/// and the series lower bounds.
pub type ExactRational = BigRational;

/// Maximum basis size accepted by the defining-sum route for G; the subset
/// sum grows combinatorially and the product route covers larger bases.
pub const MAX_BASIS_FOR_G_SUM: usize = 4;

/// Which residue reading to count triples over: the unit residues that
/// survive the coprimality filter (the default everywhere), or the raw cover
/// integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidueBasis {
    #[default]
    Units,
    Raw,
}

/// Splitting of q into its modulus part and coprime part: `q = qtilde qhat`
/// with every prime of qtilde dividing q0 and `gcd(qhat, q0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorDecomposition {
    pub qtilde: u64,
    pub qhat: u64,
    /// gcd(qtilde, q0): equals qtilde exactly when qtilde is squarefree.
    pub d: u64,
}

/// Decompose q relative to the (squarefree) modulus q0.
pub fn split_by_modulus(q: u64, q0: u64) -> FactorDecomposition {
    let mut qhat = q;
    loop {
        let g = gcd(qhat, q0);
        if g == 1 {
            break;
        }
        qhat /= g;
    }
    let qtilde = q / qhat;
    FactorDecomposition {
        qtilde,
        qhat,
        d: gcd(qtilde, q0),
    }
}

/// Reduce the shifted fraction `(a q0 + l q) / (q q0)` to lowest terms,
/// returning (numerator, denominator).
pub fn q_ell(q: u64, q0: u64, a: u64, ell: u64) -> (u64, u64) {
    let num = a as u128 * q0 as u128 + ell as u128 * q as u128;
    let den = q as u128 * q0 as u128;
    let g = gcd_u128(num, den);
    ((num / g) as u64, (den / g) as u64)
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `e(-num / den)` with the numerator reduced modulo the denominator first.
fn e_neg(num: u128, den: u64) -> Complex64 {
    let r = (num % den as u128) as u64;
    unit_phase(-(r as f64) / den as f64)
}

/// Phase table `sum_{r in R0} e(-l r / q0)` for l = 0 .. q0-1.
fn residue_phase_table(system: &AdmissibleSystem) -> Vec<Complex64> {
    let q0 = system.q0;
    (0..q0)
        .map(|l| {
            system
                .residues
                .iter()
                .map(|&r| e_neg(l as u128 * r as u128, q0))
                .sum()
        })
        .collect()
}

#[inline]
fn mu_over_phi(n: u64) -> f64 {
    let mu = mobius(n);
    if mu == 0 {
        0.0
    } else {
        mu as f64 / euler_phi(n) as f64
    }
}

/// The arc-sum coefficient f(q), evaluated from its defining sum with the
/// triple sum factored into the cube of a single (l, r) sum per fixed a.
///
/// Cost is phi(q) * q0 inner evaluations; q beyond the budget is rejected.
pub fn f_direct(q: u64, m: u64, system: &AdmissibleSystem) -> Result<f64> {
    const MAX_Q: u64 = 1 << 20;
    if q == 0 || q > MAX_Q {
        return Err(Error::OutOfRange {
            value: q,
            lo: 1,
            hi: MAX_Q,
        });
    }
    let q0 = system.q0;
    let rsum = residue_phase_table(system);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..=q {
        if gcd(a, q) != 1 {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for (l, phase) in rsum.iter().enumerate() {
            let (_, ql) = q_ell(q, q0, a, l as u64);
            let w = mu_over_phi(ql);
            if w != 0.0 {
                inner += w * phase;
            }
        }
        acc += e_neg(a as u128 * m as u128, q) * inner * inner * inner;
    }
    let scale = (q0 as f64).powi(3);
    let value = acc / scale;
    assert!(
        value.im.abs() < 1e-9 * (1.0 + value.re.abs()),
        "f({q}) kept an imaginary part: {value}"
    );
    Ok(value.re)
}

/// Ramanujan sum `c_v(m) = sum_{(a,v)=1} e(a m / v)`, computed exactly via
/// the divisor form `sum_{d | (v, m)} d mu(v/d)`. Even in m, so the sign of
/// m never matters.
pub fn ramanujan_sum(v: u64, m: u64) -> i64 {
    let g = if m == 0 { v } else { gcd(v, m % v) };
    let mut acc = 0i64;
    for d in divisors(g) {
        acc += d as i64 * mobius(v / d);
    }
    acc
}

/// The coprime-part coefficient `h(v) = mu(v) c_v(m) / phi(v)^3`, zero when
/// v shares a factor with q0.
pub fn h_eval(v: u64, m: u64, q0: u64) -> ExactRational {
    if v == 0 || gcd(v, q0) > 1 {
        return ExactRational::zero();
    }
    let mu = mobius(v);
    if mu == 0 {
        return ExactRational::zero();
    }
    let num = BigInt::from(mu) * BigInt::from(ramanujan_sum(v, m));
    let phi = BigInt::from(euler_phi(v));
    ExactRational::new(num, phi.pow(3))
}

/// A numeric value together with a symmetric error radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed {
    pub value: f64,
    pub radius: f64,
}

impl Bracketed {
    pub fn exact(value: f64) -> Self {
        Bracketed { value, radius: 0.0 }
    }

    pub fn lower(&self) -> f64 {
        self.value - self.radius
    }

    pub fn upper(&self) -> f64 {
        self.value + self.radius
    }

    pub fn is_positive(&self) -> bool {
        self.lower() > 0.0
    }
}

/// Truncated Euler product for the h-series:
/// `prod_{p <= cutoff, p ∤ q0}` of `1 - 1/(p-1)^2` at primes dividing m and
/// `1 + 1/(p-1)^3` elsewhere, with a multiplicative tail bracket from
/// integral comparison.
pub fn hsum(m: u64, q0: u64, cutoff: u64) -> Result<Bracketed> {
    if cutoff < 100 {
        return Err(Error::InvalidParameter(format!(
            "Euler cutoff must be at least 100, got {cutoff}"
        )));
    }
    let mut value = 1.0f64;
    for p in crate::arith::primes_up_to(cutoff) {
        if q0.is_multiple_of(p) {
            continue;
        }
        let pm1 = (p - 1) as f64;
        if m.is_multiple_of(p) {
            value *= 1.0 - 1.0 / (pm1 * pm1);
        } else {
            value *= 1.0 + 1.0 / (pm1 * pm1 * pm1);
        }
    }
    // tail over n > cutoff: sum 1/(n-1)^2 <= 1/(cutoff-1),
    // sum 1/(n-1)^3 <= 1/(2 (cutoff-1)^2)
    let c = (cutoff - 1) as f64;
    let lo_mult = (-2.0 / c).exp();
    let hi_mult = (0.5 / (c * c)).exp();
    let lo = value.min(value * lo_mult).min(value * hi_mult);
    let hi = value.max(value * lo_mult).max(value * hi_mult);
    Ok(Bracketed {
        value: 0.5 * (lo + hi),
        radius: 0.5 * (hi - lo),
    })
}

/// Nested-sum route for the combinatorial constant over a basis prefix:
/// `sum over (t_1..t_b) in {0..3}^b of prod C(3, t_i) / phi(p_i)^{t_i}`.
pub fn combinatorial_c_nested(primes: &[u64]) -> ExactRational {
    let binom = [1u32, 3, 3, 1];
    let b = primes.len();
    let mut acc = ExactRational::zero();
    let mut tuple = vec![0usize; b];
    'outer: loop {
        let mut term = ExactRational::one();
        for (i, &t) in tuple.iter().enumerate() {
            let phi = BigInt::from(primes[i] - 1);
            term *= ExactRational::new(BigInt::from(binom[t]), phi.pow(t as u32));
        }
        acc += term;
        for slot in (0..b).rev() {
            tuple[slot] += 1;
            if tuple[slot] <= 3 {
                continue 'outer;
            }
            tuple[slot] = 0;
        }
        break;
    }
    acc
}

/// Closed form of the same constant: `(p_1 .. p_b)^3 / phi(p_1 .. p_b)^3`.
pub fn combinatorial_c_closed(primes: &[u64]) -> ExactRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for &p in primes {
        num *= BigInt::from(p);
        den *= BigInt::from(p - 1);
    }
    ExactRational::new(num.pow(3), den.pow(3))
}

/// The combinatorial constant, with the two routes cross-asserted.
pub fn combinatorial_c(primes: &[u64]) -> ExactRational {
    let nested = combinatorial_c_nested(primes);
    let closed = combinatorial_c_closed(primes);
    assert_eq!(
        nested, closed,
        "combinatorial identity failed on {primes:?}"
    );
    closed
}

/// Number of ordered residue triples from the cover summing to m modulo the
/// cover's prime, counted over unit residues or raw elements.
pub fn triple_count_mod_p(cover: &ResidueCover, m: u64, basis: ResidueBasis) -> u64 {
    let p = cover.prime;
    let set: &[u64] = match basis {
        ResidueBasis::Units => &cover.unit_residues,
        ResidueBasis::Raw => &cover.raw_elements,
    };
    let mut pair = vec![0u64; p as usize];
    for &r1 in set {
        for &r2 in set {
            pair[((r1 + r2) % p) as usize] += 1;
        }
    }
    let target = m % p;
    set.iter()
        .map(|&r3| pair[((target + p - r3 % p) % p) as usize])
        .sum()
}

/// The local factor `G(p) = p N_p(m) / phi(p)^3`, exact.
pub fn g_local(cover: &ResidueCover, m: u64, basis: ResidueBasis) -> ExactRational {
    let p = cover.prime;
    let n = triple_count_mod_p(cover, m, basis);
    ExactRational::new(
        BigInt::from(p) * BigInt::from(n),
        BigInt::from(p - 1).pow(3),
    )
}

/// Product route for the modulus-part series: `G(q0) = prod_p G(p)`.
pub fn g_product(m: u64, system: &AdmissibleSystem) -> ExactRational {
    system
        .covers
        .iter()
        .map(|c| g_local(c, m, ResidueBasis::Units))
        .product()
}

/// Exact floor of the modulus-part series when every local triple count is
/// at least one: `q0 / phi(q0)^3`.
pub fn local_product_floor(system: &AdmissibleSystem) -> ExactRational {
    let phi: BigInt = system.primes.iter().map(|&p| BigInt::from(p - 1)).product();
    ExactRational::new(BigInt::from(system.q0), phi.pow(3))
}

/// Closed form of one coefficient g(w) for squarefree `w | q0`, identified
/// by the subset of basis indices whose primes divide w:
/// `(prod_{j not in S} #R_j^3 / phi(q0)^3) prod_{j in S} (-#R_j^3 + p_j N_{p_j}(m))`.
pub fn g_closed(subset: &[usize], m: u64, system: &AdmissibleSystem) -> ExactRational {
    let mut num = BigInt::one();
    for (j, cover) in system.covers.iter().enumerate() {
        let size = BigInt::from(cover.unit_residues.len());
        if subset.contains(&j) {
            let p = BigInt::from(cover.prime);
            let hits = BigInt::from(triple_count_mod_p(cover, m, ResidueBasis::Units));
            num *= -size.pow(3) + p * hits;
        } else {
            num *= size.pow(3);
        }
    }
    let phi_q0: BigInt = system.primes.iter().map(|&p| BigInt::from(p - 1)).product();
    ExactRational::new(num, phi_q0.pow(3))
}

/// Numeric route for g(w) from the defining exponential sum; zero when w
/// does not divide q0.
pub fn g_direct(w: u64, m: u64, system: &AdmissibleSystem) -> f64 {
    let q0 = system.q0;
    if w == 0 || !q0.is_multiple_of(w) {
        return 0.0;
    }
    let rsum = residue_phase_table(system);
    let ratio = q0 / w;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..=w {
        if gcd(a, w) != 1 {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for (l, phase) in rsum.iter().enumerate() {
            let shifted = a as u128 * ratio as u128 + l as u128;
            let g = gcd_u128(q0 as u128, shifted);
            let w_mu = mu_over_phi(q0 / g as u64);
            if w_mu != 0.0 {
                inner += w_mu * phase;
            }
        }
        acc += e_neg(a as u128 * m as u128, w) * inner * inner * inner;
    }
    let value = acc / (q0 as f64).powi(3);
    assert!(
        value.im.abs() < 1e-9 * (1.0 + value.re.abs()),
        "g({w}) kept an imaginary part: {value}"
    );
    value.re
}

/// Defining-sum route for the modulus-part series: `sum_{w | q0} g(w)` with
/// every coefficient taken from its closed form. Exact, but restricted to
/// small bases.
pub fn g_sum_exact(m: u64, system: &AdmissibleSystem) -> Result<ExactRational> {
    let k = system.primes.len();
    if k > MAX_BASIS_FOR_G_SUM {
        return Err(Error::BasisTooLarge(format!(
            "defining-sum route handles at most {MAX_BASIS_FOR_G_SUM} basis primes, got {k}"
        )));
    }
    let mut acc = ExactRational::zero();
    for mask in 0u32..(1 << k) {
        let subset: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).collect();
        acc += g_closed(&subset, m, system);
    }
    Ok(acc)
}

/// Numeric companion of `g_sum_exact` built from the defining exponential
/// sums, for cross-checking.
pub fn g_sum_numeric(m: u64, system: &AdmissibleSystem) -> f64 {
    divisors(system.q0)
        .into_iter()
        .map(|w| g_direct(w, m, system))
        .sum()
}

/// The Dirichlet convolution `(g * h)(q)` assembled from the exact g and h
/// coefficients.
pub fn g_h_convolution(q: u64, m: u64, system: &AdmissibleSystem) -> ExactRational {
    let q0 = system.q0;
    let mut acc = ExactRational::zero();
    for c in divisors(q) {
        if !q0.is_multiple_of(c) {
            continue; // g vanishes off divisors of the squarefree modulus
        }
        let subset: Vec<usize> = factorize(c)
            .into_iter()
            .map(|(p, _)| {
                system
                    .primes
                    .iter()
                    .position(|&bp| bp == p)
                    .expect("divisor prime is in the basis")
            })
            .collect();
        let h = h_eval(q / c, m, q0);
        if !h.is_zero() {
            acc += g_closed(&subset, m, system) * h;
        }
    }
    acc
}

/// The assembled density `sigma = G(q0) * sum_v h(v)`, with the Euler-tail
/// radius scaled through.
///
/// For odd m the lower bracket is checked positive and G(q0) is checked
/// against its exact floor `q0 / phi(q0)^3`; even m with an even modulus
/// yields an exact zero.
pub fn sigma(m: u64, system: &AdmissibleSystem, cutoff: u64) -> Result<Bracketed> {
    let g = g_product(m, system);
    if g.is_zero() {
        assert!(
            m.is_multiple_of(2) || !system.q0.is_multiple_of(2),
            "vanishing local product for odd m"
        );
        return Ok(Bracketed::exact(0.0));
    }
    let h = hsum(m, system.q0, cutoff)?;
    let g_f = rational_to_f64(&g);
    let value = g_f * h.value;
    let radius = g_f.abs() * h.radius;
    let out = Bracketed { value, radius };
    if m % 2 == 1 {
        assert!(
            g >= local_product_floor(system),
            "local product below its exact floor"
        );
        assert!(out.is_positive(), "density not positive for odd m={m}");
    }
    Ok(out)
}

/// The window-profiled density `sigma' = sigma * H(m, u) / u^2` for targets
/// m in [4u, 5u]; the predicted main term is `u^2 sigma'`.
pub fn sigma_prime(m: u64, u: u64, system: &AdmissibleSystem, cutoff: u64) -> Result<Bracketed> {
    let h = profile_h(m, u)?;
    let base = sigma(m, system, cutoff)?;
    let scale = h / (u as f64 * u as f64);
    Ok(Bracketed {
        value: base.value * scale,
        radius: base.radius * scale,
    })
}

/// Reusable evaluator of the truncated h-series Euler product: the
/// all-coprime base product is computed once and per-target prime divisors
/// swap their factor in.
#[derive(Debug, Clone)]
pub struct HsumCache {
    q0: u64,
    cutoff: u64,
    primes: Vec<u64>,
    base: f64,
    lo_mult: f64,
    hi_mult: f64,
}

impl HsumCache {
    pub fn new(q0: u64, cutoff: u64) -> Result<Self> {
        if cutoff < 100 {
            return Err(Error::InvalidParameter(format!(
                "Euler cutoff must be at least 100, got {cutoff}"
            )));
        }
        let primes = crate::arith::primes_up_to(cutoff);
        let mut base = 1.0f64;
        for &p in &primes {
            if !q0.is_multiple_of(p) {
                let pm1 = (p - 1) as f64;
                base *= 1.0 + 1.0 / (pm1 * pm1 * pm1);
            }
        }
        let c = (cutoff - 1) as f64;
        Ok(HsumCache {
            q0,
            cutoff,
            primes,
            base,
            lo_mult: (-2.0 / c).exp(),
            hi_mult: (0.5 / (c * c)).exp(),
        })
    }

    pub fn eval(&self, m: u64) -> Bracketed {
        let mut value = self.base;
        let mut rest = m;
        for &p in &self.primes {
            if p * p > rest {
                break;
            }
            if rest.is_multiple_of(p) {
                while rest.is_multiple_of(p) {
                    rest /= p;
                }
                if !self.q0.is_multiple_of(p) {
                    value *= divisor_swap(p);
                }
            }
        }
        // the leftover is prime; beyond the cutoff it was never in the
        // truncated product to begin with
        if rest > 1 && rest <= self.cutoff && !self.q0.is_multiple_of(rest) {
            value *= divisor_swap(rest);
        }
        let lo = (value * self.lo_mult).min(value * self.hi_mult).min(value);
        let hi = (value * self.lo_mult).max(value * self.hi_mult).max(value);
        Bracketed {
            value: 0.5 * (lo + hi),
            radius: 0.5 * (hi - lo),
        }
    }
}

/// Replace the generic factor `1 + 1/(p-1)^3` by the divisor factor
/// `1 - 1/(p-1)^2`.
#[inline]
fn divisor_swap(p: u64) -> f64 {
    let pm1 = (p - 1) as f64;
    (1.0 - 1.0 / (pm1 * pm1)) / (1.0 + 1.0 / (pm1 * pm1 * pm1))
}

/// Batched density evaluator for sweeps over many targets: the local product
/// only depends on the target's residue class, the h-series only on its
/// prime divisors, so both are cached.
#[derive(Debug, Clone)]
pub struct DensityEvaluator {
    q0: u64,
    /// Local product per residue class; `None` encodes an exact zero.
    g_by_residue: Vec<Option<f64>>,
    hsum: HsumCache,
}

impl DensityEvaluator {
    pub fn new(system: &AdmissibleSystem, cutoff: u64) -> Result<Self> {
        let q0 = system.q0;
        let g_by_residue = (0..q0)
            .map(|r| {
                let g = g_product(r, system);
                if g.is_zero() {
                    None
                } else {
                    Some(rational_to_f64(&g))
                }
            })
            .collect();
        Ok(DensityEvaluator {
            q0,
            g_by_residue,
            hsum: HsumCache::new(q0, cutoff)?,
        })
    }

    pub fn sigma(&self, m: u64) -> Bracketed {
        match self.g_by_residue[(m % self.q0) as usize] {
            None => Bracketed::exact(0.0),
            Some(g) => {
                let h = self.hsum.eval(m);
                Bracketed {
                    value: g * h.value,
                    radius: g.abs() * h.radius,
                }
            }
        }
    }

    pub fn sigma_prime(&self, m: u64, u: u64) -> Result<Bracketed> {
        let h = profile_h(m, u)?;
        let base = self.sigma(m);
        let scale = h / (u as f64 * u as f64);
        Ok(Bracketed {
            value: base.value * scale,
            radius: base.radius * scale,
        })
    }
}

/// Convert an exact rational to f64 through a quotient of big integers,
/// keeping about 30 significant digits before the division.
pub fn rational_to_f64(r: &ExactRational) -> f64 {
    // to_f64 on BigRational can overflow intermediate conversions for very
    // large numerators; scale manually instead
    let num = r.numer();
    let den = r.denom();
    match (num.to_f64(), den.to_f64()) {
        (Some(n), Some(d)) if d.is_finite() && n.is_finite() => n / d,
        _ => {
            let shift = (num.bits().max(den.bits()) as i64 - 500).max(0) as u64;
            let n = (num >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (den >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}
