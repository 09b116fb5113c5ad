//! Sieving the window [u, 2u]: a segmented prime sieve, von Mangoldt weights,
//! the congruence-filtered weight array, and the restricted prime set with
//! its sparsity report.

use crate::arith::primes_up_to;
use crate::error::{Error, Result};
use crate::residue_system::AdmissibleSystem;

/// Cap on the window length; one window costs two f64 arrays of u+1 entries.
pub const MAX_WINDOW_START: u64 = 1 << 24;

/// Primes in [lo, hi] by a segmented sieve with base primes up to sqrt(hi).
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || hi < lo {
        return Vec::new();
    }
    let lo = lo.max(2);
    let base = primes_up_to((hi as f64).sqrt() as u64 + 1);
    let len = (hi - lo + 1) as usize;
    let mut composite = vec![false; len];
    for &p in &base {
        let first = (lo.div_ceil(p) * p).max(p * p);
        let mut k = first;
        while k <= hi {
            composite[(k - lo) as usize] = true;
            k += p;
        }
    }
    (lo..=hi)
        .filter(|&k| !composite[(k - lo) as usize] && k >= 2)
        .collect()
}

/// Von Mangoldt weights over [u, 2u]: `log p` at prime powers `p^r`, zero
/// elsewhere. Index i holds the weight of k = u + i.
pub fn sieve_lambda(u: u64) -> Result<Vec<f64>> {
    sieve_lambda_with_cap(u, MAX_WINDOW_START)
}

/// As `sieve_lambda` with an explicit cap on the window start.
pub fn sieve_lambda_with_cap(u: u64, cap: u64) -> Result<Vec<f64>> {
    if u < 2 {
        return Err(Error::WindowTooSmall { u, min: 2 });
    }
    if u > cap {
        return Err(Error::WindowTooLarge { u, cap });
    }
    let hi = 2 * u;
    let mut values = vec![0.0f64; (u + 1) as usize];
    for p in primes_in_range(u, hi) {
        values[(p - u) as usize] = (p as f64).ln();
    }
    // proper prime powers: p <= sqrt(2u) suffices since r >= 2
    for p in primes_up_to((hi as f64).sqrt() as u64 + 1) {
        let mut pk = p * p;
        while pk <= hi {
            if pk >= u {
                values[(pk - u) as usize] = (p as f64).ln();
            }
            match pk.checked_mul(p) {
                Some(next) => pk = next,
                None => break,
            }
        }
    }
    Ok(values)
}

/// The congruence-filtered weight array over [u, 2u] together with the raw
/// von Mangoldt weights it was filtered from. Immutable after construction.
#[derive(Debug, Clone)]
pub struct WeightedWindow {
    pub u: u64,
    /// Unfiltered von Mangoldt weights; index i holds k = u + i.
    pub lambda: Vec<f64>,
    /// Weights surviving the admissible-residue filter.
    pub values: Vec<f64>,
    pub system: AdmissibleSystem,
}

impl WeightedWindow {
    /// Sieve [u, 2u] and apply the residue filter of `system`.
    pub fn build(system: &AdmissibleSystem, u: u64) -> Result<Self> {
        let lambda = sieve_lambda(u)?;
        let values = lambda
            .iter()
            .enumerate()
            .map(|(i, &w)| if system.admits(u + i as u64) { w } else { 0.0 })
            .collect();
        Ok(WeightedWindow {
            u,
            lambda,
            values,
            system: system.clone(),
        })
    }

    /// Number of entries (u + 1: both endpoints included).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Filtered weight at k, zero outside [u, 2u].
    pub fn value_at(&self, k: u64) -> f64 {
        if k < self.u || k > 2 * self.u {
            0.0
        } else {
            self.values[(k - self.u) as usize]
        }
    }

    /// Sum of the filtered weights (the exponential sum at phase zero).
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// The restricted prime set: primes p in [u, 2u] with `p mod q0` in the
/// admissible residue set, ascending. May be empty at tiny u.
pub fn restricted_set(system: &AdmissibleSystem, u: u64) -> Result<Vec<u64>> {
    if u > MAX_WINDOW_START {
        return Err(Error::WindowTooLarge {
            u,
            cap: MAX_WINDOW_START,
        });
    }
    Ok(primes_in_range(u, 2 * u)
        .into_iter()
        .filter(|&p| system.admits(p))
        .collect())
}

/// Counting report for the restricted set against the trivial
/// arithmetic-progression bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityReport {
    pub count: u64,
    /// Trivial bound `(u/q0 + 1) * #residues`: each admissible class meets
    /// [u, 2u] in at most u/q0 + 1 integers.
    pub bound: f64,
    /// Prime-density diagnostic `count * phi(q0) / ((u / log u) * #residues)`;
    /// near 1 when the restricted primes equidistribute over unit classes.
    pub equidistribution_ratio: f64,
}

/// Count the restricted set and compare with the trivial progression bound.
pub fn sparsity_report(system: &AdmissibleSystem, u: u64) -> Result<SparsityReport> {
    let count = restricted_set(system, u)?.len() as u64;
    let r0 = system.residue_count() as f64;
    let bound = (u as f64 / system.q0 as f64 + 1.0) * r0;
    assert!(
        count as f64 <= bound,
        "restricted count {count} exceeds the trivial bound {bound}"
    );
    let phi_q0: u64 = system.primes.iter().map(|p| p - 1).product();
    let expected = (u as f64 / (u as f64).ln()) * r0 / phi_q0 as f64;
    let equidistribution_ratio = if expected > 0.0 {
        count as f64 / expected
    } else {
        0.0
    };
    Ok(SparsityReport {
        count,
        bound,
        equidistribution_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;
    use crate::residue_system::{build_system, ConstructionParams};

    fn system(basis: Vec<u64>) -> AdmissibleSystem {
        build_system(&ConstructionParams::new(1, 100).with_basis(basis)).unwrap()
    }

    /// Trial-division oracle for the von Mangoldt function.
    fn lambda_oracle(k: u64) -> f64 {
        if k < 2 {
            return 0.0;
        }
        let mut n = k;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                while n.is_multiple_of(p) {
                    n /= p;
                }
                return if n == 1 { (p as f64).ln() } else { 0.0 };
            }
            p += 1;
        }
        (k as f64).ln()
    }

    #[test]
    fn lambda_point_values() {
        let v = sieve_lambda(4).unwrap(); // covers [4, 8]
        assert_eq!(v[8 - 4], 2f64.ln(), "8 = 2^3");
        assert_eq!(v[7 - 4], 7f64.ln());
        assert_eq!(v[6 - 4], 0.0);
        assert_eq!(v[4 - 4], 2f64.ln(), "4 = 2^2");
        assert_eq!(v[5 - 4], 5f64.ln());
    }

    #[test]
    fn lambda_matches_trial_division_sample() {
        let u = 5000;
        let v = sieve_lambda(u).unwrap();
        // deterministic stride sample of about 1% of the window
        for i in (0..v.len()).step_by(97) {
            let k = u + i as u64;
            assert!(
                (v[i] - lambda_oracle(k)).abs() < 1e-12,
                "Lambda({k}) = {} vs oracle {}",
                v[i],
                lambda_oracle(k)
            );
        }
    }

    #[test]
    fn restricted_set_examples() {
        let sys2 = system(vec![2]);
        assert_eq!(restricted_set(&sys2, 10).unwrap(), vec![11, 13, 17, 19]);
        assert_eq!(restricted_set(&sys2, 2).unwrap(), vec![3]);
        let sys6 = system(vec![2, 3]);
        assert_eq!(restricted_set(&sys6, 10).unwrap(), vec![11, 13, 17, 19]);
    }

    #[test]
    fn restricted_set_members_are_prime() {
        let sys = system(vec![2, 3, 5]);
        let set = restricted_set(&sys, 10_000).unwrap();
        assert!(!set.is_empty());
        for &p in set.iter().step_by(61) {
            assert!(is_prime(p), "{p} in restricted set but composite");
        }
        assert!(set.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn window_filter_zeroes_excluded_classes() {
        let sys = system(vec![2]);
        let w = WeightedWindow::build(&sys, 10).unwrap();
        // 16 = 2^4 has positive weight but lies in the excluded class mod 2
        assert_eq!(w.lambda[6], 2f64.ln());
        assert_eq!(w.value_at(16), 0.0);
        assert_eq!(w.value_at(11), 11f64.ln());
        assert_eq!(w.value_at(15), 0.0, "15 = 3*5 is odd but not a prime power");
        assert_eq!(w.len(), 11);
    }

    #[test]
    fn sparsity_bounds() {
        let sys2 = system(vec![2]);
        let rep = sparsity_report(&sys2, 10).unwrap();
        assert_eq!(rep.count, 4);
        assert!((rep.bound - 6.0).abs() < 1e-12);

        let sys6 = system(vec![2, 3]);
        let rep = sparsity_report(&sys6, 10).unwrap();
        assert_eq!(rep.count, 4);
        assert!((rep.bound - (10.0 / 6.0 + 1.0) * 2.0).abs() < 1e-12);

        // an empty restricted window still satisfies the bound
        let rep = sparsity_report(&sys6, 5).unwrap();
        assert!(rep.count as f64 <= rep.bound);
    }

    #[test]
    fn equidistribution_diagnostic_at_scale() {
        for basis in [vec![2], vec![2, 3], vec![2, 3, 5]] {
            let sys = system(basis);
            let rep = sparsity_report(&sys, 100_000).unwrap();
            assert!(
                rep.equidistribution_ratio > 0.7 && rep.equidistribution_ratio < 1.4,
                "ratio {} out of the diagnostic band for q0={}",
                rep.equidistribution_ratio,
                sys.q0
            );
        }
    }

    #[test]
    fn window_cap_enforced() {
        assert!(matches!(
            sieve_lambda_with_cap(1 << 20, 1 << 16),
            Err(Error::WindowTooLarge { .. })
        ));
        assert!(matches!(sieve_lambda(1), Err(Error::WindowTooSmall { .. })));
    }
}
