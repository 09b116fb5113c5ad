//! Ordered ternary representation counts over a window [u, 2u]: the weighted
//! count (triple convolution of the filtered von Mangoldt array), the
//! unweighted prime-triple count, the geometric main-term profile, and the
//! window verification that every odd target has a representation.

use crate::error::{Error, Result};
use crate::residue_system::AdmissibleSystem;
use crate::restricted_primes::{restricted_set, WeightedWindow};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Window length below which the quadratic convolution is used; above it the
/// transform path wins. Both paths are exercised against each other in tests.
pub const DIRECT_CONVOLUTION_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionStrategy {
    /// Direct below `DIRECT_CONVOLUTION_LIMIT`, transform above.
    Auto,
    Direct,
    Transform,
}

/// Linear convolution of two real arrays, quadratic time, fixed summation
/// order within each output cell.
pub fn convolve_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Triple self-convolution: output index s holds
/// `sum_{i+j+k=s} xs[i] xs[j] xs[k]`, length `3 len - 2`.
pub fn triple_self_convolution(xs: &[f64], strategy: ConvolutionStrategy) -> Vec<f64> {
    if xs.is_empty() {
        return Vec::new();
    }
    let use_direct = match strategy {
        ConvolutionStrategy::Direct => true,
        ConvolutionStrategy::Transform => false,
        ConvolutionStrategy::Auto => xs.len() < DIRECT_CONVOLUTION_LIMIT,
    };
    if use_direct {
        let pair = convolve_direct(xs, xs);
        convolve_direct(&pair, xs)
    } else {
        triple_self_convolution_fft(xs)
    }
}

/// Transform path: pad to a power of two, cube the spectrum, invert.
fn triple_self_convolution_fft(xs: &[f64]) -> Vec<f64> {
    let out_len = 3 * xs.len() - 2;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let mut buf: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(size, Complex64::new(0.0, 0.0));
    forward.process(&mut buf);
    for v in buf.iter_mut() {
        *v = *v * *v * *v;
    }
    inverse.process(&mut buf);
    let scale = 1.0 / size as f64;
    buf[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Geometric profile of the main term for targets m in [4u, 5u]:
/// `u^2 - ((m - 4u)^2 + (5u - m)^2) / 2`.
pub fn profile_h(m: u64, u: u64) -> Result<f64> {
    if m < 4 * u || m > 5 * u {
        return Err(Error::OutOfRange {
            value: m,
            lo: 4 * u,
            hi: 5 * u,
        });
    }
    let uf = u as f64;
    let left = (m - 4 * u) as f64;
    let right = (5 * u - m) as f64;
    Ok(uf * uf - 0.5 * (left * left + right * right))
}

/// Representation counts for every target m in [3u, 6u].
#[derive(Debug, Clone)]
pub struct CountProfile {
    pub u: u64,
    /// Weighted ordered count, index m - 3u.
    pub weighted: Vec<f64>,
    /// Unweighted ordered prime-triple count, index m - 3u.
    pub unweighted: Vec<u64>,
    /// Rounding-error budget for a weighted cell: n * eps * max^3.
    pub weighted_error_bound: f64,
}

impl CountProfile {
    pub fn m_lo(&self) -> u64 {
        3 * self.u
    }

    pub fn m_hi(&self) -> u64 {
        6 * self.u
    }

    pub fn weighted_at(&self, m: u64) -> f64 {
        if m < self.m_lo() || m > self.m_hi() {
            0.0
        } else {
            self.weighted[(m - self.m_lo()) as usize]
        }
    }

    pub fn unweighted_at(&self, m: u64) -> u64 {
        if m < self.m_lo() || m > self.m_hi() {
            0
        } else {
            self.unweighted[(m - self.m_lo()) as usize]
        }
    }
}

/// Weighted ordered representation counts: index m - 3u over m in [3u, 6u].
pub fn count_weighted(window: &WeightedWindow, strategy: ConvolutionStrategy) -> Vec<f64> {
    triple_self_convolution(&window.values, strategy)
        .into_iter()
        .map(|v| if v.abs() < 1e-12 { 0.0 } else { v })
        .collect()
}

/// Unweighted ordered prime-triple counts over the restricted set, exact.
///
/// The two convolution stages are rounded back to integers; counts are far
/// below the 2^53 integer range so the rounding is exact.
pub fn count_unweighted(primes: &[u64], u: u64, strategy: ConvolutionStrategy) -> Vec<u64> {
    let len = (u + 1) as usize;
    let mut indicator = vec![0.0f64; len];
    for &p in primes {
        assert!(
            p >= u && p <= 2 * u,
            "prime {p} outside window [{u}, {}]",
            2 * u
        );
        indicator[(p - u) as usize] = 1.0;
    }
    let use_direct = match strategy {
        ConvolutionStrategy::Direct => true,
        ConvolutionStrategy::Transform => false,
        ConvolutionStrategy::Auto => len < DIRECT_CONVOLUTION_LIMIT,
    };
    let rounded = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter()
            .map(|x| {
                let r = x.round();
                debug_assert!((x - r).abs() < 0.25, "convolution drift {x}");
                r
            })
            .collect()
    };
    let pair = if use_direct {
        convolve_direct(&indicator, &indicator)
    } else {
        rounded(convolve_real_fft(&indicator, &indicator))
    };
    let triple = if use_direct {
        convolve_direct(&pair, &indicator)
    } else {
        rounded(convolve_real_fft(&pair, &indicator))
    };
    triple.into_iter().map(|x| x.round() as u64).collect()
}

/// Linear convolution via the transform, for the integer counting path.
fn convolve_real_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(size, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(size, Complex64::new(0.0, 0.0));
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inverse.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Build both count profiles for a system and window.
pub fn build_profile(
    system: &AdmissibleSystem,
    u: u64,
    strategy: ConvolutionStrategy,
) -> Result<CountProfile> {
    let window = WeightedWindow::build(system, u)?;
    let primes = restricted_set(system, u)?;
    let weighted = count_weighted(&window, strategy);
    let unweighted = count_unweighted(&primes, u, strategy);
    let max = window.values.iter().cloned().fold(0.0f64, f64::max);
    let weighted_error_bound = window.len() as f64 * f64::EPSILON * max.powi(3);
    Ok(CountProfile {
        u,
        weighted,
        unweighted,
        weighted_error_bound,
    })
}

/// Odd targets m in [4u, 5u] with no ordered prime-triple representation.
/// `unweighted` is indexed by m - 3u as produced by `count_unweighted`.
pub fn failing_odd_m(unweighted: &[u64], u: u64) -> Vec<u64> {
    let lo = 3 * u;
    (4 * u..=5 * u)
        .filter(|m| m % 2 == 1)
        .filter(|&m| {
            let idx = (m - lo) as usize;
            idx >= unweighted.len() || unweighted[idx] == 0
        })
        .collect()
}

/// End-to-end window verification: build the profile and list the failing
/// odd targets. An empty list is success.
pub fn verify_window(system: &AdmissibleSystem, u: u64) -> Result<Vec<u64>> {
    let profile = build_profile(system, u, ConvolutionStrategy::Auto)?;
    Ok(failing_odd_m(&profile.unweighted, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residue_system::{build_system, ConstructionParams};

    fn system(basis: Vec<u64>) -> AdmissibleSystem {
        build_system(&ConstructionParams::new(1, 100).with_basis(basis)).unwrap()
    }

    /// Exhaustive oracle: loop over all ordered triples of window entries.
    fn weighted_oracle(window: &WeightedWindow, m: u64) -> f64 {
        let u = window.u;
        let mut acc = 0.0;
        for k1 in u..=2 * u {
            for k2 in u..=2 * u {
                for k3 in u..=2 * u {
                    if k1 + k2 + k3 == m {
                        acc += window.value_at(k1) * window.value_at(k2) * window.value_at(k3);
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn profile_h_endpoints() {
        let u = 40u64;
        let uf = u as f64;
        assert_eq!(profile_h(4 * u, u).unwrap(), 0.5 * uf * uf);
        assert_eq!(profile_h(5 * u, u).unwrap(), 0.5 * uf * uf);
        // midpoint 4.5u needs even u
        assert_eq!(profile_h(9 * u / 2, u).unwrap(), 0.75 * uf * uf);
        assert!(profile_h(4 * u - 1, u).is_err());
        assert!(profile_h(5 * u + 1, u).is_err());
    }

    #[test]
    fn profile_h_bounds_across_range() {
        let u = 137u64;
        let uf = u as f64;
        for m in 4 * u..=5 * u {
            let h = profile_h(m, u).unwrap();
            assert!(h >= 0.5 * uf * uf - 1e-9);
            assert!(h <= 0.75 * uf * uf + 1e-9);
        }
    }

    #[test]
    fn weighted_counts_match_exhaustive_oracle() {
        let sys = system(vec![2]);
        let window = WeightedWindow::build(&sys, 10).unwrap();
        let counts = count_weighted(&window, ConvolutionStrategy::Direct);

        // frozen from the oracle: triples over {11,13,17,19}
        let expect_43 =
            6.0 * 11f64.ln() * 13f64.ln() * 19f64.ln() + 3.0 * 13f64.ln() * 13f64.ln() * 17f64.ln();
        assert!((expect_43 - 164.58).abs() < 0.05, "sanity on the magnitude");
        let got_43 = counts[(43 - 30) as usize];
        assert!((got_43 - expect_43).abs() < 1e-9 * expect_43);
        assert!((got_43 - weighted_oracle(&window, 43)).abs() < 1e-9 * got_43.abs());

        // minimum restricted sum is 33 = 3 * 11
        assert_eq!(counts[(32 - 30) as usize], 0.0);
        let got_33 = counts[(33 - 30) as usize];
        assert!((got_33 - 11f64.ln().powi(3)).abs() < 1e-9 * got_33);

        for m in 30..=60u64 {
            let got = counts[(m - 30) as usize];
            let want = weighted_oracle(&window, m);
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "m={m}: {got} vs oracle {want}"
            );
        }
    }

    #[test]
    fn transform_matches_direct() {
        let sys = system(vec![2, 3]);
        for u in [20u64, 127, 200] {
            let window = WeightedWindow::build(&sys, u).unwrap();
            let direct = count_weighted(&window, ConvolutionStrategy::Direct);
            let transform = count_weighted(&window, ConvolutionStrategy::Transform);
            assert_eq!(direct.len(), transform.len());
            for (i, (d, t)) in direct.iter().zip(&transform).enumerate() {
                assert!(
                    (d - t).abs() <= 1e-9 * d.abs().max(1.0),
                    "u={u}, m={}: direct {d} vs transform {t}",
                    3 * u + i as u64
                );
            }
        }
    }

    #[test]
    fn unweighted_counts_examples() {
        let primes = vec![11, 13, 17, 19];
        let counts = count_unweighted(&primes, 10, ConvolutionStrategy::Direct);
        assert_eq!(
            counts[(43 - 30) as usize],
            9,
            "6 perms of 11+13+19, 3 of 13+13+17"
        );
        assert_eq!(counts[(33 - 30) as usize], 1, "11+11+11");
        assert_eq!(counts[(34 - 30) as usize], 0, "even target, odd primes");
        let transform = count_unweighted(&primes, 10, ConvolutionStrategy::Transform);
        assert_eq!(counts, transform);
    }

    #[test]
    fn parity_kills_even_targets() {
        let sys = system(vec![2]);
        let profile = build_profile(&sys, 50, ConvolutionStrategy::Auto).unwrap();
        for m in profile.m_lo()..=profile.m_hi() {
            if m % 2 == 0 {
                assert_eq!(profile.unweighted_at(m), 0, "even m={m} counted");
            }
        }
    }

    #[test]
    fn weighted_dominates_unweighted_by_log_cubed() {
        let sys = system(vec![2, 3]);
        let profile = build_profile(&sys, 60, ConvolutionStrategy::Auto).unwrap();
        let floor = (60f64).ln().powi(3);
        for m in profile.m_lo()..=profile.m_hi() {
            let unw = profile.unweighted_at(m);
            if unw > 0 {
                assert!(
                    profile.weighted_at(m) >= unw as f64 * floor * (1.0 - 1e-12),
                    "m={m}"
                );
            }
        }
    }

    #[test]
    fn verify_window_examples() {
        let sys = system(vec![2]);
        assert_eq!(verify_window(&sys, 10).unwrap(), Vec::<u64>::new());
        assert_eq!(verify_window(&sys, 2).unwrap(), Vec::<u64>::new());
        // degenerate: empty restricted set fails every odd target
        let failing = failing_odd_m(&[], 10);
        assert_eq!(failing, vec![41, 43, 45, 47, 49]);
    }
}
