//! Constructive three-term decomposition: every residue class modulo a basis
//! prime is a sum of three elements of that prime's raw cover set. The
//! witness is produced deterministically from the base-a digits of the
//! target, following a fixed case analysis on which digits vanish.

use crate::residue_system::ResidueCover;

/// Base-a digits of a working target: `value = w2*a^2 + w1*a + w0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitTriple {
    pub w2: u64,
    pub w1: u64,
    pub w0: u64,
}

impl DigitTriple {
    /// Digits of `n` in base `a`; requires `n < a^3`.
    pub fn of(n: u64, a: u64) -> Self {
        debug_assert!(n < a * a * a);
        DigitTriple {
            w2: n / (a * a),
            w1: (n / a) % a,
            w0: n % a,
        }
    }

    /// Reassemble the represented value.
    pub fn value(&self, a: u64) -> u64 {
        self.w2 * a * a + self.w1 * a + self.w0
    }
}

/// Write `n` (any integer, reduced mod p internally) as a sum of three raw
/// cover elements, congruent to `n` modulo the cover's prime.
///
/// The branching is fixed: targets are taken in [1, p], split by how many
/// base-a digits vanish, and a target of the form `w0 <= 2` is shifted by
/// `+p` once and re-expanded (the shift cannot recur). The returned triple
/// always sums to the working target exactly, so the congruence holds with
/// no further reduction.
pub fn decompose(n: i64, cover: &ResidueCover) -> (u64, u64, u64) {
    let p = cover.prime;
    let a = cover.basis.base;
    // representative in [1, p]
    let mut t = n.rem_euclid(p as i64) as u64;
    if t == 0 {
        t = p;
    }

    let triple = loop {
        let d = DigitTriple::of(t, a);
        let zeros = [d.w2, d.w1, d.w0].iter().filter(|&&w| w == 0).count();
        match zeros {
            0 => break case_all_nonzero(d, a),
            1 => break case_one_zero(d, a),
            _ => {
                if let Some(triple) = case_two_zeros(d, a, p) {
                    break triple;
                }
                // w0 in {1, 2} with both higher digits zero: shift by p and
                // re-expand; a^3 >= p + 7 keeps the digits in range
                t += p;
            }
        }
    };

    debug_assert!({
        let (r1, r2, r3) = triple;
        let member = |e| cover.raw_elements.binary_search(&e).is_ok();
        member(r1)
            && member(r2)
            && member(r3)
            && (r1 + r2 + r3) % p == n.rem_euclid(p as i64) as u64 % p
    });
    triple
}

fn case_all_nonzero(d: DigitTriple, a: u64) -> (u64, u64, u64) {
    (d.w0, d.w1 * a, d.w2 * a * a)
}

fn case_one_zero(d: DigitTriple, a: u64) -> (u64, u64, u64) {
    let aa = a * a;
    if d.w0 == 0 {
        // n = w2 a^2 + w1 a
        if d.w1 >= 2 {
            (a, (d.w1 - 1) * a, d.w2 * aa)
        } else if d.w2 >= 2 {
            (a, aa, (d.w2 - 1) * aa)
        } else {
            // a^2 + a = (a-1)a + a + a
            ((a - 1) * a, a, a)
        }
    } else if d.w1 == 0 {
        // n = w2 a^2 + w0
        if d.w0 >= 2 {
            (1, d.w0 - 1, d.w2 * aa)
        } else if d.w2 >= 2 {
            (1, aa, (d.w2 - 1) * aa)
        } else {
            // a^2 + 1 = (a-1)a + a + 1
            (1, a, (a - 1) * a)
        }
    } else {
        // w2 == 0, n = w1 a + w0
        if d.w0 >= 2 {
            (1, d.w0 - 1, d.w1 * a)
        } else if d.w1 >= 2 {
            (1, a, (d.w1 - 1) * a)
        } else {
            // a + 1 = (a-1) + 1 + 1
            (1, 1, a - 1)
        }
    }
}

/// Exactly two digits vanish. Returns `None` for the shifted sub-case
/// (`w0 <= 2` alone), which the caller retries with target `+ p`.
fn case_two_zeros(d: DigitTriple, a: u64, p: u64) -> Option<(u64, u64, u64)> {
    let aa = a * a;
    if d.w2 > 0 {
        // n = w2 a^2
        Some(if d.w2 >= 3 {
            (aa, aa, (d.w2 - 2) * aa)
        } else if d.w2 == 2 {
            (a, (a - 1) * a, aa)
        } else if p > 8 {
            (a, a, (a - 2) * a)
        } else {
            // a^2 = (a-1)a + (a-1) + 1 exactly
            (1, a - 1, (a - 1) * a)
        })
    } else if d.w1 > 0 {
        // n = w1 a
        Some(if d.w1 >= 3 {
            (a, a, (d.w1 - 2) * a)
        } else if d.w1 == 2 {
            (1, a - 1, a)
        } else {
            (1, 1, a - 2)
        })
    } else {
        // n = w0
        if d.w0 >= 3 {
            Some((1, 1, d.w0 - 2))
        } else {
            None
        }
    }
}

/// Residue classes modulo the cover's prime reachable as a sum of three
/// elements of the chosen set (raw integers or unit residues), sorted.
pub fn covered_classes(cover: &ResidueCover, use_units: bool) -> Vec<u64> {
    let p = cover.prime;
    let set: Vec<u64> = if use_units {
        cover.unit_residues.clone()
    } else {
        // distinct residues of the raw elements; sums only depend on these
        let mut v: Vec<u64> = cover.raw_elements.iter().map(|&e| e % p).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut hit = vec![false; p as usize];
    for &r1 in &set {
        for &r2 in &set {
            for &r3 in &set {
                hit[((r1 + r2 + r3) % p) as usize] = true;
            }
        }
    }
    (0..p).filter(|&c| hit[c as usize]).collect()
}

/// Whether every residue class modulo the prime is a sum of three elements
/// of the chosen set.
pub fn cover_check(cover: &ResidueCover, use_units: bool) -> bool {
    covered_classes(cover, use_units).len() as u64 == cover.prime
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;
    use crate::residue_system::build_cover;

    /// Brute-force oracle: search raw^3 for any triple summing to n mod p.
    fn oracle_exists(n: u64, cover: &ResidueCover) -> bool {
        let p = cover.prime;
        for &r1 in &cover.raw_elements {
            for &r2 in &cover.raw_elements {
                for &r3 in &cover.raw_elements {
                    if (r1 + r2 + r3) % p == n % p {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn assert_valid(n: i64, cover: &ResidueCover) {
        let (r1, r2, r3) = decompose(n, cover);
        let p = cover.prime;
        for r in [r1, r2, r3] {
            assert!(
                cover.raw_elements.contains(&r),
                "p={p}, n={n}: {r} not a raw element"
            );
        }
        assert_eq!(
            (r1 + r2 + r3) % p,
            n.rem_euclid(p as i64) as u64 % p,
            "p={p}, n={n}: bad sum {r1}+{r2}+{r3}"
        );
    }

    #[test]
    fn worked_witnesses() {
        let c7 = build_cover(7).unwrap();
        assert!(oracle_exists(6, &c7));
        assert_valid(6, &c7);
        assert!(oracle_exists(0, &c7));
        assert_valid(0, &c7);
        let c2 = build_cover(2).unwrap();
        assert_eq!(decompose(1, &c2), (1, 1, 1));
    }

    #[test]
    fn all_classes_all_primes_to_97() {
        for p in primes_up_to(97) {
            let cover = build_cover(p).unwrap();
            for n in 0..p {
                assert!(oracle_exists(n, &cover), "oracle refutes p={p}, n={n}");
                assert_valid(n as i64, &cover);
            }
        }
    }

    #[test]
    fn decompose_is_deterministic_and_total_on_negatives() {
        let cover = build_cover(13).unwrap();
        for n in -40i64..40 {
            let first = decompose(n, &cover);
            assert_eq!(first, decompose(n, &cover));
        }
    }

    #[test]
    fn cover_check_raw_true_to_97() {
        for p in primes_up_to(97) {
            let cover = build_cover(p).unwrap();
            assert!(cover_check(&cover, false), "raw cover fails at p={p}");
        }
    }

    #[test]
    fn unit_cover_gap_at_two() {
        let c2 = build_cover(2).unwrap();
        assert!(cover_check(&c2, false));
        assert!(!cover_check(&c2, true));
        assert_eq!(covered_classes(&c2, true), vec![1]);
        // three odd numbers sum to an odd number, so odd targets are fine
        let c3 = build_cover(3).unwrap();
        assert!(cover_check(&c3, true));
    }
}
