//! Elementary number-theoretic helpers shared by the construction, counting
//! and series modules: integer cube roots, sieves, deterministic primality,
//! factorization, multiplicative functions, CRT composition and continued
//! fractions.

use num_integer::Integer;

/// Greatest common divisor of two `u64` values.
#[inline]
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Smallest `c` with `c^3 >= n`, i.e. the exact ceiling of the cube root.
///
/// Binary search on integers: floating-point cube roots misround near
/// perfect cubes, which matters because the digit base must satisfy
/// `a = ceil(p^{1/3}) + 1` exactly.
pub fn icbrt_ceil(n: u64) -> u64 {
    if n <= 1 {
        return n;
    }
    let mut lo = 1u64;
    let mut hi = 1 << 22; // (2^22)^3 = 2^66 > u64::MAX
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match mid.checked_pow(3) {
            Some(c) if c >= n => hi = mid,
            _ => lo = mid + 1,
        }
    }
    lo
}

/// All primes `p <= n`, ascending. Plain sieve of Eratosthenes; callers that
/// need primes in a far-away window use the segmented sieve in
/// `restricted_primes` instead.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// Deterministic Miller–Rabin, valid for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    // This base set is a proven witness set for all n < 3.3 * 10^24.
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod m` by square-and-multiply.
pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Prime factorization `n = prod p_i^{e_i}` by trial division, `p_i` ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0u32;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        let mut pe = 1u64;
        for _ in 0..e {
            pe *= p;
            out.extend(prev.iter().map(|d| d * pe));
        }
    }
    out.sort_unstable();
    out
}

/// Möbius function: 0 on non-squarefree input, else `(-1)^{omega(n)}`.
pub fn mobius(n: u64) -> i64 {
    debug_assert!(n >= 1);
    let mut sign = 1i64;
    for (_, e) in factorize(n) {
        if e > 1 {
            return 0;
        }
        sign = -sign;
    }
    sign
}

/// Euler totient via the factorization of `n`.
pub fn euler_phi(n: u64) -> u64 {
    let mut out = n;
    for (p, _) in factorize(n) {
        out = out / p * (p - 1);
    }
    out
}

/// Modular inverse of `a` modulo `m` (requires `gcd(a, m) = 1`).
pub fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert!(r == 1, "mod_inverse: {a} is not invertible mod {m}");
    if t < 0 {
        t += m as i128;
    }
    t as u64
}

/// Combine congruences `x = r_i (mod m_i)` with pairwise coprime moduli into
/// the unique residue in `[0, prod m_i)`.
pub fn crt_combine(pairs: &[(u64, u64)]) -> u64 {
    let mut x = 0u128;
    let mut modulus = 1u128;
    for &(r, m) in pairs {
        // Extend x (mod modulus) to also satisfy x = r (mod m).
        let m128 = m as u128;
        let gap = ((r as u128 + m128 - x % m128) % m128) as u64;
        let step = mod_inverse((modulus % m128) as u64, m);
        let k = mul_mod(gap, step, m) as u128;
        x += modulus * k;
        modulus *= m128;
    }
    debug_assert!(modulus <= u64::MAX as u128 + 1);
    x as u64
}

/// Best rational approximation `a/q` to `alpha` with `q <= max_den`, via the
/// continued-fraction convergents. Returns a reduced fraction.
pub fn rational_approx(alpha: f64, max_den: u64) -> (u64, u64) {
    assert!(max_den >= 1);
    let alpha = alpha.rem_euclid(1.0);
    let (mut h0, mut h1) = (1u64, alpha.floor() as u64);
    let (mut k0, mut k1) = (0u64, 1u64);
    let mut frac = alpha.fract();
    for _ in 0..64 {
        if frac.abs() < 1e-15 {
            break;
        }
        let x = 1.0 / frac;
        let a = x.floor();
        frac = x - a;
        let a = a as u64;
        let h2 = match a.checked_mul(h1).and_then(|v| v.checked_add(h0)) {
            Some(v) => v,
            None => break,
        };
        let k2 = match a.checked_mul(k1).and_then(|v| v.checked_add(k0)) {
            Some(v) => v,
            None => break,
        };
        if k2 > max_den {
            break;
        }
        (h0, h1) = (h1, h2);
        (k0, k1) = (k1, k2);
    }
    let _ = (h0, k0);
    let g = gcd(h1.max(1), k1);
    (h1 / g.max(1), k1 / g.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icbrt_ceil_exact_at_cube_neighbors() {
        for c in 2u64..200 {
            let cube = c * c * c;
            assert_eq!(icbrt_ceil(cube), c);
            assert_eq!(icbrt_ceil(cube - 1), c);
            assert_eq!(icbrt_ceil(cube + 1), c + 1);
        }
        assert_eq!(icbrt_ceil(0), 0);
        assert_eq!(icbrt_ceil(1), 1);
        assert_eq!(icbrt_ceil(2), 2);
    }

    #[test]
    fn primes_small() {
        assert_eq!(primes_up_to(11), vec![2, 3, 5, 7, 11]);
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(2), vec![2]);
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let primes = primes_up_to(5000);
        let mut idx = 0;
        for n in 0..=5000u64 {
            let by_sieve = idx < primes.len() && primes[idx] == n;
            if by_sieve {
                idx += 1;
            }
            assert_eq!(is_prime(n), by_sieve, "disagreement at {n}");
        }
    }

    #[test]
    fn factorize_and_divisors() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(euler_phi(30), 8);
        assert_eq!(euler_phi(1), 1);
    }

    #[test]
    fn crt_roundtrip() {
        let x = crt_combine(&[(1, 2), (2, 3), (4, 5)]);
        assert_eq!(x % 2, 1);
        assert_eq!(x % 3, 2);
        assert_eq!(x % 5, 4);
        assert!(x < 30);
    }

    #[test]
    fn continued_fraction_recovers_rationals() {
        let (a, q) = rational_approx(3.0 / 7.0, 100);
        assert_eq!((a, q), (3, 7));
        let (a, q) = rational_approx(0.5, 10);
        assert_eq!((a, q), (1, 2));
        // irrational target: best denominator-capped approximation is close
        let (a, q) = rational_approx(std::f64::consts::FRAC_1_SQRT_2, 1000);
        assert!((a as f64 / q as f64 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
        assert!(q <= 1000);
    }
}
