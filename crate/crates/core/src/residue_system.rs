//! Construction of the sparse admissible residue system: the threshold `z`,
//! the prime basis, per-prime digit bases and residue covers, and the lifted
//! residue set modulo `q0` obtained by CRT enumeration. Also provides the
//! dyadic gluing schedule used to chain window experiments.

use crate::arith::{crt_combine, gcd, icbrt_ceil, is_prime, primes_up_to};
use crate::error::{Error, Result};
use num_rational::Ratio;

/// Minimum window start accepted when the threshold `z` has to be derived
/// from `u` (below this, log log u is not usefully positive).
pub const MIN_U_FOR_Z: u64 = 16;

/// Hard guard on the composite modulus; larger products are rejected rather
/// than silently promoted to wider arithmetic.
pub const MAX_Q0: u64 = 1 << 62;

/// Parameters of the construction.
///
/// `sparsity_exponent` is the exponent A controlling how thin the restricted
/// prime set is; `window_start` is the left endpoint u of the window [u, 2u];
/// `arc_exponent` is the exponent B in the arc cut P = (log u)^B. At desk
/// scale the derived threshold z yields a tiny prime basis, so
/// `basis_override` lets experiments use a richer modulus while keeping the
/// construction rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionParams {
    pub sparsity_exponent: u32,
    pub window_start: u64,
    pub arc_exponent: u32,
    pub z_override: Option<f64>,
    pub basis_override: Option<Vec<u64>>,
}

impl ConstructionParams {
    /// Baseline parameters: A, u, and the default arc exponent for that A.
    pub fn new(sparsity_exponent: u32, window_start: u64) -> Self {
        ConstructionParams {
            sparsity_exponent,
            window_start,
            arc_exponent: default_arc_exponent(sparsity_exponent),
            z_override: None,
            basis_override: None,
        }
    }

    /// Use an explicit prime basis instead of the z-derived one.
    pub fn with_basis(mut self, basis: Vec<u64>) -> Self {
        self.basis_override = Some(basis);
        self
    }

    /// Use an explicit threshold z instead of deriving it from u.
    pub fn with_z(mut self, z: f64) -> Self {
        self.z_override = Some(z);
        self
    }

    /// Validate the invariants that do not require building anything.
    ///
    /// `u >= 16` is only enforced when z must be derived: with an explicit
    /// basis or z the construction is meaningful for any window `u >= 2`.
    pub fn validate(&self) -> Result<()> {
        if self.sparsity_exponent == 0 {
            return Err(Error::InvalidParameter(
                "sparsity exponent A must be positive".into(),
            ));
        }
        if self.arc_exponent == 0 {
            return Err(Error::InvalidParameter(
                "arc exponent B must be positive".into(),
            ));
        }
        let needs_derived_z = self.z_override.is_none() && self.basis_override.is_none();
        let min_u = if needs_derived_z { MIN_U_FOR_Z } else { 2 };
        if self.window_start < min_u {
            return Err(Error::WindowTooSmall {
                u: self.window_start,
                min: min_u,
            });
        }
        if let Some(z) = self.z_override {
            if z.is_nan() || z < 2.0 {
                return Err(Error::InvalidParameter(format!(
                    "z override must be >= 2, got {z}"
                )));
            }
        }
        if let Some(basis) = &self.basis_override {
            if basis.is_empty() {
                return Err(Error::InvalidParameter("basis override is empty".into()));
            }
            for w in basis.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidParameter(
                        "basis override must be strictly increasing".into(),
                    ));
                }
            }
            for &p in basis {
                if !is_prime(p) {
                    return Err(Error::InvalidParameter(format!(
                        "basis override contains non-prime {p}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parse `key=value` lines (keys: `A`, `u`, `B`, `z_override`,
    /// `basis_override` as comma-separated primes). Blank lines and lines
    /// starting with `#` are ignored; unknown keys are rejected.
    pub fn parse_key_values(text: &str) -> Result<Self> {
        let mut a: Option<u32> = None;
        let mut u: Option<u64> = None;
        let mut b: Option<u32> = None;
        let mut z_override = None;
        let mut basis_override = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::InvalidParameter(format!("line {}: bad {what}: {value}", lineno + 1))
            };
            match key {
                "A" => a = Some(value.parse().map_err(|_| bad("A"))?),
                "u" => u = Some(value.parse().map_err(|_| bad("u"))?),
                "B" => b = Some(value.parse().map_err(|_| bad("B"))?),
                "z_override" => z_override = Some(value.parse().map_err(|_| bad("z"))?),
                "basis_override" => {
                    let primes: std::result::Result<Vec<u64>, _> =
                        value.split(',').map(|s| s.trim().parse()).collect();
                    basis_override = Some(primes.map_err(|_| bad("basis"))?);
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "line {}: unknown key {other}",
                        lineno + 1
                    )))
                }
            }
        }
        let sparsity_exponent = a.unwrap_or(1);
        let window_start =
            u.ok_or_else(|| Error::InvalidParameter("missing required key u".into()))?;
        let params = ConstructionParams {
            sparsity_exponent,
            window_start,
            arc_exponent: b.unwrap_or_else(|| default_arc_exponent(sparsity_exponent)),
            z_override,
            basis_override,
        };
        params.validate()?;
        Ok(params)
    }
}

/// Default arc exponent for a given sparsity exponent A: `max(13A, 10A+10)`.
pub fn default_arc_exponent(a: u32) -> u32 {
    (13 * a).max(10 * a + 10)
}

/// The threshold below which basis primes are collected: `z = 3A log log u`,
/// unless overridden.
pub fn derive_z(params: &ConstructionParams) -> Result<f64> {
    if let Some(z) = params.z_override {
        return Ok(z);
    }
    if params.window_start < MIN_U_FOR_Z {
        return Err(Error::WindowTooSmall {
            u: params.window_start,
            min: MIN_U_FOR_Z,
        });
    }
    let u = params.window_start as f64;
    Ok(3.0 * params.sparsity_exponent as f64 * u.ln().ln())
}

/// All primes `p <= z`, ascending.
///
/// The boundary is inclusive; when z is itself prime this differs from a
/// product over `p < z`, and the inclusive reading is the one used here.
pub fn prime_basis(z: f64) -> Result<Vec<u64>> {
    if z < 2.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold z={z} admits no primes"
        )));
    }
    Ok(primes_up_to(z.floor() as u64))
}

/// Digit base attached to a basis prime: `a = ceil(p^{1/3}) + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DigitBasis {
    pub prime: u64,
    pub base: u64,
}

/// Compute the digit base for a prime, with exact integer cube-root logic.
pub fn digit_base(p: u64) -> Result<DigitBasis> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    let base = icbrt_ceil(p) + 1;
    debug_assert!(base >= 3);
    debug_assert!(base.pow(3) >= p + 7);
    Ok(DigitBasis { prime: p, base })
}

/// One prime's residue cover: the union of the three arithmetic blocks
/// `{1..a}`, `{a, 2a, .., a^2}`, `{a^2, 2a^2, .., a^3}` kept as raw integers,
/// plus the reduction modulo p with the zero class dropped.
///
/// The raw set has exactly `3a - 2` members (the blocks share the endpoints
/// `a` and `a^2`). The unit residues are what survives the coprimality
/// condition when lifting to the composite modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueCover {
    pub prime: u64,
    pub basis: DigitBasis,
    pub raw_elements: Vec<u64>,
    pub unit_residues: Vec<u64>,
}

/// Build the residue cover for a basis prime.
pub fn build_cover(p: u64) -> Result<ResidueCover> {
    let basis = digit_base(p)?;
    let a = basis.base;
    let mut raw: Vec<u64> = Vec::with_capacity(3 * a as usize - 2);
    raw.extend(1..=a);
    raw.extend((1..=a).map(|i| i * a));
    raw.extend((1..=a).map(|i| i * a * a));
    raw.sort_unstable();
    raw.dedup();
    debug_assert_eq!(raw.len() as u64, 3 * a - 2);

    let mut units: Vec<u64> = raw.iter().map(|&e| e % p).filter(|&r| r != 0).collect();
    units.sort_unstable();
    units.dedup();
    debug_assert!(!units.is_empty());
    Ok(ResidueCover {
        prime: p,
        basis,
        raw_elements: raw,
        unit_residues: units,
    })
}

/// The full admissible system: basis primes, composite modulus, per-prime
/// covers and the CRT-lifted residue set.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleSystem {
    pub params: ConstructionParams,
    /// Derived threshold; absent when an explicit basis made it irrelevant
    /// and u is too small to evaluate log log u.
    pub z: Option<f64>,
    pub primes: Vec<u64>,
    pub q0: u64,
    pub covers: Vec<ResidueCover>,
    /// Sorted residues r in [1, q0] with gcd(r, q0) = 1 whose reduction mod
    /// each basis prime lies in that prime's unit residues.
    pub residues: Vec<u64>,
}

impl AdmissibleSystem {
    /// Whether `n mod q0` lies in the admissible residue set.
    pub fn admits(&self, n: u64) -> bool {
        let r = n % self.q0;
        self.residues.binary_search(&r).is_ok()
    }

    /// Size of the lifted residue set.
    pub fn residue_count(&self) -> u64 {
        self.residues.len() as u64
    }

    /// Upper bound on the density of the lifted set implied by the
    /// construction: `prod (3 p^{1/3} + 3) / p` over basis primes.
    pub fn density_bound(&self) -> f64 {
        self.primes
            .iter()
            .map(|&p| (3.0 * (p as f64).powf(1.0 / 3.0) + 3.0) / p as f64)
            .product()
    }
}

/// Build the admissible system for the given parameters: derive (or accept)
/// the basis, build covers and enumerate the lifted residues by CRT.
pub fn build_system(params: &ConstructionParams) -> Result<AdmissibleSystem> {
    params.validate()?;
    let (z, primes) = match &params.basis_override {
        Some(basis) => {
            let z = derive_z(params).ok();
            (z, basis.clone())
        }
        None => {
            let z = derive_z(params)?;
            (Some(z), prime_basis(z)?)
        }
    };
    for w in primes.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidParameter("repeated basis prime".into()));
        }
    }

    let mut q0: u64 = 1;
    for &p in &primes {
        q0 = q0
            .checked_mul(p)
            .filter(|&v| v < MAX_Q0)
            .ok_or(Error::ModulusOverflow)?;
    }

    let covers: Vec<ResidueCover> = primes
        .iter()
        .map(|&p| build_cover(p))
        .collect::<Result<_>>()?;

    let residues = enumerate_residues(&primes, &covers);
    debug_assert_eq!(
        residues.len() as u64,
        covers
            .iter()
            .map(|c| c.unit_residues.len() as u64)
            .product::<u64>()
    );
    debug_assert!(residues.iter().all(|&r| gcd(r, q0) == 1));

    Ok(AdmissibleSystem {
        params: params.clone(),
        z,
        primes,
        q0,
        covers,
        residues,
    })
}

/// Lift the per-prime unit residues to the composite modulus by CRT,
/// enumerating every combination.
fn enumerate_residues(primes: &[u64], covers: &[ResidueCover]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut choice = vec![0usize; primes.len()];
    'outer: loop {
        let pairs: Vec<(u64, u64)> = covers
            .iter()
            .zip(primes)
            .enumerate()
            .map(|(j, (c, &p))| (c.unit_residues[choice[j]], p))
            .collect();
        let x = crt_combine(&pairs);
        // representative in [1, q0]: CRT yields [0, q0), and 0 cannot occur
        // because every component residue is a unit
        out.push(x);
        for j in (0..choice.len()).rev() {
            choice[j] += 1;
            if choice[j] < covers[j].unit_residues.len() {
                continue 'outer;
            }
            choice[j] = 0;
        }
        break;
    }
    out.sort_unstable();
    out
}

/// Dyadic gluing schedule: four rational constants chaining consecutive
/// window families, plus the (A, level) ladder saying which sparsity exponent
/// applies from which dyadic level on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicSchedule {
    pub constants: [Ratio<i64>; 4],
    pub levels: Vec<(u32, u32)>,
}

impl DyadicSchedule {
    /// Validate the chain
    /// `c1 < 1 < c2 < 5c1/4 < c3 < 5c2/4 < c4 < 5c3/4 < 2 < 5c4/4`
    /// and the strict monotonicity of the level ladder.
    pub fn new(constants: [Ratio<i64>; 4], levels: Vec<(u32, u32)>) -> Result<Self> {
        let [c1, c2, c3, c4] = constants;
        let one = Ratio::from_integer(1);
        let two = Ratio::from_integer(2);
        let grow = |c: Ratio<i64>| c * Ratio::new(5, 4);
        let chain = [
            (c1 < one, "c1 < 1"),
            (one < c2, "1 < c2"),
            (c2 < grow(c1), "c2 < 5c1/4"),
            (grow(c1) < c3, "5c1/4 < c3"),
            (c3 < grow(c2), "c3 < 5c2/4"),
            (grow(c2) < c4, "5c2/4 < c4"),
            (c4 < grow(c3), "c4 < 5c3/4"),
            (grow(c3) < two, "5c3/4 < 2"),
            (two < grow(c4), "2 < 5c4/4"),
        ];
        for (ok, what) in chain {
            if !ok {
                return Err(Error::InvalidSchedule(format!("violated link {what}")));
            }
        }
        if constants.iter().any(|c| *c <= Ratio::from_integer(0)) {
            return Err(Error::InvalidSchedule("constants must be positive".into()));
        }
        for w in levels.windows(2) {
            if w[0].0 >= w[1].0 || w[0].1 >= w[1].1 {
                return Err(Error::InvalidSchedule(
                    "levels must increase strictly in both coordinates".into(),
                ));
            }
        }
        Ok(DyadicSchedule { constants, levels })
    }
}

/// Window starts `round(c_i * 2^ell)` for one dyadic level.
///
/// Verifies after rounding that the images [4u_i, 5u_i] jointly cover the
/// dyadic block [2^{ell+2}, 2^{ell+3}] with no integer gaps, and rejects
/// levels whose rounded starts fall below the minimum window.
pub fn glue_schedule(schedule: &DyadicSchedule, ell: u32) -> Result<[u64; 4]> {
    if ell >= 60 {
        return Err(Error::InvalidSchedule(format!("level {ell} too large")));
    }
    let pow = 1i64 << ell;
    let mut starts = [0u64; 4];
    for (i, c) in schedule.constants.iter().enumerate() {
        let scaled = c * Ratio::from_integer(pow);
        starts[i] = round_ratio(scaled);
    }
    if starts.iter().any(|&u| u < MIN_U_FOR_Z) {
        return Err(Error::InvalidSchedule(format!(
            "level {ell} yields degenerate window starts {starts:?}"
        )));
    }
    let block_lo = 1u64 << (ell + 2);
    let block_hi = 1u64 << (ell + 3);
    let mut covered_to = block_lo; // first integer not yet known covered
    for &u in &starts {
        let (lo, hi) = (4 * u, 5 * u);
        if lo > covered_to {
            return Err(Error::InvalidSchedule(format!(
                "gap at {covered_to}: next window starts at {lo}"
            )));
        }
        covered_to = covered_to.max(hi + 1);
    }
    if covered_to <= block_hi {
        return Err(Error::InvalidSchedule(format!(
            "windows end at {} but the block extends to {block_hi}",
            covered_to - 1
        )));
    }
    Ok(starts)
}

/// Round a rational to the nearest integer, halves away from zero.
fn round_ratio(r: Ratio<i64>) -> u64 {
    let rounded = r.round();
    debug_assert!(*rounded.numer() >= 0);
    (*rounded.numer() / *rounded.denom()) as u64
}
