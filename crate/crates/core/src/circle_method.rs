//! Exponential sums over the weighted window, the major/minor arc partition,
//! recovery of the representation counts by uniform-node quadrature, and
//! report-only diagnostics of the minor-arc envelope.

use crate::arith::rational_approx;
use crate::error::{Error, Result};
use crate::restricted_primes::WeightedWindow;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `exp(2 pi i x)` with the argument reduced to [0, 1) first.
#[inline]
pub fn unit_phase(x: f64) -> Complex64 {
    let t = 2.0 * std::f64::consts::PI * x.rem_euclid(1.0);
    Complex64::new(t.cos(), t.sin())
}

/// The filtered exponential sum `S(alpha) = sum_k values[k] e(k alpha)`.
pub fn s_eval(alpha: f64, window: &WeightedWindow) -> Complex64 {
    phased_sum(alpha, window.u, &window.values)
}

/// The unfiltered companion sum over the same window, used by the
/// finite-Fourier expansion over residue classes.
pub fn s_tilde_eval(alpha: f64, window: &WeightedWindow) -> Complex64 {
    phased_sum(alpha, window.u, &window.lambda)
}

fn phased_sum(alpha: f64, u: u64, weights: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &w) in weights.iter().enumerate() {
        if w != 0.0 {
            acc += w * unit_phase((u + i as u64) as f64 * alpha);
        }
    }
    acc
}

/// The plain geometric sum `T(beta) = sum_{u <= k <= 2u} e(k beta)`, in the
/// stable Dirichlet-kernel closed form.
pub fn t_eval(beta: f64, u: u64) -> Complex64 {
    let n = u as f64; // u + 1 terms: k = u .. 2u
    let s = (std::f64::consts::PI * beta.rem_euclid(1.0)).sin();
    if s.abs() < 1e-14 {
        return Complex64::new(n + 1.0, 0.0) * unit_phase(1.5 * n * beta);
    }
    let kernel = ((n + 1.0) * std::f64::consts::PI * beta.rem_euclid(1.0)).sin() / s;
    unit_phase(1.5 * n * beta) * kernel
}

/// One major arc: the interval of radius 1/Q around the reduced fraction a/q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorArc {
    pub q: u64,
    pub a: u64,
    pub center: f64,
}

/// The full arc partition at cut `P = (log u)^B`, radius `1/Q` with
/// `Q = u (log u)^{-B}`. Arcs are pairwise disjoint; everything else in
/// [0, 1) is minor.
#[derive(Debug, Clone)]
pub struct ArcPartition {
    pub u: u64,
    pub arc_exponent: u32,
    pub p_cut: f64,
    pub q_scale: f64,
    pub radius: f64,
    pub arcs: Vec<MajorArc>,
}

impl ArcPartition {
    /// The major arc containing `alpha` (mod 1), if any. The q = 1 arc wraps
    /// around 0.
    pub fn classify(&self, alpha: f64) -> Option<&MajorArc> {
        let x = alpha.rem_euclid(1.0);
        self.arcs.iter().find(|arc| {
            let d = (x - arc.center).abs();
            d.min(1.0 - d) <= self.radius
        })
    }

    pub fn is_minor(&self, alpha: f64) -> bool {
        self.classify(alpha).is_none()
    }
}

/// The arc cut and radius scale for a window: `P = (log u)^B`,
/// `Q = u (log u)^{-B}`, rejected unless the disjointness condition
/// `2 P^2 < Q` holds.
pub fn arc_parameters(u: u64, arc_exponent: u32) -> Result<(f64, f64)> {
    if u < 3 {
        return Err(Error::WindowTooSmall { u, min: 3 });
    }
    let log_u = (u as f64).ln();
    let p_cut = log_u.powi(arc_exponent as i32);
    let q_scale = u as f64 / p_cut;
    if !p_cut.is_finite() || 2.0 * p_cut * p_cut >= q_scale {
        return Err(Error::ArcPrecondition {
            p: p_cut,
            q: q_scale,
        });
    }
    Ok((p_cut, q_scale))
}

/// Build the arc partition, enforcing the disjointness precondition
/// `2 P^2 < Q` and verifying the resulting intervals numerically.
pub fn build_arcs(u: u64, arc_exponent: u32) -> Result<ArcPartition> {
    let (p_cut, q_scale) = arc_parameters(u, arc_exponent)?;
    let radius = 1.0 / q_scale;
    let mut arcs = Vec::new();
    for q in 1..=(p_cut.floor() as u64) {
        for a in 1..=q {
            if crate::arith::gcd(a, q) == 1 {
                arcs.push(MajorArc {
                    q,
                    a,
                    center: a as f64 / q as f64,
                });
            }
        }
    }
    // pairwise disjointness: adjacent centers in sorted order must be more
    // than two radii apart (the 1/1 arc wraps to meet the smallest center)
    let mut centers: Vec<f64> = arcs.iter().map(|a| a.center).collect();
    centers.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for w in centers.windows(2) {
        assert!(w[1] - w[0] > 2.0 * radius, "overlapping arcs at {w:?}");
    }
    if let (Some(first), Some(last)) = (centers.first(), centers.last()) {
        if centers.len() > 1 {
            assert!((first + 1.0) - last > 2.0 * radius, "wraparound overlap");
        }
    }
    Ok(ArcPartition {
        u,
        arc_exponent,
        p_cut,
        q_scale,
        radius,
        arcs,
    })
}

/// Values of S at the uniform nodes j/N, with phases taken from an exact
/// integer-indexed root table so no large-argument trigonometry occurs.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: usize,
    pub u: u64,
    s_values: Vec<Complex64>,
    roots: Vec<Complex64>,
}

impl QuadratureGrid {
    /// Build the grid; `nodes >= 6u + 1` makes the count recovery exact for
    /// every target (the integrand is a trigonometric polynomial of degree
    /// at most 6u).
    pub fn build(window: &WeightedWindow, nodes: usize) -> Result<Self> {
        let need = (6 * window.u + 1) as usize;
        if nodes < need {
            return Err(Error::TooFewNodes { need, got: nodes });
        }
        Ok(Self::build_unchecked(window, nodes))
    }

    fn build_unchecked(window: &WeightedWindow, nodes: usize) -> Self {
        let n = nodes;
        let roots: Vec<Complex64> = (0..n).map(|t| unit_phase(t as f64 / n as f64)).collect();
        let mut s_values = vec![Complex64::new(0.0, 0.0); n];
        for (j, s) in s_values.iter_mut().enumerate() {
            let mut idx = (window.u as usize % n) * j % n;
            let step = j;
            let mut acc = Complex64::new(0.0, 0.0);
            for &w in &window.values {
                if w != 0.0 {
                    acc += w * roots[idx];
                }
                idx += step;
                if idx >= n {
                    idx -= n;
                }
            }
            *s = acc;
        }
        QuadratureGrid {
            nodes: n,
            u: window.u,
            s_values,
            roots,
        }
    }

    /// Recover the weighted count of `m` as `(1/N) sum_j S(j/N)^3 e(-mj/N)`.
    /// The imaginary part must vanish up to rounding; the real part is the
    /// count.
    pub fn integral_r(&self, m: u64) -> f64 {
        let n = self.nodes;
        let mut acc = Complex64::new(0.0, 0.0);
        let step = (m % n as u64) as usize;
        let mut idx = 0usize;
        for s in &self.s_values {
            // e(-m j / N) = conj(root[m j mod N])
            acc += s * s * s * self.roots[idx].conj();
            idx += step;
            if idx >= n {
                idx -= n;
            }
        }
        let value = acc / n as f64;
        assert!(
            value.im.abs() <= 1e-8 * value.re.abs().max(1.0),
            "quadrature failed to cancel the imaginary part: {value}"
        );
        value.re
    }

    /// Discrete Parseval pair: node-average of |S|^2 and the direct sum of
    /// squared weights. Equal up to rounding once `nodes >= 2u + 1`.
    pub fn parseval(&self, window: &WeightedWindow) -> (f64, f64) {
        let lhs = self.s_values.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.nodes as f64;
        let rhs = window.values.iter().map(|v| v * v).sum::<f64>();
        (lhs, rhs)
    }
}

/// Convenience one-shot quadrature for a single target.
pub fn integral_r(window: &WeightedWindow, m: u64, nodes: usize) -> Result<f64> {
    Ok(QuadratureGrid::build(window, nodes)?.integral_r(m))
}

/// Node-averaged |S|^2 versus the squared-weight sum, with the node count
/// needed for exactness of this degree-2u identity.
pub fn parseval_check(window: &WeightedWindow) -> (f64, f64) {
    let nodes = (4 * window.u + 1) as usize;
    QuadratureGrid::build_unchecked(window, nodes).parseval(window)
}

/// One sampled point of the minor-arc diagnostic.
#[derive(Debug, Clone)]
pub struct MinorArcSample {
    pub alpha: f64,
    pub s_abs: f64,
    /// Denominator of the continued-fraction convergent with q <= Q.
    pub q: u64,
    pub envelope: f64,
    pub ratio: f64,
}

/// Report of sampled |S| against the reference envelope on the minor arcs.
/// No hard assertion is made against the envelope: the reference bound has
/// unspecified absolute constants, so the ratios are regression data only.
#[derive(Debug, Clone)]
pub struct MinorArcReport {
    pub u: u64,
    pub arc_exponent: u32,
    pub p_cut: f64,
    pub q_scale: f64,
    pub s_zero: f64,
    pub samples: Vec<MinorArcSample>,
    pub max_ratio: f64,
    pub max_s_abs: f64,
}

/// Sample |S| on the minor arcs and compare with the envelope
/// `(u/sqrt(q) + u^{4/5} + sqrt(uq)) (log u)^4`, with q read off a
/// continued-fraction convergent capped at Q.
pub fn minor_arc_diagnostic(
    window: &WeightedWindow,
    arc_exponent: u32,
    samples: usize,
    seed: u64,
) -> Result<MinorArcReport> {
    let u = window.u;
    let arcs = build_arcs(u, arc_exponent)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uf = u as f64;
    let log4 = uf.ln().powi(4);
    let mut out = Vec::with_capacity(samples);
    let mut max_ratio = 0.0f64;
    let mut max_s_abs = 0.0f64;
    while out.len() < samples {
        let alpha: f64 = rng.gen_range(0.0..1.0);
        if !arcs.is_minor(alpha) {
            continue;
        }
        let (_, q) = rational_approx(alpha, arcs.q_scale.floor() as u64);
        let q = q.max(1);
        let s_abs = s_eval(alpha, window).norm();
        let envelope = (uf / (q as f64).sqrt() + uf.powf(0.8) + (uf * q as f64).sqrt()) * log4;
        let ratio = s_abs / envelope;
        max_ratio = max_ratio.max(ratio);
        max_s_abs = max_s_abs.max(s_abs);
        out.push(MinorArcSample {
            alpha,
            s_abs,
            q,
            envelope,
            ratio,
        });
    }
    Ok(MinorArcReport {
        u,
        arc_exponent,
        p_cut: arcs.p_cut,
        q_scale: arcs.q_scale,
        s_zero: window.total(),
        samples: out,
        max_ratio,
        max_s_abs,
    })
}
