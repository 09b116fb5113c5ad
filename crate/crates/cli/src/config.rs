//! Experiment configuration: a plain `key=value` file and/or command-line
//! overrides, validated against every module precondition before any heavy
//! work starts.

use anyhow::{anyhow, bail, Context};
use goldbach_core::arith::factorize;
use goldbach_core::circle_method::arc_parameters;
use goldbach_core::residue_system::{default_arc_exponent, ConstructionParams};
use serde::Serialize;
use std::path::Path;

/// Everything that identifies an experiment. Execution details (thread
/// count, timing capture) live in [`RunOptions`] so that identical
/// experiments produce identical reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub sparsity_exponent: u32,
    pub window_start: u64,
    pub arc_exponent: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_override: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_override: Option<Vec<u64>>,
    /// Inclusive target range for the per-m table; defaults to [4u, 5u].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_range: Option<(u64, u64)>,
    /// Euler-product cutoff for the h-series.
    pub cutoff: u64,
    /// Quadrature node count; defaults to the exactness threshold 6u + 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// Minor-arc diagnostic sample count; 0 disables the diagnostic.
    pub arc_samples: usize,
    pub seed: u64,
}

/// Execution knobs that must not influence report contents.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// 0 keeps the global thread pool default.
    pub threads: usize,
    /// Record wall-clock timings in the report (off for byte-reproducible
    /// output).
    pub include_timings: bool,
}

pub const DEFAULT_CUTOFF: u64 = 100_000;

impl ExperimentConfig {
    pub fn new(window_start: u64) -> Self {
        ExperimentConfig {
            sparsity_exponent: 1,
            window_start,
            arc_exponent: default_arc_exponent(1),
            z_override: None,
            basis_override: None,
            m_range: None,
            cutoff: DEFAULT_CUTOFF,
            nodes: None,
            arc_samples: 0,
            seed: 0,
        }
    }

    /// Parse a `key=value` file. Accepts the construction keys `A`, `u`,
    /// `B`, `z_override`, `basis_override` plus `m_range` (`LO:HI`),
    /// `cutoff`, `nodes`, `samples` and `seed`.
    pub fn from_key_values(text: &str) -> anyhow::Result<Self> {
        let mut cfg = ExperimentConfig::new(0);
        let mut saw_u = false;
        let mut explicit_b = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let ctx = || format!("line {}: bad value for {key}", lineno + 1);
            match key {
                "A" => cfg.sparsity_exponent = value.parse().with_context(ctx)?,
                "u" => {
                    cfg.window_start = value.parse().with_context(ctx)?;
                    saw_u = true;
                }
                "B" => {
                    cfg.arc_exponent = value.parse().with_context(ctx)?;
                    explicit_b = true;
                }
                "z_override" => cfg.z_override = Some(value.parse().with_context(ctx)?),
                "basis_override" => {
                    let basis: Result<Vec<u64>, _> =
                        value.split(',').map(|s| s.trim().parse()).collect();
                    cfg.basis_override = Some(basis.with_context(ctx)?);
                }
                "m_range" => cfg.m_range = Some(parse_m_range(value).with_context(ctx)?),
                "cutoff" => cfg.cutoff = value.parse().with_context(ctx)?,
                "nodes" => cfg.nodes = Some(value.parse().with_context(ctx)?),
                "samples" => cfg.arc_samples = value.parse().with_context(ctx)?,
                "seed" => cfg.seed = value.parse().with_context(ctx)?,
                other => bail!("line {}: unknown key {other}", lineno + 1),
            }
        }
        if !saw_u {
            bail!("missing required key u");
        }
        if !explicit_b {
            cfg.arc_exponent = default_arc_exponent(cfg.sparsity_exponent);
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_key_values(&text)
    }

    pub fn construction_params(&self) -> ConstructionParams {
        ConstructionParams {
            sparsity_exponent: self.sparsity_exponent,
            window_start: self.window_start,
            arc_exponent: self.arc_exponent,
            z_override: self.z_override,
            basis_override: self.basis_override.clone(),
        }
    }

    /// Check every referenced module precondition up front.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.construction_params()
            .validate()
            .context("construction parameters")?;
        if self.cutoff < 100 {
            bail!("cutoff must be at least 100, got {}", self.cutoff);
        }
        if let Some((lo, hi)) = self.m_range {
            if lo > hi {
                bail!("m_range is empty: {lo}:{hi}");
            }
        }
        if let Some(nodes) = self.nodes {
            let need = (6 * self.window_start + 1) as usize;
            if nodes < need {
                bail!("nodes must be at least 6u+1 = {need}, got {nodes}");
            }
        }
        if self.arc_samples > 0 {
            arc_parameters(self.window_start, self.arc_exponent)
                .context("arc diagnostics requested but the arc cut is inadmissible")?;
        }
        Ok(())
    }
}

/// Parse `LO:HI` into an inclusive range.
pub fn parse_m_range(s: &str) -> anyhow::Result<(u64, u64)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("expected LO:HI, got {s}"))?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

/// Expand a squarefree modulus into its ascending prime basis.
pub fn basis_from_q0(q0: u64) -> anyhow::Result<Vec<u64>> {
    if q0 < 2 {
        bail!("modulus must be at least 2, got {q0}");
    }
    let factors = factorize(q0);
    if factors.iter().any(|&(_, e)| e > 1) {
        bail!("modulus {q0} is not squarefree");
    }
    Ok(factors.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ExperimentConfig::from_key_values(
            "# experiment\nA = 1\nu = 1000\nbasis_override = 2, 3, 5\nm_range = 4000:5000\nseed = 42\n",
        )
        .unwrap();
        assert_eq!(cfg.window_start, 1000);
        assert_eq!(cfg.basis_override.as_deref(), Some(&[2, 3, 5][..]));
        assert_eq!(cfg.m_range, Some((4000, 5000)));
        assert_eq!(cfg.seed, 42);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_missing_u() {
        assert!(ExperimentConfig::from_key_values("u=10\nfrobnicate=1\n").is_err());
        assert!(ExperimentConfig::from_key_values("A=1\n").is_err());
    }

    #[test]
    fn default_arc_exponent_tracks_a() {
        let cfg = ExperimentConfig::from_key_values("u=100\nA=2\n").unwrap();
        assert_eq!(cfg.arc_exponent, 30);
        let cfg = ExperimentConfig::from_key_values("u=100\nA=2\nB=3\n").unwrap();
        assert_eq!(cfg.arc_exponent, 3);
    }

    #[test]
    fn arc_samples_trigger_precondition_check() {
        let mut cfg = ExperimentConfig::new(100_000);
        cfg.basis_override = Some(vec![2, 3, 5]);
        cfg.arc_samples = 10;
        cfg.arc_exponent = 2;
        assert!(cfg.validate().is_err(), "B=2 is inadmissible at u=1e5");
        cfg.arc_exponent = 1;
        cfg.validate().unwrap();
    }

    #[test]
    fn q0_expansion() {
        assert_eq!(basis_from_q0(30).unwrap(), vec![2, 3, 5]);
        assert_eq!(basis_from_q0(15).unwrap(), vec![3, 5]);
        assert!(basis_from_q0(12).is_err());
        assert!(basis_from_q0(1).is_err());
    }
}
