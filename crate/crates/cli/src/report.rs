//! End-to-end experiment runs and their machine-readable reports.
//!
//! A run builds the admissible system, sieves the window, counts the
//! representations, evaluates the predicted main term per target, and
//! assembles everything into a report that serializes identically across
//! repeat runs and thread counts. Writes are atomic (temp file + rename).

use crate::config::{ExperimentConfig, RunOptions};
use anyhow::{bail, Context};
use goldbach_core::circle_method::minor_arc_diagnostic;
use goldbach_core::representation_counts::{
    build_profile, failing_odd_m, profile_h, ConvolutionStrategy,
};
use goldbach_core::residue_system::{build_system, AdmissibleSystem};
use goldbach_core::restricted_primes::{sparsity_report, WeightedWindow};
use goldbach_core::singular_series::DensityEvaluator;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct CoverSummary {
    pub p: u64,
    pub a: u64,
    pub raw: Vec<u64>,
    pub units: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemSummary {
    pub primes: Vec<u64>,
    pub q0: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    pub residue_count: u64,
    pub covers: Vec<CoverSummary>,
    /// Full residue list, omitted when impractically large.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residues: Option<Vec<u64>>,
}

impl SystemSummary {
    pub fn of(system: &AdmissibleSystem) -> Self {
        SystemSummary {
            primes: system.primes.clone(),
            q0: system.q0,
            z: system.z,
            residue_count: system.residue_count(),
            covers: system
                .covers
                .iter()
                .map(|c| CoverSummary {
                    p: c.prime,
                    a: c.basis.base,
                    raw: c.raw_elements.clone(),
                    units: c.unit_residues.clone(),
                })
                .collect(),
            residues: (system.residues.len() <= 4096).then(|| system.residues.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SparsitySummary {
    pub count: u64,
    pub bound: f64,
    pub equidistribution_ratio: f64,
}

/// One target row of the experiment table. Fields tied to the main-term
/// window [4u, 5u] are absent outside it; the ratio is absent when the
/// predicted density vanishes.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub m: u64,
    pub unweighted: u64,
    pub weighted: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub main_term: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcDiagnosticsSummary {
    pub arc_exponent: u32,
    pub p_cut: f64,
    pub q_scale: f64,
    pub samples: usize,
    pub s_zero: f64,
    pub max_abs_s: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub system: SystemSummary,
    pub sparsity: SparsitySummary,
    /// Rounding budget for one weighted cell: n * eps * max^3.
    pub weighted_error_bound: f64,
    pub failing_m: Vec<u64>,
    pub rows: Vec<ReportRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arcs: Option<ArcDiagnosticsSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u128>>,
}

impl RunReport {
    /// Count of rows whose measured/predicted ratio lies inside [lo, hi],
    /// as a fraction of rows carrying a ratio.
    pub fn ratio_fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let with: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio).collect();
        if with.is_empty() {
            return 0.0;
        }
        with.iter().filter(|&&r| r >= lo && r <= hi).count() as f64 / with.len() as f64
    }

    /// Median of the available ratios.
    pub fn median_ratio(&self) -> Option<f64> {
        let mut with: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio).collect();
        if with.is_empty() {
            return None;
        }
        with.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = with.len();
        Some(if n % 2 == 1 {
            with[n / 2]
        } else {
            0.5 * (with[n / 2 - 1] + with[n / 2])
        })
    }
}

/// Run one experiment end to end. Deterministic given the config (the seed
/// covers all sampling); thread count only affects wall-clock time.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> anyhow::Result<RunReport> {
    config.validate()?;
    match opts.threads {
        0 => run_inner(config, opts),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(|| run_inner(config, opts)),
    }
}

fn run_inner(config: &ExperimentConfig, opts: &RunOptions) -> anyhow::Result<RunReport> {
    use rayon::prelude::*;

    let mut timings: BTreeMap<String, u128> = BTreeMap::new();
    let mut clock = |label: &str, from: Instant| {
        timings.insert(label.to_string(), from.elapsed().as_millis());
    };

    let t = Instant::now();
    let system = build_system(&config.construction_params())?;
    clock("build_system", t);

    let u = config.window_start;
    let t = Instant::now();
    let window = WeightedWindow::build(&system, u)?;
    let sparsity = sparsity_report(&system, u)?;
    clock("sieve", t);

    let t = Instant::now();
    let profile = build_profile(&system, u, ConvolutionStrategy::Auto)?;
    clock("count", t);

    let t = Instant::now();
    let failing = failing_odd_m(&profile.unweighted, u);
    let density = DensityEvaluator::new(&system, config.cutoff)?;
    let (range_lo, range_hi) = config.m_range.unwrap_or((4 * u, 5 * u));
    let lo = range_lo.max(4 * u);
    let hi = range_hi.min(5 * u);
    let targets: Vec<u64> = (lo..=hi).filter(|m| m % 2 == 1).collect();
    let uf = u as f64;
    let rows: Vec<ReportRow> = targets
        .par_iter()
        .map(|&m| {
            let sp = density.sigma_prime(m, u).expect("m clamped to [4u, 5u]");
            let main_term = uf * uf * sp.value;
            let weighted = profile.weighted_at(m);
            let ratio = (sp.value != 0.0).then(|| weighted / main_term);
            ReportRow {
                m,
                unweighted: profile.unweighted_at(m),
                weighted,
                h: Some(profile_h(m, u).expect("m clamped to [4u, 5u]")),
                sigma_prime: Some(sp.value),
                main_term: Some(main_term),
                ratio,
            }
        })
        .collect();
    clock("density_table", t);

    let arcs = if config.arc_samples > 0 {
        let t = Instant::now();
        let report = minor_arc_diagnostic(
            &window,
            config.arc_exponent,
            config.arc_samples,
            config.seed,
        )?;
        clock("arc_diagnostics", t);
        Some(ArcDiagnosticsSummary {
            arc_exponent: report.arc_exponent,
            p_cut: report.p_cut,
            q_scale: report.q_scale,
            samples: report.samples.len(),
            s_zero: report.s_zero,
            max_abs_s: report.max_s_abs,
            max_ratio: report.max_ratio,
        })
    } else {
        None
    };

    Ok(RunReport {
        config: config.clone(),
        system: SystemSummary::of(&system),
        sparsity: SparsitySummary {
            count: sparsity.count,
            bound: sparsity.bound,
            equidistribution_ratio: sparsity.equidistribution_ratio,
        },
        weighted_error_bound: profile.weighted_error_bound,
        failing_m: failing,
        rows,
        arcs,
        timings_ms: opts.include_timings.then_some(timings),
    })
}

/// Serialize the report as pretty JSON with a trailing newline.
pub fn report_to_json(report: &RunReport) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// The CSV table of the report: exactly the columns
/// `m,unweighted,weighted,H,sigma_prime,main_term,ratio`, LF line endings,
/// shortest round-trip decimals, absent values blank.
pub fn rows_to_csv(rows: &[ReportRow]) -> Vec<u8> {
    let mut out = String::from("m,unweighted,weighted,H,sigma_prime,main_term,ratio\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.m,
            row.unweighted,
            row.weighted,
            opt(row.h),
            opt(row.sigma_prime),
            opt(row.main_term),
            opt(row.ratio),
        ));
    }
    out.into_bytes()
}

/// Write bytes atomically: a sibling temp file is renamed over the target so
/// interrupted runs never leave partial reports.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp-{}",
            path.file_name().unwrap_or_default().to_string_lossy(),
            std::process::id()
        )),
        None => Path::new(&format!(".tmp-{}", std::process::id())).to_path_buf(),
    };
    let mut file = std::fs::File::create(&tmp)
        .with_context(|| format!("creating temp file {}", tmp.display()))?;
    file.write_all(bytes)
        .and_then(|_| file.sync_all())
        .with_context(|| format!("writing {}", tmp.display()))?;
    drop(file);
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Emit the JSON report to a file.
pub fn emit_json(report: &RunReport, path: &Path) -> anyhow::Result<()> {
    atomic_write(path, &report_to_json(report)?)
}

/// Emit the CSV table to a file.
pub fn emit_csv(report: &RunReport, path: &Path) -> anyhow::Result<()> {
    atomic_write(path, &rows_to_csv(&report.rows))
}

/// A run is a verification success when every odd target in the window has
/// a representation.
pub fn verification_passed(report: &RunReport) -> bool {
    report.failing_m.is_empty()
}

/// Table rows for an arbitrary target range inside [3u, 6u]: counting
/// fields always present, main-term fields only inside [4u, 5u].
pub fn count_rows(
    system: &AdmissibleSystem,
    u: u64,
    range: (u64, u64),
    strategy: ConvolutionStrategy,
    cutoff: u64,
) -> anyhow::Result<Vec<ReportRow>> {
    let (lo, hi) = range;
    if lo > hi {
        bail!("empty target range {lo}:{hi}");
    }
    let profile = build_profile(system, u, strategy)?;
    let density = DensityEvaluator::new(system, cutoff)?;
    let uf = u as f64;
    let mut rows = Vec::new();
    for m in lo.max(3 * u)..=hi.min(6 * u) {
        let in_window = m >= 4 * u && m <= 5 * u;
        let (h, sigma_prime, main_term, ratio) = if in_window {
            let sp = density.sigma_prime(m, u)?;
            let main = uf * uf * sp.value;
            let ratio = (sp.value != 0.0).then(|| profile.weighted_at(m) / main);
            (Some(profile_h(m, u)?), Some(sp.value), Some(main), ratio)
        } else {
            (None, None, None, None)
        };
        rows.push(ReportRow {
            m,
            unweighted: profile.unweighted_at(m),
            weighted: profile.weighted_at(m),
            h,
            sigma_prime,
            main_term,
            ratio,
        });
    }
    Ok(rows)
}
