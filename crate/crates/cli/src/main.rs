use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use goldbach_cli::config::{basis_from_q0, parse_m_range, ExperimentConfig, RunOptions};
use goldbach_cli::report::{
    atomic_write, count_rows, emit_csv, emit_json, report_to_json, rows_to_csv, run_experiment,
};
use goldbach_core::arith::primes_up_to;
use goldbach_core::circle_method::minor_arc_diagnostic;
use goldbach_core::representation_counts::{count_weighted, ConvolutionStrategy};
use goldbach_core::residue_system::build_system;
use goldbach_core::restricted_primes::{restricted_set, sparsity_report, WeightedWindow};
use goldbach_core::singular_series::{
    f_direct, g_h_convolution, g_local, g_product, hsum, rational_to_f64, sigma, sigma_prime,
    triple_count_mod_p, ResidueBasis,
};
use goldbach_core::triple_decomposition::{cover_check, decompose};
use goldbach_core::QuadratureGrid;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "goldbach",
    version,
    about = "Sparse admissible prime sets and ternary representation counting"
)]
struct Cli {
    /// key=value experiment config file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write primary output to this path instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections (0 = library default)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Auto,
    Direct,
    Transform,
}

impl From<StrategyArg> for ConvolutionStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => ConvolutionStrategy::Auto,
            StrategyArg::Direct => ConvolutionStrategy::Direct,
            StrategyArg::Transform => ConvolutionStrategy::Transform,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the admissible system and emit the restricted primes
    Construct {
        #[arg(long)]
        u: Option<u64>,
        /// Squarefree modulus to use as the prime basis
        #[arg(long)]
        q0: Option<u64>,
        #[arg(long = "A")]
        sparsity: Option<u32>,
        /// Append the sparsity report as JSON on stderr
        #[arg(long)]
        stats: bool,
        /// Emit the system itself as JSON instead of the prime list
        #[arg(long)]
        dump: bool,
    },
    /// Check the three-term decomposition over every residue class per prime
    VerifyLemma {
        #[arg(long)]
        pmax: u64,
    },
    /// Per-target counting table as CSV
    Count {
        #[arg(long)]
        u: Option<u64>,
        #[arg(long)]
        q0: Option<u64>,
        /// Inclusive target range LO:HI
        #[arg(long, value_name = "LO:HI")]
        m_range: Option<String>,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
        #[arg(long)]
        cutoff: Option<u64>,
    },
    /// Arc partition summary and minor-arc diagnostics as JSON
    Arcs {
        #[arg(long)]
        u: Option<u64>,
        #[arg(long = "B")]
        arc_exponent: Option<u32>,
        #[arg(long)]
        q0: Option<u64>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare quadrature recovery of one count against the convolution
    Quadrature {
        #[arg(long)]
        u: Option<u64>,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        q0: Option<u64>,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Arithmetic density factors for one target as JSON
    SingularSeries {
        #[arg(long)]
        q0: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        cutoff: Option<u64>,
        /// Include exact rational values alongside the floats
        #[arg(long)]
        exact: bool,
        /// Sweep q up to this bound checking f = g * h
        #[arg(long, value_name = "QMAX")]
        check_convolution: Option<u64>,
        /// Window start for the profiled density sigma'
        #[arg(long)]
        u: Option<u64>,
    },
    /// Full experiment: construct, count, compare with the main term
    Report {
        #[arg(long)]
        u: Option<u64>,
        #[arg(long)]
        q0: Option<u64>,
        #[arg(long = "A")]
        sparsity: Option<u32>,
        #[arg(long = "B")]
        arc_exponent: Option<u32>,
        #[arg(long, value_name = "LO:HI")]
        m_range: Option<String>,
        #[arg(long)]
        cutoff: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the CSV table here
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Record wall-clock timings in the report
        #[arg(long)]
        timings: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

/// Ok(0): all assertions passed. Ok(1): a verification failed. Err: usage,
/// config or I/O trouble (exit 2).
fn run(cli: Cli) -> anyhow::Result<i32> {
    let base = match &cli.config {
        Some(path) => Some(ExperimentConfig::from_file(path)?),
        None => None,
    };

    match cli.command {
        Command::Construct {
            u,
            q0,
            sparsity,
            stats,
            dump,
        } => {
            let cfg = resolve_config(base, u, q0, sparsity, None, None, None, None, None)?;
            let system = build_system(&cfg.construction_params())?;
            if dump {
                let dump_json = serde_json::json!({
                    "primes": system.primes,
                    "q0": system.q0,
                    "covers": system.covers.iter().map(|c| serde_json::json!({
                        "p": c.prime,
                        "a": c.basis.base,
                        "raw": c.raw_elements,
                        "units": c.unit_residues,
                    })).collect::<Vec<_>>(),
                    "R0": system.residues,
                });
                write_output(&cli.out, format!("{dump_json:#}\n").as_bytes())?;
            } else {
                let primes = restricted_set(&system, cfg.window_start)?;
                let mut text = String::new();
                for p in &primes {
                    text.push_str(&p.to_string());
                    text.push('\n');
                }
                write_output(&cli.out, text.as_bytes())?;
            }
            if stats {
                let rep = sparsity_report(&system, cfg.window_start)?;
                let json = serde_json::json!({
                    "count": rep.count,
                    "bound": rep.bound,
                    "equidistribution_ratio": rep.equidistribution_ratio,
                });
                eprintln!("{json}");
            }
            Ok(0)
        }

        Command::VerifyLemma { pmax } => {
            let mut failures = 0u64;
            let mut text = String::from("p\ta\traw\tunits\tdecompose\traw_cover\tunit_cover\n");
            for p in primes_up_to(pmax) {
                let cover = goldbach_core::residue_system::build_cover(p)?;
                let mut decompose_ok = true;
                for n in 0..p {
                    let (r1, r2, r3) = decompose(n as i64, &cover);
                    let member = |e: u64| cover.raw_elements.binary_search(&e).is_ok();
                    if (r1 + r2 + r3) % p != n || !(member(r1) && member(r2) && member(r3)) {
                        decompose_ok = false;
                    }
                }
                let raw_ok = cover_check(&cover, false);
                let unit_ok = cover_check(&cover, true);
                if !decompose_ok || !raw_ok {
                    failures += 1;
                }
                text.push_str(&format!(
                    "{p}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    cover.basis.base,
                    cover.raw_elements.len(),
                    cover.unit_residues.len(),
                    if decompose_ok { "pass" } else { "FAIL" },
                    if raw_ok { "pass" } else { "FAIL" },
                    if unit_ok { "pass" } else { "gap" },
                ));
            }
            text.push_str(&format!("failures: {failures}\n"));
            write_output(&cli.out, text.as_bytes())?;
            Ok(if failures == 0 { 0 } else { 1 })
        }

        Command::Count {
            u,
            q0,
            m_range,
            strategy,
            cutoff,
        } => {
            let m_range = m_range.as_deref().map(parse_m_range).transpose()?;
            let cfg = resolve_config(base, u, q0, None, None, m_range, cutoff, None, None)?;
            let system = build_system(&cfg.construction_params())?;
            let u = cfg.window_start;
            let range = cfg.m_range.unwrap_or((4 * u, 5 * u));
            let rows = count_rows(&system, u, range, strategy.into(), cfg.cutoff)?;
            write_output(&cli.out, &rows_to_csv(&rows))?;
            Ok(0)
        }

        Command::Arcs {
            u,
            arc_exponent,
            q0,
            samples,
            seed,
        } => {
            let cfg = resolve_config(base, u, q0, None, arc_exponent, None, None, None, seed)?;
            let system = build_system(&cfg.construction_params())?;
            let window = WeightedWindow::build(&system, cfg.window_start)?;
            let report = minor_arc_diagnostic(&window, cfg.arc_exponent, samples, cfg.seed)?;
            let json = serde_json::json!({
                "u": report.u,
                "B": report.arc_exponent,
                "P": report.p_cut,
                "Q": report.q_scale,
                "s_zero": report.s_zero,
                "max_abs_s": report.max_s_abs,
                "max_ratio": report.max_ratio,
                "samples": report.samples.iter().map(|s| serde_json::json!({
                    "alpha": s.alpha,
                    "abs_s": s.s_abs,
                    "q": s.q,
                    "envelope": s.envelope,
                    "ratio": s.ratio,
                })).collect::<Vec<_>>(),
            });
            write_output(&cli.out, format!("{json:#}\n").as_bytes())?;
            Ok(0)
        }

        Command::Quadrature { u, m, q0, nodes } => {
            let cfg = resolve_config(base, u, q0, None, None, None, None, nodes, None)?;
            let system = build_system(&cfg.construction_params())?;
            let u = cfg.window_start;
            let window = WeightedWindow::build(&system, u)?;
            let nodes = cfg.nodes.unwrap_or((6 * u + 1) as usize);
            let grid = QuadratureGrid::build(&window, nodes)?;
            let via_quadrature = grid.integral_r(m);
            let counts = count_weighted(&window, ConvolutionStrategy::Auto);
            let via_convolution = if (3 * u..=6 * u).contains(&m) {
                counts[(m - 3 * u) as usize]
            } else {
                0.0
            };
            let abs_diff = (via_quadrature - via_convolution).abs();
            let rel_diff = abs_diff / via_convolution.abs().max(1.0);
            let json = serde_json::json!({
                "m": m,
                "nodes": nodes,
                "quadrature": via_quadrature,
                "convolution": via_convolution,
                "abs_diff": abs_diff,
                "rel_diff": rel_diff,
            });
            write_output(&cli.out, format!("{json:#}\n").as_bytes())?;
            Ok(if rel_diff < 1e-6 { 0 } else { 1 })
        }

        Command::SingularSeries {
            q0,
            m,
            cutoff,
            exact,
            check_convolution,
            u,
        } => {
            // the window is only needed for sigma'; the density itself is
            // window-free
            let window_known = u.is_some() || base.is_some();
            let cfg = resolve_config(
                base,
                u.or(Some(16)),
                Some(q0),
                None,
                None,
                None,
                cutoff,
                None,
                None,
            )?;
            let system = build_system(&cfg.construction_params())?;
            let h = hsum(m, system.q0, cfg.cutoff)?;
            let g = g_product(m, &system);
            let s = sigma(m, &system, cfg.cutoff)?;
            let mut json = serde_json::json!({
                "q0": system.q0,
                "m": m,
                "cutoff": cfg.cutoff,
                "g_locals": system.covers.iter().map(|c| {
                    let local = g_local(c, m, ResidueBasis::Units);
                    let mut entry = serde_json::json!({
                        "p": c.prime,
                        "triples": triple_count_mod_p(c, m, ResidueBasis::Units),
                        "value": rational_to_f64(&local),
                    });
                    if exact {
                        entry["exact"] = serde_json::Value::String(local.to_string());
                    }
                    entry
                }).collect::<Vec<_>>(),
                "g_product": rational_to_f64(&g),
                "hsum": { "value": h.value, "radius": h.radius },
                "sigma": { "value": s.value, "radius": s.radius },
            });
            if exact {
                json["g_product_exact"] = serde_json::Value::String(g.to_string());
            }
            if window_known {
                let sp = sigma_prime(m, cfg.window_start, &system, cfg.cutoff)?;
                json["sigma_prime"] = serde_json::json!({ "value": sp.value, "radius": sp.radius });
            }
            let mut code = 0;
            if let Some(qmax) = check_convolution {
                let mut max_diff = 0.0f64;
                for q in 1..=qmax {
                    let f = f_direct(q, m, &system)?;
                    let gh = rational_to_f64(&g_h_convolution(q, m, &system));
                    max_diff = max_diff.max((f - gh).abs());
                }
                json["convolution_check"] = serde_json::json!({
                    "qmax": qmax,
                    "max_abs_diff": max_diff,
                });
                if max_diff >= 1e-9 {
                    code = 1;
                }
            }
            write_output(&cli.out, format!("{json:#}\n").as_bytes())?;
            Ok(code)
        }

        Command::Report {
            u,
            q0,
            sparsity,
            arc_exponent,
            m_range,
            cutoff,
            samples,
            seed,
            csv,
            timings,
        } => {
            let m_range = m_range.as_deref().map(parse_m_range).transpose()?;
            let mut cfg = resolve_config(
                base,
                u,
                q0,
                sparsity,
                arc_exponent,
                m_range,
                cutoff,
                None,
                seed,
            )?;
            if let Some(samples) = samples {
                cfg.arc_samples = samples;
            }
            let opts = RunOptions {
                threads: cli.threads,
                include_timings: timings,
            };
            let report = run_experiment(&cfg, &opts)?;
            match &cli.out {
                Some(path) => emit_json(&report, path)?,
                None => write_output(&None, &report_to_json(&report)?)?,
            }
            if let Some(csv_path) = &csv {
                emit_csv(&report, csv_path)?;
            }
            eprintln!(
                "targets: {} rows, failing: {}, median ratio: {}",
                report.rows.len(),
                report.failing_m.len(),
                report
                    .median_ratio()
                    .map(|r| format!("{r:.4}"))
                    .unwrap_or_else(|| "n/a".into()),
            );
            Ok(if report.failing_m.is_empty() { 0 } else { 1 })
        }
    }
}

/// Merge the optional config file with command-line overrides.
#[allow(clippy::too_many_arguments)]
fn resolve_config(
    base: Option<ExperimentConfig>,
    u: Option<u64>,
    q0: Option<u64>,
    sparsity: Option<u32>,
    arc_exponent: Option<u32>,
    m_range: Option<(u64, u64)>,
    cutoff: Option<u64>,
    nodes: Option<usize>,
    seed: Option<u64>,
) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match (base, u) {
        (Some(cfg), _) => cfg,
        (None, Some(u)) => ExperimentConfig::new(u),
        (None, None) => bail!("no --config given and no --u on the command line"),
    };
    if let Some(u) = u {
        cfg.window_start = u;
    }
    if let Some(q0) = q0 {
        cfg.basis_override = Some(basis_from_q0(q0).context("expanding --q0")?);
    }
    if let Some(a) = sparsity {
        cfg.sparsity_exponent = a;
    }
    if let Some(b) = arc_exponent {
        cfg.arc_exponent = b;
    }
    if let Some(r) = m_range {
        cfg.m_range = Some(r);
    }
    if let Some(c) = cutoff {
        cfg.cutoff = c;
    }
    if let Some(n) = nodes {
        cfg.nodes = Some(n);
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Write to --out or stdout.
fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => atomic_write(path, bytes),
        None => {
            std::io::stdout()
                .write_all(bytes)
                .context("writing to stdout")?;
            Ok(())
        }
    }
}
