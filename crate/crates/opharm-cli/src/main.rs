//! `opharm`: corpus experiments, invariant checks and companion-pair export
//! for the operator-valued harmonic analysis library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opharm_cli::checks::run_all_checks;
use opharm_cli::config::{ExperimentConfig, ExperimentKind};
use opharm_cli::experiment::run_experiment;
use opharm_cli::report::{emit_report, ReportFormat};
use opharm_core::companion::{build_companion, pair_to_json, EtaSpec, PairMode};
use opharm_core::grid::GridSpec;
use opharm_core::scale::ScaleGrid;
use opharm_core::symbols::RadialSymbol;

#[derive(Parser)]
#[command(
    name = "opharm",
    about = "Operator-valued square functions and quantum-torus experiments",
    version
)]
struct Cli {
    /// Worker threads for the parallel pipelines (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an equivalence experiment over a deterministic corpus.
    Run {
        /// Experiment kind; overrides the config file.
        #[arg(long)]
        kind: Option<String>,
        /// JSON configuration mirroring the experiment fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for the report and its histogram sidecar.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the invariant suite; exit code 1 on any violation.
    Check,
    /// Build a companion pair and print its JSON export.
    Companion {
        /// Symbol kind: poisson, d_poisson, gauss_lp, annulus_bump, or
        /// riesz_poisson:<alpha>.
        #[arg(long)]
        phi: String,
        #[arg(long)]
        mode: String,
        /// Lattice size fixing the default scale grid and radii.
        #[arg(long, default_value_t = 64)]
        n_axis: usize,
        /// Optional file path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_symbol(s: &str) -> Result<RadialSymbol, String> {
    match s {
        "poisson" => Ok(RadialSymbol::Poisson),
        "d_poisson" => Ok(RadialSymbol::DPoisson),
        "gauss_lp" => Ok(RadialSymbol::GaussLp),
        "annulus_bump" => Ok(RadialSymbol::AnnulusBump),
        "zero" => Ok(RadialSymbol::Zero),
        other => {
            if let Some(rest) = other.strip_prefix("riesz_poisson:") {
                let alpha: f64 = rest.parse().map_err(|_| format!("bad alpha `{rest}`"))?;
                Ok(RadialSymbol::RieszPoisson(alpha))
            } else {
                Err(format!("unknown symbol `{other}`"))
            }
        }
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("configuration error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            return config_error(e);
        }
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads.is_some() {
        eprintln!("note: built without the parallel feature; --threads ignored");
    }

    match cli.command {
        Command::Run {
            kind,
            config,
            out,
            format,
            seed,
        } => {
            let format = match ReportFormat::parse(&format) {
                Ok(f) => f,
                Err(e) => return config_error(e),
            };
            let mut cfg = match &config {
                Some(path) => {
                    let text = match std::fs::read_to_string(path) {
                        Ok(t) => t,
                        Err(e) => return config_error(format!("{}: {e}", path.display())),
                    };
                    match serde_json::from_str::<ExperimentConfig>(&text) {
                        Ok(c) => c,
                        Err(e) => return config_error(format!("{}: {e}", path.display())),
                    }
                }
                None => {
                    let Some(kind_str) = kind.as_deref() else {
                        return config_error("either --config or --kind is required");
                    };
                    match ExperimentKind::parse(kind_str) {
                        Ok(k) => ExperimentConfig::desk_default(k, 0),
                        Err(e) => return config_error(e),
                    }
                }
            };
            if let Some(kind_str) = kind.as_deref() {
                match ExperimentKind::parse(kind_str) {
                    Ok(k) => cfg.kind = k,
                    Err(e) => return config_error(e),
                }
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Err(e) = cfg.validate() {
                return config_error(e);
            }
            let report = match run_experiment(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("experiment failed: {e}");
                    return ExitCode::from(1);
                }
            };
            let stem = format!("{}_seed{}", cfg.kind.label(), cfg.seed);
            match emit_report(&report, format, &out, &stem) {
                Ok(path) => {
                    println!("wrote {} ({} rows)", path.display(), report.rows.len());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("emit failed: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Check => {
            let results = run_all_checks(true);
            let failed = results.iter().filter(|r| !r.passed).count();
            let total: f64 = results.iter().map(|r| r.seconds).sum();
            println!(
                "{}/{} checks passed in {total:.1}s",
                results.len() - failed,
                results.len()
            );
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Companion {
            phi,
            mode,
            n_axis,
            out,
        } => {
            let sym = match parse_symbol(&phi) {
                Ok(s) => s,
                Err(e) => return config_error(e),
            };
            let mode = match mode.as_str() {
                "continuous" => PairMode::Continuous,
                "discrete" => PairMode::Discrete,
                other => return config_error(format!("unknown mode `{other}`")),
            };
            let grid = match GridSpec::new(1, n_axis) {
                Ok(g) => g,
                Err(e) => return config_error(e),
            };
            let radii = grid.frequency_radii(n_axis as f64 / 2.0);
            let sgrid = ScaleGrid::default_for_reproducing(n_axis);
            let pair = match build_companion(sym, mode, EtaSpec::default(), &radii, &sgrid) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("companion construction failed: {e}");
                    return ExitCode::from(1);
                }
            };
            let json = serde_json::to_string_pretty(&pair_to_json(&pair)).expect("serializable");
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, json) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                    println!(
                        "wrote {} (residual {:.3e})",
                        path.display(),
                        pair.residual()
                    );
                }
                None => println!("{json}"),
            }
            ExitCode::SUCCESS
        }
    }
}
