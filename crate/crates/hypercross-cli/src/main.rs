//! Command-line front end: reproducible index-set dumps, class-norm
//! comparisons, rate experiments and property-suite verification.
//!
//! Outputs are deterministic for identical (config, seed); every output file
//! embeds the sha256 of the configuration it was produced from, and a
//! `<out>.manifest.json` with the config echo, tool version and timings
//! accompanies every artifact.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use hypercross::{
    decomposition_norm, definition_norm, rate_experiment, run_suite, Error as HxError,
    LevelSetFamily, NormBudgets, QuadratureGrid,
};

use config::{load_json, resolve_params, IndexsetConfig, NormsParams, RatesConfig};
use output::{
    error_object, finish_artifact, rates_csv, sha256_of, write_indexset_csv, write_json,
};

#[derive(Parser)]
#[command(
    name = "hypercross",
    version,
    about = "Hyperbolic-cross approximation experiments"
)]
struct Cli {
    /// Worker threads (falls back to HYPERCROSS_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Quadrature-grid overrides shared by the computing subcommands.
#[derive(Args, Clone, Copy)]
struct GridArgs {
    /// Truncation radius per axis.
    #[arg(long = "T")]
    trunc: Option<f64>,
    /// Samples per unit length per axis (default: 8 * 2^{max level}).
    #[arg(long)]
    ppu: Option<u32>,
    /// Target relative tolerance of reported norms.
    #[arg(long)]
    rtol: Option<f64>,
}

impl GridArgs {
    fn apply(&self, mut grid: QuadratureGrid) -> QuadratureGrid {
        if let Some(t) = self.trunc {
            grid.trunc_radius = t;
        }
        if self.ppu.is_some() {
            grid.points_per_unit = self.ppu;
        }
        if let Some(r) = self.rtol {
            grid.rel_tol = r;
        }
        grid
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the index families kappa(N) and Theta(N).
    Indexset {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Additional CSV dump (one index per row: s1..sd,set).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare the definition-form and decomposition-form class norms.
    Norms {
        /// Block function JSON ({"d":..,"blocks":[{"s":[..],"c":..},..]}).
        #[arg(long)]
        function: PathBuf,
        /// Majorant JSON.
        #[arg(long)]
        omega: PathBuf,
        #[arg(long)]
        p: f64,
        /// Summation index; "inf" for the Nikolskii case.
        #[arg(long)]
        theta: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run a convergence-rate experiment and emit a CSV table.
    Rates {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run a property suite and emit a pass/fail JSON report.
    Verify {
        /// One of: dk, lp, lemmaA, lemmaB, thmA, thm1.
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("HYPERCROSS_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", error_object("config", &format!("thread pool: {e}")));
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = match e {
                HxError::Config(_) | HxError::Domain(_) => "config",
                _ => "runtime",
            };
            eprintln!("{}", error_object(kind, &e.to_string()));
            ExitCode::from(if kind == "config" { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> hypercross::Result<()> {
    match command {
        Command::Indexset { config, out, csv } => {
            let started = Instant::now();
            let raw = load_json(&config)?;
            let cfg: IndexsetConfig = serde_json::from_value(raw.clone())
                .map_err(|e| HxError::Config(format!("indexset config: {e}")))?;
            let params = cfg.params()?;
            let family = LevelSetFamily::build(&cfg.omega, &params, cfg.n)?;
            let hash = sha256_of(&raw);
            let report = output::indexset_report(&family, &hash);
            write_json(&out, &report)?;
            if let Some(csv_path) = csv {
                write_indexset_csv(&csv_path, &family, &hash)?;
            }
            finish_artifact(&out, &raw, &hash, started.elapsed(), "indexset")
        }
        Command::Norms {
            function,
            omega,
            p,
            theta,
            out,
            grid,
        } => {
            let started = Instant::now();
            let f: hypercross::BlockFunction =
                serde_json::from_value(load_json(&function)?)
                    .map_err(|e| HxError::Config(format!("function: {e}")))?;
            let om: hypercross::MajorantSpec = serde_json::from_value(load_json(&omega)?)
                .map_err(|e| HxError::Config(format!("majorant: {e}")))?;
            let norm_params = NormsParams::resolve(&om, p, &theta)?;
            let g = grid.apply(QuadratureGrid {
                trunc_radius: 512.0,
                points_per_unit: None,
                rel_tol: 0.05,
            });
            let def = definition_norm(&f, &om, &norm_params, &NormBudgets::default(), &g)?;
            let dec = decomposition_norm(&f, &om, &norm_params)?;
            let payload = serde_json::json!({
                "definition_norm": def,
                "decomposition_norm": dec,
                "ratio": def / dec,
            });
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
            if let Some(path) = out {
                let raw = serde_json::json!({
                    "function": function.display().to_string(),
                    "omega": omega.display().to_string(),
                    "p": p, "theta": theta,
                });
                let hash = sha256_of(&raw);
                let mut with_hash = payload;
                with_hash["config_sha256"] = hash.clone().into();
                write_json(&path, &with_hash)?;
                finish_artifact(&path, &raw, &hash, started.elapsed(), "norms")?;
            }
            Ok(())
        }
        Command::Rates {
            config,
            out,
            seed,
            grid,
        } => {
            let started = Instant::now();
            let raw = load_json(&config)?;
            let mut cfg: RatesConfig = serde_json::from_value(raw.clone())
                .map_err(|e| HxError::Config(format!("rates config: {e}")))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let params = resolve_params(&cfg)?;
            let rate_cfg = hypercross::RateConfig {
                omega: cfg.omega.clone(),
                params,
                witness: cfg.witness,
                n_exponents: cfg.n_exponents.clone(),
                seed: cfg.seed,
                grid: grid.apply(cfg.grid),
                members: cfg.members,
            };
            let table = rate_experiment(&rate_cfg)?;
            let hash = sha256_of(&raw);
            std::fs::write(&out, rates_csv(&table, &hash))
                .map_err(|e| HxError::Config(format!("write {}: {e}", out.display())))?;
            finish_artifact(&out, &raw, &hash, started.elapsed(), "rates")
        }
        Command::Verify { suite, out } => {
            let started = Instant::now();
            let report = run_suite(&suite)?;
            let raw = serde_json::json!({ "suite": suite });
            let hash = sha256_of(&raw);
            let mut payload = serde_json::to_value(&report).unwrap();
            payload["config_sha256"] = hash.clone().into();
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
            if let Some(path) = out {
                write_json(&path, &payload)?;
                finish_artifact(&path, &raw, &hash, started.elapsed(), "verify")?;
            }
            if report.passed {
                Ok(())
            } else {
                Err(HxError::Degenerate(format!("suite {suite} failed")))
            }
        }
    }
}
