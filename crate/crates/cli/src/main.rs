//! Reproducible experiment runner for the Moyal-plane spectral laboratory.
//!
//! Exit codes: 0 all criteria pass, 1 criterion failure, 2 usage/config error.

use clap::{Parser, Subcommand};
use moyal_lab_cli::config::ExperimentConfig;
use moyal_lab_cli::experiments::Lab;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "moyal-lab", about = "Quantum-plane operator experiments", version)]
struct Cli {
    /// flat key = value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory for reports and CSVs
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// master seed for all randomness
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// grid points per axis
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    /// momentum box halfwidth
    #[arg(long = "grid-L", global = true)]
    grid_l: Option<f64>,
    /// matrix-basis truncation M
    #[arg(long, global = true)]
    truncation: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// basis invariants, trace/isometry/Hölder/root-lemma properties
    VerifyAlgebra,
    /// Hilbert-Schmidt identity and the mixed trace formula
    TraceFormula,
    /// h_z identity, residue vs closed form, Wiener-Ikehara synthetic
    Residue,
    /// assemble, SVD, tail fit, refinement trend over three grids
    Spectrum,
    /// quantized derivative vs κ_d |||x||| and the approximant comparison
    Qd,
    /// semi-norm sandwich on seeded random elements
    Seminorms,
    /// all of the above plus a determinism re-run
    All,
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::parse_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.grid_n {
        cfg.grid_n = n;
    }
    if let Some(l) = cli.grid_l {
        cfg.grid_l = l;
    }
    if let Some(m) = cli.truncation {
        cfg.truncation = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    // thread count comes from the environment only; default is sequential,
    // which keeps reductions bit-reproducible
    let threads = std::env::var("MOYAL_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(1);
    moyal_lab::set_threads(threads);
    if threads <= 1 {
        // keep rayon on a single worker as well
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build_global();
    }

    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(2);
        }
    };

    let lab = Lab::new(cfg.clone());
    let outcome = (|| -> anyhow::Result<bool> {
        let reports = match cli.command {
            Command::VerifyAlgebra => vec![lab.cmd_verify_algebra()?],
            Command::TraceFormula => vec![lab.cmd_trace_formula()?],
            Command::Residue => vec![lab.cmd_residue()?],
            Command::Spectrum => vec![lab.cmd_spectrum()?],
            Command::Qd => vec![lab.cmd_qd()?],
            Command::Seminorms => vec![lab.cmd_seminorms()?],
            Command::All => lab.cmd_all()?,
        };
        let mut all_pass = true;
        for r in &reports {
            r.print_summary();
            let path = r.write_json(&cfg.out_dir)?;
            println!("report: {}", path.display());
            all_pass &= r.pass;
        }
        Ok(all_pass)
    })();

    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
