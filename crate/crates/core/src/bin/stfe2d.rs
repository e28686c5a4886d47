use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stfe2d::harness::{ensemble_csv, mc_ensemble_with, rate_csv, refinement_study, StudyKind, DEFAULT_LEVELS};
use stfe2d::integrator::Simulator;
use stfe2d::io::{load_config, FileSink};
use stfe2d::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_ABORT: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "stfe2d", version, about = "Stochastic thin-film finite-element solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one trajectory and write diagnostics and snapshots.
    Run {
        config: PathBuf,
    },
    /// Run the identity and dense-oracle verification suites.
    Check {
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Run refinement studies and write a rate table.
    Converge {
        config: PathBuf,
        /// Comma-separated node counts per axis.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LEVELS)]
        levels: Vec<usize>,
        /// Restrict to some studies (interp, laplacian_eig, ritz, noise_b3star).
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
    },
    /// Run a Monte Carlo ensemble with seeds seed + r.
    Ensemble {
        config: PathBuf,
        #[arg(long, default_value_t = 32)]
        replicas: usize,
        /// Moment exponent for the reported mean of sup R.
        #[arg(long, default_value_t = 1.0)]
        p_bar: f64,
    },
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_runtime_abort() { EXIT_ABORT } else { EXIT_VALIDATION })
}

fn run(config: PathBuf) -> Result<(), Error> {
    let cfg = load_config(&config)?;
    let sim = Simulator::new(&cfg.grid, &cfg.run, &cfg.material, &cfg.noise)?;
    let mut sink = FileSink::create(&cfg.output_dir, &cfg.prefix)?;
    let outcome = sim.run(cfg.initial.clone(), &mut sink)?;
    let (diag, snaps) = sink.finish()?;
    let s = &outcome.state;
    println!(
        "t = {:e}, steps = {}, stopped = {}, sup R = {:e}, mass drift = {:e}, halvings = {}",
        s.t, s.step, s.stopped, outcome.sup_r, outcome.max_mass_drift, outcome.total_halvings
    );
    println!("diagnostics: {}", diag.display());
    println!("snapshots: {}", snaps.len());
    Ok(())
}

fn check(samples: usize) -> Result<bool, Error> {
    let results = stfe2d::oracle::run_checks(samples)?;
    let mut ok = true;
    for r in &results {
        println!(
            "{} {:<44} {:.3e} (tol {:.0e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            r.tol
        );
        ok &= r.pass;
    }
    Ok(ok)
}

fn converge(config: PathBuf, levels: Vec<usize>, kinds: Vec<String>) -> Result<(), Error> {
    let cfg = load_config(&config)?;
    let kinds = if kinds.is_empty() {
        StudyKind::ALL.to_vec()
    } else {
        kinds.iter().map(|k| k.parse()).collect::<Result<Vec<_>, _>>()?
    };
    let tables = kinds
        .into_iter()
        .map(|k| refinement_study(k, &levels))
        .collect::<Result<Vec<_>, _>>()?;
    for t in &tables {
        for m in &t.metrics {
            println!("{:<14} {:<20} fitted slope {:.4}", t.kind.name(), m.metric, m.fitted);
        }
    }
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::Io {
        path: cfg.output_dir.clone(),
        source: e,
    })?;
    let path = cfg.output_dir.join(format!("{}_rates.csv", cfg.prefix));
    std::fs::write(&path, rate_csv(&tables)).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    println!("rates: {}", path.display());
    Ok(())
}

fn ensemble(config: PathBuf, replicas: usize, p_bar: f64) -> Result<(), Error> {
    let cfg = load_config(&config)?;
    let (rows, summary) = mc_ensemble_with(&cfg, replicas, p_bar)?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::Io {
        path: cfg.output_dir.clone(),
        source: e,
    })?;
    let path = cfg.output_dir.join(format!("{}_ensemble.csv", cfg.prefix));
    std::fs::write(&path, ensemble_csv(&rows, &summary)).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    println!(
        "replicas = {}, aborted = {}, mean sup R = {:e}, max sup R = {:e}, stopped fraction = {}",
        summary.n_replicas, summary.n_aborted, summary.mean_sup_r, summary.max_sup_r, summary.stopped_fraction
    );
    println!("summary: {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { config } => run(config),
        Cmd::Check { samples } => match check(samples) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(EXIT_CHECK),
            Err(e) => Err(e),
        },
        Cmd::Converge { config, levels, kinds } => converge(config, levels, kinds),
        Cmd::Ensemble {
            config,
            replicas,
            p_bar,
        } => ensemble(config, replicas, p_bar),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
