//! `nonlocal-lab`: command-line front end of the experiment runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonlocal_harness::{
    emit, run_barrier_verify, run_harnack_sweep, run_holder_sweep, run_lemma_suite, run_op_eval, run_regvar_check,
    run_solve, Result, SweepConfig, SweepReport,
};

#[derive(Debug, Parser)]
#[command(name = "nonlocal-lab", version, about = "Sweeps and checks for nonlocal extremal operators")]
struct Cli {
    /// TOML configuration; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed of the randomized instances.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Tolerance: relative quadrature error for the lemma suite, barrier
    /// threshold and solver residual elsewhere.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Normalization, scale function, Potter constants and ρ per profile.
    RegvarCheck,
    /// Extremal operators of the configured field at the configured points.
    OpEval,
    /// Power-barrier sub-solution search and δ_R.
    BarrierVerify,
    /// One Dirichlet problem; the solution goes next to the report.
    Solve,
    /// Harnack quotients over σ, families, radii and seeded data.
    HarnackSweep,
    /// Fitted Hölder exponents and constants over the same sweep.
    HolderSweep,
    /// Kernel-integral, tail, Potter and Karamata checks.
    LemmaSuite,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::RegvarCheck => "regvar-check",
            Command::OpEval => "op-eval",
            Command::BarrierVerify => "barrier-verify",
            Command::Solve => "solve",
            Command::HarnackSweep => "harnack-sweep",
            Command::HolderSweep => "holder-sweep",
            Command::LemmaSuite => "lemma-suite",
        }
    }
}

fn configure(cli: &Cli) -> Result<SweepConfig> {
    let mut c = match &cli.config {
        Some(p) => SweepConfig::load(p)?,
        None => SweepConfig::default(),
    };
    if let Some(out) = &cli.out {
        c.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        c.jobs = jobs;
    }
    if let Some(tol) = cli.tol {
        match cli.command {
            Command::LemmaSuite => c.lemma.rel_err = tol,
            Command::BarrierVerify => c.barrier.threshold = tol,
            Command::Solve => c.solve.solve_tol = tol,
            Command::HarnackSweep | Command::HolderSweep => c.harnack.solve_tol = tol,
            Command::RegvarCheck | Command::OpEval => c.quadrature.rel_tol = tol,
        }
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: &Cli) -> Result<bool> {
    let c = configure(cli)?;
    let report: SweepReport = match cli.command {
        Command::RegvarCheck => run_regvar_check(&c)?,
        Command::OpEval => run_op_eval(&c)?,
        Command::BarrierVerify => run_barrier_verify(&c)?,
        Command::HarnackSweep => run_harnack_sweep(&c)?,
        Command::HolderSweep => run_holder_sweep(&c)?,
        Command::LemmaSuite => run_lemma_suite(&c)?,
        Command::Solve => {
            let solution = c.output.with_extension("u.csv");
            let (report, _) = run_solve(&c, &solution)?;
            eprintln!("solution written to {}", solution.display());
            report
        }
    };
    emit(&report, &c, cli.command.name(), &c.output)?;
    let failures = report.failures().count();
    eprintln!(
        "{}: {} rows, {} failed, summary {} entries; report at {}",
        cli.command.name(),
        report.rows.len(),
        failures,
        report.summary.len(),
        c.output.display()
    );
    for s in &report.summary {
        eprintln!(
            "  {} {} R={}: max over σ {}, uniformity ratio {}{}",
            s.experiment,
            s.quantity,
            s.radius,
            s.max_over_sigma,
            s.uniformity_ratio,
            if s.pass { "" } else { " (FAILED)" }
        );
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
