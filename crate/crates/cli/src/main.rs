use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use deltashock_cli::{as_verification, parse_scenario, run_scenario, sweep, CliError, Outcome, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "deltashock", version, about = "δ-shock solvers for zero-pressure gas dynamics with energy")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (overrides the scenario's)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Pass threshold for the scenario's main check
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Print nothing on success
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts
    Run { scenario: PathBuf },
    /// Check the weak-solution identities for the scenario's Riemann data
    Verify { scenario: PathBuf },
    /// Run a scenario for each value of one parameter
    Sweep {
        scenario: PathBuf,
        /// N, dt, t_end or weak_quad_rel_tol
        #[arg(long)]
        param: String,
        #[arg(long, num_args = 1.., required = true)]
        values: Vec<f64>,
    },
}

fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

fn report(o: &Outcome, quiet: bool) {
    if quiet {
        return;
    }
    if let Some(t) = &o.table {
        print!("{t}");
    }
    for c in o.checks.iter().filter(|_| o.table.is_none()) {
        println!(
            "{:<4} {:<34} {:>12.4e} (tol {:.1e})",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    for (k, v) in &o.metrics {
        println!("     {k:<34} {v:.16e}");
    }
    println!("{} [{}]: {} -> {}", o.name, o.kind, if o.passed { "pass" } else { "fail" }, o.dir.display());
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let opts = RunOptions {
        out: cli.out.clone(),
        tol: cli.tol,
        dry_run: false,
    };
    match &cli.command {
        Command::Run { scenario } => {
            let o = run_scenario(&load(scenario)?, &opts)?;
            report(&o, cli.quiet);
            Ok(o.passed)
        }
        Command::Verify { scenario } => {
            let o = run_scenario(&as_verification(&load(scenario)?)?, &opts)?;
            report(&o, cli.quiet);
            Ok(o.passed)
        }
        Command::Sweep {
            scenario,
            param,
            values,
        } => {
            let r = sweep(&load(scenario)?, param, values, &opts)?;
            if !cli.quiet {
                for row in &r.rows {
                    let err = row.error.map_or("-".to_string(), |e| format!("{e:.4e}"));
                    println!("{param} = {:<12} {:<4} error {err}", row.value, if row.passed { "ok" } else { "FAIL" });
                }
                if let Some(p) = r.order {
                    println!("observed order {p:.3}");
                }
            }
            Ok(r.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(5),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
