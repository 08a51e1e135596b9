use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fock_ladder::scenario::{list_presets, load_scenario, preset_json, run_scenario, sweep, RunOptions, RunOutput};
use fock_ladder::Error;

/// Fock-state ladder engineering: scenarios, presets, regime checks, sweeps.
#[derive(Parser)]
#[command(name = "fock-ladder", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (file path or preset name).
    Run {
        #[arg(long)]
        scenario: String,
        /// Directory for `<name>.csv` and `<name>.summary.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with 4 when an anchored target is missed.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        cutoff: Option<usize>,
        /// Integrator relative tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// List built-in presets, or print one as JSON.
    Presets {
        #[arg(long)]
        dump: Option<String>,
    },
    /// Validity table for a full-raman or selective-raman scenario.
    Regime {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Rerun a scenario with one numeric field replaced by each value.
    Sweep {
        #[arg(long)]
        scenario: String,
        /// Dotted path into the config, e.g. `parameters.bath.n_bar`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_CHECK: u8 = 4;
const EXIT_REGIME: u8 = 1;

fn error_code(e: &Error) -> u8 {
    if e.is_numerical_guard() {
        EXIT_GUARD
    } else {
        EXIT_VALIDATION
    }
}

fn write_outputs(dir: &PathBuf, out: &RunOutput) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let name = &out.summary.name;
    if !out.series.is_empty() {
        std::fs::write(dir.join(format!("{name}.csv")), out.csv())?;
    }
    std::fs::write(dir.join(format!("{name}.summary.json")), out.summary.to_json_pretty() + "\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            check,
            cutoff,
            tol,
        } => {
            let opts = RunOptions {
                cutoff,
                rel_tol: tol,
                regime_threshold: None,
            };
            let cfg = opts.apply(&load_scenario(&scenario)?)?;
            let output = run_scenario(&cfg)?;
            match &out {
                Some(dir) => write_outputs(dir, &output)?,
                None => println!("{}", output.summary.to_json_pretty()),
            }
            if check {
                for c in &output.summary.checks {
                    let actual = c.actual.map_or("missing".to_string(), |a| format!("{a:.6}"));
                    eprintln!(
                        "{} {} = {} (target {} ± {})",
                        if c.pass { "PASS" } else { "MISS" },
                        c.metric,
                        actual,
                        c.target,
                        c.tol
                    );
                }
                if !output.summary.all_checks_pass() {
                    return Ok(EXIT_CHECK);
                }
            }
            Ok(0)
        }
        Command::Presets { dump } => {
            match dump {
                Some(name) => print!("{}", preset_json(&name)?),
                None => {
                    for p in list_presets()? {
                        println!("{:<20} {:<22} {}", p.name, p.model.name(), p.description);
                    }
                }
            }
            Ok(0)
        }
        Command::Regime { scenario, threshold } => {
            let opts = RunOptions {
                regime_threshold: threshold,
                ..RunOptions::default()
            };
            let mut cfg = opts.apply(&load_scenario(&scenario)?)?;
            cfg.action = fock_ladder::scenario::config::Action::Regime;
            cfg.validate()?;
            let output = run_scenario(&cfg)?;
            if let Some(table) = output.summary.details.get("regime_table").and_then(|v| v.as_str()) {
                print!("{table}");
            }
            Ok(if output.summary.regime_pass() == Some(true) { 0 } else { EXIT_REGIME })
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => {
            let cfg = load_scenario(&scenario)?;
            let result = sweep(&cfg, &param, &values)?;
            let csv = result.to_csv();
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join(format!("{}.sweep.csv", cfg.name)), csv)?;
                    std::fs::write(
                        dir.join(format!("{}.sweep.json", cfg.name)),
                        serde_json::to_string_pretty(&result)? + "\n",
                    )?;
                }
                None => print!("{csv}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
