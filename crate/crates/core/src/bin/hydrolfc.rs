use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hydrolfc::harness::{optimize, run_comparison, run_scenario, write_atomic, ControllerKind, Scenario};
use hydrolfc::metrics::{compute_report_with, Integration, ReportOptions, SimTrace};
use hydrolfc::{LfcError, Result};

#[derive(Parser)]
#[command(name = "hydrolfc", version, about = "Load-frequency control simulator for islanded small hydro plants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write trace, report and plot.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run several controllers on the same scenario and rank them.
    Compare {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "pd,fuzzy-pd,fuzzy-pd-ga-dsnn")]
        controllers: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tune the fuzzy membership functions and write the GA log.
    Optimize {
        scenario: PathBuf,
        #[arg(long)]
        generations: Option<usize>,
        /// Fraction of offspring given a true simulation; enables surrogate screening.
        #[arg(long)]
        screen_ratio: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute the metric report of an existing trace.
    Metrics {
        trace: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        settle_band: f64,
        #[arg(long, default_value_t = 0.1)]
        tail_fraction: f64,
        #[arg(long)]
        trapezoid: bool,
        /// Also write report.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| LfcError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut sc = Scenario::from_toml(&text)?;
    if let Some(s) = seed {
        sc.set_seed(s);
    }
    Ok(sc)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { scenario, out, seed } => {
            let sc = load_scenario(&scenario, seed)?;
            let art = run_scenario(&sc)?;
            art.write_to(&out)?;
            if let Some(r) = &art.report {
                println!("{}", serde_json::to_string_pretty(r).expect("serializable"));
            }
            match art.divergence_error() {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Compare {
            scenario,
            controllers,
            out,
            seed,
        } => {
            let sc = load_scenario(&scenario, seed)?;
            let kinds = controllers
                .iter()
                .map(|s| s.parse::<ControllerKind>())
                .collect::<Result<Vec<_>>>()?;
            let cmp = run_comparison(&sc, &kinds)?;
            cmp.write_to(&out)?;
            print!("{}", cmp.text());
            if let Some(e) = cmp.entries.iter().find_map(|(_, r)| r.as_ref().ok()?.divergence_error()) {
                return Err(e);
            }
            if cmp.entries.iter().any(|(_, r)| r.is_err()) {
                return Err(LfcError::Config("one or more controllers failed".into()));
            }
            Ok(())
        }
        Command::Optimize {
            scenario,
            generations,
            screen_ratio,
            out,
            seed,
        } => {
            let mut sc = load_scenario(&scenario, seed)?;
            if !sc.kind().is_optimized() {
                sc = sc.with_controller(if screen_ratio.is_some() {
                    ControllerKind::FuzzyPdGaDsnn
                } else {
                    ControllerKind::FuzzyPdGa
                });
            }
            if let Some(r) = screen_ratio {
                sc = sc.with_controller(ControllerKind::FuzzyPdGaDsnn);
                if let Some(s) = sc.surrogate.as_mut() {
                    s.screen_ratio = r;
                }
            }
            if let (Some(g), Some(ga)) = (generations, sc.ga.as_mut()) {
                ga.max_generations = g;
            }
            sc.validate()?;
            let log = optimize(&sc)?;
            log.write_to(&out)?;
            let b = &log.outcome.best;
            println!("best J = {}", b.j);
            println!(
                "genes = [{}]",
                b.chromosome.0.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ")
            );
            println!("true simulations = {}", log.outcome.true_evals);
            Ok(())
        }
        Command::Metrics {
            trace,
            settle_band,
            tail_fraction,
            trapezoid,
            out,
        } => {
            let file = fs::File::open(&trace).map_err(|e| LfcError::Io {
                path: trace.clone(),
                source: e,
            })?;
            let tr = SimTrace::read_csv(file)?;
            let opts = ReportOptions {
                settle_band_hz: settle_band,
                tail_fraction,
                integration: if trapezoid { Integration::Trapezoid } else { Integration::Rectangle },
            };
            let report = compute_report_with(&tr, &opts)?;
            let mut json = serde_json::to_string_pretty(&report).expect("serializable");
            json.push('\n');
            print!("{json}");
            if let Some(dir) = out {
                write_atomic(&dir.join("report.json"), json.as_bytes())?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hydrolfc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
