//! Runs a bandit scenario and writes `regret.csv`, `summary.csv` and
//! `report.txt`.
//!
//!   mamab --scenario paper-all-to-all --out out/a2a
//!   mamab --scenario my.toml --runs 200 --seed 7

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mamab::scenario::{load_scenario, run_experiment, Overrides};
use mamab::Error;

#[derive(Parser, Debug)]
#[command(
    name = "mamab",
    version,
    about = "Multi-agent bandit experiments with stochastic neighbor observation"
)]
struct Args {
    /// Scenario file (TOML) or preset: paper-all-to-all, paper-cyclic, paper-case1, paper-case2
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo replicates
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    zeta: Option<f64>,
    /// Also write the resolved scenario (after overrides) to this file
    #[arg(long)]
    dump_scenario: Option<PathBuf>,
}

fn run(args: &Args) -> Result<String, Error> {
    let mut cfg = load_scenario(&args.scenario)?;
    let overrides = Overrides {
        seed: args.seed,
        runs: args.runs,
        horizon: args.horizon,
        zeta: args.zeta,
    };
    let echoed = overrides.apply(&mut cfg);
    cfg.build()?;
    if let Some(path) = &args.dump_scenario {
        std::fs::write(path, cfg.to_toml_string()?).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    let mut output = run_experiment(&cfg)?;
    output.overrides = echoed;
    output.write_to_dir(&args.out)?;
    Ok(output.report())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(report) => {
            // a closed stdout (e.g. piped into `head`) is not a failure
            let mut stdout = std::io::stdout().lock();
            let _ = write!(stdout, "{report}\nwrote {}\n", args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
