use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use padguard_cli::bundled;
use padguard_cli::commands::{
    cmd_eval, cmd_plan, cmd_report, cmd_run, cmd_train_dist, write_train_outputs, TrainConfig,
};
use padguard_core::Transport;

#[derive(Parser)]
#[command(
    name = "padguard",
    version,
    about = "Safe-landing pipeline simulator and tools"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Link {
    InProcess,
    Udp,
}

impl From<Link> for Transport {
    fn from(l: Link) -> Self {
        match l {
            Link::InProcess => Transport::InProcess,
            Link::Udp => Transport::Udp,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a scenario (bundled name or JSON file)
    Run {
        scenario: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "runs/out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "in-process")]
        transport: Link,
        /// Also write uav.csv and people.csv
        #[arg(long)]
        csv: bool,
    },
    /// Solve a landing problem given as JSON
    Plan {
        problem: PathBuf,
        /// Cross-check with the exhaustive grid oracle
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 0.01)]
        grid: f64,
        /// Accepted for uniformity; solving is deterministic
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train the distance estimator on synthetic boxes
    TrainDist {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        #[arg(long, default_value_t = 0.2)]
        holdout: f64,
        /// Random-search trials for the tuned row (0 uses the fixed tuned set)
        #[arg(long, default_value_t = 0)]
        search: usize,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Override the tuned number of trees
        #[arg(long)]
        n_estimators: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Localization accuracy of a stored trace
    Eval {
        trace: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rebuild the report of a stored trace
    Report {
        trace: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List bundled scenarios
    Scenarios,
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run {
            scenario,
            seed,
            out,
            transport,
            csv,
        } => {
            let report = cmd_run(&scenario, seed, &out, transport.into(), csv)?;
            print!("{}", report.to_json());
        }
        Cmd::Plan {
            problem,
            oracle,
            grid,
            seed: _,
        } => {
            let text = fs::read_to_string(&problem)
                .with_context(|| format!("reading {}", problem.display()))?;
            let out = cmd_plan(&text, oracle.then_some(grid))?;
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Cmd::TrainDist {
            seed,
            samples,
            holdout,
            search,
            folds,
            n_estimators,
            out,
        } => {
            let mut cfg = TrainConfig {
                samples,
                holdout,
                seed,
                search_trials: search,
                folds,
                ..Default::default()
            };
            if let Some(n) = n_estimators {
                cfg.tuned.n_estimators = n;
            }
            let res = cmd_train_dist(&cfg)?;
            print!("{}", res.output.table());
            if let Some(dir) = out {
                write_train_outputs(&res, &dir)?;
            }
        }
        Cmd::Eval { trace, seed: _ } => {
            println!("{}", serde_json::to_string_pretty(&cmd_eval(&trace)?)?);
        }
        Cmd::Report { trace, seed: _ } => {
            print!("{}", cmd_report(&trace)?.to_json());
        }
        Cmd::Scenarios => {
            for n in bundled::names() {
                println!("{n}");
            }
        }
    }
    Ok(())
}
