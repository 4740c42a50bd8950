use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use navlab::harness::eval::{compare, evaluate, write_evaluations, Planner, PlannerKind};
use navlab::harness::train::{train, CHECKPOINT_FILE, CURVE_FILE};
use navlab::harness::{replay, ScenarioFile};

#[derive(Parser)]
#[command(name = "navlab", version, about = "Train and compare DWA and TD3-DWA local planners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a TD3 agent and write a checkpoint plus training curve.
    Train {
        #[command(flatten)]
        common: Common,
        /// Overrides the scenario's episode count.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Evaluate one planner over seeded trials.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value = "dwa")]
        planner: PlannerKind,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Evaluate several planners on identical trials.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Repeat for each planner; defaults to dwa and td3-dwa.
        #[arg(long = "planner")]
        planners: Vec<PlannerKind>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Convert a trial log into a trajectory CSV.
    Replay {
        log: PathBuf,
        /// Output file; defaults to the log path with a `.csv` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Bundled scenario name or path to a scenario JSON file.
    #[arg(long, default_value = "arena_10x15")]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn run(cli: Cli) -> navlab::Result<()> {
    match cli.command {
        Command::Train { common, episodes } => {
            let scenario = ScenarioFile::load(&common.scenario)?;
            let episodes = episodes.unwrap_or(scenario.training.episodes);
            let out = train(&scenario, common.seed, episodes, &common.out)?;
            let goals = out
                .curve
                .iter()
                .filter(|r| r.outcome == navlab::harness::Termination::Goal)
                .count();
            println!("trained {episodes} episodes ({goals} reached the goal)");
            println!("wrote {}", common.out.join(CHECKPOINT_FILE).display());
            println!("wrote {}", common.out.join(CURVE_FILE).display());
        }
        Command::Eval {
            common,
            trials,
            planner,
            checkpoint,
        } => {
            let scenario = ScenarioFile::load(&common.scenario)?;
            let planner = Planner::load(planner, checkpoint.as_deref(), &scenario)?;
            let e = evaluate(&planner, &scenario, trials, common.seed)?;
            write_evaluations(std::slice::from_ref(&e), &common.out, "metrics.csv")?;
            println!("{}", e.metrics.report_row());
        }
        Command::Compare {
            common,
            trials,
            mut planners,
            checkpoint,
        } => {
            let scenario = ScenarioFile::load(&common.scenario)?;
            if planners.is_empty() {
                planners = vec![PlannerKind::Dwa, PlannerKind::Td3Dwa];
            }
            let planners = planners
                .into_iter()
                .map(|k| Planner::load(k, checkpoint.as_deref(), &scenario))
                .collect::<navlab::Result<Vec<_>>>()?;
            let evals = compare(&planners, &scenario, trials, common.seed)?;
            write_evaluations(&evals, &common.out, "compare.csv")?;
            println!("Method, Collision, Avg. Time (s), Avg. Path Length (m)");
            for e in &evals {
                println!("{}", e.metrics.report_row());
            }
        }
        Command::Replay { log, out } => {
            let out = out.unwrap_or_else(|| log.with_extension("csv"));
            let l = replay(&log, &out)?;
            println!("wrote {} ({} rows)", out.display(), l.rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
