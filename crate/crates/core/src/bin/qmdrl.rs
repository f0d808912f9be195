use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use qmdrl::harness::{self, ConfigBundle, Metric, RunPolicy, DEFAULT_SMOOTHING};

#[derive(Parser)]
#[command(name = "qmdrl", version, about = "Quantum multi-drone RL experiments")]
struct Cli {
    /// Directory holding run directories.
    #[arg(long, global = true, default_value = "runs")]
    runs_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one run.
    Train {
        /// TOML config; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// quantum, classical or random.
        #[arg(long)]
        policy: RunPolicy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        run_id: String,
    },
    /// Greedy evaluation of a trained run with the malfunction scenario.
    Eval {
        #[arg(long)]
        run_id: String,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
    },
    /// Final-window table over several runs.
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        runs: Vec<String>,
    },
    /// SVG line chart of one metric.
    Plot {
        #[arg(long, value_delimiter = ',', required = true)]
        runs: Vec<String>,
        /// reward, support_rate or qos.
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
        smooth: usize,
    },
}

fn ids(runs: &[String]) -> Vec<&str> {
    runs.iter().map(String::as_str).collect()
}

fn execute(cli: Cli) -> Result<()> {
    let root = &cli.runs_dir;
    match cli.command {
        Command::Train {
            config,
            policy,
            seed,
            run_id,
        } => {
            let bundle = match config {
                Some(path) => harness::load_config(&path)?,
                None => ConfigBundle::default(),
            };
            let s = harness::run(&bundle, policy, seed, &run_id, root)?;
            println!(
                "{}: {} episodes, final {} reward {:.4} ± {:.4}, support {:.4}, qos {:.4}",
                s.run_id, s.episodes, s.window.min(s.episodes), s.total_reward.mean, s.total_reward.std,
                s.support_rate.mean, s.qos.mean
            );
        }
        Command::Eval { run_id, episodes } => {
            print!("{}", harness::eval(root, &run_id, episodes)?);
        }
        Command::Compare { runs } => {
            print!("{}", harness::compare(root, &ids(&runs))?);
        }
        Command::Plot {
            runs,
            metric,
            out,
            smooth,
        } => {
            harness::plot(root, &ids(&runs), metric, smooth, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let text = e.to_string();
            let parts: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("{}", parts.join(" "));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
