use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use modeplan::parse_scenario;
use modeplan_cli::{
    bench, format_table, run_scenario, thread_count, write_artifacts, RunOptions, EXIT_BAD_INPUT, EXIT_NO_SOLUTION,
};

#[derive(Parser)]
#[command(name = "modeplan", version, about = "Multi-contact loco-manipulation planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one scenario and write plan.json, run.json and traj.csv.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Run every scenario with seeds 0..runs and print one row per scenario.
    Bench {
        #[arg(long = "scenario", required = true, num_args = 1..)]
        scenarios: Vec<PathBuf>,
        #[arg(long, default_value_t = 5)]
        runs: u64,
        /// Also write the rows and all run records as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    max_extensions: Option<usize>,
    /// Wall-time budget [s].
    #[arg(long)]
    max_time: Option<f64>,
    /// Keep improving after the first solution until the budget is spent.
    #[arg(long)]
    anytime: bool,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    stop_at_first: bool,
    /// Refine the best plan over its whole duration.
    #[arg(long)]
    postprocess: bool,
}

impl SearchArgs {
    fn options(&self, seed: u64) -> RunOptions {
        RunOptions {
            seed,
            max_extensions: self.max_extensions,
            max_time_s: self.max_time,
            anytime: self.anytime,
            stop_at_first: self.stop_at_first,
            postprocess: self.postprocess,
            random_extensions: true,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            seed,
            out,
            search,
        } => {
            let sc = match parse_scenario(&scenario) {
                Ok(sc) => sc,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_BAD_INPUT as u8);
                }
            };
            let result = run_scenario(&sc, &search.options(seed));
            if let Err(e) = write_artifacts(&out, &result, &sc) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            let r = &result.record;
            match r.solutions.last() {
                Some(best) => {
                    println!(
                        "{}: {} solution(s), best cost {:.3} ({} segments, {} switches), {} extensions",
                        r.scenario,
                        r.solutions.len(),
                        best.cost,
                        best.segments,
                        best.switches,
                        r.extensions_attempted
                    );
                    if let Some(f) = &r.refined {
                        println!("refined merit {:.4} -> {:.4}", f.merit_before, f.merit_after);
                    }
                    ExitCode::SUCCESS
                }
                None => {
                    eprintln!("{}: no solution after {} extensions", r.scenario, r.extensions_attempted);
                    ExitCode::from(EXIT_NO_SOLUTION as u8)
                }
            }
        }
        Command::Bench {
            scenarios,
            runs,
            out,
            search,
        } => {
            let mut parsed = Vec::new();
            for p in &scenarios {
                match parse_scenario(p) {
                    Ok(sc) => parsed.push(sc),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_BAD_INPUT as u8);
                    }
                }
            }
            let seeds: Vec<u64> = (0..runs).collect();
            let (rows, records) = bench(&parsed, &seeds, &search.options(0), thread_count());
            print!("{}", format_table(&rows));
            if let Some(dir) = out {
                let write = || -> Result<(), Box<dyn std::error::Error>> {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("bench.json"), serde_json::to_string_pretty(&rows)?)?;
                    std::fs::write(dir.join("runs.json"), serde_json::to_string_pretty(&records)?)?;
                    Ok(())
                };
                if let Err(e) = write() {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            }
            ExitCode::SUCCESS
        }
    }
}
