use clap::{Parser, Subcommand};
use gpest_cli::{commands, CliError};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const CONFIG_HELP: &str = "\
Bench config (JSON):
  family                 gp_sample_1d | gp_sample_2d | hartmann3 | branin (required)
  n_functions            1
  max_rounds             150
  acquisitions           [est_numeric, ucb, pi]; each {\"kind\": ...} with
                         ucb.delta 0.01, pi.epsilon 0.1, ei.theta best_observed,
                         random.seed 0; also est_laplace, est_exact
  resolution             grid points per dimension: 300 (1-D), 50 (2-D, branin), 20 (hartmann3)
  base_seed              0
  observation_noise_std  0.01
  noise_var              observation_noise_std squared
  lengthscale            0.1
  signal_std             1.0
  warm_start             0 shared random points before round 1
  delta                  0.01
  refit                  none; {\"every\", \"lengthscales\", \"signal_stds\"}
  lipschitz_constant     none

Suggest config (JSON):
  grid                   {\"dims\": [{\"lo\", \"hi\", \"n\"}, ...]} or {\"points\": [[...], ...], \"rho\"?} (required)
  kernel                 {\"family\": matern52, \"lengthscale\": 0.1, \"signal_std\": 1.0}
  mean                   {\"kind\": \"zero\"}; or {\"kind\": \"linear\", \"slope\": [...], \"intercept\": c}
  noise_var              1e-4
  acquisition            {\"kind\": \"est_numeric\"}
  seed                   0
  delta                  0.01
  refit                  none
  lipschitz_constant     none

GPEST_SEED, when set, replaces base_seed (bench) or seed (suggest).
Exit codes: 0 success, 1 runtime failure, 2 usage, config or parse error.";

#[derive(Parser)]
#[command(name = "gpest", version, about = "Gaussian-process bandit optimization", after_long_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark suite and write rounds.csv, summary.csv and suite.json
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: available cores)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the next point to evaluate given a history CSV (x_1..x_d,y)
    Suggest {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        history: PathBuf,
    },
    /// Summarize a rounds.csv and write regret-curve CSVs
    Report {
        #[arg(long)]
        rounds: PathBuf,
        /// Output directory (default: next to the rounds file)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr();
    let result: Result<(), CliError> = match &cli.command {
        Command::Bench { config, out, jobs } => commands::bench(config, out, *jobs, &mut stderr),
        Command::Suggest { config, history } => commands::suggest(config, history, &mut stdout, &mut stderr),
        Command::Report { rounds, out } => commands::report(rounds, out.as_deref(), &mut stdout).map(|_| ()),
    };
    let _ = stdout.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
