use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use reorder_cli::{commands, Overrides, Report, RunConfig};
use reorder_core::OrderingMode;

#[derive(Parser)]
#[command(name = "reorder", version, about = "Reorder-point inventory under drifted-Poisson demand")]
struct Cli {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Base seed for every simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo path count.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Ordering-cost convention: per_order or per_unit_times_Q.
    #[arg(long, global = true)]
    mode: Option<OrderingMode>,
    /// Number of demand series for `table1` and `compare`.
    #[arg(long, global = true)]
    series: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected total cost curve over the configured time grid.
    ExpectedCost,
    /// Expected cost over the (a, Q, C_o) cross product.
    Sweep,
    /// One trajectory plus a Monte Carlo summary.
    Simulate,
    /// Analytical quantities against Monte Carlo means.
    Validate,
    /// Gamma approximation of passage times against simulation.
    FptDiag,
    /// Average-cost table of the rolling ARIMA baseline.
    Table1,
    /// Analytical expected cost next to the ARIMA baseline's cumulative cost.
    Compare,
}

fn run(cli: &Cli) -> Result<Report> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.apply(&Overrides { seed: cli.seed, paths: cli.paths, mode: cli.mode, series: cli.series });
    cfg.validate()?;
    let dir = cli.out.as_path();
    match cli.command {
        Command::ExpectedCost => commands::expected_cost(&cfg, dir),
        Command::Sweep => commands::sweep_cmd(&cfg, dir),
        Command::Simulate => commands::simulate_cmd(&cfg, dir),
        Command::Validate => commands::validate_cmd(&cfg, dir),
        Command::FptDiag => commands::fpt_diag(&cfg, dir).map(|(r, _)| r),
        Command::Table1 => commands::table1(&cfg, dir),
        Command::Compare => commands::compare(&cfg, dir),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
