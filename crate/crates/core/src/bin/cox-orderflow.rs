use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cox_orderflow::harness::{
    cmd_asymptotics, cmd_estimate, cmd_figures, cmd_regime_check, cmd_simulate, with_threads, EstimateOptions,
    ExperimentConfig,
};
use cox_orderflow::kv::KeyValues;
use cox_orderflow::Result;

#[derive(Parser)]
#[command(name = "cox-orderflow", version, about = "Simulate and estimate Cox-process order flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicate paths and write one record CSV per replicate.
    Simulate(Shared),
    /// Estimate the response function from an event file.
    Estimate {
        /// Record CSV or `time[,bid_level]` CSV.
        events: PathBuf,
        /// Comma-separated times at which to report the price estimate.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Monte Carlo mean and 95% pointwise bands of the response estimate.
    Figures(Shared),
    /// Cycle oracle and limit-theory checks.
    Asymptotics(Shared),
    /// Report the rate ratios of a profile.
    RegimeCheck(Shared),
}

#[derive(Args, Default)]
struct Shared {
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    p0: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// linear, cubic, constant or table:<path>
    #[arg(long)]
    response: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    t_grid: Option<usize>,
    #[arg(long)]
    u_grid: Option<usize>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
    /// key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Shared {
    fn overrides(&self) -> KeyValues {
        let mut m = KeyValues::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("sigma", self.sigma.map(|v| v.to_string()));
        put("mu", self.mu.map(|v| v.to_string()));
        put("horizon", self.horizon.map(|v| v.to_string()));
        put("bins", self.bins.map(|v| v.to_string()));
        put("p0", self.p0.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("reps", self.reps.map(|v| v.to_string()));
        put("response", self.response.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("threads", self.threads.map(|v| v.to_string()));
        put("t_grid", self.t_grid.map(|v| v.to_string()));
        put("u_grid", self.u_grid.map(|v| v.to_string()));
        put("cycles", self.cycles.map(|v| v.to_string()));
        put("step", self.step.map(|v| v.to_string()));
        m
    }

    /// Defaults, then the config file, then flags. Returns the keys set
    /// explicitly as well.
    fn resolve(&self) -> Result<(ExperimentConfig, KeyValues)> {
        let mut explicit = match &self.config {
            Some(path) => cox_orderflow::kv::read(path)?,
            None => KeyValues::new(),
        };
        explicit.extend(self.overrides());
        let config = ExperimentConfig::from_key_values(&explicit)?;
        Ok((config, explicit))
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(shared) => {
            let (config, _) = shared.resolve()?;
            let paths = with_threads(config.threads, || cmd_simulate(&config))??;
            print_paths(&paths);
        }
        Command::Estimate { events, times, shared } => {
            let (config, explicit) = shared.resolve()?;
            let opts = EstimateOptions {
                events,
                horizon: explicit.contains_key("horizon").then_some(config.params.horizon),
                bins: explicit.contains_key("bins").then_some(config.params.bins),
                times,
            };
            let paths = with_threads(config.threads, || cmd_estimate(&config, &opts))??;
            print_paths(&paths);
        }
        Command::Figures(shared) => {
            let (config, _) = shared.resolve()?;
            let (_, paths) = with_threads(config.threads, || cmd_figures(&config))??;
            print_paths(&paths);
        }
        Command::Asymptotics(shared) => {
            let (config, _) = shared.resolve()?;
            let (report, paths) = with_threads(config.threads, || cmd_asymptotics(&config))??;
            print!("{}", report.render());
            print_paths(&paths);
        }
        Command::RegimeCheck(shared) => {
            let (config, _) = shared.resolve()?;
            let report = cmd_regime_check(&config)?;
            println!("{report}");
            if let Some(k) = report.suggested_bins() {
                println!("suggested bins       {k}");
            }
            for w in report.warnings() {
                eprintln!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
