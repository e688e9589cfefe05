//! `minlen`: certifies entropic uncertainty relations with a minimal length.
//!
//! Exit codes: 0 when every check passes, 1 when any inequality fails, 2 on
//! usage, configuration or numerical errors.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, RunConfig, StateSpec};
use run::SweepParam;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numeric(#[from] minlen::Error),
    #[error("output error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "minlen", version, about = "Entropic uncertainty relations with a minimal observable length")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
struct GridArgs {
    /// JSON run configuration; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Catalog state names
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    state: Option<Vec<String>>,
    /// Seeds for random states
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl GridArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.beta {
            c.beta_grid = v.clone();
        }
        if let Some(v) = &self.sigma {
            c.sigma_grid = v.clone();
        }
        if let Some(v) = &self.alpha {
            c.alpha_grid = v.clone();
        }
        if let Some(names) = &self.state {
            let seeds = self.seed.clone().unwrap_or_else(|| vec![1]);
            c.states = names
                .iter()
                .map(|n| StateSpec {
                    name: n.clone(),
                    shape_args: vec![],
                    seeds: if n == "random_fourier_q" { seeds.clone() } else { vec![] },
                })
                .collect();
        } else if let Some(seeds) = &self.seed {
            for s in c.states.iter_mut().filter(|s| s.name == "random_fourier_q") {
                s.seeds = seeds.clone();
            }
        }
        if let Some(o) = &self.out {
            c.output_path = Some(o.clone());
        }
        if let Some(f) = self.format {
            c.format = f;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every applicable check and write one record per check
    Verify(GridArgs),
    /// Vary one parameter and tabulate margins
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Dump the densities and entropies of one state
    ShowState {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        shape: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn init_threads() {
    if let Some(n) = std::env::var("THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Verify(args) => {
            let c = args.resolve()?;
            let run = run::verify(&c)?;
            let text = match c.format {
                Format::Json => output::verify_json(&run.reports)?,
                Format::Csv => output::verify_csv(&run.reports)?,
            };
            output::emit(&text, c.output_path.as_deref())?;
            let (pass, fail, na) = output::summary_counts(&run.reports);
            eprintln!("{pass} pass, {fail} fail, {na} not applicable");
            Ok(fail == 0)
        }
        Command::Sweep { param, grid } => {
            let c = grid.resolve()?;
            let rows = run::sweep(&c, param)?;
            let text = match c.format {
                Format::Json => output::sweep_json(param, &rows)?,
                Format::Csv => output::sweep_csv(param, &rows)?,
            };
            output::emit(&text, c.output_path.as_deref())?;
            Ok(true)
        }
        Command::ShowState { name, beta, shape, seed, out, format } => {
            let seed = seed.or((name == "random_fourier_q").then_some(1));
            let spec = StateSpec { name, shape_args: shape, seeds: vec![] };
            spec.catalog_name()?;
            let dump = run::show_state(&spec, seed, beta)?;
            let text = match format {
                Format::Json => output::state_json(&dump)?,
                Format::Csv => output::state_csv(&dump)?,
            };
            output::emit(&text, out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    init_threads();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
