use std::path::PathBuf;
use std::process::ExitCode;

use alternating::config::ExperimentConfig;
use alternating::runner;
use alternating::{Error, Result};
use alternating_core::monitor::PairedRegistration;
use alternating_core::Algorithm;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Streaming regression under concept drift: corpus generation, algorithm
/// comparison runs and threshold sweeps.
#[derive(Parser, Debug)]
#[command(name = "alternating", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the synthetic corpus as CSV files plus corpus.json.
    Generate(Flags),
    /// Run the configured algorithms on the corpus and write results.
    Run(Flags),
    /// Recompute per_stream.csv and summary.csv from the record CSVs of a run.
    Summarize {
        /// Output directory of a previous `run`.
        dir: PathBuf,
    },
    /// Run the (delta, W) sensitivity grid.
    Sweep(Flags),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgorithmArg {
    StaticElm,
    Oselm,
    PairedLearner,
    AlternatingLearners,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::StaticElm => Algorithm::StaticElm,
            AlgorithmArg::Oselm => Algorithm::Oselm,
            AlgorithmArg::PairedLearner => Algorithm::PairedLearner,
            AlgorithmArg::AlternatingLearners => Algorithm::AlternatingLearners,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PairedArg {
    ShortBetter,
    ShortBetterUnacceptable,
}

/// Flags mirror the config file; keys set in `--config` win over flags.
#[derive(Args, Debug, Default)]
struct Flags {
    /// TOML config; its keys override the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, short = 'o')]
    output_dir: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<AlgorithmArg>,
    #[arg(long)]
    paired_registration: Option<PairedArg>,
    /// Skip the per-step record CSVs.
    #[arg(long)]
    no_records: bool,
    /// Use this stream CSV instead of generating a corpus.
    #[arg(long)]
    stream_csv: Option<PathBuf>,
    /// Also run the sensitivity grid during `run`.
    #[arg(long)]
    sweep: bool,

    #[arg(long)]
    n_abrupt: Option<usize>,
    #[arg(long)]
    n_gradual: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    eta_noise_sigma: Option<f64>,
    #[arg(long)]
    sigma_y_rel: Option<f64>,

    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    least_wait: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    initial_batches: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Hidden width K.
    #[arg(long)]
    width: Option<usize>,
    /// Hidden layer seed.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, value_delimiter = ',')]
    sweep_deltas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    sweep_windows: Vec<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Flags {
    /// Defaults, then flags, then the config file.
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        set(&mut cfg.output_dir, self.output_dir);
        set(&mut cfg.threads, self.threads);
        if !self.algorithms.is_empty() {
            cfg.algorithms = self.algorithms.into_iter().map(Algorithm::from).collect();
        }
        set(
            &mut cfg.paired_registration,
            self.paired_registration.map(|p| match p {
                PairedArg::ShortBetter => PairedRegistration::ShortBetter,
                PairedArg::ShortBetterUnacceptable => PairedRegistration::ShortBetterUnacceptable,
            }),
        );
        if self.no_records {
            cfg.write_records = false;
        }
        if self.stream_csv.is_some() {
            cfg.stream_csv = self.stream_csv;
        }
        if self.sweep {
            cfg.sweep.enabled = true;
        }
        let c = &mut cfg.corpus;
        set(&mut c.n_abrupt, self.n_abrupt);
        set(&mut c.n_gradual, self.n_gradual);
        set(&mut c.base_seed, self.base_seed);
        set(&mut c.length, self.length);
        set(&mut c.eta_noise_sigma, self.eta_noise_sigma);
        set(&mut c.sigma_y_rel, self.sigma_y_rel);
        let k = &mut cfg.controller;
        set(&mut k.window, self.window);
        set(&mut k.delta, self.delta);
        set(&mut k.tau, self.tau);
        set(&mut k.least_wait, self.least_wait);
        set(&mut k.batch_size, self.batch_size);
        set(&mut k.initial_batches, self.initial_batches);
        set(&mut k.lambda, self.lambda);
        set(&mut k.width, self.width);
        set(&mut k.seed, self.seed);
        if !self.sweep_deltas.is_empty() {
            cfg.sweep.deltas = self.sweep_deltas;
        }
        if !self.sweep_windows.is_empty() {
            cfg.sweep.windows = self.sweep_windows;
        }
        match &self.config {
            Some(path) => cfg.overlay_path(path),
            None => {
                cfg.validate()?;
                Ok(cfg)
            }
        }
    }
}

fn print_summaries(results: &runner::RunResults) {
    println!("{:<22} {:>9} {:>10} {:>10} {:>8}", "algorithm", "n_streams", "mean_mape", "sd_mape", "resets");
    for s in &results.summaries {
        println!("{:<22} {:>9} {:>10.4} {:>10.4} {:>8}", s.algorithm, s.n_streams, s.mean, s.sd, s.total_resets);
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(flags) => {
            let cfg = flags.resolve()?;
            let corpus = runner::generate(&cfg)?;
            println!("wrote {} streams to {}", corpus.len(), cfg.output_dir.display());
        }
        Command::Run(flags) => {
            let cfg = flags.resolve()?;
            let report = runner::run_experiment(&cfg)?;
            print_summaries(&report.results);
            println!("results in {}", report.dir.display());
        }
        Command::Summarize { dir } => {
            let results = runner::summarize_dir(&dir)?;
            print_summaries(&results);
        }
        Command::Sweep(flags) => {
            let cfg = flags.resolve()?;
            let cells = runner::run_sweep(&cfg)?;
            println!("{:>6} {:>4} {:>10} {:>10}", "delta", "W", "median", "mean");
            for c in &cells {
                println!("{:>6} {:>4} {:>10.4} {:>10.4}", c.delta, c.window, c.summary.median, c.summary.mean);
            }
            println!("results in {}", cfg.output_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(Error::exit_code(&e)).unwrap_or(1))
        }
    }
}
