//! Argument parsing and dispatch. Flags override the config file.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{run_evaluate, run_explain, run_explain_class, run_mine, Selector};
use crate::config::{parse_k_grid, parse_methods, parse_weights, Overrides, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "cie", version, about = "Confident itemset explanations for black-box classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine confident itemsets and write store.json and store.txt.
    Mine {
        #[command(flatten)]
        shared: Shared,
    },
    /// Explain single predictions with the mined store.
    Explain {
        #[command(flatten)]
        shared: Shared,
        /// Instance index (0-based, data row order).
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        instance: Option<usize>,
        /// Explain every instance.
        #[arg(long)]
        all: bool,
        /// Store file; defaults to <out-dir>/store.json.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Classes reported per instance, best first.
        #[arg(long, default_value_t = 3)]
        limit: usize,
        /// Also write a two-column text rendering.
        #[arg(long)]
        text: bool,
    },
    /// Build class-wise explanations by local search.
    ExplainClass {
        #[command(flatten)]
        shared: Shared,
        /// Only this class.
        #[arg(long)]
        class: Option<String>,
        /// Store file; defaults to <out-dir>/store.json.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Compare explanation methods on a held-out split.
    Evaluate {
        #[command(flatten)]
        shared: Shared,
        /// Comma list of cie, greedy, random, frequent.
        #[arg(long)]
        methods: Option<String>,
        /// `start:end:step` or a comma list.
        #[arg(long)]
        k_grid: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct Shared {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub min_conf: Option<f64>,
    #[arg(long)]
    pub max_k: Option<usize>,
    #[arg(long)]
    pub theta1: Option<usize>,
    #[arg(long)]
    pub theta2: Option<usize>,
    #[arg(long)]
    pub theta3: Option<usize>,
    /// Six comma-separated reward weights.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl Shared {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            min_conf: self.min_conf,
            max_k: self.max_k,
            theta1: self.theta1,
            theta2: self.theta2,
            theta3: self.theta3,
            weights: self.weights.as_deref().map(parse_weights).transpose()?,
            delta: self.delta,
            seed: self.seed,
            threads: self.threads,
            out_dir: self.out_dir.clone(),
            methods: None,
            k_grid: None,
        })
    }
}

fn load(shared: &Shared, extra: impl FnOnce(&mut Overrides) -> Result<()>) -> Result<RunConfig> {
    let mut overrides = shared.overrides()?;
    extra(&mut overrides)?;
    let mut config = RunConfig::load(&shared.config)?;
    config.apply(&overrides);
    config.validate()?;
    Ok(config)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Runs one parsed command.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mine { shared } => {
            let config = load(&shared, |_| Ok(()))?;
            let out = in_pool(config.threads(), || run_mine(&config))?;
            log::info!("mined {} itemsets", out.store.len());
        }
        Command::Explain { shared, instance, all, store, limit, text } => {
            let config = load(&shared, |_| Ok(()))?;
            let selector = match (instance, all) {
                (Some(i), false) => Selector::One(i),
                (None, true) => Selector::All,
                _ => return Err(CliError::Usage("pass exactly one of --instance N or --all".into())),
            };
            in_pool(config.threads(), || run_explain(&config, store.as_deref(), selector, limit, text))?;
        }
        Command::ExplainClass { shared, class, store } => {
            let config = load(&shared, |_| Ok(()))?;
            in_pool(config.threads(), || run_explain_class(&config, store.as_deref(), class.as_deref()))?;
        }
        Command::Evaluate { shared, methods, k_grid } => {
            let config = load(&shared, |o| {
                o.methods = methods.as_deref().map(parse_methods).transpose()?;
                o.k_grid = k_grid.as_deref().map(parse_k_grid).transpose()?;
                Ok(())
            })?;
            in_pool(config.threads(), || run_evaluate(&config))?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main_exit_code() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run_with_args(std::env::args_os())
}
