//! Command-line front end for Bayesian context-tree inference: model
//! selection, entropy-rate estimation, prediction and posterior sampling
//! over whitespace-separated integer series files.

mod commands;
mod dataio;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bct",
    about = "Bayesian context trees: model selection, sampling, prediction and entropy estimation for discrete series",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Tables for reading.
    Human,
    /// One `key=value` record per line.
    Records,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Maximum model depth D.
    #[arg(long, default_value_t = 10)]
    pub depth: usize,

    /// Prior hyperparameter in (0,1); default 1 - 2^-(m-1).
    #[arg(long)]
    pub beta: Option<f64>,

    /// Alphabet size m; default: largest symbol + 1.
    #[arg(long)]
    pub alphabet: Option<usize>,

    /// Monte Carlo sample count N.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,

    /// Master seed for all randomised steps.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Histogram bin count.
    #[arg(long, default_value_t = 100)]
    pub bins: usize,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    /// Treat the first D symbols of the input file as the initial context.
    #[arg(long)]
    pub context_in_file: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Report the maximum a posteriori tree model of a series.
    Map {
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Posterior distribution of the entropy rate, with classical baselines.
    Entropy {
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Write the posterior histogram as CSV (bin_left,bin_right,count).
        #[arg(long)]
        hist_out: Option<PathBuf>,
        /// Comma-separated plug-in block lengths.
        #[arg(long, default_value = "5,6,7")]
        plugin_k: String,
    },
    /// One-step-ahead predictive distributions, iterated over a horizon.
    Predict {
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Number of steps to predict.
        #[arg(long, default_value_t = 1)]
        horizon: usize,
        /// Future symbols to condition on (whitespace separated); steps
        /// beyond the supplied ones are sampled.
        #[arg(long)]
        future: Option<String>,
    },
    /// Dump i.i.d. model samples from the posterior (or the prior).
    Sample {
        /// Input series (omit with --prior).
        input: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        /// Sample from the prior instead of a data posterior.
        #[arg(long)]
        prior: bool,
        /// Also dump parameter draws per sampled tree.
        #[arg(long)]
        params: bool,
        /// Write the sampled-depth histogram as CSV (depth,count).
        #[arg(long)]
        depth_hist: Option<PathBuf>,
    },
    /// Classical entropy-rate estimators only.
    Baselines {
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated plug-in block lengths.
        #[arg(long, default_value = "5,6,7")]
        plugin_k: String,
    },
    /// Regenerate desk-scale analogues of the reference experiments
    /// (fig2, fig5, fig6, fig7a, tables) on built-in chains.
    Reproduce {
        /// One of: fig2, fig5, fig6, fig7a, tables.
        target: String,
        #[command(flatten)]
        common: CommonArgs,
        /// Directory for CSV outputs.
        #[arg(long, default_value = "reproduce-out")]
        out_dir: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Map { input, common } => commands::cmd_map(common, input),
        Cmd::Entropy {
            input,
            common,
            hist_out,
            plugin_k,
        } => commands::cmd_entropy(common, input, hist_out.as_deref(), plugin_k),
        Cmd::Predict {
            input,
            common,
            horizon,
            future,
        } => commands::cmd_predict(common, input, *horizon, future.as_deref()),
        Cmd::Sample {
            input,
            common,
            prior,
            params,
            depth_hist,
        } => commands::cmd_sample(common, input.as_deref(), *prior, *params, depth_hist.as_deref()),
        Cmd::Baselines {
            input,
            common,
            plugin_k,
        } => commands::cmd_baselines(common, input, plugin_k),
        Cmd::Reproduce {
            target,
            common,
            out_dir,
        } => commands::cmd_reproduce(common, target, out_dir),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
