use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod io;
mod lower;

#[derive(Parser)]
#[command(
    name = "wassdeconv",
    version,
    about = "Deconvolution estimates and Wasserstein risk studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    /// Chi-square decay across perturbation counts.
    Chi2,
    /// Window-probability tail table of the noise.
    Tails,
    /// Sandwich bounds for powered stable densities.
    Stable,
    /// Lower-bound proxy along the perturbation schedule.
    Proxy,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo risk study; writes rows.csv, summary.csv and plot.csv.
    Rates {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Lower-bound computations; the config is optional for every study.
    Lowerbound {
        #[arg(long, value_enum)]
        study: Study,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo check of the estimator's Fourier transform.
    Fourier {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Density estimate from a headerless CSV of observations.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// W_p between two discrete measures given as headerless CSVs.
    Wasserstein {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Treat the last column as a weight.
        #[arg(long)]
        weighted: bool,
    },
    /// Runs the kernel invariant suite; exits nonzero on a failed check.
    Kernelcheck {
        #[arg(long)]
        p: f64,
    },
    /// Tabulates a deconvolution kernel as `x,value`.
    DeconvKernel {
        #[arg(long)]
        p: f64,
        /// `dirac-zero`, `gaussian:SIGMA`, `laplace:B`, `cauchy:S`,
        /// `stable:ALPHA` or `powered-stable:ALPHA:K`.
        #[arg(long)]
        noise: String,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 10.0)]
        half_width: f64,
        #[arg(long, default_value_t = 201)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Rates { config, out_dir } => commands::rates(&config, &out_dir),
        Command::Lowerbound { study, config, out } => lower::run(study, config.as_deref(), &out),
        Command::Fourier { config, out } => commands::fourier(config.as_deref(), &out),
        Command::Estimate {
            config,
            samples,
            out,
        } => commands::estimate(&config, &samples, &out),
        Command::Wasserstein { a, b, p, weighted } => commands::wasserstein(&a, &b, p, weighted),
        Command::Kernelcheck { p } => commands::kernelcheck(p),
        Command::DeconvKernel {
            p,
            noise,
            h,
            half_width,
            count,
            out,
        } => commands::deconv_kernel(p, &noise, h, half_width, count, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
