//! Command-line front end: a batch `run` and an HTTP `serve`.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::data::{load_csv, CsvOptions};
use crate::error::{Error, Result};
use crate::pipeline::{run_pipeline, write_artifacts, PipelineConfig, DEFAULT_BUDGET};
use crate::projection::{Method, ProjectionConfig, TsneParams};
use crate::rating::DEFAULT_RATINGS;
use crate::service::{serve, ServiceConfig};
use crate::weights::{read_constraint_csv, SvmConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rankaxis", version, about = "Learn rankings from examples and inspect them in 2-D")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train weights from a constraint file and write every artifact.
    Run(RunArgs),
    /// Serve the session API over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Dataset CSV: label column, then numeric attributes.
    #[arg(long)]
    pub input: PathBuf,
    /// Pairwise preferences with columns preferred_id,other_id.
    #[arg(long)]
    pub constraints: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RATINGS, value_parser = parse_ratings)]
    pub ratings: usize,
    #[arg(long, default_value = "tsne")]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = TsneParams::default().perplexity)]
    pub perplexity: f64,
    #[arg(long, default_value_t = TsneParams::default().iterations)]
    pub iterations: usize,
    #[arg(long, default_value_t = TsneParams::default().learning_rate)]
    pub learning_rate: f64,
    /// Soft-margin penalty C.
    #[arg(long, default_value_t = SvmConfig::default().regularization)]
    pub regularization: f64,
    /// Maximum number of inconsistent triples reported.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overwrite existing artifacts.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "RANKAXIS_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "RANKAXIS_HOST", default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Idle sessions are dropped after this many seconds.
    #[arg(long, env = "RANKAXIS_SESSION_TTL", default_value_t = 3600)]
    pub session_ttl: u64,
    #[arg(long, env = "RANKAXIS_MAX_ROWS", default_value_t = 5000)]
    pub max_rows: usize,
    /// Persist saved schemes under this directory.
    #[arg(long, env = "RANKAXIS_SCHEME_DIR")]
    pub scheme_dir: Option<PathBuf>,
}

fn parse_ratings(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 2 {
        return Err("n must be ≥ 2".into());
    }
    Ok(n)
}

impl RunArgs {
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            n_ratings: self.ratings,
            svm: SvmConfig { regularization: self.regularization, ..SvmConfig::default() },
            projection: ProjectionConfig {
                method: self.method,
                seed: self.seed,
                tsne: TsneParams {
                    perplexity: self.perplexity,
                    iterations: self.iterations,
                    learning_rate: self.learning_rate,
                },
            },
            inconsistency_budget: self.budget,
            sampling_seed: self.seed,
        }
    }
}

pub fn run(args: &RunArgs) -> Result<Vec<PathBuf>> {
    if !args.delimiter.is_ascii() {
        return Err(Error::InvalidParameter("delimiter must be ASCII".into()));
    }
    let options = CsvOptions { delimiter: args.delimiter as u8, has_header: true };
    let dataset = load_csv(BufReader::new(File::open(&args.input)?), options)?;
    let constraints = read_constraint_csv(BufReader::new(File::open(&args.constraints)?), &dataset)?;
    let config = args.pipeline_config();
    config.projection.validate(dataset.len())?;
    let output = run_pipeline(&dataset, &constraints, &config)?;
    write_artifacts(&dataset, &output, &args.out, args.force)
}

fn serve_blocking(args: &ServeArgs) -> Result<()> {
    let config = ServiceConfig {
        max_rows: args.max_rows,
        session_ttl: Duration::from_secs(args.session_ttl),
        scheme_dir: args.scheme_dir.clone(),
    };
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()?;
    eprintln!("listening on http://{addr}");
    runtime.block_on(serve(addr, config))?;
    Ok(())
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run(args).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
        }),
        Command::Serve(args) => serve_blocking(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
