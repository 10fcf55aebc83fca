//! Command-line runner: execute scenario configs, print model-space
//! tables, and emit the bundled example configurations.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use warplab::config::{self, parse_scenario};
use warplab::error::Error;
use warplab::pipeline;

#[derive(Parser)]
#[command(
    name = "warplab",
    version,
    about = "Volume growth and end counting for immersed submanifolds of warped ambient spaces"
)]
struct Cli {
    /// Output directory (defaults to $WARPLAB_OUT, then ./warplab-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = auto)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Tolerance override, name=value (repeatable)
    #[arg(long = "tolerance", global = true, value_name = "NAME=VALUE")]
    tolerances: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario configuration file
    Run { config: PathBuf },
    /// Print the model-space table for a warping spec
    ModelTables {
        /// warping spec, e.g. space_form:-1 or custom:r + 0.1*r^3
        spec: String,
        /// model dimension
        #[arg(short)]
        m: usize,
        /// radius grid a:b:n (n samples from a to b inclusive)
        #[arg(long)]
        grid: String,
    },
    /// List bundled scenarios or emit one as a ready config
    Examples {
        #[command(subcommand)]
        what: ExamplesCommand,
    },
}

#[derive(Subcommand)]
enum ExamplesCommand {
    /// Print the bundled scenario names
    List,
    /// Print the named bundled configuration
    Emit { name: String },
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "grid must be a:b:n, got `{spec}`"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Config(format!("grid start `{}` is not a number", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("grid end `{}` is not a number", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::Config(format!("grid count `{}` is not an integer", parts[2])))?;
    if n == 0 || !(b >= a) {
        return Err(Error::Config(format!("grid needs a <= b and n >= 1: `{spec}`")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|k| a + k as f64 * (b - a) / (n - 1) as f64)
        .collect())
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("WARPLAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("warplab-out"))
}

fn execute(cli: &Cli) -> Result<u8, Error> {
    if cli.threads > 0 {
        // ignore the error when a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match &cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(config)
                .map_err(|e| Error::Config(format!("reading {}: {e}", config.display())))?;
            let mut cfg = parse_scenario(&text)?;
            for spec in &cli.tolerances {
                let (name, value) = spec.split_once('=').ok_or_else(|| {
                    Error::Config(format!("tolerance override must be name=value, got `{spec}`"))
                })?;
                let value: f64 = value.parse().map_err(|_| {
                    Error::Config(format!("tolerance `{name}` has bad value `{value}`"))
                })?;
                cfg.tolerances.set(name, value)?;
            }
            let dir = match (&cli.out, std::env::var_os("WARPLAB_OUT"), &cfg.output_dir) {
                (Some(d), _, _) => d.clone(),
                (None, Some(d), _) => PathBuf::from(d),
                (None, None, Some(d)) => PathBuf::from(d),
                (None, None, None) => PathBuf::from("warplab-out"),
            }
            .join(&cfg.name);
            let outcome = pipeline::run(&cfg, &dir)?;
            println!(
                "scenario {}: {} verdict failure(s); outputs in {}",
                cfg.name,
                outcome.failures,
                outcome.out_dir.display()
            );
            Ok(if outcome.failures > 0 { 1 } else { 0 })
        }
        Command::ModelTables { spec, m, grid } => {
            let grid = parse_grid(grid)?;
            let table = pipeline::model_tables(spec, *m, &grid)?;
            print!("{table}");
            if cli.out.is_some() || std::env::var_os("WARPLAB_OUT").is_some() {
                let dir = out_dir(cli);
                std::fs::create_dir_all(&dir)
                    .map_err(|e| Error::Io(std::io::Error::other(format!("creating {}: {e}", dir.display()))))?;
                std::fs::write(dir.join("model_tables.csv"), &table)
                    .map_err(|e| Error::Io(std::io::Error::other(format!("writing model_tables.csv: {e}"))))?;
            }
            Ok(0)
        }
        Command::Examples { what } => match what {
            ExamplesCommand::List => {
                for (name, _) in config::BUNDLED {
                    println!("{name}");
                }
                Ok(0)
            }
            ExamplesCommand::Emit { name } => {
                print!("{}", config::bundled(name)?);
                Ok(0)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_) | Error::InvalidArgument(_) => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}
