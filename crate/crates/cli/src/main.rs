mod error;
mod jobs;
mod output;
mod scenario;

use clap::{Parser, Subcommand, ValueEnum};
use error::Result;
use jobs::{Bundle, Status};
use predlab::arcs::ArcSet;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Finite prediction errors and their asymptotics from spectral densities.
#[derive(Parser, Debug)]
#[command(name = "predlab", version)]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(64..=4096))]
    precision: Option<u32>,

    /// Largest prediction horizon n.
    #[arg(long = "n", global = true, value_parser = clap::value_parser!(u64).range(1..=5000))]
    n: Option<u64>,

    /// Directory for report files; without it the primary report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Run even when the precision is below the budget for n.
    #[arg(long, global = true)]
    override_budget: bool,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Levinson trace sigma2_n, n = 0..N, of a density.
    Sigma { density: String },
    /// Transfinite diameter of a union of arcs, e.g. "[(pi/2,pi/4)]".
    Tau { arcs: String },
    /// Geometric mean G(f) and the Szego classification.
    Geomean { density: String },
    /// Minimal eigenvalues of T_n against sigma2_n.
    Eigen {
        density: String,
        /// Every n instead of a geometric grid.
        #[arg(long)]
        all: bool,
    },
    /// Runs one verification and reports its verdict.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(jobs::VERIFY_IDS))]
        id: String,
        /// Density under test; each verification has a default.
        #[arg(long)]
        density: Option<String>,
        /// Factor g for the ratio theorem.
        #[arg(long)]
        factor: Option<String>,
    },
    /// Runs the scenarios of a TOML config file.
    Run {
        config: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 4)]
        jobs: usize,
    },
}

fn default_n(id: &str) -> usize {
    match id {
        "rosenblatt2" => 400,
        "inoue" | "hat-pollaczek" => 500,
        "ratio" => 300,
        "eigen-rates" => 400,
        _ => 200,
    }
}

fn default_precision(id: &str) -> u32 {
    match id {
        "rosenblatt2" => 1024,
        "rosenblatt1" | "davisson" | "ratio" | "hat-pollaczek" => 512,
        "eigen-rates" => 128,
        _ => 256,
    }
}

fn emit(cli: &Cli, b: &Bundle) -> Result<i32> {
    match &cli.out {
        Some(dir) => {
            for p in output::write_all(dir, &b.artifacts)? {
                eprintln!("wrote {}", p.display());
            }
            for l in &b.lines {
                println!("{l}");
            }
        }
        None => {
            for l in &b.lines {
                eprintln!("{l}");
            }
            if let Some(a) = b.primary(cli.format == Format::Json) {
                print!("{}", a.body);
            }
        }
    }
    if let Status::Fail(m) | Status::Degenerate(m) = &b.status {
        eprintln!("{}: {m}", b.status.label());
    }
    Ok(b.status.code())
}

fn run(cli: &Cli) -> Result<i32> {
    let n = cli.n.map(|v| v as usize);
    match &cli.cmd {
        Command::Sigma { density } => {
            let f = jobs::parse_density(density)?;
            let (n, prec) = (n.unwrap_or(100), cli.precision.unwrap_or(256));
            for w in jobs::check_budget(&f, n, prec, cli.override_budget)? {
                eprintln!("warning: {w}");
            }
            emit(cli, &jobs::sigma(&f, n, prec)?)
        }
        Command::Tau { arcs } => emit(cli, &jobs::tau(&ArcSet::parse(arcs)?)?),
        Command::Geomean { density } => {
            let f = jobs::parse_density(density)?;
            emit(cli, &jobs::geomean(&f, cli.precision.unwrap_or(128))?)
        }
        Command::Eigen { density, all } => {
            let f = jobs::parse_density(density)?;
            let (n, prec) = (n.unwrap_or(100), cli.precision.unwrap_or(128));
            for w in jobs::check_budget(&f, n, prec, cli.override_budget)? {
                eprintln!("warning: {w}");
            }
            emit(cli, &jobs::eigen(&f, n, prec, *all)?)
        }
        Command::Verify { id, density, factor } => {
            let f = match density {
                Some(s) => jobs::parse_density(s)?,
                None => jobs::default_density(id)?,
            };
            let g = factor.as_deref().map(jobs::parse_factor).transpose()?;
            let n = n.unwrap_or_else(|| default_n(id));
            let prec = cli.precision.unwrap_or_else(|| default_precision(id));
            for w in jobs::check_budget(&f, n, prec, cli.override_budget)? {
                eprintln!("warning: {w}");
            }
            emit(cli, &jobs::verify(id, &f, g.as_ref(), n, prec)?)
        }
        Command::Run { config, jobs } => {
            let ov = scenario::Overrides { precision: cli.precision, n_max: n, out: cli.out.clone() };
            let cfg = scenario::load(config, &ov)?;
            if cfg.scenarios.is_empty() {
                eprintln!("warning: {} lists no scenarios", cfg.path);
                return Ok(0);
            }
            let outcomes = scenario::run_all(&cfg, *jobs);
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&outcomes).expect("outcomes serialize")),
                Format::Csv => print!("{}", scenario::table(&outcomes)),
            }
            Ok(scenario::aggregate(&outcomes))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
