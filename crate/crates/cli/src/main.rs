//! `taxi`: exact counts, rigorous bounds and contour checks from the command line.

mod cache;
mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::cache::Cache;
use crate::commands::{Ctx, Method, Preset};
use crate::error::CliResult;
use crate::output::{Format, Output};

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Parser)]
#[command(name = "taxi", version, about = "Taxi walks on the Manhattan lattice: counts, bounds and Peierls contours")]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true, default_value_t = default_jobs())]
    jobs: usize,

    /// Decimals in reported bounds.
    #[arg(long, global = true, default_value_t = taxiwalk::bounds::DEFAULT_PRECISION)]
    precision: u32,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Where tables, polygon lists and matrices are cached.
    #[arg(long, global = true, env = "TAXI_CACHE_DIR", default_value = "taxi-cache")]
    cache_dir: PathBuf,

    /// Allow computations that take hours.
    #[arg(long, global = true)]
    long_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Taxi-walk counts c_n.
    #[command(subcommand)]
    Walks(WalksCmd),
    /// Bridges and irreducible bridges.
    #[command(subcommand)]
    Bridges(BridgesCmd),
    /// Transfer-matrix upper bound from A(m, n).
    Alm {
        #[arg(long, default_value_t = taxiwalk::almbound::DEFAULT_M)]
        m: usize,
        #[arg(long, default_value_t = taxiwalk::almbound::DEFAULT_N)]
        n: usize,
        /// Also write the matrix as CSV into the cache directory.
        #[arg(long)]
        save_matrix: bool,
    },
    /// Polygons and the Goulden-Jackson upper bound.
    #[command(subcommand)]
    Gj(GjCmd),
    /// Every bound method side by side.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Peierls contour checks and the tail estimate.
    #[command(subcommand)]
    Contour(ContourCmd),
}

#[derive(Subcommand)]
enum WalksCmd {
    /// Counts c_1..c_max, checked against the cache and the published table.
    Table {
        #[arg(long)]
        max_n: usize,
    },
    /// Subadditive upper bound c_n^(1/n).
    Bound {
        #[arg(long, default_value_t = 60)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum BridgesCmd {
    /// Counts b_0..b_max and the lower bound b_max^(1/max).
    Table {
        #[arg(long)]
        max_n: usize,
    },
    /// Irreducible-bridge counts by series inversion and the root bound.
    Irreducible {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
}

#[derive(Subcommand)]
enum GjCmd {
    /// Taxi polygons up to a maximum length.
    Polygons {
        #[arg(long)]
        max_len: usize,
    },
    /// l_n: turn words avoiding tt and every polygon.
    Count {
        #[arg(long)]
        polygon_max: usize,
        #[arg(long)]
        n: usize,
    },
    /// Upper bound l_n^(1/n).
    Bound {
        #[arg(long)]
        polygon_max: usize,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// Runs the chosen methods and checks every upper bound against every lower bound.
    Summary {
        #[arg(long, value_enum, default_value_t = Preset::Desk)]
        preset: Preset,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::Subadditive, Method::Bridge, Method::Irreducible, Method::Alm, Method::Gj])]
        methods: Vec<Method>,
    },
}

#[derive(Subcommand)]
enum ContourCmd {
    /// Sweeps configurations of B_n^e and checks the contour construction.
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Visit every configuration instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Peierls tail sum r^L / (1 - r) with r = mu^4 / (1 + lambda).
    Tail {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        m: usize,
    },
}

fn run(cli: Cli) -> CliResult<Output> {
    let ctx = Ctx {
        jobs: cli.jobs,
        precision: cli.precision,
        cache: Cache::new(&cli.cache_dir),
        long_run: cli.long_run,
    };
    ctx.validate()?;
    match cli.command {
        Command::Walks(WalksCmd::Table { max_n }) => commands::walks_table(&ctx, max_n),
        Command::Walks(WalksCmd::Bound { n }) => commands::walks_bound(&ctx, n),
        Command::Bridges(BridgesCmd::Table { max_n }) => commands::bridges_table(&ctx, max_n),
        Command::Bridges(BridgesCmd::Irreducible { order, tolerance }) => {
            commands::bridges_irreducible(&ctx, order, tolerance)
        }
        Command::Alm { m, n, save_matrix } => commands::alm(&ctx, m, n, save_matrix),
        Command::Gj(GjCmd::Polygons { max_len }) => commands::gj_polygons(&ctx, max_len),
        Command::Gj(GjCmd::Count { polygon_max, n }) => commands::gj_count(&ctx, polygon_max, n),
        Command::Gj(GjCmd::Bound { polygon_max, n }) => commands::gj_bound(&ctx, polygon_max, n),
        Command::Bounds(BoundsCmd::Summary { preset, methods }) => commands::bounds_summary(&ctx, preset, &methods),
        Command::Contour(ContourCmd::Check { n, m, exhaustive, samples, seed }) => {
            commands::contour_check(&ctx, n, m, exhaustive, samples, seed)
        }
        Command::Contour(ContourCmd::Tail { mu, lambda, m }) => commands::contour_tail(mu, lambda, m),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let format = cli.format;
    let result = run(cli).and_then(|out| out.render(format));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
