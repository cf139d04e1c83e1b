//! `nilcurv`: exact curvature invariants of two-step nilmanifolds from the
//! command line.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage error or
//! unsupported request, 3 parse error, 4 resource limit.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nilcurv::invariants::LaplacianPolicy;
use nilcurv::isospec::DEFAULT_RADIUS2;
use nilcurv::{OracleOptions, Rational};

use commands::{CliResult, Scope, Source};
use report::Report;

#[derive(Parser)]
#[command(name = "nilcurv", version, about = "Exact curvature invariants of two-step nilmanifolds")]
struct Cli {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Catalog id, e.g. fourthree or heis3-2-0.
    #[arg(long)]
    example: Option<String>,
    /// j-map JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptionalSourceArgs {
    /// Catalog id; defaults to the whole catalog.
    #[arg(long)]
    example: Option<String>,
    /// j-map JSON file; defaults to the whole catalog.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PairArgs {
    /// Catalog pair: fourthree, fivethree, sixtwo, heis3 or heis7.
    #[arg(long)]
    pair: Option<String>,
    /// Two j-map JSON files.
    #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
    files: Option<Vec<PathBuf>>,
}

#[derive(Args)]
struct HeavyArgs {
    /// Omit the Laplacian-type invariants.
    #[arg(long, conflicts_with = "heavy")]
    skip_heavy: bool,
    /// Require the Laplacian-type invariants; fails with exit code 4 above
    /// the dimension limit.
    #[arg(long)]
    heavy: bool,
    /// Largest total dimension for which Laplacian-type invariants are computed.
    #[arg(long, default_value_t = nilcurv::invariants::DEFAULT_MAX_LAPLACIAN_DIM)]
    max_heavy_dim: usize,
}

impl HeavyArgs {
    fn options(&self) -> OracleOptions {
        let laplacian = if self.skip_heavy {
            LaplacianPolicy::Skip
        } else if self.heavy {
            LaplacianPolicy::Require
        } else {
            LaplacianPolicy::Auto
        };
        OracleOptions {
            laplacian,
            max_laplacian_dim: self.max_heavy_dim,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Curvature invariants of one j map.
    Invariants {
        #[command(flatten)]
        source: SourceArgs,
        /// Keep only invariants of this order.
        #[arg(long, value_parser = ["2", "4", "6"])]
        order: Option<String>,
        #[command(flatten)]
        heavy: HeavyArgs,
    },
    /// Invariants of two j maps side by side, with exact differences.
    Compare {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_parser = ["2", "4", "6"])]
        order: Option<String>,
        #[command(flatten)]
        heavy: HeavyArgs,
    },
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        #[arg(value_enum)]
        scope: Scope,
        #[command(flatten)]
        source: OptionalSourceArgs,
        #[command(flatten)]
        heavy: HeavyArgs,
    },
    /// Evaluate a trace invariant such as "aabc|bc".
    TraceInv {
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Emit the Heisenberg-type j map of a Clifford module.
    Clifford {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the hypotheses of the Gordon–Wilson isospectrality criterion.
    GwCheck {
        #[command(flatten)]
        pair: PairArgs,
        /// Half-width of the integer box of central vectors.
        #[arg(long)]
        zbox: Option<usize>,
        /// Squared length bound for kernel-lattice spectra, e.g. 25 or 49/2.
        #[arg(long, default_value_t = DEFAULT_RADIUS2.to_string())]
        radius2: String,
    },
    /// Catalog operations.
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// List catalog entries and pairs.
    List,
}

fn source(example: Option<String>, file: Option<PathBuf>) -> Option<Source> {
    example.map(Source::Example).or(file.map(Source::File))
}

fn order(o: Option<String>) -> Option<u32> {
    o.map(|s| s.parse().expect("validated by clap"))
}

enum Output {
    Report(Report, bool),
    Raw(String),
}

fn execute(command: Command) -> CliResult<Output> {
    let report = |r: (Report, bool)| Output::Report(r.0, r.1);
    Ok(match command {
        Command::Invariants { source: s, order: o, heavy } => {
            let src = source(s.example, s.file).expect("required group");
            report(commands::invariants(&src, order(o), &heavy.options())?)
        }
        Command::Compare { pair, order: o, heavy } => {
            let (a, b) = commands::pair_sources(pair.pair.as_deref(), pair.files.as_deref())?;
            report(commands::compare(&a, &b, order(o), &heavy.options())?)
        }
        Command::Verify { scope, source: s, heavy } => {
            let src = source(s.example, s.file);
            report(commands::verify(scope, src.as_ref(), &heavy.options())?)
        }
        Command::TraceInv { spec, source: s } => {
            let src = source(s.example, s.file).expect("required group");
            report(commands::trace_inv(&spec, &src)?)
        }
        Command::Clifford { r, a, b, out } => {
            let j = commands::clifford(r, a, b)?;
            match out {
                Some(path) => report(commands::clifford_written(&path, &j, r, a, b)?),
                None => Output::Raw(j.to_json() + "\n"),
            }
        }
        Command::GwCheck { pair, zbox, radius2 } => {
            let (a, b) = commands::pair_sources(pair.pair.as_deref(), pair.files.as_deref())?;
            let radius2: Rational = radius2.parse()?;
            report(commands::gw_check(&a, &b, zbox, &radius2)?)
        }
        Command::Catalog {
            command: CatalogCommand::List,
        } => report(commands::catalog_list()?),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let start = Instant::now();
    match execute(cli.command) {
        Ok(Output::Raw(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Output::Report(report, ok)) => {
            let timing = cli.timing.then(|| start.elapsed());
            let text = match cli.format {
                Format::Json => report.to_json(timing),
                Format::Csv => report.to_csv(timing),
            };
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
