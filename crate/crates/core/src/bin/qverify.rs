use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use qverify::catalog::{self, Catalog, Filter, ModeRequest, VerifyOptions};
use qverify::coeffring::{parse_rational, LaurentPoly};
use qverify::dsl::{self, Env};
use qverify::partitions;

#[derive(Parser)]
#[command(name = "qverify", version, about = "Exact checks of q-series and weighted partition identities")]
struct Cli {
    /// Catalog file (default: $QVERIFY_CATALOG, then the built-in catalog)
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog ids with their tags and anchors
    List,
    /// Verify one identity
    Verify {
        id: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Verify every selected identity
    VerifyAll {
        #[command(flatten)]
        opts: RunOpts,
        /// Worker threads (default: available parallelism)
        #[arg(long)]
        jobs: Option<usize>,
        /// Only run entries with these ids or tags
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Skip entries with these ids or tags
        #[arg(long, value_delimiter = ',')]
        skip: Vec<String>,
    },
    /// Expand a DSL expression as a q-series
    Expand {
        expr: String,
        #[arg(long, default_value_t = 40)]
        order: usize,
        /// Rational value for z (symbolic when absent)
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// Rational value for c (symbolic when absent)
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
    },
    /// TSV table of a partition counter for n = 1..=max
    Table {
        counter: String,
        #[arg(long, default_value_t = 20)]
        max: u32,
        /// Rank m for the counter N(m, n)
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i64>,
    },
    /// TSV table of a weighted partition sum for n = 1..=max
    Wtable {
        weight: String,
        #[arg(long, default_value_t = 10)]
        max: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Specialize,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct RunOpts {
    #[arg(long, default_value_t = 40)]
    order: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random points per specialized entry
    #[arg(long, default_value_t = 3)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Include wall time in JSON output
    #[arg(long)]
    timing: bool,
}

impl RunOpts {
    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            order: self.order,
            mode: match self.mode {
                ModeArg::Auto => ModeRequest::Auto,
                ModeArg::Specialize => ModeRequest::Specialize,
            },
            seed: self.seed,
            points: self.points,
        }
    }
}

/// `println!` that exits quietly when stdout is closed (e.g. piped to `head`).
macro_rules! out {
    ($($t:tt)*) => {
        if writeln!(std::io::stdout(), $($t)*).is_err() {
            std::process::exit(0);
        }
    };
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("qverify: {msg}");
    ExitCode::from(2)
}

fn emit(reports: &[catalog::Report], opts: &RunOpts) -> ExitCode {
    match opts.format {
        Format::Json => out!("{}", catalog::reports_to_json(reports, opts.timing)),
        Format::Text => {
            for r in reports {
                out!("{}", r.text_line());
            }
            let bad = reports.iter().filter(|r| !r.verdict.is_pass()).count();
            if reports.len() > 1 {
                out!("{} checked, {} passed, {} not passed", reports.len(), reports.len() - bad, bad);
            }
        }
    }
    if reports.iter().all(|r| r.verdict.is_pass()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn rational_arg(name: &str, v: &Option<String>) -> Result<Option<BigRational>, String> {
    v.as_deref()
        .map(|s| parse_rational(s).ok_or_else(|| format!("--{name}: `{s}` is not a rational")))
        .transpose()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let load = || Catalog::load(cli.catalog.as_deref());
    match &cli.command {
        Command::List => {
            let cat = match load() {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            for e in cat.entries() {
                out!("{}\t{}\t{}\t{}", e.id, e.tags.join(","), e.default_mode, e.anchor);
            }
            ExitCode::SUCCESS
        }
        Command::Verify { id, opts } => {
            let cat = match load() {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            match cat.verify(id, &opts.verify_options()) {
                Ok(r) => emit(&[r], opts),
                Err(e) => usage(e),
            }
        }
        Command::VerifyAll {
            opts,
            jobs,
            only,
            skip,
        } => {
            let cat = match load() {
                Ok(c) => c,
                Err(e) => return usage(e),
            };
            let filter = Filter {
                only: only.clone(),
                skip: skip.clone(),
            };
            let reports = cat.verify_all(&opts.verify_options(), &filter, *jobs);
            emit(&reports, opts)
        }
        Command::Expand { expr, order, z, c } => {
            let (z0, c0) = match (rational_arg("z", z), rational_arg("c", c)) {
                (Ok(z0), Ok(c0)) => (z0, c0),
                (Err(e), _) | (_, Err(e)) => return usage(e),
            };
            let e = match dsl::parse(expr) {
                Ok(e) => e,
                Err(err) => return usage(format!("syntax error: {err}")),
            };
            let env = Env::<LaurentPoly>::new(*order)
                .bind_constant("z", z0.map_or_else(LaurentPoly::z, LaurentPoly::constant))
                .bind_constant("c", c0.map_or_else(LaurentPoly::c, LaurentPoly::constant));
            match dsl::eval(&e, &env) {
                Ok(s) => {
                    out!("{s}");
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("qverify: {err}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Table { counter, max, m } => {
            if !partitions::COUNTERS.contains(&counter.as_str()) {
                return usage(format!("unknown counter `{counter}`"));
            }
            out!("n\t{counter}");
            for n in 1..=*max {
                match partitions::count(counter, n, *m) {
                    Ok(v) => out!("{n}\t{v}"),
                    Err(e) => return usage(e),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Wtable { weight, max } => {
            if !partitions::WEIGHTS.contains(&weight.as_str()) {
                return usage(format!("unknown weight `{weight}`"));
            }
            out!("n\t{weight}");
            for n in 1..=*max {
                match partitions::weighted_sum(weight, n) {
                    Ok(v) => out!("{n}\t{v}"),
                    Err(e) => return usage(e),
                }
            }
            ExitCode::SUCCESS
        }
    }
}
