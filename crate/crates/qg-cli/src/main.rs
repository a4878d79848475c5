//! qg: planes of a given discriminant with their sphere points, CM points,
//! and glue data; statistics sweeps; counting tables; class groups; and the
//! self-test gate. Output is JSONL (full records) or CSV (flat projection),
//! byte-deterministic for a fixed configuration.

mod commands;
mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{parse_isotype, CountOpts, EnumerateOpts, IsotypeRef, StatsOpts};
use output::{CliError, CliResult, Emitter, Format, Sink};

#[derive(Parser)]
#[command(
    name = "qg",
    version,
    about = "Rational planes in Z^4, their sphere points, CM points, and glue groups"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Flat key=value config file (keys: out, format, threads, seed)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write records here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Record format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads (0 = one per core); falls back to QG_THREADS
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed recorded for reproducibility; current commands are fully
    /// deterministic, so it selects nothing yet
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RangeArgs {
    /// Single discriminant
    #[arg(long)]
    disc: Option<i64>,

    /// Range start (inclusive, with --to)
    #[arg(long)]
    from: Option<i64>,

    /// Range end (inclusive, with --from)
    #[arg(long)]
    to: Option<i64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// List every plane of the given discriminants with full Klein data
    Enumerate {
        #[command(flatten)]
        range: RangeArgs,

        /// Cross-check each D against the direct wedge enumeration (D ≤ 500)
        #[arg(long)]
        oracle: bool,

        /// Keep only square-free D
        #[arg(long)]
        squarefree: bool,

        /// Keep only planes sharing the glue type of plane INDEX at disc D
        #[arg(long, value_name = "D:INDEX", value_parser = parse_isotype)]
        isotype_of: Option<IsotypeRef>,
    },

    /// Equidistribution diagnostics per admissible D in a splitting family
    Stats {
        /// Range start (inclusive)
        #[arg(long)]
        from: i64,

        /// Range end (inclusive)
        #[arg(long)]
        to: i64,

        /// First splitting prime
        #[arg(long)]
        p: i64,

        /// Second splitting prime
        #[arg(long)]
        q: i64,

        /// Keep only square-free D
        #[arg(long)]
        squarefree: bool,

        /// Keep only planes sharing the glue type of plane INDEX at disc D
        #[arg(long, value_name = "D:INDEX", value_parser = parse_isotype)]
        isotype_of: Option<IsotypeRef>,
    },

    /// Sphere point counts per D, or finite-field counts for a prime --p
    Count {
        #[command(flatten)]
        range: RangeArgs,

        /// Tabulate |{x²+y²+z² = α}| over F_p for every α instead
        #[arg(long)]
        p: Option<i64>,
    },

    /// Glue divisors, order, and isotype key for every plane per D
    Glue {
        #[command(flatten)]
        range: RangeArgs,
    },

    /// Reduced forms of the class group of a negative discriminant
    Classgroup {
        /// Form discriminant (negative, ≡ 0 or 1 mod 4)
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
    },

    /// Run the acceptance criteria and print one line per criterion
    Selftest {
        /// Reduced sweep bounds (seconds instead of minutes)
        #[arg(long)]
        quick: bool,
    },
}

/// Settings after merging flags over the config file over environment
/// defaults: flags win, then config-file keys, then QG_THREADS, then
/// the built-in defaults.
struct Resolved {
    out: Option<PathBuf>,
    format: Format,
    threads: usize,
}

fn load_config(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {} is not key=value: {raw:?}",
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn resolve(cli: &Cli) -> CliResult<Resolved> {
    let cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => BTreeMap::new(),
    };
    for key in cfg.keys() {
        if !matches!(key.as_str(), "out" | "format" | "threads" | "seed") {
            return Err(CliError::Usage(format!("unknown config key {key:?}")));
        }
    }
    let format = match (&cli.format, cfg.get("format")) {
        (Some(f), _) => *f,
        (None, Some(s)) => match s.as_str() {
            "jsonl" => Format::Jsonl,
            "csv" => Format::Csv,
            other => {
                return Err(CliError::Usage(format!(
                    "config format must be jsonl or csv, got {other:?}"
                )))
            }
        },
        (None, None) => Format::Jsonl,
    };
    let out = cli.out.clone().or_else(|| cfg.get("out").map(PathBuf::from));
    let threads = match (cli.threads, cfg.get("threads")) {
        (Some(n), _) => n,
        (None, Some(s)) => s
            .parse()
            .map_err(|_| CliError::Usage(format!("config threads must be an integer, got {s:?}")))?,
        (None, None) => match std::env::var("QG_THREADS") {
            Ok(s) => s.parse().map_err(|_| {
                CliError::Usage(format!("QG_THREADS must be an integer, got {s:?}"))
            })?,
            Err(_) => 0,
        },
    };
    if let Some(seed) = cfg.get("seed") {
        seed.parse::<u64>()
            .map_err(|_| CliError::Usage(format!("config seed must be a u64, got {seed:?}")))?;
    }
    Ok(Resolved { out, format, threads })
}

fn run(cli: Cli) -> CliResult<()> {
    let resolved = resolve(&cli)?;
    if resolved.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(resolved.threads)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let sink = Sink::open(resolved.out.as_ref())?;
    match cli.cmd {
        Cmd::Enumerate { range, oracle, squarefree, isotype_of } => {
            let ds = commands::disc_range(range.disc, range.from, range.to)?;
            let emitter = Emitter::new(resolved.format, sink, commands::ENUMERATE_HEADER)?;
            commands::cmd_enumerate(EnumerateOpts { ds, oracle, squarefree, isotype_of }, emitter)
        }
        Cmd::Stats { from, to, p, q, squarefree, isotype_of } => {
            let emitter = Emitter::new(resolved.format, sink, commands::STATS_HEADER)?;
            commands::cmd_stats(StatsOpts { from, to, p, q, squarefree, isotype_of }, emitter)
        }
        Cmd::Count { range, p } => {
            let opts = CountOpts { disc: range.disc, from: range.from, to: range.to, p };
            let emitter = Emitter::new(resolved.format, sink, commands::count_header(&opts))?;
            commands::cmd_count(opts, emitter)
        }
        Cmd::Glue { range } => {
            let ds = commands::disc_range(range.disc, range.from, range.to)?;
            let emitter = Emitter::new(resolved.format, sink, commands::GLUE_HEADER)?;
            commands::cmd_glue(ds, emitter)
        }
        Cmd::Classgroup { disc } => {
            let emitter = Emitter::new(resolved.format, sink, commands::CLASSGROUP_HEADER)?;
            commands::cmd_classgroup(disc, emitter)
        }
        Cmd::Selftest { quick } => commands::cmd_selftest(quick, sink),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::Usage(e.to_string());
            eprintln!("{}", err.json_line());
            return err.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.json_line());
            e.exit_code()
        }
    }
}
