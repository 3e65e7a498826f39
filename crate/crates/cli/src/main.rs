//! Batch driver for certified rotation-coding computations: expansion of
//! rotation numbers into continued fractions, coding words and their
//! complexity, periodic-approximant verification, series evaluation, and
//! orbit-structure scans, plus a `run` mode that executes full
//! verification suites from a flat key=value config file.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use orbitword_cli::config::{ConfigError, RunConfig};
use orbitword_cli::report::{Format, Report};
use orbitword_cli::{commands, suites};
use orbitword_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "orbitword",
    version,
    about = "Certified rotation codings, continued-fraction approximants, and series verification"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Precision-escalation cap in bits (default 65536).
    #[arg(long, global = true)]
    precision_cap: Option<u32>,

    /// Longest letter stretch any scan may touch (default 1000000).
    #[arg(long, global = true)]
    horizon: Option<u64>,

    /// Worker threads for data-parallel scans (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Write output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Attach coarse wall-clock times to report rows (report bytes then
    /// vary between runs).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Continued-fraction expansions.
    #[command(subcommand)]
    Cf(CfCmd),
    /// Coding words and their subword complexity.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Periodic-approximant verification.
    #[command(subcommand)]
    Approx(ApproxCmd),
    /// Series evaluation and identities.
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Orbit-structure scans: mismatch census, orbit families, tail changes.
    #[command(subcommand)]
    Structure(StructureCmd),
    /// Run the configured verification suites and emit a report.
    Run(RunArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Rotation number: golden | sqrt:D | quad:a,b,c:+|- |
    /// logratio:re1,im1,re2,im2 | dec:DIGITS | rat:p/q | quot:...,
    /// optionally scaled with *p/q.
    #[arg(long)]
    theta: String,
    /// Partition boundaries; repeatable. Each occurrence is a comma list
    /// of boundaries (`1/4,3/4`); a string that only parses whole is one
    /// boundary (`-1,1` means frac(-theta+1)); semicolons split
    /// unambiguously.
    #[arg(long, allow_hyphen_values = true)]
    bounds: Vec<String>,
}

#[derive(Subcommand)]
enum CfCmd {
    /// Expand a rotation number and report quotients and convergents.
    Expand {
        #[arg(long)]
        theta: String,
        /// Number of quotient levels to compute.
        #[arg(long, default_value_t = 30)]
        depth: usize,
        /// Emit JSON instead of the text table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Emit the first letters of the coding word as CSV.
    Word {
        #[command(flatten)]
        instance: InstanceArgs,
        /// How many letters to emit.
        #[arg(long)]
        count: u64,
        /// Map letters through these weights (comma list, `re` or `re:im`).
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
    /// Count distinct subwords up to a length.
    Complexity {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Largest subword length to count.
        #[arg(long)]
        nmax: u32,
        /// Sample length to count over (default grows with nmax).
        #[arg(long)]
        sample: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ApproxCmd {
    /// Verify approximant structure, stability, and error bounds over a
    /// level range; emits one row per (n, w).
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Interval weights (comma list, `re` or `re:im`; default 0,1,...).
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
        /// Scan windows, comma list, each at least 2.
        #[arg(long)]
        w: String,
        /// Evaluation base: M or Me:RE,IM.
        #[arg(long)]
        base: String,
        /// Force the series precision (default: just enough to decide).
        #[arg(long)]
        digits: Option<u32>,
    },
}

#[derive(Subcommand)]
enum SeriesCmd {
    /// Interval-weighted series sum u(a_n) b^-n.
    T {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Interval weights (comma list; default 0,1,...).
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        #[arg(long)]
        base: String,
        #[arg(long, default_value_t = 120)]
        digits: u32,
        /// Emit JSON including terms_used and tail_bound.
        #[arg(long)]
        emit_json: bool,
    },
    /// Boundary-weighted series sum v_i b^-floor(n theta + r_i).
    S {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Boundary weights (comma list), one per boundary.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        #[arg(long)]
        base: String,
        #[arg(long, default_value_t = 120)]
        digits: u32,
        #[arg(long)]
        emit_json: bool,
    },
    /// Cosine-filtered sum against its half-sum pairing.
    Cos {
        /// Base with a complex direction, e.g. 2e:3/5,4/5.
        #[arg(long)]
        base: String,
        #[arg(long, default_value_t = 80)]
        digits: u32,
        #[arg(long)]
        emit_json: bool,
    },
    /// Sine-filtered sum against its half-sum pairing.
    Sin {
        /// Base with a complex direction, e.g. 2e:3/5,4/5.
        #[arg(long)]
        base: String,
        #[arg(long, default_value_t = 80)]
        digits: u32,
        #[arg(long)]
        emit_json: bool,
    },
}

#[derive(Subcommand)]
enum StructureCmd {
    /// Mismatch census over a level range: which (n, w) cells have a
    /// mismatch-free zone.
    Census {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
        /// Scan windows, comma list, each at least 2.
        #[arg(long)]
        w: String,
        /// Zone fraction in (0, 1].
        #[arg(long, default_value = "1/4")]
        eps: String,
    },
    /// Shift-sensitive orbit indices at one level, with certified
    /// boundary proximity.
    Iw {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Continued-fraction level.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        w: u32,
    },
    /// First letter changes past the periodic window.
    Tails {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Continued-fraction level.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        w: u32,
        /// Scan limit (default: period times the next denominator).
        #[arg(long)]
        limit: Option<u64>,
        /// How many changes to collect.
        #[arg(long)]
        want: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file; omitted = built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the canonical config (after overrides) and exit.
    #[arg(long)]
    emit_config: bool,
    #[arg(long)]
    theta: Option<String>,
    /// Override the boundary list (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    bounds: Vec<String>,
    /// Override the interval weights (comma list).
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,
    /// Override the boundary weights (comma list).
    #[arg(long, allow_hyphen_values = true)]
    svalues: Option<String>,
    /// Override the evaluation bases (repeatable).
    #[arg(long)]
    base: Vec<String>,
    #[arg(long)]
    n_from: Option<usize>,
    #[arg(long)]
    n_to: Option<usize>,
    /// Override the scan windows (comma list).
    #[arg(long)]
    w: Option<String>,
    #[arg(long)]
    digits: Option<u32>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    nmax: Option<u32>,
    #[arg(long)]
    v_bound: Option<u32>,
    #[arg(long)]
    eps: Option<String>,
    /// Which suites to run (comma list of approx,cf,code,series,structure).
    #[arg(long)]
    suites: Option<String>,
}

enum CliError {
    Usage(String),
    Config(ConfigError),
    Core(CoreError),
    Io(std::io::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(CoreError::PrecisionExhausted { .. })
            | CliError::Core(CoreError::Inconclusive(_)) => 3,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_pool(cli.jobs);
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) => m.clone(),
                CliError::Config(c) => c.to_string(),
                CliError::Core(c) => c.to_string(),
                CliError::Io(i) => i.to_string(),
            };
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(feature = "parallel")]
fn init_pool(jobs: usize) {
    if jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_pool(_jobs: usize) {}

fn deliver(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(text.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Global flags that outlive the subcommand match.
struct Globals {
    precision_cap_flag: Option<u32>,
    horizon_flag: Option<u64>,
    out: Option<PathBuf>,
    format: Format,
    timings: bool,
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    let Cli {
        cmd,
        precision_cap: precision_cap_flag,
        horizon: horizon_flag,
        jobs: _,
        out,
        format,
        timings,
    } = cli;
    let precision_cap = precision_cap_flag.unwrap_or(1 << 16);
    let horizon = horizon_flag.unwrap_or(1_000_000);
    let implied = |inst: &InstanceArgs, values: Option<&str>, svalues: Option<&str>| {
        commands::implied_config(
            inst.theta.clone(),
            inst.bounds.clone(),
            values,
            svalues,
            precision_cap,
            horizon,
        )
    };
    match cmd {
        Cmd::Cf(CfCmd::Expand { theta, depth, json }) => {
            let cfg = RunConfig {
                precision_cap,
                horizon,
                ..RunConfig::default()
            };
            let text = commands::cf_expand(&theta, depth, json || format == Format::Json, &cfg)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Code(CodeCmd::Word {
            instance,
            count,
            values,
        }) => {
            let cfg = implied(&instance, values.as_deref(), None);
            let text = commands::code_word(&cfg, count)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Code(CodeCmd::Complexity {
            instance,
            nmax,
            sample,
        }) => {
            let cfg = implied(&instance, None, None);
            let text = commands::code_complexity(&cfg, nmax, sample, format)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Approx(ApproxCmd::Verify {
            instance,
            values,
            n_from,
            n_to,
            w,
            base,
            digits,
        }) => {
            let mut cfg = implied(&instance, values.as_deref(), None);
            cfg.n_from = n_from;
            cfg.n_to = n_to;
            cfg.w = commands::parse_windows(&w).map_err(usage)?;
            cfg.bases = vec![base];
            cfg.validate().map_err(CliError::Usage)?;
            let text = commands::approx_verify(&cfg, digits, format)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Series(SeriesCmd::T {
            instance,
            values,
            base,
            digits,
            emit_json,
        }) => {
            let cfg = implied(&instance, values.as_deref(), None);
            let text = commands::series_t(&cfg, &base, digits, emit_json || format == Format::Json)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Series(SeriesCmd::S {
            instance,
            values,
            base,
            digits,
            emit_json,
        }) => {
            let cfg = implied(&instance, None, values.as_deref());
            let text = commands::series_s(&cfg, &base, digits, emit_json || format == Format::Json)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Series(SeriesCmd::Cos {
            base,
            digits,
            emit_json,
        }) => {
            let cfg = RunConfig {
                precision_cap,
                horizon,
                ..RunConfig::default()
            };
            let text =
                commands::series_trig(&base, digits, false, emit_json || format == Format::Json, &cfg)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Series(SeriesCmd::Sin {
            base,
            digits,
            emit_json,
        }) => {
            let cfg = RunConfig {
                precision_cap,
                horizon,
                ..RunConfig::default()
            };
            let text =
                commands::series_trig(&base, digits, true, emit_json || format == Format::Json, &cfg)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Structure(StructureCmd::Census {
            instance,
            n_from,
            n_to,
            w,
            eps,
        }) => {
            let mut cfg = implied(&instance, None, None);
            cfg.n_from = n_from;
            cfg.n_to = n_to;
            cfg.w = commands::parse_windows(&w).map_err(usage)?;
            cfg.eps = eps;
            cfg.validate().map_err(CliError::Usage)?;
            let text = commands::structure_census(&cfg)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Structure(StructureCmd::Iw { instance, n, w }) => {
            let cfg = implied(&instance, None, None);
            if w == 0 {
                return Err(CliError::Usage("window must be at least 1".into()));
            }
            let text = commands::structure_iw(&cfg, n, w)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Structure(StructureCmd::Tails {
            instance,
            n,
            w,
            limit,
            want,
        }) => {
            let cfg = implied(&instance, None, None);
            if w < 2 {
                return Err(CliError::Usage("window must be at least 2".into()));
            }
            let text = commands::structure_tails(&cfg, n, w, limit, want)?;
            deliver(&out, &text)?;
            Ok(0)
        }
        Cmd::Run(args) => run_cmd(
            args,
            Globals {
                precision_cap_flag,
                horizon_flag,
                out,
                format,
                timings,
            },
            precision_cap,
            horizon,
        ),
    }
}

fn usage(e: CoreError) -> CliError {
    CliError::Usage(e.to_string())
}

fn run_cmd(args: RunArgs, g: Globals, precision_cap: u32, horizon: u64) -> Result<u8, CliError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    // CLI flags override file values.
    if let Some(t) = args.theta {
        cfg.theta = t;
    }
    if !args.bounds.is_empty() {
        cfg.bounds = args.bounds;
    }
    if let Some(v) = args.values {
        cfg.values = split_csv(&v);
    }
    if let Some(v) = args.svalues {
        cfg.svalues = split_csv(&v);
    }
    if !args.base.is_empty() {
        cfg.bases = args.base;
    }
    if let Some(n) = args.n_from {
        cfg.n_from = n;
    }
    if let Some(n) = args.n_to {
        cfg.n_to = n;
    }
    if let Some(w) = args.w {
        cfg.w = commands::parse_windows(&w).map_err(usage)?;
    }
    if let Some(d) = args.digits {
        cfg.digits = d;
    }
    if let Some(d) = args.depth {
        cfg.depth = d;
    }
    if let Some(n) = args.nmax {
        cfg.nmax = n;
    }
    if let Some(v) = args.v_bound {
        cfg.v_bound = v;
    }
    if let Some(e) = args.eps {
        cfg.eps = e;
    }
    if let Some(s) = args.suites {
        cfg.suites = split_csv(&s);
    }
    if let Some(p) = g.precision_cap_flag {
        cfg.precision_cap = p;
    } else if args.config.is_none() {
        cfg.precision_cap = precision_cap;
    }
    if let Some(h) = g.horizon_flag {
        cfg.horizon = h;
    } else if args.config.is_none() {
        cfg.horizon = horizon;
    }
    cfg.validate().map_err(CliError::Usage)?;
    if args.emit_config {
        deliver(&g.out, &cfg.emit())?;
        return Ok(0);
    }
    let rows = suites::run_all(&cfg, g.timings);
    let report = Report::new(cfg.emit(), rows);
    let text = match g.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Table => report.to_table(),
    };
    let out = g.out.or_else(|| cfg.out.clone().map(PathBuf::from));
    deliver(&out, &text)?;
    Ok(report.exit_code())
}

fn split_csv(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(str::to_string)
        .collect()
}
