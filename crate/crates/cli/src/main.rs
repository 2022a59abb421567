use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use voltkit::laxkit::Family;
use voltkit::report::{
    self, EnumerationSummary, IntegrateOptions, IntegrationReport, Options, SystemReport, DEFAULT_RANK_CAP,
    DEFAULT_SEED,
};
use voltkit::verify::{Certificate, DEFAULT_STEP, DEFAULT_T_END, NUMERIC_TOLERANCE};
use voltkit::Error;

const EXIT_NO_LAX_PAIR: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_CONSTRAINT: u8 = 4;
const EXIT_CERTIFICATE: u8 = 5;

/// Generalized Volterra Lax systems from root subsets of A_n.
#[derive(Parser, Debug)]
#[command(name = "voltkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for random evaluation points and initial data.
    #[arg(long, global = true, env = "VOLTKIT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sign search, Poisson structure, integrals and certificates for a root subset.
    Build {
        #[arg(long)]
        rank: usize,
        /// Comma-separated roots, e.g. "1,2,3,1+2".
        #[arg(long)]
        phi: String,
        #[arg(long)]
        numeric: bool,
    },
    /// One of the Lotka-Volterra families: km, pkm, f2, f3, f4.
    Family {
        #[arg(long = "case")]
        case: String,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        numeric: bool,
    },
    /// Two-diagonal family with m entries on the second diagonal of an n x n L.
    Twodiag {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        numeric: bool,
    },
    /// Classify every root subset of a rank.
    Enumerate {
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = DEFAULT_RANK_CAP)]
        cap: usize,
    },
    /// Re-check a system report.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        numeric: bool,
    },
    /// RK4 trajectory of a system with drift of its integrals.
    Integrate {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
        #[arg(long, default_value_t = DEFAULT_T_END)]
        t_end: f64,
        /// Comma-separated initial values of a_1..a_n.
        #[arg(long)]
        x0: Option<String>,
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
        #[arg(long, default_value_t = NUMERIC_TOLERANCE)]
        tolerance: f64,
    },
}

#[derive(Args, Debug)]
struct SystemArgs {
    /// Report produced by build, family or twodiag.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    phi: Option<String>,
    #[arg(long = "case")]
    case: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
}

enum Failure {
    Lib(Error),
    Parse(String),
    Other(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(Error::NoLaxPair(_)) => EXIT_NO_LAX_PAIR,
            Failure::Lib(Error::Parse { .. } | Error::InvalidRoot(_)) | Failure::Parse(_) => EXIT_PARSE,
            Failure::Lib(_) => EXIT_CONSTRAINT,
            Failure::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Parse(s) => f.write_str(s),
            Failure::Other(e) => write!(f, "{e:#}"),
        }
    }
}

/// Rendered output and whether every certificate passed.
struct Outcome {
    body: String,
    passed: bool,
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).context("serializing output")?;
    s.push('\n');
    Ok(s)
}

fn system_outcome(r: &SystemReport, format: Format) -> Result<Outcome, Failure> {
    let body = match format {
        Format::Json => json(r)?,
        Format::Text => report::render_text(r),
    };
    Ok(Outcome { body, passed: r.certificates.symbolic_passed() && r.certificates.passed() })
}

fn parse_family(s: &str) -> Result<Family, Failure> {
    s.parse::<Family>().map_err(Failure::Lib)
}

fn read_report(path: &PathBuf) -> Result<SystemReport, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn resolve_system(s: &SystemArgs, opts: Options) -> Result<SystemReport, Failure> {
    match s {
        SystemArgs { input: Some(p), .. } => read_report(p),
        SystemArgs { rank: Some(r), phi: Some(phi), .. } => Ok(report::build(*r, phi, opts)?),
        SystemArgs { rank: Some(r), case: Some(c), .. } => Ok(report::family(parse_family(c)?, *r, opts)?),
        SystemArgs { m: Some(m), n: Some(n), .. } => Ok(report::twodiag(*m, *n, opts)?),
        _ => Err(Failure::Lib(Error::InvalidArgument(
            "choose a system with --input, --rank with --phi, --rank with --case, or --m with --n".into(),
        ))),
    }
}

fn parse_x0(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Failure::Parse(format!("initial value '{t}': {e}"))))
        .collect()
}

fn enumeration_text(s: &EnumerationSummary) -> String {
    let mut out = format!(
        "rank {}: {}/{} admit a Lax pair, {} Lotka-Volterra\nfailing masks: {:?}\n",
        s.rank, s.lax_count, s.subsets, s.lv_count, s.failing_masks
    );
    for phi in &s.lv_subsets {
        out.push_str(&format!("lotka-volterra: {phi}\n"));
    }
    out
}

fn certificate_text(c: &Certificate) -> String {
    let mut out = format!("{}\n", c.system_id);
    for check in &c.checks {
        out.push_str(&format!("{} {}\n", if check.passed() { "PASS" } else { "FAIL" }, check.name));
    }
    out
}

fn integration_text(r: &IntegrationReport) -> String {
    let mut out = format!("{}: rk4 step {} to t = {}\n", r.system, r.step, r.t_end);
    if let Some(t) = r.divergence {
        out.push_str(&format!("diverged at t = {t}\n"));
    }
    out.push_str(&certificate_text(&r.certificates));
    out
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Build { rank, phi, numeric } => {
            let r = report::build(*rank, phi, Options { seed: cli.seed, numeric: *numeric })?;
            system_outcome(&r, format)
        }
        Command::Family { case, rank, numeric } => {
            let r = report::family(parse_family(case)?, *rank, Options { seed: cli.seed, numeric: *numeric })?;
            system_outcome(&r, format)
        }
        Command::Twodiag { m, n, numeric } => {
            let r = report::twodiag(*m, *n, Options { seed: cli.seed, numeric: *numeric })?;
            system_outcome(&r, format)
        }
        Command::Enumerate { rank, cap } => {
            let s = report::enumerate(*rank, *cap)?;
            let body = match format {
                Format::Json => json(&s)?,
                Format::Text => enumeration_text(&s),
            };
            Ok(Outcome { body, passed: true })
        }
        Command::Verify { input, numeric } => {
            let r = read_report(input)?;
            let c = report::verify_report(&r, Options { seed: cli.seed, numeric: *numeric })?;
            let body = match format {
                Format::Json => json(&c)?,
                Format::Text => certificate_text(&c),
            };
            Ok(Outcome { body, passed: c.symbolic_passed() })
        }
        Command::Integrate { system, step, t_end, x0, sample_every, tolerance } => {
            let r = resolve_system(system, Options { seed: cli.seed, numeric: false })?;
            let opts = IntegrateOptions {
                x0: x0.as_deref().map(parse_x0).transpose()?,
                step: *step,
                t_end: *t_end,
                sample_every: *sample_every,
                tolerance: *tolerance,
                seed: cli.seed,
            };
            let out = report::integrate_report(&r, &opts)?;
            let body = match format {
                Format::Json => json(&out)?,
                Format::Text => integration_text(&out),
            };
            Ok(Outcome { body, passed: out.passed() })
        }
    }
}

fn emit(cli: &Cli, body: &str) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Failure::Other(e.into())),
        },
        None => run(&cli),
    };
    match result {
        Ok(outcome) => {
            if let Err(e) = emit(&cli, &outcome.body) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: certificate failure");
                ExitCode::from(EXIT_CERTIFICATE)
            }
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
