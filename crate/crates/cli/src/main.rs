use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use cdvq::families::{atlas_csv, atlas_merge, from_jsonl, scan_family, to_jsonl, Family, ScanCaps};
use cdvq::pipeline::{classify, verify_all, ClassifyOptions, Summary, Suite, VerifyCaps};
use cdvq::{BetaOptions, Error, Monomial, Rational, SeriesType, WeightSystem};

const EX_USAGE: u8 = 64;
const EX_IOERR: u8 = 74;

#[derive(Parser)]
#[command(name = "cdvq", version, about = "Weight-system classification for cyclic quotients of cDV points")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "CDVQ_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one singularity given as JSON.
    Check(CheckArgs),
    /// Scan a normal-form family and write one JSON record per line.
    Enumerate(EnumerateArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Merge scan outputs into the atlas table.
    Atlas(AtlasArgs),
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 13)]
    kmax: i64,
    #[arg(long)]
    include_integer_classes: bool,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    rmax: i64,
    #[arg(long, default_value_t = 13)]
    kmax: i64,
    /// Largest degree of a g-monomial.
    #[arg(long, default_value_t = 8)]
    gdeg: u32,
    /// Largest number of g-monomials.
    #[arg(long, default_value_t = 3)]
    gsize: usize,
    /// Let cA-B also run over gcd(a+1, r) = 1.
    #[arg(long)]
    cab_overlap: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    suite: String,
    #[arg(long)]
    rmax: Option<i64>,
    #[arg(long)]
    kmax: Option<i64>,
    #[arg(long)]
    gdeg: Option<u32>,
    #[arg(long)]
    gsize: Option<usize>,
    #[arg(long)]
    qmax: Option<i64>,
    /// Vector length for the bound oracle.
    #[arg(long = "d")]
    dim: Option<usize>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    verbose_pairings: bool,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV row per witness or failure.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AtlasArgs {
    /// Glob matching the JSONL scan outputs.
    #[arg(long)]
    merge: String,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Input {
    r: i64,
    a: [i64; 4],
    e: i64,
    f: InputSeries,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InputSeries {
    #[serde(rename = "type")]
    f_type: SeriesType,
    monomials: Vec<[u32; 4]>,
}

enum Failure {
    Usage(String),
    Io(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EX_USAGE,
            Failure::Io(_) => EX_IOERR,
            Failure::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Internal(m) => m,
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

/// Standard output; a reader that hung up early is not an error.
fn print_out(contents: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(contents.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => print_out(contents),
    }
}

fn positive(name: &str, v: i64) -> Result<(), Failure> {
    if v < 1 {
        return Err(Failure::Usage(format!("--{name} must be positive, got {v}")));
    }
    Ok(())
}

fn positive_rational(name: &str, s: &str) -> Result<Rational, Failure> {
    let v: Rational = s.parse().map_err(usage)?;
    if !v.is_positive() {
        return Err(Failure::Usage(format!("--{name} must be a positive rational, got {s}")));
    }
    Ok(v)
}

fn check(args: &CheckArgs) -> Result<u8, Failure> {
    positive("kmax", args.kmax)?;
    let text = fs::read_to_string(&args.input).map_err(|e| io_err(&args.input, e))?;
    let input: Input =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", args.input.display())))?;
    let ws = WeightSystem::residues(input.r, input.a, input.e).map_err(usage)?;
    let monomials: Vec<Monomial> = input.f.monomials.into_iter().map(Monomial).collect();
    let opts = ClassifyOptions {
        beta: BetaOptions {
            k_max: args.kmax,
            include_integer_classes: args.include_integer_classes,
        },
    };
    let verdict = classify(&ws, input.f.f_type, &monomials, &opts);
    let json = serde_json::to_string_pretty(&verdict).map_err(|e| Failure::Internal(e.to_string()))?;
    print_out(&(json + "\n"))?;
    Ok(match verdict.summary {
        Summary::SettingViolated => 2,
        _ => 0,
    })
}

fn enumerate(args: &EnumerateArgs) -> Result<u8, Failure> {
    let family: Family = args.family.parse().map_err(usage)?;
    if args.rmax < 2 {
        return Err(Failure::Usage(format!("--rmax must be at least 2, got {}", args.rmax)));
    }
    positive("kmax", args.kmax)?;
    positive("gsize", args.gsize as i64)?;
    if args.gdeg < 2 {
        return Err(Failure::Usage(format!("--gdeg must be at least 2, got {}", args.gdeg)));
    }
    let caps = ScanCaps {
        r_max: args.rmax,
        k_max: args.kmax,
        d_max: args.gdeg,
        s_max: args.gsize,
        cab_overlap: args.cab_overlap,
    };
    let records = scan_family(family, &caps);
    emit(args.out.as_deref(), &to_jsonl(&records))?;
    Ok(0)
}

fn verify(args: &VerifyArgs) -> Result<u8, Failure> {
    let suite: Suite = args.suite.parse().map_err(usage)?;
    let mut caps = VerifyCaps::for_suite(suite);
    if let Some(v) = args.rmax {
        positive("rmax", v)?;
        caps.r_max = v;
    }
    if let Some(v) = args.kmax {
        positive("kmax", v)?;
        caps.k_max = v;
    }
    if let Some(v) = args.gdeg {
        if v < 2 {
            return Err(Failure::Usage(format!("--gdeg must be at least 2, got {v}")));
        }
        caps.d_max = v;
    }
    if let Some(v) = args.gsize {
        positive("gsize", v as i64)?;
        caps.s_max = v;
    }
    if let Some(v) = args.qmax {
        positive("qmax", v)?;
        caps.q_max = v;
    }
    if let Some(v) = args.dim {
        positive("d", v as i64)?;
        caps.dim = v;
    }
    if let Some(s) = &args.delta {
        caps.delta = positive_rational("delta", s)?;
    }
    if let Some(s) = &args.epsilon {
        caps.epsilon = positive_rational("epsilon", s)?;
    }
    caps.verbose = args.verbose_pairings;
    let report = verify_all(suite, &caps).map_err(|e| match e {
        Error::Domain(m) => Failure::Usage(m),
        other => Failure::Internal(other.to_string()),
    })?;
    let mut text = format!("{}: {}\n{}\n", report.suite, if report.ok { "ok" } else { "FAILED" }, report.summary);
    for line in &report.lines {
        text.push_str(&format!("  {line}\n"));
    }
    print_out(&text)?;
    if let Some(p) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Internal(e.to_string()))?;
        write_atomic(p, &(json + "\n"))?;
    }
    if let Some(p) = &args.csv {
        write_atomic(p, &report.csv)?;
    }
    Ok(report.status() as u8)
}

fn atlas(args: &AtlasArgs) -> Result<u8, Failure> {
    let mut paths: Vec<PathBuf> = glob::glob(&args.merge)
        .map_err(usage)?
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Io(e.to_string()))?;
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Usage(format!("no files match {}", args.merge)));
    }
    let mut records = Vec::new();
    for p in &paths {
        let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
        let recs = from_jsonl(&text).map_err(|e| Failure::Internal(format!("{}: {e}", p.display())))?;
        records.extend(recs);
    }
    let rows = atlas_merge(&records).map_err(|e| Failure::Internal(e.to_string()))?;
    emit(args.csv.as_deref(), &atlas_csv(&rows))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::Usage("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    match &cli.command {
        Command::Check(a) => check(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Verify(a) => verify(a),
        Command::Atlas(a) => atlas(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EX_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("cdvq: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
