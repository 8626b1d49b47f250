use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use slcover::audit::{audit_rep, check_restrictions, AuditReport};
use slcover::constructors::{build_boundary_extremal, build_rep, sample, BuildRequest};
use slcover::cover::CoverClass;
use slcover::mobius::{classify_psl, fixed_directions, FixedDirections};
use slcover::selftest::{run_all, Budget};
use slcover::surface::{format_signs, mw_bounds, parse_signs, Representation};
use slcover::{Cover, Error, Psl, DEFAULT_MARGIN};

#[derive(Parser)]
#[command(name = "slcover", version, about = "Universal-cover invariants and audits for punctured-surface representations")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a representation with prescribed Euler class and signs.
    Construct(ConstructArgs),
    /// Classify a matrix in PSL(2,R) and, with --index, its lift in the universal cover.
    Classify(ClassifyArgs),
    /// Euler class, sign vector and Milnor-Wood verdict of a representation file.
    Euler(EulerArgs),
    /// Depth-qualified total-hyperbolicity audit of a representation file.
    Audit(AuditArgs),
    /// Seeded batch of builds, each audited.
    Sample(SampleArgs),
    /// Run the randomized property suites.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long)]
    genus: usize,
    #[arg(long)]
    punctures: usize,
}

#[derive(Args)]
struct RequestArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long, allow_hyphen_values = true)]
    euler: i64,
    /// Comma-separated +, - or 0 per puncture.
    #[arg(long, allow_hyphen_values = true)]
    signs: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RequestArgs {
    fn request(&self) -> anyhow::Result<BuildRequest> {
        Ok(BuildRequest::new(
            self.surface.genus,
            self.surface.punctures,
            self.euler,
            parse_signs(&self.signs)?,
            self.seed,
        ))
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    surface: SurfaceArgs,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "boundary")]
    euler: Option<i64>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "boundary")]
    signs: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Build the extremal representation whose last peripheral image is this hyperbolic matrix (a,b,c,d row-major).
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["euler", "signs"])]
    boundary: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Matrix entries a,b,c,d (row-major, determinant 1).
    #[arg(long, allow_hyphen_values = true)]
    matrix: String,
    /// Deck index of the lift.
    #[arg(long, allow_hyphen_values = true)]
    index: Option<i64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EulerArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    report: Option<PathBuf>,
    /// One-row CSV summary path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write the restriction certificate to this path.
    #[arg(long)]
    restrictions: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    request: RequestArgs,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Directory for the representation files, audit reports and CSV summary.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Summary JSON path (stdout when absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Reduced trial counts.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Failure {
        Failure { code: 2, err }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure { code: 2, err: e.into() }
    }
}

type Outcome = Result<u8, Failure>;

/// Write via a temporary file in the target directory, then rename over the destination.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| anyhow!("writing {}: {}", path.display(), e.error))?;
    Ok(())
}

fn emit(path: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn parse_matrix(s: &str) -> anyhow::Result<Psl> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad matrix entry {t:?}")))
        .collect::<anyhow::Result<_>>()?;
    let m: [f64; 4] = v.try_into().map_err(|_| anyhow!("expected 4 comma-separated entries"))?;
    Ok(Psl::from_f64(m)?)
}

fn read_rep(path: &Path) -> anyhow::Result<Representation> {
    let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Representation::from_json_str(&s).with_context(|| format!("parsing {}", path.display()))
}

fn construct(a: ConstructArgs) -> Outcome {
    let rep = match &a.boundary {
        Some(b) => build_boundary_extremal(a.surface.genus, a.surface.punctures, &parse_matrix(b)?)?,
        None => {
            let signs = parse_signs(a.signs.as_deref().unwrap_or_default())?;
            let req = BuildRequest::new(a.surface.genus, a.surface.punctures, a.euler.unwrap_or_default(), signs, a.seed);
            build_rep(&req)?
        }
    };
    emit(a.output.as_deref(), &rep.to_json_string())?;
    Ok(0)
}

fn classify(a: ClassifyArgs) -> Outcome {
    let p = parse_matrix(&a.matrix)?;
    let fixed = match fixed_directions(&p) {
        FixedDirections::All => json!("all"),
        FixedDirections::Angles(v) => json!(v),
    };
    let mut out = json!({
        "matrix": p.rep().to_f64(),
        "psl_type": classify_psl(&p),
        "abs_trace": p.abs_trace(),
        "fixed_directions": fixed,
    });
    if let Some(k) = a.index {
        let x = Cover::new(p, k);
        let class: CoverClass = x.classify()?;
        let (lo, hi) = x.range();
        out["cover"] = json!({
            "index": k,
            "class": class,
            "displacement_range": [lo, hi],
            "sl_projection": x.sl_projection().to_f64(),
        });
    }
    emit(a.output.as_deref(), &pretty(&out))?;
    Ok(0)
}

fn euler(a: EulerArgs) -> Outcome {
    let rep = read_rep(&a.input)?;
    let s = rep.surface();
    let e = rep.euler_class()?;
    let signs = rep.sign_vector()?;
    let ev = rep.evaluation_map()?;
    let out = json!({
        "surface": s,
        "chi": s.chi(),
        "euler": e,
        "signs": signs,
        "signs_text": format_signs(&signs),
        "type_preserving": rep.is_type_preserving()?,
        "extremal": e.abs() == -s.chi(),
        "milnor_wood": mw_bounds(s.genus, s.punctures, e, &signs),
        "evaluation_class": ev.classify()?,
    });
    emit(a.output.as_deref(), &pretty(&out))?;
    Ok(0)
}

fn audit(a: AuditArgs) -> Outcome {
    let rep = read_rep(&a.input)?;
    let report = audit_rep(&rep, a.depth, a.margin)?;
    if let Some(p) = &a.restrictions {
        let r = check_restrictions(&rep)?;
        write_atomic(p, &pretty(&r))?;
    }
    if let Some(p) = &a.csv {
        write_atomic(p, &format!("{}\n{}\n", AuditReport::csv_header(), report.csv_row()))?;
    }
    emit(a.report.as_deref(), &pretty(&report))?;
    for v in &report.violations {
        eprintln!("violation: {} {:?} ({}, |trace| {})", v.curve, v.kind, v.psl_type, v.trace);
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn sample_cmd(a: SampleArgs) -> Outcome {
    let req = a.request.request()?;
    let out = sample(&req, a.count, a.depth)?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut csv = format!("{}\n", AuditReport::csv_header());
        for (i, (rep, rpt)) in out.reps.iter().zip(&out.reports).enumerate() {
            write_atomic(&dir.join(format!("rep_{i:04}.json")), &rep.to_json_string())?;
            write_atomic(&dir.join(format!("audit_{i:04}.json")), &pretty(rpt))?;
            csv.push_str(&rpt.csv_row());
            csv.push('\n');
        }
        write_atomic(&dir.join("audit.csv"), &csv)?;
    }
    emit(a.output.as_deref(), &pretty(&out.summary))?;
    Ok(if out.summary.np_pass == out.summary.count { 0 } else { 1 })
}

fn selftest(a: SelftestArgs) -> Outcome {
    let budget = if a.quick { Budget::QUICK } else { Budget::FULL };
    let checks = run_all(budget, a.seed);
    for c in &checks {
        let tag = if c.passed() { "PASS" } else { "FAIL" };
        println!("{tag} {} ({} failures / {} trials)", c.name, c.failures, c.trials);
        if let Some(f) = &c.first_failure {
            println!("  first failure: {f}");
        }
    }
    if let Some(p) = &a.report {
        write_atomic(p, &pretty(&checks))?;
    }
    Ok(if checks.iter().all(|c| c.passed()) { 0 } else { 1 })
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().context("configuring thread pool")?;
    }
    match cli.cmd {
        Cmd::Construct(a) => construct(a),
        Cmd::Classify(a) => classify(a),
        Cmd::Euler(a) => euler(a),
        Cmd::Audit(a) => audit(a),
        Cmd::Sample(a) => sample_cmd(a),
        Cmd::Selftest(a) => selftest(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
