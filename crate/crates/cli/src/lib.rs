//! The `bootlab` command line.
//!
//! Results go to stdout as JSON (default) or CSV, diagnostics to stderr.
//! Exit codes: 0 success, 2 usage error, 3 outside the supported dimension
//! envelope, 4 input error.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bootlab::estimate::{
    critical_length, critical_probability, rows_to_csv, sweep, SweepMode, SweepRow,
};
use bootlab::exactgeom::{parse_rational, QVec, Q};
use bootlab::family::{parse_family, zoo, FamilyError, UpdateFamily};
use bootlab::induced::{induced_family, lattice_basis, triviality};
use bootlab::resistance::{
    find_easy_direction, good_witness, is_semi_good, Analyzer, ResistanceError, SphereProblem,
};
use bootlab::simulate::{probe_stability, RuleSet, SimError, SiteSet, Torus, TorusDynamics};
use bootlab::stableset::stable_formula;
use bootlab::exactgeom::GeomError;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "bootlab", version, about = "U-bootstrap percolation: exact classification and Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Universality class and resistance.
    Classify(FamilyOnly),
    /// Resistance with an easy direction and the number of cells.
    Resistance(FamilyOnly),
    /// Stable set as a hemisphere formula; with --w, membership of a direction.
    StableSet(StableSetArgs),
    /// Induced family on the complement of --W / --w, with the lattice basis.
    Induced(InducedArgs),
    /// One run of the dynamics on the torus.
    Simulate(SimulateArgs),
    /// Critical probability on the torus of side --n.
    Pc(PcArgs),
    /// Critical length at density --p, searching side lengths up to --n.
    Lc(LcArgs),
    /// Table of estimates over several side lengths.
    Sweep(SweepArgs),
    /// Stability probe of --w, or easy-direction search with --s.
    ProbeDirection(ProbeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// Family JSON file: {"dimension": d, "rules": [[[..], ..], ..]}.
    #[arg(long, value_name = "FILE", conflicts_with = "zoo", required_unless_present = "zoo")]
    pub family: Option<PathBuf>,
    /// Built-in family: n-neighbour:<d>:<r>, east:<d>, duarte, pair:<d>.
    #[arg(long, value_name = "NAME")]
    pub zoo: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct ThreadArgs {
    /// Worker threads (default: machine parallelism).
    #[arg(long, env = "BOOTLAB_THREADS", value_name = "INT")]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SeedArgs {
    /// RNG seed.
    #[arg(long, default_value_t = 0, value_name = "U64")]
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct FamilyOnly {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

#[derive(Args, Debug)]
pub struct StableSetArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Direction to test, comma-separated rationals.
    #[arg(long, value_name = "x,y,...")]
    pub w: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct InducedArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// A single direction of W, comma-separated rationals.
    #[arg(long, value_name = "x,y,...")]
    pub w: Option<String>,
    /// JSON list of directions forming W.
    #[arg(long = "W", value_name = "FILE")]
    pub w_file: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Torus side length.
    #[arg(long, value_name = "INT")]
    pub n: usize,
    /// Initial density, rational or decimal.
    #[arg(long, value_name = "RAT-or-DEC", conflicts_with = "sites", required_unless_present = "sites")]
    pub p: Option<String>,
    /// JSON list of initially infected sites (coordinates taken mod n).
    #[arg(long, value_name = "FILE")]
    pub sites: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PcArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Torus side length.
    #[arg(long, value_name = "INT")]
    pub n: usize,
    /// Trials (each trial's threshold is computed exactly).
    #[arg(long, default_value_t = 200, value_name = "INT")]
    pub trials: u64,
    /// Width of the final bisection bracket.
    #[arg(long, default_value_t = 1e-4, value_name = "DEC")]
    pub tolerance: f64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub threads: ThreadArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct LcArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Largest side length searched.
    #[arg(long, value_name = "INT")]
    pub n: usize,
    /// Initial density, rational or decimal.
    #[arg(long, value_name = "RAT-or-DEC")]
    pub p: String,
    /// Trials per side length.
    #[arg(long, default_value_t = 200, value_name = "INT")]
    pub trials: u64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub threads: ThreadArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Side lengths, comma-separated (may be empty).
    #[arg(long = "n", value_name = "INT,INT,...", value_delimiter = ',', num_args = 0..)]
    pub ns: Vec<usize>,
    /// Fixed density; without it the critical probability is estimated.
    #[arg(long, value_name = "RAT-or-DEC")]
    pub p: Option<String>,
    /// Trials per row.
    #[arg(long, default_value_t = 200, value_name = "INT")]
    pub trials: u64,
    /// Bisection bracket width for critical-probability rows.
    #[arg(long, default_value_t = 1e-4, value_name = "DEC")]
    pub tolerance: f64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub threads: ThreadArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Direction to probe, comma-separated rationals.
    #[arg(long, value_name = "x,y,...", required_unless_present = "s")]
    pub w: Option<String>,
    /// JSON list of directions forming W (easy-direction search).
    #[arg(long = "W", value_name = "FILE")]
    pub w_file: Option<PathBuf>,
    /// Target resistance bound for the easy-direction search.
    #[arg(long, value_name = "INT")]
    pub s: Option<u32>,
    /// Search radius for the easy-direction search.
    #[arg(long = "R", value_name = "RAT", default_value = "1")]
    pub radius: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// An error with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<FamilyError> for CliError {
    fn from(e: FamilyError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<ResistanceError> for CliError {
    fn from(e: ResistanceError) -> Self {
        let code = match e {
            ResistanceError::Unsupported(_) | ResistanceError::Geom(GeomError::Unsupported(_)) => EXIT_UNSUPPORTED,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<bootlab::estimate::EstimateError> for CliError {
    fn from(e: bootlab::estimate::EstimateError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<bootlab::stableset::StableSetError> for CliError {
    fn from(e: bootlab::stableset::StableSetError) -> Self {
        CliError::input(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// The clap command tree, for help generation and self-tests.
pub fn command() -> clap::Command {
    Cli::command()
}

/// Parses `argv` (including the program name), runs the command and writes
/// its output to `out`. Returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, err) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

fn dispatch(cmd: Command, err: &mut dyn Write) -> Result<String> {
    match cmd {
        Command::Classify(a) => {
            configure_threads(&a.threads)?;
            let u = load_family(&a.family)?;
            let an = Analyzer::new();
            let res = an.analyze(&SphereProblem::of_family(&u).map_err(CliError::from)?)?;
            let v = json!({"class": res.class.name(), "r": res.resistance});
            Ok(emit(&v, a.output.format))
        }
        Command::Resistance(a) => {
            configure_threads(&a.threads)?;
            let u = load_family(&a.family)?;
            let start = Instant::now();
            let p = SphereProblem::of_family(&u)?;
            let res = Analyzer::new().analyze(&p)?;
            let _ = writeln!(err, "wall_time_ms: {}", start.elapsed().as_millis());
            let v = json!({
                "resistance": res.resistance,
                "class": res.class.name(),
                "easy_direction": res.easy_direction,
                "cell_count": res.cell_count,
            });
            Ok(emit(&v, a.output.format))
        }
        Command::StableSet(a) => {
            let u = load_family(&a.family)?;
            let f = stable_formula(&u);
            let mut v = json!({"dimension": u.dimension(), "clauses": f.clauses()});
            if let Some(w) = &a.w {
                let dir = parse_direction(w, u.dimension())?;
                v["contains"] = json!(f.contains(&dir)?);
            }
            Ok(emit(&v, a.output.format))
        }
        Command::Induced(a) => {
            let u = load_family(&a.family)?;
            let d = u.dimension();
            let w = load_w(a.w.as_deref(), a.w_file.as_deref(), d)?;
            let f = induced_family(&u, &w);
            let v = json!({
                "dimension": d,
                "rules": f.rules(),
                "triviality": triviality(&f),
                "ambient_basis": f.ambient(),
                "lattice_basis": lattice_basis(&w, d),
            });
            Ok(emit(&v, a.output.format))
        }
        Command::Simulate(a) => simulate(&a),
        Command::Pc(a) => {
            configure_threads(&a.threads)?;
            let u = load_family(&a.family)?;
            let e = critical_probability(&u, a.n, a.trials, a.tolerance, a.seed.seed)?;
            let row = SweepRow {
                family_id: family_id(&a.family),
                n: a.n,
                p_or_pc: "pc".into(),
                estimate: e.estimate,
                ci_lo: e.ci_lo,
                ci_hi: e.ci_hi,
                trials: e.trials,
                seed: a.seed.seed,
            };
            Ok(emit_rows(&[row], a.output.format))
        }
        Command::Lc(a) => {
            configure_threads(&a.threads)?;
            let u = load_family(&a.family)?;
            let p = parse_probability(&a.p)?;
            let l = critical_length(&u, p, a.n, a.trials, a.seed.seed)?;
            let v = json!({
                "family_id": family_id(&a.family),
                "p": p,
                "n_max": a.n,
                "critical_length": l.length,
                "at_least": l.at_least,
                "probability": l.probability.map(|e| e.estimate),
                "trials": a.trials,
                "seed": a.seed.seed,
            });
            Ok(emit(&v, a.output.format))
        }
        Command::Sweep(a) => {
            configure_threads(&a.threads)?;
            let u = load_family(&a.family)?;
            let mode = match &a.p {
                Some(p) => SweepMode::ProbAtP { p: parse_probability(p)?, trials: a.trials },
                None => SweepMode::Pc { trials: a.trials, tolerance: a.tolerance },
            };
            let rows = sweep(&u, &family_id(&a.family), &a.ns, mode, a.seed.seed)?;
            Ok(emit_rows(&rows, a.output.format))
        }
        Command::ProbeDirection(a) => probe(&a),
    }
}

fn simulate(a: &SimulateArgs) -> Result<String> {
    let u = load_family(&a.family)?;
    let torus = Torus::new(u.dimension(), a.n)?;
    let dynm = TorusDynamics::new(&RuleSet::from_family(&u), torus)?;
    let initial = match (&a.p, &a.sites) {
        (Some(p), _) => bootlab::estimate::random_set(a.seed.seed, 0, torus.sites(), parse_probability(p)?),
        (None, Some(path)) => {
            let text = read(path)?;
            let pts: Vec<Vec<i64>> =
                serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            let mut s = SiteSet::new(torus.sites());
            for x in pts {
                if x.len() != torus.d {
                    return Err(CliError::input(format!("site {x:?} has the wrong dimension")));
                }
                s.insert(torus.index(&x));
            }
            s
        }
        (None, None) => unreachable!("clap requires --p or --sites"),
    };
    let closed = dynm.close(&initial);
    let v = json!({
        "d": torus.d,
        "n": torus.n,
        "initial_count": initial.count(),
        "infected_count": closed.count(),
        "percolates": closed.is_full(),
        "infected_runs": closed.runs(),
    });
    Ok(emit(&v, a.output.format))
}

fn probe(a: &ProbeArgs) -> Result<String> {
    let u = load_family(&a.family)?;
    let d = u.dimension();
    if let Some(s) = a.s {
        let w = load_w(None, a.w_file.as_deref(), d)?;
        let radius = parse_rational(&a.radius)
            .filter(|r| *r >= Q::from_integer(0.into()))
            .ok_or_else(|| CliError::input(format!("invalid radius {:?}", a.radius)))?;
        let found = find_easy_direction(&u, &w, s, &radius)?;
        let semi = match &found {
            Some(x) => Some(is_semi_good(&u, &w, s, &QVec::from_int_vec(x))?),
            None => None,
        };
        let v = json!({
            "s": s,
            "radius": a.radius,
            "easy_direction": found,
            "semi_good": semi,
            "good": good_witness(&u, &w, s)?.is_some(),
        });
        return Ok(emit(&v, a.output.format));
    }
    let text = a.w.as_deref().expect("clap requires --w or --s");
    let dir = parse_direction(text, d)?;
    let half = 8 * u.radius_ceil();
    let stable = stable_formula(&u).contains(&dir)?;
    let probed = probe_stability(&u, &dir, half)?;
    let p = SphereProblem::of_family(&u)?;
    let rho = Analyzer::new().rho(&p, &dir)?;
    let v = json!({
        "direction": dir,
        "stable": stable,
        "probe_stable": probed,
        "window": half,
        "rho": rho,
    });
    Ok(emit(&v, a.output.format))
}

fn configure_threads(t: &ThreadArgs) -> Result<()> {
    if let Some(n) = t.threads {
        if n == 0 {
            return Err(CliError::input("--threads must be positive"));
        }
        // A second configuration attempt in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_family(a: &FamilyArgs) -> Result<UpdateFamily> {
    match (&a.family, &a.zoo) {
        (Some(path), _) => Ok(parse_family(&read(path)?)?),
        (None, Some(name)) => Ok(zoo(name)?),
        (None, None) => Err(CliError { code: EXIT_USAGE, message: "--family or --zoo is required".into() }),
    }
}

fn family_id(a: &FamilyArgs) -> String {
    match (&a.family, &a.zoo) {
        (_, Some(name)) => name.clone(),
        (Some(path), None) => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string()),
        (None, None) => String::new(),
    }
}

fn parse_probability(text: &str) -> Result<f64> {
    let q = parse_rational(text).ok_or_else(|| CliError::input(format!("invalid probability {text:?}")))?;
    let p = q.to_f64().unwrap_or(f64::NAN);
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::input(format!("probability {text} outside [0, 1]")));
    }
    Ok(p)
}

fn parse_direction(text: &str, d: usize) -> Result<QVec> {
    let coords: Option<Vec<Q>> = text.split(',').map(parse_rational).collect();
    let coords = coords.ok_or_else(|| CliError::input(format!("invalid direction {text:?}")))?;
    direction(coords, d, text)
}

fn direction(coords: Vec<Q>, d: usize, text: &str) -> Result<QVec> {
    if coords.len() != d {
        return Err(CliError::input(format!("direction {text:?} needs {d} coordinates")));
    }
    let v = QVec(coords);
    if v.is_zero() {
        return Err(CliError::input(format!("direction {text:?} is zero")));
    }
    Ok(v)
}

/// Directions from `--w` and the JSON list in `--W`; entries may be
/// integers or `"p/q"` strings.
fn load_w(single: Option<&str>, file: Option<&Path>, d: usize) -> Result<Vec<QVec>> {
    let mut out = Vec::new();
    if let Some(path) = file {
        let text = read(path)?;
        let raw: Vec<Vec<Value>> =
            serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        for entry in raw {
            let coords: Option<Vec<Q>> = entry
                .iter()
                .map(|x| match x {
                    Value::Number(n) => parse_rational(&n.to_string()),
                    Value::String(s) => parse_rational(s),
                    _ => None,
                })
                .collect();
            let label = serde_json::to_string(&entry).unwrap_or_default();
            let coords = coords.ok_or_else(|| CliError::input(format!("invalid direction {label}")))?;
            out.push(direction(coords, d, &label)?);
        }
    }
    if let Some(text) = single {
        out.push(parse_direction(text, d)?);
    }
    Ok(out)
}

fn emit(v: &Value, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string(v).expect("serializable")),
        Format::Csv => value_to_csv(v),
    }
}

fn emit_rows(rows: &[SweepRow], format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string(rows).expect("serializable")),
        Format::Csv => rows_to_csv(rows),
    }
}

/// One header line and one record; nested values are written as JSON.
fn value_to_csv(v: &Value) -> String {
    let Value::Object(map) = v else {
        return format!("{v}\n");
    };
    let cell = |x: &Value| match x {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    let quote = |s: String| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s
        }
    };
    let header: Vec<String> = map.keys().cloned().map(quote).collect();
    let record: Vec<String> = map.values().map(|x| quote(cell(x))).collect();
    format!("{}\n{}\n", header.join(","), record.join(","))
}
