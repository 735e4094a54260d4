mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use xordisc::decomposition::{verify_decomposition, MicroLocalTable};
use xordisc::discrepancy::{discrepancy, local_discrepancy};
use xordisc::io::{read_matrices, read_point_set, write_point_set};
use xordisc::mean::{mean_lq_many, shift_search, Objective};
use xordisc::pointset::{check_net, generate_bitrev_net, generate_digital_net};
use xordisc::report::{format_float, ExactNumber};
use xordisc::theorem::verify_theorem;
use xordisc::{
    DyadicPoint, Error, Exponent, GeneratorMatrices, KhinchinConstants, PointSet, RademacherPolynomial, ShiftMode,
    Theorem, Verdict,
};

const THREADS_ENV: &str = "XORDISC_THREADS";

#[derive(Parser, Debug)]
#[command(name = "xordisc", version, about = "L_q discrepancies under dyadic XOR shifts")]
struct Cli {
    /// Flat `key = value` file supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also write a CSV table (disc and mean only).
    #[arg(long, global = true, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Worker threads; defaults to $XORDISC_THREADS, then to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Generate or check (δ, s, d)-nets.
    #[command(subcommand)]
    Net(NetCommand),
    /// Local, L_2, L_∞ or grid L_q discrepancy of a point set.
    Disc(DiscArgs),
    /// Check the Rademacher decomposition of the local discrepancy.
    #[command(subcommand)]
    Decompose(DecomposeCommand),
    /// Mean L_q discrepancies over dyadic shifts.
    Mean(MeanArgs),
    /// Khinchin bracket on random coefficient tables.
    Khinchin(KhinchinArgs),
    /// Check a mean-discrepancy bound.
    Theorem(TheoremArgs),
    /// Search shifts for an extremal discrepancy.
    Search(SearchArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
enum NetCommand {
    Gen(NetGenArgs),
    Check(NetCheckArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
enum DecomposeCommand {
    Verify(DecomposeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    Bitrev,
    Sobol,
    Matrices,
}

#[derive(Args, Debug, Serialize)]
struct NetGenArgs {
    #[arg(long, value_enum, default_value = "bitrev")]
    family: Family,
    #[arg(long)]
    s: u32,
    /// Dimension for the Sobol family.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Generator-matrix file for the matrices family.
    #[arg(long)]
    matrices: Option<PathBuf>,
    /// Point-set file to write.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct NetCheckArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    delta: u32,
}

#[derive(Args, Debug, Serialize)]
struct DiscArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Exponents, e.g. `1,2,inf`.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    q: Vec<Exponent>,
    /// Grid level for the L_q bracket (q ∉ {2, ∞}).
    #[arg(long, default_value_t = 8)]
    level: u32,
    /// Anchor mantissas for the local discrepancy, e.g. `3,5`.
    #[arg(long, value_delimiter = ',')]
    anchor: Option<Vec<u64>>,
    #[arg(long, default_value_t = 8)]
    anchor_precision: u32,
}

#[derive(Args, Debug, Serialize)]
struct DecomposeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    s: u32,
    /// Anchor grid level; defaults to s + 1.
    #[arg(long)]
    level: Option<u32>,
    /// Also emit the micro-local table at this shift (mantissas at precision s).
    #[arg(long, value_delimiter = ',')]
    table_shift: Option<Vec<u64>>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
struct ModeArgs {
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Shifts drawn in sampled mode.
    #[arg(long, default_value_t = 1000)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModeArgs {
    fn shift_mode(&self) -> ShiftMode {
        match self.mode {
            Mode::Exact => ShiftMode::Exact,
            Mode::Sampled => ShiftMode::Sampled { count: self.count, seed: self.seed },
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct MeanArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Shift levels, e.g. `2,3,4`.
    #[arg(long, value_delimiter = ',', required = true)]
    s: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    q: Vec<Exponent>,
    #[command(flatten)]
    #[serde(flatten)]
    mode: ModeArgs,
    /// Grid level for per-shift L_q brackets.
    #[arg(long)]
    level: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
struct KhinchinArgs {
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    s: u32,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    q: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    tables: u32,
    /// Coefficients are drawn uniformly from `[-max, max]`.
    #[arg(long, default_value_t = 8)]
    max: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct TheoremArgs {
    /// 2.1, 2.2 or 2.3
    #[serde(serialize_with = "serialize_display")]
    which: Theorem,
    /// Built-in net (2.1 only); otherwise use --in.
    #[arg(long, value_enum)]
    net: Option<Family>,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long, default_value = "1")]
    q: Exponent,
    #[arg(long)]
    delta: Option<u32>,
    /// Dimension of a built-in Sobol net.
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[command(flatten)]
    #[serde(flatten)]
    mode: ModeArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ObjectiveArg {
    MinimizeLq,
    MaximizeLq,
    MaximizeLinf,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    s: u32,
    #[arg(long, value_enum, default_value = "minimize-lq")]
    objective: ObjectiveArg,
    #[arg(long, default_value = "2")]
    q: Exponent,
    #[arg(long, default_value_t = 1024)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn serialize_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

enum Failure {
    Usage(String),
    Guard(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Guard { .. } => Failure::Guard(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

struct Outcome {
    result: Value,
    csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    violated: bool,
}

impl Outcome {
    fn report<T: Serialize>(r: &T) -> Result<Self, Failure> {
        Ok(Outcome { result: to_value(r)?, csv: None, violated: false })
    }
}

fn to_value<T: Serialize>(r: &T) -> Result<Value, Failure> {
    // round-trip through text so float fields keep their fixed rendering
    let text = serde_json::to_string(r).map_err(|e| Failure::Usage(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(e.to_string()))
}

fn net_from(family: Family, s: u32, d: usize, matrices: Option<&PathBuf>) -> Result<PointSet, Failure> {
    Ok(match family {
        Family::Bitrev => generate_bitrev_net(s)?,
        Family::Sobol => generate_digital_net(&GeneratorMatrices::sobol(d, s)?)?,
        Family::Matrices => {
            let path = matrices.ok_or_else(|| Failure::Usage("--matrices is required for this family".into()))?;
            generate_digital_net(&read_matrices(path)?)?
        }
    })
}

fn run(cmd: &Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Net(NetCommand::Gen(a)) => {
            let d = net_from(a.family, a.s, a.d, a.matrices.as_ref())?;
            if let Some(p) = &a.points {
                write_point_set(p, &d)?;
            }
            let check = check_net(&d, 0)?;
            Outcome::report(&json!({
                "d": d.dim(),
                "s": a.s,
                "n": d.len(),
                "minimal_delta": check.minimal_delta,
            }))
        }
        Command::Net(NetCommand::Check(a)) => Outcome::report(&check_net(&read_point_set(&a.input)?, a.delta)?),
        Command::Disc(a) => {
            let d = read_point_set(&a.input)?;
            let results = a.q.iter().map(|&q| discrepancy(&d, q, a.level)).collect::<Result<Vec<_>, _>>()?;
            let local = match &a.anchor {
                Some(m) => {
                    let y = DyadicPoint::new(m.clone(), a.anchor_precision)?;
                    Some(ExactNumber::from(&local_discrepancy(&d, &y)?))
                }
                None => None,
            };
            let rows = results
                .iter()
                .map(|r| {
                    vec![
                        r.q.to_string(),
                        format_float(r.value),
                        format_float(r.lower),
                        format_float(r.upper),
                        format_float(r.error_radius),
                        to_value(&r.method).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            Ok(Outcome {
                result: to_value(&json!({ "n": d.len(), "d": d.dim(), "local": local, "discrepancies": to_value(&results)? }))?,
                csv: Some((vec!["q", "value", "lower", "upper", "error_radius", "method"], rows)),
                violated: false,
            })
        }
        Command::Decompose(DecomposeCommand::Verify(a)) => {
            let d = read_point_set(&a.input)?;
            let report = verify_decomposition(&d, a.s, a.level.unwrap_or(a.s + 1))?;
            let table = match &a.table_shift {
                Some(z) => Some(to_value(&MicroLocalTable::build(&d, a.s, &DyadicPoint::new(z.clone(), a.s)?)?)?),
                None => None,
            };
            Ok(Outcome {
                violated: !report.holds,
                result: json!({ "verification": to_value(&report)?, "table": table }),
                csv: None,
            })
        }
        Command::Mean(a) => {
            let d = read_point_set(&a.input)?;
            let mode = a.mode.shift_mode();
            let mut all = Vec::new();
            for &s in &a.s {
                all.extend(mean_lq_many(&d, s, &a.q, &mode, a.level)?);
            }
            let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
            let rows = all
                .iter()
                .map(|e| {
                    vec![
                        e.s.to_string(),
                        e.q.to_string(),
                        format_float(e.value),
                        format_float(e.lower),
                        opt(e.upper),
                        opt(e.lower_confidence),
                        e.exact.as_ref().map(|x| x.value.exact.clone()).unwrap_or_default(),
                    ]
                })
                .collect();
            Ok(Outcome {
                result: to_value(&all)?,
                csv: Some((vec!["s", "q", "value", "lower", "upper", "lower_confidence", "exact_power"], rows)),
                violated: false,
            })
        }
        Command::Khinchin(a) => khinchin(a),
        Command::Theorem(a) => {
            let d = match (&a.net, &a.input) {
                (Some(_), Some(_)) => return Err(Failure::Usage("give either --net or --in".into())),
                (Some(f), None) => {
                    let s = a.s.ok_or_else(|| Failure::Usage("--net needs --s".into()))?;
                    net_from(*f, s, a.d, None)?
                }
                (None, Some(p)) => read_point_set(p)?,
                (None, None) => return Err(Failure::Usage("give --net or --in".into())),
            };
            let r = verify_theorem(&d, a.which, a.q, a.s, &a.mode.shift_mode(), a.delta)?;
            Ok(Outcome { violated: r.verdict == Verdict::Violated, result: to_value(&r)?, csv: None })
        }
        Command::Search(a) => {
            let d = read_point_set(&a.input)?;
            let objective = match a.objective {
                ObjectiveArg::MinimizeLq => Objective::MinimizeLq,
                ObjectiveArg::MaximizeLq => Objective::MaximizeLq,
                ObjectiveArg::MaximizeLinf => Objective::MaximizeLinf,
            };
            Outcome::report(&shift_search(&d, a.s, objective, a.q, a.budget, a.seed)?)
        }
    }
}

#[derive(Serialize)]
struct KhinchinSummary {
    q: f64,
    constants: KhinchinConstants,
    tables: u32,
    passed: u32,
    min_ratio: Option<String>,
    max_ratio: Option<String>,
}

fn khinchin(a: &KhinchinArgs) -> Result<Outcome, Failure> {
    if a.max < 0 {
        return Err(Failure::Usage("--max must be non-negative".into()));
    }
    let len = (a.s as usize + 1).pow(a.k as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let polys = (0..a.tables)
        .map(|_| {
            let c = (0..len).map(|_| rng.gen_range(-a.max..=a.max) as i128).collect();
            RademacherPolynomial::new(a.k, a.s, 0, c)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    let mut all_ok = true;
    for &q in &a.q {
        let mut passed = 0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &polys {
            let r = p.khinchin_check(q)?;
            if r.lower_ok && r.upper_ok {
                passed += 1;
            }
            if let Some(x) = r.ratio {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        all_ok &= passed == a.tables;
        out.push(KhinchinSummary {
            q,
            constants: KhinchinConstants::new(q, a.k as u32),
            tables: a.tables,
            passed,
            min_ratio: lo.is_finite().then(|| format_float(lo)),
            max_ratio: hi.is_finite().then(|| format_float(hi)),
        });
    }
    Ok(Outcome { result: json!({ "all_ok": all_ok, "checks": to_value(&out)? }), csv: None, violated: !all_ok })
}

fn write_csv(path: &PathBuf, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Usage(e.to_string()))
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be an integer"))),
        Err(_) => Ok(None),
    }
}

fn main_inner(cli: Cli) -> Result<bool, Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.threads)? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Usage(e.to_string()))?;
    let outcome = pool.install(|| run(&cli.command))?;
    if let Some(path) = &cli.csv {
        let (header, rows) = outcome
            .csv
            .as_ref()
            .ok_or_else(|| Failure::Usage("this command has no CSV table".into()))?;
        write_csv(path, header, rows)?;
    }
    let report = json!({ "config": to_value(&cli.command)?, "result": outcome.result });
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Usage(e.to_string()))? + "\n";
    match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(outcome.violated)
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match main_inner(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Guard(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
