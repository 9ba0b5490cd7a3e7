use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use freeprob::dsl::{self, DslError};
use freeprob::fock::{verify_levy_axioms, FockConfig, FockModel};
use freeprob::infdiv::check_infdiv;
use freeprob::limits::{self, align, ConvergenceReport};
use freeprob::models::{self, CovarianceMatrix, PoissonSpec, ProjectionModel};
use freeprob::nc::{enumerate_nc, mobius, NcPartition};
use freeprob::scalar::parse_rational;
use freeprob::{CumulantFunctional, Functional, FunctionalKind, Rational};

/// Exact free probability computations from the command line.
#[derive(Parser)]
#[command(name = "freeprob", version)]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Add a metadata block (version, timestamp) to JSON output.
    #[arg(long, global = true)]
    meta: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Non-crossing partitions.
    #[command(subcommand)]
    Nc(NcCommand),
    /// Moment-cumulant transforms of a functional file.
    Transform {
        direction: Direction,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the functional of a named model.
    Model(ModelArgs),
    /// Finite-N cumulants of Poisson-type arrays against their limit.
    Limit(LimitArgs),
    /// Gram-form positivity test.
    #[command(subcommand)]
    Infdiv(InfdivCommand),
    /// Fock-space realization and Levy-axiom checks.
    #[command(subcommand)]
    Fock(FockCommand),
    /// Poisson-type approximations j*phi_{1/j} of a target.
    Approx {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 10, 100, 1000])]
        j: Vec<u64>,
        #[arg(long, env = "FREEPROB_ORDER", default_value_t = 6)]
        order: usize,
    },
    /// Evaluates a DSL script.
    Run {
        script: PathBuf,
        #[arg(long, env = "FREEPROB_ORDER", default_value_t = 6)]
        order: usize,
    },
}

#[derive(Subcommand)]
enum NcCommand {
    /// Lists NC(n) in canonical order.
    Enumerate { n: usize },
    /// Mobius values mu(pi, 1_n) over NC(n).
    Mobius { n: usize },
}

#[derive(Subcommand)]
enum InfdivCommand {
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        /// Use the first k variables of the file.
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long)]
        degree: usize,
    },
}

#[derive(Subcommand)]
enum FockCommand {
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Moment order checked; also the default particle and degree caps.
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        particles: Option<usize>,
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    M2c,
    C2m,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Ctor {
    Semicircle,
    SemicircleFamily,
    FreePoisson,
    CompoundFreePoisson,
    Projection,
    Bernoulli,
    PointMass,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Moments,
    Cumulants,
}

#[derive(Args)]
struct ModelArgs {
    ctor: Ctor,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    r: Option<Rational>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    lambda: Option<Rational>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    alpha: Option<Rational>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    beta: Option<Rational>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    t: Option<Rational>,
    /// Covariance as a JSON matrix, e.g. '[["1","0"],["0","1"]]'.
    #[arg(long)]
    cov: Option<String>,
    /// Base distribution file for compound_free_poisson.
    #[arg(long)]
    base: Option<PathBuf>,
    /// Output table; defaults to the model's natural description.
    #[arg(long)]
    kind: Option<Kind>,
    #[arg(long, env = "FREEPROB_ORDER", default_value_t = 6)]
    order: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    family: LimitFamily,
    /// JSON {"rates": [...], "jumps": [...]}.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [10u64, 100, 1000])]
    schedule: Vec<u64>,
    #[arg(long, env = "FREEPROB_ORDER", default_value_t = 6)]
    order: usize,
    #[arg(long, value_enum, default_value_t = ModelChoice::Equal)]
    model: ModelChoice,
    /// Base distribution file for the compound family.
    #[arg(long)]
    base: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LimitFamily {
    Poisson,
    Multi,
    Compound,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelChoice {
    Equal,
    Orthogonal,
    Free,
}

impl From<ModelChoice> for ProjectionModel {
    fn from(m: ModelChoice) -> Self {
        match m {
            ModelChoice::Equal => ProjectionModel::Equal,
            ModelChoice::Orthogonal => ProjectionModel::Orthogonal,
            ModelChoice::Free => ProjectionModel::Free,
        }
    }
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("not a rational number: {:?}", s))
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Parse(String),
    Core(freeprob::Error),
    Dsl(DslError),
}

impl CliError {
    fn code(&self) -> u8 {
        use freeprob::Error::*;
        match self {
            CliError::Io(_) | CliError::Parse(_) => 2,
            CliError::Core(Structural(_)) => 2,
            CliError::Core(_) => 1,
            CliError::Dsl(DslError::Syntax(_)) => 2,
            CliError::Dsl(DslError::Eval { error: Structural(_), .. }) => 2,
            CliError::Dsl(DslError::Eval { .. }) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) | CliError::Parse(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{}", e),
            CliError::Dsl(e) => write!(f, "{}", e),
        }
    }
}

impl From<freeprob::Error> for CliError {
    fn from(e: freeprob::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {}", path.display(), e)))
}

fn read_functional(path: &Path) -> CliResult<Functional> {
    Functional::from_json(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {}", path.display(), e)))
}

fn read_spec(path: &Path) -> CliResult<PoissonSpec> {
    let v: Value = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Parse(format!("{}: {}", path.display(), e)))?;
    let list = |key: &str| -> CliResult<Option<Vec<Rational>>> {
        match v.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items.iter().map(json_rational).collect::<CliResult<_>>().map(Some),
            Some(_) => Err(CliError::Parse(format!("{}: `{}` must be a list", path.display(), key))),
        }
    };
    let Some(rates) = list("rates")? else {
        return Err(CliError::Parse(format!("{}: missing `rates`", path.display())));
    };
    Ok(match list("jumps")? {
        Some(jumps) => PoissonSpec::new(rates, jumps)?,
        None => PoissonSpec::from_rates(rates)?,
    })
}

fn json_rational(v: &Value) -> CliResult<Rational> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() => n.to_string(),
        other => return Err(CliError::Parse(format!("expected a \"p/q\" string, got {}", other))),
    };
    parse_rational(&text).ok_or_else(|| CliError::Parse(format!("not a rational number: {:?}", text)))
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

/// Restriction of a cumulant table to its first `k` variables.
fn marginal(cf: &CumulantFunctional, k: Option<usize>) -> CliResult<CumulantFunctional> {
    let Some(k) = k else { return Ok(cf.clone()) };
    if k == 0 || k > cf.k() {
        return Err(freeprob::Error::Validation(format!("--vars {} outside 1..={}", k, cf.k())).into());
    }
    let names = cf.alphabet()[..k].to_vec();
    Ok(CumulantFunctional::from_fn(names, cf.max_order(), |w| cf.cumulant(w.letters()).unwrap())?)
}

fn blocks_json(pi: &NcPartition) -> Value {
    json!(pi.blocks().iter().map(|b| b.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>())
}

struct Output {
    json: Value,
    text: String,
}

fn run(command: Command) -> CliResult<Option<Output>> {
    Ok(Some(match command {
        Command::Nc(NcCommand::Enumerate { n }) => {
            let parts = enumerate_nc(n)?;
            let text = parts.iter().map(|p| format!("{}\n", p)).collect::<String>() + &format!("count: {}\n", parts.len());
            Output { json: json!({"n": n, "count": parts.len(), "partitions": parts.iter().map(blocks_json).collect::<Vec<_>>()}), text }
        }
        Command::Nc(NcCommand::Mobius { n }) => {
            let parts = enumerate_nc(n)?;
            let top = NcPartition::top(n);
            let mut rows = vec![vec!["partition".to_string(), "mobius".into()]];
            let mut entries = vec![];
            for p in &parts {
                let mu = mobius(p, &top)?.0;
                rows.push(vec![p.to_string(), mu.to_string()]);
                entries.push(json!({"partition": blocks_json(p), "mobius": mu}));
            }
            Output { json: json!({"n": n, "entries": entries}), text: align(&rows) }
        }
        Command::Transform { direction, input, out } => {
            let f = read_functional(&input)?;
            let result = match (direction, f.kind()) {
                (Direction::M2c, FunctionalKind::Moments) => Functional::Cumulants(f.to_cumulants()),
                (Direction::C2m, FunctionalKind::Cumulants) => Functional::Moments(f.to_moments()),
                (_, kind) => {
                    return Err(CliError::Core(freeprob::Error::Validation(format!(
                        "{} holds {}, which this direction does not accept",
                        input.display(),
                        kind
                    ))))
                }
            };
            write_out(out.as_deref(), &result.to_json())?;
            return Ok(None);
        }
        Command::Model(args) => {
            let f = build_model(&args)?;
            write_out(args.out.as_deref(), &f.to_json())?;
            return Ok(None);
        }
        Command::Limit(args) => {
            let spec = read_spec(&args.spec)?;
            let model = args.model.into();
            let report = match args.family {
                LimitFamily::Poisson => limits::poisson_limit_check(&spec, &args.schedule, args.order)?,
                LimitFamily::Multi => limits::multi_poisson_limit_check(&spec, model, &args.schedule, args.order)?,
                LimitFamily::Compound => {
                    let Some(base) = &args.base else {
                        return Err(CliError::Parse("limit compound needs --base FILE".into()));
                    };
                    let base = read_functional(base)?.to_moments();
                    limits::compound_limit_check(&base, &spec, model, &args.schedule, args.order)?
                }
            };
            convergence(report)
        }
        Command::Infdiv(InfdivCommand::Check { input, vars, degree }) => {
            let cf = marginal(&read_functional(&input)?.to_cumulants(), vars)?;
            let report = check_infdiv(&cf, cf.k(), degree, &Rational::default())?;
            Output { text: report.to_text(), json: serde_json::to_value(&report).unwrap() }
        }
        Command::Fock(FockCommand::Verify { input, order, degree, particles, vars, tolerance }) => {
            let cf = marginal(&read_functional(&input)?.to_cumulants(), vars)?.to_f64();
            let config = FockConfig::new(degree.unwrap_or(order), particles.unwrap_or(order));
            let model = FockModel::build(&cf, cf.k(), &config)?;
            let report = verify_levy_axioms(&model, order, tolerance)?;
            Output { text: report.to_text(), json: serde_json::to_value(&report).unwrap() }
        }
        Command::Approx { target, j, order } => {
            let cf = read_functional(&target)?.to_cumulants();
            convergence(limits::approximation_report(&cf, &j, order)?)
        }
        Command::Run { script, order } => {
            let results = dsl::run(&read(&script)?, order).map_err(CliError::Dsl)?;
            let text = results.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("");
            Output { json: json!({"results": results}), text }
        }
    }))
}

fn convergence(report: ConvergenceReport) -> Output {
    Output { text: report.to_text(), json: serde_json::to_value(&report).unwrap() }
}

fn build_model(a: &ModelArgs) -> CliResult<Functional> {
    let need = |v: &Option<Rational>, name: &str| -> CliResult<Rational> {
        v.clone().ok_or_else(|| CliError::Parse(format!("this model needs --{}", name)))
    };
    let one = Rational::from_integer(1.into());
    let d = a.order;
    let f: Functional = match a.ctor {
        Ctor::Semicircle => models::semicircle(&a.r.clone().unwrap_or_else(|| Rational::from_integer(2.into())), d)?.into(),
        Ctor::SemicircleFamily => {
            let Some(cov) = &a.cov else { return Err(CliError::Parse("semicircle_family needs --cov".into())) };
            let v: Value = serde_json::from_str(cov).map_err(|e| CliError::Parse(format!("--cov: {}", e)))?;
            let rows = v.as_array().ok_or_else(|| CliError::Parse("--cov must be a JSON matrix".into()))?;
            let m = rows
                .iter()
                .map(|row| match row {
                    Value::Array(cells) => cells.iter().map(json_rational).collect::<CliResult<Vec<_>>>(),
                    _ => Err(CliError::Parse("--cov must be a JSON matrix".into())),
                })
                .collect::<CliResult<Vec<_>>>()?;
            models::semicircle_family(&CovarianceMatrix::new(m)?, d)?.into()
        }
        Ctor::FreePoisson => models::free_poisson(&need(&a.lambda, "lambda")?, &a.alpha.clone().unwrap_or(one), d)?.into(),
        Ctor::CompoundFreePoisson => {
            let Some(base) = &a.base else { return Err(CliError::Parse("compound_free_poisson needs --base".into())) };
            let base = read_functional(base)?.to_moments();
            models::compound_free_poisson(&need(&a.lambda, "lambda")?, &base, d)?.into()
        }
        Ctor::Projection => models::projection_functional(&need(&a.t, "t")?, d)?.into(),
        Ctor::Bernoulli => models::bernoulli(
            &need(&a.t, "t")?,
            &a.alpha.clone().unwrap_or(one),
            &a.beta.clone().unwrap_or_default(),
            d,
        )?
        .into(),
        Ctor::PointMass => models::point_mass(&need(&a.alpha, "alpha")?, d)?.into(),
    };
    Ok(match (a.kind, &f) {
        (Some(Kind::Moments), Functional::Cumulants(_)) => Functional::Moments(f.to_moments()),
        (Some(Kind::Cumulants), Functional::Moments(_)) => Functional::Cumulants(f.to_cumulants()),
        _ => f,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (as_json, meta) = (cli.json, cli.meta);
    match run(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(out)) => {
            if as_json {
                let mut value = out.json;
                if meta {
                    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
                    value["meta"] = json!({"version": env!("CARGO_PKG_VERSION"), "timestamp": ts});
                }
                println!("{}", serde_json::to_string_pretty(&value).unwrap());
            } else {
                print!("{}", out.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.code())
        }
    }
}

