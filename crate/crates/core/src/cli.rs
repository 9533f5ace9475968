//! Command-line front end: `factorize`, `simulate`, `verify` and `markov`.
//!
//! Every subcommand also reads `--config file.json`, a flat object mirroring
//! the flags (a simulation manifest works too; its `params` are used).
//! Flags given on the command line win over the file.
//!
//! Exit codes: 0 success, 1 I/O, 2 bad arguments, 3 invalid lifetime
//! (mass, range or lattice), 4 numerical factorization failure, 5 a
//! verification gate failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::arma::{check_causal_invertible, ArmaModel, Factorization, RootInfo};
use crate::error::Error;
use crate::lifetime::{LifetimeOptions, LifetimeSpec, RationalPGF};
use crate::markov::{conditional_probs_p2, joint_probs_p2, mgf_trivariate};
use crate::polynomials::{Poly, Tolerances};
use crate::renewal::acvf_renewal_pgf;
use crate::simulate::{simulate_counts, SimConfig};
use crate::verify::{verify, Level, VerifyOptions, DEFAULT_SEED, DEFAULT_STEPS};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "RENEWAL_ARMA_THREADS";

pub const EXIT_IO: i32 = 1;
pub const EXIT_ARGUMENT: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_GATE: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{failed} verification gate(s) failed")]
    GateFailure { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_ARGUMENT,
            CliError::Io { .. } => EXIT_IO,
            CliError::GateFailure { .. } => EXIT_GATE,
            CliError::Lib(e) => match e {
                Error::InvalidArgument(_) | Error::UnsupportedOrder(_) => EXIT_ARGUMENT,
                Error::InvalidSpec(_) | Error::Lattice { .. } => EXIT_VALIDATION,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "renewal-arma",
    version,
    about = "Binomial ARMA count series from superposed renewal processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact ARMA representation of the count series, with root moduli and autocovariances.
    Factorize(FactorizeArgs),
    /// Simulate a count series to CSV or JSON, with a sidecar manifest.
    Simulate(SimulateArgs),
    /// Check analytic identities (quick) and Monte-Carlo gates (full).
    Verify(VerifyArgs),
    /// Joint and conditional tables and MGF values for a head of length 2.
    Markov(MarkovArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct SpecArgs {
    /// Head probabilities f_1,..,f_p.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub head: Option<Vec<f64>>,
    /// Tail ratio r: P(L = n + 1) = r P(L = n) beyond the head.
    #[arg(long)]
    pub r: Option<f64>,
    /// Number of superposed chains.
    #[arg(long = "M")]
    pub m: Option<u32>,
    /// Accept f_1 = 0 (still rejects lattice laws).
    #[arg(long)]
    pub allow_zero_f1: bool,
    /// JSON file mirroring these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Generating-function numerator, ascending powers.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pgf_num: Option<Vec<f64>>,
    /// Generating-function denominator, ascending powers.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pgf_den: Option<Vec<f64>>,
    /// Last autocovariance lag reported.
    #[arg(long)]
    pub hmax: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; a manifest is written next to it as `<out>.manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Args)]
#[command(
    after_help = "Sample autocovariances use the biased estimator (divisor n), which keeps \
the estimated autocovariance sequence positive semidefinite."
)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_enum)]
    pub level: Option<LevelArg>,
    /// ARMA model JSON checked instead of the factorized one.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Simulated series file (CSV or JSON) to test instead of a fresh run.
    #[arg(long)]
    pub series: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Length of simulated runs at the full level.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MarkovArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// MGF argument `s1,s2,s3`; repeatable.
    #[arg(long, value_delimiter = ',', num_args = 1, action = clap::ArgAction::Append, allow_hyphen_values = true)]
    pub mgf: Vec<f64>,
}

/// Values read from `--config`.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub head: Option<Vec<f64>>,
    pub r: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<u32>,
    pub allow_zero_f1: Option<bool>,
    pub pgf_num: Option<Vec<f64>>,
    pub pgf_den: Option<Vec<f64>>,
    pub hmax: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub level: Option<Level>,
    pub mgf: Option<Vec<[f64; 3]>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if let Some(params) = value.get_mut("params") {
            value = params.take();
        }
        serde_json::from_value(value)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

struct Resolved {
    cfg: ConfigFile,
}

impl Resolved {
    fn new(spec: &SpecArgs) -> Result<Self, CliError> {
        let mut cfg = match &spec.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        if spec.head.is_some() {
            cfg.head = spec.head.clone();
        }
        cfg.r = spec.r.or(cfg.r);
        cfg.m = spec.m.or(cfg.m);
        if spec.allow_zero_f1 {
            cfg.allow_zero_f1 = Some(true);
        }
        Ok(Self { cfg })
    }

    fn has_spec(&self) -> bool {
        self.cfg.head.is_some()
    }

    fn spec(&self) -> Result<LifetimeSpec, CliError> {
        let head = self
            .cfg
            .head
            .clone()
            .ok_or_else(|| CliError::Usage("--head is required".into()))?;
        let r = self.cfg.r.unwrap_or(0.0);
        let opts = LifetimeOptions {
            allow_zero_f1: self.cfg.allow_zero_f1.unwrap_or(false),
        };
        Ok(LifetimeSpec::with_options(head, r, opts)?)
    }

    fn m(&self) -> u32 {
        self.cfg.m.unwrap_or(1)
    }

    /// Parameters echoed into outputs, at full precision.
    fn params(&self, extra: Value) -> Value {
        let mut p = json!({});
        let obj = p.as_object_mut().expect("object");
        if let Some(h) = &self.cfg.head {
            obj.insert("head".into(), json!(h));
            obj.insert("r".into(), json!(self.cfg.r.unwrap_or(0.0)));
        }
        if self.cfg.allow_zero_f1 == Some(true) {
            obj.insert("allow_zero_f1".into(), json!(true));
        }
        obj.insert("M".into(), json!(self.m()));
        if let Value::Object(more) = extra {
            obj.extend(more.into_iter().filter(|(_, v)| !v.is_null()));
        }
        p
    }
}

fn envelope(command: &str, params: Value) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("params".into(), params);
    m
}

fn merge(into: &mut serde_json::Map<String, Value>, value: impl Serialize) {
    if let Value::Object(obj) = serde_json::to_value(value).expect("serializable") {
        into.extend(obj);
    }
}

fn print_json(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(out, "{text}").map_err(|e| io_err(Path::new("<stdout>"), e))
}

#[derive(Serialize)]
struct FactorizeOutput<'a> {
    #[serde(flatten)]
    model: &'a ArmaModel,
    k_constant_term: f64,
    k_theorem: f64,
    lifetime_variance: f64,
    ar_roots: Vec<RootInfo>,
    ma_roots: Vec<RootInfo>,
    causal: bool,
    invertible: bool,
    gamma: Vec<f64>,
}

pub fn cmd_factorize(args: &FactorizeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let res = Resolved::new(&args.spec)?;
    let cfg = &res.cfg;
    let num = args.pgf_num.clone().or_else(|| cfg.pgf_num.clone());
    let den = args.pgf_den.clone().or_else(|| cfg.pgf_den.clone());
    let hmax = args.hmax.or(cfg.hmax).unwrap_or(20);
    let pgf = match (num, den, res.has_spec()) {
        (Some(n), Some(d), false) => RationalPGF::new(Poly::new(n), Poly::new(d))?,
        (None, None, true) => res.spec()?.pgf(),
        (None, None, false) => {
            return Err(CliError::Usage(
                "give either --head/--r or --pgf-num/--pgf-den".into(),
            ))
        }
        (Some(_), Some(_), true) => {
            return Err(CliError::Usage(
                "--head and --pgf-num/--pgf-den are mutually exclusive".into(),
            ))
        }
        _ => {
            return Err(CliError::Usage(
                "--pgf-num and --pgf-den go together".into(),
            ))
        }
    };
    let fact = Factorization::compute(&pgf, res.m(), &Tolerances::default())?;
    let roots = check_causal_invertible(&fact.model);
    let gamma = acvf_renewal_pgf(&pgf, res.m(), hmax);

    let params = if res.has_spec() {
        res.params(json!({ "hmax": hmax }))
    } else {
        json!({
            "pgf_num": pgf.num().coeffs(),
            "pgf_den": pgf.den().coeffs(),
            "M": res.m(),
            "hmax": hmax,
        })
    };
    let mut doc = envelope("factorize", params);
    merge(
        &mut doc,
        FactorizeOutput {
            model: &fact.model,
            k_constant_term: fact.k_constant_term,
            k_theorem: fact.k_theorem,
            lifetime_variance: fact.lifetime_variance,
            ar_roots: roots.ar_roots,
            ma_roots: roots.ma_roots,
            causal: roots.causal,
            invertible: roots.invertible,
            gamma,
        },
    );
    print_json(out, &Value::Object(doc))
}

/// Metadata carried inside a series file. Deterministic, so equal
/// configurations produce byte-identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub schema_version: u32,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFile {
    pub meta: SeriesMeta,
    pub values: Vec<u32>,
}

/// Serialize a series as CSV: one `# {meta}` line, then `t,y` rows.
pub fn series_to_csv(meta: &SeriesMeta, values: &[u32]) -> String {
    let mut s = String::with_capacity(values.len() * 10);
    let _ = writeln!(
        s,
        "# {}",
        serde_json::to_string(meta).expect("serializable")
    );
    s.push_str("t,y\n");
    for (t, y) in values.iter().enumerate() {
        let _ = writeln!(s, "{t},{y}");
    }
    s
}

/// Read a series written by `simulate`, either format.
pub fn read_series(path: &Path) -> Result<SeriesFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let bad = |m: String| CliError::Usage(format!("{}: {m}", path.display()));
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(&text).map_err(|e| bad(e.to_string()));
    }
    let mut lines = text.lines();
    let meta_line = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| bad("missing metadata line".into()))?;
    let meta: SeriesMeta = serde_json::from_str(meta_line).map_err(|e| bad(e.to_string()))?;
    if lines.next() != Some("t,y") {
        return Err(bad("missing `t,y` header".into()));
    }
    let values = lines
        .map(|l| {
            l.split_once(',')
                .and_then(|(_, y)| y.parse().ok())
                .ok_or_else(|| bad(format!("malformed row `{l}`")))
        })
        .collect::<Result<_, _>>()?;
    Ok(SeriesFile { meta, values })
}

/// Sidecar manifest for a written file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub version: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub timestamp: String,
    pub outputs: Vec<OutputChecksum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub path: String,
    pub sha256: String,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let res = Resolved::new(&args.spec)?;
    let cfg = &res.cfg;
    let steps = args
        .steps
        .or(cfg.steps)
        .ok_or_else(|| CliError::Usage("--steps is required".into()))?;
    if steps == 0 {
        return Err(CliError::Usage("--steps must be positive".into()));
    }
    let path = args
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("--out is required".into()))?;
    let format = args.format.or(cfg.format).unwrap_or(Format::Csv);
    let config = SimConfig {
        spec: res.spec()?,
        m: res.m(),
        steps,
        seed: args.seed.or(cfg.seed).unwrap_or(0),
    };
    let series = simulate_counts(&config)?;
    let meta = SeriesMeta {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
    };
    let body = match format {
        Format::Csv => series_to_csv(&meta, &series.values),
        Format::Json => {
            let file = SeriesFile {
                meta,
                values: series.values,
            };
            serde_json::to_string(&file).expect("serializable") + "\n"
        }
    };
    fs::write(&path, &body).map_err(|e| io_err(&path, e))?;

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: "simulate".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        params: res.params(json!({
            "steps": steps,
            "seed": config.seed,
            "format": format,
        })),
        seed: Some(config.seed),
        timestamp: chrono::Utc::now().to_rfc3339(),
        outputs: vec![OutputChecksum {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(body.as_bytes())),
        }],
    };
    let mpath = manifest_path(&path);
    let text = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
    fs::write(&mpath, text).map_err(|e| io_err(&mpath, e))?;
    print_json(out, &serde_json::to_value(&manifest).expect("serializable"))
}

pub fn cmd_verify(
    args: &VerifyArgs,
    out: &mut dyn Write,
    log: &mut dyn Write,
) -> Result<(), CliError> {
    let res = Resolved::new(&args.spec)?;
    let cfg = &res.cfg;
    let level = match args.level {
        Some(LevelArg::Quick) => Level::Quick,
        Some(LevelArg::Full) => Level::Full,
        None => cfg.level.unwrap_or(Level::Quick),
    };
    let series = args.series.as_deref().map(read_series).transpose()?;
    let (spec, m) = match (&series, res.has_spec()) {
        (Some(file), false) => (file.meta.config.spec.clone(), file.meta.config.m),
        _ => (res.spec()?, res.m()),
    };
    let model = match &args.model {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            let model: ArmaModel = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            Some(model)
        }
        None => None,
    };
    let opts = VerifyOptions {
        level,
        seed: args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        steps: args.steps.or(cfg.steps).unwrap_or(DEFAULT_STEPS),
        model,
        series: series.map(|s| s.values),
    };
    if opts.steps < 1000 {
        return Err(CliError::Usage("--steps must be at least 1000".into()));
    }
    let report = verify(&spec, m, &opts)?;

    for g in &report.gates {
        let mark = if g.passed { "pass" } else { "FAIL" };
        let rule = match g.rule {
            crate::verify::Rule::AtMost => "<=",
            crate::verify::Rule::Above => ">",
        };
        let _ = writeln!(
            log,
            "{mark} {:<30} {:>12.4e} {rule} {:.1e} {}",
            g.name, g.measured, g.threshold, g.detail
        );
    }
    let params = res.params(json!({
        "level": level,
        "seed": opts.seed,
        "steps": opts.steps,
    }));
    let mut doc = envelope("verify", params);
    merge(&mut doc, &report);
    print_json(out, &Value::Object(doc))?;
    let failed = report.failures().count();
    if failed > 0 {
        return Err(CliError::GateFailure { failed });
    }
    Ok(())
}

pub fn cmd_markov(args: &MarkovArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let res = Resolved::new(&args.spec)?;
    let spec = res.spec()?;
    let points: Vec<[f64; 3]> = if !args.mgf.is_empty() {
        if !args.mgf.len().is_multiple_of(3) {
            return Err(CliError::Usage("--mgf takes three values s1,s2,s3".into()));
        }
        args.mgf.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
    } else {
        res.cfg.mgf.clone().unwrap_or_default()
    };
    let joint = joint_probs_p2(&spec)?;
    let conditionals = conditional_probs_p2(&spec)?;
    let m = res.m();
    let mgf: Vec<Value> = points
        .iter()
        .map(|s| json!({ "s": s, "value": mgf_trivariate(&joint, m, *s) }))
        .collect();
    let mut doc = envelope("markov", res.params(json!({ "mgf": points })));
    doc.insert("mu".into(), json!(spec.mean()));
    doc.insert(
        "joint".into(),
        serde_json::to_value(joint).expect("serializable"),
    );
    doc.insert(
        "conditionals".into(),
        serde_json::to_value(conditionals).expect("serializable"),
    );
    doc.insert("mgf".into(), Value::Array(mgf));
    print_json(out, &Value::Object(doc))
}

/// Size the global thread pool from `RENEWAL_ARMA_THREADS` if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    // a pool built earlier in the same process keeps its size
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write, log: &mut dyn Write) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Factorize(a) => cmd_factorize(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Verify(a) => cmd_verify(a, out, log),
        Command::Markov(a) => cmd_markov(a, out),
    }
}

/// Parse `args`, run the command and return the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, log: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(log, "{e}");
            return if e.use_stderr() { EXIT_ARGUMENT } else { 0 };
        }
    };
    match dispatch(&cli, out, log) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            e.exit_code()
        }
    }
}
