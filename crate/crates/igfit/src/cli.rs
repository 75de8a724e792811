//! Command-line front end: data ingestion, single tests with bootstrap
//! p-values, warp-speed power studies, and canned analysis tables.
//!
//! All commands are deterministic: identical flags and seed produce
//! byte-identical output regardless of thread count.

use crate::competing::StatKind;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, Sample};
use crate::montecarlo::{
    bootstrap_test, warp_speed_power, AltFamily, AltSpec, BootstrapConfig, PowerStudyConfig,
};
use crate::report::Report;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Bundled dataset: active repair times (hours), n = 46.
pub const REPAIR_TIMES_TEXT: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/repair_times.txt"));
/// Bundled dataset: Jug Bridge maximum precipitation (inches), n = 25.
pub const JUG_BRIDGE_TEXT: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/jug_bridge.txt"));

#[derive(Parser, Debug)]
#[command(
    name = "igfit",
    version,
    about = "Goodness-of-fit tests for the inverse Gaussian (Wald) family"
)]
pub struct Cli {
    /// Worker threads for Monte Carlo loops (default: all logical cores).
    /// The IGFIT_THREADS environment variable takes precedence. The thread
    /// count never changes numerical results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Test a data file for inverse Gaussian fit with a bootstrap p-value.
    Test(TestArgs),
    /// Estimate rejection rates against an alternative (warp-speed bootstrap).
    Power(PowerArgs),
    /// Recompute the bundled analysis and power tables.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
pub struct TestArgs {
    /// Data file: one positive number per line; blank lines and lines
    /// starting with '#' are ignored.
    #[arg(long)]
    pub data: PathBuf,

    /// Statistic to compute.
    #[arg(long, value_enum)]
    pub stat: StatName,

    /// Estimator for (mu, lambda). hk1, hk2 and vg are defined with ml.
    #[arg(long, value_enum)]
    pub estimator: EstimatorName,

    /// Weight tuning parameter; required for stein/stein-sq, optional for
    /// hk1 (default 0), not accepted elsewhere.
    #[arg(long)]
    pub a: Option<f64>,

    /// Parametric-bootstrap replicates.
    #[arg(long, default_value_t = 10_000)]
    pub b: usize,

    /// Test level.
    #[arg(long, default_value_t = 0.10)]
    pub alpha: f64,

    /// Random seed; fixes the bootstrap draws exactly.
    #[arg(long)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
pub struct PowerArgs {
    /// Alternative as FAMILY:THETA, e.g. weibull:1.2 or ln:0.6. Families:
    /// weibull (w), lognormal (ln), gamma, chisq (chi2), dhillon (dh), ig.
    #[arg(long)]
    pub alt: String,

    /// Sample size per replicate.
    #[arg(long)]
    pub n: usize,

    /// Monte Carlo replicates.
    #[arg(long)]
    pub mc: usize,

    /// Test level.
    #[arg(long, default_value_t = 0.10)]
    pub alpha: f64,

    /// Random seed.
    #[arg(long)]
    pub seed: u64,

    /// Comma-separated statistics, each as stat[:estimator[:a]], e.g.
    /// "stein:mo:10,ad,vg".
    #[arg(long)]
    pub stats: String,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Which bundled table to recompute.
    #[arg(long, value_enum)]
    pub which: WhichTable,

    /// Replicates: bootstrap b for data tables, Monte Carlo count for power
    /// tables (default 10000).
    #[arg(long)]
    pub mc: Option<usize>,

    /// Random seed.
    #[arg(long)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StatName {
    Stein,
    SteinSq,
    Ks,
    Cm,
    Ad,
    Hk1,
    Hk2,
    Vg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorName {
    Ml,
    Mo,
}

impl EstimatorName {
    fn kind(self) -> EstimatorKind {
        match self {
            EstimatorName::Ml => EstimatorKind::Ml,
            EstimatorName::Mo => EstimatorKind::Mo,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WhichTable {
    Data1,
    Data2,
    Power30,
    Power50,
}

/// Parses data text: one decimal number per line, '#' comments and blank
/// lines ignored, any nonpositive or malformed entry is fatal with its
/// 1-based line number.
pub fn parse_data(text: &str, origin: &str) -> Result<Sample> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Ingest {
            path: origin.to_string(),
            line: idx + 1,
            msg: format!("not a number: {line:?}"),
        })?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Ingest {
                path: origin.to_string(),
                line: idx + 1,
                msg: format!("observations must be positive and finite, got {v}"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Ingest {
            path: origin.to_string(),
            line: 0,
            msg: "file contains no observations".into(),
        });
    }
    Sample::new(values)
}

pub fn load_data(path: &Path) -> Result<Sample> {
    let text = std::fs::read_to_string(path)?;
    parse_data(&text, &path.display().to_string())
}

fn build_stat_kind(stat: StatName, estimator: EstimatorName, a: Option<f64>) -> Result<StatKind> {
    let est = estimator.kind();
    let require_ml = |label: &str| -> Result<()> {
        if est != EstimatorKind::Ml {
            return Err(Error::Usage(format!(
                "--estimator mo is not supported for {label}; this statistic is defined with ml estimation"
            )));
        }
        Ok(())
    };
    let no_a = |label: &str| -> Result<()> {
        if a.is_some() {
            return Err(Error::Usage(format!("--a is not accepted for --stat {label}")));
        }
        Ok(())
    };
    let kind = match stat {
        StatName::Stein => StatKind::Stein {
            estimator: est,
            a: a.ok_or_else(|| Error::Usage("--a is required for --stat stein".into()))?,
        },
        StatName::SteinSq => StatKind::SteinSq {
            estimator: est,
            a: a.ok_or_else(|| Error::Usage("--a is required for --stat stein-sq".into()))?,
        },
        StatName::Ks => {
            no_a("ks")?;
            StatKind::Ks { estimator: est }
        }
        StatName::Cm => {
            no_a("cm")?;
            StatKind::Cm { estimator: est }
        }
        StatName::Ad => {
            no_a("ad")?;
            StatKind::Ad { estimator: est }
        }
        StatName::Hk1 => {
            require_ml("hk1")?;
            StatKind::Hk1 { a: a.unwrap_or(0.0) }
        }
        StatName::Hk2 => {
            require_ml("hk2")?;
            no_a("hk2")?;
            StatKind::Hk2
        }
        StatName::Vg => {
            require_ml("vg")?;
            no_a("vg")?;
            StatKind::Vg
        }
    };
    kind.validate()?;
    Ok(kind)
}

fn weight_name(kind: &StatKind) -> Option<String> {
    match kind {
        StatKind::Stein { .. } => Some("exp".into()),
        StatKind::SteinSq { .. } => Some("exp-sq".into()),
        _ => None,
    }
}

pub fn parse_alt(spec: &str) -> Result<AltSpec> {
    let (family, theta) = spec.split_once(':').ok_or_else(|| {
        Error::Usage(format!("expected FAMILY:THETA, got {spec:?} (e.g. weibull:1.2)"))
    })?;
    let family = match family.to_ascii_lowercase().as_str() {
        "weibull" | "w" => AltFamily::Weibull,
        "lognormal" | "ln" => AltFamily::Lognormal,
        "gamma" => AltFamily::Gamma,
        "chisq" | "chi2" => AltFamily::ChiSq,
        "dhillon" | "dh" => AltFamily::Dhillon,
        "ig" => AltFamily::Ig,
        other => {
            return Err(Error::Usage(format!(
                "unknown alternative family {other:?}; expected weibull|lognormal|gamma|chisq|dhillon|ig"
            )))
        }
    };
    let theta: f64 = theta
        .parse()
        .map_err(|_| Error::Usage(format!("cannot parse shape parameter {theta:?}")))?;
    AltSpec::new(family, theta)
}

fn parse_estimator_token(tok: &str, item: &str) -> Result<EstimatorName> {
    match tok {
        "ml" => Ok(EstimatorName::Ml),
        "mo" => Ok(EstimatorName::Mo),
        other => Err(Error::Usage(format!("{item}: unknown estimator {other:?}; expected ml or mo"))),
    }
}

/// Parses one item of --stats: stat[:estimator[:a]].
pub fn parse_stat_item(item: &str) -> Result<StatKind> {
    let parts: Vec<&str> = item.split(':').collect();
    if parts.len() > 3 {
        return Err(Error::Usage(format!("{item}: too many fields; expected stat[:estimator[:a]]")));
    }
    let name = match parts[0] {
        "stein" => StatName::Stein,
        "stein-sq" => StatName::SteinSq,
        "ks" => StatName::Ks,
        "cm" => StatName::Cm,
        "ad" => StatName::Ad,
        "hk1" => StatName::Hk1,
        "hk2" => StatName::Hk2,
        "vg" => StatName::Vg,
        other => {
            return Err(Error::Usage(format!(
                "unknown statistic {other:?}; expected stein|stein-sq|ks|cm|ad|hk1|hk2|vg"
            )))
        }
    };
    let estimator = match parts.get(1) {
        Some(tok) => parse_estimator_token(tok, item)?,
        None => EstimatorName::Ml,
    };
    let a = match parts.get(2) {
        Some(tok) => Some(
            tok.parse::<f64>()
                .map_err(|_| Error::Usage(format!("{item}: cannot parse tuning value {tok:?}")))?,
        ),
        None => None,
    };
    build_stat_kind(name, estimator, a)
}

pub fn parse_stats_list(list: &str) -> Result<Vec<StatKind>> {
    let items: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::Usage("--stats must name at least one statistic".into()));
    }
    items.into_iter().map(parse_stat_item).collect()
}

/// Compact column label, parseable back by `parse_stat_item` except for the
/// display names T/Tt of the characterization statistics.
fn stat_display(kind: &StatKind) -> String {
    match kind {
        StatKind::Stein { estimator, a } => format!("T:{}:{}", estimator.label(), a),
        StatKind::SteinSq { estimator, a } => format!("Tt:{}:{}", estimator.label(), a),
        StatKind::Hk1 { a } => format!("hk1:ml:{a}"),
        StatKind::Hk2 => "hk2:ml".into(),
        StatKind::Vg => "vg:ml".into(),
        other => format!("{}:{}", other.label(), other.estimator().label()),
    }
}

/// The 18 statistics of the bundled analysis tables, in display order.
pub fn analysis_stat_list() -> Vec<StatKind> {
    let mut stats = vec![
        StatKind::Ks { estimator: EstimatorKind::Ml },
        StatKind::Cm { estimator: EstimatorKind::Ml },
        StatKind::Ad { estimator: EstimatorKind::Ml },
        StatKind::Hk1 { a: 0.0 },
        StatKind::Hk2,
        StatKind::Vg,
    ];
    for est in [EstimatorKind::Ml, EstimatorKind::Mo] {
        for a in [0.1, 1.0, 10.0] {
            stats.push(StatKind::Stein { estimator: est, a });
        }
    }
    for est in [EstimatorKind::Ml, EstimatorKind::Mo] {
        for a in [0.1, 1.0, 10.0] {
            stats.push(StatKind::SteinSq { estimator: est, a });
        }
    }
    stats
}

/// The 24 alternatives of the bundled power tables, in display order.
pub fn power_alt_list() -> Vec<AltSpec> {
    let mut alts = Vec::new();
    let mut push = |family, thetas: &[f64]| {
        for &theta in thetas {
            alts.push(AltSpec::new(family, theta).expect("fixed grid"));
        }
    };
    push(AltFamily::Ig, &[1.0, 5.0, 10.0, 20.0]);
    push(AltFamily::Weibull, &[1.0, 1.2, 1.6, 2.0, 3.0]);
    push(AltFamily::Lognormal, &[0.6, 1.0, 1.4, 2.0, 3.0]);
    push(AltFamily::Gamma, &[1.0, 1.5, 2.0, 2.5]);
    push(AltFamily::ChiSq, &[3.0, 5.0, 10.0]);
    push(AltFamily::Dhillon, &[1.0, 1.5, 2.0]);
    alts
}

fn alt_display(alt: &AltSpec) -> String {
    let short = match alt.family() {
        AltFamily::Weibull => "w",
        AltFamily::Lognormal => "ln",
        AltFamily::Gamma => "gamma",
        AltFamily::ChiSq => "chisq",
        AltFamily::Dhillon => "dh",
        AltFamily::Ig => "ig",
    };
    format!("{short}({})", alt.theta())
}

fn cmd_test(args: &TestArgs) -> Result<String> {
    let sample = load_data(&args.data)?;
    let kind = build_stat_kind(args.stat, args.estimator, args.a)?;
    let cfg = BootstrapConfig::new(args.b, args.alpha, args.seed)?;
    let outcome = bootstrap_test(&sample, &kind, &cfg)?;
    let report = Report {
        command: "test".into(),
        dataset: args.data.display().to_string(),
        test: kind.label().into(),
        estimator: kind.estimator().label().into(),
        weight: weight_name(&kind),
        a: kind.tuning(),
        n: sample.n(),
        statistic: outcome.statistic,
        p_value: outcome.p_value,
        critical_value: outcome.critical_value,
        b: outcome.b,
        alpha: outcome.alpha,
        seed: outcome.seed,
        reject: outcome.reject,
        tool_version: env!("CARGO_PKG_VERSION").into(),
    };
    Ok(match args.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Text => report.to_text(),
    })
}

fn cmd_power(args: &PowerArgs) -> Result<String> {
    let cfg = PowerStudyConfig {
        alt: parse_alt(&args.alt)?,
        n: args.n,
        mc: args.mc,
        alpha: args.alpha,
        seed: args.seed,
        stats: parse_stats_list(&args.stats)?,
    };
    let result = warp_speed_power(&cfg)?;
    let mut out = String::from("alt,theta,n,stat,estimator,a,power_pct,mc_se\n");
    for sp in &result.per_stat {
        let a = sp.kind.tuning().map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cfg.alt.family().label(),
            cfg.alt.theta(),
            cfg.n,
            sp.kind.label(),
            sp.kind.estimator().label(),
            a,
            sp.power_pct,
            sp.mc_se
        );
    }
    Ok(out)
}

fn reproduce_data(text: &str, label: &str, b: usize, seed: u64) -> Result<String> {
    let sample = parse_data(text, label)?;
    let cfg = BootstrapConfig::new(b, 0.10, seed)?;
    let mut out = format!(
        "analysis of {label}  (n = {}, bootstrap b = {b}, alpha = 0.1, seed = {seed})\n",
        sample.n()
    );
    let _ = writeln!(out, "{:<16} {:>10} {:>10}", "statistic", "value", "p-value");
    for kind in analysis_stat_list() {
        let outcome = bootstrap_test(&sample, &kind, &cfg)?;
        let _ = writeln!(
            out,
            "{:<16} {:>10.4} {:>10.4}",
            stat_display(&kind),
            outcome.statistic,
            outcome.p_value
        );
    }
    Ok(out)
}

fn reproduce_power(n: usize, mc: usize, seed: u64) -> Result<String> {
    let stats = analysis_stat_list();
    let mut out = format!(
        "rejection percentages  (n = {n}, mc = {mc}, alpha = 0.1, seed = {seed}, warp-speed bootstrap)\n"
    );
    let mut header = format!("{:<12}", "alt");
    for kind in &stats {
        let _ = write!(header, " {:>12}", stat_display(kind));
    }
    out.push_str(&header);
    out.push('\n');
    for alt in power_alt_list() {
        let cfg = PowerStudyConfig {
            alt,
            n,
            mc,
            alpha: 0.10,
            seed,
            stats: stats.clone(),
        };
        let result = warp_speed_power(&cfg)?;
        let _ = write!(out, "{:<12}", alt_display(&alt));
        for sp in &result.per_stat {
            let _ = write!(out, " {:>12}", sp.power_pct.round() as i64);
        }
        out.push('\n');
    }
    Ok(out)
}

fn dispatch(command: &Command) -> Result<String> {
    match command {
        Command::Test(args) => cmd_test(args),
        Command::Power(args) => cmd_power(args),
        Command::Reproduce(args) => {
            let mc = args.mc.unwrap_or(10_000);
            match args.which {
                WhichTable::Data1 => {
                    reproduce_data(REPAIR_TIMES_TEXT, "data/repair_times.txt", mc, args.seed)
                }
                WhichTable::Data2 => {
                    reproduce_data(JUG_BRIDGE_TEXT, "data/jug_bridge.txt", mc, args.seed)
                }
                WhichTable::Power30 => reproduce_power(30, mc, args.seed),
                WhichTable::Power50 => reproduce_power(50, mc, args.seed),
            }
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if let Ok(v) = std::env::var("IGFIT_THREADS") {
        let t: usize = v.trim().parse().map_err(|_| {
            Error::Usage(format!("IGFIT_THREADS must be a positive integer, got {v:?}"))
        })?;
        if t == 0 {
            return Err(Error::Usage("IGFIT_THREADS must be positive".into()));
        }
        return Ok(Some(t));
    }
    if let Some(t) = flag {
        if t == 0 {
            return Err(Error::Usage("--threads must be positive".into()));
        }
        return Ok(Some(t));
    }
    Ok(None)
}

/// Runs a parsed invocation and returns the full standard-output payload.
pub fn run(cli: Cli) -> Result<String> {
    match resolve_threads(cli.threads)? {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Usage(format!("cannot build thread pool: {e}")))?;
            pool.install(|| dispatch(&cli.command))
        }
        None => dispatch(&cli.command),
    }
}

/// Process entry point: parses arguments, runs, prints. Exit code 0 on
/// success, 2 on any input or runtime error.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // Prints help/version (exit 0) or the usage error (exit 2).
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(payload) => {
            print!("{payload}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
