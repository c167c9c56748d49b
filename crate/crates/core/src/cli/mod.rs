//! The `murmur` command line.
//!
//! Settings are resolved from defaults, then flags, then the `--config`
//! file, each layer overriding the previous one. Every subcommand writes a
//! single CSV whose last line is `# config_hash=<hash> version=<version>`.
//! Parallel work happens inside a pool of `--workers` threads; all sums are
//! order-independent, so output does not depend on the worker count.

pub mod config;
pub mod output;
pub mod validate;

use std::path::PathBuf;

use clap::Parser;

use crate::analytic::{
    asymptote_from_values, bessel_prefactor, density_bessel, euler_identities, AnalyticError,
    BesselSeriesParams, MurmurationEvaluator, WeightFunction,
};
use crate::arith_core::{pairwise_sum, ArithError};
use crate::density::{y_max, DensityContext, DensityError, DensityParams};
use crate::empirical::{empirical_sweep, rolling_average, window_width, EmpiricalError, FamilyData};
use crate::localfactors::LocalError;
use crate::quadfield::{ClassNumberCache, DiscriminantWindow, QuadError};

pub use config::{GridSpec, RunConfig, Subcommand, WeightChoice};
use output::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::CacheCorrupt(_) | QuadError::Io(_) => CliError::Resource(e.to_string()),
            QuadError::Arith(a) => a.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<ArithError> for CliError {
    fn from(e: ArithError) -> Self {
        match e {
            ArithError::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<LocalError> for CliError {
    fn from(e: LocalError) -> Self {
        match e {
            LocalError::Budget { .. } => CliError::Resource(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<DensityError> for CliError {
    fn from(e: DensityError) -> Self {
        match e {
            DensityError::Arith(a) => a.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::Density(d) => d.into(),
            AnalyticError::Arith(a) => a.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<EmpiricalError> for CliError {
    fn from(e: EmpiricalError) -> Self {
        match e {
            EmpiricalError::Quad(q) => q.into(),
            EmpiricalError::Arith(a) => a.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "murmur", version, about = "Murmurations of Hecke L-functions of imaginary quadratic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(clap::Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Family discriminants with class numbers: D,h,L1,method.
    Family,
    /// G(p, X, Y) for every prime in [p-min, p-max].
    Empirical,
    /// Rolling averages of G over [P, P + P^h-exp] at P = Ξ·X.
    Average,
    /// The averaged density M(Ξ) on the grid.
    Density,
    /// The murmuration function M_Φ(Ξ) on the grid.
    #[command(name = "murmur-fn")]
    MurmurFn,
    /// Rolling averages against M_Φ with residuals and their RMS.
    Compare,
    /// The Euler-product constants and identity residuals.
    Constants,
    /// Run the invariant suites.
    Validate,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Family => Subcommand::Family,
            Command::Empirical => Subcommand::Empirical,
            Command::Average => Subcommand::Average,
            Command::Density => Subcommand::Density,
            Command::MurmurFn => Subcommand::MurmurFn,
            Command::Compare => Subcommand::Compare,
            Command::Constants => Subcommand::Constants,
            Command::Validate => Subcommand::Validate,
        }
    }
}

#[derive(clap::Args, Debug, Default)]
struct Flags {
    /// Window start X; the family is squarefree D ≡ 3 (mod 4) in [X, X+Y].
    #[arg(long, global = true)]
    x: Option<String>,
    /// Window length Y [default: X].
    #[arg(long, global = true)]
    y: Option<String>,
    /// Smallest prime for `empirical` [default: 3].
    #[arg(long, global = true)]
    p_min: Option<String>,
    /// Largest prime for `empirical` [default: 2.25·X].
    #[arg(long, global = true)]
    p_max: Option<String>,
    /// Averaging window exponent, H = P^h-exp [default: 0.55].
    #[arg(long, global = true)]
    h_exp: Option<String>,
    /// Euler-product cutoff M [default: 1e5].
    #[arg(long, global = true)]
    euler_cutoff: Option<String>,
    /// Exclusion radius around Ξ = y²/4 [default: 0.05].
    #[arg(long, global = true)]
    exclusion: Option<String>,
    /// Ξ grid as lo:hi:n or lo:hi:n:log.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Weight Φ: indicator or bump [default: indicator].
    #[arg(long, global = true)]
    weight: Option<String>,
    /// Support a:b of Φ [default: 1:2].
    #[arg(long, global = true)]
    support: Option<String>,
    /// Add the Bessel-series form to `density`.
    #[arg(long, global = true)]
    bessel: bool,
    /// Output file [default: stdout].
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Class-number cache file.
    #[arg(long, global = true)]
    cache: Option<String>,
    /// `key = value` file overriding flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Suite for `validate`: arith, localfactors, quadfield, density, analytic, empirical, all.
    #[arg(long, global = true)]
    suite: Option<String>,
    /// Output format; only csv.
    #[arg(long, global = true)]
    format: Option<String>,
}

impl Flags {
    fn settings(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = [
            ("x", &self.x),
            ("y", &self.y),
            ("p-min", &self.p_min),
            ("p-max", &self.p_max),
            ("h-exp", &self.h_exp),
            ("euler-cutoff", &self.euler_cutoff),
            ("exclusion", &self.exclusion),
            ("grid", &self.grid),
            ("weight", &self.weight),
            ("support", &self.support),
            ("out", &self.out),
            ("workers", &self.workers),
            ("cache", &self.cache),
            ("suite", &self.suite),
            ("format", &self.format),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect();
        if self.bessel {
            out.push(("bessel", "true".into()));
        }
        out
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match resolve(&cli).and_then(|cfg| execute(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("murmur: {e}");
            e.exit_code()
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::defaults(cli.command.into());
    for (k, v) in cli.flags.settings() {
        cfg.set(k, &v)?;
    }
    if let Some(path) = &cli.flags.config {
        cfg.apply_file(path)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a resolved configuration, writing its CSV.
pub fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Resource(format!("thread pool: {e}")))?;
    let (table, failure) = pool.install(|| build_table(cfg))?;
    output::emit(&table.render(&cfg.hash())?, cfg.out.as_deref())?;
    match failure {
        Some(msg) => Err(CliError::Validation(msg)),
        None => Ok(()),
    }
}

/// The CSV for a configuration, plus a failure message from `validate`.
pub fn build_table(cfg: &RunConfig) -> Result<(Table, Option<String>), CliError> {
    let table = match cfg.subcommand {
        Subcommand::Family => cmd_family(cfg)?,
        Subcommand::Empirical => cmd_empirical(cfg)?,
        Subcommand::Average => cmd_average(cfg, false)?,
        Subcommand::Compare => cmd_average(cfg, true)?,
        Subcommand::Density => cmd_density(cfg)?,
        Subcommand::MurmurFn => cmd_murmur_fn(cfg)?,
        Subcommand::Constants => cmd_constants(cfg)?,
        Subcommand::Validate => return cmd_validate(cfg),
    };
    Ok((table, None))
}

fn family(cfg: &RunConfig) -> Result<FamilyData, CliError> {
    let window = DiscriminantWindow::new(cfg.x, cfg.window_y())?;
    match &cfg.cache {
        Some(path) => {
            let mut cache = ClassNumberCache::load(path)?;
            let fam = FamilyData::compute(window, Some(&mut cache))?;
            cache.save(path)?;
            Ok(fam)
        }
        None => Ok(FamilyData::compute(window, None)?),
    }
}

fn density_context(cfg: &RunConfig) -> Result<DensityContext, CliError> {
    Ok(DensityContext::new(DensityParams::new(cfg.euler_cutoff, cfg.exclusion)?)?)
}

fn weight(cfg: &RunConfig) -> Result<WeightFunction, CliError> {
    let (a, b) = cfg.support;
    Ok(match cfg.weight {
        WeightChoice::Indicator => WeightFunction::indicator(a, b)?,
        WeightChoice::Bump => WeightFunction::smooth_bump(a, b)?,
    })
}

fn cmd_family(cfg: &RunConfig) -> Result<Table, CliError> {
    let fam = family(cfg)?;
    let mut t = Table::new(["D", "h", "L1", "method"]);
    for r in fam.records() {
        t.push([r.d.to_string(), r.h.to_string(), r.l1.to_string(), r.method.to_string()]);
    }
    Ok(t)
}

fn cmd_empirical(cfg: &RunConfig) -> Result<Table, CliError> {
    let fam = family(cfg)?;
    let (lo, hi) = cfg.prime_range();
    let points = empirical_sweep(&fam, lo, hi)?;
    let ys = points.iter().filter_map(|pt| pt.g_num_plus_by_y.keys().next_back().copied()).max().unwrap_or(0);
    let mut header: Vec<String> = ["p", "p_mod_8", "p_mod_3", "p_mod_5", "p_mod_4", "xi", "G", "G_denom", "G_num_minus", "ramified"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend((1..=ys).map(|y| format!("y{y}")));
    let mut t = Table::new(header);
    for pt in &points {
        let mut row = vec![
            pt.p.to_string(),
            (pt.p % 8).to_string(),
            (pt.p % 3).to_string(),
            (pt.p % 5).to_string(),
            (pt.p % 4).to_string(),
            pt.xi.to_string(),
            pt.g.to_string(),
            pt.g_denom.to_string(),
            pt.g_num_minus.to_string(),
            pt.ramified_term.to_string(),
        ];
        row.extend((1..=ys).map(|y| pt.g_num_plus_by_y.get(&y).copied().unwrap_or(0.0).to_string()));
        t.push(row);
    }
    Ok(t)
}

fn cmd_average(cfg: &RunConfig, compare: bool) -> Result<Table, CliError> {
    let params = DensityParams::new(cfg.euler_cutoff, cfg.exclusion)?;
    let mut anchors = Vec::new();
    for xi in cfg.grid_spec().points() {
        if compare && params.is_excluded(xi) {
            eprintln!("murmur: skipping Ξ = {xi} inside an exclusion zone");
            continue;
        }
        let p = (xi * cfg.x as f64).ceil().max(3.0) as u64;
        anchors.push((p, window_width(p, cfg.h_exp)));
    }
    let fam = family(cfg)?;
    let lo = anchors.iter().map(|a| a.0).min().unwrap_or(3);
    let hi = anchors.iter().map(|a| a.0 + a.1).max().unwrap_or(3);
    let points = empirical_sweep(&fam, lo, hi)?;
    let ctx = if compare { Some(density_context(cfg)?) } else { None };
    let w = weight(cfg)?;
    let mut t = if compare {
        Table::new(["Xi", "P", "H", "n_primes", "G_avg", "M_Phi", "residual"])
    } else {
        Table::new(["Xi", "P", "H", "n_primes", "G_avg"])
    };
    let mut averages = Vec::new();
    for &(p, h) in &anchors {
        match rolling_average(&points, p, h) {
            Ok(a) => averages.push(a),
            Err(EmpiricalError::EmptyWindow { lo, hi }) => eprintln!("murmur: no primes in [{lo}, {hi}], skipped"),
            Err(e) => return Err(e.into()),
        }
    }
    match &ctx {
        None => {
            for a in &averages {
                t.push([a.xi.to_string(), a.anchor.to_string(), a.h.to_string(), a.primes_used.to_string(), a.g_avg.to_string()]);
            }
        }
        Some(ctx) => {
            let eval = MurmurationEvaluator::new(ctx);
            let xis: Vec<f64> = averages.iter().map(|a| a.xi).collect();
            let m = eval.evaluate_grid(&xis, &w)?;
            let mut sq = Vec::with_capacity(averages.len());
            for (a, mv) in averages.iter().zip(&m) {
                let r = a.g_avg - mv.value;
                sq.push(r * r);
                t.push([
                    a.xi.to_string(),
                    a.anchor.to_string(),
                    a.h.to_string(),
                    a.primes_used.to_string(),
                    a.g_avg.to_string(),
                    mv.value.to_string(),
                    r.to_string(),
                ]);
            }
            if !sq.is_empty() {
                let rms = (pairwise_sum(&sq) / sq.len() as f64).sqrt();
                t.push(["RMS".to_string(), String::new(), String::new(), sq.len().to_string(), String::new(), String::new(), rms.to_string()]);
            }
        }
    }
    Ok(t)
}

fn cmd_density(cfg: &RunConfig) -> Result<Table, CliError> {
    let ctx = density_context(cfg)?;
    let grid: Vec<f64> = cfg
        .grid_spec()
        .points()
        .into_iter()
        .filter(|&xi| {
            let skip = ctx.params.is_excluded(xi);
            if skip {
                eprintln!("murmur: skipping Ξ = {xi} inside an exclusion zone");
            }
            !skip
        })
        .collect();
    let ys = grid.iter().map(|&xi| y_max(xi)).max().unwrap_or(0);
    let mut header: Vec<String> = ["Xi", "M", "M_minus"].into_iter().map(String::from).collect();
    header.extend((1..=ys).map(|y| format!("M_y{y}")));
    if cfg.bessel {
        header.extend(["M_bessel", "bessel_diff", "bessel_trunc_estimate"].map(String::from));
    }
    let values = ctx.averaged_grid(&grid);
    let params = BesselSeriesParams::default();
    let mut t = Table::new(header);
    for v in &values {
        let mut row = vec![v.xi.to_string(), v.total.to_string(), v.minus_term.to_string()];
        row.extend((1..=ys).map(|y| v.per_y.get(&y).copied().unwrap_or(0.0).to_string()));
        if cfg.bessel {
            let b = density_bessel(v.xi, &params, &ctx)?;
            row.extend([b.value.to_string(), (b.value - v.total).to_string(), b.trunc_estimate.to_string()]);
        }
        t.push(row);
    }
    Ok(t)
}

fn cmd_murmur_fn(cfg: &RunConfig) -> Result<Table, CliError> {
    let ctx = density_context(cfg)?;
    let w = weight(cfg)?;
    let spec = cfg.grid_spec();
    let values = MurmurationEvaluator::new(&ctx).evaluate_grid(&spec.points(), &w)?;
    let mut t = Table::new(["Xi", "M_Phi", "quad_error"]);
    for v in &values {
        t.push([v.xi, v.value, v.quad_error]);
    }
    if spec.lo >= 100.0 && spec.hi >= 100.0 * spec.lo {
        let r = asymptote_from_values(&values)?;
        t.push(["slope".to_string(), r.slope.to_string(), r.intercept.to_string()]);
    }
    Ok(t)
}

fn cmd_constants(cfg: &RunConfig) -> Result<Table, CliError> {
    let ctx = density_context(cfg)?;
    let e = euler_identities(cfg.euler_cutoff.max(1000))?;
    let mut t = Table::new(["name", "value"]);
    t.push(["euler_cutoff".to_string(), cfg.euler_cutoff.to_string()]);
    for (name, v) in [
        ("A", ctx.a),
        ("cbar", ctx.cbar),
        ("zeta2", ctx.zeta2),
        ("bessel_prefactor", bessel_prefactor(&ctx)),
        ("identity_8_11", e.value_8_11),
        ("identity_8_11_residual", e.residual_8_11),
        ("identity_2_3", e.value_2_3),
        ("identity_2_3_residual", e.residual_2_3),
        ("h_exp", cfg.h_exp),
    ] {
        t.push([name.to_string(), v.to_string()]);
    }
    Ok(t)
}

fn cmd_validate(cfg: &RunConfig) -> Result<(Table, Option<String>), CliError> {
    let checks = validate::run(cfg.suite.as_deref()).map_err(CliError::Usage)?;
    let mut t = Table::new(["suite", "check", "passed", "detail"]);
    for c in &checks {
        t.push([c.suite.to_string(), c.name.to_string(), c.passed.to_string(), c.detail.clone()]);
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{}/{}", c.suite, c.name)).collect();
    Ok((t, if failed.is_empty() { None } else { Some(failed.join(", ")) }))
}
