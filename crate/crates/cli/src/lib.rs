//! The `deconv` command line.
//!
//! Every subcommand writes CSV to stdout, or to `--out FILE`. Exit status is
//! 0 on success, 1 for usage and input errors, 2 for numerical failures.

use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use deconv::asymptotics::{bias_b1, bias_b2, rates, variance_v, TailProfile};
use deconv::bandwidth::{select_bandwidth, MisePlan, RoughnessSource};
use deconv::distributions::{smoothness_class, ErrorModel, TargetModel};
use deconv::estimators::{poly_moment, DeconvFit, GridSpec};
use deconv::kernels::Kernel;
use deconv::simlab::{self, Estimand, ExperimentConfig};
use deconv::transforms::{QuadratureSpec, WeightContext};
use deconv::DeconvError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "deconv", version, about = "Deconvolution estimators of distribution functions, quantiles and moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Relative tolerance of the Fourier-inversion integrals.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Panels per oscillation period.
    #[arg(long)]
    panels: Option<usize>,
    /// Truncation point of the frequency integral when h = 0.
    #[arg(long)]
    t_max: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file of long options (command-line flags win).
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn quadrature(&self) -> QuadratureSpec<f64> {
        let mut q = QuadratureSpec::default();
        if let Some(r) = self.rel_tol {
            q.rel_tol = r;
        }
        if let Some(p) = self.panels {
            q.panels_per_period = p;
        }
        if let Some(t) = self.t_max {
            q.t_max_zero_bandwidth = t;
        }
        q
    }
}

#[derive(Args, Debug, Clone)]
struct FitArgs {
    /// Data file: one number per line, '#' starts a comment.
    #[arg(long)]
    data: PathBuf,
    /// Error law: symgamma:ALPHA, laplace:SCALE or noerror.
    #[arg(long)]
    error: String,
    /// Kernel R,S with K^Ft(t) = (1 - t^R)^S on [-1, 1].
    #[arg(long, default_value = "4,2")]
    kernel: String,
    /// A bandwidth, or "auto" for the one-step plug-in rule.
    #[arg(long, default_value = "auto")]
    bandwidth: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate F-hat (or f-hat with --density).
    Estimate {
        #[command(flatten)]
        fit: FitArgs,
        /// Number of points on the standard span, or a comma-separated list.
        #[arg(long, default_value = "201", allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        density: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Quantiles of the monotonized F-hat.
    Quantile {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
        /// Resolution of the inverted curve.
        #[arg(long, default_value_t = 1025)]
        grid_points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Polynomial (--r) and absolute (--q) moments of W.
    Moments {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, value_delimiter = ',')]
        r: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Draws from F-hat by inverse transform, one per line.
    Resample {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// MISE-optimal bandwidth.
    Bandwidth {
        #[arg(long)]
        error: String,
        /// Sample size; defaults to the size of --data.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, conflicts_with = "target")]
        data: Option<PathBuf>,
        /// normal, mixture or gamma2 (exact roughness).
        #[arg(long)]
        target: Option<String>,
        /// exact, normal or onestep.
        #[arg(long)]
        roughness: Option<String>,
        #[arg(long, default_value = "2,2")]
        kernel: String,
        /// Also write the (h, M(h)) search curve here.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo experiment.
    Simulate {
        #[arg(long)]
        target: String,
        #[arg(long)]
        error: String,
        #[arg(long)]
        n: usize,
        /// cdf, quantile, absmoment, ise or bandwidth.
        #[arg(long)]
        estimand: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        u: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        /// Bandwidth grid; defaults to 0.2, 0.4, ..., 2.0.
        #[arg(long, value_delimiter = ',')]
        h_grid: Vec<f64>,
        #[arg(long, default_value_t = simlab::DEFAULT_RUNS)]
        runs: usize,
        #[arg(long)]
        seed: u64,
        /// Defaults to 4,2 for pointwise estimands and 2,2 otherwise.
        #[arg(long)]
        kernel: Option<String>,
        /// Write every per-run value as JSON lines.
        #[arg(long)]
        dump_runs: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Optimal rates and bandwidth orders.
    Rates {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        q: Option<f64>,
        /// Constant in front of the bandwidth orders.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Leading bias (B1 at x = 0, B2 elsewhere) and variance constants.
    Asymp {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        z: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        b: f64,
        /// Bandwidth, needed for B2.
        #[arg(long)]
        h: Option<f64>,
        /// f_X(x); V is reported per unit density when omitted.
        #[arg(long, default_value_t = 1.0)]
        fx: f64,
        #[arg(long, default_value = "4,2")]
        kernel: String,
        #[command(flatten)]
        common: Common,
    },
    /// Whether an error law is rough enough for root-n estimation.
    CheckSmoothness {
        #[arg(long)]
        error: String,
        /// Test the absolute-moment criterion of order q instead.
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(DeconvError),
}

impl From<DeconvError> for Failure {
    fn from(e: DeconvError) -> Self {
        match e {
            DeconvError::Parse { .. } | DeconvError::Invalid(_) | DeconvError::Domain(_) => {
                Failure::Usage(e.to_string())
            }
            e => Failure::Numeric(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Display) -> Failure {
    Failure::Usage(msg.to_string())
}

fn parse<T: FromStr<Err = DeconvError>>(s: &str) -> CliResult<T> {
    s.parse::<T>().map_err(usage)
}

fn parse_kernel(s: &str) -> CliResult<Kernel> {
    parse(s)
}

/// Reads one number per line, skipping blank lines and '#' comments.
pub fn read_data(path: &Path) -> io::Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v: f64 = body.parse().map_err(|_| {
            io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {body:?} is not a number", path.display(), i + 1))
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Splices `key=value` lines of every `--config FILE` into the argument
/// list after the subcommand, skipping keys already given as flags.
fn expand_config(argv: Vec<String>) -> CliResult<Vec<String>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = Some(argv.get(i + 1).ok_or_else(|| usage("--config needs a file"))?.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("{path}: {e}")))?;
    let mut out = argv.clone();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) =
            body.split_once('=').ok_or_else(|| usage(format!("{path}:{}: expected key=value", i + 1)))?;
        let flag = format!("--{}", key.trim());
        let given = argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match value.trim() {
            "true" => out.push(flag),
            "false" => {}
            v => out.push(format!("{flag}={v}")),
        }
    }
    Ok(out)
}

fn fmt_row(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn emit(common: &Common, body: &[u8], stdout: &mut dyn Write) -> CliResult<()> {
    match &common.out {
        Some(p) => fs::write(p, body)?,
        None => stdout.write_all(body)?,
    }
    Ok(())
}

fn build_fit(fit: &FitArgs, common: &Common, stderr: &mut dyn Write) -> CliResult<DeconvFit<f64>> {
    let data = read_data(&fit.data).map_err(|e| usage(format!("{}: {e}", fit.data.display())))?;
    if data.is_empty() {
        return Err(usage(format!("{} contains no data", fit.data.display())));
    }
    let error: ErrorModel<f64> = parse(&fit.error)?;
    let kernel = parse_kernel(&fit.kernel)?;
    let h = if fit.bandwidth.eq_ignore_ascii_case("auto") {
        let plan = MisePlan::new(error, Kernel::BANDWIDTH, data.len(), RoughnessSource::OneStep(data.clone()))?;
        let h = select_bandwidth(&plan)?.h_opt;
        writeln!(stderr, "bandwidth: {h}")?;
        h
    } else {
        fit.bandwidth.parse::<f64>().map_err(|_| usage(format!("bad bandwidth {:?}", fit.bandwidth)))?
    };
    let ctx = WeightContext::new(kernel, error, h, common.quadrature())?;
    if let Some(w) = ctx.warning() {
        writeln!(stderr, "warning: {w}")?;
    }
    Ok(DeconvFit::new(data, ctx)?)
}

fn run_command(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Estimate { fit, grid, density, common } => {
            let f = build_fit(&fit, &common, stderr)?;
            let points: Vec<f64> = if grid.contains(',') {
                grid.split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("bad grid value {s:?}"))))
                    .collect::<CliResult<_>>()?
            } else {
                let n: usize = grid.trim().parse().map_err(|_| usage(format!("bad grid {grid:?}")))?;
                f.grid(&GridSpec { span: None, points: n })?
            };
            let mut body = String::from(if density { "x,fhat\n" } else { "x,Fhat\n" });
            for &x in &points {
                let v = if density { f.density_at(x)? } else { f.cdf_at(x) };
                body.push_str(&format!("{}\n", fmt_row(&[x, v])));
            }
            emit(&common, body.as_bytes(), stdout)
        }
        Command::Quantile { fit, u, grid_points, common } => {
            let f = build_fit(&fit, &common, stderr)?;
            let xi = f.quantiles(&u, &GridSpec { span: None, points: grid_points })?;
            let mut body = String::from("u,xi\n");
            for (a, b) in u.iter().zip(&xi) {
                body.push_str(&format!("{}\n", fmt_row(&[*a, *b])));
            }
            emit(&common, body.as_bytes(), stdout)
        }
        Command::Moments { fit, r, q, common } => {
            if r.is_empty() && q.is_empty() {
                return Err(usage("give --r and/or --q"));
            }
            let f = build_fit(&fit, &common, stderr)?;
            let mut body = String::from("kind,order,value\n");
            for &k in &r {
                let v = poly_moment(f.data(), f.context().error(), k)?;
                body.push_str(&format!("poly,{k},{v}\n"));
            }
            for &k in &q {
                let v = f.abs_moment(k)?;
                body.push_str(&format!("abs,{k},{v}\n"));
            }
            emit(&common, body.as_bytes(), stdout)
        }
        Command::Resample { fit, m, seed, common } => {
            let f = build_fit(&fit, &common, stderr)?;
            let draws = f.resample(m, &mut ChaCha8Rng::seed_from_u64(seed))?;
            let mut body = String::new();
            for d in draws {
                body.push_str(&format!("{d}\n"));
            }
            emit(&common, body.as_bytes(), stdout)
        }
        Command::Bandwidth { error, n, data, target, roughness, kernel, curve, common } => {
            let error: ErrorModel<f64> = parse(&error)?;
            let kernel = parse_kernel(&kernel)?;
            let data = data.map(|p| read_data(&p).map_err(|e| usage(format!("{}: {e}", p.display())))).transpose()?;
            let n = n.or(data.as_ref().map(Vec::len)).ok_or_else(|| usage("give --n or --data"))?;
            let mode = roughness.unwrap_or_else(|| if target.is_some() { "exact".into() } else { "onestep".into() });
            let source = match (mode.as_str(), target, data) {
                ("exact", Some(t), _) => RoughnessSource::Exact(parse::<TargetModel<f64>>(&t)?),
                ("exact", None, _) => return Err(usage("exact roughness needs --target")),
                ("normal", _, Some(d)) => RoughnessSource::NormalReference(d),
                ("onestep", _, Some(d)) => RoughnessSource::OneStep(d),
                ("normal" | "onestep", _, None) => return Err(usage(format!("{mode} roughness needs --data"))),
                (other, _, _) => return Err(usage(format!("unknown roughness {other:?}"))),
            };
            let choice = select_bandwidth(&MisePlan::new(error, kernel, n, source)?)?;
            let body = format!("h_opt,mise_min\n{}\n", fmt_row(&[choice.h_opt, choice.mise_min]));
            if let Some(p) = curve {
                let mut c = String::from("h,mise\n");
                for (h, m) in &choice.curve {
                    c.push_str(&format!("{}\n", fmt_row(&[*h, *m])));
                }
                fs::write(p, c)?;
            }
            emit(&common, body.as_bytes(), stdout)
        }
        Command::Simulate { target, error, n, estimand, x, u, q, h_grid, runs, seed, kernel, dump_runs, common } => {
            let estimand = match estimand.to_ascii_lowercase().as_str() {
                "cdf" => Estimand::Cdf(x),
                "quantile" => Estimand::Quantile(u),
                "absmoment" => Estimand::AbsMoment(q),
                "ise" => Estimand::Ise,
                "bandwidth" => Estimand::Bandwidth,
                other => return Err(usage(format!("unknown estimand {other:?}"))),
            };
            let mut cfg = ExperimentConfig::new(parse(&target)?, parse(&error)?, n, estimand, seed);
            if !h_grid.is_empty() {
                cfg.h_grid = h_grid;
            }
            if let Some(k) = kernel {
                cfg.kernel = parse_kernel(&k)?;
            }
            cfg.runs = runs;
            cfg.quadrature = common.quadrature();
            cfg.keep_runs = dump_runs.is_some();
            cfg.validate().map_err(usage)?;
            let summary = match cfg.estimand {
                Estimand::Ise | Estimand::Bandwidth => simlab::run_ise_experiment(&cfg)?,
                _ => simlab::run_mse_experiment(&cfg)?,
            };
            let failures = summary.total_failures();
            if failures > 0 {
                writeln!(stderr, "{failures} failed evaluations")?;
                for c in summary.cells.iter().filter(|c| c.failures > 0) {
                    writeln!(stderr, "  {} h={:?} arg={:?}: {} failures", c.statistic.name(), c.h, c.arg, c.failures)?;
                }
            }
            if let Some(p) = dump_runs {
                let mut lines = String::new();
                for r in &summary.records {
                    lines.push_str(&serde_json::to_string(r).map_err(usage)?);
                    lines.push('\n');
                }
                fs::write(p, lines)?;
            }
            let mut body = Vec::new();
            simlab::write_csv(&summary, &cfg.estimand, &mut body)?;
            emit(&common, &body, stdout)
        }
        Command::Rates { alpha, beta, n, q, scale, common } => {
            let r = rates(alpha, beta, n, scale, q)?;
            let rho4 = r.rho4.map(|v| v.to_string()).unwrap_or_default();
            let body = format!(
                "rho1,rho2,rho3,rho4,h1,h2,h3,ell\n{},{},{},{rho4},{},{},{},{}\n",
                r.rho1, r.rho2, r.rho3, r.h1, r.h2, r.h3, r.ell
            );
            emit(&common, body.as_bytes(), stdout)
        }
        Command::Asymp { x, alpha, beta, z, a, b, h, fx, kernel, common } => {
            let kernel = parse_kernel(&kernel)?;
            let profile = TailProfile::new(alpha, z, beta, a, b)?;
            let (name, bias) = if x == 0.0 {
                ("B1", bias_b1(kernel, &profile)?)
            } else {
                let h = h.ok_or_else(|| usage("B2 needs --h when x != 0"))?;
                ("B2", bias_b2(h, x, &profile)?)
            };
            let v = variance_v(x, &profile, kernel, fx)?;
            let body = format!("term,value\n{name},{bias}\nV,{v}\n");
            emit(&common, body.as_bytes(), stdout)
        }
        Command::CheckSmoothness { error, q, common } => {
            let error: ErrorModel<f64> = parse(&error)?;
            let report = smoothness_class(&error, q);
            emit(&common, format!("{}\n", report.verdict).as_bytes(), stdout)
        }
    }
}

/// Runs the command line with explicit output streams and returns the exit
/// status.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            return EXIT_USAGE;
        }
        Err(Failure::Numeric(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_NUMERIC;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run_command(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Numeric(e)) => {
            let _ = writeln!(stderr, "numerical failure: {e}");
            EXIT_NUMERIC
        }
    }
}

/// Entry point used by the binary: real stdout and stderr.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = run(argv, &mut out, &mut err);
    let _ = out.flush();
    code
}
