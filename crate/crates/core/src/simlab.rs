//! Seeded Monte Carlo harness: MSE curves over a bandwidth grid, ISE and
//! bandwidth-selection studies, and empirical convergence-rate slopes.
//!
//! Every run draws from its own ChaCha8 stream derived from
//! `(seed, run, role)`, and per-cell reductions happen in run order with
//! compensated sums, so results do not depend on the worker count.

use std::io::{self, Write};
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::rates;
use crate::bandwidth::{select_bandwidth, MisePlan, RoughnessSource};
use crate::distributions::{ErrorModel, TargetModel};
use crate::error::{DeconvError, Result};
use crate::estimators::{DeconvFit, GridSpec};
use crate::kernels::Kernel;
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::real::compensated_sum;
use crate::transforms::{QuadratureSpec, WeightContext, WeightTable};

pub const DEFAULT_RUNS: usize = 500;
/// Simpson nodes of the ISE quadrature over the standard span.
pub const ISE_POINTS: usize = 2049;
/// Curve resolution used when inverting F̂ for quantiles inside the harness.
pub const QUANTILE_GRID_POINTS: usize = 257;

/// {0.2, 0.4, ..., 2.0}.
pub fn default_h_grid() -> Vec<f64> {
    (1..=10).map(|i| 0.2 * i as f64).collect()
}

/// What each run measures.
#[derive(Clone, Debug, PartialEq)]
pub enum Estimand {
    Cdf(Vec<f64>),
    Quantile(Vec<f64>),
    AbsMoment(Vec<f64>),
    Ise,
    Bandwidth,
}

impl Estimand {
    pub fn arguments(&self) -> &[f64] {
        match self {
            Self::Cdf(a) | Self::Quantile(a) | Self::AbsMoment(a) => a,
            Self::Ise | Self::Bandwidth => &[],
        }
    }

    /// CSV column name of the argument.
    pub fn argument_name(&self) -> &'static str {
        match self {
            Self::Cdf(_) => "x",
            Self::Quantile(_) => "u",
            Self::AbsMoment(_) => "q",
            Self::Ise | Self::Bandwidth => "statistic",
        }
    }

    fn statistic(&self) -> Statistic {
        match self {
            Self::Cdf(_) => Statistic::Cdf,
            Self::Quantile(_) => Statistic::Quantile,
            Self::AbsMoment(_) => Statistic::AbsMoment,
            Self::Ise => Statistic::Ise,
            Self::Bandwidth => Statistic::Bandwidth,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub target: TargetModel<f64>,
    pub error: ErrorModel<f64>,
    pub n: usize,
    pub h_grid: Vec<f64>,
    pub estimand: Estimand,
    pub runs: usize,
    pub seed: u64,
    pub kernel: Kernel,
    pub quadrature: QuadratureSpec<f64>,
    /// Keep every per-run value in [`McSummary::records`].
    pub keep_runs: bool,
}

impl ExperimentConfig {
    /// Defaults: the {0.2, ..., 2.0} grid, 500 runs, kernel (4,2) for
    /// pointwise estimands and (2,2) for the bandwidth-driven ones.
    pub fn new(target: TargetModel<f64>, error: ErrorModel<f64>, n: usize, estimand: Estimand, seed: u64) -> Self {
        let kernel = match estimand {
            Estimand::Ise | Estimand::Bandwidth => Kernel::BANDWIDTH,
            _ => Kernel::ESTIMATION,
        };
        Self {
            target,
            error,
            n,
            h_grid: default_h_grid(),
            estimand,
            runs: DEFAULT_RUNS,
            seed,
            kernel,
            quadrature: QuadratureSpec::default(),
            keep_runs: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(DeconvError::Invalid("need at least one run".into()));
        }
        if self.n < 2 {
            return Err(DeconvError::Invalid("sample size must be at least 2".into()));
        }
        self.quadrature.validate()?;
        let pointwise = matches!(self.estimand, Estimand::Cdf(_) | Estimand::Quantile(_) | Estimand::AbsMoment(_));
        if pointwise {
            if self.h_grid.is_empty() {
                return Err(DeconvError::Invalid("the bandwidth grid is empty".into()));
            }
            if self.h_grid.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
                return Err(DeconvError::Invalid("bandwidths must be positive and finite".into()));
            }
            if self.h_grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(DeconvError::Invalid("the bandwidth grid must be increasing".into()));
            }
            if self.estimand.arguments().is_empty() {
                return Err(DeconvError::Invalid("no evaluation arguments".into()));
            }
        }
        for &a in self.estimand.arguments() {
            let ok = match self.estimand {
                Estimand::Cdf(_) => a.is_finite(),
                Estimand::Quantile(_) => a > 0.0 && a < 1.0,
                Estimand::AbsMoment(_) => a > 0.0 && a.is_finite(),
                _ => true,
            };
            if !ok {
                return Err(DeconvError::Domain(format!("argument {a} is invalid for {}", self.estimand.argument_name())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Cdf,
    Quantile,
    AbsMoment,
    Ise,
    Bandwidth,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cdf => "cdf",
            Self::Quantile => "quantile",
            Self::AbsMoment => "absmoment",
            Self::Ise => "ise",
            Self::Bandwidth => "bandwidth",
        }
    }
}

/// Monte Carlo summary of one (h, argument) cell. Variance and MSE are
/// averages over the successful runs (divisor m), so mse = bias² + variance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McCell {
    pub statistic: Statistic,
    pub h: Option<f64>,
    pub arg: Option<f64>,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    /// Standard error of `mse` as a Monte Carlo mean.
    pub mc_se: f64,
    pub successes: usize,
    pub failures: usize,
}

/// One run's value in one cell, as written by the per-run dump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub statistic: Statistic,
    pub h: Option<f64>,
    pub arg: Option<f64>,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct McSummary {
    pub seed: u64,
    pub runs: usize,
    pub n: usize,
    pub cells: Vec<McCell>,
    pub wall_time_secs: f64,
    /// Simpson nodes over each run's standard span, for ISE experiments.
    pub ise_points: Option<usize>,
    pub records: Vec<RunRecord>,
}

impl McSummary {
    pub fn cell(&self, statistic: Statistic, h: Option<f64>, arg: Option<f64>) -> Option<&McCell> {
        self.cells.iter().find(|c| c.statistic == statistic && c.h == h && c.arg == arg)
    }

    pub fn total_failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures).sum()
    }
}

/// Random stream roles within a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Target = 0,
    Error = 1,
    Auxiliary = 2,
}

/// The stream for `(seed, run, role)`; independent of scheduling.
pub fn run_stream(seed: u64, run: usize, role: Role) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((run as u64) << 2) | role as u64);
    rng
}

/// X = W + δ for one run.
pub fn sample_run(target: &TargetModel<f64>, error: &ErrorModel<f64>, n: usize, seed: u64, run: usize) -> Vec<f64> {
    let w = target.sample(n, &mut run_stream(seed, run, Role::Target));
    let d = error.sample(n, &mut run_stream(seed, run, Role::Error));
    w.iter().zip(&d).map(|(a, b)| a + b).collect()
}

/// Reduces per-run values (in run order) to a cell.
pub fn summarize_cell(
    statistic: Statistic,
    h: Option<f64>,
    arg: Option<f64>,
    truth: f64,
    values: &[Option<f64>],
) -> McCell {
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    let m = ok.len();
    let failures = values.len() - m;
    if m == 0 {
        let nan = f64::NAN;
        return McCell {
            statistic,
            h,
            arg,
            truth,
            mean: nan,
            bias: nan,
            variance: nan,
            mse: nan,
            mc_se: nan,
            successes: 0,
            failures,
        };
    }
    let mf = m as f64;
    let mean = compensated_sum(ok.iter().copied()) / mf;
    let variance = compensated_sum(ok.iter().map(|v| (v - mean) * (v - mean))) / mf;
    let sq: Vec<f64> = ok.iter().map(|v| (v - truth) * (v - truth)).collect();
    let mse = compensated_sum(sq.iter().copied()) / mf;
    let mc_se = if m > 1 {
        (compensated_sum(sq.iter().map(|s| (s - mse) * (s - mse))) / (mf * (mf - 1.0))).sqrt()
    } else {
        f64::NAN
    };
    McCell { statistic, h, arg, truth, mean, bias: mean - truth, variance, mse, mc_se, successes: m, failures }
}

/// ν_q = ∫|w|^q f_W(w) dw over the target's support.
pub fn target_abs_moment(target: &TargetModel<f64>, q: f64) -> Result<f64> {
    let mut breaks = target.breakpoints();
    let (lo, hi) = target.support();
    if lo < 0.0 && hi > 0.0 && !breaks.contains(&0.0) {
        breaks.push(0.0);
        breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    }
    integrate_with_breaks(
        |w| w.abs().powf(q) * target.density(w).unwrap_or(0.0),
        &breaks,
        Tolerance::new(1e-13, 1e-11),
    )
}

fn truth_of(target: &TargetModel<f64>, estimand: &Estimand, arg: f64) -> Result<f64> {
    match estimand {
        Estimand::Cdf(_) => target.cdf(arg),
        Estimand::Quantile(_) => target.quantile(arg),
        Estimand::AbsMoment(_) => target_abs_moment(target, arg),
        Estimand::Ise | Estimand::Bandwidth => Ok(0.0),
    }
}

/// Half-width of a weight table covering every |x − X_j| a run can need.
fn table_half_width(target: &TargetModel<f64>, error: &ErrorModel<f64>, h: f64, args: &[f64]) -> f64 {
    let (lo, hi) = target.support();
    let sd = (target.variance().unwrap_or(1.0) + error.variance()).sqrt();
    let mean = target.mean().unwrap_or(0.0);
    let reach = (mean.abs() + 8.0 * sd).min(lo.abs().max(hi.abs()) + 8.0 * error.variance().sqrt());
    let arg = args.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    2.0 * reach + 10.0 * (h + 1.0) + arg
}

fn shared_fit_parts(cfg: &ExperimentConfig, h: f64) -> Result<(WeightContext<f64>, Arc<WeightTable<f64>>)> {
    let ctx = WeightContext::new(cfg.kernel, cfg.error, h, cfg.quadrature)?;
    let half = table_half_width(&cfg.target, &cfg.error, h, cfg.estimand.arguments());
    let table = Arc::new(WeightTable::build(&ctx, half)?);
    Ok((ctx, table))
}

fn evaluate_pointwise(fit: &DeconvFit<f64>, estimand: &Estimand) -> Vec<std::result::Result<f64, String>> {
    let spec = GridSpec { span: None, points: QUANTILE_GRID_POINTS };
    estimand
        .arguments()
        .iter()
        .map(|&a| {
            let r = match estimand {
                Estimand::Cdf(_) => Ok(fit.cdf_at(a)),
                Estimand::Quantile(_) => fit.quantile(a, &spec),
                Estimand::AbsMoment(_) => fit.abs_moment(a),
                Estimand::Ise | Estimand::Bandwidth => unreachable!("pointwise estimands only"),
            };
            r.map_err(|e| e.to_string())
        })
        .collect()
}

fn cells_from_runs(
    statistic: Statistic,
    h: Option<f64>,
    args: &[Option<f64>],
    truths: &[f64],
    per_run: &[Vec<std::result::Result<f64, String>>],
    keep: bool,
    cells: &mut Vec<McCell>,
    records: &mut Vec<RunRecord>,
) {
    for (k, (&arg, &truth)) in args.iter().zip(truths).enumerate() {
        let values: Vec<Option<f64>> = per_run.iter().map(|r| r[k].as_ref().ok().copied()).collect();
        cells.push(summarize_cell(statistic, h, arg, truth, &values));
        if keep {
            for (run, r) in per_run.iter().enumerate() {
                let (value, error) = match &r[k] {
                    Ok(v) => (Some(*v), None),
                    Err(e) => (None, Some(e.clone())),
                };
                records.push(RunRecord { run, statistic, h, arg, value, error });
            }
        }
    }
}

/// MSE of F̂(x | h), ξ̂_u or ν̂_q at every (h, argument) of the configuration.
pub fn run_mse_experiment(cfg: &ExperimentConfig) -> Result<McSummary> {
    cfg.validate()?;
    if !matches!(cfg.estimand, Estimand::Cdf(_) | Estimand::Quantile(_) | Estimand::AbsMoment(_)) {
        return Err(DeconvError::Invalid("use run_ise_experiment for ise and bandwidth estimands".into()));
    }
    let start = Instant::now();
    let args: Vec<Option<f64>> = cfg.estimand.arguments().iter().map(|&a| Some(a)).collect();
    let truths =
        cfg.estimand.arguments().iter().map(|&a| truth_of(&cfg.target, &cfg.estimand, a)).collect::<Result<Vec<_>>>()?;
    let statistic = cfg.estimand.statistic();
    let mut cells = Vec::new();
    let mut records = Vec::new();
    for &h in &cfg.h_grid {
        let (ctx, table) = shared_fit_parts(cfg, h)?;
        let per_run: Vec<Vec<std::result::Result<f64, String>>> = (0..cfg.runs)
            .into_par_iter()
            .map(|run| {
                let x = sample_run(&cfg.target, &cfg.error, cfg.n, cfg.seed, run);
                match DeconvFit::new(x, ctx.clone()).and_then(|f| f.with_table(table.clone())) {
                    Ok(fit) => evaluate_pointwise(&fit, &cfg.estimand),
                    Err(e) => vec![Err(e.to_string()); args.len()],
                }
            })
            .collect();
        cells_from_runs(statistic, Some(h), &args, &truths, &per_run, cfg.keep_runs, &mut cells, &mut records);
    }
    Ok(McSummary {
        seed: cfg.seed,
        runs: cfg.runs,
        n: cfg.n,
        cells,
        wall_time_secs: start.elapsed().as_secs_f64(),
        ise_points: None,
        records,
    })
}

/// ∫(F̂ − F_W)² over the fit's standard span by composite Simpson.
pub fn integrated_squared_error(fit: &DeconvFit<f64>, target: &TargetModel<f64>, points: usize) -> Result<f64> {
    if points < 3 || points.is_multiple_of(2) {
        return Err(DeconvError::Invalid("Simpson needs an odd number of at least 3 points".into()));
    }
    let grid = fit.grid(&GridSpec { span: None, points })?;
    let step = (grid[points - 1] - grid[0]) / (points - 1) as f64;
    let mut terms = Vec::with_capacity(points);
    for (i, &x) in grid.iter().enumerate() {
        let d = fit.cdf_at(x) - target.cdf(x)?;
        let w = if i == 0 || i == points - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        terms.push(w * d * d);
    }
    Ok(compensated_sum(terms) * step / 3.0)
}

/// The bandwidth minimizing the MISE expansion with the exact roughness of
/// the target, against which data-driven choices are scored.
pub fn oracle_bandwidth(cfg: &ExperimentConfig) -> Result<f64> {
    let plan = MisePlan::new(cfg.error, cfg.kernel, cfg.n, RoughnessSource::Exact(cfg.target.clone()))?;
    Ok(select_bandwidth(&plan)?.h_opt)
}

fn ise_run(cfg: &ExperimentConfig, run: usize) -> Vec<std::result::Result<f64, String>> {
    let x = sample_run(&cfg.target, &cfg.error, cfg.n, cfg.seed, run);
    let chosen = MisePlan::new(cfg.error, cfg.kernel, cfg.n, RoughnessSource::OneStep(x.clone()))
        .and_then(|plan| select_bandwidth(&plan))
        .map(|c| c.h_opt);
    let h = match chosen {
        Ok(h) => h,
        Err(e) => {
            let msg = e.to_string();
            return match cfg.estimand {
                Estimand::Ise => vec![Err(msg.clone()), Err(msg)],
                _ => vec![Err(msg)],
            };
        }
    };
    if cfg.estimand == Estimand::Bandwidth {
        return vec![Ok(h)];
    }
    let ise = (|| {
        let ctx = WeightContext::new(cfg.kernel, cfg.error, h, cfg.quadrature)?;
        let fit = DeconvFit::new(x, ctx.clone())?;
        let (lo, hi) = fit.standard_span();
        let data_lo = fit.data().iter().copied().fold(f64::INFINITY, f64::min);
        let data_hi = fit.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let half = (hi - data_lo).max(data_hi - lo);
        let fit = fit.with_table(Arc::new(WeightTable::build(&ctx, half)?))?;
        integrated_squared_error(&fit, &cfg.target, ISE_POINTS)
    })();
    vec![Ok(h), ise.map_err(|e| e.to_string())]
}

/// Per run: ĥ from the one-step plug-in rule and, for [`Estimand::Ise`],
/// the ISE of F̂(· | ĥ). The bandwidth cell is scored against
/// [`oracle_bandwidth`]; the ISE cell has truth 0, so its bias is the mean
/// ISE and its mse the mean squared ISE.
pub fn run_ise_experiment(cfg: &ExperimentConfig) -> Result<McSummary> {
    cfg.validate()?;
    if !matches!(cfg.estimand, Estimand::Ise | Estimand::Bandwidth) {
        return Err(DeconvError::Invalid("run_ise_experiment needs the ise or bandwidth estimand".into()));
    }
    let start = Instant::now();
    let h_star = oracle_bandwidth(cfg)?;
    let per_run: Vec<Vec<std::result::Result<f64, String>>> =
        (0..cfg.runs).into_par_iter().map(|run| ise_run(cfg, run)).collect();
    let mut cells = Vec::new();
    let mut records = Vec::new();
    let (stats, truths) = match cfg.estimand {
        Estimand::Ise => (vec![Statistic::Bandwidth, Statistic::Ise], vec![h_star, 0.0]),
        _ => (vec![Statistic::Bandwidth], vec![h_star]),
    };
    for (k, (&stat, &truth)) in stats.iter().zip(&truths).enumerate() {
        let column: Vec<Vec<std::result::Result<f64, String>>> = per_run.iter().map(|r| vec![r[k].clone()]).collect();
        cells_from_runs(stat, None, &[None], &[truth], &column, cfg.keep_runs, &mut cells, &mut records);
    }
    Ok(McSummary {
        seed: cfg.seed,
        runs: cfg.runs,
        n: cfg.n,
        cells,
        wall_time_secs: start.elapsed().as_secs_f64(),
        ise_points: (cfg.estimand == Estimand::Ise).then_some(ISE_POINTS),
        records,
    })
}

/// Where the rate study evaluates F̂.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateMode {
    /// x = 0 with h = h₁(n).
    Origin,
    /// x = x₀ ≠ 0 with h = h₃(n).
    Offset(f64),
}

#[derive(Clone, Debug)]
pub struct RateStudy {
    pub target: TargetModel<f64>,
    pub error: ErrorModel<f64>,
    pub kernel: Kernel,
    /// Tail exponent of f_W^Ft.
    pub beta: f64,
    pub ns: Vec<usize>,
    pub mode: RateMode,
    pub runs: usize,
    pub seed: u64,
    /// Constant in front of the bandwidth orders.
    pub scale: f64,
    pub quadrature: QuadratureSpec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub n: usize,
    pub h: f64,
    pub x: f64,
    pub mse: f64,
    pub mc_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeReport {
    pub points: Vec<RatePoint>,
    /// Least-squares slope of log MSE on log n.
    pub slope: f64,
    /// Standard error from the regression residuals.
    pub slope_se: f64,
    /// Standard error implied by the Monte Carlo error of each log MSE.
    pub mc_slope_se: f64,
}

pub fn run_rate_study(study: &RateStudy) -> Result<SlopeReport> {
    let alpha = study.error.tail_exponent();
    if !(alpha > 0.5) {
        return Err(DeconvError::NoAsymptote { alpha });
    }
    if study.ns.len() < 3 {
        return Err(DeconvError::Invalid("a slope needs at least three sample sizes".into()));
    }
    let x = match study.mode {
        RateMode::Origin => 0.0,
        RateMode::Offset(x0) if x0 != 0.0 && x0.is_finite() => x0,
        RateMode::Offset(x0) => return Err(DeconvError::Domain(format!("offset {x0} must be finite and nonzero"))),
    };
    let mut points = Vec::with_capacity(study.ns.len());
    for (i, &n) in study.ns.iter().enumerate() {
        let bundle = rates(alpha, study.beta, n as f64, study.scale, None)?;
        let h = match study.mode {
            RateMode::Origin => bundle.h1,
            RateMode::Offset(_) => bundle.h3,
        };
        let cfg = ExperimentConfig {
            target: study.target.clone(),
            error: study.error,
            n,
            h_grid: vec![h],
            estimand: Estimand::Cdf(vec![x]),
            runs: study.runs,
            seed: study.seed.wrapping_add(i as u64),
            kernel: study.kernel,
            quadrature: study.quadrature,
            keep_runs: false,
        };
        let cell = run_mse_experiment(&cfg)?.cells.remove(0);
        points.push(RatePoint { n, h, x, mse: cell.mse, mc_se: cell.mc_se });
    }
    let lx: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.mse.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx;
    let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let slope_se = (rss / (k - 2.0) / sxx).sqrt();
    let mc_var: f64 = lx.iter().zip(&points).map(|(a, p)| ((a - mx) / sxx).powi(2) * (p.mc_se / p.mse).powi(2)).sum();
    Ok(SlopeReport { points, slope, slope_se, mc_slope_se: mc_var.sqrt() })
}

/// CSV of a summary. Pointwise estimands use the header
/// `h,<arg>,bias,variance,mse,mc_se`; ISE and bandwidth studies use
/// `statistic,truth,mean,bias,variance,mse,mc_se`.
pub fn write_csv<W: Write>(summary: &McSummary, estimand: &Estimand, out: &mut W) -> io::Result<()> {
    match estimand {
        Estimand::Ise | Estimand::Bandwidth => {
            writeln!(out, "statistic,truth,mean,bias,variance,mse,mc_se")?;
            for c in &summary.cells {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    c.statistic.name(),
                    c.truth,
                    c.mean,
                    c.bias,
                    c.variance,
                    c.mse,
                    c.mc_se
                )?;
            }
        }
        _ => {
            writeln!(out, "h,{},bias,variance,mse,mc_se", estimand.argument_name())?;
            for c in &summary.cells {
                let h = c.h.unwrap_or(f64::NAN);
                let a = c.arg.unwrap_or(f64::NAN);
                writeln!(out, "{h},{a},{},{},{},{}", c.bias, c.variance, c.mse, c.mc_se)?;
            }
        }
    }
    Ok(())
}
