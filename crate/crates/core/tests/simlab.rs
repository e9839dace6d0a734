use deconv::distributions::{ErrorModel, TargetModel};
use deconv::estimators::{expected_cdf, DeconvFit, GridSpec};
use deconv::kernels::Kernel;
use deconv::real::compensated_sum;
use deconv::simlab::*;
use deconv::transforms::{QuadratureSpec, WeightContext};
use proptest::prelude::*;
use rand::Rng;

fn cdf_config(alpha: f64, runs: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        TargetModel::StdNormal,
        ErrorModel::SymGamma { alpha },
        100,
        Estimand::Cdf(vec![-0.8, 0.0, 1.5]),
        seed,
    );
    cfg.runs = runs;
    cfg.h_grid = vec![0.4, 0.8, 1.2];
    cfg
}

#[test]
fn streams_are_keyed_by_seed_run_and_role() {
    let draw = |seed, run, role| -> Vec<u64> {
        let mut r = run_stream(seed, run, role);
        (0..4).map(|_| r.gen()).collect()
    };
    assert_eq!(draw(5, 3, Role::Target), draw(5, 3, Role::Target));
    assert_ne!(draw(5, 3, Role::Target), draw(5, 3, Role::Error));
    assert_ne!(draw(5, 3, Role::Target), draw(5, 4, Role::Target));
    assert_ne!(draw(5, 3, Role::Target), draw(6, 3, Role::Target));
    let x = sample_run(&TargetModel::StdNormal, &ErrorModel::SymGamma { alpha: 2.0 }, 50, 9, 2);
    assert_eq!(x, sample_run(&TargetModel::StdNormal, &ErrorModel::SymGamma { alpha: 2.0 }, 50, 9, 2));
}

#[test]
fn hand_summary() {
    let c = summarize_cell(Statistic::Cdf, Some(0.5), Some(1.0), 1.0, &[Some(1.0), Some(2.0), None, Some(3.0)]);
    assert_eq!((c.successes, c.failures), (3, 1));
    assert_eq!(c.mean, 2.0);
    assert_eq!(c.bias, 1.0);
    assert!((c.variance - 2.0 / 3.0).abs() < 1e-15);
    assert!((c.mse - 5.0 / 3.0).abs() < 1e-15);
    // squared errors {0, 1, 4}: sample variance 13/3 over 3
    assert!((c.mc_se - (13.0f64 / 9.0).sqrt()).abs() < 1e-15);
    let empty = summarize_cell(Statistic::Cdf, None, None, 0.0, &[None, None]);
    assert!(empty.mse.is_nan() && empty.failures == 2);
}

#[test]
fn same_seed_same_summary_regardless_of_workers() {
    let cfg = cdf_config(2.0, 60, 7);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_mse_experiment(&cfg).unwrap());
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run_mse_experiment(&cfg).unwrap());
    assert_eq!(one.cells, four.cells);
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_csv(&one, &cfg.estimand, &mut a).unwrap();
    write_csv(&four, &cfg.estimand, &mut b).unwrap();
    assert_eq!(a, b);
    let other = run_mse_experiment(&cdf_config(2.0, 60, 8)).unwrap();
    assert_ne!(one.cells, other.cells);
}

#[test]
fn decomposition_and_offline_recomputation() {
    let mut cfg = cdf_config(2.0, 80, 11);
    cfg.keep_runs = true;
    let s = run_mse_experiment(&cfg).unwrap();
    assert_eq!(s.records.len(), 80 * 9);
    for c in &s.cells {
        let sum = c.bias * c.bias + c.variance;
        assert!((c.mse - sum).abs() <= 1e-12 * c.mse, "{c:?}");
        let sq: Vec<f64> = s
            .records
            .iter()
            .filter(|r| r.h == c.h && r.arg == c.arg)
            .map(|r| (r.value.unwrap() - c.truth).powi(2))
            .collect();
        assert_eq!(sq.len(), 80);
        assert_eq!(compensated_sum(sq.iter().copied()) / 80.0, c.mse);
    }
    // the records are the estimator's own output
    let x = sample_run(&cfg.target, &cfg.error, cfg.n, cfg.seed, 17);
    let ctx = WeightContext::new(cfg.kernel, cfg.error, 0.8, QuadratureSpec::default()).unwrap();
    let direct = DeconvFit::new(x, ctx).unwrap().cdf_at(1.5);
    let rec = s.records.iter().find(|r| r.run == 17 && r.h == Some(0.8) && r.arg == Some(1.5)).unwrap();
    assert!((rec.value.unwrap() - direct).abs() < 1e-9);
}

#[test]
fn mean_matches_the_expected_estimator() {
    // E F̂(x | h) = ∫ F_W(x − hy) K(y) dy does not involve the error law
    let cfg = cdf_config(2.0, 1000, 3);
    let s = run_mse_experiment(&cfg).unwrap();
    for c in &s.cells {
        let want = expected_cdf(&cfg.target, cfg.kernel, c.h.unwrap(), c.arg.unwrap()).unwrap();
        let se = (c.variance / 1000.0).sqrt();
        assert!((c.mean - want).abs() < 4.0 * se, "{c:?} vs {want}");
    }
}

#[test]
fn failures_are_counted_per_cell() {
    // q = 3.5 lies beyond the integrability limit of kernel (4,2)
    let mut cfg = ExperimentConfig::new(
        TargetModel::StdNormal,
        ErrorModel::SymGamma { alpha: 2.0 },
        50,
        Estimand::AbsMoment(vec![1.0, 3.5]),
        1,
    );
    cfg.runs = 5;
    cfg.h_grid = vec![0.6];
    cfg.keep_runs = true;
    let s = run_mse_experiment(&cfg).unwrap();
    let good = s.cell(Statistic::AbsMoment, Some(0.6), Some(1.0)).unwrap();
    let bad = s.cell(Statistic::AbsMoment, Some(0.6), Some(3.5)).unwrap();
    assert_eq!((good.successes, good.failures), (5, 0));
    assert_eq!((bad.successes, bad.failures), (0, 5));
    assert!(s.records.iter().filter(|r| r.arg == Some(3.5)).all(|r| r.error.is_some()));
    // E|W| for N(0, 1)
    assert!((good.truth - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
}

#[test]
fn invalid_configurations() {
    let mut cfg = cdf_config(2.0, 10, 1);
    cfg.h_grid = vec![0.4, 0.2];
    assert!(run_mse_experiment(&cfg).is_err());
    cfg.h_grid = vec![0.0, 0.2];
    assert!(run_mse_experiment(&cfg).is_err());
    let mut cfg = cdf_config(2.0, 0, 1);
    assert!(run_mse_experiment(&cfg).is_err());
    cfg.runs = 3;
    cfg.estimand = Estimand::Quantile(vec![0.5, 1.0]);
    assert!(run_mse_experiment(&cfg).is_err());
    cfg.estimand = Estimand::Ise;
    assert!(run_mse_experiment(&cfg).is_err());
    cfg.estimand = Estimand::Cdf(vec![0.0]);
    assert!(run_ise_experiment(&cfg).is_err());
}

#[test]
fn mc_error_scales_with_runs() {
    let s1 = run_mse_experiment(&cdf_config(2.0, 1000, 5)).unwrap();
    let s2 = run_mse_experiment(&cdf_config(2.0, 2000, 5)).unwrap();
    let ratios: Vec<f64> = s1.cells.iter().zip(&s2.cells).map(|(a, b)| (a.mc_se / b.mc_se).powi(2)).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean / 2.0 - 1.0).abs() < 0.2, "{ratios:?}");
}

#[test]
fn larger_samples_reduce_mse_at_the_origin() {
    let mut small = cdf_config(2.0, 200, 21);
    small.estimand = Estimand::Cdf(vec![0.0]);
    small.h_grid = default_h_grid();
    let mut large = small.clone();
    large.n = 800;
    let a = run_mse_experiment(&small).unwrap();
    let b = run_mse_experiment(&large).unwrap();
    for (c100, c800) in a.cells.iter().zip(&b.cells) {
        assert!(c800.mse < c100.mse, "h={:?}", c100.h);
    }
}

#[test]
fn ise_runs_are_nonnegative() {
    let mut cfg = ExperimentConfig::new(TargetModel::StdNormal, ErrorModel::SymGamma { alpha: 1.0 }, 100, Estimand::Ise, 4);
    cfg.runs = 6;
    cfg.keep_runs = true;
    let s = run_ise_experiment(&cfg).unwrap();
    assert_eq!(s.ise_points, Some(ISE_POINTS));
    let ise: Vec<f64> = s.records.iter().filter(|r| r.statistic == Statistic::Ise).map(|r| r.value.unwrap()).collect();
    assert_eq!(ise.len(), 6);
    assert!(ise.iter().all(|&v| v >= 0.0));
    let bw = s.cell(Statistic::Bandwidth, None, None).unwrap();
    assert_eq!(bw.truth, oracle_bandwidth(&cfg).unwrap());
    assert!((bw.truth - 0.18).abs() < 0.02);
    let mut out = Vec::new();
    write_csv(&s, &cfg.estimand, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("statistic,truth,mean,bias,variance,mse,mc_se\nbandwidth,"));
}

#[test]
fn simpson_ise_against_a_fine_trapezoid() {
    let x = sample_run(&TargetModel::Gamma2, &ErrorModel::SymGamma { alpha: 1.0 }, 60, 2, 0);
    let ctx = WeightContext::new(Kernel::BANDWIDTH, ErrorModel::SymGamma { alpha: 1.0 }, 0.3, QuadratureSpec::default()).unwrap();
    let fit = DeconvFit::new(x, ctx).unwrap();
    let got = integrated_squared_error(&fit, &TargetModel::Gamma2, ISE_POINTS).unwrap();
    let grid = fit.grid(&GridSpec { span: None, points: 40_001 }).unwrap();
    let step = grid[1] - grid[0];
    let sq: Vec<f64> = grid.iter().map(|&v| (fit.cdf_at(v) - TargetModel::Gamma2.cdf(v).unwrap()).powi(2)).collect();
    let trap = (compensated_sum(sq.iter().copied()) - 0.5 * (sq[0] + sq[sq.len() - 1])) * step;
    assert!((got - trap).abs() < 1e-3 * trap, "{got} vs {trap}");
    assert!(integrated_squared_error(&fit, &TargetModel::Gamma2, 2048).is_err());
}

#[test]
fn pointwise_csv_header() {
    let cfg = cdf_config(2.0, 4, 1);
    let s = run_mse_experiment(&cfg).unwrap();
    let mut out = Vec::new();
    write_csv(&s, &cfg.estimand, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h,x,bias,variance,mse,mc_se");
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("0.4,-0.8,"));
}

fn rate_study(mode: RateMode, alpha: f64) -> RateStudy {
    RateStudy {
        target: TargetModel::exponential(1.0),
        error: ErrorModel::SymGamma { alpha },
        kernel: Kernel::ESTIMATION,
        beta: 1.0,
        ns: vec![200, 400, 800],
        mode,
        runs: 60,
        seed: 11,
        scale: 1.0,
        quadrature: QuadratureSpec::default(),
    }
}

#[test]
fn rate_study_points_and_slope() {
    let report = run_rate_study(&rate_study(RateMode::Offset(1.5), 2.0)).unwrap();
    for (i, p) in report.points.iter().enumerate() {
        // h₃ = n^{-1/(2α+2β+1)} with α = 2, β = 1
        assert!((p.h - (p.n as f64).powf(-1.0 / 7.0)).abs() < 1e-15);
        let mut cfg = ExperimentConfig::new(
            TargetModel::exponential(1.0),
            ErrorModel::SymGamma { alpha: 2.0 },
            p.n,
            Estimand::Cdf(vec![1.5]),
            11 + i as u64,
        );
        cfg.runs = 60;
        cfg.h_grid = vec![p.h];
        assert_eq!(run_mse_experiment(&cfg).unwrap().cells[0].mse, p.mse);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = report.points.iter().map(|p| ((p.n as f64).ln(), p.mse.ln())).unzip();
    let slope = (y[2] - y[0]) / (x[2] - x[0]);
    // equal log spacing makes least squares reduce to the end-point slope
    assert!((report.slope - slope).abs() < 1e-12, "{} {slope}", report.slope);
    assert!(report.slope_se >= 0.0 && report.mc_slope_se > 0.0);
}

#[test]
fn rate_study_rejects_bad_setups() {
    assert!(matches!(
        run_rate_study(&rate_study(RateMode::Origin, 0.4)),
        Err(deconv::DeconvError::NoAsymptote { .. })
    ));
    assert!(matches!(run_rate_study(&rate_study(RateMode::Offset(0.0), 2.0)), Err(deconv::DeconvError::Domain(_))));
    let mut short = rate_study(RateMode::Origin, 2.0);
    short.ns.truncate(2);
    assert!(matches!(run_rate_study(&short), Err(deconv::DeconvError::Invalid(_))));
}

proptest! {
    #[test]
    fn decomposition_identity(values in prop::collection::vec(prop::option::weighted(0.9, -5.0f64..5.0), 2..60), truth in -3.0f64..3.0) {
        prop_assume!(values.iter().filter(|v| v.is_some()).count() >= 1);
        let c = summarize_cell(Statistic::Quantile, None, None, truth, &values);
        prop_assert!((c.mse - (c.bias * c.bias + c.variance)).abs() <= 1e-12 * c.mse.max(1e-300));
        prop_assert_eq!(c.successes + c.failures, values.len());
    }

    #[test]
    fn summary_ignores_run_order(mut values in prop::collection::vec(-5.0f64..5.0, 2..60), seed in any::<u64>()) {
        let a = summarize_cell(Statistic::Cdf, None, None, 0.3, &values.iter().map(|&v| Some(v)).collect::<Vec<_>>());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        values.shuffle(&mut rng);
        let b = summarize_cell(Statistic::Cdf, None, None, 0.3, &values.iter().map(|&v| Some(v)).collect::<Vec<_>>());
        prop_assert!((a.mse - b.mse).abs() <= 1e-12 * a.mse.max(1e-300));
        prop_assert!((a.mean - b.mean).abs() <= 1e-12 * a.mean.abs().max(1.0));
    }
}
