use deconv::bandwidth::{
    a_delta, bias_constant, estimate_sigma_w, kernel_tail_kappa, mise, mise_i, normal_reference_roughness,
    one_step_roughness, select_bandwidth, HSearch, MisePlan, RoughnessSource,
};
use deconv::distributions::{ErrorModel, TargetModel};
use deconv::kernels::Kernel;
use deconv::DeconvError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn sym_gamma(alpha: f64) -> ErrorModel<f64> {
    ErrorModel::SymGamma { alpha }
}

fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = 0.5 * (f(a) + f(b));
    for i in 1..n {
        acc += f(a + h * i as f64);
    }
    acc * h
}

#[test]
fn no_error_mise_is_linear_in_h() {
    let k = Kernel::BANDWIDTH;
    for &h in &[0.05, 0.3, 1.0] {
        let a: f64 = mise_i(&ErrorModel::NoError, k, h).unwrap();
        let b = mise_i(&ErrorModel::NoError, k, 2.0 * h).unwrap();
        assert!((b / a - 2.0).abs() < 1e-4, "h={h}");
    }
    // c = (1/π)∫₀^∞ v⁻²(1 − K^Ft(v))² dv with (1 − (1 − v²)²)²/v² = v²(2 − v²)² on [0, 1]
    let c = (4.0 / 3.0 - 4.0 / 5.0 + 1.0 / 7.0 + 1.0) / PI;
    assert!((mise_i(&ErrorModel::NoError, k, 0.4).unwrap() - 0.4 * c).abs() < 1e-12);
}

#[test]
fn zero_bandwidth_mise_against_dense_quadrature() {
    let e = sym_gamma(0.4);
    let got = mise_i(&e, Kernel::BANDWIDTH, 0.0).unwrap();
    // substitute t = e^s; the integrand e^{-s}(1 − (1+e^{2s})^{0.2})² decays
    // like e^{-0.2 s}, so the range [−40, 400] leaves a tail below 1e-30
    let oracle = trapezoid(
        |s: f64| {
            // ln(1 + e^{2s}) without overflow
            let l = if s > 0.0 { 2.0 * s + (-2.0 * s).exp().ln_1p() } else { (2.0 * s).exp().ln_1p() };
            let d = 1.0 - (0.2 * l).exp();
            d * d * (-s).exp()
        },
        -40.0,
        400.0,
        2_000_000,
    ) / PI;
    assert!((got - oracle).abs() < 1e-4, "{got} vs {oracle}");
    assert!(matches!(mise_i(&sym_gamma(2.0), Kernel::BANDWIDTH, 0.0), Err(DeconvError::DivergentIntegral(_))));
}

#[test]
fn mise_matches_its_asymptote() {
    let e = sym_gamma(2.0);
    let k = Kernel::BANDWIDTH;
    let h = 1e-2;
    let ratio = mise_i(&e, k, h).unwrap() / (a_delta(&e, k).unwrap() * h.powf(1.0 - 4.0));
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn a_delta_scaling() {
    let k = Kernel::BANDWIDTH;
    // linear in κ
    let alpha = 2.0;
    let ratio = a_delta(&sym_gamma(alpha), k).unwrap() / kernel_tail_kappa(k, alpha);
    assert!((ratio - 1.0 / PI).abs() < 1e-15);
    let k3 = Kernel::new(2, 3).unwrap();
    let ratio3 = a_delta(&sym_gamma(alpha), k3).unwrap() / kernel_tail_kappa(k3, alpha);
    assert!((ratio3 - ratio).abs() < 1e-15);
    // Laplace: C = b⁻², so A ∝ b⁴
    let a1 = a_delta(&ErrorModel::Laplace { scale: 1.0 }, k).unwrap();
    let a2: f64 = a_delta(&ErrorModel::Laplace { scale: 2.0 }, k).unwrap();
    assert!((a2 / a1 - 16.0).abs() < 1e-12);
    assert!(matches!(a_delta(&sym_gamma(0.4), k), Err(DeconvError::NoAsymptote { .. })));
}

#[test]
fn sigma_w_estimates() {
    let data = [1.0, 2.0, 4.0, 7.0];
    let mean = 3.5;
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 3.0;
    assert!((estimate_sigma_w(&data, &ErrorModel::NoError).unwrap() - var).abs() < 1e-14);
    // sample variance 3: {0, 3} has variance 4.5, so scale to get 3
    let s = (3.0f64 / 4.5).sqrt();
    let data = [0.0, 3.0 * s];
    assert!((estimate_sigma_w(&data, &sym_gamma(2.0)).unwrap() - 1.0).abs() < 1e-12);
    assert!(matches!(estimate_sigma_w(&[1.0; 5], &sym_gamma(2.0)), Err(DeconvError::NoiseDominates(_))));
}

#[test]
fn plan_rejects_vanishing_kappa2() {
    let r = MisePlan::new(sym_gamma(1.0), Kernel::ESTIMATION, 100, RoughnessSource::Value(1.0));
    assert!(r.is_err());
}

#[test]
fn table_one_alpha_one_column() {
    let cases = [
        (TargetModel::StdNormal, 100, 0.18),
        (TargetModel::StdNormal, 800, 0.12),
        (TargetModel::NormalMixture, 100, 0.21),
        (TargetModel::NormalMixture, 800, 0.14),
        (TargetModel::Gamma2, 100, 0.17),
        (TargetModel::Gamma2, 800, 0.11),
    ];
    for (target, n, want) in cases {
        let plan = MisePlan::new(sym_gamma(1.0), Kernel::BANDWIDTH, n, RoughnessSource::Exact(target.clone())).unwrap();
        let h = select_bandwidth(&plan).unwrap().h_opt;
        assert!((h - want).abs() <= 0.02, "{target} n={n}: {h}");
    }
}

#[test]
fn reported_minimum_is_consistent() {
    let plan = MisePlan::new(sym_gamma(2.0), Kernel::BANDWIDTH, 250, RoughnessSource::Exact(TargetModel::NormalMixture)).unwrap();
    let c = select_bandwidth(&plan).unwrap();
    let b = bias_constant(Kernel::BANDWIDTH, TargetModel::<f64>::NormalMixture.roughness().unwrap());
    let again = mise(&sym_gamma(2.0), Kernel::BANDWIDTH, 250, b, c.h_opt).unwrap();
    assert!((again - c.mise_min).abs() <= 1e-10 * again);
    for &(h, m) in &c.curve {
        assert!(m >= c.mise_min * (1.0 - 1e-12), "h={h}");
    }
    assert!(c.asymptotic.is_some());
}

#[test]
fn h_opt_decreases_with_n() {
    for target in [TargetModel::StdNormal, TargetModel::NormalMixture, TargetModel::Gamma2] {
        for alpha in [1.0, 5.0] {
            let h = |n| {
                let plan = MisePlan::new(sym_gamma(alpha), Kernel::BANDWIDTH, n, RoughnessSource::Exact(target.clone())).unwrap();
                select_bandwidth(&plan).unwrap().h_opt
            };
            assert!(h(800) < h(100), "{target} alpha={alpha}");
        }
    }
}

#[test]
fn smoother_error_costs_more_variance() {
    // with kernel (2,2) the order flips for h ≥ 0.85, where g(t) stays near 1
    // over most of [0, 1/h] when α = 6
    for i in 1..=10 {
        let h = 0.1 * i as f64;
        let rough = mise_i(&sym_gamma(2.0), Kernel::ESTIMATION, h).unwrap();
        let smooth = mise_i(&sym_gamma(6.0), Kernel::ESTIMATION, h).unwrap();
        assert!(smooth >= rough, "h={h}");
    }
}

#[test]
fn h_opt_follows_the_balance_rate() {
    let alpha = 2.0;
    let search = HSearch { h_min: 1e-3, h_max: 3.0, resolution: 80, tolerance: 1e-6 };
    let ns: [f64; 4] = [1e2, 1e3, 1e4, 1e5];
    let logs: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let plan = MisePlan::with_search(
                sym_gamma(alpha),
                Kernel::BANDWIDTH,
                n as usize,
                RoughnessSource::Exact(TargetModel::StdNormal),
                search,
            )
            .unwrap();
            (n.ln(), select_bandwidth(&plan).unwrap().h_opt.ln())
        })
        .collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / 4.0;
    let slope = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / logs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let want = -1.0 / (2.0 * alpha + 3.0);
    assert!((slope - want).abs() < 0.03, "{slope} vs {want}");
}

#[test]
fn one_step_roughness_without_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let data: Vec<f64> = TargetModel::StdNormal.sample(10_000, &mut rng);
    let r = one_step_roughness(&data, &ErrorModel::NoError, Kernel::BANDWIDTH).unwrap();
    let sigma = estimate_sigma_w(&data, &ErrorModel::NoError).unwrap().sqrt();
    let reference = normal_reference_roughness(sigma);
    assert!((r / reference - 1.0).abs() < 0.15, "{r} vs {reference}");
    let again = one_step_roughness(&data, &ErrorModel::NoError, Kernel::BANDWIDTH).unwrap();
    assert_eq!(r, again);
}

#[test]
fn one_step_roughness_is_nonnegative() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = sym_gamma(5.0);
        let w: Vec<f64> = TargetModel::NormalMixture.sample(100, &mut rng);
        let d = e.sample(100, &mut rng);
        let x: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a + b).collect();
        match one_step_roughness(&x, &e, Kernel::BANDWIDTH) {
            Ok(r) => assert!(r >= 0.0),
            Err(err) => assert!(matches!(err, DeconvError::NoiseDominates(_))),
        }
    }
}
