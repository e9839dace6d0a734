use deconv::asymptotics::{
    bias_b1, bias_b2, fx_density, origin_bias_constant, rates, variance_constant, variance_v, TailProfile,
};
use deconv::distributions::{ErrorModel, TargetModel};
use deconv::estimators::expected_cdf;
use deconv::kernels::Kernel;
use deconv::quad::{integrate_with_breaks, Tolerance};
use deconv::transforms::{QuadratureSpec, WeightContext, WeightTable};
use deconv::DeconvError;
use proptest::prelude::*;
use std::f64::consts::PI;

fn profile(alpha: f64, z: f64, beta: f64, a: f64, b: f64) -> TailProfile<f64> {
    TailProfile::new(alpha, z, beta, a, b).unwrap()
}

#[test]
fn rates_below_one_half() {
    let n = 1000.0;
    let r = rates(0.3, 1.0, n, 1.0, None).unwrap();
    assert_eq!((r.rho1, r.rho2, r.rho3), (1.0 / n, 1.0 / n, 1.0 / n));
    assert_eq!((r.h1, r.h2, r.h3), (0.0, 0.0, 0.0));
    assert!(r.rho4.is_none());
}

#[test]
fn rates_closed_forms() {
    let n: f64 = 1e6;
    let r = rates(1.0, 1.0, n, 1.0, None).unwrap();
    assert!((r.rho1 - 1e-4).abs() < 1e-16);
    // with ℓ = 1, ρ₁ = n^{−2β/(2α+2β−1)}
    for &(alpha, beta) in &[(0.8, 0.5), (2.0, 1.0), (6.0, 3.0)] {
        let r = rates(alpha, beta, 5000.0, 1.0, Some(1.5)).unwrap();
        assert_eq!(r.ell, 1.0);
        let want = 5000f64.powf(-2.0 * beta / (2.0 * alpha + 2.0 * beta - 1.0));
        assert!((r.rho1 - want).abs() <= 1e-14 * want);
        let rho4 = 5000f64.powf(-(2.0 * beta + 3.0) / (2.0 * alpha + 2.0 * beta - 1.0));
        assert!((r.rho4.unwrap() - rho4).abs() <= 1e-14 * rho4);
    }
    let half = rates(0.5, 1.0, 1000.0, 2.0, None).unwrap();
    assert_eq!(half.ell, 1000f64.ln());
    let base = 1000f64.ln() / 1000.0;
    assert!((half.rho1 - base).abs() < 1e-15);
    assert!((half.h1 - 2.0 * base.powf(0.5)).abs() < 1e-14);
}

#[test]
fn rate_ordering_on_a_grid() {
    for &alpha in &[0.6, 2.0, 6.0] {
        for &beta in &[0.0, 1.0, 3.0] {
            for &n in &[100.0, 1e4, 1e7] {
                let r = rates(alpha, beta, n, 1.0, None).unwrap();
                assert!(r.rho3 < r.rho2 && r.rho2 < r.rho1, "alpha={alpha} beta={beta} n={n}");
            }
        }
    }
}

#[test]
fn b1_examples() {
    let k = Kernel::ESTIMATION;
    assert_eq!(bias_b1(k, &profile(2.0, 1.0, 1.0, 0.3, 0.0)).unwrap(), 0.0);
    let one = bias_b1(k, &profile(2.0, 1.0, 1.0, 0.0, 1.0)).unwrap();
    assert!((one - 11.0 / (42.0 * PI)).abs() < 1e-15);
    assert!((one - 0.08336).abs() < 1e-5);
    let two = bias_b1(k, &profile(2.0, 1.0, 1.0, 0.0, 2.0)).unwrap();
    assert!((two - 2.0 * one).abs() < 1e-15);
    assert!(matches!(bias_b1(k, &profile(2.0, 1.0, 4.0, 0.0, 1.0)), Err(DeconvError::Pole { j: 1 })));
}

#[test]
fn origin_bias_constant_matches_the_numeric_limit() {
    // Exp(1) target: f_W^Ft(t) = 1/(1 − it) ≈ i/t, so a = 0, b = 1, β = 1
    let target = TargetModel::exponential(1.0);
    let k = Kernel::ESTIMATION;
    let c = origin_bias_constant(k, &profile(2.0, 1.0, 1.0, 0.0, 1.0)).unwrap();
    assert!((c - 0.48504).abs() < 1e-5);
    let ratios: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&h| expected_cdf(&target, k, h, 0.0).unwrap() / h)
        .collect();
    assert!((ratios[2] - c).abs() < 0.01 * c, "{ratios:?} vs {c}");
}

#[test]
fn b2_examples() {
    let p0 = profile(2.0, 1.0, 1.0, 0.0, 0.0);
    assert_eq!(bias_b2(0.3, 1.0, &p0).unwrap(), 0.0);
    let p = profile(2.0, 1.0, 1.0, 1.0, 0.0);
    let h = 0.2;
    assert!(bias_b2(h, h * PI / 2.0, &p).unwrap().abs() < 1e-15);
    for &x in &[0.3, 1.7, 4.2] {
        assert_eq!(bias_b2(h, -x, &p).unwrap(), -bias_b2(h, x, &p).unwrap());
    }
    assert!(matches!(bias_b2(h, 0.0, &p), Err(DeconvError::Domain(_))));
}

#[test]
fn variance_constant_scaling() {
    let k = Kernel::ESTIMATION;
    assert_eq!(variance_v(1.5, &profile(2.0, 1.0, 1.0, 0.0, 0.0), k, 0.0).unwrap(), 0.0);
    let v1 = variance_v(1.5, &profile(2.0, 1.0, 1.0, 0.0, 0.0), k, 0.3).unwrap();
    let v2 = variance_v(1.5, &profile(2.0, 2.0, 1.0, 0.0, 0.0), k, 0.3).unwrap();
    assert!((v2 / v1 - 4.0).abs() < 1e-12);
    assert!(matches!(variance_v(1.5, &profile(0.4, 1.0, 1.0, 0.0, 0.0), k, 0.3), Err(DeconvError::NoAsymptote { .. })));
}

#[test]
fn variance_constant_against_double_trapezoid() {
    let k = Kernel::ESTIMATION;
    let v = variance_v(0.0, &profile(2.0, 1.0, 1.0, 0.0, 0.0), k, 1.0).unwrap();
    // J(u) = ∫₀¹ sin(tu) t (1 − t⁴)² dt decays like u⁻³, so [0, 200] suffices
    let nt = 10_000;
    let nu = 10_000;
    let ts: Vec<f64> = (0..=nt).map(|i| i as f64 / nt as f64).collect();
    let amp: Vec<f64> = ts.iter().map(|&t| t * k.kft(t)).collect();
    let du = 200.0 / nu as f64;
    let mut outer = 0.0;
    for i in 0..=nu {
        let u = du * i as f64;
        let mut j = 0.0;
        for (m, (&t, &a)) in ts.iter().zip(&amp).enumerate() {
            let w = if m == 0 || m == nt { 0.5 } else { 1.0 };
            j += w * (t * u).sin() * a;
        }
        j /= nt as f64;
        let w = if i == 0 || i == nu { 0.5 } else { 1.0 };
        outer += w * j * j;
    }
    let oracle = outer * du / (PI * PI);
    assert!((v / oracle - 1.0).abs() < 0.01, "{v} vs {oracle}");
}

#[test]
fn variance_constant_matches_the_exact_small_h_variance() {
    // var L₁(x − X | h) by quadrature against a tabulated f_X, model (1) with
    // SymGamma(2); the scaled variance must approach the constant as h ↓ 0
    let e: ErrorModel<f64> = ErrorModel::SymGamma { alpha: 2.0 };
    let k = Kernel::ESTIMATION;
    let x = 1.5;
    let (lo, step, m) = (-14.0, 0.002, 14_000);
    let fx: Vec<f64> = (0..=m).map(|i| fx_density(&TargetModel::StdNormal, &e, lo + step * i as f64).unwrap()).collect();
    let profile = TailProfile::from_error(&e, 1.0, 0.0, 0.0).unwrap();
    let c = variance_constant(x, &profile, k, fx_density(&TargetModel::StdNormal, &e, x).unwrap()).unwrap();
    let scaled = |h: f64| {
        let ctx = WeightContext::new(k, e, h, QuadratureSpec::default()).unwrap();
        let table = WeightTable::build(&ctx, 16.0).unwrap();
        let (mut m1, mut m2) = (0.0, 0.0);
        for (i, f) in fx.iter().enumerate() {
            let w = if i == 0 || i == m { 0.5 } else { 1.0 } * step * f;
            let l = table.eval(x - (lo + step * i as f64));
            m1 += w * l;
            m2 += w * l * l;
        }
        (m2 - m1 * m1) * h.powi(3) / c
    };
    let coarse = scaled(0.1);
    let fine = scaled(0.025);
    assert!((fine - 1.0).abs() < 0.02, "{fine}");
    assert!((fine - 1.0).abs() < (coarse - 1.0).abs());
}

#[test]
fn convolved_density() {
    let x = 0.7;
    assert_eq!(fx_density(&TargetModel::StdNormal, &ErrorModel::NoError, x).unwrap(), TargetModel::<f64>::StdNormal.density(x).unwrap());
    // N(0,1) ∗ Laplace(1) has a closed form through erfc
    let e: ErrorModel<f64> = ErrorModel::SymGamma { alpha: 2.0 };
    let a = fx_density(&TargetModel::StdNormal, &e, 1.3).unwrap();
    let b = fx_density(&TargetModel::StdNormal, &e, -1.3).unwrap();
    assert!((a - b).abs() < 1e-6);
    let exact = |x: f64| {
        let s = 0.5f64.exp() / 4.0;
        s * ((-x).exp() * libm::erfc((1.0 - x) / 2f64.sqrt()) + x.exp() * libm::erfc((1.0 + x) / 2f64.sqrt()))
    };
    assert!((a - exact(1.3)).abs() < 1e-8, "{a} vs {}", exact(1.3));
    let breaks: Vec<f64> = (-30..=30).map(|i| i as f64).collect();
    let mass = integrate_with_breaks(
        |x| fx_density(&TargetModel::NormalMixture, &ErrorModel::SymGamma { alpha: 1.0 }, x).unwrap(),
        &breaks,
        Tolerance::new(1e-8, 1e-6),
    )
    .unwrap();
    assert!((mass - 1.0).abs() < 1e-3, "{mass}");
}

proptest! {
    #[test]
    fn b2_is_bounded(h in 0.01f64..3.0, x in prop_oneof![-20f64..-0.01, 0.01f64..20.0], a in -5f64..5.0, b in -5f64..5.0) {
        let p = profile(2.0, 1.0, 1.0, a, b);
        let v = bias_b2(h, x, &p).unwrap();
        prop_assert!(v.abs() <= (a.abs() + b.abs()) / (2.0 * PI * x.abs()) * (1.0 + 1e-12));
    }

    #[test]
    fn rho1_exponent_identity(alpha in 0.51f64..8.0, beta in 0.0f64..4.0, n in 2.0f64..1e8) {
        let r = rates(alpha, beta, n, 1.0, None).unwrap();
        let want = n.powf(-2.0 * beta / (2.0 * alpha + 2.0 * beta - 1.0));
        prop_assert!((r.rho1 - want).abs() <= 1e-12 * want);
    }
}
