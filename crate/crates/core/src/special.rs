//! Special functions used by the models and the quadrature engine.

use num_complex::Complex;

use crate::real::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln |Γ(x)|` by the Lanczos approximation (reflection below 1/2).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // Γ(x)Γ(1-x) = π / sin(πx)
        let s = (T::PI() * x).sin().abs();
        return T::PI().ln() - s.ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// Γ(x) for real x away from the non-positive integers.
pub fn gamma<T: Real>(x: T) -> T {
    let mag = ln_gamma(x).exp();
    if x > T::zero() {
        return mag;
    }
    // sign of Γ on (-k-1, -k) is (-1)^(k+1)
    let k = (-x).floor().to_i64().unwrap_or(0);
    if k % 2 == 0 {
        -mag
    } else {
        mag
    }
}

/// Binomial coefficient C(n, k) as a float.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_count(n - i) / T::from_count(i + 1);
    }
    acc
}

/// Generalized binomial coefficient C(a, k) for real `a`.
pub fn binomial_real<T: Real>(a: T, k: usize) -> T {
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * (a - T::from_count(i)) / T::from_count(i + 1);
    }
    acc
}

/// Sine integral Si(x) = ∫₀ˣ sin(t)/t dt.
///
/// Power series for |x| ≤ 2, continued fraction for E₁(ix) beyond.
pub fn sine_integral<T: Real>(x: T) -> T {
    let ax = x.abs();
    let sign = if x < T::zero() { -T::one() } else { T::one() };
    if ax == T::zero() {
        return T::zero();
    }
    let eps = T::epsilon();
    if ax.is_infinite() {
        return sign * T::FRAC_PI_2();
    }
    if ax <= T::lit(2.0) {
        // Si(x) = Σ (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
        let x2 = ax * ax;
        let mut term = ax;
        let mut sum = ax;
        let mut k = 0usize;
        loop {
            k += 1;
            let a = T::from_count(2 * k);
            let b = T::from_count(2 * k + 1);
            term = -term * x2 / (a * b);
            let add = term / b;
            sum += add;
            if add.abs() < eps * sum.abs() || k > 60 {
                break;
            }
        }
        return sign * sum;
    }
    // Modified Lentz on the continued fraction of E₁(ix) e^{ix}.
    let one = Complex::new(T::one(), T::zero());
    let tiny = T::min_positive_value().sqrt();
    let mut b = Complex::new(T::one(), ax);
    let mut c = Complex::new(T::one() / tiny, T::zero());
    let mut d = one / b;
    let mut h = d;
    for i in 1..200usize {
        let fi = T::from_count(i);
        let a = Complex::new(-fi * fi, T::zero());
        b += Complex::new(T::lit(2.0), T::zero());
        d = one / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del.re - T::one()).abs() + del.im.abs() < eps {
            break;
        }
    }
    let phase = Complex::new(ax.cos(), -ax.sin());
    let h = h * phase;
    sign * (T::FRAC_PI_2() + h.im)
}

/// Standard normal density.
pub fn normal_pdf<T: Real>(x: T) -> T {
    (-(x * x) * T::lit(0.5)).exp() / T::TAU().sqrt()
}

/// Standard normal distribution function.
pub fn normal_cdf<T: Real>(x: T) -> T {
    T::lit(0.5 * libm::erfc(-x.as_f64() / std::f64::consts::SQRT_2))
}

/// Regularized lower incomplete gamma P(a, x) for integer shape `a`.
pub fn gamma_cdf_integer_shape<T: Real>(shape: usize, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    // 1 - e^{-x} Σ_{k<a} x^k / k!
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..shape {
        term = term * x / T::from_count(k);
        sum += term;
    }
    T::one() - (-x).exp() * sum
}

/// Spherical Bessel functions j₀(θ), …, j_{n-1}(θ) for θ > 0.
///
/// Forward recurrence is stable once θ exceeds the largest order; below that
/// the values come from Miller's backward recurrence, normalized against the
/// larger of the closed forms for j₀ and j₁.
pub fn spherical_bessel_j<T: Real>(theta: T, out: &mut [T]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let (s, c) = theta.sin_cos();
    let j0 = s / theta;
    let j1 = (s / theta - c) / theta;
    if theta > T::from_count(n) {
        out[0] = j0;
        if n > 1 {
            out[1] = j1;
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = T::from_count(2 * k + 1) / theta * out[k] - out[k - 1];
        }
        return;
    }
    let start = n + 20 + theta.to_usize().unwrap_or(0);
    let big = T::lit(1e15);
    let mut upper = T::zero();
    let mut current = T::lit(1e-30);
    for k in (1..=start).rev() {
        let lower = T::from_count(2 * k + 1) / theta * current - upper;
        upper = current;
        current = lower;
        // current now holds j_{k-1}, upper holds j_k
        if k - 1 < n {
            out[k - 1] = current;
        }
        if k < n {
            out[k] = upper;
        }
        if current.abs() > big {
            let inv = T::one() / big;
            current *= inv;
            upper *= inv;
            for v in out.iter_mut().skip(k.saturating_sub(1)) {
                *v *= inv;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() || n < 2 {
        j0 / out[0]
    } else {
        j1 / out[1]
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_factorials() {
        for (n, f) in [(1.0, 1.0), (2.0, 1.0), (5.0, 24.0), (7.0, 720.0)] {
            assert!((gamma::<f64>(n) - f).abs() < 1e-10 * f);
        }
        assert!((gamma(0.5f64) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((gamma(-0.5f64) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sine_integral_known_values() {
        // reference values from Abramowitz & Stegun table 5.1
        let cases: [(f64, f64); 6] = [
            (0.5, 0.493_107_418_043_066_6),
            (1.0, 0.946_083_070_367_183),
            (2.0, 1.605_412_976_802_695),
            (5.0, 1.549_931_244_944_674),
            (10.0, 1.658_347_594_218_874),
            (20.0, 1.548_241_701_043_439_8),
        ];
        for (x, v) in cases {
            assert!((sine_integral(x) - v).abs() < 1e-13, "Si({x})");
            assert!((sine_integral(-x) + v).abs() < 1e-13);
        }
        let far = sine_integral(1e8f64);
        assert!((far - std::f64::consts::FRAC_PI_2).abs() < 2e-8);
    }

    #[test]
    fn spherical_bessel_against_closed_forms() {
        for &theta in &[0.3f64, 1.0, 2.5, 7.0, 15.9, 40.0, 1e4] {
            let mut out = [0.0; 16];
            spherical_bessel_j(theta, &mut out);
            let (s, c) = theta.sin_cos();
            let j0 = s / theta;
            let j1 = s / (theta * theta) - c / theta;
            let j2 = (3.0 / (theta * theta) - 1.0) * s / theta - 3.0 * c / (theta * theta);
            assert!((out[0] - j0).abs() < 1e-13, "j0({theta})");
            assert!((out[1] - j1).abs() < 1e-13, "j1({theta})");
            assert!((out[2] - j2).abs() < 1e-12, "j2({theta})");
        }
    }

    #[test]
    fn spherical_bessel_high_order_small_argument() {
        // j_k(θ) ≈ θ^k / (2k+1)!! for small θ
        let theta = 0.5f64;
        let mut out = [0.0; 12];
        spherical_bessel_j(theta, &mut out);
        let mut dfact = 1.0;
        for k in 0..12 {
            dfact *= (2 * k + 1) as f64;
            let approx = theta.powi(k as i32) / dfact;
            let rel = (out[k] - approx).abs() / approx;
            assert!(rel < theta * theta / (2.0 * (2 * k + 3) as f64) * 1.1 + 1e-12, "k={k}");
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial::<f64>(4, 2), 6.0);
        assert_eq!(binomial::<f64>(2, 3), 0.0);
        assert!((binomial_real(0.5f64, 2) + 0.125).abs() < 1e-15);
    }

    #[test]
    fn gamma_cdf_shape_two() {
        let x = 1.7f64;
        let expect = 1.0 - (-x).exp() * (1.0 + x);
        assert!((gamma_cdf_integer_shape(2, x) - expect).abs() < 1e-15);
    }
}
