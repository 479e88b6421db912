use entropyflow::algebra::FactorMap;
use entropyflow::calculus::{entropy_derivative, reduce_raw_integral};
use entropyflow::numeric::*;
use entropyflow::{EntropyKind, MomentSymbol, RawIntegral};
use proptest::prelude::*;

const PI: f64 = std::f64::consts::PI;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn two_point() -> MixtureDensity {
    MixtureDensity::two_point()
}

fn skewed() -> MixtureDensity {
    MixtureDensity::new(vec![0.2, 0.5, 0.3], vec![-1.5, 0.2, 2.0], vec![0.1, 0.0, 0.4]).unwrap()
}

fn gaussian_derivative(k: u32, t: f64) -> f64 {
    let fact: f64 = (1..k).map(|i| i as f64).product();
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    sign * fact / (2.0 * t.powi(k as i32))
}

// 60-digit values from the closed form of ∫p^α for the two-point mixture at integer α,
// differentiated in t at t = 1.
const RENYI3: [f64; 9] = [
    0.20560821768087474768,
    -0.13040576879318737674,
    0.51464301623551336208,
    -3.2288481020313261129,
    21.563108096993337199,
    -149.74076946101768986,
    1075.6105710240091189,
    -7854.3203341777694511,
    56144.501589551570814,
];
const TSALLIS3: [f64; 9] = [
    0.0084583370089188093773,
    -0.0088428562959659965657,
    0.029219841461855197093,
    -0.17788154419045082269,
    1.2637936390183011868,
    -9.6073962238216144035,
    77.616296181695832973,
    -667.17967820830149846,
    6102.5270325072639277,
];
// α = 1.3, t = 1 by 30-digit quadrature.
const RENYI13: [f64; 4] = [0.258532062994124, -0.189672913729106, 0.462217044643508, -2.01896203700395];
const RENYI13_H: f64 = 1.7100663443601903086;

#[test]
fn integer_alpha_oracles_both_routes() {
    let d = two_point();
    let at = EvalPoint::new(3.0, 1.0).unwrap();
    let orders: Vec<u32> = (1..=9).collect();
    let e = engine_derivatives(&d, EntropyKind::Renyi, &orders, &at, &q()).unwrap();
    let s = spectral_derivatives(&d, EntropyKind::Renyi, 9, &at, SPECTRAL_DEGREE).unwrap();
    for k in 0..9 {
        assert!(rel(s[k].value, RENYI3[k]) < 1e-13, "spectral k={}", k + 1);
        assert!(rel(e[k].value, RENYI3[k]) < 1e-10, "engine k={}", k + 1);
        assert!((e[k].value - RENYI3[k]).abs() <= e[k].error, "engine error bar k={}", k + 1);
        assert!((s[k].value - RENYI3[k]).abs() <= s[k].error.max(1e-15 * RENYI3[k].abs()), "spectral bar k={}", k + 1);
    }
    let e = engine_derivatives(&d, EntropyKind::Tsallis, &orders, &at, &q()).unwrap();
    let s = spectral_derivatives(&d, EntropyKind::Tsallis, 9, &at, SPECTRAL_DEGREE).unwrap();
    for k in 0..9 {
        assert!(rel(s[k].value, TSALLIS3[k]) < 1e-12, "spectral k={}", k + 1);
        assert!(rel(e[k].value, TSALLIS3[k]) < 1e-10, "engine k={}", k + 1);
    }
}

#[test]
fn non_integer_alpha_oracle_and_route_agreement() {
    let d = two_point();
    let at = EvalPoint::new(1.3, 1.0).unwrap();
    assert!(rel(entropy_eval(&d, EntropyKind::Renyi, &at, &q()).unwrap(), RENYI13_H) < 1e-12);
    let orders: Vec<u32> = (1..=9).collect();
    let e = engine_derivatives(&d, EntropyKind::Renyi, &orders, &at, &q()).unwrap();
    let s = spectral_derivatives(&d, EntropyKind::Renyi, 9, &at, SPECTRAL_DEGREE).unwrap();
    for k in 0..4 {
        assert!(rel(e[k].value, RENYI13[k]) < 1e-12, "k={}", k + 1);
        assert!(rel(s[k].value, RENYI13[k]) < 1e-12, "k={}", k + 1);
    }
    for k in 0..9 {
        let tol = if k < 4 { 1e-5 } else { 1e-3 };
        assert!(rel(e[k].value, s[k].value) < tol, "k={} {} {}", k + 1, e[k].value, s[k].value);
    }
}

#[test]
fn gaussian_closed_form_both_routes() {
    let g = MixtureDensity::gaussian(0.7, 0.0);
    for alpha in [0.5, 1.0, 2.0] {
        for t in [0.5, 1.0, 2.0] {
            let at = EvalPoint::new(alpha, t).unwrap();
            let e = engine_derivatives(&g, EntropyKind::Renyi, &[1, 2, 3, 4, 5, 6], &at, &q()).unwrap();
            let s = spectral_derivatives(&g, EntropyKind::Renyi, 6, &at, SPECTRAL_DEGREE).unwrap();
            for k in 1..=6u32 {
                let want = gaussian_derivative(k, t);
                assert!(rel(e[k as usize - 1].value, want) < 1e-8, "engine a={alpha} t={t} k={k}");
                assert!(rel(s[k as usize - 1].value, want) < 1e-8, "spectral a={alpha} t={t} k={k}");
            }
        }
    }
}

#[test]
fn first_derivative_is_half_alpha_fisher() {
    let p11 = MomentSymbol::from_pairs(&[(1, 2)]).unwrap();
    for d in [two_point(), skewed()] {
        for (alpha, t) in [(0.6, 0.4), (2.5, 1.7)] {
            let at = EvalPoint::new(alpha, t).unwrap();
            let h1 = derivative_eval(&d, EntropyKind::Renyi, 1, &at, &q(), Route::Engine).unwrap();
            let fisher = moment_eval(&d, &p11, &at, &q()).unwrap();
            assert!(rel(h1, 0.5 * alpha * fisher) < 1e-12);
            assert!(h1 > 0.0);
        }
    }
}

#[test]
fn tsallis_two_pairwise_convolution() {
    // ∫φ_{v₁}(x−a)φ_{v₂}(x−b)dx = φ_{v₁+v₂}(a−b)
    for d in [two_point(), skewed()] {
        for t in [0.3, 1.0, 4.0] {
            let mut sq = 0.0;
            for i in 0..d.len() {
                for j in 0..d.len() {
                    let v = d.initial_variances[i] + d.initial_variances[j] + 2.0 * t;
                    let u = d.centers[i] - d.centers[j];
                    sq += d.weights[i] * d.weights[j] * (-u * u / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
                }
            }
            let at = EvalPoint::new(2.0, t).unwrap();
            let h = entropy_eval(&d, EntropyKind::Tsallis, &at, &q()).unwrap();
            assert!((h - (1.0 - sq)).abs() < 1e-10);
        }
    }
    let h = entropy_eval(&two_point(), EntropyKind::Tsallis, &EvalPoint::new(2.0, 1.0).unwrap(), &q()).unwrap();
    assert!((h - 0.80706416693548659035).abs() < 1e-14);
}

#[test]
fn normalization() {
    for d in [two_point(), skewed(), MixtureDensity::gaussian(3.0, 2.0)] {
        for t in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let z = power_integral(&d, &EvalPoint::new(1.0, t).unwrap(), &q()).unwrap();
            assert!((z - 1.0).abs() < 1e-10, "t={t}");
        }
    }
}

#[test]
fn monotonicity_and_concavity_window() {
    let grid = t_grid(0.05, 20.0, 9, true).unwrap();
    for d in [two_point(), skewed()] {
        for alpha in [0.3, 0.7, 1.0, 1.6, 2.4, 3.0] {
            for &t in &grid {
                let at = EvalPoint::new(alpha, t).unwrap();
                let v = engine_derivatives(&d, EntropyKind::Renyi, &[1, 2], &at, &q()).unwrap();
                assert!(v[0].value >= -1e-10, "h' a={alpha} t={t}");
                assert!(v[1].value <= 1e-10, "h'' a={alpha} t={t}");
                if alpha <= 2.9 {
                    let c = v[1].value + v[0].value * v[0].value;
                    assert!(c <= 1e-10, "REP a={alpha} t={t} {c}");
                }
            }
        }
    }
}

#[test]
fn entropy_power_is_concave_in_time() {
    // X has component variances 0.5; X + √s Z is the base mixture at time 0.25 + s.
    let base = MixtureDensity::new(vec![0.3, 0.7], vec![-1.2, 0.9], vec![0.25, 0.25]).unwrap();
    let h = |alpha: f64, s: f64| {
        entropy_eval(&base, EntropyKind::Renyi, &EvalPoint::new(alpha, 0.25 + s).unwrap(), &q()).unwrap().exp()
    };
    for alpha in [0.5, 1.5, 2.9] {
        let (e0, e1) = (h(alpha, 0.0), h(alpha, 1.0));
        for i in 1..=9 {
            let t = i as f64 / 10.0;
            assert!(h(alpha, t) >= (1.0 - t) * e0 + t * e1 - 1e-8, "a={alpha} t={t}");
        }
        for t in [0.3, 1.0, 3.0] {
            let c = entropy_power_curvature(&base, alpha, t, &q()).unwrap();
            assert!(c.value <= 1e-10, "a={alpha} t={t}");
            let dd = entropy_power_second_difference(&base, alpha, t, 0.05, &q()).unwrap();
            assert!(dd <= 1e-8);
        }
    }
}

#[test]
fn alpha_stability_decreases() {
    for d in [two_point(), skewed()] {
        for alpha in [1.2, 2.0, 5.0] {
            let grid = t_grid(0.05, 30.0, 15, true).unwrap();
            let s: Vec<f64> =
                grid.iter().map(|&t| power_integral(&d, &EvalPoint::new(alpha, t).unwrap(), &q()).unwrap()).collect();
            assert!(s.windows(2).all(|w| w[1] <= w[0]), "a={alpha}");
        }
    }
}

#[test]
fn reduction_preserves_values() {
    let cases: Vec<(i64, Vec<(u32, u32)>)> = vec![
        (-3, vec![(1, 2), (2, 1)]),
        (-2, vec![(1, 1), (3, 1)]),
        (-1, vec![(4, 1)]),
        (-4, vec![(1, 3), (3, 1)]),
        (-3, vec![(1, 1), (2, 1), (3, 1)]),
        (-2, vec![(2, 1), (4, 1)]),
    ];
    for (alpha, t) in [(1.7, 0.8), (0.6, 2.0)] {
        for d in [two_point(), skewed()] {
            let at = EvalPoint::new(alpha, t).unwrap();
            let z = power_integral(&d, &at, &q()).unwrap();
            for (off, f) in &cases {
                let fm: FactorMap = f.iter().copied().collect();
                let r = RawIntegral::new(*off, fm).unwrap();
                let direct = integrate(
                    |x| {
                        let p = density_derivative(&d, x, t, 0);
                        let mut v = p.powf(alpha + *off as f64);
                        for (n, k) in f {
                            v *= density_derivative(&d, x, t, *n as usize).powi(*k as i32);
                        }
                        v
                    },
                    -20.0,
                    20.0,
                    &q(),
                )
                .unwrap()
                .0;
                let reduced = expr_eval(&d, &reduce_raw_integral(&r), &at, &q()).unwrap().value * z;
                assert!((direct - reduced).abs() <= 1e-8 * direct.abs().max(1e-6), "{} {direct} {reduced}", r.render());
            }
        }
    }
}

#[test]
fn tsallis2_identity() {
    for k in 1..=5u32 {
        let (lhs, rhs) = tsallis2_identity_check(&two_point(), k, 1.0, &q()).unwrap();
        assert!(rel(lhs, rhs) < 1e-6, "k={k}");
        assert_eq!(lhs > 0.0, k % 2 == 1);
    }
    // Gaussian: ∫(∂ᵏφ_v)² = Γ(k+½) / (2π v^{k+½})
    let g = MixtureDensity::gaussian(0.0, 0.5);
    let t = 1.5;
    let v: f64 = 2.0;
    for k in 1..=5u32 {
        let gamma = gamma_half(k);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let want = sign * gamma / (2.0 * PI * v.powf(k as f64 + 0.5));
        let (lhs, rhs) = tsallis2_identity_check(&g, k, t, &q()).unwrap();
        assert!(rel(rhs, want) < 1e-10 && rel(lhs, want) < 1e-8, "k={k}");
    }
}

/// Γ(k + ½) = (2k)! √π / (4ᵏ k!)
fn gamma_half(k: u32) -> f64 {
    let num: f64 = (1..=2 * k).map(|i| i as f64).product();
    let den: f64 = 4f64.powi(k as i32) * (1..=k).map(|i| i as f64).product::<f64>();
    num / den * PI.sqrt()
}

#[test]
fn bounds_examples_and_lower_equality() {
    let b = entropy_bounds(2.0, 1.0, 1.0).unwrap();
    assert!((b.upper.unwrap() - (0.5 * (4.0 * PI).ln() + 0.5 * 2f64.ln())).abs() < 1e-14);
    let b = entropy_bounds(0.5, 1.0, 1.0).unwrap();
    // (1/(1−α))log(2α/(3α−1)) + lnΓ((1+α)/(2(1−α))) − lnΓ(1/(1−α)) + ½log(π(3α−1)(t+σ²)/(1−α)) at α = ½
    let want = 2f64.ln() + 0.5 * PI.ln() + 0.5 * (2.0 * PI).ln();
    assert!((b.upper.unwrap() - want).abs() < 1e-12);
    for alpha in [0.4, 1.0, 2.0, 7.0] {
        for t in [0.2, 1.0, 5.0] {
            let g = MixtureDensity::gaussian(-0.3, 0.0);
            let h = entropy_eval(&g, EntropyKind::Renyi, &EvalPoint::new(alpha, t).unwrap(), &q()).unwrap();
            assert!((h - entropy_bounds(alpha, t, 0.0).unwrap().lower).abs() < 1e-10);
        }
    }
}

#[test]
fn bounds_hold_below_one_and_printed_upper_fails_above() {
    let d = two_point();
    for alpha in [0.45, 0.7, 0.9] {
        for t in [0.1, 1.0, 5.0] {
            let h = entropy_eval(&d, EntropyKind::Renyi, &EvalPoint::new(alpha, t).unwrap(), &q()).unwrap();
            assert!(entropy_bounds(alpha, t, d.variance()).unwrap().contains(h, 1e-8));
        }
    }
    // variance-matched Gaussian Rényi entropy is exceeded by the mixture above α = 1
    let h = entropy_eval(&d, EntropyKind::Renyi, &EvalPoint::new(2.0, 1.0).unwrap(), &q()).unwrap();
    let b = entropy_bounds(2.0, 1.0, 1.0).unwrap();
    assert!(h > b.upper.unwrap() + 1e-3);
    assert!(h <= shannon_variance_bound(1.0, 1.0).unwrap());
}

#[test]
fn scan_examples() {
    let grid = t_grid(0.05, 50.0, 40, true).unwrap();
    let d = two_point();
    let r = scan_signs(&d, EntropyKind::Renyi, &[5], &[3.0], &grid).unwrap();
    let s = r.get(5, 3.0).unwrap();
    assert!(!s.violations.is_empty());
    for v in &s.violations {
        assert!(v.t_lo <= v.witness.t && v.witness.t <= v.t_hi);
        assert!(v.witness.value.unwrap() < 0.0);
    }
    let r = scan_signs(&d, EntropyKind::Tsallis, &[9], &[3.0], &grid).unwrap();
    assert!(!r.series[0].violations.is_empty());
    let r = scan_signs(&d, EntropyKind::Renyi, &[2], &[1.5], &grid).unwrap();
    assert!(r.series[0].violations.is_empty());
    assert_eq!(r.series[0].failures(), 0);
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["kind"], "renyi");
}

#[test]
fn scan_rejects_bad_input_and_reports_cell_failures() {
    let d = two_point();
    assert!(scan_signs(&d, EntropyKind::Renyi, &[2], &[2.0], &[1.0, 0.5]).is_err());
    assert!(scan_signs(&d, EntropyKind::Renyi, &[], &[2.0], &[1.0]).is_err());
    assert!(scan_signs(&d, EntropyKind::Renyi, &[0], &[2.0], &[1.0]).is_err());
    let tight = ScanOptions { quadrature: QuadratureConfig { max_subdivisions: 1, ..q() }, ..Default::default() };
    let r = scan_signs_with(&d, EntropyKind::Renyi, &[12], &[2.0], &[0.5, 1.0], &tight).unwrap();
    assert_eq!(r.series[0].failures(), 2);
}

#[test]
fn spectral_limits() {
    let at = EvalPoint::new(2.0, 1.0).unwrap();
    assert!(matches!(
        spectral_derivatives(&two_point(), EntropyKind::Renyi, 10, &at, SPECTRAL_DEGREE),
        Err(entropyflow::Error::SpectralIllConditioned { order: 10 })
    ));
    assert!(derivative_eval(&two_point(), EntropyKind::Renyi, 0, &at, &q(), Route::Engine).is_err());
}

#[test]
fn shannon_band_routes_to_shannon() {
    let d = skewed();
    let at = EvalPoint::new(1.0 + 1e-10, 0.7).unwrap();
    let a = derivative_eval(&d, EntropyKind::Renyi, 2, &at, &q(), Route::Engine).unwrap();
    let b = derivative_eval(&d, EntropyKind::Shannon, 2, &EvalPoint::new(1.0, 0.7).unwrap(), &q(), Route::Spectral)
        .unwrap();
    assert!(rel(a, b) < 1e-9);
    let ts = derivative_eval(&d, EntropyKind::Tsallis, 2, &at, &q(), Route::Engine).unwrap();
    assert!(rel(ts, b) < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_derivatives_any_point(alpha in 0.3f64..6.0, t in 0.2f64..8.0, k in 1u32..=5, s in 0.0f64..2.0) {
        let g = MixtureDensity::gaussian(0.0, s);
        let at = EvalPoint::new(alpha, t).unwrap();
        let v = derivative_eval(&g, EntropyKind::Renyi, k, &at, &q(), Route::Engine).unwrap();
        prop_assert!(rel(v, gaussian_derivative(k, t + s)) < 1e-8);
    }

    #[test]
    fn density_derivative_matches_finite_difference(x in -4.0f64..4.0, t in 0.3f64..3.0, n in 0usize..5) {
        let d = skewed();
        let h = 1e-5;
        let fd = (density_derivative(&d, x + h, t, n) - density_derivative(&d, x - h, t, n)) / (2.0 * h);
        let exact = density_derivative(&d, x, t, n + 1);
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-2));
    }

    #[test]
    fn heat_equation_holds(x in -4.0f64..4.0, t in 0.3f64..3.0) {
        let d = skewed();
        let h = 1e-4;
        let pt = (density_derivative(&d, x, t + h, 0) - density_derivative(&d, x, t - h, 0)) / (2.0 * h);
        prop_assert!((pt - 0.5 * density_derivative(&d, x, t, 2)).abs() < 1e-7);
    }

    #[test]
    fn lower_bound_below_mixture_entropy(alpha in 0.35f64..4.0, t in 0.1f64..5.0) {
        let d = skewed();
        let h = entropy_eval(&d, EntropyKind::Renyi, &EvalPoint::new(alpha, t).unwrap(), &q()).unwrap();
        let b = entropy_bounds(alpha, t, d.variance()).unwrap();
        prop_assert!(h >= b.lower - 1e-8);
    }
}

#[test]
fn derivative_result_normalizer_applied_for_tsallis() {
    let r = entropy_derivative(EntropyKind::Tsallis, 1).unwrap();
    assert_eq!(r.normalizer_power, 1);
    let d = skewed();
    let at = EvalPoint::new(2.5, 0.9).unwrap();
    let z = power_integral(&d, &at, &q()).unwrap();
    let v = derivative_eval(&d, EntropyKind::Tsallis, 1, &at, &q(), Route::Engine).unwrap();
    let s = derivative_eval(&d, EntropyKind::Tsallis, 1, &at, &q(), Route::Spectral).unwrap();
    assert!(rel(v, s) < 1e-10);
    let e = expr_eval(&d, &r.expr, &at, &q()).unwrap();
    assert!(rel(e.value * z, v) < 1e-14);
}
