use proptest::prelude::*;
use rand::Rng;
use slsm_core::lsq::{fit_linear, fit_nonlinear, jacobian, predict, sse, FitResult, ModelSpec, NonlinearOptions};
use slsm_core::rng::stream_rng;
use slsm_core::Dataset;
use slsm_oracle::{central_difference, polyfit_normal_equations, polyval};

fn noisy_sine(seed: u64, n: usize, span: f64, truth: [f64; 4], noise: f64) -> Dataset {
    let mut rng = stream_rng(seed, 0);
    let x: Vec<f64> = (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect();
    let y = x
        .iter()
        .map(|&v| truth[0] * (truth[1] * v + truth[2]).sin() + truth[3] + noise * (rng.random::<f64>() - 0.5))
        .collect();
    Dataset::new(x, y).unwrap()
}

fn gradient_norm(fit: &FitResult, data: &Dataset) -> f64 {
    let jac = jacobian(fit.model, &fit.params, data.x()).unwrap();
    let residuals: Vec<f64> = data.points().map(|(x, y)| fit.eval(x) - y).collect();
    (0..fit.params.len())
        .map(|j| (0..data.len()).map(|i| jac[(i, j)] * residuals[i]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

#[test]
fn quadratic_recovery_and_oracle_agreement() {
    let x: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
    let y: Vec<f64> = x.iter().map(|x| x * x + x + 2.0).collect();
    let fit = fit_linear(2, &Dataset::new(x.clone(), y.clone()).unwrap()).unwrap();
    for (got, want) in fit.params.iter().zip([1.0, 1.0, 2.0]) {
        assert!((got - want).abs() < 1e-8);
    }

    let mut rng = stream_rng(17, 0);
    let noisy: Vec<f64> = y.iter().map(|v| v + rng.random::<f64>() - 0.5).collect();
    let data = Dataset::new(x.clone(), noisy.clone()).unwrap();
    let fit = fit_linear(2, &data).unwrap();
    let oracle = polyfit_normal_equations(&x, &noisy, 2);
    for (got, want) in fit.params.iter().zip(&oracle) {
        assert!((got - want).abs() < 1e-9, "{:?} vs {oracle:?}", fit.params);
    }
}

#[test]
fn residual_orthogonal_to_basis() {
    for degree in 0..=4 {
        let data = noisy_sine(degree as u64, 80, 3.0, [1.0, 1.3, 0.2, 0.5], 0.4);
        let fit = fit_linear(degree, &data).unwrap();
        let residuals: Vec<f64> = data.points().map(|(x, y)| fit.eval(x) - y).collect();
        for k in 0..=degree {
            let column: Vec<f64> = data.x().iter().map(|x| x.powi(k as i32)).collect();
            let dot: f64 = column.iter().zip(&residuals).map(|(a, b)| a * b).sum();
            let scale = column.iter().map(|c| c * c).sum::<f64>().sqrt()
                * residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
            assert!(dot.abs() <= 1e-8 * scale.max(1e-300), "degree {degree} column {k}: {dot}");
        }
    }
}

#[test]
fn nonlinear_gradient_vanishes_at_solution() {
    let cases = [
        noisy_sine(1, 200, 1.0, [1.0, 1.0, 0.0, 0.0], 0.0),
        noisy_sine(2, 120, 12.0, [2.0, 0.7, -0.4, 1.0], 0.3),
        noisy_sine(3, 150, 6.0, [0.5, 2.1, 1.0, -2.0], 0.1),
        noisy_sine(4, 100, 20.0, [3.0, 0.45, 2.5, 0.0], 1.0),
    ];
    for data in &cases {
        let fit = fit_nonlinear(ModelSpec::Sinusoid, data, None, &NonlinearOptions::default()).unwrap();
        assert!(fit.converged);
        let g = gradient_norm(&fit, data);
        assert!(g <= 1e-6 * (1.0 + fit.sse), "gradient {g} sse {}", fit.sse);
    }
}

#[test]
fn sinusoid_round_trip() {
    let data = noisy_sine(0, 200, 20.0, [2.0, 0.5, 0.3, -1.0], 0.0);
    let fit = fit_nonlinear(ModelSpec::Sinusoid, &data, None, &NonlinearOptions::default()).unwrap();
    for (got, want) in fit.params.iter().zip([2.0, 0.5, 0.3, -1.0]) {
        assert!((got - want).abs() < 1e-6, "{:?}", fit.params);
    }
}

#[test]
fn nonlinear_fit_is_deterministic() {
    let data = noisy_sine(9, 200, 1.0, [1.0, 1.0, 0.0, 0.0], 0.5);
    let options = NonlinearOptions::default();
    let run = || match fit_nonlinear(ModelSpec::Sinusoid, &data, None, &options) {
        Ok(f) => f,
        Err(slsm_core::Error::NonConvergence(best)) => *best,
        Err(e) => panic!("{e}"),
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
    for (u, v) in a.params.iter().zip(b.params.iter()) {
        assert_eq!(u.to_bits(), v.to_bits());
    }
}

#[test]
fn single_start_knob() {
    let data = noisy_sine(0, 200, 20.0, [2.0, 0.5, 0.3, -1.0], 0.0);
    let options = NonlinearOptions {
        starts: 1,
        ..NonlinearOptions::default()
    };
    let one = fit_nonlinear(ModelSpec::Sinusoid, &data, None, &options);
    let all = fit_nonlinear(ModelSpec::Sinusoid, &data, None, &NonlinearOptions::default()).unwrap();
    if let Ok(one) = one {
        assert!(one.sse >= all.sse);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobian_matches_finite_differences(
        a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0,
        x in prop::collection::vec(-5.0f64..5.0, 1..20),
    ) {
        let params = [a, b, c, d];
        let jac = jacobian(ModelSpec::Sinusoid, &params, &x).unwrap();
        for (i, &xi) in x.iter().enumerate() {
            for j in 0..4 {
                let f = |t: f64| {
                    let mut p = params;
                    p[j] = t;
                    ModelSpec::Sinusoid.eval(&p, xi)
                };
                let fd = central_difference(&f, params[j], 1e-6);
                let analytic = jac[(i, j)];
                prop_assert!((analytic - fd).abs() <= 1e-5 * analytic.abs().max(1.0));
            }
        }
    }

    #[test]
    fn perturbing_linear_coefficients_increases_sse(seed in 0u64..1000, degree in 0usize..=3) {
        let data = noisy_sine(seed, 40, 2.0, [1.0, 2.0, 0.0, 0.0], 1.0);
        let fit = fit_linear(degree, &data).unwrap();
        let model = ModelSpec::Polynomial { degree };
        for k in 0..=degree {
            for delta in [1e-4, -1e-4] {
                let mut p = fit.params.to_vec();
                p[k] += delta;
                prop_assert!(sse(model, &p, &data) > fit.sse);
            }
        }
    }

    #[test]
    fn polynomial_fit_is_permutation_invariant(
        a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0,
        mut x in prop::collection::vec(0.0f64..4.0, 5..40), seed in 0u64..1000,
    ) {
        x.sort_by(f64::total_cmp);
        x.dedup();
        prop_assume!(x.len() >= 5);
        let truth = [a, b, c];
        let y: Vec<f64> = x.iter().map(|v| polyval(&truth, *v)).collect();
        let forward = fit_linear(2, &Dataset::new(x.clone(), y.clone()).unwrap()).unwrap();

        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut rng = stream_rng(seed, 0);
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let shuffled = Dataset::from_points(order.iter().map(|&i| (x[i], y[i]))).unwrap();
        let permuted = fit_linear(2, &shuffled).unwrap();
        let model = ModelSpec::Polynomial { degree: 2 };
        let p1 = predict(model, &forward.params, &x).unwrap();
        let p2 = predict(model, &permuted.params, &x).unwrap();
        for ((u, v), want) in p1.iter().zip(&p2).zip(&y) {
            prop_assert!((u - want).abs() < 1e-8);
            prop_assert!((v - want).abs() < 1e-8);
        }
    }
}
