use proptest::prelude::*;
use smallball::bounds::{
    bound_gaussian_class, bound_iid_sum, representation_feasibility, Certificate,
    GaussianClassProblem, IidMode, Regime,
};
use smallball::concentration::{clopper_pearson_upper, hoeffding_tail};
use smallball::gauss::{
    fgn_autocovariances, fgn_symbol, gamma_two_norm_bound, symbol_sup, ClassParams,
    IncrementCovariance, DEFAULT_TRUNCATION,
};
use smallball::mc::{
    estimate_from_norms, fit_rate, norm_samples, validate, FitMode, NormKind, SmallBallEstimate,
};
use smallball::simulate::{simulate_iid_partial_sums, DistSpec, ProcessSpec};
use smallball::{Error, SeedSpec, UniformGrid};

fn total(class: ClassParams, horizon: f64, epsilon: f64) -> f64 {
    let problem = GaussianClassProblem {
        class,
        horizon,
        epsilon,
        drift: None,
        lattice: None,
    };
    match bound_gaussian_class(&problem) {
        Ok(c) => c.total,
        Err(Error::Infeasible(_) | Error::EpsilonTooLarge { .. }) => 1.0,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificate_total_nondecreasing_in_epsilon(
        hurst in 0.15..0.85f64,
        e1 in 0.005..0.3f64,
        e2 in 0.005..0.3f64,
    ) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let class = ClassParams::fbm(hurst);
        prop_assert!(total(class, 1.0, lo) <= total(class, 1.0, hi));
    }

    #[test]
    fn sharp_iid_bound_never_exceeds_paper(
        n in 1usize..500,
        mean_abs in 0.01..2.0f64,
        extra in 0.0..3.0f64,
        frac in 0.01..1.0f64,
    ) {
        let range = mean_abs + extra;
        let eps = frac * mean_abs / 4.0;
        let sharp = bound_iid_sum(n, mean_abs, range, eps, IidMode::Sharp).unwrap();
        let paper = bound_iid_sum(n, mean_abs, range, eps, IidMode::PaperConstants).unwrap();
        prop_assert!(sharp <= paper);
    }

    #[test]
    fn feasible_witnesses_satisfy_all_inequalities(
        hurst in 0.3..0.99f64,
        beta in 0.01..0.99f64,
        theta in 0.0..1.0f64,
    ) {
        let w = representation_feasibility(hurst, beta, theta);
        let q = (1.0 - hurst) / (1.0 - beta) * beta;
        if w.feasible {
            prop_assert!(w.mu + theta > q);
            prop_assert!(w.gamma_repr * hurst > q);
            prop_assert!(w.kappa > q);
            prop_assert!(1.0 - w.eta - w.mu > 0.0);
            prop_assert!(2.0 - w.eta - w.kappa > 0.0);
            prop_assert!(1.0 + hurst - w.eta - w.mu - w.kappa > 0.0);
            prop_assert!(w.eta > 1.0 - hurst && w.eta < 0.5);
        }
        let margin = [
            hurst - 0.5,
            3.0 * hurst / (hurst + 2.0) - beta,
            theta - (2.0 * q - 2.0 * hurst),
            theta - (q - hurst),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        if margin > 0.01 {
            prop_assert!(w.feasible, "{w:?}");
        }
        if margin < 0.0 {
            prop_assert!(!w.feasible, "{w:?}");
        }
    }

    #[test]
    fn exact_norm_below_symbol_and_lag_bound(hurst in 0.1..0.5f64, log_n in 3u32..9) {
        let n = 1usize << log_n;
        let delta = 1.0 / n as f64;
        let scale = delta.powf(2.0 * hurst);
        let rho: Vec<f64> = fgn_autocovariances(hurst, n).iter().map(|r| r * scale).collect();
        let norms = IncrementCovariance::toeplitz(rho).norms();
        let sup = symbol_sup(&fgn_symbol(hurst, DEFAULT_TRUNCATION).unwrap(), 4096).value();
        let class = ClassParams::fbm(hurst);
        prop_assert!(norms.two <= norms.one * (1.0 + 1e-12));
        prop_assert!(norms.two <= sup * scale * (1.0 + 1e-3));
        prop_assert!(norms.two <= gamma_two_norm_bound(hurst, n, delta, class.c_deriv, class.c_upper) * (1.0 + 1e-12));
    }
}

#[test]
fn lag_bound_dominates_exact_norm() {
    for hurst in [0.25, 0.3, 0.4] {
        let c_deriv = ClassParams::fbm(hurst).c_deriv;
        for n in [16, 64, 256] {
            let exact = IncrementCovariance::toeplitz(fgn_autocovariances(hurst, n))
                .norms()
                .two;
            let bound = gamma_two_norm_bound(hurst, n, 1.0, c_deriv, 1.0);
            assert!(exact <= bound, "H={hurst}, N={n}: {exact} > {bound}");
        }
    }
}

#[test]
fn exact_norm_nondecreasing_in_size() {
    for hurst in [0.2, 0.3, 0.45, 0.7] {
        let norms: Vec<f64> = [8, 32, 128, 512]
            .iter()
            .map(|&n| {
                IncrementCovariance::toeplitz(fgn_autocovariances(hurst, n))
                    .norms()
                    .two
            })
            .collect();
        assert!(
            norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)),
            "H={hurst}: {norms:?}"
        );
    }
}

fn fitted_exponent(class: ClassParams, eps: &[f64]) -> f64 {
    let pairs: Vec<(f64, f64)> = eps.iter().map(|&e| (e, total(class, 1.0, e))).collect();
    assert!(pairs.iter().all(|p| p.1 < 1.0), "{pairs:?}");
    fit_rate(&pairs, FitMode::PrefactorAware { prefactor: 2.0 })
        .unwrap()
        .gamma_hat
}

#[test]
fn exponent_extraction_rough_class() {
    let class = ClassParams {
        hurst: 0.3,
        beta: 0.4,
        c_lower: 0.5,
        c_upper: 1.0,
        c_deriv: 0.12,
    };
    let gamma = fitted_exponent(class, &[0.004, 0.006, 0.008, 0.01]);
    assert!((gamma - (1.0 + 0.6 - 0.8) / 0.4).abs() < 1e-6, "{gamma}");
}

#[test]
fn exponent_extraction_smooth_fbm() {
    let hurst = 0.7;
    let gamma = fitted_exponent(ClassParams::fbm(hurst), &[1e-4, 2e-4, 4e-4, 8e-4]);
    assert!(
        (gamma - (2.0 - 2.0 * hurst) / hurst).abs() < 1e-6,
        "{gamma}"
    );
}

#[test]
fn hoeffding_dominates_uniform_sums() {
    let (n, draws) = (64, 100_000u64);
    let dist = DistSpec::Uniform { lo: -1.0, hi: 1.0 };
    let sums: Vec<f64> = (0..draws)
        .map(|i| simulate_iid_partial_sums(&dist, n, SeedSpec::new(4, i))[n].abs())
        .collect();
    let ranges = vec![2.0; n];
    for t in (1..=15).map(|k| 2.0 * k as f64) {
        let hits = sums.iter().filter(|&&s| s >= t).count() as u64;
        let hi = clopper_pearson_upper(hits, draws, 0.99);
        assert!(hi <= hoeffding_tail(&ranges, t), "t={t}: {hi}");
    }
}

fn brownian_estimate(n_paths: usize) -> SmallBallEstimate {
    let grid = UniformGrid::new(1.0, 256).unwrap();
    let norms = norm_samples(&ProcessSpec::brownian(), NormKind::Sup, n_paths, grid, 12).unwrap();
    estimate_from_norms(&norms, &[1.0], 0.99, NormKind::Sup, "bm".into(), grid, 12).unwrap()
}

#[test]
fn interval_width_scales_as_inverse_root() {
    let width = |e: &SmallBallEstimate| e.ci_hi[0] - e.ci_lo[0];
    let base = width(&brownian_estimate(10_000));
    let double = width(&brownian_estimate(20_000));
    let quad = width(&brownian_estimate(40_000));
    assert!((double / base / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 0.2);
    assert!((quad / base / 0.5 - 1.0).abs() < 0.2);
}

#[test]
fn validation_is_deterministic_and_ordered() {
    let grid = UniformGrid::new(1.0, 256).unwrap();
    let eps = [0.3, 0.6, 1.0];
    let norms = norm_samples(&ProcessSpec::brownian(), NormKind::Sup, 2000, grid, 12).unwrap();
    let est =
        estimate_from_norms(&norms, &eps, 0.99, NormKind::Sup, "bm".into(), grid, 12).unwrap();
    let certs: Vec<Certificate> = eps
        .iter()
        .rev()
        .map(|&e| Certificate::trivial(Regime::Sup, e, 1.0, "test"))
        .collect();
    let a = validate(&certs, &est).unwrap();
    let b = validate(&certs, &est).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.rows.iter().map(|r| r.epsilon).collect::<Vec<_>>(), eps);
}

#[test]
fn rough_class_at_tiny_epsilon_needs_no_dense_work() {
    // δ₀ ≈ 5e−12, so N exceeds 10¹¹
    let t = total(ClassParams::fbm(0.15), 1.0, 0.005);
    assert!((0.0..=1.0).contains(&t));
}
