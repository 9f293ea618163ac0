//! Independent oracles: Monte Carlo for the demand process, quadrature for
//! the gamma-based quantities, brute-force chi-square for the jump counts.

use proptest::prelude::*;
use reorder_core::quadrature::integrate;
use reorder_core::special::gamma_q;
use reorder_core::stats::mean_stderr;
use reorder_core::*;

const N_SEEDS: u64 = 100_000;

#[test]
fn mean_demand_at_ten() {
    let p = ProcessParams::default();
    let d: Vec<f64> = (0..N_SEEDS)
        .map(|s| demand_at(&sample_path(p, 10.0, s).unwrap(), 10.0).unwrap())
        .collect();
    let (mean, se) = mean_stderr(&d);
    assert!((mean - 150.0).abs() <= 3.0 * se, "mean {mean} se {se}");

    let jumps: f64 = (0..N_SEEDS)
        .map(|s| sample_path(p, 10.0, s).unwrap().jump_times.len() as f64)
        .sum::<f64>()
        / N_SEEDS as f64;
    assert!((jumps - 10.0).abs() < 0.05, "{jumps}");
}

#[test]
fn mean_period_increment() {
    let p = ProcessParams::default();
    for k in [0usize, 3, 9] {
        let inc: Vec<f64> = (0..N_SEEDS)
            .map(|s| period_increments(&sample_path(p, 10.0, s).unwrap(), 1.0).unwrap()[k])
            .collect();
        let (mean, se) = mean_stderr(&inc);
        assert!((mean - 15.0).abs() <= 3.0 * se, "period {k}: {mean} se {se}");
    }
}

/// Pearson chi-square of jump counts in [0, t] against Poisson(lambda t),
/// pooling cells with expected count below 5.
fn poisson_chi_square_pvalue(counts: &[usize], mean: f64) -> f64 {
    let n = counts.len() as f64;
    let max = *counts.iter().max().unwrap();
    let mut observed = vec![0.0; max + 2];
    for &c in counts {
        observed[c] += 1.0;
    }
    let mut pmf = Vec::with_capacity(max + 2);
    let mut term = (-mean).exp();
    for k in 0..=max {
        if k > 0 {
            term *= mean / k as f64;
        }
        pmf.push(term);
    }
    // Last cell: everything above max.
    pmf.push(1.0 - pmf.iter().sum::<f64>());

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (o, p) in observed.iter().zip(&pmf) {
        o_acc += o;
        e_acc += p * n;
        if e_acc >= 5.0 {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += o_acc;
        last.1 += e_acc;
    }
    let chi2: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (cells.len() - 1) as f64;
    gamma_q(dof / 2.0, chi2 / 2.0).unwrap()
}

#[test]
fn jump_counts_are_poisson() {
    let p = ProcessParams::default();
    for t in [1.0, 5.0, 10.0] {
        let counts: Vec<usize> = (0..20_000u64)
            .map(|s| sample_path(p, 10.0, 7_000_000 + s).unwrap().jumps_until(t))
            .collect();
        let pvalue = poisson_chi_square_pvalue(&counts, p.lambda * t);
        assert!(pvalue > 0.01, "t={t}: p-value {pvalue}");
    }
}

#[test]
fn truncated_mean_matches_quadrature_on_grid() {
    for &(shape, rate) in &[(1.0, 1.0), (2.5, 0.7), (10.0, 10.0), (33.0, 10.0), (0.6, 3.0)] {
        let spec = GammaSpec::new(shape, rate).unwrap();
        for &t in &[0.3, 1.0, 2.0, 6.0] {
            let quad = integrate(|s| s * spec.density(s), 0.0, t, 1e-13);
            let cdf_quad = integrate(|s| spec.density(s), 0.0, t, 1e-13);
            assert!((truncated_mean(&spec, t).unwrap() - quad).abs() < 1e-8);
            assert!((gamma_cdf(&spec, t).unwrap() - cdf_quad).abs() < 1e-8);
        }
    }
}

#[test]
fn integrated_renewals_is_integral_of_renewals() {
    let p = ProcessParams::default();
    let pol = PolicyParams::default();
    let cfg = RenewalSeriesConfig::default();
    for t in [1.0, 4.0, 9.0] {
        let direct = passage::expected_integrated_renewals(&p, &pol, t, &cfg).unwrap();
        let quad = integrate(|s| passage::expected_renewals(&p, &pol, s, &cfg).unwrap(), 0.0, t, 1e-11);
        assert!((direct - quad).abs() < 1e-7, "t={t}: {direct} vs {quad}");
    }
}

#[test]
fn rolling_forecasts_sit_below_jumps() {
    let cfg = ExperimentConfig { n_series: 200, ..ExperimentConfig::default() };
    let runs = experiment::generate_runs(&cfg).unwrap();
    let (mut f, mut a, mut n) = (0.0, 0.0, 0.0);
    for run in &runs {
        for (fc, act) in run.forecasts.iter().zip(&run.actuals) {
            // A jump period has demand above the drift alone.
            if *act > cfg.process.mu {
                f += fc;
                a += act;
                n += 1.0;
            }
        }
    }
    assert!(f / n < a / n, "forecast {} vs actual {}", f / n, a / n);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn demand_is_additive_and_monotone(seed in 0u64..10_000, t1 in 0.0f64..10.0, t2 in 0.0f64..10.0, t3 in 0.0f64..10.0) {
        let path = sample_path(ProcessParams::default(), 10.0, seed).unwrap();
        let mut ts = [t1, t2, t3];
        ts.sort_by(f64::total_cmp);
        let d: Vec<f64> = ts.iter().map(|&t| demand_at(&path, t).unwrap()).collect();
        prop_assert!(d[0] <= d[1] && d[1] <= d[2]);
        let (a, b) = (d[1] - d[0], d[2] - d[1]);
        prop_assert!(((a + b) - (d[2] - d[0])).abs() < 1e-9);
    }

    #[test]
    fn increments_sum_to_demand(seed in 0u64..10_000, period in 0.5f64..5.0) {
        let path = sample_path(ProcessParams::default(), 20.0, seed).unwrap();
        let inc = period_increments(&path, period).unwrap();
        let total: f64 = inc.iter().sum();
        let end = demand_at(&path, inc.len() as f64 * period).unwrap();
        prop_assert!((total - end).abs() < 1e-9);
    }

    #[test]
    fn gamma_cdf_monotone_and_bounded(shape in 0.1f64..200.0, rate in 0.1f64..20.0, t1 in 0.0f64..50.0, dt in 0.0f64..10.0) {
        let spec = GammaSpec::new(shape, rate).unwrap();
        let a = gamma_cdf(&spec, t1).unwrap();
        let b = gamma_cdf(&spec, t1 + dt).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b >= a - 1e-15);
    }

    #[test]
    fn partial_moment_identity(shape in 0.1f64..200.0, rate in 0.1f64..20.0, t in 0.0f64..60.0) {
        let spec = GammaSpec::new(shape, rate).unwrap();
        let upper = GammaSpec::new(shape + 1.0, rate).unwrap();
        let lhs = truncated_mean(&spec, t).unwrap() + spec.mean() * (1.0 - gamma_cdf(&upper, t).unwrap());
        prop_assert!((lhs - spec.mean()).abs() <= 1e-10 * spec.mean().max(1.0));
    }

    #[test]
    fn renewals_monotone_in_t_and_inverse_q(t in 0.0f64..15.0, dt in 0.0f64..3.0, q in 20.0f64..150.0, dq in 0.0f64..50.0) {
        let p = ProcessParams::default();
        let cfg = RenewalSeriesConfig::default();
        let pol = PolicyParams::new(100.0, 50.0, q).unwrap();
        let big_q = PolicyParams::new(100.0, 50.0, q + dq).unwrap();
        let r = passage::expected_renewals(&p, &pol, t, &cfg).unwrap();
        prop_assert!(passage::expected_renewals(&p, &pol, t + dt, &cfg).unwrap() >= r - 1e-12);
        prop_assert!(passage::expected_renewals(&p, &big_q, t, &cfg).unwrap() <= r + 1e-12);
        let i = passage::expected_integrated_renewals(&p, &pol, t, &cfg).unwrap();
        prop_assert!(i >= 0.0);
        prop_assert!(passage::expected_integrated_renewals(&p, &pol, t + dt, &cfg).unwrap() >= i - 1e-12);
    }

    #[test]
    fn spike_window_forecast_bounded(base in 0.0f64..20.0, spike in 1.0f64..60.0, pos in 0usize..12) {
        let mut window = vec![base; 12];
        window[pos] += spike;
        let max = base + spike;
        let f = rolling_forecast(&[window.clone(), vec![0.0]].concat(), 12, 13, 13, &ArimaSearch::default()).unwrap();
        prop_assert!(f[0] <= max + 1e-9, "window {:?} forecast {}", window, f[0]);
    }
}
