//! Acceptance suite: one test per numbered criterion, each printing a
//! PASS/FAIL line with the measured quantities. Tolerances are pinned in
//! the assertions. Run with `cargo test --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::time::{Duration, Instant};

use rand::Rng;

use unidecon::censor::{to_current_status, to_interval_censoring};
use unidecon::dist::sample_fixed;
use unidecon::mc::{
    an_bn_diagnostics, c_e_fixed, c_e_mixed, simulate_variance_curve, theory_curve_conjecture,
    theory_curve_mixed, NoiseModel, SimConfig, CHERNOFF_VARIANCE,
};
use unidecon::mle::{
    brute_force_mle, cusum_pava_mle, fenchel_check, icm_solve_fixed, icm_solve_mixed, IcmConfig,
};
use unidecon::smoothfn::{
    kernel_cdf_estimate, kernel_constants, mean_estimate, plugin_variance_mean, score_residual,
    score_theta, smooth_variance_mean, KernelSpec, SmoothFunctional,
};
use unidecon::{DistributionModel, ObservationSet, SeedSpec};

fn truncexp(upper: f64) -> DistributionModel {
    DistributionModel::truncated_exponential(upper).unwrap()
}

fn uniform02() -> DistributionModel {
    DistributionModel::uniform(0.0, 2.0).unwrap()
}

fn figure_grid() -> Vec<f64> {
    (1..=19).map(|i| 0.1 * i as f64).collect()
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn assert_runtime(criterion: &str, elapsed: Duration, limit: Duration) {
    assert!(
        elapsed <= limit,
        "{criterion}: runtime {elapsed:?} exceeded the limit {limit:?}"
    );
}

#[test]
fn acceptance_01_mean_functional_variance() {
    let start = Instant::now();
    let value = smooth_variance_mean(&truncexp(2.0)).unwrap();
    let elapsed = start.elapsed();
    let err = (value - 0.357915).abs();
    println!(
        "criterion 1: {} — smooth_variance_mean(truncexp[0,2]) = {value:.8} (|err| = {err:.2e}, limit 5e-5), {elapsed:?}",
        if err <= 5e-5 { "PASS" } else { "FAIL" }
    );
    assert!(err <= 5e-5, "variance {value} off by {err}");
    assert_runtime("criterion 1", elapsed, Duration::from_secs(1));
}

/// Beta-function evaluation of the triweight moments with exact integer
/// arithmetic — independent of the quadrature under test.
/// ∫K² = (35/32)² 2^{13}(6!)²/13! and ∫(K')² = (105/16)² B(3/2, 5) with
/// B(3/2, 5) = Γ(3/2)Γ(5)/Γ(13/2) = 768/10395.
fn triweight_moment_oracles() -> (f64, f64) {
    let fact = |n: u128| -> u128 { (1..=n).product() };
    let int_k2 = (35.0f64 / 32.0).powi(2)
        * (2f64.powi(13) * (fact(6) * fact(6)) as f64 / fact(13) as f64);
    // Γ(k + 1/2) = (2k)! / (4^k k!) √π; the √π factors cancel in the ratio.
    let gamma_half = |k: u32| fact(2 * k as u128) as f64 / (4f64.powi(k as i32) * fact(k as u128) as f64);
    let beta_3half_5 = gamma_half(1) * fact(4) as f64 / gamma_half(6);
    let int_kp2 = (105.0f64 / 16.0).powi(2) * beta_3half_5;
    (int_k2, int_kp2)
}

#[test]
fn acceptance_02_kernel_constants() {
    let start = Instant::now();
    let k = KernelSpec::triweight(1.0).unwrap();
    let (k2, kp2) = kernel_constants(&k);
    let (oracle_k2, oracle_kp2) = triweight_moment_oracles();
    let elapsed = start.elapsed();
    let (e1, e2) = ((k2 - oracle_k2).abs(), (kp2 - oracle_kp2).abs());
    println!(
        "criterion 2: {} — ∫K² err {e1:.2e}, ∫(K')² err {e2:.2e} (limit 1e-12), {elapsed:?}",
        if e1 <= 1e-12 && e2 <= 1e-12 { "PASS" } else { "FAIL" }
    );
    assert!((oracle_k2 - 350.0 / 429.0).abs() < 1e-15, "oracle self-check");
    assert!((oracle_kp2 - 35.0 / 11.0).abs() < 1e-14, "oracle self-check");
    assert!(e1 <= 1e-12 && e2 <= 1e-12);
    assert_runtime("criterion 2", elapsed, Duration::from_secs(1));
}

#[test]
fn acceptance_03_score_identities() {
    let start = Instant::now();
    let grid: Vec<f64> = (1..1000).map(|j| 2.0 * j as f64 / 1000.0).collect();
    let mut worst_recursion: f64 = 0.0;
    let mut worst_equation: f64 = 0.0;
    for f0 in [truncexp(2.0), uniform02()] {
        let theta = score_theta(&f0, SmoothFunctional::mean(), 2.0);
        for j in 0..=1000 {
            let x = j as f64 / 1000.0;
            for i in 1..=theta.m() {
                let delta = theta.evaluate(x + i as f64).unwrap()
                    - theta.evaluate(x + i as f64 - 1.0).unwrap();
                worst_recursion = worst_recursion.max((delta - 1.0).abs());
            }
        }
        worst_equation = worst_equation.max(score_residual(&f0, &theta, &grid).unwrap());
    }
    // Closed-form branches of the truncated-exponential mean score.
    let e = std::f64::consts::E;
    let branches = |x: f64| -> f64 {
        if x <= 1.0 {
            (2.0 * x.exp() - e * (1.0 + e)) / ((e * e - 1.0) * x.exp())
        } else if x <= 2.0 {
            ((1.0 + e * e) * x.exp() - e * e * (1.0 + e)) / ((e * e - 1.0) * x.exp())
        } else {
            (2.0 * e * e - (1.0 + e) * (3.0 - x).exp()) / (e * e - 1.0)
        }
    };
    let f0 = truncexp(2.0);
    let theta = score_theta(&f0, SmoothFunctional::mean(), 2.0);
    let mut worst_branch: f64 = 0.0;
    for j in 0..=1000 {
        let x = 3.0 * j as f64 / 1000.0;
        worst_branch = worst_branch.max((theta.evaluate(x).unwrap() - branches(x)).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst_recursion < 1e-10 && worst_equation < 1e-10 && worst_branch <= 1e-12;
    println!(
        "criterion 3: {} — recursion residual {worst_recursion:.2e}, score-equation residual {worst_equation:.2e} (limits 1e-10), branch mismatch {worst_branch:.2e} (limit 1e-12), {elapsed:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(worst_recursion < 1e-10);
    assert!(worst_equation < 1e-10);
    assert!(worst_branch <= 1e-12);
    assert_runtime("criterion 3", elapsed, Duration::from_secs(1));
}

#[test]
fn acceptance_04_solver_matches_brute_force_oracle() {
    let start = Instant::now();
    let cfg = IcmConfig::default();
    let mut rng = SeedSpec::new(4040, 0).rng();
    let mut fixed_done = 0;
    let mut worst_gap: f64 = 0.0;
    while fixed_done < 50 {
        let n = rng.random_range(3..=6);
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..2.60)).collect();
        let obs = ObservationSet::fixed(s).unwrap();
        if unidecon::censor::build_support_set(&obs)
            .map(|sup| sup.free_count() > 4 || sup.free_count() == 0)
            .unwrap_or(true)
        {
            continue;
        }
        let sol = icm_solve_fixed(&obs, &cfg).unwrap();
        assert!(sol.converged, "solver failed to converge on {:?}", obs.s_values());
        let oracle = brute_force_mle(&obs, 1e-4).unwrap();
        for (&p, &v) in oracle.points().iter().zip(oracle.values()) {
            worst_gap = worst_gap.max((sol.distribution.evaluate(p) - v).abs());
        }
        let report = fenchel_check(&sol.distribution, &obs, 1e-6).unwrap();
        assert!(report.satisfied, "certificate failed: {report:?}");
        fixed_done += 1;
    }
    let mut mixed_done = 0;
    while mixed_done < 20 {
        let n = rng.random_range(3..=5);
        let e: Vec<f64> = (0..n).map(|_| rng.random_range(0.4..1.6)).collect();
        let s: Vec<f64> = e
            .iter()
            .map(|&ei| rng.random_range(0.0..2.0) + ei * rng.random_range(0.0..1.0))
            .collect();
        let obs = ObservationSet::mixed(e, s).unwrap();
        let sup = unidecon::censor::SupportSet::from_intervals(&obs.intervals()).unwrap();
        if sup.free_count() > 4 || sup.free_count() == 0 {
            continue;
        }
        let sol = icm_solve_mixed(&obs, &cfg).unwrap();
        assert!(sol.converged);
        let oracle = brute_force_mle(&obs, 1e-4).unwrap();
        for (&p, &v) in oracle.points().iter().zip(oracle.values()) {
            worst_gap = worst_gap.max((sol.distribution.evaluate(p) - v).abs());
        }
        let report = fenchel_check(&sol.distribution, &obs, 1e-6).unwrap();
        assert!(report.satisfied, "certificate failed: {report:?}");
        mixed_done += 1;
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 4: {} — 50 fixed + 20 mixed instances, worst coordinate gap {worst_gap:.2e} (limit 1e-3), certificates at 1e-6, {elapsed:?}",
        if worst_gap <= 1e-3 { "PASS" } else { "FAIL" }
    );
    assert!(worst_gap <= 1e-3);
    assert_runtime("criterion 4", elapsed, Duration::from_secs(60));
}

#[test]
fn acceptance_05_current_status_equivalence() {
    let start = Instant::now();
    let f0 = truncexp(1.0);
    let cfg = IcmConfig { fenchel_tolerance: 1e-10, value_floor: 1e-12, ..IcmConfig::default() };
    let mut worst: f64 = 0.0;
    for rep in 0..50u64 {
        let obs = sample_fixed(&f0, 200, SeedSpec::new(505, rep)).unwrap();
        assert!(obs.s_values().iter().all(|&s| s <= 2.0));
        let icm = icm_solve_fixed(&obs, &cfg).unwrap();
        assert!(icm.converged, "replication {rep} unconverged: {:?}", icm.fenchel);
        let pava = cusum_pava_mle(&to_current_status(&obs).unwrap()).unwrap();
        for &t in pava.points() {
            worst = worst.max((icm.distribution.evaluate(t) - pava.evaluate(t)).abs());
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 5: {} — 50 samples (n=200), worst ICM-vs-PAVA gap at common points {worst:.2e} (limit 1e-6), {elapsed:?}",
        if worst <= 1e-6 { "PASS" } else { "FAIL" }
    );
    assert!(worst <= 1e-6);
    assert_runtime("criterion 5", elapsed, Duration::from_secs(60));
}

#[test]
fn acceptance_06_first_inspection_time_is_uniform() {
    let start = Instant::now();
    let obs = sample_fixed(&uniform02(), 100_000, SeedSpec::new(606, 0)).unwrap();
    let data = to_interval_censoring(&obs, 2).unwrap();
    let mut y = data.y1().to_vec();
    y.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = y.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &v) in y.iter().enumerate() {
        ks = ks.max(((i + 1) as f64 / n - v).abs());
        ks = ks.max((v - i as f64 / n).abs());
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 6: {} — KS(y1, Uniform(0,1)) = {ks:.5} at n=10^5 (limit 0.0065), {elapsed:?}",
        if ks < 0.0065 { "PASS" } else { "FAIL" }
    );
    assert!(ks < 0.0065);
    assert_runtime("criterion 6", elapsed, Duration::from_secs(10));
}

#[test]
fn acceptance_07a_degenerate_exposure_constant_reduction() {
    let start = Instant::now();
    let fe = DistributionModel::degenerate(1.0).unwrap();
    let mut worst: f64 = 0.0;
    for f0 in [truncexp(2.0), uniform02()] {
        for &t in &figure_grid() {
            let gap = (c_e_mixed(&f0, &fe, t).unwrap() - c_e_fixed(&f0, t).unwrap()).abs();
            worst = worst.max(gap);
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 7a: {} — max |c_E_mixed(degenerate) - c_E_fixed| = {worst:.2e} (limit 1e-12), {elapsed:?}",
        if worst <= 1e-12 { "PASS" } else { "FAIL" }
    );
    assert!(worst <= 1e-12);
    assert_runtime("criterion 7a", elapsed, Duration::from_secs(1));
}

#[test]
fn acceptance_07b_theory_curves_touch_at_one() {
    let start = Instant::now();
    let f0 = uniform02();
    let conjecture = theory_curve_conjecture(&f0, &[1.0]).unwrap()[0];
    let degenerate =
        theory_curve_mixed(&f0, &DistributionModel::degenerate(1.0).unwrap(), &[1.0]).unwrap()[0];
    let elapsed = start.elapsed();
    println!(
        "criterion 7b: {} — conjecture {conjecture:.12} vs degenerate-E {degenerate:.12} at t=1 (exact equality required), {elapsed:?}",
        if conjecture == degenerate { "PASS" } else { "FAIL" }
    );
    assert_eq!(conjecture, degenerate, "curves must coincide exactly at t = 1");
    assert_runtime("criterion 7b", elapsed, Duration::from_secs(1));
}

#[test]
fn acceptance_07c_exposure_averaged_constant_oracle() {
    // As stated this criterion pins c_E(uniform[0,2], FE=U[0.5,1.5], t0=1)
    // to 16/3 = ∫_{0.5}^{1.5} 4/e² de, which treats both interval
    // probabilities as e/2 across the whole exposure range. With the model's
    // clamped distribution function both probabilities saturate at 1/2 for
    // e > 1 (1-e < 0 and 1+e > 2), giving
    //   ∫_{0.5}^{1} 4/e² de + ∫_{1}^{1.5} 4/e de = 4 + 4 ln(3/2) ≈ 5.62186,
    // so the stated value is unattainable for any implementation of the
    // exposure-averaged constant that respects the CDF clamping contract.
    // The assertion is kept as stated and fails honestly.
    let start = Instant::now();
    let value = c_e_mixed(&uniform02(), &DistributionModel::uniform(0.5, 1.5).unwrap(), 1.0)
        .unwrap();
    let gap = (value - 16.0 / 3.0).abs();
    let elapsed = start.elapsed();
    println!(
        "criterion 7c: {} — c_E = {value:.10} vs stated oracle 16/3 = {:.10} (limit 1e-8); clamped-CDF analytic value is 4 + 4 ln(3/2) = {:.10}, {elapsed:?}",
        if gap <= 1e-8 { "PASS" } else { "FAIL" },
        16.0 / 3.0,
        4.0 + 4.0 * 1.5f64.ln()
    );
    assert_runtime("criterion 7c", elapsed, Duration::from_secs(1));
    assert!(
        gap <= 1e-8,
        "c_E at the stated instance is {value}, not 16/3; see the printed analysis"
    );
}

fn curve_config(noise: NoiseModel, n: usize, replications: usize, seed: u64) -> SimConfig {
    SimConfig {
        noise,
        f0: truncexp(2.0),
        n,
        replications,
        grid: figure_grid(),
        master_seed: seed,
        solver: IcmConfig::default(),
    }
}

#[test]
fn acceptance_08_fixed_model_variance_curve() {
    let start = Instant::now();
    let cfg = curve_config(NoiseModel::Fixed, 1000, 1000, 808);
    let curve = simulate_variance_curve(&cfg).unwrap();
    assert!(!curve.flagged, "{} replications failed", curve.failures);
    // t in [0.4, 1.6] are grid indices 3..=15.
    let mut worst_ratio: f64 = 1.0;
    let mut mad_conjecture = 0.0;
    let mut mad_degenerate = 0.0;
    for i in 3..=15 {
        let ratio = curve.empirical_scaled_var[i] / curve.theory_conjecture[i];
        if (ratio - 1.0).abs() > (worst_ratio - 1.0).abs() {
            worst_ratio = ratio;
        }
        mad_conjecture += (curve.empirical_scaled_var[i] - curve.theory_conjecture[i]).abs();
        mad_degenerate += (curve.empirical_scaled_var[i] - curve.theory_mixed[i]).abs();
    }
    mad_conjecture /= 13.0;
    mad_degenerate /= 13.0;
    let elapsed = start.elapsed();
    let pass = (worst_ratio - 1.0).abs() <= 0.25 && mad_conjecture < mad_degenerate;
    println!(
        "criterion 8: {} — fixed model n=1000 R=1000: worst empirical/conjecture ratio {worst_ratio:.3} on [0.4,1.6] (band ±25%), MAD to conjecture {mad_conjecture:.4} vs degenerate-E {mad_degenerate:.4}, failures {}, {elapsed:?}",
        if pass { "PASS" } else { "FAIL" },
        curve.failures
    );
    assert!((worst_ratio - 1.0).abs() <= 0.25, "ratio {worst_ratio} outside ±25%");
    assert!(
        mad_conjecture < mad_degenerate,
        "empirical curve closer to the degenerate-E curve ({mad_conjecture} vs {mad_degenerate})"
    );
    assert_runtime("criterion 8", elapsed, Duration::from_secs(20 * 60));
}

#[test]
fn acceptance_09_mixed_model_variance_curve() {
    let start = Instant::now();
    let fe = DistributionModel::uniform(0.5, 1.5).unwrap();
    let cfg = curve_config(NoiseModel::Mixed(fe), 1000, 1000, 909);
    let curve = simulate_variance_curve(&cfg).unwrap();
    assert!(!curve.flagged, "{} replications failed", curve.failures);
    let mut worst_ratio: f64 = 1.0;
    for i in 3..=15 {
        let ratio = curve.empirical_scaled_var[i] / curve.theory_mixed[i];
        if (ratio - 1.0).abs() > (worst_ratio - 1.0).abs() {
            worst_ratio = ratio;
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 9: {} — mixed model n=1000 R=1000: worst empirical/theory ratio {worst_ratio:.3} on [0.4,1.6] (band ±25%), failures {}, {elapsed:?}",
        if (worst_ratio - 1.0).abs() <= 0.25 { "PASS" } else { "FAIL" },
        curve.failures
    );
    assert!((worst_ratio - 1.0).abs() <= 0.25, "ratio {worst_ratio} outside ±25%");
    assert_runtime("criterion 9", elapsed, Duration::from_secs(30 * 60));
}

#[test]
fn acceptance_10_rate_diagnostics_slope() {
    let start = Instant::now();
    let diag = an_bn_diagnostics(
        &truncexp(2.0),
        &[250, 500, 1000, 2000, 4000],
        0.5,
        1.0,
        200,
        1010,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let slope = diag.fitted_slope_bn;
    let pass = (-0.85..=-0.50).contains(&slope);
    println!(
        "criterion 10: {} — fitted B_n slope {slope:.3} (band [-0.85, -0.50], target -2/3), A_n slope {:.3}, medians {:?}, skipped {:?}, {elapsed:?}",
        if pass { "PASS" } else { "FAIL" },
        diag.fitted_slope_an,
        diag.median_abs_bn,
        diag.skipped
    );
    assert!(pass, "B_n slope {slope} outside [-0.85, -0.50]");
    assert_runtime("criterion 10", elapsed, Duration::from_secs(15 * 60));
}

#[test]
fn acceptance_11_smoothed_cdf_variance() {
    let start = Instant::now();
    let f0 = truncexp(2.0);
    let (n, reps, t, h) = (10_000usize, 500u64, 1.0, 0.3);
    let k = KernelSpec::triweight(h).unwrap();
    let cfg = IcmConfig::default();
    let values: Vec<Option<f64>> = run_parallel(reps, |rep| {
        let obs = sample_fixed(&f0, n, SeedSpec::new(1111, rep)).ok()?;
        let sol = icm_solve_fixed(&obs, &cfg).ok()?;
        if !sol.converged {
            return None;
        }
        Some(kernel_cdf_estimate(&sol.distribution, &k, t))
    });
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    assert!(ok.len() as u64 >= reps - reps / 100, "too many failures: {}", reps - ok.len() as u64);
    let scaled = n as f64 * h * sample_variance(&ok);
    let target = f0.cdf(t) * (1.0 - f0.cdf(t)) * 350.0 / 429.0;
    let ratio = scaled / target;
    let elapsed = start.elapsed();
    println!(
        "criterion 11: {} — (nh)·Var of the smoothed CDF at t=1, h=0.3: {scaled:.5} vs theory {target:.5} (ratio {ratio:.3}, band ±20%), {elapsed:?}",
        if (ratio - 1.0).abs() <= 0.20 { "PASS" } else { "FAIL" }
    );
    assert!((ratio - 1.0).abs() <= 0.20, "ratio {ratio} outside ±20%");
    assert_runtime("criterion 11", elapsed, Duration::from_secs(20 * 60));
}

#[test]
fn acceptance_12_mean_functional_clt() {
    let start = Instant::now();
    let f0 = truncexp(2.0);
    let (n, reps) = (5000usize, 2000u64);
    let cfg = IcmConfig::default();
    let results: Vec<Option<(f64, f64)>> = run_parallel(reps, |rep| {
        let obs = sample_fixed(&f0, n, SeedSpec::new(1212, rep)).ok()?;
        let sol = icm_solve_fixed(&obs, &cfg).ok()?;
        if !sol.converged {
            return None;
        }
        let mean = mean_estimate(&sol.distribution).value;
        let plug = plugin_variance_mean(&sol.distribution);
        Some((mean, plug))
    });
    let ok: Vec<(f64, f64)> = results.iter().flatten().copied().collect();
    assert!(ok.len() as u64 >= reps - reps / 100, "too many failures: {}", reps - ok.len() as u64);
    let means: Vec<f64> = ok.iter().map(|r| r.0).collect();
    let scaled_var = n as f64 * sample_variance(&means);
    let med_plugin = median(ok.iter().map(|r| r.1).collect());
    let (r1, r2) = (scaled_var / 0.357915, med_plugin / 0.357915);
    let elapsed = start.elapsed();
    let pass = (r1 - 1.0).abs() <= 0.10 && (r2 - 1.0).abs() <= 0.10;
    println!(
        "criterion 12: {} — n·Var(mean) = {scaled_var:.5} (ratio {r1:.3}), median plug-in = {med_plugin:.5} (ratio {r2:.3}); both bands ±10% of 0.357915, {elapsed:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!((r1 - 1.0).abs() <= 0.10, "empirical variance ratio {r1} outside ±10%");
    assert!((r2 - 1.0).abs() <= 0.10, "plug-in median ratio {r2} outside ±10%");
    assert_runtime("criterion 12", elapsed, Duration::from_secs(25 * 60));
}

#[cfg(feature = "parallel")]
fn run_parallel<T: Send>(reps: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..reps).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_parallel<T>(reps: u64, f: impl Fn(u64) -> T) -> Vec<T> {
    (0..reps).map(f).collect()
}

#[test]
fn acceptance_scaling_note() {
    // The full-scale figures (n = 10,000 with 10,000 replications) are
    // reproducible with the same engine by raising n and replications in
    // the configs above; criteria 8-9 are the desk-scale substitutes.
    println!(
        "note: desk-scale criteria use the Chernoff constant {CHERNOFF_VARIANCE}; full-scale runs only change n and replications"
    );
}
