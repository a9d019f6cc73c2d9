//! Acceptance criteria, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL` line straight to stderr so it shows up even
//! when libtest captures output.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;
use symrad::beamforming::build_beamformer_set;
use symrad::channel::sample_realization;
use symrad::cli::{render_csv, LabeledRegion};
use symrad::estimation::{
    cascaded_error_variance, cascaded_estimate_variance, direct_error_variance, direct_estimate_variance,
    run_two_phase_estimation,
};
use symrad::math::{beamformed_sum, ergodic_rayleigh_rate};
use symrad::montecarlo::{run_campaign, sweep, SweepParam, SweepPoint};
use symrad::rates::{
    empirical_primary_rate, empirical_secondary_rate, noise_error_term, primary_rate_bound, primary_rate_perfect,
    primary_sinr_perfect, secondary_rate_bound, secondary_rate_perfect,
};
use symrad::{Campaign64, ScenarioConfig, SimRng};

use common::{budget_with_enr, ergodic_rate_quadrature, log_uniform, random_gains, test_rng};

fn report(id: &str, pass: bool, detail: String) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {id}: {verdict} ({detail})");
    pass
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

#[test]
fn criterion_1_ergodic_rate_matches_quadrature() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let beta = 10f64.powf(-3.0 + 6.0 * i as f64 / 999.0);
        let closed = ergodic_rayleigh_rate(beta).unwrap();
        let quad = ergodic_rate_quadrature(beta);
        worst = worst.max((closed - quad).abs() / quad);
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-8 && within(elapsed, 10);
    assert!(report(
        "1",
        pass,
        format!("max rel err {worst:.2e} over 1000 betas, {:.2}s", elapsed.as_secs_f64())
    ));
}

// Accumulates Σ|x|² and Σ|x|⁴ per AP so the standard error of the
// per-entry variance comes from the same samples.
#[derive(Clone, Default)]
struct Moments {
    n: f64,
    s1: f64,
    s2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.s1 += x;
        self.s2 += x * x;
    }

    fn mean(&self) -> f64 {
        self.s1 / self.n
    }

    fn stderr(&self) -> f64 {
        let m = self.mean();
        ((self.s2 / self.n - m * m) * self.n / (self.n - 1.0) / self.n).sqrt()
    }

    fn z(&self, expected: f64) -> f64 {
        (self.mean() - expected).abs() / self.stderr()
    }
}

#[test]
fn criterion_2_estimator_statistics() {
    let start = Instant::now();
    let cfg = ScenarioConfig {
        tau1: 10,
        tau2: 10,
        ..ScenarioConfig::default()
    };
    let campaign = Campaign64::new(&cfg).unwrap();
    let gains = campaign.gains();
    let budget = campaign.budget();
    let m = gains.num_aps();

    // g_hat, g_err, h_hat, h_err powers, then Re/Im of the normalized
    // ĝ·conj(g̃) cross moment.
    let mut power = vec![vec![Moments::default(); 4]; m];
    let mut cross = vec![vec![Moments::default(); 2]; m];
    let scale: Vec<f64> = (0..m)
        .map(|i| {
            (direct_estimate_variance(gains.b()[i], budget.e1) * direct_error_variance(gains.b()[i], budget.e1)).sqrt()
        })
        .collect();

    for trial in 0..100_000 {
        let mut rng = SimRng::for_trial(cfg.seed, trial);
        let r = sample_realization(gains, cfg.antennas_per_ap, &mut rng).unwrap();
        let est = run_two_phase_estimation(&r, gains, budget, &mut rng).unwrap();
        for ap in 0..m {
            for k in 0..cfg.antennas_per_ap {
                let vals = [est.g_hat[ap][k], est.g_err[ap][k], est.h_hat[ap][k], est.h_err[ap][k]];
                for (acc, v) in power[ap].iter_mut().zip(vals) {
                    acc.push(v.norm_sqr());
                }
                let c = est.g_hat[ap][k] * est.g_err[ap][k].conj() / scale[ap];
                cross[ap][0].push(c.re);
                cross[ap][1].push(c.im);
            }
        }
    }

    let mut worst_var: f64 = 0.0;
    let mut worst_corr: f64 = 0.0;
    for ap in 0..m {
        let (b, eps) = (gains.b()[ap], gains.epsilon()[ap]);
        let expected = [
            direct_estimate_variance(b, budget.e1),
            direct_error_variance(b, budget.e1),
            cascaded_estimate_variance(eps, b, budget.e1, budget.e2, budget.alpha),
            cascaded_error_variance(eps, b, budget.e1, budget.e2, budget.alpha),
        ];
        for (acc, e) in power[ap].iter().zip(expected) {
            worst_var = worst_var.max(acc.z(e));
        }
        for acc in &cross[ap] {
            worst_corr = worst_corr.max(acc.z(0.0));
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_var <= 5.0 && worst_corr <= 5.0 && within(elapsed, 60);
    assert!(report(
        "2",
        pass,
        format!(
            "max |z| variances {worst_var:.2}, correlation {worst_corr:.2}, {:.1}s",
            elapsed.as_secs_f64()
        )
    ));
}

#[test]
fn criterion_3_variance_decompositions() {
    let mut rng = test_rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let b = log_uniform(&mut rng, 1e-14, 1e2);
        let eps = log_uniform(&mut rng, 1e-18, 1e2);
        let e1 = log_uniform(&mut rng, 1e-2, 1e16);
        let e2 = log_uniform(&mut rng, 1e-2, 1e16);
        let alpha = rng.random_range(0.01..=1.0);
        let direct = direct_estimate_variance(b, e1) + direct_error_variance(b, e1);
        let cascaded =
            cascaded_estimate_variance(eps, b, e1, e2, alpha) + cascaded_error_variance(eps, b, e1, e2, alpha);
        worst = worst.max((direct - b).abs() / b).max((cascaded - eps).abs() / eps);
    }
    assert!(report("3", worst <= 1e-12, format!("max rel err {worst:.2e} over 10^4 tuples")));
}

#[test]
fn criterion_4_jensen_bounds_hold() {
    let start = Instant::now();
    let mut rng = test_rng(4);
    let mut worst_primary = f64::INFINITY;
    let mut worst_secondary = f64::INFINITY;
    for s in 0..100u64 {
        let gains = random_gains(&mut rng, 4);
        let n = rng.random_range(1..=4);
        let alpha = rng.random_range(0.2..=1.0);
        let enr = log_uniform(&mut rng, 0.3, 30.0);
        let tau = rng.random_range(1..=20);
        let budget = budget_with_enr(&mut rng, enr, tau, alpha);
        let rho = rng.random_range(0.0..=1.0);

        let mut sim = SimRng::new(1000 + s);
        let r = sample_realization(&gains, n, &mut sim).unwrap();
        let est = run_two_phase_estimation(&r, &gains, &budget, &mut sim).unwrap();
        let bf = build_beamformer_set(&est, rho).unwrap();
        let e = noise_error_term(&gains, &budget).unwrap();

        let bound_p = primary_rate_bound(&est, &bf, e, alpha).unwrap();
        let bound_s = secondary_rate_bound(&est, &bf, e, alpha).unwrap();
        let emp_p = empirical_primary_rate(&est, &bf, &budget, &mut sim, 10_000).unwrap();
        let emp_s = empirical_secondary_rate(&est, &bf, &budget, &mut sim, 10_000).unwrap();
        // margin in standard errors; must stay above -3
        worst_primary = worst_primary.min((emp_p.mean - bound_p) / emp_p.stderr);
        worst_secondary = worst_secondary.min((emp_s.mean - bound_s) / emp_s.stderr);
    }
    let elapsed = start.elapsed();
    let pass = worst_primary >= -3.0 && worst_secondary >= -3.0 && within(elapsed, 300);
    assert!(report(
        "4",
        pass,
        format!(
            "min (empirical - bound)/stderr: primary {worst_primary:.2}, secondary {worst_secondary:.2}, {:.1}s",
            elapsed.as_secs_f64()
        )
    ));
}

#[test]
fn criterion_5_perfect_csi_limit() {
    const REALIZATIONS: usize = 200;
    let mut rng = test_rng(5);
    let mut worst: f64 = 0.0;
    for s in 0..50u64 {
        let gains = random_gains(&mut rng, 6);
        let n = rng.random_range(1..=4);
        let alpha = rng.random_range(0.2..=1.0);
        let tau = rng.random_range(1..=100);
        let budget = budget_with_enr(&mut rng, 1e10, tau, alpha);
        let e = noise_error_term(&gains, &budget).unwrap();

        // [primary bound, primary perfect, secondary bound, secondary perfect] per ρ,
        // averaged over realizations like every reported rate
        let mut sums = [[0.0f64; 4]; 11];
        for t in 0..REALIZATIONS {
            let mut sim = SimRng::for_trial(5000 + s, t);
            let r = sample_realization(&gains, n, &mut sim).unwrap();
            let est = run_two_phase_estimation(&r, &gains, &budget, &mut sim).unwrap();
            for (k, acc) in sums.iter_mut().enumerate() {
                let bf = build_beamformer_set(&est, k as f64 / 10.0).unwrap();
                let sinr = primary_sinr_perfect(&r, &bf, budget.p, alpha, budget.sigma2).unwrap();
                acc[0] += primary_rate_bound(&est, &bf, e, alpha).unwrap();
                acc[1] += primary_rate_perfect(sinr);
                acc[2] += secondary_rate_bound(&est, &bf, e, alpha).unwrap();
                acc[3] += secondary_rate_perfect(&r, &bf, budget.p, alpha, budget.sigma2).unwrap();
            }
        }
        for acc in &sums {
            worst = worst.max((acc[0] - acc[1]).abs() / acc[1]).max((acc[2] - acc[3]).abs() / acc[3]);
        }
    }
    assert!(report(
        "5",
        worst <= 1e-3,
        format!("max rel gap {worst:.2e} over 50 scenarios x 11 rho, {REALIZATIONS} realizations each")
    ));
}

fn desk_scale(tau1: usize, tau2: usize) -> ScenarioConfig {
    ScenarioConfig {
        num_trials: 200,
        tau1,
        tau2,
        ..ScenarioConfig::default()
    }
}

fn rho_index(point: &SweepPoint<f64>, rho: f64) -> usize {
    point
        .region
        .rho_grid
        .iter()
        .position(|&r| (r - rho).abs() < 1e-12)
        .unwrap()
}

// (mean, stderr) of the primary and secondary bounds at ρ.
fn bounds_at(point: &SweepPoint<f64>, rho: f64) -> [(f64, f64); 2] {
    let i = rho_index(point, rho);
    let r = &point.region;
    [
        (r.primary_bound.mean[i], r.primary_bound.stderr[i]),
        (r.secondary_bound.mean[i], r.secondary_bound.stderr[i]),
    ]
}

fn separated(lo: (f64, f64), hi: (f64, f64)) -> f64 {
    (hi.0 - lo.0) / (lo.1 * lo.1 + hi.1 * hi.1).sqrt()
}

#[test]
fn criterion_6_first_phase_training_shape() {
    let start = Instant::now();
    let pts = sweep::<f64>(&desk_scale(100, 100), SweepParam::Tau1, &[1.0, 10.0, 100.0], 0).unwrap();
    let reference = bounds_at(&pts[2], 0.0)[1].0;
    let near_zero = pts[0].region.secondary_bound.mean.iter().fold(0.0f64, |a, &v| a.max(v)) / reference;

    let mut min_sep = f64::INFINITY;
    for rho in [0.0, 0.5] {
        for w in pts.windows(2) {
            let (lo, hi) = (bounds_at(&w[0], rho), bounds_at(&w[1], rho));
            for k in 0..2 {
                min_sep = min_sep.min(separated(lo[k], hi[k]));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = near_zero <= 0.05 && min_sep >= 3.0 && within(elapsed, 120);
    assert!(report(
        "6",
        pass,
        format!(
            "(a) tau1=1 secondary max / reference = {near_zero:.2e}; (b) min step {min_sep:.1} stderr; {:.1}s",
            elapsed.as_secs_f64()
        )
    ));
}

#[test]
fn criterion_7_second_phase_training_shape() {
    let tau2_sweep = sweep::<f64>(&desk_scale(100, 100), SweepParam::Tau2, &[1.0, 10.0, 100.0], 0).unwrap();
    let tau1_sweep = sweep::<f64>(&desk_scale(100, 100), SweepParam::Tau1, &[1.0, 10.0], 0).unwrap();

    let max_primary: Vec<f64> = tau2_sweep.iter().map(|p| bounds_at(p, 1.0)[0].0).collect();
    let hi = max_primary.iter().cloned().fold(f64::MIN, f64::max);
    let lo = max_primary.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (hi - lo) / lo;
    let a = spread <= 0.05;

    let min_primary: Vec<f64> = tau2_sweep.iter().map(|p| bounds_at(p, 0.0)[0].0).collect();
    let b = min_primary.windows(2).all(|w| w[1] < w[0]);

    let c = tau2_sweep.iter().zip(&tau1_sweep).all(|(large_tau1, large_tau2)| {
        let (x, y) = (bounds_at(large_tau1, 0.0), bounds_at(large_tau2, 0.0));
        x[0].0 > y[0].0 && x[1].0 > y[1].0
    });

    assert!(report(
        "7",
        a && b && c,
        format!(
            "(a) rho=1 primary spread {:.3}% [{}]; (b) rho=0 primary {:.4?} for tau2=1,10,100 [{}]; (c) [{}]",
            spread * 100.0,
            verdict(a),
            min_primary,
            verdict(b),
            verdict(c)
        )
    ));
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "violated"
    }
}

#[test]
fn criterion_8_beamformer_extremes() {
    let cfg = ScenarioConfig::default();
    let campaign = Campaign64::new(&cfg).unwrap();
    let mut worst: f64 = 0.0;
    for trial in 0..cfg.num_trials {
        let mut rng = SimRng::for_trial(cfg.seed, trial);
        let r = sample_realization(campaign.gains(), cfg.antennas_per_ap, &mut rng).unwrap();
        let est = run_two_phase_estimation(&r, campaign.gains(), campaign.budget(), &mut rng).unwrap();
        let primary = build_beamformer_set(&est, 1.0).unwrap();
        let secondary = build_beamformer_set(&est, 0.0).unwrap();
        let g_sum: f64 = est.g_hat.iter().map(|g| g.norm()).sum();
        let h_sum: f64 = est.h_hat.iter().map(|h| h.norm()).sum();
        let g_gap = (beamformed_sum(&est.g_hat, &primary.w).unwrap().norm() - g_sum).abs() / g_sum;
        let h_gap = (beamformed_sum(&est.h_hat, &secondary.w).unwrap().norm() - h_sum).abs() / h_sum;
        worst = worst.max(g_gap).max(h_gap);
    }
    assert!(report(
        "8",
        worst <= 1e-10,
        format!("max rel gap {worst:.2e} over {} trials", cfg.num_trials)
    ));
}

#[test]
fn criterion_9_determinism() {
    let cfg = ScenarioConfig {
        num_trials: 40,
        empirical_resamples: Some(1000),
        frame_length: Some(500),
        seed: 99,
        ..ScenarioConfig::default()
    };
    let csv = |workers: usize| {
        let region = run_campaign::<f64>(&cfg, workers).unwrap();
        render_csv(&[LabeledRegion::single(&region)]).unwrap()
    };
    let sweep_csv = |workers: usize| {
        let pts = sweep::<f64>(&cfg, SweepParam::Tau2, &[1.0, 50.0], workers).unwrap();
        render_csv(&LabeledRegion::from_sweep(&pts)).unwrap()
    };
    let reference = csv(1);
    let same = [2, 4, 8].iter().all(|&w| csv(w) == reference) && csv(1) == reference;
    let sweep_ref = sweep_csv(1);
    let sweep_same = sweep_csv(3) == sweep_ref;
    assert!(report(
        "9",
        same && sweep_same,
        format!("run CSV ({} bytes) and sweep CSV identical across 1/2/3/4/8 workers", reference.len())
    ));
}
