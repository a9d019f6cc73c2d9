#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use symrad::scenario::{LinkBudget, LinkGains};

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with Kronrod and
// embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod on a finite interval.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let mut stack = vec![(a, b)];
    let (total, _) = gk15(f, a, b);
    let target = rel_tol * total.abs().max(f64::MIN_POSITIVE);
    let mut acc = 0.0;
    while let Some((lo, hi)) = stack.pop() {
        let (v, err) = gk15(f, lo, hi);
        let share = target * (hi - lo) / (b - a);
        if err <= share || hi - lo < 1e-12 * (b - a) {
            acc += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
    }
    acc
}

/// `∫₀^∞ f(x) dx` for integrands with an `e^{-x}` envelope, split into
/// decade panels and truncated at `x = 750` where `e^{-x}` underflows.
pub fn integrate_exp_tail(f: &dyn Fn(f64) -> f64, rel_tol: f64) -> f64 {
    let edges = [0.0, 1e-3, 1e-2, 0.1, 1.0, 4.0, 16.0, 64.0, 750.0];
    edges.windows(2).map(|w| integrate(f, w[0], w[1], rel_tol)).sum()
}

/// `∫₀^∞ log₂(1+βx) e^{-x} dx`.
pub fn ergodic_rate_quadrature(beta: f64) -> f64 {
    integrate_exp_tail(&|x| (beta * x).ln_1p() * (-x).exp(), 1e-13) / std::f64::consts::LN_2
}

pub fn test_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random gains with `b_m`, `ζ_m` log-uniform in `[0.1, 10]`, `υ` in
/// `[0.05, 1]` and `M` in `1..=max_aps`.
pub fn random_gains(rng: &mut impl Rng, max_aps: usize) -> LinkGains<f64> {
    let m = rng.random_range(1..=max_aps);
    let b = (0..m).map(|_| log_uniform(rng, 0.1, 10.0)).collect();
    let zeta = (0..m).map(|_| log_uniform(rng, 0.1, 10.0)).collect();
    LinkGains::new(b, zeta, log_uniform(rng, 0.05, 1.0)).unwrap()
}

/// Budget with `p/σ² = 1`, noise in `[0.1, 10]` and training energy set by
/// `enr` so that `e1 = e2 = enr`.
pub fn budget_with_enr(rng: &mut impl Rng, enr: f64, tau: usize, alpha: f64) -> LinkBudget<f64> {
    let sigma2 = log_uniform(rng, 0.1, 10.0);
    let p_t = enr * sigma2 / tau as f64;
    LinkBudget::new(sigma2, p_t, sigma2, alpha, tau, tau).unwrap()
}
