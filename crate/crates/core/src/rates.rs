//! Achievable primary/secondary rates, in bits per channel use.
//!
//! Perfect-CSI rates evaluate the true channels; the imperfect-CSI rates are
//! Jensen lower bounds that move the estimation-error expectation into the
//! denominator through the aggregate error-plus-noise term `E`. The
//! empirical resamplers evaluate the un-bounded expectation by Monte Carlo
//! and exist to check the bounds.

use rand_distr::{Distribution, Exp1};

use crate::beamforming::BeamformerSet;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::estimation::{cascaded_error_variance, direct_error_variance, ChannelEstimate};
use crate::math::{beamformed_sum, ergodic_rayleigh_rate, sample_cscg_vector, ComplexVec, SimRng};
use crate::num::Real;
use crate::scenario::{LinkBudget, LinkGains};

pub const MIN_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RatePair<T> {
    pub primary: T,
    pub secondary: T,
}

/// Aggregate estimation-error-plus-noise power normalized by `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseErrorTerm<T>(T);

impl<T: Real> NoiseErrorTerm<T> {
    pub fn new(value: T) -> Result<Self> {
        if !(value > T::zero()) || !value.is_finite() {
            return Err(Error::invalid("E", format!("must be finite and > 0, got {value}")));
        }
        Ok(NoiseErrorTerm(value))
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// Mean of a Monte Carlo rate estimate together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRate<T> {
    pub mean: T,
    pub stderr: T,
}

/// `p|Σ g^H w|² / (pα|q|²|Σ f^H w|² + σ²)`
pub fn primary_sinr_perfect<T: Real>(
    realization: &ChannelRealization<T>,
    weights: &BeamformerSet<T>,
    p: T,
    alpha: T,
    sigma2: T,
) -> Result<T> {
    let direct = beamformed_sum(&realization.g, &weights.w)?.norm_sqr();
    let reflected = beamformed_sum(&realization.f, &weights.w)?.norm_sqr();
    Ok(p * direct / (p * alpha * realization.q.norm_sqr() * reflected + sigma2))
}

pub fn primary_rate_perfect<T: Real>(sinr: T) -> T {
    (T::one() + sinr).log2()
}

/// Ergodic backscatter rate with `β = pα|q|²|Σ f^H w|²/σ²`.
pub fn secondary_rate_perfect<T: Real>(
    realization: &ChannelRealization<T>,
    weights: &BeamformerSet<T>,
    p: T,
    alpha: T,
    sigma2: T,
) -> Result<T> {
    let reflected = beamformed_sum(&realization.f, &weights.w)?.norm_sqr();
    let beta = p * alpha * realization.q.norm_sqr() * reflected / sigma2;
    ergodic_rayleigh_rate(beta)
}

/// `Σ_m [b_m/(1+e1 b_m) + α R_h̃,m] + σ²/p`
pub fn noise_error_term<T: Real>(gains: &LinkGains<T>, budget: &LinkBudget<T>) -> Result<NoiseErrorTerm<T>> {
    let LinkBudget { alpha, e1, e2, .. } = *budget;
    let errors: T = gains
        .b()
        .iter()
        .zip(gains.epsilon())
        .map(|(&b, &eps)| direct_error_variance(b, e1) + alpha * cascaded_error_variance(eps, b, e1, e2, alpha))
        .sum();
    NoiseErrorTerm::new(errors + budget.inverse_snr())
}

/// `log₂(1 + |Σ ĝ^H w|² / (E + α|Σ ĥ^H w|²))`
pub fn primary_rate_bound<T: Real>(
    est: &ChannelEstimate<T>,
    bf: &BeamformerSet<T>,
    e: NoiseErrorTerm<T>,
    alpha: T,
) -> Result<T> {
    let direct = beamformed_sum(&est.g_hat, &bf.w)?.norm_sqr();
    let reflected = beamformed_sum(&est.h_hat, &bf.w)?.norm_sqr();
    Ok((T::one() + direct / (e.value() + alpha * reflected)).log2())
}

/// Ergodic rate at `β_c = α|Σ ĥ^H w|² / E`.
pub fn secondary_rate_bound<T: Real>(
    est: &ChannelEstimate<T>,
    bf: &BeamformerSet<T>,
    e: NoiseErrorTerm<T>,
    alpha: T,
) -> Result<T> {
    let reflected = beamformed_sum(&est.h_hat, &bf.w)?.norm_sqr();
    ergodic_rayleigh_rate(alpha * reflected / e.value())
}

// Σ_m Σ_l w_m^H (g̃_m g̃_l^H + α h̃_m h̃_l^H) w_l, kept as the full double sum.
fn error_power<T: Real>(g_err: &[ComplexVec<T>], h_err: &[ComplexVec<T>], w: &[ComplexVec<T>], alpha: T) -> Result<T> {
    let proj_g = w.iter().zip(g_err).map(|(w, g)| w.dot(g)).collect::<Result<Vec<_>>>()?;
    let proj_h = w.iter().zip(h_err).map(|(w, h)| w.dot(h)).collect::<Result<Vec<_>>>()?;
    let mut total = T::zero();
    for m in 0..w.len() {
        for l in 0..w.len() {
            total = total + (proj_g[m] * proj_g[l].conj()).re + alpha * (proj_h[m] * proj_h[l].conj()).re;
        }
    }
    Ok(total)
}

struct Resampler<'a, T> {
    est: &'a ChannelEstimate<T>,
    g_err: Vec<ComplexVec<T>>,
    h_err: Vec<ComplexVec<T>>,
}

impl<'a, T: Real> Resampler<'a, T> {
    fn new(est: &'a ChannelEstimate<T>) -> Self {
        Resampler {
            est,
            g_err: Vec::with_capacity(est.num_aps()),
            h_err: Vec::with_capacity(est.num_aps()),
        }
    }

    fn redraw(&mut self, rng: &mut SimRng) -> Result<()> {
        self.g_err.clear();
        self.h_err.clear();
        for m in 0..self.est.num_aps() {
            let n = self.est.g_hat[m].len();
            self.g_err.push(sample_cscg_vector(n, self.est.var_g_err[m], rng)?);
            self.h_err.push(sample_cscg_vector(n, self.est.var_h_err[m], rng)?);
        }
        Ok(())
    }
}

fn check_resamples(n: usize) -> Result<()> {
    if n < MIN_RESAMPLES {
        return Err(Error::invalid(
            "n_resamples",
            format!("need at least {MIN_RESAMPLES}, got {n}"),
        ));
    }
    Ok(())
}

fn mean_and_stderr<T: Real>(samples: &[T]) -> EmpiricalRate<T> {
    let n = T::lit(samples.len() as f64);
    let mean = samples.iter().copied().sum::<T>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|&s| (s - mean) * (s - mean)).sum::<T>() / (n - T::one())
    } else {
        T::zero()
    };
    EmpiricalRate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

/// `E[log₂(1+γ_s)]` over redrawn estimation errors with `ĝ`, `ĥ` held fixed.
pub fn empirical_primary_rate<T: Real>(
    est: &ChannelEstimate<T>,
    bf: &BeamformerSet<T>,
    budget: &LinkBudget<T>,
    rng: &mut SimRng,
    n_resamples: usize,
) -> Result<EmpiricalRate<T>> {
    check_resamples(n_resamples)?;
    let alpha = budget.alpha;
    let signal = beamformed_sum(&est.g_hat, &bf.w)?.norm_sqr();
    let interference = alpha * beamformed_sum(&est.h_hat, &bf.w)?.norm_sqr();
    let noise = budget.inverse_snr();
    let mut resampler = Resampler::new(est);
    let mut samples = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        resampler.redraw(rng)?;
        let err = error_power(&resampler.g_err, &resampler.h_err, &bf.w, alpha)?;
        samples.push((T::one() + signal / (err + interference + noise)).log2());
    }
    Ok(mean_and_stderr(&samples))
}

/// `E[log₂(1+γ_c)]` over redrawn errors and `|s|² ~ Exp(1)`.
pub fn empirical_secondary_rate<T: Real>(
    est: &ChannelEstimate<T>,
    bf: &BeamformerSet<T>,
    budget: &LinkBudget<T>,
    rng: &mut SimRng,
    n_resamples: usize,
) -> Result<EmpiricalRate<T>> {
    check_resamples(n_resamples)?;
    let alpha = budget.alpha;
    let signal = alpha * beamformed_sum(&est.h_hat, &bf.w)?.norm_sqr();
    let noise = budget.inverse_snr();
    let mut resampler = Resampler::new(est);
    let mut samples = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        resampler.redraw(rng)?;
        let err = error_power(&resampler.g_err, &resampler.h_err, &bf.w, alpha)?;
        let s2: f64 = Exp1.sample(rng);
        samples.push((T::one() + signal * T::lit(s2) / (err + noise)).log2());
    }
    Ok(mean_and_stderr(&samples))
}

/// Training-overhead discount `(T - τ1 - τ2) / T`.
pub fn throughput_factor<T: Real>(frame_length: usize, tau1: usize, tau2: usize) -> Result<T> {
    if frame_length <= tau1 + tau2 {
        return Err(Error::invalid("frame_length", "must exceed tau1 + tau2"));
    }
    Ok(T::lit((frame_length - tau1 - tau2) as f64 / frame_length as f64))
}
