//! Two-phase LMMSE estimation of the direct and cascaded channels.
//!
//! Every covariance involved is a multiple of the identity, so both
//! estimators reduce to one real coefficient applied to the projected
//! training statistic.

use crate::channel::{phase1_observation, phase2_observation, ChannelRealization, TrainingObservation, TrainingPhase};
use crate::error::{Error, Result};
use crate::math::{ComplexVec, SimRng};
use crate::num::Real;
use crate::scenario::{LinkBudget, LinkGains};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate<T> {
    pub g_hat: Vec<ComplexVec<T>>,
    pub h_hat: Vec<ComplexVec<T>>,
    /// realized `g_m - ĝ_m`
    pub g_err: Vec<ComplexVec<T>>,
    /// realized `h_m - ĥ_m`
    pub h_err: Vec<ComplexVec<T>>,
    /// per-entry model variance of `g̃_m`
    pub var_g_err: Vec<T>,
    /// per-entry model variance of `h̃_m`
    pub var_h_err: Vec<T>,
    pub e1: T,
    pub e2: T,
}

impl<T: Real> ChannelEstimate<T> {
    pub fn num_aps(&self) -> usize {
        self.g_hat.len()
    }
}

fn expect_phase<T>(obs: &TrainingObservation<T>, phase: TrainingPhase) -> Result<()> {
    if obs.phase == phase {
        Ok(())
    } else {
        Err(Error::invalid("obs", format!("expected a {phase:?} observation, got {:?}", obs.phase)))
    }
}

/// LMMSE coefficient `p_t b / (p_t τ1 b + σ²)`.
pub fn direct_coefficient<T: Real>(b_m: T, tau1: usize, p_t: T, sigma2: T) -> T {
    p_t * b_m / (p_t * T::lit(tau1 as f64) * b_m + sigma2)
}

pub fn estimate_direct<T: Real>(
    obs: &TrainingObservation<T>,
    b_m: T,
    tau1: usize,
    p_t: T,
    sigma2: T,
) -> Result<ComplexVec<T>> {
    expect_phase(obs, TrainingPhase::Direct)?;
    Ok(obs.y.scale(direct_coefficient(b_m, tau1, p_t, sigma2)))
}

/// `b / (1 + e1 b)`
pub fn direct_error_variance<T: Real>(b: T, e1: T) -> T {
    b / (T::one() + e1 * b)
}

/// `e1 b² / (1 + e1 b)`
pub fn direct_estimate_variance<T: Real>(b: T, e1: T) -> T {
    e1 * b * b / (T::one() + e1 * b)
}

/// LMMSE coefficient `α p_t ε / (α p_t τ2 ε + p_t τ2 b/(1+e1 b) + σ²)`.
#[allow(clippy::too_many_arguments)]
pub fn cascaded_coefficient<T: Real>(eps_m: T, b_m: T, e1: T, tau2: usize, p_t: T, sigma2: T, alpha: T) -> T {
    let tau = T::lit(tau2 as f64);
    alpha * p_t * eps_m / (alpha * p_t * tau * eps_m + p_t * tau * direct_error_variance(b_m, e1) + sigma2)
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_cascaded<T: Real>(
    obs: &TrainingObservation<T>,
    eps_m: T,
    b_m: T,
    e1: T,
    tau2: usize,
    p_t: T,
    sigma2: T,
    alpha: T,
) -> Result<ComplexVec<T>> {
    expect_phase(obs, TrainingPhase::Cascaded)?;
    Ok(obs
        .y
        .scale(cascaded_coefficient(eps_m, b_m, e1, tau2, p_t, sigma2, alpha)))
}

// αe2ε + e2 b/(1+e1 b) + 1
fn cascaded_denominator<T: Real>(eps: T, b: T, e1: T, e2: T, alpha: T) -> T {
    alpha * e2 * eps + e2 * direct_error_variance(b, e1) + T::one()
}

/// `ε (e2 b/(1+e1 b) + 1) / (αe2ε + e2 b/(1+e1 b) + 1)`
pub fn cascaded_error_variance<T: Real>(eps: T, b: T, e1: T, e2: T, alpha: T) -> T {
    eps * (e2 * direct_error_variance(b, e1) + T::one()) / cascaded_denominator(eps, b, e1, e2, alpha)
}

/// `α e2 ε² / (αe2ε + e2 b/(1+e1 b) + 1)`
pub fn cascaded_estimate_variance<T: Real>(eps: T, b: T, e1: T, e2: T, alpha: T) -> T {
    alpha * e2 * eps * eps / cascaded_denominator(eps, b, e1, e2, alpha)
}

/// Runs both training phases for every AP. Phase 2 consumes the realized
/// phase-1 error of the same AP.
pub fn run_two_phase_estimation<T: Real>(
    realization: &ChannelRealization<T>,
    gains: &LinkGains<T>,
    budget: &LinkBudget<T>,
    rng: &mut SimRng,
) -> Result<ChannelEstimate<T>> {
    let m = realization.num_aps();
    if gains.num_aps() != m {
        return Err(Error::DimensionMismatch(format!(
            "{m} APs in realization, {} in gains",
            gains.num_aps()
        )));
    }
    let &LinkBudget {
        p_t,
        sigma2,
        alpha,
        tau1,
        tau2,
        e1,
        e2,
        ..
    } = budget;

    let mut est = ChannelEstimate {
        g_hat: Vec::with_capacity(m),
        h_hat: Vec::with_capacity(m),
        g_err: Vec::with_capacity(m),
        h_err: Vec::with_capacity(m),
        var_g_err: Vec::with_capacity(m),
        var_h_err: Vec::with_capacity(m),
        e1,
        e2,
    };
    for ap in 0..m {
        let b = gains.b()[ap];
        let eps = gains.epsilon()[ap];
        let g = &realization.g[ap];
        let h = &realization.h[ap];

        let obs1 = phase1_observation(g, tau1, p_t, sigma2, rng)?;
        let g_hat = estimate_direct(&obs1, b, tau1, p_t, sigma2)?;
        let g_err = g - &g_hat;

        let obs2 = phase2_observation(h, &g_err, tau2, p_t, sigma2, alpha, rng)?;
        let h_hat = estimate_cascaded(&obs2, eps, b, e1, tau2, p_t, sigma2, alpha)?;
        let h_err = h - &h_hat;

        est.var_g_err.push(direct_error_variance(b, e1));
        est.var_h_err.push(cascaded_error_variance(eps, b, e1, e2, alpha));
        est.g_hat.push(g_hat);
        est.g_err.push(g_err);
        est.h_hat.push(h_hat);
        est.h_err.push(h_err);
    }
    Ok(est)
}
