//! Small-scale channel draws and the projected uplink training statistics.
//!
//! Training observations are synthesized after pilot projection: for phase 1
//! `y' = τ1 g + n` with `n ~ CN(0, τ1σ²/p_t I)`, and for phase 2
//! `y'' = τ2 h + (τ2/√α) g̃ + n` with `n ~ CN(0, τ2σ²/(p_t α) I)`. The BD pilot
//! is fixed to 1. The pilot matrices themselves are never formed.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::math::{sample_cscg_vector, ComplexVec, SimRng};
use crate::num::Real;
use crate::scenario::LinkGains;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    /// AP→receiver
    pub g: Vec<ComplexVec<T>>,
    /// AP→BD
    pub f: Vec<ComplexVec<T>>,
    /// BD→receiver
    pub q: Complex<T>,
    /// cascaded `q f_m`
    pub h: Vec<ComplexVec<T>>,
}

impl<T: Real> ChannelRealization<T> {
    /// Builds the cascaded channels `h_m = q f_m` from their factors.
    pub fn from_parts(g: Vec<ComplexVec<T>>, f: Vec<ComplexVec<T>>, q: Complex<T>) -> Result<Self> {
        if g.len() != f.len() || g.iter().zip(&f).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::DimensionMismatch("direct and AP→BD channels differ in shape".into()));
        }
        let h = f.iter().map(|fm| fm.scale_complex(q)).collect();
        Ok(ChannelRealization { g, f, q, h })
    }

    pub fn num_aps(&self) -> usize {
        self.g.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingPhase {
    Direct,
    Cascaded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingObservation<T> {
    pub y: ComplexVec<T>,
    pub phase: TrainingPhase,
}

/// `g_m ~ CN(0, b_m I)`, `f_m ~ CN(0, ζ_m I)`, `q ~ CN(0, υ)`, all independent.
pub fn sample_realization<T: Real>(
    gains: &LinkGains<T>,
    antennas: usize,
    rng: &mut SimRng,
) -> Result<ChannelRealization<T>> {
    let mut g = Vec::with_capacity(gains.num_aps());
    let mut f = Vec::with_capacity(gains.num_aps());
    for (&b, &zeta) in gains.b().iter().zip(gains.zeta()) {
        g.push(sample_cscg_vector(antennas, b, rng)?);
        f.push(sample_cscg_vector(antennas, zeta, rng)?);
    }
    let q = rng.cscg(gains.upsilon());
    ChannelRealization::from_parts(g, f, q)
}

fn check_powers<T: Real>(p_t: T, sigma2: T) -> Result<()> {
    if !(p_t > T::zero()) || !p_t.is_finite() {
        return Err(Error::invalid("p_t", format!("must be finite and > 0, got {p_t}")));
    }
    if !(sigma2 >= T::zero()) || !sigma2.is_finite() {
        return Err(Error::invalid("sigma2", format!("must be finite and >= 0, got {sigma2}")));
    }
    Ok(())
}

fn add_noise<T: Real>(mut y: ComplexVec<T>, variance: T, rng: &mut SimRng) -> ComplexVec<T> {
    for z in &mut y.0 {
        *z = *z + rng.cscg(variance);
    }
    y
}

/// Phase-1 statistic `τ1 g_m + n`, `n ~ CN(0, (τ1σ²/p_t) I)`.
pub fn phase1_observation<T: Real>(
    g_m: &ComplexVec<T>,
    tau1: usize,
    p_t: T,
    sigma2: T,
    rng: &mut SimRng,
) -> Result<TrainingObservation<T>> {
    if tau1 == 0 {
        return Err(Error::invalid("tau1", "must be >= 1"));
    }
    check_powers(p_t, sigma2)?;
    let tau = T::lit(tau1 as f64);
    let y = add_noise(g_m.scale(tau), tau * sigma2 / p_t, rng);
    Ok(TrainingObservation {
        y,
        phase: TrainingPhase::Direct,
    })
}

/// Phase-2 statistic `τ2 h_m + (τ2/√α) g̃_m + n`, `n ~ CN(0, (τ2σ²/(p_t α)) I)`,
/// where `g_err_m` is the realized phase-1 error of the same trial.
pub fn phase2_observation<T: Real>(
    h_m: &ComplexVec<T>,
    g_err_m: &ComplexVec<T>,
    tau2: usize,
    p_t: T,
    sigma2: T,
    alpha: T,
    rng: &mut SimRng,
) -> Result<TrainingObservation<T>> {
    if tau2 == 0 {
        return Err(Error::invalid("tau2", "must be >= 1"));
    }
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(Error::invalid(
            "alpha",
            format!("cascaded training needs alpha in (0, 1], got {alpha}"),
        ));
    }
    if h_m.len() != g_err_m.len() {
        return Err(Error::DimensionMismatch("h_m and g_err_m lengths differ".into()));
    }
    check_powers(p_t, sigma2)?;
    let tau = T::lit(tau2 as f64);
    let clean = &h_m.scale(tau) + &g_err_m.scale(tau / alpha.sqrt());
    let y = add_noise(clean, tau * sigma2 / (p_t * alpha), rng);
    Ok(TrainingObservation {
        y,
        phase: TrainingPhase::Cascaded,
    })
}
