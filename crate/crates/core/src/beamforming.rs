//! Per-AP MRT and weighted-MRT transmit beamformers.

use crate::error::{Error, Result};
use crate::estimation::ChannelEstimate;
use crate::math::ComplexVec;
use crate::num::Real;

/// Below this norm the ρ-combination of two unit vectors is treated as
/// degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet<T> {
    pub w: Vec<ComplexVec<T>>,
    pub rho: T,
}

/// `v / ‖v‖`
pub fn mrt<T: Real>(v: &ComplexVec<T>) -> Result<ComplexVec<T>> {
    let norm = v.norm();
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.scale(norm.recip()))
}

/// `κ [ρ w_s + (1-ρ) w_c]` with `κ` chosen so the result has unit norm.
pub fn weighted_mrt<T: Real>(w_s: &ComplexVec<T>, w_c: &ComplexVec<T>, rho: T) -> Result<ComplexVec<T>> {
    if !(rho >= T::zero() && rho <= T::one()) {
        return Err(Error::invalid("rho", format!("must lie in [0, 1], got {rho}")));
    }
    if w_s.len() != w_c.len() {
        return Err(Error::DimensionMismatch("w_s and w_c lengths differ".into()));
    }
    if rho == T::one() {
        return Ok(w_s.clone());
    }
    if rho == T::zero() {
        return Ok(w_c.clone());
    }
    let mix = &w_s.scale(rho) + &w_c.scale(T::one() - rho);
    let norm = mix.norm();
    if norm < T::lit(DEGENERATE_NORM) {
        return Err(Error::DegenerateCombination {
            norm: norm.to_f64_lossy(),
        });
    }
    Ok(mix.scale(norm.recip()))
}

/// Builds every AP's beamformer from its own `ĝ_m`, `ĥ_m` only.
pub fn build_beamformer_set<T: Real>(est: &ChannelEstimate<T>, rho: T) -> Result<BeamformerSet<T>> {
    build_from_channels(&est.g_hat, &est.h_hat, rho)
}

/// Weighted-MRT on arbitrary direct/cascaded channel lists.
pub fn build_from_channels<T: Real>(
    direct: &[ComplexVec<T>],
    cascaded: &[ComplexVec<T>],
    rho: T,
) -> Result<BeamformerSet<T>> {
    if direct.len() != cascaded.len() {
        return Err(Error::DimensionMismatch("direct and cascaded AP counts differ".into()));
    }
    let w = direct
        .iter()
        .zip(cascaded)
        .enumerate()
        .map(|(ap, (g, h))| {
            let tag = |e: Error| Error::Beamformer {
                ap,
                source: Box::new(e),
            };
            let w_s = mrt(g).map_err(tag)?;
            let w_c = mrt(h).map_err(tag)?;
            weighted_mrt(&w_s, &w_c, rho).map_err(tag)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BeamformerSet { w, rho })
}
