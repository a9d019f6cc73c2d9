//! Deployment geometry, large-scale gains and the validated experiment
//! configuration.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::rates::MIN_RESAMPLES;

pub type Point = [f64; 2];

/// Which channels drive the beamformers used for the perfect-CSI curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PerfectCsiBeamforming {
    /// Same estimate-derived weighted-MRT vectors as the bound curves.
    #[default]
    Estimated,
    /// Weighted-MRT rebuilt from the true `g_m`, `h_m`.
    True,
}

/// Full experiment description. Powers are in watts, distances in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_aps: usize,
    pub antennas_per_ap: usize,
    pub ap_positions: Vec<Point>,
    pub receiver_position: Point,
    pub bd_position: Point,
    pub transmit_power: f64,
    pub training_power: f64,
    pub noise_power: f64,
    pub alpha: f64,
    pub tau1: usize,
    pub tau2: usize,
    pub wavelength: f64,
    pub pathloss_exp_ap: f64,
    pub pathloss_exp_bd: f64,
    pub rho_grid: Vec<f64>,
    pub num_trials: usize,
    pub seed: u64,
    /// Side of the square deployment area used when AP positions are generated.
    pub area_side: f64,
    /// Frame length T in symbols; enables the (T-τ1-τ2)/T throughput columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_length: Option<usize>,
    /// Resample count for the empirical (non-Jensen) rate columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical_resamples: Option<usize>,
    #[serde(default)]
    pub perfect_csi_beamforming: PerfectCsiBeamforming,
}

pub const DEFAULT_GRID_SIDE: usize = 4;
pub const DEFAULT_AREA_SIDE: f64 = 750.0;
pub const DEFAULT_WAVELENGTH: f64 = 0.0857;
pub const DEFAULT_TRANSMIT_POWER: f64 = 0.1;
pub const DEFAULT_NOISE_POWER: f64 = 1e-14;

/// `0, 0.1, …, 1`.
pub fn default_rho_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            num_aps: DEFAULT_GRID_SIDE * DEFAULT_GRID_SIDE,
            antennas_per_ap: 4,
            ap_positions: grid_positions(DEFAULT_GRID_SIDE, DEFAULT_AREA_SIDE).expect("valid default grid"),
            receiver_position: [5.0, 0.0],
            bd_position: [0.0, 0.0],
            transmit_power: DEFAULT_TRANSMIT_POWER,
            training_power: DEFAULT_TRANSMIT_POWER,
            noise_power: DEFAULT_NOISE_POWER,
            alpha: 1.0,
            tau1: 100,
            tau2: 100,
            wavelength: DEFAULT_WAVELENGTH,
            pathloss_exp_ap: 2.7,
            pathloss_exp_bd: 2.1,
            rho_grid: default_rho_grid(),
            num_trials: 1000,
            seed: 0,
            area_side: DEFAULT_AREA_SIDE,
            frame_length: None,
            empirical_resamples: None,
            perfect_csi_beamforming: PerfectCsiBeamforming::Estimated,
        }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be finite and > 0, got {v}")))
    }
}

fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_aps == 0 {
            return Err(Error::config("num_aps", "must be >= 1"));
        }
        if self.antennas_per_ap == 0 {
            return Err(Error::config("antennas_per_ap", "must be >= 1"));
        }
        if self.ap_positions.len() != self.num_aps {
            return Err(Error::config(
                "ap_positions",
                format!("has {} entries but num_aps = {}", self.ap_positions.len(), self.num_aps),
            ));
        }
        positive("transmit_power", self.transmit_power)?;
        positive("training_power", self.training_power)?;
        positive("noise_power", self.noise_power)?;
        positive("wavelength", self.wavelength)?;
        positive("pathloss_exp_ap", self.pathloss_exp_ap)?;
        positive("pathloss_exp_bd", self.pathloss_exp_bd)?;
        positive("area_side", self.area_side)?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config("alpha", format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if self.tau1 == 0 {
            return Err(Error::config("tau1", "must be >= 1"));
        }
        if self.tau2 == 0 {
            return Err(Error::config("tau2", "must be >= 1"));
        }
        if self.rho_grid.is_empty() {
            return Err(Error::config("rho_grid", "must not be empty"));
        }
        if let Some(r) = self.rho_grid.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::config("rho_grid", format!("entry {r} outside [0, 1]")));
        }
        if self.num_trials == 0 {
            return Err(Error::config("num_trials", "must be >= 1"));
        }
        if let Some(t) = self.frame_length {
            if t <= self.tau1 + self.tau2 {
                return Err(Error::config("frame_length", "must exceed tau1 + tau2"));
            }
        }
        if let Some(n) = self.empirical_resamples {
            if n < MIN_RESAMPLES {
                return Err(Error::config(
                    "empirical_resamples",
                    format!("must be >= {MIN_RESAMPLES}, got {n}"),
                ));
            }
        }
        let coords = self
            .ap_positions
            .iter()
            .chain([&self.receiver_position, &self.bd_position]);
        if coords.flatten().any(|c| !c.is_finite()) {
            return Err(Error::config("ap_positions", "coordinates must be finite"));
        }
        for (m, &ap) in self.ap_positions.iter().enumerate() {
            if distance(ap, self.receiver_position) <= 0.0 {
                return Err(Error::config("ap_positions", format!("AP {m} coincides with the receiver")));
            }
            if distance(ap, self.bd_position) <= 0.0 {
                return Err(Error::config("ap_positions", format!("AP {m} coincides with the BD")));
            }
        }
        if distance(self.bd_position, self.receiver_position) <= 0.0 {
            return Err(Error::config("bd_position", "coincides with the receiver"));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding. Field order is fixed by
    /// the struct, so key order in the source file does not matter.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn budget<T: Real>(&self) -> Result<LinkBudget<T>> {
        LinkBudget::new(
            T::lit(self.transmit_power),
            T::lit(self.training_power),
            T::lit(self.noise_power),
            T::lit(self.alpha),
            self.tau1,
            self.tau2,
        )
    }
}

/// Powers, reflection coefficient and training lengths with the two
/// training ENRs computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget<T> {
    pub p: T,
    pub p_t: T,
    pub sigma2: T,
    pub alpha: T,
    pub tau1: usize,
    pub tau2: usize,
    /// `p_t τ1 / σ²`
    pub e1: T,
    /// `p_t τ2 / σ²`
    pub e2: T,
}

impl<T: Real> LinkBudget<T> {
    pub fn new(p: T, p_t: T, sigma2: T, alpha: T, tau1: usize, tau2: usize) -> Result<Self> {
        for (name, v) in [("p", p), ("p_t", p_t), ("sigma2", sigma2)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::invalid("alpha", format!("must lie in [0, 1], got {alpha}")));
        }
        if tau1 == 0 || tau2 == 0 {
            return Err(Error::invalid("tau", "training lengths must be >= 1"));
        }
        Ok(LinkBudget {
            p,
            p_t,
            sigma2,
            alpha,
            tau1,
            tau2,
            e1: p_t * T::lit(tau1 as f64) / sigma2,
            e2: p_t * T::lit(tau2 as f64) / sigma2,
        })
    }

    /// `σ²/p`
    pub fn inverse_snr(&self) -> T {
        self.sigma2 / self.p
    }
}

/// Large-scale gains: `b_m` AP→receiver, `ζ_m` AP→BD, `υ` BD→receiver and
/// the cascaded `ε_m = υ ζ_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains<T> {
    b: Vec<T>,
    zeta: Vec<T>,
    upsilon: T,
    epsilon: Vec<T>,
}

impl<T: Real> LinkGains<T> {
    pub fn new(b: Vec<T>, zeta: Vec<T>, upsilon: T) -> Result<Self> {
        if b.is_empty() || b.len() != zeta.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} direct gains vs {} AP→BD gains",
                b.len(),
                zeta.len()
            )));
        }
        let ok = |v: T| v > T::zero() && v.is_finite();
        if !b.iter().chain(&zeta).all(|&v| ok(v)) || !ok(upsilon) {
            return Err(Error::invalid("gains", "all large-scale gains must be finite and > 0"));
        }
        let epsilon = zeta.iter().map(|&z| upsilon * z).collect();
        Ok(LinkGains {
            b,
            zeta,
            upsilon,
            epsilon,
        })
    }

    pub fn num_aps(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn zeta(&self) -> &[T] {
        &self.zeta
    }

    pub fn upsilon(&self) -> T {
        self.upsilon
    }

    pub fn epsilon(&self) -> &[T] {
        &self.epsilon
    }
}

/// Evenly spaced `side_count × side_count` grid spanning a square of side
/// `area_side` centered on the origin; y-major, x ascending within a row.
pub fn grid_positions(side_count: usize, area_side: f64) -> Result<Vec<Point>> {
    if side_count == 0 {
        return Err(Error::invalid("side_count", "must be >= 1"));
    }
    if !(area_side > 0.0) || !area_side.is_finite() {
        return Err(Error::invalid("area_side", format!("must be finite and > 0, got {area_side}")));
    }
    // Outer points sit on the area boundary; a single AP lands at the origin.
    let step = if side_count > 1 { area_side / (side_count - 1) as f64 } else { 0.0 };
    let coord = |i: usize| if side_count > 1 { -area_side / 2.0 + step * i as f64 } else { 0.0 };
    Ok((0..side_count)
        .flat_map(|iy| (0..side_count).map(move |ix| [coord(ix), coord(iy)]))
        .collect())
}

/// `(λ/4π)² d^{-γ}`.
pub fn path_loss<T: Real>(distance: T, gamma: T, wavelength: T) -> Result<T> {
    if !(distance > T::zero()) || !distance.is_finite() {
        return Err(Error::invalid("distance", format!("must be finite and > 0, got {distance}")));
    }
    if !(gamma > T::zero()) {
        return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
    }
    if !(wavelength > T::zero()) {
        return Err(Error::invalid("wavelength", format!("must be > 0, got {wavelength}")));
    }
    let reference = (wavelength / (T::lit(4.0) * T::PI())).powi(2);
    Ok(reference * distance.powf(-gamma))
}

pub fn build_link_gains<T: Real>(config: &ScenarioConfig) -> Result<LinkGains<T>> {
    let lambda = T::lit(config.wavelength);
    let g_ap = T::lit(config.pathloss_exp_ap);
    let gain = |from: Point, to: Point, gamma: T| path_loss(T::lit(distance(from, to)), gamma, lambda);
    let b = config
        .ap_positions
        .iter()
        .map(|&ap| gain(ap, config.receiver_position, g_ap))
        .collect::<Result<Vec<_>>>()?;
    let zeta = config
        .ap_positions
        .iter()
        .map(|&ap| gain(ap, config.bd_position, g_ap))
        .collect::<Result<Vec<_>>>()?;
    let upsilon = gain(
        config.bd_position,
        config.receiver_position,
        T::lit(config.pathloss_exp_bd),
    )?;
    LinkGains::new(b, zeta, upsilon)
}
