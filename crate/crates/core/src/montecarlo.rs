//! Trial orchestration and rate-region aggregation.
//!
//! Each trial owns a generator keyed by the base seed on its own stream, draws one
//! channel realization, trains once, then sweeps ρ over the shared estimate.
//! Trials run on a rayon pool; results are reduced in trial-index order, so
//! the worker count never changes the output bits.

use rayon::prelude::*;

use crate::beamforming::{build_beamformer_set, build_from_channels};
use crate::channel::sample_realization;
use crate::error::{Error, Result};
use crate::estimation::run_two_phase_estimation;
use crate::math::SimRng;
use crate::num::Real;
use crate::rates::{
    empirical_primary_rate, empirical_secondary_rate, noise_error_term, primary_rate_bound, primary_rate_perfect,
    primary_sinr_perfect, secondary_rate_bound, secondary_rate_perfect, NoiseErrorTerm, RatePair,
};
use crate::scenario::{build_link_gains, grid_positions, LinkBudget, LinkGains, PerfectCsiBeamforming, ScenarioConfig};

/// Rates of one trial at one ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoOutcome<T> {
    pub rho: T,
    pub bound: RatePair<T>,
    pub perfect: RatePair<T>,
    pub empirical: Option<RatePair<T>>,
}

/// Mean and standard error of one series across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    pub mean: Vec<T>,
    pub stderr: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion<T> {
    pub rho_grid: Vec<T>,
    pub primary_bound: Series<T>,
    pub secondary_bound: Series<T>,
    pub primary_perfect: Series<T>,
    pub secondary_perfect: Series<T>,
    pub primary_empirical: Option<Series<T>>,
    pub secondary_empirical: Option<Series<T>>,
    /// `(T - τ1 - τ2)/T` when a frame length is configured.
    pub throughput_factor: Option<T>,
    pub num_trials: usize,
    pub config_digest: String,
}

/// Immutable per-campaign state shared by every trial.
#[derive(Debug, Clone)]
pub struct Campaign<T> {
    config: ScenarioConfig,
    gains: LinkGains<T>,
    budget: LinkBudget<T>,
    error_term: NoiseErrorTerm<T>,
    rho_grid: Vec<T>,
}

impl<T: Real> Campaign<T> {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let gains = build_link_gains(config)?;
        let budget = config.budget()?;
        let error_term = noise_error_term(&gains, &budget)?;
        Ok(Campaign {
            config: config.clone(),
            gains,
            budget,
            error_term,
            rho_grid: config.rho_grid.iter().map(|&r| T::lit(r)).collect(),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn gains(&self) -> &LinkGains<T> {
        &self.gains
    }

    pub fn budget(&self) -> &LinkBudget<T> {
        &self.budget
    }

    pub fn error_term(&self) -> NoiseErrorTerm<T> {
        self.error_term
    }

    /// One full generate → train → estimate → beamform → evaluate pass.
    pub fn run_trial(&self, trial: usize) -> Result<Vec<RhoOutcome<T>>> {
        let mut rng = SimRng::for_trial(self.config.seed, trial);
        let realization = sample_realization(&self.gains, self.config.antennas_per_ap, &mut rng)?;
        let est = run_two_phase_estimation(&realization, &self.gains, &self.budget, &mut rng)?;
        let LinkBudget { p, sigma2, alpha, .. } = self.budget;

        self.rho_grid
            .iter()
            .map(|&rho| {
                let tag = |e: Error| Error::Trial {
                    trial,
                    rho: rho.to_f64_lossy(),
                    source: Box::new(e),
                };
                let bf = build_beamformer_set(&est, rho).map_err(tag)?;
                let bound = RatePair {
                    primary: primary_rate_bound(&est, &bf, self.error_term, alpha).map_err(tag)?,
                    secondary: secondary_rate_bound(&est, &bf, self.error_term, alpha).map_err(tag)?,
                };
                let perfect_bf = match self.config.perfect_csi_beamforming {
                    PerfectCsiBeamforming::Estimated => bf.clone(),
                    PerfectCsiBeamforming::True => {
                        build_from_channels(&realization.g, &realization.h, rho).map_err(tag)?
                    }
                };
                let sinr = primary_sinr_perfect(&realization, &perfect_bf, p, alpha, sigma2).map_err(tag)?;
                let perfect = RatePair {
                    primary: primary_rate_perfect(sinr),
                    secondary: secondary_rate_perfect(&realization, &perfect_bf, p, alpha, sigma2).map_err(tag)?,
                };
                let empirical = match self.config.empirical_resamples {
                    Some(n) => Some(RatePair {
                        primary: empirical_primary_rate(&est, &bf, &self.budget, &mut rng, n)
                            .map_err(tag)?
                            .mean,
                        secondary: empirical_secondary_rate(&est, &bf, &self.budget, &mut rng, n)
                            .map_err(tag)?
                            .mean,
                    }),
                    None => None,
                };
                Ok(RhoOutcome {
                    rho,
                    bound,
                    perfect,
                    empirical,
                })
            })
            .collect()
    }

    /// Runs all trials on `workers` threads (0 = rayon default).
    pub fn run(&self, workers: usize) -> Result<RateRegion<T>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?;
        let results: Vec<Result<Vec<RhoOutcome<T>>>> =
            pool.install(|| (0..self.config.num_trials).into_par_iter().map(|t| self.run_trial(t)).collect());

        let total = results.len();
        let mut trials = Vec::with_capacity(total);
        let mut failures = Vec::new();
        for r in results {
            match r {
                Ok(v) => trials.push(v),
                Err(e) => failures.push(e),
            }
        }
        if let Some(first) = failures.first() {
            return Err(Error::Campaign {
                failed: failures.len(),
                total,
                first: Box::new(first.clone()),
            });
        }
        Ok(self.aggregate(&trials))
    }

    fn aggregate(&self, trials: &[Vec<RhoOutcome<T>>]) -> RateRegion<T> {
        let pick = |f: &dyn Fn(&RhoOutcome<T>) -> T| -> Series<T> {
            let (mean, stderr) = (0..self.rho_grid.len())
                .map(|k| mean_stderr(trials.iter().map(|t| f(&t[k]))))
                .unzip();
            Series { mean, stderr }
        };
        let has_empirical = self.config.empirical_resamples.is_some();
        let zero = T::zero();
        RateRegion {
            rho_grid: self.rho_grid.clone(),
            primary_bound: pick(&|o| o.bound.primary),
            secondary_bound: pick(&|o| o.bound.secondary),
            primary_perfect: pick(&|o| o.perfect.primary),
            secondary_perfect: pick(&|o| o.perfect.secondary),
            primary_empirical: has_empirical.then(|| pick(&|o| o.empirical.map_or(zero, |e| e.primary))),
            secondary_empirical: has_empirical.then(|| pick(&|o| o.empirical.map_or(zero, |e| e.secondary))),
            throughput_factor: self
                .config
                .frame_length
                .map(|t| T::lit((t - self.config.tau1 - self.config.tau2) as f64 / t as f64)),
            num_trials: trials.len(),
            config_digest: self.config.digest(),
        }
    }
}

// Sequential, order-fixed reduction.
fn mean_stderr<T: Real>(values: impl Iterator<Item = T> + Clone) -> (T, T) {
    let n = values.clone().count();
    let nf = T::lit(n as f64);
    let mean = values.clone().fold(T::zero(), |a, v| a + v) / nf;
    if n < 2 {
        return (mean, T::zero());
    }
    let ss = values.fold(T::zero(), |a, v| a + (v - mean) * (v - mean));
    let sd = (ss / (nf - T::one())).sqrt();
    (mean, sd / nf.sqrt())
}

pub fn run_trial<T: Real>(config: &ScenarioConfig, trial: usize) -> Result<Vec<RhoOutcome<T>>> {
    Campaign::new(config)?.run_trial(trial)
}

pub fn run_campaign<T: Real>(config: &ScenarioConfig, workers: usize) -> Result<RateRegion<T>> {
    Campaign::new(config)?.run(workers)
}

/// Scenario knobs a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Tau1,
    Tau2,
    NumAps,
    AntennasPerAp,
    Alpha,
    NumTrials,
    /// `p/σ² = p_t/σ²` in dB, applied by scaling both powers against σ².
    TransmitSnrDb,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Tau1 => "tau1",
            SweepParam::Tau2 => "tau2",
            SweepParam::NumAps => "num_aps",
            SweepParam::AntennasPerAp => "antennas_per_ap",
            SweepParam::Alpha => "alpha",
            SweepParam::NumTrials => "num_trials",
            SweepParam::TransmitSnrDb => "snr_db",
        }
    }

    fn integer(self, value: f64) -> Result<usize> {
        if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
            Ok(value as usize)
        } else {
            Err(Error::config(self.name(), format!("sweep value {value} is not a positive integer")))
        }
    }

    /// Copy of `base` with this parameter set to `value`, validated.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        match self {
            SweepParam::Tau1 => cfg.tau1 = self.integer(value)?,
            SweepParam::Tau2 => cfg.tau2 = self.integer(value)?,
            SweepParam::NumTrials => cfg.num_trials = self.integer(value)?,
            SweepParam::AntennasPerAp => cfg.antennas_per_ap = self.integer(value)?,
            SweepParam::NumAps => {
                let m = self.integer(value)?;
                let side = (m as f64).sqrt().round() as usize;
                if side * side != m {
                    return Err(Error::config("num_aps", format!("{m} APs do not fill a square grid")));
                }
                cfg.num_aps = m;
                cfg.ap_positions = grid_positions(side, cfg.area_side)?;
            }
            SweepParam::Alpha => cfg.alpha = value,
            SweepParam::TransmitSnrDb => {
                let linear = 10f64.powf(value / 10.0);
                cfg.transmit_power = cfg.noise_power * linear;
                cfg.training_power = cfg.noise_power * linear;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tau1" => SweepParam::Tau1,
            "tau2" => SweepParam::Tau2,
            "num_aps" | "M" => SweepParam::NumAps,
            "antennas_per_ap" | "N" => SweepParam::AntennasPerAp,
            "alpha" => SweepParam::Alpha,
            "num_trials" => SweepParam::NumTrials,
            "snr_db" | "transmit_snr" => SweepParam::TransmitSnrDb,
            other => return Err(Error::UnknownParameter(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint<T> {
    pub param: SweepParam,
    pub value: f64,
    pub region: RateRegion<T>,
}

/// One campaign per value, all from the same base seed.
pub fn sweep<T: Real>(
    config: &ScenarioConfig,
    param: SweepParam,
    values: &[f64],
    workers: usize,
) -> Result<Vec<SweepPoint<T>>> {
    if values.is_empty() {
        return Err(Error::config(param.name(), "sweep needs at least one value"));
    }
    values
        .iter()
        .map(|&value| {
            let cfg = param.apply(config, value)?;
            Ok(SweepPoint {
                param,
                value,
                region: run_campaign(&cfg, workers)?,
            })
        })
        .collect()
}
