//! Process-variation model of per-cell bitline discharge.
//!
//! Discharge time to a fixed reference swing is modeled as a lognormal
//! random variable calibrated from a measured mean and standard deviation.
//! The developed bitline differential grows linearly in time, saturating at
//! V_DD, and its sign follows the stored bit.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::inv_norm_cdf;

/// Process corner of a characterization table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Corner {
    TT,
    SS,
    FF,
}

/// Supply voltage, temperature, and corner labels for a calibration row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// Supply voltage in volts; valid range 0.4..=1.0.
    pub vdd_v: f64,
    /// Temperature in degrees Celsius. Affects results only through table
    /// selection; there is no physical temperature model.
    pub temperature_c: f64,
    pub corner: Corner,
}

impl OperatingPoint {
    pub fn new(vdd_v: f64, temperature_c: f64, corner: Corner) -> Result<Self> {
        if !(0.4..=1.0).contains(&vdd_v) {
            return Err(Error::parameter(format!(
                "vdd {vdd_v} V outside supported range [0.4, 1.0]"
            )));
        }
        Ok(Self {
            vdd_v,
            temperature_c,
            corner,
        })
    }

    /// Supply voltage in millivolts, rounded to the nearest integer.
    pub fn vdd_mv(&self) -> u32 {
        (self.vdd_v * 1000.0).round() as u32
    }
}

/// Lognormal model of the time to develop the reference bitline swing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DischargeDistribution {
    /// Location parameter of ln(T), T in nanoseconds.
    pub mu: f64,
    /// Scale parameter of ln(T); strictly positive.
    pub sigma: f64,
    /// Bitline swing, in millivolts, at which the calibration statistics
    /// were measured.
    pub reference_swing_mv: f64,
}

impl DischargeDistribution {
    /// Mean of T recovered from (mu, sigma).
    pub fn mean_ns(&self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp()
    }

    /// Standard deviation of T recovered from (mu, sigma).
    pub fn stddev_ns(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        self.mean_ns() * s2.exp_m1().sqrt()
    }

    /// One-sided quantile at `level` standard deviations of ln(T):
    /// exp(mu + level * sigma).
    pub fn quantile_sigma(&self, level: f64) -> f64 {
        (self.mu + level * self.sigma).exp()
    }

    /// Quantile at cumulative probability `p`.
    pub fn quantile_p(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::parameter(format!(
                "quantile probability {p} outside (0, 1)"
            )));
        }
        Ok(self.quantile_sigma(inv_norm_cdf(p)))
    }

    fn sampler(&self) -> LogNormal<f64> {
        LogNormal::new(self.mu, self.sigma).expect("sigma validated at calibration")
    }
}

/// One bitcell: its stored bit and its sampled time, in nanoseconds, to
/// develop the reference differential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSample {
    pub stored_bit: bool,
    pub t150_ns: f64,
}

/// Fit lognormal parameters to a measured (mean, stddev) pair.
///
/// Closed-form moment inversion: sigma^2 = ln(1 + (stddev/mean)^2),
/// mu = ln(mean) - sigma^2/2. Uses ln_1p so vanishing-variance inputs keep
/// sigma > 0.
pub fn calibrate(
    mean_ns: f64,
    stddev_ns: f64,
    reference_swing_mv: f64,
) -> Result<DischargeDistribution> {
    if !(mean_ns > 0.0) || !mean_ns.is_finite() {
        return Err(Error::parameter(format!(
            "discharge mean {mean_ns} ns must be positive"
        )));
    }
    if !(stddev_ns > 0.0) || !stddev_ns.is_finite() {
        return Err(Error::parameter(format!(
            "discharge stddev {stddev_ns} ns must be positive"
        )));
    }
    if !(reference_swing_mv > 0.0) {
        return Err(Error::parameter(format!(
            "reference swing {reference_swing_mv} mV must be positive"
        )));
    }
    let ratio = stddev_ns / mean_ns;
    let sigma2 = (ratio * ratio).ln_1p();
    Ok(DischargeDistribution {
        mu: mean_ns.ln() - 0.5 * sigma2,
        sigma: sigma2.sqrt(),
        reference_swing_mv,
    })
}

/// Draw one cell from the calibrated distribution.
pub fn sample_cell(
    dist: &DischargeDistribution,
    stored_bit: bool,
    rng: &mut ChaCha8Rng,
) -> CellSample {
    CellSample {
        stored_bit,
        t150_ns: dist.sampler().sample(rng),
    }
}

/// Developed bitline differential, in millivolts, after discharging for
/// `t_ns`.
///
/// Linear in time until saturation at V_DD. Stored 1 discharges BLB so the
/// differential V_BL - V_BLB is positive; stored 0 discharges BL and the
/// differential is negative.
pub fn bitline_delta(
    cell: &CellSample,
    t_ns: f64,
    reference_swing_mv: f64,
    vdd_mv: f64,
) -> Result<f64> {
    if t_ns < 0.0 || !t_ns.is_finite() {
        return Err(Error::parameter(format!(
            "discharge time {t_ns} ns must be nonnegative"
        )));
    }
    let magnitude = (reference_swing_mv * t_ns / cell.t150_ns).min(vdd_mv);
    Ok(if cell.stored_bit {
        magnitude
    } else {
        -magnitude
    })
}
