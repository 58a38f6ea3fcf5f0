//! Replica-bitline clock model and the configurable timing-control unit.
//!
//! All signal timings are integer multiples of the clock period CK. Periods
//! are carried in picoseconds so cycle arithmetic stays exact: an instant in
//! nanoseconds is `cycles * ck_ps / 1000`, a single correctly rounded
//! division of integer-valued doubles.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, tag};

/// How a chip's CK period is chosen from a (avg, max, min) row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Jitter {
    /// Always the table average.
    FixedAvg,
    /// Uniform in [min, max], drawn independently per (chip, vdd).
    UniformMinMax,
    /// One uniform percentile per chip, shared across all vdd rows, so a
    /// slow chip is slow at every voltage.
    PerChipDraw,
}

/// One measured CK row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CkRow {
    pub vdd_mv: u32,
    pub avg_ps: f64,
    pub max_ps: f64,
    pub min_ps: f64,
}

/// Per-vdd CK periods generated by the replica bitline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockModel {
    pub rows: Vec<CkRow>,
    pub jitter: Jitter,
}

impl ClockModel {
    /// The measured defaults: per-vdd (avg, max, min) CK periods.
    pub fn default_table(jitter: Jitter) -> Self {
        let rows = vec![
            CkRow {
                vdd_mv: 500,
                avg_ps: 687.0,
                max_ps: 744.0,
                min_ps: 658.0,
            },
            CkRow {
                vdd_mv: 600,
                avg_ps: 265.0,
                max_ps: 279.0,
                min_ps: 254.0,
            },
            CkRow {
                vdd_mv: 700,
                avg_ps: 167.0,
                max_ps: 172.0,
                min_ps: 161.0,
            },
            CkRow {
                vdd_mv: 800,
                avg_ps: 122.0,
                max_ps: 125.0,
                min_ps: 119.0,
            },
            CkRow {
                vdd_mv: 900,
                avg_ps: 99.0,
                max_ps: 108.0,
                min_ps: 96.0,
            },
        ];
        Self { rows, jitter }
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            if !(r.min_ps <= r.avg_ps && r.avg_ps <= r.max_ps) {
                return Err(Error::parameter(format!(
                    "CK row {} mV violates min <= avg <= max",
                    r.vdd_mv
                )));
            }
        }
        Ok(())
    }

    fn row(&self, vdd_mv: u32) -> Result<&CkRow> {
        self.rows
            .iter()
            .find(|r| r.vdd_mv == vdd_mv)
            .ok_or_else(|| Error::lookup(format!("no CK row for vdd = {vdd_mv} mV")))
    }
}

/// CK period in picoseconds for one chip at one supply voltage.
pub fn ck_period_ps(model: &ClockModel, vdd_mv: u32, chip_seed: u64) -> Result<f64> {
    let row = model.row(vdd_mv)?;
    let u = match model.jitter {
        Jitter::FixedAvg => return Ok(row.avg_ps),
        Jitter::UniformMinMax => {
            rng::stream(chip_seed, &[tag::CK_DRAW, vdd_mv as u64]).random::<f64>()
        }
        Jitter::PerChipDraw => rng::stream(chip_seed, &[tag::CK_DRAW]).random::<f64>(),
    };
    Ok(row.min_ps + u * (row.max_ps - row.min_ps))
}

/// Cycle counts for the read sequence: wordline enable, the two SA enables,
/// the detect strobe, and the retry extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub wl_enable_cycles: u32,
    pub sae1_cycle: u32,
    pub sae2_cycle: u32,
    pub dtc_cycle: u32,
    pub extend_cycles_per_retry: u32,
}

impl TimingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sae1_cycle == 0 || self.sae1_cycle > self.wl_enable_cycles {
            return Err(Error::parameter(format!(
                "sae1 cycle {} must be in 1..=wl_enable {}",
                self.sae1_cycle, self.wl_enable_cycles
            )));
        }
        if self.sae2_cycle <= self.sae1_cycle {
            return Err(Error::parameter("sae2 must come after sae1".to_string()));
        }
        if self.dtc_cycle < self.sae2_cycle {
            return Err(Error::parameter("dtc must not precede sae2".to_string()));
        }
        if self.wl_enable_cycles < self.dtc_cycle {
            return Err(Error::parameter(
                "wl enable must cover the detect strobe".to_string(),
            ));
        }
        if self.extend_cycles_per_retry == 0 {
            return Err(Error::parameter(
                "extend_cycles_per_retry must be >= 1".to_string(),
            ));
        }
        Ok(())
    }

    /// Pipeline depth of a clean speculative read: data and error flag are
    /// latched out one cycle after the detect strobe.
    pub fn base_read_cycles(&self) -> u32 {
        self.dtc_cycle + 1
    }
}

/// Signal instants in nanoseconds at a concrete CK period, together with
/// the integer cycle counts they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingInstants {
    pub t_sae1_ns: f64,
    pub t_sae2_ns: f64,
    pub t_dtc_ns: f64,
    pub t_wl_end_ns: f64,
    pub t_retry_step_ns: f64,
    pub ck_ps: f64,
    pub base_read_cycles: u32,
    pub extend_cycles_per_retry: u32,
}

fn cycles_to_ns(cycles: u32, ck_ps: f64) -> f64 {
    (cycles as f64 * ck_ps) / 1000.0
}

/// Resolve a cycle-count configuration against a CK period.
pub fn timing_instants(cfg: &TimingConfig, ck_ps: f64) -> Result<TimingInstants> {
    cfg.validate()?;
    if !(ck_ps > 0.0) {
        return Err(Error::parameter(format!(
            "ck period {ck_ps} ps must be positive"
        )));
    }
    Ok(TimingInstants {
        t_sae1_ns: cycles_to_ns(cfg.sae1_cycle, ck_ps),
        t_sae2_ns: cycles_to_ns(cfg.sae2_cycle, ck_ps),
        t_dtc_ns: cycles_to_ns(cfg.dtc_cycle, ck_ps),
        t_wl_end_ns: cycles_to_ns(cfg.wl_enable_cycles, ck_ps),
        t_retry_step_ns: cycles_to_ns(cfg.extend_cycles_per_retry, ck_ps),
        ck_ps,
        base_read_cycles: cfg.base_read_cycles(),
        extend_cycles_per_retry: cfg.extend_cycles_per_retry,
    })
}

/// Speculative-output, confirmation, and conventional delays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeculativeDelays {
    /// Delay of the first speculative output.
    pub t_array_ns: f64,
    /// Delay of the final confirmation.
    pub t_error_ns: f64,
    /// Delay of a conventional full-margin read.
    pub t_conv_ns: f64,
    /// t_conv / t_error, the bound on the throughput gain.
    pub conv_to_error_ratio: f64,
}

/// Compare the speculative read against a conventional margin of
/// `conv_margin_cycles`, with `overhead_cycles` of sense/detect latency
/// added to every path.
pub fn speculative_delays(
    cfg: &TimingConfig,
    conv_margin_cycles: u32,
    ck_ps: f64,
    overhead_cycles: u32,
) -> Result<SpeculativeDelays> {
    cfg.validate()?;
    let error_cycles = cfg.dtc_cycle + overhead_cycles;
    let conv_cycles = conv_margin_cycles + overhead_cycles;
    Ok(SpeculativeDelays {
        t_array_ns: cycles_to_ns(cfg.sae1_cycle + overhead_cycles, ck_ps),
        t_error_ns: cycles_to_ns(error_cycles, ck_ps),
        t_conv_ns: cycles_to_ns(conv_cycles, ck_ps),
        conv_to_error_ratio: conv_cycles as f64 / error_cycles as f64,
    })
}
