//! The named experiments. Every command is a pure function of the
//! configuration to artifact bytes; repeated runs are byte-identical for a
//! fixed seed regardless of worker count.

use tscache_core::array::{measure_rates, ArrayConfig, RateSample};
use tscache_core::cache::{
    build_cache, generate_traverse_55aa, parse_trace, run_trace, throughput_gain, CacheConfig,
};
use tscache_core::schemes::{compare, fom};
use tscache_core::senseamp::OffsetModel;
use tscache_core::timing::{ck_period_ps, speculative_delays};
use tscache_core::variation::Corner;

use crate::config::{ExperimentConfig, SweepCurve, TableSet};
use crate::csv::{num, Csv};
use crate::svg::{log_y_chart, Series};
use crate::{Artifact, CliError};

/// One evaluated sweep point.
struct SweepPoint {
    curve: SweepCurve,
    t_ns: f64,
    rates: RateSample,
    rates_k1: RateSample,
}

/// BER / DER versus discharge time for each configured curve, using common
/// random numbers across the grid so every rate column is monotone
/// nonincreasing in time by construction. Each point is also re-evaluated
/// with attenuation disabled (k = 1) for the false-positive comparison.
pub fn cmd_ber_sweep(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    config.validate()?;
    let k = config.k_factor()?;
    let offsets = OffsetModel::new(config.sigma_os_mv).map_err(CliError::from_config_err)?;
    let mut points: Vec<SweepPoint> = Vec::new();
    for curve in &config.ber_sweep.curves {
        let dist = config.distribution_for(curve.table, curve.vdd_mv, curve.corner)?;
        let q3 = dist.quantile_sigma(3.0);
        let array = ArrayConfig {
            rows: 1,
            cols: 64,
            segment_width: 64,
            max_extend_cycles: config.max_extend_cycles,
            vdd_mv: curve.vdd_mv as f64,
        };
        let n = config.ber_sweep.grid_points;
        for i in 0..n {
            let rel = config.ber_sweep.t_start_rel
                + (config.ber_sweep.t_stop_rel - config.ber_sweep.t_start_rel) * i as f64
                    / (n - 1) as f64;
            let t_ns = q3 * rel;
            let rates = measure_rates(
                &dist,
                &offsets,
                &array,
                t_ns,
                k,
                config.trials,
                config.master_seed,
            )?;
            let rates_k1 = measure_rates(
                &dist,
                &offsets,
                &array,
                t_ns,
                1.0,
                config.trials,
                config.master_seed,
            )?;
            points.push(SweepPoint {
                curve: *curve,
                t_ns,
                rates,
                rates_k1,
            });
        }
    }

    // Internal invariant: with common random numbers every curve must be
    // exactly monotone.
    for w in points.windows(2) {
        if w[0].curve == w[1].curve {
            let (a, b) = (&w[0].rates, &w[1].rates);
            if b.ber_flagged > a.ber_flagged
                || b.ber_plain > a.ber_plain
                || b.false_positive_rate > a.false_positive_rate
            {
                return Err(CliError::internal(
                    "sweep rates increased with discharge time".to_string(),
                ));
            }
        }
    }

    let mut csv = Csv::new(
        "ts-cache-sim/ber-sweep v1",
        &[
            "table",
            "vdd_mv",
            "corner",
            "t_ns",
            "ber_margin",
            "ber_plain",
            "ber_cross_sense",
            "fp_added",
            "fp_added_k1",
            "der",
        ],
    );
    for p in &points {
        csv.row(&[
            p.curve.table.name().to_string(),
            p.curve.vdd_mv.to_string(),
            format!("{:?}", p.curve.corner),
            num(p.t_ns),
            num(p.rates.ber_margin),
            num(p.rates.ber_plain),
            num(p.rates.ber_flagged),
            num(p.rates.false_positive_rate),
            num(p.rates_k1.false_positive_rate),
            num(p.rates.der),
        ]);
    }

    let mut series: Vec<Series> = Vec::new();
    for curve in &config.ber_sweep.curves {
        let label = |kind: &str| {
            format!(
                "{} {}mV {:?} {kind}",
                curve.table.name(),
                curve.vdd_mv,
                curve.corner
            )
        };
        let of_curve: Vec<&SweepPoint> = points.iter().filter(|p| p.curve == *curve).collect();
        series.push(Series {
            label: label("flag"),
            points: of_curve
                .iter()
                .map(|p| (p.t_ns, p.rates.ber_flagged))
                .collect(),
        });
        series.push(Series {
            label: label("der"),
            points: of_curve.iter().map(|p| (p.t_ns, p.rates.der)).collect(),
        });
    }
    let floor = 0.1 / config.trials as f64 / 64.0;
    let svg = log_y_chart(
        "bit/word error rates vs discharge time",
        "t_ns",
        "rate",
        &series,
        floor,
    );

    Ok(vec![
        Artifact::new("ber_sweep.csv", csv.into_bytes()),
        Artifact::new("ber_sweep.svg", svg),
    ])
}

fn cache_config_for(
    config: &ExperimentConfig,
    vdd_mv: u32,
) -> Result<(CacheConfig, u32), CliError> {
    let timing = config.timing_for(vdd_mv)?;
    let dist = config.distribution_for(TableSet::Chip, vdd_mv, Corner::TT)?;
    let ck_ps = ck_period_ps(&config.clock, vdd_mv, config.master_seed)
        .map_err(CliError::from_config_err)?;
    let cfg = CacheConfig {
        geometry: config.geometry,
        dist,
        offsets: OffsetModel::new(config.sigma_os_mv).map_err(CliError::from_config_err)?,
        k_factor: config.k_factor()?,
        vdd_mv: vdd_mv as f64,
        data_timing: timing.spec,
        tag_timing: timing.tag,
        ck_ps,
        max_extend_cycles: config.max_extend_cycles,
        miss_penalty_cycles: config.miss_penalty_cycles,
        overlap_transmit: config.overlap_transmit,
        address_space_bytes: 1 << 32,
    };
    Ok((cfg, timing.conv_margin_cycles))
}

/// Trace-driven throughput at each configured supply voltage, against the
/// conventional full-margin design at the same CK.
pub fn cmd_throughput(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    config.validate()?;
    let mut csv = Csv::new(
        "ts-cache-sim/throughput v1",
        &[
            "vdd_mv",
            "ck_ps",
            "conv_cycles",
            "conv_wl_ns",
            "spec_cycles",
            "boost",
            "der",
            "avg_read_cycles",
            "gain",
            "error_events",
            "disabled_lines",
        ],
    );
    for &vdd in &config.throughput_vdds {
        let (ccfg, conv_cycles) = cache_config_for(config, vdd)?;
        let mut cache = build_cache(&ccfg, config.master_seed)?;
        let trace = generate_traverse_55aa(&ccfg.geometry);
        let stats = run_trace(&mut cache, &trace)?;
        let gain = throughput_gain(&stats, conv_cycles, ccfg.ck_ps, ccfg.ck_ps)?;
        let spec_cycles = ccfg.data_timing.base_read_cycles();
        // Exact picosecond arithmetic keeps the wordline time bit-exact.
        let conv_wl_ns = (conv_cycles as f64 * ccfg.ck_ps) / 1000.0;
        csv.row(&[
            vdd.to_string(),
            num(ccfg.ck_ps),
            conv_cycles.to_string(),
            num(conv_wl_ns),
            spec_cycles.to_string(),
            num(conv_cycles as f64 / spec_cycles as f64),
            num(stats.der_observed),
            num(stats.avg_read_cycles),
            num(gain),
            stats.error_events.to_string(),
            cache.disabled_lines.to_string(),
        ]);
    }
    Ok(vec![Artifact::new("throughput.csv", csv.into_bytes())])
}

/// Normalized latency/energy/area/EDP for the fault-tolerance schemes.
pub fn cmd_compare(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    config.validate()?;
    let dist = config.distribution_for(TableSet::Hspice, 500, Corner::SS)?;
    let reports = compare(
        &config.schemes,
        &dist,
        config.sense_overhead_ns,
        None,
        config.compare_ber,
        config.residual_convention,
    )?;
    let base_latency = reports
        .iter()
        .find(|(k, _)| k.name() == "baseline6sigma")
        .map(|(_, r)| r.avg_latency_ns)
        .ok_or_else(|| CliError::internal("baseline report missing".to_string()))?;
    let mut csv = Csv::new(
        "ts-cache-sim/compare v1",
        &[
            "scheme",
            "latency_ns",
            "latency_factor",
            "energy",
            "area",
            "edp",
            "residual_error",
        ],
    );
    for (kind, r) in &reports {
        csv.row(&[
            kind.name().to_string(),
            num(r.avg_latency_ns),
            num(r.avg_latency_ns / base_latency),
            num(r.energy_per_read),
            num(r.area),
            num(r.edp),
            num(r.residual_error_prob),
        ]);
    }
    Ok(vec![Artifact::new("compare.csv", csv.into_bytes())])
}

/// The timing-speculation SRAM comparison: FoM from each row's inputs, and
/// the cycle-accurate throughput cross-check for the cross-sensing rows.
pub fn cmd_fom(config: &ExperimentConfig) -> Result<Vec<Artifact>, CliError> {
    config.validate()?;
    let mut csv = Csv::new(
        "ts-cache-sim/fom v1",
        &[
            "design",
            "rows",
            "cols",
            "area_factor",
            "energy_factor",
            "max_throughput",
            "fom",
            "published_fom",
        ],
    );
    for row in &config.fom_table {
        let f = fom(row.max_throughput, row.area_factor, row.energy_factor)?;
        if row.design == "cross_sensing" {
            // Dual route: the ratio from the cycle schedule must agree with
            // the table's throughput entry.
            if let Some(ft) = config.fom_timing.iter().find(|t| t.rows == row.rows) {
                let d =
                    speculative_delays(&ft.spec, ft.conv_margin_cycles, 687.0, ft.overhead_cycles)?;
                let ratio = d.conv_to_error_ratio;
                if (ratio - row.max_throughput).abs() > 0.02 {
                    return Err(CliError::internal(format!(
                        "cycle schedule for {}x32 gives throughput {ratio:.4}, table says {}",
                        row.rows, row.max_throughput
                    )));
                }
            }
        }
        csv.row(&[
            row.design.clone(),
            row.rows.to_string(),
            row.cols.to_string(),
            num(row.area_factor),
            num(row.energy_factor),
            num(row.max_throughput),
            num(f),
            num(row.published_fom),
        ]);
    }
    Ok(vec![Artifact::new("fom.csv", csv.into_bytes())])
}

/// Run a user trace file through the cache at the configured voltage.
pub fn cmd_trace(config: &ExperimentConfig, trace_text: &str) -> Result<Vec<Artifact>, CliError> {
    config.validate()?;
    let records = parse_trace(trace_text)?;
    if records.is_empty() {
        return Err(CliError {
            exit_code: crate::EXIT_INGESTION,
            message: "trace contains no accesses".to_string(),
        });
    }
    let (ccfg, conv_cycles) = cache_config_for(config, config.trace.vdd_mv)?;
    let mut cache = build_cache(&ccfg, config.master_seed)?;
    let stats = run_trace(&mut cache, &records)?;
    let mut csv = Csv::new(
        "ts-cache-sim/trace v1",
        &[
            "vdd_mv",
            "accesses",
            "hits",
            "misses",
            "hit_rate",
            "error_events",
            "extended_cycles_total",
            "avg_read_cycles",
            "der_observed",
            "uncorrected_reads",
            "disabled_lines",
            "gain_vs_conv",
        ],
    );
    let gain = if stats.read_hits > 0 {
        throughput_gain(&stats, conv_cycles, ccfg.ck_ps, ccfg.ck_ps)?
    } else {
        0.0
    };
    csv.row(&[
        config.trace.vdd_mv.to_string(),
        stats.accesses.to_string(),
        stats.hits.to_string(),
        stats.misses.to_string(),
        num(stats.hits as f64 / stats.accesses as f64),
        stats.error_events.to_string(),
        stats.extended_cycles_total.to_string(),
        num(stats.avg_read_cycles),
        num(stats.der_observed),
        stats.uncorrected_reads.to_string(),
        cache.disabled_lines.to_string(),
        num(gain),
    ]);
    Ok(vec![Artifact::new("trace_stats.csv", csv.into_bytes())])
}
