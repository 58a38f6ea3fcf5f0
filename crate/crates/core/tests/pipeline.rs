//! End-to-end checks across the variation -> senseamp -> array -> cache
//! pipeline at the bundled operating points.

use tscache_core::array::{measure_rates, ArrayConfig};
use tscache_core::cache::{
    build_cache, generate_traverse_55aa, run_trace, CacheConfig, CacheGeometry,
};
use tscache_core::senseamp::OffsetModel;
use tscache_core::timing::TimingConfig;
use tscache_core::variation::calibrate;

const K: f64 = 49.5 / 50.5;

/// At the TT characterization point (3-sigma quantile at 3.2 ns), the
/// cross-sensing flag rate exceeds the plain wrong-read rate by an amount
/// of order 1e-4 in BER and order 1e-2 in DER. The exact values float with
/// the offset deviation, which is a free calibration parameter.
#[test]
fn false_positive_penalty_at_tt_three_sigma_point() {
    let dist = calibrate(1.320352, 0.421085, 150.0).unwrap();
    assert!((dist.quantile_sigma(3.0) - 3.2).abs() < 1e-3);
    let offsets = OffsetModel::new(75.0).unwrap();
    let cfg = ArrayConfig {
        rows: 1,
        cols: 64,
        segment_width: 64,
        max_extend_cycles: 4,
        vdd_mv: 500.0,
    };
    let r = measure_rates(&dist, &offsets, &cfg, 3.2, K, 400_000, 31).unwrap();
    let ber_added = r.false_positive_rate;
    let der_added = r.der - r.der_plain;
    assert!((5e-5..=1e-3).contains(&ber_added), "ber added {ber_added}");
    assert!(
        (3e-3..=6.4e-2).contains(&der_added),
        "der added {der_added}"
    );
}

/// Traversal with the first sensing at the 1e-3 flag-rate point shows the
/// independence-law DER near 1 - (1-1e-3)^64 = 0.062. The band is wide:
/// per-column offsets are static, so one cache effectively samples only 16
/// word positions worth of SA draws.
#[test]
fn traverse_der_near_the_independence_law() {
    let dist = calibrate(1.0264, 0.2566, 150.0).unwrap();
    let spec = TimingConfig {
        wl_enable_cycles: 11,
        sae1_cycle: 8,
        sae2_cycle: 9,
        dtc_cycle: 10,
        extend_cycles_per_retry: 2,
    };
    let tag = TimingConfig {
        wl_enable_cycles: 11,
        sae1_cycle: 9,
        sae2_cycle: 10,
        dtc_cycle: 10,
        extend_cycles_per_retry: 2,
    };
    let ccfg = CacheConfig {
        geometry: CacheGeometry::default(),
        dist,
        offsets: OffsetModel::new(75.0).unwrap(),
        k_factor: K,
        vdd_mv: 600.0,
        data_timing: spec,
        tag_timing: tag,
        ck_ps: 265.0,
        max_extend_cycles: 4,
        miss_penalty_cycles: 20,
        overlap_transmit: true,
        address_space_bytes: 1 << 32,
    };
    let mut cache = build_cache(&ccfg, 3_141_592_653).unwrap();
    let trace = generate_traverse_55aa(&ccfg.geometry);
    let stats = run_trace(&mut cache, &trace).unwrap();
    assert!(
        (0.03..=0.10).contains(&stats.der_observed),
        "der={}",
        stats.der_observed
    );
    // Every extension-corrected read still returned the written pattern:
    // re-read a handful of lines and compare against the traversal's last
    // written byte.
    for line in [0u64, 0x40, 0x1000, 0x7fc0] {
        let bytes = cache.peek_line(line).unwrap();
        assert!(bytes.iter().all(|&b| b == 0xAA), "line {line:#x} corrupted");
    }
}
