//! The 32KB 2-way set-associative cache composed of SRAM sub-arrays, with
//! trace-driven accesses, hit-way-only error correction, and BIST-driven
//! weak-line disabling.
//!
//! A read activates the tag arrays and all data arrays in parallel. Error
//! flags from the non-hit way are ignored; flags in the hit way extend the
//! access by the array retry loop. The extra cycles of an errored word can
//! overlap the transmission of later correct words (configurable).

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::{build_array, read_row, run_bist, ArrayConfig, ArrayInstance, ReadOutcome};
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::senseamp::OffsetModel;
use crate::timing::{timing_instants, TimingConfig, TimingInstants};
use crate::variation::DischargeDistribution;

const TAG_BITS: u32 = 32;

/// Physical organization of the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheGeometry {
    pub capacity_bytes: u32,
    pub ways: u32,
    pub line_bytes: u32,
    pub data_arrays: u32,
    pub data_rows: u32,
    pub data_cols: u32,
    pub tag_arrays: u32,
    pub tag_rows: u32,
    pub tag_cols: u32,
    pub port_width_bits: u32,
}

impl Default for CacheGeometry {
    fn default() -> Self {
        Self {
            capacity_bytes: 32 * 1024,
            ways: 2,
            line_bytes: 64,
            data_arrays: 8,
            data_rows: 256,
            data_cols: 128,
            tag_arrays: 4,
            tag_rows: 64,
            tag_cols: 64,
            port_width_bits: 64,
        }
    }
}

impl CacheGeometry {
    pub fn sets(&self) -> u32 {
        self.capacity_bytes / (self.ways * self.line_bytes)
    }

    pub fn line_bits(&self) -> u32 {
        self.line_bytes * 8
    }

    pub fn words_per_line(&self) -> u32 {
        self.line_bits() / self.port_width_bits
    }

    pub fn arrays_per_way(&self) -> u32 {
        self.data_arrays / self.ways
    }

    pub fn validate(&self) -> Result<()> {
        if self.ways == 0 || self.line_bytes == 0 || self.capacity_bytes == 0 {
            return Err(Error::parameter(
                "geometry dimensions must be nonzero".to_string(),
            ));
        }
        if !self
            .capacity_bytes
            .is_multiple_of(self.ways * self.line_bytes)
        {
            return Err(Error::parameter(
                "capacity must equal ways x sets x line size".to_string(),
            ));
        }
        let data_bits = self.data_arrays as u64 * self.data_rows as u64 * self.data_cols as u64;
        if data_bits != self.capacity_bytes as u64 * 8 {
            return Err(Error::parameter(format!(
                "data array bits {} != capacity bits {}",
                data_bits,
                self.capacity_bytes as u64 * 8
            )));
        }
        if self.data_rows != self.sets() {
            return Err(Error::parameter(
                "data array rows must equal the set count".to_string(),
            ));
        }
        if !self.data_arrays.is_multiple_of(self.ways) {
            return Err(Error::parameter(
                "data arrays must split evenly across ways".to_string(),
            ));
        }
        if self.arrays_per_way() * self.data_cols != self.line_bits() {
            return Err(Error::parameter(
                "one way's arrays must hold one line per row".to_string(),
            ));
        }
        if self.tag_arrays * self.tag_rows != self.sets() {
            return Err(Error::parameter(
                "tag rows must cover the set count".to_string(),
            ));
        }
        if self.tag_cols != self.ways * TAG_BITS {
            return Err(Error::parameter(format!(
                "tag row must store {} tags of {TAG_BITS} bits",
                self.ways
            )));
        }
        if self.port_width_bits == 0 || !self.line_bits().is_multiple_of(self.port_width_bits) {
            return Err(Error::parameter(
                "port width must divide the line".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessOp {
    Read,
    Write,
}

/// One trace entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessRecord {
    pub op: AccessOp,
    pub address: u64,
    pub payload: Option<u64>,
}

/// Everything needed to build a cache instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheConfig {
    pub geometry: CacheGeometry,
    pub dist: DischargeDistribution,
    pub offsets: OffsetModel,
    pub k_factor: f64,
    pub vdd_mv: f64,
    pub data_timing: TimingConfig,
    pub tag_timing: TimingConfig,
    pub ck_ps: f64,
    pub max_extend_cycles: u32,
    pub miss_penalty_cycles: u32,
    /// Overlap an errored word's extra cycles with the transmission of
    /// later correct words.
    pub overlap_transmit: bool,
    /// Address-space bound for trace validation.
    pub address_space_bytes: u64,
}

/// Aggregate statistics of one trace run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CacheStats {
    pub accesses: u64,
    pub hits: u64,
    pub misses: u64,
    /// Read hits whose hit way raised at least one first-sensing flag.
    pub error_events: u64,
    /// Sum over accesses of cycles beyond the access's base cost.
    pub extended_cycles_total: u64,
    pub read_hits: u64,
    pub words_read: u64,
    pub flagged_words: u64,
    pub uncorrected_reads: u64,
    pub total_read_cycles: u64,
    pub avg_read_cycles: f64,
    pub der_observed: f64,
}

/// Result of a single access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessResult {
    pub hit: bool,
    pub cycles: u32,
    /// At least one hit-way segment flagged and then confirmed via
    /// extension.
    pub corrected: bool,
}

/// Per-word outcome of sensing one way's data row: first-phase error
/// flags, retries consumed, and whether any column never confirmed.
struct WayRead {
    flags: Vec<bool>,
    retries: Vec<u32>,
    uncorrected: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct LineState {
    valid: bool,
    tag: u32,
    enabled: bool,
}

/// A built cache: sub-array instances plus the bookkeeping state.
#[derive(Debug, Clone)]
pub struct CacheInstance {
    pub config: CacheConfig,
    data_arrays: Vec<ArrayInstance>,
    tag_arrays: Vec<ArrayInstance>,
    data_instants: TimingInstants,
    tag_instants: TimingInstants,
    /// lines[set][way]
    lines: Vec<Vec<LineState>>,
    /// Way to evict next per set (LRU for 2 ways).
    lru: Vec<u32>,
    /// Write-through backing memory, keyed by line address.
    backing: BTreeMap<u64, Vec<u8>>,
    /// (array, row, col) weak cells found by BIST across data and tag
    /// arrays, in cache coordinates (set, way, line bit or tag bit).
    pub disabled_lines: u64,
}

/// Build the cache, run BIST on every sub-array, and disable lines holding
/// weak cells.
pub fn build_cache(config: &CacheConfig, master_seed: u64) -> Result<CacheInstance> {
    config.geometry.validate()?;
    let g = config.geometry;
    let data_cfg = ArrayConfig {
        rows: g.data_rows,
        cols: g.data_cols,
        segment_width: g.port_width_bits,
        max_extend_cycles: config.max_extend_cycles,
        vdd_mv: config.vdd_mv,
    };
    let tag_cfg = ArrayConfig {
        rows: g.tag_rows,
        cols: g.tag_cols,
        segment_width: TAG_BITS,
        max_extend_cycles: config.max_extend_cycles,
        vdd_mv: config.vdd_mv,
    };
    let data_instants = timing_instants(&config.data_timing, config.ck_ps)?;
    let tag_instants = timing_instants(&config.tag_timing, config.ck_ps)?;

    let zeros = vec![false];
    let mut data_arrays = Vec::with_capacity(g.data_arrays as usize);
    for a in 0..g.data_arrays {
        let seed = rng::derive_seed(master_seed, &[tag::DATA_ARRAY, a as u64]);
        let mut arr = build_array(
            &data_cfg,
            &config.dist,
            &config.offsets,
            &zeros,
            config.k_factor,
            seed,
        )?;
        run_bist(&mut arr, &data_instants)?;
        data_arrays.push(arr);
    }
    let mut tag_arrays = Vec::with_capacity(g.tag_arrays as usize);
    for a in 0..g.tag_arrays {
        let seed = rng::derive_seed(master_seed, &[tag::TAG_ARRAY, a as u64]);
        let mut arr = build_array(
            &tag_cfg,
            &config.dist,
            &config.offsets,
            &zeros,
            config.k_factor,
            seed,
        )?;
        run_bist(&mut arr, &tag_instants)?;
        tag_arrays.push(arr);
    }

    let sets = g.sets();
    let mut lines = vec![
        vec![
            LineState {
                valid: false,
                tag: 0,
                enabled: true
            };
            g.ways as usize
        ];
        sets as usize
    ];
    let mut disabled = 0u64;
    for (a, arr) in data_arrays.iter().enumerate() {
        let way = a as u32 / g.arrays_per_way();
        for &(row, _col) in arr.weak_map.iter() {
            let line = &mut lines[row as usize][way as usize];
            if line.enabled {
                line.enabled = false;
                disabled += 1;
            }
        }
    }
    for (a, arr) in tag_arrays.iter().enumerate() {
        for &(row, col) in arr.weak_map.iter() {
            let set = a as u32 * g.tag_rows + row;
            let way = col / TAG_BITS;
            let line = &mut lines[set as usize][way as usize];
            if line.enabled {
                line.enabled = false;
                disabled += 1;
            }
        }
    }

    Ok(CacheInstance {
        config: config.clone(),
        data_arrays,
        tag_arrays,
        data_instants,
        tag_instants,
        lines,
        lru: vec![0; sets as usize],
        backing: BTreeMap::new(),
        disabled_lines: disabled,
    })
}

impl CacheInstance {
    fn geometry(&self) -> &CacheGeometry {
        &self.config.geometry
    }

    fn decode(&self, address: u64) -> (u32, u32, u32) {
        let g = self.geometry();
        let line = address / g.line_bytes as u64;
        let set = (line % g.sets() as u64) as u32;
        let tag_value = (line / g.sets() as u64) as u32; // truncated to 32 bits
        let word = ((address % g.line_bytes as u64) * 8 / g.port_width_bits as u64) as u32;
        (set, tag_value, word)
    }

    fn line_address(&self, address: u64) -> u64 {
        address - address % self.geometry().line_bytes as u64
    }

    fn backing_line(&mut self, line_addr: u64) -> &mut Vec<u8> {
        let len = self.geometry().line_bytes as usize;
        self.backing
            .entry(line_addr)
            .or_insert_with(|| vec![0u8; len])
    }

    /// The data arrays holding `way`, in line order.
    fn way_arrays(&self, way: u32) -> std::ops::Range<usize> {
        let per_way = self.geometry().arrays_per_way() as usize;
        let start = way as usize * per_way;
        start..start + per_way
    }

    fn find_hit(&self, set: u32, tag_value: u32) -> Option<u32> {
        self.lines[set as usize]
            .iter()
            .position(|l| l.enabled && l.valid && l.tag == tag_value)
            .map(|w| w as u32)
    }

    fn victim_way(&self, set: u32) -> Option<u32> {
        let ways = &self.lines[set as usize];
        if let Some(w) = ways.iter().position(|l| l.enabled && !l.valid) {
            return Some(w as u32);
        }
        let lru = self.lru[set as usize];
        if ways[lru as usize].enabled {
            return Some(lru);
        }
        ways.iter().position(|l| l.enabled).map(|w| w as u32)
    }

    fn touch_lru(&mut self, set: u32, used_way: u32) {
        // Two-way LRU: the other way becomes the next victim.
        let ways = self.geometry().ways;
        self.lru[set as usize] = (used_way + 1) % ways;
    }

    /// Write one line's bytes into the data arrays of `way` and its tag.
    fn store_line(&mut self, set: u32, way: u32, tag_value: u32, bytes: &[u8]) -> Result<()> {
        let g = *self.geometry();
        let bits: Vec<bool> = (0..g.line_bits())
            .map(|b| (bytes[(b / 8) as usize] >> (b % 8)) & 1 == 1)
            .collect();
        let per_array = g.data_cols as usize;
        for (i, a) in self.way_arrays(way).enumerate() {
            let span = &bits[i * per_array..(i + 1) * per_array];
            self.data_arrays[a].write_row(set, span)?;
        }
        let tag_bits: Vec<bool> = (0..TAG_BITS).map(|b| (tag_value >> b) & 1 == 1).collect();
        let ta = (set / g.tag_rows) as usize;
        let tr = set % g.tag_rows;
        self.tag_arrays[ta].write_span(tr, way * TAG_BITS, &tag_bits)?;
        let line = &mut self.lines[set as usize][way as usize];
        line.valid = true;
        line.tag = tag_value;
        Ok(())
    }

    /// Current bytes of a resident line, from the stored bits.
    fn line_bytes_of(&self, set: u32, way: u32) -> Vec<u8> {
        let g = *self.geometry();
        let mut bytes = vec![0u8; g.line_bytes as usize];
        for (i, a) in self.way_arrays(way).enumerate() {
            let row = self.data_arrays[a].stored_row(set);
            for (c, &bit) in row.iter().enumerate() {
                let b = i * g.data_cols as usize + c;
                if bit {
                    bytes[b / 8] |= 1 << (b % 8);
                }
            }
        }
        bytes
    }

    /// Read the tag row covering `set`; returns the outcome and the tag
    /// path's cycle cost (both ways must confirm before the compare).
    fn read_tag_row(&self, set: u32) -> Result<(ReadOutcome, u32)> {
        let g = self.geometry();
        let ta = (set / g.tag_rows) as usize;
        let tr = set % g.tag_rows;
        let out = read_row(&self.tag_arrays[ta], tr, &self.tag_instants)?;
        let cycles = out.cycles_used;
        Ok((out, cycles))
    }

    /// Read one way's data row across its arrays.
    fn read_data_way(&self, set: u32, way: u32) -> Result<WayRead> {
        let g = *self.geometry();
        let segs_per_array = (g.data_cols / g.port_width_bits) as usize;
        let words = g.words_per_line() as usize;
        let mut flags = vec![false; words];
        let mut retries = vec![0u32; words];
        let mut uncorrected = false;
        for (i, a) in self.way_arrays(way).enumerate() {
            let out = read_row(&self.data_arrays[a], set, &self.data_instants)?;
            for s in 0..segs_per_array {
                let w = i * segs_per_array + s;
                flags[w] = out.segment_errors[0][s];
                retries[w] = out.segment_retries[s];
                uncorrected |= out.uncorrected;
            }
        }
        Ok(WayRead {
            flags,
            retries,
            uncorrected,
        })
    }

    /// Extension cycles of the data path under the transmit-overlap policy.
    fn data_penalty_cycles(&self, retries: &[u32]) -> u32 {
        let ext = self.data_instants.extend_cycles_per_retry;
        let words = retries.len() as u32;
        let mut worst = 0u32;
        for (w, &r) in retries.iter().enumerate() {
            let raw = r * ext;
            let pen = if self.config.overlap_transmit {
                let slots_after = words - 1 - w as u32;
                raw.saturating_sub(slots_after)
            } else {
                raw
            };
            worst = worst.max(pen);
        }
        worst
    }

    fn base_access_cycles(&self) -> u32 {
        self.data_instants
            .base_read_cycles
            .max(self.tag_instants.base_read_cycles)
    }

    /// Fault-injection hook: make one data cell unreadably slow.
    /// `bit` indexes the line's bits (0..line_bits).
    pub fn inject_weak_data_cell(&mut self, set: u32, way: u32, bit: u32, t150_ns: f64) {
        let g = *self.geometry();
        let a = self.way_arrays(way).start + (bit / g.data_cols) as usize;
        let col = bit % g.data_cols;
        self.data_arrays[a].inject_discharge_time(set, col, t150_ns);
    }

    /// One cache access. Tag and data arrays are read in parallel; only the
    /// hit way's error flags matter.
    pub fn access(
        &mut self,
        record: &AccessRecord,
        stats: &mut CacheStats,
    ) -> Result<AccessResult> {
        if record.address >= self.config.address_space_bytes {
            return Err(Error::parameter(format!(
                "address {:#x} outside the simulated address space",
                record.address
            )));
        }
        let (set, tag_value, _word) = self.decode(record.address);
        let line_addr = self.line_address(record.address);
        let (_tag_out, tag_cycles) = self.read_tag_row(set)?;
        let base = self.base_access_cycles();
        stats.accesses += 1;

        let hit_way = self.find_hit(set, tag_value);
        match record.op {
            AccessOp::Read => {
                // Both ways' data arrays are sensed in parallel; the non-hit
                // way's outcome is computed and dropped, matching the
                // hardware which simply never latches it.
                let mut result_cycles;
                let mut corrected = false;
                if let Some(way) = hit_way {
                    let read = self.read_data_way(set, way)?;
                    let penalty = self.data_penalty_cycles(&read.retries);
                    let data_cycles = self.data_instants.base_read_cycles + penalty;
                    result_cycles = tag_cycles.max(data_cycles);
                    let flagged = read.flags.iter().filter(|&&f| f).count() as u64;
                    stats.hits += 1;
                    stats.read_hits += 1;
                    stats.words_read += read.flags.len() as u64;
                    stats.flagged_words += flagged;
                    if flagged > 0 {
                        stats.error_events += 1;
                        corrected = !read.uncorrected;
                    }
                    if read.uncorrected {
                        stats.uncorrected_reads += 1;
                    }
                    stats.total_read_cycles += result_cycles as u64;
                    self.touch_lru(set, way);
                } else {
                    stats.misses += 1;
                    result_cycles = tag_cycles.max(self.data_instants.base_read_cycles)
                        + self.config.miss_penalty_cycles;
                    if let Some(victim) = self.victim_way(set) {
                        let bytes = self.backing_line(line_addr).clone();
                        self.store_line(set, victim, tag_value, &bytes)?;
                        self.touch_lru(set, victim);
                    }
                }
                let base_cost = if hit_way.is_some() {
                    base
                } else {
                    base + self.config.miss_penalty_cycles
                };
                if result_cycles < base_cost {
                    result_cycles = base_cost;
                }
                stats.extended_cycles_total += (result_cycles - base_cost) as u64;
                Ok(AccessResult {
                    hit: hit_way.is_some(),
                    cycles: result_cycles,
                    corrected,
                })
            }
            AccessOp::Write => {
                let payload = record.payload.unwrap_or(0);
                let g = *self.geometry();
                let word_bytes = (g.port_width_bits / 8) as u64;
                let offset = (record.address % g.line_bytes as u64) / word_bytes * word_bytes;
                {
                    let line = self.backing_line(line_addr);
                    for i in 0..word_bytes {
                        line[(offset + i) as usize] = (payload >> (8 * i)) as u8;
                    }
                }
                let cycles;
                let hit = hit_way.is_some();
                match hit_way {
                    Some(way) => {
                        stats.hits += 1;
                        let bytes = self.backing_line(line_addr).clone();
                        self.store_line(set, way, tag_value, &bytes)?;
                        self.touch_lru(set, way);
                        cycles = base;
                    }
                    None => {
                        stats.misses += 1;
                        cycles = base + self.config.miss_penalty_cycles;
                        if let Some(victim) = self.victim_way(set) {
                            let bytes = self.backing_line(line_addr).clone();
                            self.store_line(set, victim, tag_value, &bytes)?;
                            self.touch_lru(set, victim);
                        }
                    }
                }
                Ok(AccessResult {
                    hit,
                    cycles,
                    corrected: false,
                })
            }
        }
    }

    /// Read a resident line's bytes as the pipeline would deliver them
    /// (confirmed bits). Test/debug surface.
    pub fn peek_line(&self, address: u64) -> Option<Vec<u8>> {
        let (set, tag_value, _) = self.decode(address);
        let way = self.find_hit(set, tag_value)?;
        Some(self.line_bytes_of(set, way))
    }
}

/// Run a trace to completion.
pub fn run_trace(cache: &mut CacheInstance, trace: &[AccessRecord]) -> Result<CacheStats> {
    if trace.is_empty() {
        return Err(Error::parameter("trace must not be empty".to_string()));
    }
    let mut stats = CacheStats::default();
    for rec in trace {
        cache.access(rec, &mut stats)?;
    }
    stats.avg_read_cycles = if stats.read_hits > 0 {
        stats.total_read_cycles as f64 / stats.read_hits as f64
    } else {
        0.0
    };
    stats.der_observed = if stats.words_read > 0 {
        stats.flagged_words as f64 / stats.words_read as f64
    } else {
        0.0
    };
    Ok(stats)
}

/// Throughput gain over a conventional design that spends `conv_cycles` per
/// read at period `ck_conv_ps`.
pub fn throughput_gain(
    stats: &CacheStats,
    conv_cycles: u32,
    ck_ts_ps: f64,
    ck_conv_ps: f64,
) -> Result<f64> {
    if stats.read_hits == 0 || !(stats.avg_read_cycles > 0.0) {
        return Err(Error::parameter("stats carry no read hits".to_string()));
    }
    Ok((conv_cycles as f64 * ck_conv_ps) / (stats.avg_read_cycles * ck_ts_ps))
}

/// Parse the ASCII trace format: `R <hex-address>` or
/// `W <hex-address> <hex-data>`, with `#` comments.
pub fn parse_trace(text: &str) -> Result<Vec<AccessRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let op = parts.next().unwrap();
        let parse_hex = |s: &str| {
            let s = s
                .strip_prefix("0x")
                .or_else(|| s.strip_prefix("0X"))
                .unwrap_or(s);
            u64::from_str_radix(s, 16)
        };
        let rec = match op {
            "R" | "r" => {
                let addr = parts.next().ok_or(Error::Ingestion {
                    line: line_no,
                    reason: "missing address".into(),
                })?;
                let address = parse_hex(addr).map_err(|e| Error::Ingestion {
                    line: line_no,
                    reason: format!("bad address {addr:?}: {e}"),
                })?;
                AccessRecord {
                    op: AccessOp::Read,
                    address,
                    payload: None,
                }
            }
            "W" | "w" => {
                let addr = parts.next().ok_or(Error::Ingestion {
                    line: line_no,
                    reason: "missing address".into(),
                })?;
                let data = parts.next().ok_or(Error::Ingestion {
                    line: line_no,
                    reason: "missing data".into(),
                })?;
                let address = parse_hex(addr).map_err(|e| Error::Ingestion {
                    line: line_no,
                    reason: format!("bad address {addr:?}: {e}"),
                })?;
                let payload = parse_hex(data).map_err(|e| Error::Ingestion {
                    line: line_no,
                    reason: format!("bad data {data:?}: {e}"),
                })?;
                AccessRecord {
                    op: AccessOp::Write,
                    address,
                    payload: Some(payload),
                }
            }
            other => {
                return Err(Error::Ingestion {
                    line: line_no,
                    reason: format!("unknown op {other:?}"),
                })
            }
        };
        if parts.next().is_some() {
            return Err(Error::Ingestion {
                line: line_no,
                reason: "trailing tokens".into(),
            });
        }
        out.push(rec);
    }
    Ok(out)
}

/// The production test pattern: write 0x55 into every byte, read every line
/// back, then the same with 0xAA.
pub fn generate_traverse_55aa(geometry: &CacheGeometry) -> Vec<AccessRecord> {
    let mut out = Vec::new();
    let word_bytes = (geometry.port_width_bits / 8) as u64;
    let capacity = geometry.capacity_bytes as u64;
    for pattern in [0x55u8, 0xAAu8] {
        let word = (0..8).fold(0u64, |acc, i| acc | ((pattern as u64) << (8 * i)));
        let mut addr = 0;
        while addr < capacity {
            out.push(AccessRecord {
                op: AccessOp::Write,
                address: addr,
                payload: Some(word),
            });
            addr += word_bytes;
        }
        let mut line = 0;
        while line < capacity {
            out.push(AccessRecord {
                op: AccessOp::Read,
                address: line,
                payload: None,
            });
            line += geometry.line_bytes as u64;
        }
    }
    out
}

/// Uniform random accesses over twice the cache capacity; one quarter are
/// writes.
pub fn generate_uniform_random(geometry: &CacheGeometry, seed: u64, n: u64) -> Vec<AccessRecord> {
    let mut rng = rng::stream(seed, &[tag::TRACE]);
    let span = 2 * geometry.capacity_bytes as u64;
    let word_bytes = (geometry.port_width_bits / 8) as u64;
    (0..n)
        .map(|_| {
            let address = rng.random_range(0..span / word_bytes) * word_bytes;
            if rng.random_range(0..4u32) == 0 {
                AccessRecord {
                    op: AccessOp::Write,
                    address,
                    payload: Some(rng.random()),
                }
            } else {
                AccessRecord {
                    op: AccessOp::Read,
                    address,
                    payload: None,
                }
            }
        })
        .collect()
}
