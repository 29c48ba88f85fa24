//! Synthetic multi-threaded load streams with known ground truth, plus CSV
//! ingest of external traces.
//!
//! All generators are pure functions of their spec: the PRNG is ChaCha8
//! (`rand_chacha`), seeded explicitly, so streams are bitwise reproducible
//! across platforms. Each generated workload carries the exact per-page
//! access-count map as a ground-truth oracle for downstream tests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::PAGE_SIZE;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("validation: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A raw memory load, before cache classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadEvent {
    pub thread_id: u64,
    pub addr: u64,
    /// Logical timestamp, non-decreasing within a thread's stream.
    pub time: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Mmap,
    Munmap,
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Mmap => write!(f, "mmap"),
            MapKind::Munmap => write!(f, "munmap"),
        }
    }
}

/// An mmap/munmap record used to reconstruct the address-space history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MappingEvent {
    pub kind: MapKind,
    /// Page-aligned start address.
    pub start: u64,
    /// Length in bytes, > 0.
    pub length: u64,
    pub time: u64,
}

impl MappingEvent {
    pub fn end(&self) -> u64 {
        self.start + self.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// Linear sweeps over the region at a fixed stride (MiniFE-like band).
    StrideSweep,
    /// A fixed subset of pages takes most accesses (Lulesh-like stable rows).
    HotSet,
    UniformRandom,
}

/// Parameters of a synthetic workload.
///
/// `iterations` counts full sweeps for [`Pattern::StrideSweep`] and loads per
/// thread for the random patterns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub pattern: Pattern,
    pub region_start: u64,
    pub region_len: u64,
    pub stride_bytes: u64,
    pub iterations: u64,
    /// Loads sharing one logical time unit.
    pub events_per_unit_time: u64,
    pub seed: u64,
    pub thread_count: u64,
    /// Pages in the hot set (hot_set pattern only).
    pub hot_page_count: u64,
    /// Share of accesses landing in the hot set, default 0.9.
    pub hot_fraction: f64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            pattern: Pattern::StrideSweep,
            region_start: 0x1000_0000,
            region_len: 6 << 20,
            stride_bytes: 64,
            iterations: 1,
            events_per_unit_time: 1,
            seed: 1,
            thread_count: 1,
            hot_page_count: 10,
            hot_fraction: 0.9,
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let fail = |msg: String| Err(WorkloadError::InvalidSpec(msg));
        if self.stride_bytes == 0 || self.region_len < self.stride_bytes {
            return fail(format!(
                "need region_len >= stride_bytes > 0, got {} and {}",
                self.region_len, self.stride_bytes
            ));
        }
        if !self.region_start.is_multiple_of(PAGE_SIZE) {
            return fail(format!("region_start {:#x} not page-aligned", self.region_start));
        }
        if self.iterations == 0 {
            return fail("iterations must be >= 1".into());
        }
        if self.events_per_unit_time == 0 {
            return fail("events_per_unit_time must be >= 1".into());
        }
        if self.thread_count == 0 {
            return fail("thread_count must be >= 1".into());
        }
        if self.pattern == Pattern::HotSet {
            if !(0.0..=1.0).contains(&self.hot_fraction) {
                return fail(format!("hot_fraction {} outside [0, 1]", self.hot_fraction));
            }
            if self.hot_page_count == 0 || self.hot_page_count > self.region_pages() {
                return fail(format!(
                    "hot_page_count {} outside 1..={} region pages",
                    self.hot_page_count,
                    self.region_pages()
                ));
            }
        }
        if matches!(self.pattern, Pattern::HotSet | Pattern::UniformRandom)
            && self.region_pages() == 0
        {
            return fail("region smaller than one page".into());
        }
        Ok(())
    }

    pub fn region_pages(&self) -> u64 {
        self.region_len / PAGE_SIZE
    }
}

/// A generated load stream plus its mapping log and ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workload {
    pub loads: Vec<LoadEvent>,
    pub mappings: Vec<MappingEvent>,
    /// Exact per-page access counts (absolute page index = addr / 4096),
    /// aggregated over all threads.
    pub page_counts: BTreeMap<u64, u64>,
    /// The true hot set, empty for patterns without one.
    pub hot_pages: BTreeSet<u64>,
}

pub fn generate(spec: &WorkloadSpec) -> Result<Workload, WorkloadError> {
    spec.validate()?;
    match spec.pattern {
        Pattern::StrideSweep => gen_stride_sweep(spec),
        Pattern::HotSet => gen_hot_set(spec),
        Pattern::UniformRandom => gen_uniform_random(spec),
    }
}

fn thread_rng(seed: u64, thread_id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ thread_id.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Timestamp of the i-th load (0-based): one unit per
/// `events_per_unit_time` loads, starting at 1.
fn load_time(i: u64, events_per_unit_time: u64) -> u64 {
    1 + i / events_per_unit_time
}

fn assemble(
    spec: &WorkloadSpec,
    loads: Vec<LoadEvent>,
    hot_pages: BTreeSet<u64>,
) -> Workload {
    let mut page_counts = BTreeMap::new();
    for load in &loads {
        *page_counts.entry(load.addr / PAGE_SIZE).or_insert(0) += 1;
    }
    let last_time = loads.iter().map(|l| l.time).max().unwrap_or(0);
    let mappings = vec![
        MappingEvent {
            kind: MapKind::Mmap,
            start: spec.region_start,
            length: spec.region_len,
            time: 0,
        },
        MappingEvent {
            kind: MapKind::Munmap,
            start: spec.region_start,
            length: spec.region_len,
            time: last_time + 1,
        },
    ];
    Workload {
        loads,
        mappings,
        page_counts,
        hot_pages,
    }
}

/// Interleave per-thread address streams into one load list ordered by
/// (position, thread), with per-thread timestamps.
fn interleave(spec: &WorkloadSpec, per_thread: Vec<Vec<u64>>) -> Vec<LoadEvent> {
    let n = per_thread.iter().map(Vec::len).max().unwrap_or(0);
    let mut loads = Vec::with_capacity(per_thread.iter().map(Vec::len).sum());
    for i in 0..n {
        for (thread_id, addrs) in per_thread.iter().enumerate() {
            if let Some(&addr) = addrs.get(i) {
                loads.push(LoadEvent {
                    thread_id: thread_id as u64,
                    addr,
                    time: load_time(i as u64, spec.events_per_unit_time),
                });
            }
        }
    }
    loads
}

/// `iterations` ascending sweeps over the region at `stride_bytes`, every
/// thread sweeping the full region.
pub fn gen_stride_sweep(spec: &WorkloadSpec) -> Result<Workload, WorkloadError> {
    expect_pattern(spec, Pattern::StrideSweep)?;
    let spans = spec.region_len / spec.stride_bytes;
    let sweep: Vec<u64> = (0..spans)
        .map(|j| spec.region_start + j * spec.stride_bytes)
        .collect();
    let mut addrs = Vec::with_capacity((spans * spec.iterations) as usize);
    for _ in 0..spec.iterations {
        addrs.extend_from_slice(&sweep);
    }
    let per_thread = vec![addrs; spec.thread_count as usize];
    Ok(assemble(spec, interleave(spec, per_thread), BTreeSet::new()))
}

/// A seeded choice of `hot_page_count` pages receives `hot_fraction` of all
/// accesses; the remainder is uniform over the whole region. Addresses are
/// 8-byte aligned within their page.
pub fn gen_hot_set(spec: &WorkloadSpec) -> Result<Workload, WorkloadError> {
    expect_pattern(spec, Pattern::HotSet)?;
    let pages = spec.region_pages();

    // The hot set is shared by all threads; pick it before the streams.
    let mut chooser = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut candidates: Vec<u64> = (0..pages).collect();
    for i in (1..candidates.len()).rev() {
        let j = (chooser.next_u64() % (i as u64 + 1)) as usize;
        candidates.swap(i, j);
    }
    let hot: Vec<u64> = candidates[..spec.hot_page_count as usize].to_vec();
    let hot_pages: BTreeSet<u64> = hot
        .iter()
        .map(|p| (spec.region_start + p * PAGE_SIZE) / PAGE_SIZE)
        .collect();

    let mut per_thread = Vec::with_capacity(spec.thread_count as usize);
    for thread_id in 0..spec.thread_count {
        let mut rng = thread_rng(spec.seed, thread_id);
        let mut addrs = Vec::with_capacity(spec.iterations as usize);
        for _ in 0..spec.iterations {
            let unit = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            let page = if unit < spec.hot_fraction {
                hot[(rng.next_u64() % spec.hot_page_count) as usize]
            } else {
                rng.next_u64() % pages
            };
            let offset = (rng.next_u64() % (PAGE_SIZE / 8)) * 8;
            addrs.push(spec.region_start + page * PAGE_SIZE + offset);
        }
        per_thread.push(addrs);
    }
    Ok(assemble(spec, interleave(spec, per_thread), hot_pages))
}

/// Seeded uniform page-grain addresses over the region.
pub fn gen_uniform_random(spec: &WorkloadSpec) -> Result<Workload, WorkloadError> {
    expect_pattern(spec, Pattern::UniformRandom)?;
    let pages = spec.region_pages();
    let mut per_thread = Vec::with_capacity(spec.thread_count as usize);
    for thread_id in 0..spec.thread_count {
        let mut rng = thread_rng(spec.seed, thread_id);
        let addrs: Vec<u64> = (0..spec.iterations)
            .map(|_| spec.region_start + (rng.next_u64() % pages) * PAGE_SIZE)
            .collect();
        per_thread.push(addrs);
    }
    Ok(assemble(spec, interleave(spec, per_thread), BTreeSet::new()))
}

fn expect_pattern(spec: &WorkloadSpec, expected: Pattern) -> Result<(), WorkloadError> {
    spec.validate()?;
    if spec.pattern != expected {
        return Err(WorkloadError::InvalidSpec(format!(
            "generator expects {expected:?}, spec says {:?}",
            spec.pattern
        )));
    }
    Ok(())
}

pub const LOADS_CSV_HEADER: &str = "thread_id,addr,time";
pub const MAPPINGS_CSV_HEADER: &str = "kind,start,length,time";

/// Write loads as `thread_id,addr,time` rows, addresses 0x-prefixed hex,
/// LF line endings.
pub fn write_loads_csv(path: &Path, loads: &[LoadEvent]) -> Result<(), WorkloadError> {
    let mut out = String::with_capacity(loads.len() * 32 + 32);
    out.push_str(LOADS_CSV_HEADER);
    out.push('\n');
    for load in loads {
        out.push_str(&format!("{},{:#x},{}\n", load.thread_id, load.addr, load.time));
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_mappings_csv(path: &Path, mappings: &[MappingEvent]) -> Result<(), WorkloadError> {
    let mut out = String::new();
    out.push_str(MAPPINGS_CSV_HEADER);
    out.push('\n');
    for m in mappings {
        out.push_str(&format!("{},{:#x},{},{}\n", m.kind, m.start, m.length, m.time));
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

fn parse_u64(field: &str) -> Result<u64, String> {
    let field = field.trim();
    if let Some(hex) = field.strip_prefix("0x").or_else(|| field.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).map_err(|e| format!("bad hex value {field:?}: {e}"))
    } else {
        field.parse().map_err(|e| format!("bad value {field:?}: {e}"))
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> WorkloadError {
    WorkloadError::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parse a load CSV and validate per-thread time monotonicity.
pub fn read_loads_csv(path: &Path) -> Result<Vec<LoadEvent>, WorkloadError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == LOADS_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(parse_err(path, 1, format!("expected header {LOADS_CSV_HEADER:?}, got {header:?}")))
        }
        None => return Ok(Vec::new()),
    }
    let mut loads = Vec::new();
    let mut last_time: BTreeMap<u64, u64> = BTreeMap::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(path, lineno, format!("expected 3 fields, got {}", fields.len())));
        }
        let thread_id = parse_u64(fields[0]).map_err(|m| parse_err(path, lineno, m))?;
        let addr = parse_u64(fields[1]).map_err(|m| parse_err(path, lineno, m))?;
        let time = parse_u64(fields[2]).map_err(|m| parse_err(path, lineno, m))?;
        if let Some(&prev) = last_time.get(&thread_id) {
            if time < prev {
                return Err(WorkloadError::Validation(format!(
                    "{}:{}: non-monotonic time {} < {} on thread {}",
                    path.display(),
                    lineno,
                    time,
                    prev,
                    thread_id
                )));
            }
        }
        last_time.insert(thread_id, time);
        loads.push(LoadEvent { thread_id, addr, time });
    }
    Ok(loads)
}

/// Parse a mapping CSV; starts must be page-aligned, lengths positive and
/// timestamps non-decreasing.
pub fn read_mappings_csv(path: &Path) -> Result<Vec<MappingEvent>, WorkloadError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == MAPPINGS_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(parse_err(path, 1, format!("expected header {MAPPINGS_CSV_HEADER:?}, got {header:?}")))
        }
        None => return Ok(Vec::new()),
    }
    let mut mappings: Vec<MappingEvent> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(path, lineno, format!("expected 4 fields, got {}", fields.len())));
        }
        let kind = match fields[0].trim() {
            "mmap" => MapKind::Mmap,
            "munmap" => MapKind::Munmap,
            other => return Err(parse_err(path, lineno, format!("unknown kind {other:?}"))),
        };
        let start = parse_u64(fields[1]).map_err(|m| parse_err(path, lineno, m))?;
        let length = parse_u64(fields[2]).map_err(|m| parse_err(path, lineno, m))?;
        let time = parse_u64(fields[3]).map_err(|m| parse_err(path, lineno, m))?;
        if start % PAGE_SIZE != 0 {
            return Err(WorkloadError::Validation(format!(
                "{}:{}: start {start:#x} not page-aligned",
                path.display(),
                lineno
            )));
        }
        if length == 0 {
            return Err(WorkloadError::Validation(format!(
                "{}:{}: zero-length mapping",
                path.display(),
                lineno
            )));
        }
        if let Some(prev) = mappings.last() {
            if time < prev.time {
                return Err(WorkloadError::Validation(format!(
                    "{}:{}: mapping events out of time order",
                    path.display(),
                    lineno
                )));
            }
        }
        mappings.push(MappingEvent { kind, start, length, time });
    }
    Ok(mappings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stride_single_sweep_hits_page_starts_ascending() {
        let spec = WorkloadSpec {
            region_len: 16 * PAGE_SIZE,
            stride_bytes: PAGE_SIZE,
            ..Default::default()
        };
        let workload = gen_stride_sweep(&spec).unwrap();
        assert_eq!(workload.loads.len(), 16);
        for (i, load) in workload.loads.iter().enumerate() {
            assert_eq!(load.addr, spec.region_start + i as u64 * PAGE_SIZE);
        }
        assert!(workload.loads.windows(2).all(|w| w[0].addr < w[1].addr));
    }

    #[test]
    fn stride_two_iterations_repeat_with_increasing_times() {
        let spec = WorkloadSpec {
            region_len: 4 * PAGE_SIZE,
            stride_bytes: PAGE_SIZE,
            iterations: 2,
            ..Default::default()
        };
        let workload = gen_stride_sweep(&spec).unwrap();
        assert_eq!(workload.loads.len(), 8);
        let addrs: Vec<u64> = workload.loads.iter().map(|l| l.addr).collect();
        assert_eq!(addrs[..4], addrs[4..]);
        assert!(workload.loads.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn six_mib_region_is_large_enough_to_track() {
        let spec = WorkloadSpec {
            region_len: 6 << 20,
            ..Default::default()
        };
        let workload = gen_stride_sweep(&spec).unwrap();
        assert_eq!(workload.mappings[0].kind, MapKind::Mmap);
        assert_eq!(workload.mappings[0].length, 6 << 20);
        assert!(workload.mappings[0].length > 4 << 20);
    }

    #[test]
    fn hot_fraction_one_single_page_takes_everything() {
        let spec = WorkloadSpec {
            pattern: Pattern::HotSet,
            region_len: 64 * PAGE_SIZE,
            iterations: 500,
            hot_page_count: 1,
            hot_fraction: 1.0,
            ..Default::default()
        };
        let workload = gen_hot_set(&spec).unwrap();
        let hot_page = *workload.hot_pages.iter().next().unwrap();
        assert!(workload.loads.iter().all(|l| l.addr / PAGE_SIZE == hot_page));
    }

    #[test]
    fn generators_are_deterministic_per_seed() {
        for pattern in [Pattern::HotSet, Pattern::UniformRandom] {
            let spec = WorkloadSpec {
                pattern,
                region_len: 128 * PAGE_SIZE,
                iterations: 2000,
                seed: 99,
                thread_count: 3,
                ..Default::default()
            };
            let a = generate(&spec).unwrap();
            let b = generate(&spec).unwrap();
            assert_eq!(a, b);
            let different_seed = generate(&WorkloadSpec { seed: 100, ..spec }).unwrap();
            assert_ne!(a.loads, different_seed.loads);
        }
    }

    #[test]
    fn hot_set_takes_roughly_its_share() {
        let spec = WorkloadSpec {
            pattern: Pattern::HotSet,
            region_len: 256 * PAGE_SIZE,
            iterations: 10_000,
            hot_page_count: 10,
            hot_fraction: 0.9,
            seed: 7,
            ..Default::default()
        };
        let workload = gen_hot_set(&spec).unwrap();
        assert_eq!(workload.hot_pages.len(), 10);
        let hot_hits = workload
            .loads
            .iter()
            .filter(|l| workload.hot_pages.contains(&(l.addr / PAGE_SIZE)))
            .count();
        // 90% target plus the uniform remainder spilling onto hot pages;
        // +-4 sigma of binomial(10_000, 0.9) is about +-120.
        assert!(
            (8_800..=9_400).contains(&hot_hits),
            "hot pages took {hot_hits} of 10000"
        );
    }

    #[test]
    fn uniform_two_pages_split_evenly() {
        let spec = WorkloadSpec {
            pattern: Pattern::UniformRandom,
            region_len: 2 * PAGE_SIZE,
            iterations: 10_000,
            seed: 3,
            ..Default::default()
        };
        let workload = gen_uniform_random(&spec).unwrap();
        let first_page = spec.region_start / PAGE_SIZE;
        let on_first = workload.page_counts.get(&first_page).copied().unwrap_or(0);
        assert!((4_700..=5_300).contains(&on_first), "page 0 got {on_first}");
        assert_eq!(workload.page_counts.values().sum::<u64>(), 10_000);
    }

    #[test]
    fn uniform_single_page_region() {
        let spec = WorkloadSpec {
            pattern: Pattern::UniformRandom,
            region_len: PAGE_SIZE,
            iterations: 100,
            ..Default::default()
        };
        let workload = gen_uniform_random(&spec).unwrap();
        assert!(workload
            .loads
            .iter()
            .all(|l| l.addr == spec.region_start));
    }

    #[test]
    fn ground_truth_matches_direct_stream_count() {
        let spec = WorkloadSpec {
            pattern: Pattern::HotSet,
            region_len: 64 * PAGE_SIZE,
            iterations: 5_000,
            thread_count: 2,
            ..Default::default()
        };
        let workload = generate(&spec).unwrap();
        let mut direct = BTreeMap::new();
        for load in &workload.loads {
            *direct.entry(load.addr / PAGE_SIZE).or_insert(0u64) += 1;
        }
        assert_eq!(workload.page_counts, direct);
    }

    #[test]
    fn loads_stay_inside_the_mapped_window() {
        for pattern in [Pattern::StrideSweep, Pattern::HotSet, Pattern::UniformRandom] {
            let spec = WorkloadSpec {
                pattern,
                region_len: 32 * PAGE_SIZE,
                stride_bytes: 128,
                iterations: 300,
                thread_count: 2,
                ..Default::default()
            };
            let workload = generate(&spec).unwrap();
            let mmap = &workload.mappings[0];
            let munmap = &workload.mappings[1];
            for load in &workload.loads {
                assert!(load.addr >= mmap.start && load.addr < mmap.end());
                assert!(load.time > mmap.time && load.time < munmap.time);
            }
        }
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let spec = WorkloadSpec {
            region_len: 8 * PAGE_SIZE,
            stride_bytes: 512,
            thread_count: 2,
            ..Default::default()
        };
        let workload = gen_stride_sweep(&spec).unwrap();

        let loads_path = dir.path().join("loads.csv");
        let maps_path = dir.path().join("maps.csv");
        write_loads_csv(&loads_path, &workload.loads).unwrap();
        write_mappings_csv(&maps_path, &workload.mappings).unwrap();
        assert_eq!(read_loads_csv(&loads_path).unwrap(), workload.loads);
        assert_eq!(read_mappings_csv(&maps_path).unwrap(), workload.mappings);
    }

    #[test]
    fn schema_row_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        fs::write(&path, "thread_id,addr,time\n0,0x7f0000000000,100\n").unwrap();
        let loads = read_loads_csv(&path).unwrap();
        assert_eq!(
            loads,
            vec![LoadEvent { thread_id: 0, addr: 0x7f00_0000_0000, time: 100 }]
        );
    }

    #[test]
    fn header_only_file_gives_empty_stream() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        fs::write(&path, "thread_id,addr,time\n").unwrap();
        assert!(read_loads_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "thread_id,addr,time\n0,0x10,1\n0,zzz,2\n").unwrap();
        match read_loads_csv(&path).unwrap_err() {
            WorkloadError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn non_monotonic_csv_time_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("backwards.csv");
        fs::write(&path, "thread_id,addr,time\n0,0x10,5\n0,0x20,4\n").unwrap();
        assert!(matches!(
            read_loads_csv(&path).unwrap_err(),
            WorkloadError::Validation(_)
        ));
    }

    #[test]
    fn misaligned_mapping_start_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("maps.csv");
        fs::write(&path, "kind,start,length,time\nmmap,0x1001,8192,0\n").unwrap();
        assert!(matches!(
            read_mappings_csv(&path).unwrap_err(),
            WorkloadError::Validation(_)
        ));
    }
}
