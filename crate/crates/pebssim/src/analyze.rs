//! Offline analysis of trace dumps: mapping-history reconstruction, sample
//! classification, access heatmaps, per-page histograms, hot-page tagging,
//! coverage counts, interrupt-interval statistics, and the analytic overhead
//! model.
//!
//! Everything here is a pure function over immutable dump data; per-mapping
//! analyses are independent and deterministic regardless of evaluation order.

use std::collections::BTreeMap;

use crate::sampler::SamplerConfig;
use crate::trace::TraceDump;
use crate::workload::{MapKind, MappingEvent};
use crate::PAGE_SIZE;

/// Mappings at or below this size are not tracked (strictly-greater filter).
pub const DEFAULT_MAP_THRESHOLD_BYTES: u64 = 4 << 20;
/// Pages must exceed this many samples to be tagged as migration candidates.
pub const DEFAULT_HOT_THRESHOLD: u64 = 50;
/// Heatmap rows bin addresses into blocks of this many pages.
pub const DEFAULT_BLOCK_PAGES: u64 = 4;
/// Interval histograms default to this many bins across the observed range.
pub const INTERVAL_BINS: u64 = 50;

/// A contiguous span of address space alive over `[t_begin, t_end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveRange {
    pub mapping_id: u64,
    pub start: u64,
    pub length: u64,
    pub t_begin: u64,
    /// `u64::MAX` when never unmapped.
    pub t_end: u64,
}

impl LiveRange {
    pub fn end(&self) -> u64 {
        self.start + self.length
    }

    pub fn pages(&self) -> u64 {
        self.length.div_ceil(PAGE_SIZE)
    }

    /// Spatial and temporal membership test for one sample.
    pub fn contains(&self, addr: u64, time: u64) -> bool {
        addr >= self.start && addr < self.end() && time >= self.t_begin && time < self.t_end
    }
}

/// The address-space history rebuilt from a dump's mapping-event log.
#[derive(Debug, Clone, Default)]
pub struct MappingHistory {
    /// Every tracked range ever live, in creation order (ids are indices).
    pub ranges: Vec<LiveRange>,
    /// Anomalies observed while replaying the log (overlaps, no-op unmaps).
    pub warnings: Vec<String>,
}

impl MappingHistory {
    pub fn range(&self, mapping_id: u64) -> Option<&LiveRange> {
        self.ranges.get(mapping_id as usize)
    }

    pub fn live_at(&self, time: u64) -> impl Iterator<Item = &LiveRange> {
        self.ranges.iter().filter(move |r| time >= r.t_begin && time < r.t_end)
    }
}

/// Replay a time-ordered mapping log. Mmaps are tracked only when strictly
/// larger than `threshold_bytes`; every munmap applies regardless of size,
/// closing overlapped ranges at its timestamp and leaving up to two live
/// remainders (remainders are kept whatever their size). An mmap overlapping
/// a live tracked range is reported and skipped rather than resolved.
pub fn reconstruct(events: &[MappingEvent], threshold_bytes: u64) -> MappingHistory {
    let mut history = MappingHistory::default();
    let mut open: Vec<usize> = Vec::new();
    for event in events {
        match event.kind {
            MapKind::Mmap => {
                if event.length <= threshold_bytes {
                    continue;
                }
                let clash = open.iter().any(|&i| {
                    let r = &history.ranges[i];
                    event.start < r.end() && r.start < event.end()
                });
                if clash {
                    history.warnings.push(format!(
                        "mmap {:#x}+{} at t={} overlaps a live tracked range; skipped",
                        event.start, event.length, event.time
                    ));
                    continue;
                }
                open.push(history.ranges.len());
                history.ranges.push(LiveRange {
                    mapping_id: history.ranges.len() as u64,
                    start: event.start,
                    length: event.length,
                    t_begin: event.time,
                    t_end: u64::MAX,
                });
            }
            MapKind::Munmap => {
                let mut hit = false;
                let mut still_open = Vec::new();
                let mut remainders = Vec::new();
                for &i in &open {
                    let r = history.ranges[i].clone();
                    if event.start >= r.end() || r.start >= event.end() {
                        still_open.push(i);
                        continue;
                    }
                    hit = true;
                    history.ranges[i].t_end = event.time;
                    if r.start < event.start {
                        remainders.push((r.start, event.start - r.start));
                    }
                    if event.end() < r.end() {
                        remainders.push((event.end(), r.end() - event.end()));
                    }
                }
                for (start, length) in remainders {
                    still_open.push(history.ranges.len());
                    history.ranges.push(LiveRange {
                        mapping_id: history.ranges.len() as u64,
                        start,
                        length,
                        t_begin: event.time,
                        t_end: u64::MAX,
                    });
                }
                open = still_open;
                if !hit {
                    history.warnings.push(format!(
                        "munmap {:#x}+{} at t={} covers no tracked range; ignored",
                        event.start, event.length, event.time
                    ));
                }
            }
        }
    }
    history
}

/// One harvested record paired with its batch's coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sample {
    pub thread_id: u64,
    pub batch_seq: u64,
    pub timestamp: u64,
    pub addr: u64,
}

/// Classification result: samples routed to mappings, or discarded.
#[derive(Debug, Clone, Default)]
pub struct Classified {
    /// Samples per mapping id, in dump order.
    pub per_mapping: BTreeMap<u64, Vec<Sample>>,
    /// Samples matching no live range at their batch timestamp.
    pub discarded: u64,
}

impl Classified {
    pub fn assigned(&self) -> u64 {
        self.per_mapping.values().map(|v| v.len() as u64).sum()
    }
}

/// Route every record in the dump to the unique range containing its address
/// at its batch timestamp, counting the rest as discarded. Records only know
/// their interrupt's timestamp, so a batch straddling an munmap can
/// misclassify its pre-unmap records — the cost of batch-granularity time.
pub fn classify(dump: &TraceDump, history: &MappingHistory) -> Classified {
    let mut out = Classified::default();
    for thread in &dump.threads {
        for batch in &thread.batches {
            for &addr in &batch.addrs {
                match history.ranges.iter().find(|r| r.contains(addr, batch.timestamp)) {
                    Some(r) => out.per_mapping.entry(r.mapping_id).or_default().push(Sample {
                        thread_id: thread.thread_id,
                        batch_seq: batch.batch_seq,
                        timestamp: batch.timestamp,
                        addr,
                    }),
                    None => out.discarded += 1,
                }
            }
        }
    }
    out
}

/// Access-density matrix for one mapping: rows are batch sequence numbers,
/// columns are blocks of `block_pages` pages from the mapping base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heatmap {
    pub mapping_id: u64,
    pub block_pages: u64,
    /// Sparse counts keyed by (batch_seq, block index).
    pub cells: BTreeMap<(u64, u64), u64>,
}

impl Heatmap {
    pub fn total(&self) -> u64 {
        self.cells.values().sum()
    }

    pub fn max_count(&self) -> u64 {
        self.cells.values().copied().max().unwrap_or(0)
    }

    /// Distinct row indices, ascending.
    pub fn rows(&self) -> Vec<u64> {
        let mut rows: Vec<u64> = self.cells.keys().map(|&(seq, _)| seq).collect();
        rows.dedup();
        rows
    }

    /// Nonzero block indices of one row, ascending.
    pub fn row_blocks(&self, batch_seq: u64) -> Vec<u64> {
        self.cells
            .range((batch_seq, 0)..=(batch_seq, u64::MAX))
            .map(|(&(_, block), _)| block)
            .collect()
    }
}

pub fn heatmap(samples: &[Sample], range: &LiveRange, block_pages: u64) -> Heatmap {
    let block_bytes = block_pages * PAGE_SIZE;
    let mut cells: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for s in samples {
        *cells.entry((s.batch_seq, (s.addr - range.start) / block_bytes)).or_insert(0) += 1;
    }
    Heatmap { mapping_id: range.mapping_id, block_pages, cells }
}

/// Per-page sample counts for one mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PageHistogram {
    pub mapping_id: u64,
    /// Counts keyed by page index relative to the mapping base; pages with
    /// zero samples are absent.
    pub counts: BTreeMap<u64, u64>,
}

impl PageHistogram {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// The derived distribution: how many pages saw exactly N samples.
    pub fn by_count(&self) -> BTreeMap<u64, u64> {
        let mut hist = BTreeMap::new();
        for &count in self.counts.values() {
            *hist.entry(count).or_insert(0) += 1;
        }
        hist
    }
}

pub fn page_histogram(samples: &[Sample], range: &LiveRange) -> PageHistogram {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for s in samples {
        *counts.entry((s.addr - range.start) / PAGE_SIZE).or_insert(0) += 1;
    }
    PageHistogram { mapping_id: range.mapping_id, counts }
}

/// Pages with strictly more than `threshold` samples, as (page, count) pairs
/// sorted by descending count then ascending page.
pub fn hot_pages(hist: &PageHistogram, threshold: u64) -> Vec<(u64, u64)> {
    let mut hot: Vec<(u64, u64)> = hist
        .counts
        .iter()
        .filter(|&(_, &count)| count > threshold)
        .map(|(&page, &count)| (page, count))
        .collect();
    hot.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    hot
}

/// Distinct pages with at least one sample.
pub fn coverage(hist: &PageHistogram) -> u64 {
    hist.counts.len() as u64
}

/// Elapsed logical time between consecutive threshold interrupts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntervalStats {
    /// Timestamp deltas between consecutive full batches, per thread.
    pub deltas_by_thread: BTreeMap<u64, Vec<u64>>,
}

/// Fixed-width binning of interval deltas starting at zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalHistogram {
    pub bin_width: u64,
    pub bins: Vec<u64>,
}

impl IntervalStats {
    pub fn count(&self) -> u64 {
        self.deltas_by_thread.values().map(|v| v.len() as u64).sum()
    }

    /// All deltas across threads, in thread order.
    pub fn all(&self) -> Vec<u64> {
        self.deltas_by_thread.values().flatten().copied().collect()
    }

    pub fn min(&self) -> Option<u64> {
        self.all().into_iter().min()
    }

    pub fn max(&self) -> Option<u64> {
        self.all().into_iter().max()
    }

    pub fn mean(&self) -> Option<f64> {
        let all = self.all();
        if all.is_empty() {
            return None;
        }
        Some(all.iter().sum::<u64>() as f64 / all.len() as f64)
    }

    pub fn median(&self) -> Option<f64> {
        let mut all = self.all();
        if all.is_empty() {
            return None;
        }
        all.sort_unstable();
        let mid = all.len() / 2;
        Some(if all.len() % 2 == 1 {
            all[mid] as f64
        } else {
            (all[mid - 1] + all[mid]) as f64 / 2.0
        })
    }

    /// Bin the deltas; width defaults to 1/50 of the observed maximum.
    pub fn histogram(&self, bin_width: Option<u64>) -> IntervalHistogram {
        let all = self.all();
        let max = all.iter().copied().max().unwrap_or(0);
        let width = bin_width.unwrap_or_else(|| (max / INTERVAL_BINS).max(1)).max(1);
        let mut bins = vec![0u64; (max / width + 1) as usize];
        for delta in all {
            bins[(delta / width) as usize] += 1;
        }
        IntervalHistogram { bin_width: width, bins }
    }
}

/// Per-thread deltas between consecutive batch timestamps. A trailing batch
/// holding fewer than `threshold_records` records is a thread-exit flush, not
/// a threshold interrupt, so it contributes no delta. Threads with fewer than
/// two qualifying batches contribute nothing.
pub fn interrupt_intervals(dump: &TraceDump) -> IntervalStats {
    let mut stats = IntervalStats::default();
    for thread in &dump.threads {
        let mut batches = thread.batches.as_slice();
        if let Some(last) = batches.last() {
            if (last.addrs.len() as u64) < dump.threshold_records {
                batches = &batches[..batches.len() - 1];
            }
        }
        if batches.len() < 2 {
            continue;
        }
        let deltas = batches.windows(2).map(|w| w[1].timestamp - w[0].timestamp).collect();
        stats.deltas_by_thread.insert(thread.thread_id, deltas);
    }
    stats
}

/// Fraction of CPU time spent in the sampling interrupt handler: one
/// interrupt fires every `reset * threshold_records` misses, each burning
/// `handler_cycles` cycles.
pub fn overhead_estimate(config: &SamplerConfig, miss_rate: f64, cpu_hz: f64) -> f64 {
    debug_assert!(cpu_hz > 0.0, "cpu_hz must be positive");
    let misses_per_interrupt = (config.reset * config.threshold_records) as f64;
    miss_rate / misses_per_interrupt * config.handler_cycles as f64 / cpu_hz
}
