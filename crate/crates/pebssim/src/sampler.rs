//! Event-sampling state machine for one hardware thread.
//!
//! Models the countdown/assist/threshold-interrupt cycle: every `reset`-th
//! qualifying miss stores a record into the CPU buffer, and when the buffer
//! holds `threshold_records` records an interrupt harvests them into a
//! timestamped [`HarvestBatch`]. A polling mode drains the buffer on a fixed
//! period instead of taking interrupts.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Size of one raw hardware record: 24 64-bit fields.
pub const DEFAULT_RECORD_BYTES: u64 = 192;
/// Measured cost of one harvest interrupt, in cycles.
pub const DEFAULT_HANDLER_CYCLES: u64 = 20_000;
/// Default per-thread harvest ring capacity, in batches.
pub const DEFAULT_RING_CAPACITY: usize = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplerError {
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("non-monotonic event time on thread {thread_id}: {now} < {prev}")]
    NonMonotonicTime { thread_id: u64, prev: u64, now: u64 },
    #[error("event for thread {got} fed to sampler owned by thread {expected}")]
    WrongThread { expected: u64, got: u64 },
    #[error("poll_harvest called on a sampler in interrupt harvest mode")]
    NotPolling,
}

/// How records leave the CPU buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HarvestMode {
    /// A threshold interrupt drains the buffer when it fills.
    Interrupt,
    /// A dedicated poller drains the buffer every `period` logical time units.
    Polling { period: u64 },
}

/// Tunables of the sampling engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Qualifying events between consecutive records; lower = finer sampling.
    pub reset: u64,
    /// CPU buffer size in bytes.
    pub buffer_bytes: u64,
    /// Bytes per raw record; only the load address survives harvesting.
    pub record_bytes: u64,
    /// Buffered records that trigger an interrupt.
    pub threshold_records: u64,
    pub harvest_mode: HarvestMode,
    /// Cost of one interrupt, used by the overhead estimator.
    pub handler_cycles: u64,
    /// Offset added to the triggering event time when stamping a batch.
    pub handler_latency: u64,
    /// Per-thread harvest ring capacity, in batches.
    pub ring_capacity: usize,
}

impl SamplerConfig {
    /// Config with the given reset and buffer size and all other knobs at
    /// their defaults; the interrupt threshold defaults to full capacity.
    pub fn new(reset: u64, buffer_bytes: u64) -> Self {
        Self {
            reset,
            buffer_bytes,
            record_bytes: DEFAULT_RECORD_BYTES,
            threshold_records: buffer_bytes / DEFAULT_RECORD_BYTES,
            harvest_mode: HarvestMode::Interrupt,
            handler_cycles: DEFAULT_HANDLER_CYCLES,
            handler_latency: 0,
            ring_capacity: DEFAULT_RING_CAPACITY,
        }
    }

    /// Records the CPU buffer can hold.
    pub fn buffer_capacity(&self) -> u64 {
        self.buffer_bytes / self.record_bytes
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let fail = |msg: String| Err(SamplerError::InvalidConfig(msg));
        if self.reset == 0 {
            return fail("reset must be >= 1".into());
        }
        if self.record_bytes == 0 {
            return fail("record_bytes must be >= 1".into());
        }
        if self.threshold_records == 0 {
            return fail("threshold_records must be >= 1".into());
        }
        if self.record_bytes.saturating_mul(self.threshold_records) > self.buffer_bytes {
            return fail(format!(
                "threshold_records {} x record_bytes {} exceeds buffer_bytes {}",
                self.threshold_records, self.record_bytes, self.buffer_bytes
            ));
        }
        if self.ring_capacity == 0 {
            return fail("ring_capacity must be >= 1".into());
        }
        if let HarvestMode::Polling { period } = self.harvest_mode {
            if period == 0 {
                return fail("polling period must be >= 1".into());
            }
        }
        Ok(())
    }
}

/// A load that missed the cache, as consumed by the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MissEvent {
    pub thread_id: u64,
    pub addr: u64,
    /// Logical timestamp, non-decreasing within a thread's stream.
    pub time: u64,
}

/// One stored sample. The hardware writes 24 opaque fields per assist; only
/// the load address is kept at harvest time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PebsRecord {
    pub load_addr: u64,
}

/// Records drained by one harvest, sharing the harvest-time timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarvestBatch {
    pub thread_id: u64,
    /// 0-based harvest index within the thread.
    pub batch_seq: u64,
    /// Time of the harvest, not of the individual accesses.
    pub timestamp: u64,
    pub addrs: Vec<u64>,
}

/// Per-thread sampling engine.
///
/// Batch timestamps are clamped to be non-decreasing, mirroring a monotonic
/// clock read in the harvest path.
#[derive(Debug, Clone)]
pub struct Sampler {
    config: SamplerConfig,
    thread_id: u64,
    countdown: u64,
    pending: Vec<PebsRecord>,
    batch_seq: u64,
    last_event_time: Option<u64>,
    last_batch_time: u64,
}

impl Sampler {
    pub fn new(config: SamplerConfig, thread_id: u64) -> Result<Self, SamplerError> {
        config.validate()?;
        Ok(Self {
            countdown: config.reset,
            pending: Vec::with_capacity(config.threshold_records as usize),
            config,
            thread_id,
            batch_seq: 0,
            last_event_time: None,
            last_batch_time: 0,
        })
    }

    pub fn thread_id(&self) -> u64 {
        self.thread_id
    }

    /// Records currently buffered and not yet harvested.
    pub fn occupancy(&self) -> u64 {
        self.pending.len() as u64
    }

    /// Qualifying events remaining until the next record is stored.
    pub fn countdown(&self) -> u64 {
        self.countdown
    }

    /// Advance the countdown by one qualifying event. Stores a record when
    /// the countdown hits zero (the event itself is the one recorded) and, in
    /// interrupt mode, returns a batch once `threshold_records` are buffered.
    /// In polling mode records accumulate until [`Sampler::poll_harvest`].
    pub fn feed(&mut self, event: &MissEvent) -> Result<Option<HarvestBatch>, SamplerError> {
        if event.thread_id != self.thread_id {
            return Err(SamplerError::WrongThread {
                expected: self.thread_id,
                got: event.thread_id,
            });
        }
        if let Some(prev) = self.last_event_time {
            if event.time < prev {
                return Err(SamplerError::NonMonotonicTime {
                    thread_id: self.thread_id,
                    prev,
                    now: event.time,
                });
            }
        }
        self.last_event_time = Some(event.time);

        self.countdown -= 1;
        if self.countdown > 0 {
            return Ok(None);
        }
        self.countdown = self.config.reset;
        self.pending.push(PebsRecord {
            load_addr: event.addr,
        });

        if self.config.harvest_mode == HarvestMode::Interrupt
            && self.occupancy() >= self.config.threshold_records
        {
            return Ok(Some(self.drain(event.time + self.config.handler_latency)));
        }
        Ok(None)
    }

    /// Drain all buffered records as one batch stamped `now`. Polling mode only.
    pub fn poll_harvest(&mut self, now: u64) -> Result<Option<HarvestBatch>, SamplerError> {
        if !matches!(self.config.harvest_mode, HarvestMode::Polling { .. }) {
            return Err(SamplerError::NotPolling);
        }
        if self.pending.is_empty() {
            Ok(None)
        } else {
            Ok(Some(self.drain(now)))
        }
    }

    /// Drain any residual records as a final batch, e.g. at thread exit.
    /// Idempotent when the buffer is empty.
    pub fn flush(&mut self, now: u64) -> Option<HarvestBatch> {
        if self.pending.is_empty() {
            None
        } else {
            Some(self.drain(now))
        }
    }

    fn drain(&mut self, requested_time: u64) -> HarvestBatch {
        let timestamp = requested_time.max(self.last_batch_time);
        self.last_batch_time = timestamp;
        let batch = HarvestBatch {
            thread_id: self.thread_id,
            batch_seq: self.batch_seq,
            timestamp,
            addrs: self.pending.drain(..).map(|r| r.load_addr).collect(),
        };
        self.batch_seq += 1;
        batch
    }
}

/// Bounded ring of harvested batches. When full, the oldest batch is
/// overwritten and its records counted as dropped.
#[derive(Debug)]
pub struct HarvestRing {
    capacity: usize,
    batches: VecDeque<HarvestBatch>,
    dropped_records: u64,
}

impl HarvestRing {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            batches: VecDeque::new(),
            dropped_records: 0,
        }
    }

    pub fn push(&mut self, batch: HarvestBatch) {
        if self.batches.len() == self.capacity {
            if let Some(oldest) = self.batches.pop_front() {
                self.dropped_records += oldest.addrs.len() as u64;
            }
        }
        self.batches.push_back(batch);
    }

    /// Records lost to overwrites so far.
    pub fn dropped_records(&self) -> u64 {
        self.dropped_records
    }

    pub fn into_parts(self) -> (Vec<HarvestBatch>, u64) {
        (self.batches.into(), self.dropped_records)
    }
}

/// Drive a full per-thread miss stream through a sampler: feed every event,
/// poll at period boundaries in polling mode, flush the remainder at stream
/// end, and collect batches into a ring of `config.ring_capacity` entries.
///
/// Returns the retained batches plus the count of records lost to ring
/// overwrites. Deterministic: the same stream always yields identical output.
pub fn run_thread(
    config: &SamplerConfig,
    events: impl IntoIterator<Item = MissEvent>,
) -> Result<(Vec<HarvestBatch>, u64), SamplerError> {
    config.validate()?;
    let mut sampler: Option<Sampler> = None;
    let mut ring = HarvestRing::new(config.ring_capacity);
    let mut next_poll = match config.harvest_mode {
        HarvestMode::Polling { period } => Some(period),
        HarvestMode::Interrupt => None,
    };
    let mut last_time = None;

    for event in events {
        let sampler = match sampler.as_mut() {
            Some(s) => s,
            None => {
                sampler = Some(Sampler::new(config.clone(), event.thread_id)?);
                sampler.as_mut().unwrap()
            }
        };
        // Poll boundaries strictly before this event fire first; an event at
        // exactly the boundary lands in the next batch.
        if let (Some(np), HarvestMode::Polling { period }) = (next_poll.as_mut(), config.harvest_mode)
        {
            while *np <= event.time {
                if let Some(batch) = sampler.poll_harvest(*np)? {
                    ring.push(batch);
                }
                *np += period;
            }
        }
        if let Some(batch) = sampler.feed(&event)? {
            ring.push(batch);
        }
        last_time = Some(event.time);
    }

    if let (Some(sampler), Some(t)) = (sampler.as_mut(), last_time) {
        if let Some(batch) = sampler.flush(t + config.handler_latency) {
            ring.push(batch);
        }
    }
    Ok(ring.into_parts())
}
