//! Set-associative LRU cache model.
//!
//! Turns a raw load stream into the miss stream the sampler consumes. A
//! bypass mode treats every load as a miss, which makes the sampler's exact
//! decimation oracle directly observable.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampler::MissEvent;
use crate::workload::LoadEvent;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CacheError {
    #[error("invalid cache config: {0}")]
    InvalidConfig(String),
    #[error("non-monotonic load time on thread {thread_id}: {now} < {prev}")]
    NonMonotonicTime { thread_id: u64, prev: u64, now: u64 },
}

/// Geometry of one private cache. Defaults give a 1 MiB, 16-way cache with
/// 64-byte lines; replacement is always LRU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheConfig {
    pub line_bytes: u64,
    pub ways: usize,
    pub sets: u64,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self {
            line_bytes: 64,
            ways: 16,
            sets: 1024,
        }
    }
}

impl CacheConfig {
    pub fn capacity_bytes(&self) -> u64 {
        self.line_bytes * self.ways as u64 * self.sets
    }

    pub fn validate(&self) -> Result<(), CacheError> {
        if self.line_bytes == 0 || !self.line_bytes.is_power_of_two() {
            return Err(CacheError::InvalidConfig(format!(
                "line_bytes {} must be a power of two",
                self.line_bytes
            )));
        }
        if self.sets == 0 || !self.sets.is_power_of_two() {
            return Err(CacheError::InvalidConfig(format!(
                "sets {} must be a power of two",
                self.sets
            )));
        }
        if self.ways == 0 {
            return Err(CacheError::InvalidConfig("ways must be >= 1".into()));
        }
        Ok(())
    }
}

/// Either a real LRU cache or a bypass that classifies every load as a miss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CacheKind {
    Bypass,
    Lru(CacheConfig),
}

impl CacheKind {
    pub fn validate(&self) -> Result<(), CacheError> {
        match self {
            CacheKind::Bypass => Ok(()),
            CacheKind::Lru(config) => config.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessOutcome {
    Hit,
    Miss,
}

/// Per-thread cache state: one MRU-first tag list per set.
#[derive(Debug, Clone)]
pub struct CacheState {
    config: CacheConfig,
    sets: Vec<Vec<u64>>,
}

impl CacheState {
    pub fn new(config: CacheConfig) -> Self {
        Self {
            sets: vec![Vec::with_capacity(config.ways); config.sets as usize],
            config,
        }
    }

    /// Look up `addr`: a hit moves its line to MRU, a miss inserts it at MRU
    /// and evicts the LRU line when the set is full.
    pub fn access(&mut self, addr: u64) -> AccessOutcome {
        let line = addr / self.config.line_bytes;
        let set = &mut self.sets[(line % self.config.sets) as usize];
        let tag = line / self.config.sets;
        if let Some(pos) = set.iter().position(|&t| t == tag) {
            set.remove(pos);
            set.insert(0, tag);
            return AccessOutcome::Hit;
        }
        if set.len() == self.config.ways {
            set.pop();
        }
        set.insert(0, tag);
        AccessOutcome::Miss
    }
}

/// Run a load stream through one private cache per thread and keep only the
/// misses, preserving order and timestamps. Returns the miss stream plus
/// aggregate hit/miss counts.
pub fn classify_stream(
    loads: &[LoadEvent],
    cache: CacheKind,
) -> Result<(Vec<MissEvent>, u64, u64), CacheError> {
    cache.validate()?;
    let mut states: HashMap<u64, CacheState> = HashMap::new();
    let mut last_time: HashMap<u64, u64> = HashMap::new();
    let mut misses = Vec::new();
    let (mut hit_count, mut miss_count) = (0u64, 0u64);

    for load in loads {
        if let Some(&prev) = last_time.get(&load.thread_id) {
            if load.time < prev {
                return Err(CacheError::NonMonotonicTime {
                    thread_id: load.thread_id,
                    prev,
                    now: load.time,
                });
            }
        }
        last_time.insert(load.thread_id, load.time);

        let outcome = match cache {
            CacheKind::Bypass => AccessOutcome::Miss,
            CacheKind::Lru(config) => states
                .entry(load.thread_id)
                .or_insert_with(|| CacheState::new(config))
                .access(load.addr),
        };
        match outcome {
            AccessOutcome::Hit => hit_count += 1,
            AccessOutcome::Miss => {
                miss_count += 1;
                misses.push(MissEvent {
                    thread_id: load.thread_id,
                    addr: load.addr,
                    time: load.time,
                });
            }
        }
    }
    Ok((misses, hit_count, miss_count))
}
