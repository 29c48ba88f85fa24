//! End-to-end pipeline: synthetic workload → cache filter → per-thread
//! sampling → trace dump.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cache::{classify_stream, CacheError, CacheKind};
use crate::sampler::{run_thread, MissEvent, SamplerConfig, SamplerError};
use crate::trace::{DumpError, ThreadTrace, TraceDump};
use crate::workload::{generate, Workload, WorkloadError, WorkloadSpec};
use crate::PAGE_SIZE;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Dump(#[from] DumpError),
}

/// Everything one simulation run needs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub workload: WorkloadSpec,
    pub cache: CacheKind,
    pub sampler: SamplerConfig,
}

/// Counters reported after a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimSummary {
    pub loads: u64,
    pub hits: u64,
    pub misses: u64,
    pub records: u64,
    pub batches: u64,
    pub dropped: u64,
}

/// Generate the workload and run the full pipeline.
pub fn simulate(config: &SimConfig) -> Result<(TraceDump, SimSummary), SimError> {
    let workload = generate(&config.workload)?;
    simulate_workload(&workload, config)
}

/// Run the pipeline over a pre-generated workload, for callers that need the
/// generator's ground truth alongside the resulting dump.
pub fn simulate_workload(
    workload: &Workload,
    config: &SimConfig,
) -> Result<(TraceDump, SimSummary), SimError> {
    config.sampler.validate()?;
    let (misses, hits, miss_count) = classify_stream(&workload.loads, config.cache)?;

    // One private sampler per thread, matching the per-thread CPU buffers.
    let mut per_thread: BTreeMap<u64, Vec<MissEvent>> = BTreeMap::new();
    for miss in misses {
        per_thread.entry(miss.thread_id).or_default().push(miss);
    }

    let mut summary = SimSummary {
        loads: workload.loads.len() as u64,
        hits,
        misses: miss_count,
        ..SimSummary::default()
    };
    let mut threads = Vec::with_capacity(per_thread.len());
    for (thread_id, events) in per_thread {
        let (batches, dropped) = run_thread(&config.sampler, events)?;
        summary.records += batches.iter().map(|b| b.addrs.len() as u64).sum::<u64>();
        summary.batches += batches.len() as u64;
        summary.dropped += dropped;
        threads.push(ThreadTrace { thread_id, dropped, batches });
    }

    let dump = TraceDump {
        page_size: PAGE_SIZE as u32,
        reset: config.sampler.reset,
        buffer_bytes: config.sampler.buffer_bytes,
        threshold_records: config.sampler.threshold_records,
        mappings: workload.mappings.clone(),
        threads,
    };
    dump.validate()?;
    Ok((dump, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::CacheConfig;
    use crate::workload::Pattern;

    fn stride_config(reset: u64) -> SimConfig {
        SimConfig {
            workload: WorkloadSpec { pattern: Pattern::StrideSweep, ..WorkloadSpec::default() },
            cache: CacheKind::Bypass,
            sampler: SamplerConfig::new(reset, 8192),
        }
    }

    #[test]
    fn bypass_records_are_floor_misses_over_reset() {
        let (dump, summary) = simulate(&stride_config(64)).unwrap();
        assert_eq!(summary.loads, summary.misses, "bypass: every load misses");
        assert_eq!(summary.hits, 0);
        assert_eq!(summary.records, summary.misses / 64);
        assert_eq!(summary.records, dump.total_records() + summary.dropped);
        assert_eq!(summary.batches, dump.total_batches());
    }

    #[test]
    fn same_config_same_dump() {
        let (a, _) = simulate(&stride_config(64)).unwrap();
        let (b, _) = simulate(&stride_config(64)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
    }

    #[test]
    fn threads_appear_sorted_with_own_batches() {
        let config = SimConfig {
            workload: WorkloadSpec {
                pattern: Pattern::UniformRandom,
                thread_count: 4,
                iterations: 5_000,
                ..WorkloadSpec::default()
            },
            cache: CacheKind::Bypass,
            sampler: SamplerConfig::new(8, 8192),
        };
        let (dump, _) = simulate(&config).unwrap();
        let ids: Vec<u64> = dump.threads.iter().map(|t| t.thread_id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        for thread in &dump.threads {
            assert!(!thread.batches.is_empty(), "thread {} sampled nothing", thread.thread_id);
        }
    }

    #[test]
    fn real_cache_reduces_miss_stream() {
        let mut config = stride_config(1);
        // A sweep touching each 64-byte line once per pass has no reuse, so
        // make the cache small and the sweep repeated to show filtering.
        config.workload.iterations = 3;
        config.cache = CacheKind::Lru(CacheConfig::default());
        let (_, with_cache) = simulate(&config).unwrap();
        config.cache = CacheKind::Bypass;
        let (_, bypass) = simulate(&config).unwrap();
        assert_eq!(with_cache.loads, bypass.loads);
        assert!(with_cache.misses <= bypass.misses);
        assert_eq!(bypass.hits, 0);
    }

    #[test]
    fn invalid_sampler_config_is_rejected_before_generation() {
        let mut config = stride_config(64);
        config.sampler.reset = 0;
        assert!(matches!(simulate(&config), Err(SimError::Sampler(_))));
    }
}
