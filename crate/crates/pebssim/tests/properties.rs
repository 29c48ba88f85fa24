//! Randomized invariants: facts that must hold for every input, not just the
//! curated fixtures in the unit tests.

use std::collections::BTreeSet;

use proptest::prelude::*;

use pebssim::analyze::{classify, page_histogram, reconstruct};
use pebssim::cache::{classify_stream, CacheConfig, CacheKind};
use pebssim::sampler::{run_thread, HarvestBatch, MissEvent, SamplerConfig};
use pebssim::trace::{ThreadTrace, TraceDump};
use pebssim::workload::{LoadEvent, MapKind, MappingEvent};
use pebssim::PAGE_SIZE;

fn events(addrs: &[u64]) -> Vec<MissEvent> {
    addrs
        .iter()
        .enumerate()
        .map(|(i, &addr)| MissEvent { thread_id: 0, addr, time: i as u64 + 1 })
        .collect()
}

/// Well-formed mapping timelines: times non-decreasing via prefix sums.
fn arb_mappings() -> impl Strategy<Value = Vec<MappingEvent>> {
    proptest::collection::vec(
        (any::<bool>(), 0u64..1 << 30, 1u64..1 << 24, 0u64..50),
        0..6,
    )
    .prop_map(|items| {
        let mut time = 0;
        items
            .into_iter()
            .map(|(is_map, start, length, dt)| {
                time += dt;
                MappingEvent {
                    kind: if is_map { MapKind::Mmap } else { MapKind::Munmap },
                    start: start & !(PAGE_SIZE - 1),
                    length: length.next_multiple_of(PAGE_SIZE),
                    time,
                }
            })
            .collect()
    })
}

/// Well-formed per-thread batch lists: batch_seq strictly increasing,
/// timestamps non-decreasing, no empty batches.
fn arb_threads() -> impl Strategy<Value = Vec<ThreadTrace>> {
    proptest::collection::vec(
        (
            0u64..100,
            proptest::collection::vec(
                (1u64..5, 0u64..1000, proptest::collection::vec(any::<u64>(), 1..8)),
                0..8,
            ),
        ),
        0..4,
    )
    .prop_map(|threads| {
        threads
            .into_iter()
            .enumerate()
            .map(|(thread_id, (dropped, raw))| {
                let thread_id = thread_id as u64;
                let (mut seq, mut ts) = (0, 0);
                let batches = raw
                    .into_iter()
                    .map(|(dseq, dts, addrs)| {
                        seq += dseq;
                        ts += dts;
                        HarvestBatch { thread_id, batch_seq: seq, timestamp: ts, addrs }
                    })
                    .collect();
                ThreadTrace { thread_id, dropped, batches }
            })
            .collect()
    })
}

fn arb_dump() -> impl Strategy<Value = TraceDump> {
    (arb_mappings(), arb_threads(), 1u64..512, 1u64..1 << 16, 1u64..256).prop_map(
        |(mappings, threads, reset, buffer_bytes, threshold_records)| TraceDump {
            page_size: PAGE_SIZE as u32,
            reset,
            buffer_bytes,
            threshold_records,
            mappings,
            threads,
        },
    )
}

proptest! {
    /// The sampler is pure decimation: it keeps exactly every reset-th record.
    #[test]
    fn sampler_keeps_every_reset_th_address(
        addrs in proptest::collection::vec(any::<u64>(), 0..400),
        reset in 1u64..=64,
    ) {
        let (batches, dropped) =
            run_thread(&SamplerConfig::new(reset, 1 << 22), events(&addrs)).unwrap();
        prop_assert_eq!(dropped, 0);
        let got: Vec<u64> = batches.into_iter().flat_map(|b| b.addrs).collect();
        let want: Vec<u64> = addrs
            .iter()
            .copied()
            .skip(reset as usize - 1)
            .step_by(reset as usize)
            .collect();
        prop_assert_eq!(got, want);
    }

    /// Ring overwrites lose batches but never records from the ledger:
    /// retained + dropped always equals the decimated total.
    #[test]
    fn retained_plus_dropped_equals_emitted(
        addrs in proptest::collection::vec(any::<u64>(), 0..600),
        reset in 1u64..=8,
        ring_capacity in 1usize..4,
        threshold in 1u64..6,
    ) {
        let mut config = SamplerConfig::new(reset, 1 << 20);
        config.threshold_records = threshold;
        config.ring_capacity = ring_capacity;
        let (batches, dropped) = run_thread(&config, events(&addrs)).unwrap();
        let retained: u64 = batches.iter().map(|b| b.addrs.len() as u64).sum();
        prop_assert_eq!(retained + dropped, addrs.len() as u64 / reset);
    }

    /// Batches straight off the sampler always satisfy the dump invariants.
    #[test]
    fn sampler_output_forms_a_valid_dump(
        addrs in proptest::collection::vec(any::<u64>(), 1..400),
        reset in 1u64..=16,
        threshold in 1u64..8,
    ) {
        let mut config = SamplerConfig::new(reset, 1 << 20);
        config.threshold_records = threshold;
        let (batches, dropped) = run_thread(&config, events(&addrs)).unwrap();
        let dump = TraceDump {
            page_size: PAGE_SIZE as u32,
            reset,
            buffer_bytes: config.buffer_bytes,
            threshold_records: threshold,
            mappings: Vec::new(),
            threads: vec![ThreadTrace { thread_id: 0, dropped, batches }],
        };
        prop_assert!(dump.validate().is_ok());
    }

    /// Serialization is lossless for any well-formed dump.
    #[test]
    fn dump_round_trips_through_bytes(dump in arb_dump()) {
        let bytes = dump.to_bytes().unwrap();
        prop_assert_eq!(TraceDump::from_bytes(&bytes).unwrap(), dump);
    }

    /// Every sampled record is either assigned to a mapping or discarded.
    #[test]
    fn classification_conserves_records(dump in arb_dump(), threshold in 0u64..1 << 23) {
        let history = reconstruct(&dump.mappings, threshold);
        let classified = classify(&dump, &history);
        prop_assert_eq!(classified.assigned() + classified.discarded, dump.total_records());
        // And each mapping's histogram accounts for each of its samples once.
        for (&id, samples) in &classified.per_mapping {
            let hist = page_histogram(samples, history.range(id).unwrap());
            prop_assert_eq!(hist.total(), samples.len() as u64);
        }
    }

    /// Doubling the reset can only shrink the set of pages seen: positions
    /// divisible by 2R are a subset of positions divisible by R.
    #[test]
    fn coarser_reset_covers_a_subset_of_pages(
        addrs in proptest::collection::vec(0u64..1 << 24, 0..500),
        reset in 1u64..=32,
    ) {
        let pages = |reset: u64| -> BTreeSet<u64> {
            let (batches, _) =
                run_thread(&SamplerConfig::new(reset, 1 << 22), events(&addrs)).unwrap();
            batches
                .into_iter()
                .flat_map(|b| b.addrs)
                .map(|a| a / PAGE_SIZE)
                .collect()
        };
        prop_assert!(pages(2 * reset).is_subset(&pages(reset)));
    }

    /// LRU inclusion: adding ways to every set never creates a new miss.
    #[test]
    fn wider_lru_never_misses_more(
        addrs in proptest::collection::vec(0u64..1 << 14, 1..400),
        ways in 1usize..=4,
    ) {
        let loads: Vec<LoadEvent> = addrs
            .iter()
            .enumerate()
            .map(|(i, &addr)| LoadEvent { thread_id: 0, addr, time: i as u64 + 1 })
            .collect();
        let misses = |ways: usize| -> u64 {
            let cache = CacheKind::Lru(CacheConfig { sets: 4, ways, line_bytes: 64 });
            classify_stream(&loads, cache).unwrap().2
        };
        prop_assert!(misses(2 * ways) <= misses(ways));
    }
}
