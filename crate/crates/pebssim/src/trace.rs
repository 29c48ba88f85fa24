//! On-disk dump of a sampling run: per-thread timestamped batches plus the
//! per-process mapping-event log.
//!
//! Layout (all integers little-endian, u64 unless noted):
//!
//! ```text
//! header   magic "PEBSDUMP" | version u32 | page_size u32
//!          | reset | buffer_bytes | threshold_records        (40 bytes)
//! mappings count | { kind u8, 7 pad bytes, start, length, time } x count
//! threads  count | per thread: thread_id, dropped, batch_count,
//!          then per batch: batch_seq, timestamp, addr_count, addrs...
//! ```
//!
//! Fixed-width and append-friendly; equal dumps serialize byte-identically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::sampler::HarvestBatch;
use crate::workload::{MapKind, MappingEvent};

pub const DUMP_MAGIC: [u8; 8] = *b"PEBSDUMP";
pub const DUMP_VERSION: u32 = 1;
/// Header size in bytes: magic + version + page_size + 3 config words.
pub const HEADER_BYTES: usize = 40;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("bad magic: not a PEBS dump file")]
    BadMagic,
    #[error("unsupported dump version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated dump: {0}")]
    Truncated(String),
    #[error("ordering violation: {0}")]
    OrderingViolation(String),
    #[error("{0} trailing bytes after dump payload")]
    TrailingBytes(usize),
    #[error("dump invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One thread's harvested batches and its ring-drop count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadTrace {
    pub thread_id: u64,
    /// Records lost to harvest-ring overwrites.
    pub dropped: u64,
    pub batches: Vec<HarvestBatch>,
}

/// The per-process artifact written at thread-exit time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDump {
    pub page_size: u32,
    pub reset: u64,
    pub buffer_bytes: u64,
    pub threshold_records: u64,
    pub mappings: Vec<MappingEvent>,
    pub threads: Vec<ThreadTrace>,
}

impl TraceDump {
    pub fn total_records(&self) -> u64 {
        self.threads
            .iter()
            .flat_map(|t| &t.batches)
            .map(|b| b.addrs.len() as u64)
            .sum()
    }

    pub fn total_batches(&self) -> u64 {
        self.threads.iter().map(|t| t.batches.len() as u64).sum()
    }

    /// Check the structural invariants the format requires.
    pub fn validate(&self) -> Result<(), DumpError> {
        for pair in self.mappings.windows(2) {
            if pair[1].time < pair[0].time {
                return Err(DumpError::InvariantViolation(
                    "mapping events not ordered by timestamp".into(),
                ));
            }
        }
        for thread in &self.threads {
            for batch in &thread.batches {
                if batch.thread_id != thread.thread_id {
                    return Err(DumpError::InvariantViolation(format!(
                        "batch for thread {} filed under thread {}",
                        batch.thread_id, thread.thread_id
                    )));
                }
                if batch.addrs.is_empty() {
                    return Err(DumpError::InvariantViolation(format!(
                        "empty batch {} on thread {}",
                        batch.batch_seq, thread.thread_id
                    )));
                }
            }
            for pair in thread.batches.windows(2) {
                if pair[1].batch_seq <= pair[0].batch_seq {
                    return Err(DumpError::InvariantViolation(format!(
                        "thread {}: batch_seq not strictly increasing",
                        thread.thread_id
                    )));
                }
                if pair[1].timestamp < pair[0].timestamp {
                    return Err(DumpError::InvariantViolation(format!(
                        "thread {}: batch timestamps decrease",
                        thread.thread_id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, DumpError> {
        self.validate()?;
        let mut out = Vec::with_capacity(HEADER_BYTES + 16);
        out.extend_from_slice(&DUMP_MAGIC);
        out.extend_from_slice(&DUMP_VERSION.to_le_bytes());
        out.extend_from_slice(&self.page_size.to_le_bytes());
        out.extend_from_slice(&self.reset.to_le_bytes());
        out.extend_from_slice(&self.buffer_bytes.to_le_bytes());
        out.extend_from_slice(&self.threshold_records.to_le_bytes());

        out.extend_from_slice(&(self.mappings.len() as u64).to_le_bytes());
        for m in &self.mappings {
            let kind = match m.kind {
                MapKind::Mmap => 0u8,
                MapKind::Munmap => 1u8,
            };
            out.push(kind);
            out.extend_from_slice(&[0u8; 7]);
            out.extend_from_slice(&m.start.to_le_bytes());
            out.extend_from_slice(&m.length.to_le_bytes());
            out.extend_from_slice(&m.time.to_le_bytes());
        }

        out.extend_from_slice(&(self.threads.len() as u64).to_le_bytes());
        for thread in &self.threads {
            out.extend_from_slice(&thread.thread_id.to_le_bytes());
            out.extend_from_slice(&thread.dropped.to_le_bytes());
            out.extend_from_slice(&(thread.batches.len() as u64).to_le_bytes());
            for batch in &thread.batches {
                out.extend_from_slice(&batch.batch_seq.to_le_bytes());
                out.extend_from_slice(&batch.timestamp.to_le_bytes());
                out.extend_from_slice(&(batch.addrs.len() as u64).to_le_bytes());
                for addr in &batch.addrs {
                    out.extend_from_slice(&addr.to_le_bytes());
                }
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DumpError> {
        let mut cursor = Cursor { bytes, pos: 0 };
        if cursor.take(8, "magic")? != DUMP_MAGIC {
            return Err(DumpError::BadMagic);
        }
        let version = cursor.take_u32("version")?;
        if version != DUMP_VERSION {
            return Err(DumpError::UnsupportedVersion(version));
        }
        let page_size = cursor.take_u32("page_size")?;
        let reset = cursor.take_u64("reset")?;
        let buffer_bytes = cursor.take_u64("buffer_bytes")?;
        let threshold_records = cursor.take_u64("threshold_records")?;

        let mapping_count = cursor.take_count("mapping count", 32)?;
        let mut mappings = Vec::with_capacity(mapping_count);
        for i in 0..mapping_count {
            let kind = match cursor.take(8, "mapping kind")?[0] {
                0 => MapKind::Mmap,
                1 => MapKind::Munmap,
                other => {
                    return Err(DumpError::Truncated(format!(
                        "mapping {i}: unknown kind byte {other}"
                    )))
                }
            };
            let start = cursor.take_u64("mapping start")?;
            let length = cursor.take_u64("mapping length")?;
            let time = cursor.take_u64("mapping time")?;
            if let Some(prev) = mappings.last() {
                let prev: &MappingEvent = prev;
                if time < prev.time {
                    return Err(DumpError::OrderingViolation(format!(
                        "mapping {i} timestamp {time} precedes {}",
                        prev.time
                    )));
                }
            }
            mappings.push(MappingEvent { kind, start, length, time });
        }

        let thread_count = cursor.take_count("thread count", 24)?;
        let mut threads = Vec::with_capacity(thread_count);
        for _ in 0..thread_count {
            let thread_id = cursor.take_u64("thread_id")?;
            let dropped = cursor.take_u64("dropped")?;
            let batch_count = cursor.take_count("batch count", 24)?;
            let mut batches: Vec<HarvestBatch> = Vec::with_capacity(batch_count);
            for _ in 0..batch_count {
                let batch_seq = cursor.take_u64("batch_seq")?;
                let timestamp = cursor.take_u64("batch timestamp")?;
                let addr_count = cursor.take_count("addr count", 8)?;
                let mut addrs = Vec::with_capacity(addr_count);
                for _ in 0..addr_count {
                    addrs.push(cursor.take_u64("batch addr")?);
                }
                if let Some(prev) = batches.last() {
                    if batch_seq <= prev.batch_seq {
                        return Err(DumpError::OrderingViolation(format!(
                            "thread {thread_id}: batch_seq {batch_seq} after {}",
                            prev.batch_seq
                        )));
                    }
                    if timestamp < prev.timestamp {
                        return Err(DumpError::OrderingViolation(format!(
                            "thread {thread_id}: timestamp {timestamp} after {}",
                            prev.timestamp
                        )));
                    }
                }
                batches.push(HarvestBatch {
                    thread_id,
                    batch_seq,
                    timestamp,
                    addrs,
                });
            }
            threads.push(ThreadTrace {
                thread_id,
                dropped,
                batches,
            });
        }

        if cursor.pos != bytes.len() {
            return Err(DumpError::TrailingBytes(bytes.len() - cursor.pos));
        }
        Ok(TraceDump {
            page_size,
            reset,
            buffer_bytes,
            threshold_records,
            mappings,
            threads,
        })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], DumpError> {
        if self.bytes.len() - self.pos < n {
            return Err(DumpError::Truncated(format!(
                "{what} needs {n} bytes at offset {}, file has {}",
                self.pos,
                self.bytes.len()
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn take_u32(&mut self, what: &str) -> Result<u32, DumpError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn take_u64(&mut self, what: &str) -> Result<u64, DumpError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    /// Read a count and sanity-check it against the bytes remaining, so a
    /// corrupt length cannot drive a huge allocation.
    fn take_count(&mut self, what: &str, min_item_bytes: usize) -> Result<usize, DumpError> {
        let count = self.take_u64(what)?;
        let remaining = (self.bytes.len() - self.pos) as u64;
        if count > remaining / min_item_bytes as u64 {
            return Err(DumpError::Truncated(format!(
                "{what} {count} exceeds what {remaining} remaining bytes can hold"
            )));
        }
        Ok(count as usize)
    }
}

/// Serialize and write a dump; refuses to write one violating its invariants.
pub fn write_dump(dump: &TraceDump, path: &Path) -> Result<(), DumpError> {
    let bytes = dump.to_bytes()?;
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

/// Read and fully validate a dump file.
pub fn read_dump(path: &Path) -> Result<TraceDump, DumpError> {
    let bytes = fs::read(path)?;
    TraceDump::from_bytes(&bytes)
}

/// Convert a dump to CSV for inspection: one `batch_seq,timestamp,addr`
/// samples file per thread plus the mapping log. Returns the written paths.
pub fn dump_to_csv(dump: &TraceDump, out_dir: &Path, stem: &str) -> Result<Vec<PathBuf>, DumpError> {
    let mut written = Vec::new();
    for thread in &dump.threads {
        let path = out_dir.join(format!("{stem}.t{}.samples.csv", thread.thread_id));
        let mut out = String::from("batch_seq,timestamp,addr\n");
        for batch in &thread.batches {
            for addr in &batch.addrs {
                out.push_str(&format!("{},{},{:#x}\n", batch.batch_seq, batch.timestamp, addr));
            }
        }
        fs::write(&path, out)?;
        written.push(path);
    }
    let maps_path = out_dir.join(format!("{stem}.mappings.csv"));
    let mut out = String::from("kind,start,length,time\n");
    for m in &dump.mappings {
        out.push_str(&format!("{},{:#x},{},{}\n", m.kind, m.start, m.length, m.time));
    }
    fs::write(&maps_path, out)?;
    written.push(maps_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_dump() -> TraceDump {
        TraceDump {
            page_size: 4096,
            reset: 64,
            buffer_bytes: 8192,
            threshold_records: 42,
            mappings: Vec::new(),
            threads: Vec::new(),
        }
    }

    fn small_dump() -> TraceDump {
        TraceDump {
            mappings: vec![
                MappingEvent {
                    kind: MapKind::Mmap,
                    start: 0x1000_0000,
                    length: 8 << 20,
                    time: 0,
                },
                MappingEvent {
                    kind: MapKind::Munmap,
                    start: 0x1000_0000,
                    length: 8 << 20,
                    time: 100,
                },
            ],
            threads: vec![ThreadTrace {
                thread_id: 3,
                dropped: 0,
                batches: vec![
                    HarvestBatch {
                        thread_id: 3,
                        batch_seq: 0,
                        timestamp: 7,
                        addrs: vec![0x1000],
                    },
                    HarvestBatch {
                        thread_id: 3,
                        batch_seq: 1,
                        timestamp: 9,
                        addrs: vec![0x2000, 0x3000],
                    },
                ],
            }],
            ..empty_dump()
        }
    }

    #[test]
    fn empty_dump_is_exactly_header_plus_two_counts() {
        let bytes = empty_dump().to_bytes().unwrap();
        assert_eq!(bytes.len(), HEADER_BYTES + 8 + 8);
        assert_eq!(&bytes[..8], b"PEBSDUMP");
    }

    #[test]
    fn batch_section_encoding_is_little_endian() {
        let dump = TraceDump {
            threads: vec![ThreadTrace {
                thread_id: 0,
                dropped: 0,
                batches: vec![HarvestBatch {
                    thread_id: 0,
                    batch_seq: 0,
                    timestamp: 7,
                    addrs: vec![0x1000],
                }],
            }],
            ..empty_dump()
        };
        let bytes = dump.to_bytes().unwrap();
        // header(40) + mapping_count + thread_count + thread header(24).
        let batch = &bytes[HEADER_BYTES + 8 + 8 + 24..];
        assert_eq!(&batch[0..8], &0u64.to_le_bytes(), "batch_seq");
        assert_eq!(&batch[8..16], &7u64.to_le_bytes(), "timestamp");
        assert_eq!(&batch[16..24], &1u64.to_le_bytes(), "addr count");
        assert_eq!(&batch[24..32], &0x1000u64.to_le_bytes(), "addr");
    }

    #[test]
    fn round_trip_is_structural_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.pebsdump");
        let dump = small_dump();
        write_dump(&dump, &path).unwrap();
        assert_eq!(read_dump(&path).unwrap(), dump);
    }

    #[test]
    fn equal_dumps_serialize_byte_identically() {
        assert_eq!(small_dump().to_bytes().unwrap(), small_dump().to_bytes().unwrap());
    }

    #[test]
    fn bad_magic_rejected() {
        let mut bytes = empty_dump().to_bytes().unwrap();
        bytes[0] = b'X';
        assert!(matches!(TraceDump::from_bytes(&bytes), Err(DumpError::BadMagic)));
    }

    #[test]
    fn unsupported_version_rejected() {
        let mut bytes = empty_dump().to_bytes().unwrap();
        bytes[8..12].copy_from_slice(&99u32.to_le_bytes());
        assert!(matches!(
            TraceDump::from_bytes(&bytes),
            Err(DumpError::UnsupportedVersion(99))
        ));
    }

    #[test]
    fn truncation_mid_batch_rejected() {
        let bytes = small_dump().to_bytes().unwrap();
        let cut = &bytes[..bytes.len() - 5];
        assert!(matches!(TraceDump::from_bytes(cut), Err(DumpError::Truncated(_))));
    }

    #[test]
    fn truncated_header_rejected() {
        let bytes = empty_dump().to_bytes().unwrap();
        assert!(matches!(
            TraceDump::from_bytes(&bytes[..20]),
            Err(DumpError::Truncated(_))
        ));
    }

    #[test]
    fn unordered_batch_seq_rejected_by_reader() {
        // The writer refuses out-of-order batches, so corrupt the bytes
        // directly: the second batch_seq sits after the header, mapping
        // section, thread counts, and the 32-byte single-address first batch.
        let mut raw = small_dump().to_bytes().unwrap();
        let second_seq_off = HEADER_BYTES + 8 + 2 * 32 + 8 + 24 + 32;
        raw[second_seq_off..second_seq_off + 8].copy_from_slice(&0u64.to_le_bytes());
        assert!(matches!(
            TraceDump::from_bytes(&raw),
            Err(DumpError::OrderingViolation(_))
        ));
    }

    #[test]
    fn writer_refuses_invariant_violations() {
        let mut dump = small_dump();
        dump.threads[0].batches[1].timestamp = 1; // decreases after 7
        assert!(matches!(
            dump.to_bytes(),
            Err(DumpError::InvariantViolation(_))
        ));

        let mut dump = small_dump();
        dump.threads[0].batches[0].addrs.clear();
        assert!(dump.to_bytes().is_err());

        let mut dump = small_dump();
        dump.mappings.swap(0, 1);
        assert!(dump.to_bytes().is_err());
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut bytes = small_dump().to_bytes().unwrap();
        bytes.push(0);
        assert!(matches!(
            TraceDump::from_bytes(&bytes),
            Err(DumpError::TrailingBytes(1))
        ));
    }

    #[test]
    fn absurd_count_cannot_drive_allocation() {
        let mut bytes = empty_dump().to_bytes().unwrap();
        // mapping_count field sits right after the header.
        bytes[HEADER_BYTES..HEADER_BYTES + 8].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(TraceDump::from_bytes(&bytes), Err(DumpError::Truncated(_))));
    }

    #[test]
    fn dump_to_csv_writes_per_thread_samples_and_mappings() {
        let dir = tempfile::tempdir().unwrap();
        let written = dump_to_csv(&small_dump(), dir.path(), "run").unwrap();
        assert_eq!(written.len(), 2);
        let samples = fs::read_to_string(dir.path().join("run.t3.samples.csv")).unwrap();
        assert_eq!(
            samples,
            "batch_seq,timestamp,addr\n0,7,0x1000\n1,9,0x2000\n1,9,0x3000\n"
        );
        let maps = fs::read_to_string(dir.path().join("run.mappings.csv")).unwrap();
        assert!(maps.starts_with("kind,start,length,time\nmmap,0x10000000,8388608,0\n"));
    }
}
