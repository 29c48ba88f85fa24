//! Report emission: turns analysis results into CSV artifacts, a dependency-
//! free SVG heatmap rendering, a human-readable summary, and a machine-
//! readable manifest with content checksums.
//!
//! Per-mapping artifacts follow `<dump-stem>.<mapping_id>.<artifact>.{csv,svg}`;
//! dump-wide artifacts drop the mapping id.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analyze::{
    classify, coverage, heatmap, hot_pages, interrupt_intervals, page_histogram, reconstruct,
    Classified, Heatmap, LiveRange, MappingHistory, DEFAULT_BLOCK_PAGES, DEFAULT_HOT_THRESHOLD,
    DEFAULT_MAP_THRESHOLD_BYTES,
};
use crate::trace::TraceDump;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("failed writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Analysis knobs, all defaulted to the values the artifacts were tuned for.
#[derive(Debug, Clone, Serialize)]
pub struct ReportOptions {
    pub map_threshold_bytes: u64,
    pub hot_threshold: u64,
    pub block_pages: u64,
    /// Interval-histogram bin width; `None` derives 1/50 of the max delta.
    pub bin_width: Option<u64>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            map_threshold_bytes: DEFAULT_MAP_THRESHOLD_BYTES,
            hot_threshold: DEFAULT_HOT_THRESHOLD,
            block_pages: DEFAULT_BLOCK_PAGES,
            bin_width: None,
        }
    }
}

/// Everything one analysis pass produced, for callers that keep digging.
#[derive(Debug)]
pub struct ReportBundle {
    pub history: MappingHistory,
    pub classified: Classified,
    /// All artifact paths written, summary and manifest included.
    pub files: Vec<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError::Io { path: path.to_path_buf(), source })
}

/// Run the full analysis over a dump and write every artifact into `out_dir`.
pub fn write_reports(
    dump: &TraceDump,
    stem: &str,
    out_dir: &Path,
    options: &ReportOptions,
) -> Result<ReportBundle, ReportError> {
    let history = reconstruct(&dump.mappings, options.map_threshold_bytes);
    let classified = classify(dump, &history);
    let mut files = Vec::new();

    for (&mapping_id, samples) in &classified.per_mapping {
        let range = history
            .range(mapping_id)
            .expect("classification only assigns to ranges in the history");
        let map = heatmap(samples, range, options.block_pages);

        let path = out_dir.join(format!("{stem}.{mapping_id}.heatmap.csv"));
        write_file(&path, &heatmap_csv(&map, range))?;
        files.push(path);

        let path = out_dir.join(format!("{stem}.{mapping_id}.heatmap.svg"));
        write_file(&path, &heatmap_svg(&map, range))?;
        files.push(path);

        let hist = page_histogram(samples, range);
        let path = out_dir.join(format!("{stem}.{mapping_id}.page_histogram.csv"));
        let mut csv = String::from("page,count\n");
        for (page, count) in &hist.counts {
            let _ = writeln!(csv, "{page},{count}");
        }
        write_file(&path, &csv)?;
        files.push(path);

        let path = out_dir.join(format!("{stem}.{mapping_id}.hot_pages.csv"));
        let mut csv = String::from("page,count\n");
        for (page, count) in hot_pages(&hist, options.hot_threshold) {
            let _ = writeln!(csv, "{page},{count}");
        }
        write_file(&path, &csv)?;
        files.push(path);
    }

    let stats = interrupt_intervals(dump);
    let path = out_dir.join(format!("{stem}.intervals.csv"));
    let mut csv = String::from("thread_id,delta\n");
    for (thread_id, deltas) in &stats.deltas_by_thread {
        for delta in deltas {
            let _ = writeln!(csv, "{thread_id},{delta}");
        }
    }
    write_file(&path, &csv)?;
    files.push(path);

    let hist = stats.histogram(options.bin_width);
    let path = out_dir.join(format!("{stem}.interval_histogram.csv"));
    let mut csv = String::from("bin_start,bin_end,count\n");
    for (i, count) in hist.bins.iter().enumerate() {
        let start = i as u64 * hist.bin_width;
        let _ = writeln!(csv, "{start},{},{count}", start + hist.bin_width);
    }
    write_file(&path, &csv)?;
    files.push(path);

    let path = out_dir.join(format!("{stem}.summary.txt"));
    write_file(&path, &summary_text(dump, &history, &classified, &stats, options))?;
    files.push(path);

    Ok(ReportBundle { history, classified, files })
}

fn heatmap_csv(map: &Heatmap, range: &LiveRange) -> String {
    let blocks = range.pages().div_ceil(map.block_pages);
    let mut csv = String::from("batch_seq");
    for block in 0..blocks {
        let _ = write!(csv, ",b{block}");
    }
    csv.push('\n');
    for seq in map.rows() {
        let _ = write!(csv, "{seq}");
        let mut row = vec![0u64; blocks as usize];
        for (&(_, block), &count) in map.cells.range((seq, 0)..=(seq, u64::MAX)) {
            row[block as usize] = count;
        }
        for count in row {
            let _ = write!(csv, ",{count}");
        }
        csv.push('\n');
    }
    csv
}

/// Render the access heatmap: X is the sample-set (batch) axis, Y the address
/// axis in blocks, darker cells denser. Pure SVG, no rendering dependencies.
fn heatmap_svg(map: &Heatmap, range: &LiveRange) -> String {
    const CELL: u64 = 4;
    const MARGIN: u64 = 30;
    let rows = map.rows();
    let blocks = range.pages().div_ceil(map.block_pages).max(1);
    let width = MARGIN + (rows.len() as u64).max(1) * CELL + 10;
    let height = MARGIN + blocks * CELL + 10;
    let max = map.max_count().max(1);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n\
         <text x=\"{MARGIN}\" y=\"12\" font-size=\"10\" font-family=\"sans-serif\">\
         mapping {} — {} blocks of {} pages, {} samples</text>\n",
        map.mapping_id,
        blocks,
        map.block_pages,
        map.total(),
    );
    for (col, seq) in rows.iter().enumerate() {
        for (&(_, block), &count) in map.cells.range((*seq, 0)..=(*seq, u64::MAX)) {
            // Linear shade from light blue to near-black with density.
            let shade = 225 - (count * 200 / max) as u8;
            let x = MARGIN + col as u64 * CELL;
            let y = MARGIN + block * CELL;
            let _ = writeln!(
                svg,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" \
                 fill=\"rgb({shade},{shade},235)\"/>"
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn summary_text(
    dump: &TraceDump,
    history: &MappingHistory,
    classified: &Classified,
    stats: &crate::analyze::IntervalStats,
    options: &ReportOptions,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "threads: {}", dump.threads.len());
    let _ = writeln!(out, "batches: {}", dump.total_batches());
    let _ = writeln!(out, "records: {}", dump.total_records());
    let dropped: u64 = dump.threads.iter().map(|t| t.dropped).sum();
    let _ = writeln!(out, "dropped: {dropped}");
    let _ = writeln!(out, "mapping events: {}", dump.mappings.len());
    let _ = writeln!(out, "tracked ranges: {}", history.ranges.len());
    let _ = writeln!(out, "classified: {}", classified.assigned());
    let _ = writeln!(out, "discarded: {}", classified.discarded);
    for (&mapping_id, samples) in &classified.per_mapping {
        let range = history.range(mapping_id).expect("assigned mapping exists");
        let hist = page_histogram(samples, range);
        let hot = hot_pages(&hist, options.hot_threshold).len();
        let _ = writeln!(
            out,
            "mapping {mapping_id} [{:#x}, {:#x}): samples={} coverage={}/{} hot_pages={hot}",
            range.start,
            range.end(),
            samples.len(),
            coverage(&hist),
            range.pages(),
        );
    }
    match (stats.mean(), stats.median()) {
        (Some(mean), Some(median)) => {
            let _ = writeln!(
                out,
                "interrupt intervals: count={} mean={mean:.3} median={median:.3} min={} max={}",
                stats.count(),
                stats.min().unwrap_or(0),
                stats.max().unwrap_or(0),
            );
        }
        _ => {
            let _ = writeln!(out, "interrupt intervals: none (fewer than two full batches)");
        }
    }
    for warning in &history.warnings {
        let _ = writeln!(out, "warning: {warning}");
    }
    out
}

/// Machine-readable record of one run: tool version, the effective
/// configuration, and a SHA-256 per output file.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: serde_json::Value,
    /// File name → hex SHA-256 of its contents.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(path: &Path) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Write `<stem>.manifest.json` describing `files`, returning its path.
pub fn write_manifest(
    out_dir: &Path,
    stem: &str,
    config: serde_json::Value,
    files: &[PathBuf],
) -> Result<PathBuf, ReportError> {
    let mut outputs = BTreeMap::new();
    for file in files {
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| file.display().to_string());
        let digest = sha256_hex(file)
            .map_err(|source| ReportError::Io { path: file.clone(), source })?;
        outputs.insert(name, digest);
    }
    let manifest = Manifest {
        tool: "pebssim",
        version: env!("CARGO_PKG_VERSION"),
        config,
        outputs,
    };
    let path = out_dir.join(format!("{stem}.manifest.json"));
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&path, &body)?;
    Ok(path)
}
