//! Command-line front end: argument parsing, TOML run files, and the four
//! subcommands (`simulate`, `analyze`, `sweep`, `dump-to-csv`).
//!
//! Every option can come from a declarative `--config` file, with explicit
//! flags overriding file values so a sweep can be replayed from one artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::analyze::{
    coverage, overhead_estimate, page_histogram, reconstruct, DEFAULT_BLOCK_PAGES,
    DEFAULT_HOT_THRESHOLD, DEFAULT_MAP_THRESHOLD_BYTES,
};
use crate::cache::{CacheConfig, CacheKind};
use crate::report::{write_manifest, write_reports, ReportOptions};
use crate::sampler::{HarvestMode, SamplerConfig, DEFAULT_RECORD_BYTES};
use crate::sim::{simulate, SimConfig, SimSummary};
use crate::trace::{dump_to_csv, read_dump, write_dump, TraceDump};
use crate::workload::{Pattern, WorkloadSpec};

#[derive(Debug, Parser)]
#[command(
    name = "pebssim",
    version,
    about = "Event-based memory-access sampling simulator and trace analyzer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a synthetic workload through the cache and sampler, write a dump.
    Simulate(SimulateArgs),
    /// Analyze a dump into CSV/SVG artifacts and a summary.
    Analyze(AnalyzeArgs),
    /// Run the reset × buffer cross-product and tabulate the results.
    Sweep(SweepArgs),
    /// Convert a binary dump to per-thread CSV files.
    #[command(name = "dump-to-csv")]
    DumpToCsv(DumpToCsvArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct WorkloadFlags {
    /// Access pattern: stride-sweep, hot-set, or uniform-random.
    #[arg(long, value_parser = parse_pattern)]
    pattern: Option<Pattern>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count.
    #[arg(long)]
    threads: Option<u64>,
    /// Sweeps (stride) or loads per thread (random patterns).
    #[arg(long)]
    iterations: Option<u64>,
    /// Region base address (decimal or 0x-hex).
    #[arg(long, value_parser = parse_u64_maybe_hex)]
    region_start: Option<u64>,
    /// Region size in bytes (decimal or 0x-hex).
    #[arg(long, value_parser = parse_u64_maybe_hex)]
    region_len: Option<u64>,
    #[arg(long)]
    stride_bytes: Option<u64>,
    /// Hot-set size in pages (hot-set pattern).
    #[arg(long)]
    hot_pages: Option<u64>,
    /// Share of accesses hitting the hot set (hot-set pattern).
    #[arg(long)]
    hot_fraction: Option<f64>,
    /// Loads sharing one logical time unit.
    #[arg(long)]
    events_per_unit: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SamplerFlags {
    /// Events between consecutive sampled records.
    #[arg(long)]
    reset: Option<u64>,
    /// CPU sampling buffer size in bytes.
    #[arg(long)]
    buffer_bytes: Option<u64>,
    /// On-buffer record size in bytes.
    #[arg(long)]
    record_bytes: Option<u64>,
    /// Records per buffer-threshold interrupt (default: buffer capacity).
    #[arg(long)]
    threshold_records: Option<u64>,
    /// Harvest mode: interrupt or polling:<period>.
    #[arg(long, value_parser = parse_harvest)]
    harvest: Option<HarvestMode>,
    /// Cache filter: bypass or <sets>,<ways>,<line>.
    #[arg(long, value_parser = parse_cache)]
    cache: Option<CacheKind>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisFlags {
    /// Track only mappings strictly larger than this many bytes.
    #[arg(long)]
    map_threshold_bytes: Option<u64>,
    /// Pages need strictly more samples than this to be tagged hot.
    #[arg(long)]
    hot_threshold: Option<u64>,
    /// Heatmap block size in pages.
    #[arg(long)]
    block_pages: Option<u64>,
    /// Interval-histogram bin width (default: max delta / 50).
    #[arg(long)]
    bin_width: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML run file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    workload: WorkloadFlags,
    #[command(flatten)]
    sampler: SamplerFlags,
    /// Output directory.
    #[arg(long, env = "PEBSSIM_OUT")]
    out: Option<PathBuf>,
    /// Dump file stem.
    #[arg(long, default_value = "run")]
    name: String,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Dump file to analyze.
    pub dump: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    analysis: AnalysisFlags,
    #[arg(long, env = "PEBSSIM_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    workload: WorkloadFlags,
    #[command(flatten)]
    sampler: SamplerFlags,
    /// Reset values to sweep.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
    resets: Vec<u64>,
    /// Buffer sizes (bytes) to sweep.
    #[arg(long, value_delimiter = ',', default_value = "8192,16384,32768")]
    buffers: Vec<u64>,
    /// Miss rate (events/s) for the overhead column.
    #[arg(long, default_value_t = 1e7)]
    miss_rate: f64,
    /// CPU frequency (Hz) for the overhead column.
    #[arg(long, default_value_t = 1.4e9)]
    cpu_hz: f64,
    #[arg(long)]
    map_threshold_bytes: Option<u64>,
    #[arg(long, env = "PEBSSIM_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DumpToCsvArgs {
    /// Dump file to convert.
    pub dump: PathBuf,
    #[arg(long, env = "PEBSSIM_OUT")]
    out: Option<PathBuf>,
}

// --- flag value parsers ---

fn parse_pattern(s: &str) -> Result<Pattern, String> {
    match s.replace('-', "_").as_str() {
        "stride_sweep" => Ok(Pattern::StrideSweep),
        "hot_set" => Ok(Pattern::HotSet),
        "uniform_random" | "uniform" => Ok(Pattern::UniformRandom),
        other => Err(format!(
            "unknown pattern '{other}' (expected stride-sweep, hot-set, or uniform-random)"
        )),
    }
}

fn parse_u64_maybe_hex(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid number '{s}': {e}"))
}

fn parse_harvest(s: &str) -> Result<HarvestMode, String> {
    if s == "interrupt" {
        return Ok(HarvestMode::Interrupt);
    }
    if let Some(period) = s.strip_prefix("polling:") {
        let period: u64 =
            period.parse().map_err(|e| format!("invalid polling period '{period}': {e}"))?;
        if period == 0 {
            return Err("polling period must be >= 1".into());
        }
        return Ok(HarvestMode::Polling { period });
    }
    Err(format!("unknown harvest mode '{s}' (expected interrupt or polling:<period>)"))
}

fn parse_cache(s: &str) -> Result<CacheKind, String> {
    if s == "bypass" {
        return Ok(CacheKind::Bypass);
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("unknown cache '{s}' (expected bypass or <sets>,<ways>,<line>)"));
    }
    fn parse<T: std::str::FromStr<Err = std::num::ParseIntError>>(
        what: &str,
        v: &str,
    ) -> Result<T, String> {
        v.parse().map_err(|e| format!("invalid {what} '{v}': {e}"))
    }
    let config = CacheConfig {
        sets: parse("sets", parts[0])?,
        ways: parse("ways", parts[1])?,
        line_bytes: parse("line size", parts[2])?,
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(CacheKind::Lru(config))
}

// --- TOML run file ---

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunFile {
    workload: WorkloadFile,
    sampler: SamplerFile,
    cache: Option<CacheFile>,
    analysis: AnalysisFile,
    output: OutputFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct WorkloadFile {
    pattern: Option<String>,
    seed: Option<u64>,
    threads: Option<u64>,
    iterations: Option<u64>,
    region_start: Option<u64>,
    region_len: Option<u64>,
    stride_bytes: Option<u64>,
    hot_pages: Option<u64>,
    hot_fraction: Option<f64>,
    events_per_unit: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SamplerFile {
    reset: Option<u64>,
    buffer_bytes: Option<u64>,
    record_bytes: Option<u64>,
    threshold_records: Option<u64>,
    harvest: Option<String>,
    handler_cycles: Option<u64>,
    handler_latency: Option<u64>,
    ring_capacity: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CacheFile {
    /// "bypass" or "lru".
    mode: Option<String>,
    sets: Option<u64>,
    ways: Option<usize>,
    line_bytes: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AnalysisFile {
    map_threshold_bytes: Option<u64>,
    hot_threshold: Option<u64>,
    block_pages: Option<u64>,
    bin_width: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputFile {
    dir: Option<PathBuf>,
}

fn load_run_file(path: Option<&Path>) -> Result<RunFile> {
    let Some(path) = path else { return Ok(RunFile::default()) };
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
}

/// Build a full simulation configuration from a TOML document using the same
/// schema as the CLI `--config` file (embedders skip flag handling).
pub fn sim_config_from_toml(text: &str) -> Result<SimConfig> {
    let file: RunFile = toml::from_str(text).context("invalid run config")?;
    let no_workload_flags = WorkloadFlags::default();
    let no_sampler_flags = SamplerFlags::default();
    Ok(SimConfig {
        workload: resolve_workload(&no_workload_flags, &file.workload)?,
        cache: resolve_cache(&no_sampler_flags, file.cache.as_ref())?,
        sampler: resolve_sampler(&no_sampler_flags, &file.sampler)?,
    })
}

fn resolve_workload(flags: &WorkloadFlags, file: &WorkloadFile) -> Result<WorkloadSpec> {
    let mut spec = WorkloadSpec::default();
    if let Some(pattern) = &file.pattern {
        spec.pattern = parse_pattern(pattern).map_err(anyhow::Error::msg)?;
    }
    spec.seed = file.seed.unwrap_or(spec.seed);
    spec.thread_count = file.threads.unwrap_or(spec.thread_count);
    spec.iterations = file.iterations.unwrap_or(spec.iterations);
    spec.region_start = file.region_start.unwrap_or(spec.region_start);
    spec.region_len = file.region_len.unwrap_or(spec.region_len);
    spec.stride_bytes = file.stride_bytes.unwrap_or(spec.stride_bytes);
    spec.hot_page_count = file.hot_pages.unwrap_or(spec.hot_page_count);
    spec.hot_fraction = file.hot_fraction.unwrap_or(spec.hot_fraction);
    spec.events_per_unit_time = file.events_per_unit.unwrap_or(spec.events_per_unit_time);

    spec.pattern = flags.pattern.unwrap_or(spec.pattern);
    spec.seed = flags.seed.unwrap_or(spec.seed);
    spec.thread_count = flags.threads.unwrap_or(spec.thread_count);
    spec.iterations = flags.iterations.unwrap_or(spec.iterations);
    spec.region_start = flags.region_start.unwrap_or(spec.region_start);
    spec.region_len = flags.region_len.unwrap_or(spec.region_len);
    spec.stride_bytes = flags.stride_bytes.unwrap_or(spec.stride_bytes);
    spec.hot_page_count = flags.hot_pages.unwrap_or(spec.hot_page_count);
    spec.hot_fraction = flags.hot_fraction.unwrap_or(spec.hot_fraction);
    spec.events_per_unit_time = flags.events_per_unit.unwrap_or(spec.events_per_unit_time);
    Ok(spec)
}

fn resolve_sampler(flags: &SamplerFlags, file: &SamplerFile) -> Result<SamplerConfig> {
    let reset = flags.reset.or(file.reset).unwrap_or(64);
    let buffer_bytes = flags.buffer_bytes.or(file.buffer_bytes).unwrap_or(8192);
    let mut config = SamplerConfig::new(reset, buffer_bytes);
    config.record_bytes =
        flags.record_bytes.or(file.record_bytes).unwrap_or(DEFAULT_RECORD_BYTES);
    // The threshold default tracks the effective record size, so recompute it
    // unless the user pinned a value.
    config.threshold_records = flags
        .threshold_records
        .or(file.threshold_records)
        .unwrap_or_else(|| buffer_bytes / config.record_bytes.max(1));
    if let Some(harvest) = &file.harvest {
        config.harvest_mode = parse_harvest(harvest).map_err(anyhow::Error::msg)?;
    }
    if let Some(harvest) = flags.harvest {
        config.harvest_mode = harvest;
    }
    config.handler_cycles = file.handler_cycles.unwrap_or(config.handler_cycles);
    config.handler_latency = file.handler_latency.unwrap_or(config.handler_latency);
    config.ring_capacity = file.ring_capacity.unwrap_or(config.ring_capacity);
    Ok(config)
}

fn resolve_cache(flags: &SamplerFlags, file: Option<&CacheFile>) -> Result<CacheKind> {
    if let Some(cache) = flags.cache {
        return Ok(cache);
    }
    let Some(file) = file else { return Ok(CacheKind::Lru(CacheConfig::default())) };
    match file.mode.as_deref() {
        Some("bypass") => Ok(CacheKind::Bypass),
        Some("lru") | None => {
            let defaults = CacheConfig::default();
            Ok(CacheKind::Lru(CacheConfig {
                sets: file.sets.unwrap_or(defaults.sets),
                ways: file.ways.unwrap_or(defaults.ways),
                line_bytes: file.line_bytes.unwrap_or(defaults.line_bytes),
            }))
        }
        Some(other) => bail!("unknown cache mode '{other}' in config file"),
    }
}

fn resolve_analysis(flags: &AnalysisFlags, file: &AnalysisFile) -> ReportOptions {
    ReportOptions {
        map_threshold_bytes: flags
            .map_threshold_bytes
            .or(file.map_threshold_bytes)
            .unwrap_or(DEFAULT_MAP_THRESHOLD_BYTES),
        hot_threshold: flags.hot_threshold.or(file.hot_threshold).unwrap_or(DEFAULT_HOT_THRESHOLD),
        block_pages: flags.block_pages.or(file.block_pages).unwrap_or(DEFAULT_BLOCK_PAGES),
        bin_width: flags.bin_width.or(file.bin_width),
    }
}

fn resolve_out_dir(flag: Option<&Path>, file: &OutputFile) -> Result<PathBuf> {
    let dir = flag
        .map(Path::to_path_buf)
        .or_else(|| file.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

fn config_json(sim: &SimConfig) -> serde_json::Value {
    serde_json::json!({
        "workload": sim.workload,
        "cache": sim.cache,
        "sampler": {
            "reset": sim.sampler.reset,
            "buffer_bytes": sim.sampler.buffer_bytes,
            "record_bytes": sim.sampler.record_bytes,
            "threshold_records": sim.sampler.threshold_records,
            "harvest": match sim.sampler.harvest_mode {
                HarvestMode::Interrupt => "interrupt".to_string(),
                HarvestMode::Polling { period } => format!("polling:{period}"),
            },
            "handler_cycles": sim.sampler.handler_cycles,
            "handler_latency": sim.sampler.handler_latency,
        },
    })
}

fn print_summary(summary: &SimSummary) {
    println!("loads:   {}", summary.loads);
    println!("hits:    {}", summary.hits);
    println!("misses:  {}", summary.misses);
    println!("records: {}", summary.records);
    println!("batches: {}", summary.batches);
    println!("dropped: {}", summary.dropped);
}

/// Total distinct pages sampled across all tracked mappings of a dump.
fn dump_coverage(dump: &TraceDump, map_threshold_bytes: u64) -> u64 {
    let history = reconstruct(&dump.mappings, map_threshold_bytes);
    let classified = crate::analyze::classify(dump, &history);
    classified
        .per_mapping
        .iter()
        .map(|(&id, samples)| {
            coverage(&page_histogram(samples, history.range(id).expect("assigned range exists")))
        })
        .sum()
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::DumpToCsv(args) => cmd_dump_to_csv(args),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let file = load_run_file(args.config.as_deref())?;
    let sim = SimConfig {
        workload: resolve_workload(&args.workload, &file.workload)?,
        cache: resolve_cache(&args.sampler, file.cache.as_ref())?,
        sampler: resolve_sampler(&args.sampler, &file.sampler)?,
    };
    let out_dir = resolve_out_dir(args.out.as_deref(), &file.output)?;

    let (dump, summary) = simulate(&sim)?;
    let dump_path = out_dir.join(format!("{}.pebsdump", args.name));
    write_dump(&dump, &dump_path)
        .with_context(|| format!("cannot write dump {}", dump_path.display()))?;
    let manifest_path =
        write_manifest(&out_dir, &args.name, config_json(&sim), std::slice::from_ref(&dump_path))?;

    print_summary(&summary);
    println!("dump:    {}", dump_path.display());
    println!("manifest: {}", manifest_path.display());
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let file = load_run_file(args.config.as_deref())?;
    let options = resolve_analysis(&args.analysis, &file.analysis);
    let out_dir = resolve_out_dir(args.out.as_deref(), &file.output)?;

    let dump = read_dump(&args.dump)
        .with_context(|| format!("cannot read dump {}", args.dump.display()))?;
    let stem = args
        .dump
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dump".into());

    let bundle = write_reports(&dump, &stem, &out_dir, &options)?;
    let config = serde_json::json!({
        "dump": args.dump.display().to_string(),
        "analysis": options,
    });
    let manifest_path = write_manifest(&out_dir, &stem, config, &bundle.files)?;

    for warning in &bundle.history.warnings {
        eprintln!("warning: {warning}");
    }
    for file in &bundle.files {
        println!("wrote {}", file.display());
    }
    println!("wrote {}", manifest_path.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    if args.resets.is_empty() || args.buffers.is_empty() {
        bail!("sweep needs at least one reset and one buffer size");
    }
    let file = load_run_file(args.config.as_deref())?;
    let workload = resolve_workload(&args.workload, &file.workload)?;
    let cache = resolve_cache(&args.sampler, file.cache.as_ref())?;
    let base_sampler = resolve_sampler(&args.sampler, &file.sampler)?;
    let out_dir = resolve_out_dir(args.out.as_deref(), &file.output)?;
    let map_threshold = args
        .map_threshold_bytes
        .or(file.analysis.map_threshold_bytes)
        .unwrap_or(DEFAULT_MAP_THRESHOLD_BYTES);

    let mut csv = String::from("reset,buffer_bytes,threshold_records,records,batches,coverage,overhead\n");
    println!(
        "{:>6} {:>12} {:>10} {:>10} {:>8} {:>9} {:>10}",
        "reset", "buffer", "threshold", "records", "batches", "coverage", "overhead"
    );
    for &reset in &args.resets {
        for &buffer_bytes in &args.buffers {
            let mut sampler = base_sampler.clone();
            sampler.reset = reset;
            sampler.buffer_bytes = buffer_bytes;
            // Per-cell threshold follows the buffer unless explicitly pinned.
            sampler.threshold_records = args
                .sampler
                .threshold_records
                .or(file.sampler.threshold_records)
                .unwrap_or_else(|| buffer_bytes / sampler.record_bytes.max(1));
            let sim = SimConfig { workload, cache, sampler };
            let (dump, summary) = simulate(&sim)?;
            let pages = dump_coverage(&dump, map_threshold);
            let overhead = overhead_estimate(&sim.sampler, args.miss_rate, args.cpu_hz);
            println!(
                "{:>6} {:>12} {:>10} {:>10} {:>8} {:>9} {:>10.6}",
                reset,
                buffer_bytes,
                sim.sampler.threshold_records,
                summary.records,
                summary.batches,
                pages,
                overhead
            );
            let _ = writeln!(
                csv,
                "{reset},{buffer_bytes},{},{},{},{pages},{overhead:.9}",
                sim.sampler.threshold_records, summary.records, summary.batches
            );
        }
    }

    let csv_path = out_dir.join("sweep.csv");
    fs::write(&csv_path, &csv)
        .with_context(|| format!("cannot write {}", csv_path.display()))?;
    let config = serde_json::json!({
        "workload": workload,
        "cache": cache,
        "resets": args.resets,
        "buffers": args.buffers,
        "miss_rate": args.miss_rate,
        "cpu_hz": args.cpu_hz,
    });
    let manifest_path = write_manifest(&out_dir, "sweep", config, std::slice::from_ref(&csv_path))?;
    println!("table:   {}", csv_path.display());
    println!("manifest: {}", manifest_path.display());
    Ok(())
}

fn cmd_dump_to_csv(args: DumpToCsvArgs) -> Result<()> {
    let out_dir = resolve_out_dir(args.out.as_deref(), &OutputFile::default())?;
    let dump = read_dump(&args.dump)
        .with_context(|| format!("cannot read dump {}", args.dump.display()))?;
    let stem = args
        .dump
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dump".into());
    let files = dump_to_csv(&dump, &out_dir, &stem)?;
    for file in &files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_parser_accepts_both_separators() {
        assert_eq!(parse_pattern("stride-sweep").unwrap(), Pattern::StrideSweep);
        assert_eq!(parse_pattern("hot_set").unwrap(), Pattern::HotSet);
        assert_eq!(parse_pattern("uniform-random").unwrap(), Pattern::UniformRandom);
        assert!(parse_pattern("walk").is_err());
    }

    #[test]
    fn harvest_parser_handles_polling_period() {
        assert_eq!(parse_harvest("interrupt").unwrap(), HarvestMode::Interrupt);
        assert_eq!(parse_harvest("polling:500").unwrap(), HarvestMode::Polling { period: 500 });
        assert!(parse_harvest("polling:0").is_err());
        assert!(parse_harvest("poll").is_err());
    }

    #[test]
    fn cache_parser_handles_bypass_and_geometry() {
        assert_eq!(parse_cache("bypass").unwrap(), CacheKind::Bypass);
        assert_eq!(
            parse_cache("1024,16,64").unwrap(),
            CacheKind::Lru(CacheConfig { sets: 1024, ways: 16, line_bytes: 64 })
        );
        assert!(parse_cache("1024,16").is_err());
        assert!(parse_cache("1000,16,64").is_err(), "sets must be a power of two");
    }

    #[test]
    fn hex_parser_accepts_both_bases() {
        assert_eq!(parse_u64_maybe_hex("0x1000").unwrap(), 4096);
        assert_eq!(parse_u64_maybe_hex("4096").unwrap(), 4096);
        assert!(parse_u64_maybe_hex("0xzz").is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "[workload]\npattern = \"hot_set\"\nseed = 9\n\n\
             [sampler]\nreset = 128\nbuffer_bytes = 16384\n\n\
             [cache]\nmode = \"bypass\"\n",
        )
        .unwrap();
        let file = load_run_file(Some(&path)).unwrap();

        let wf = WorkloadFlags { seed: Some(3), ..WorkloadFlags::default() };
        let spec = resolve_workload(&wf, &file.workload).unwrap();
        assert_eq!(spec.pattern, Pattern::HotSet, "file value survives");
        assert_eq!(spec.seed, 3, "flag wins over file");

        let sf = SamplerFlags { reset: Some(64), ..SamplerFlags::default() };
        let sampler = resolve_sampler(&sf, &file.sampler).unwrap();
        assert_eq!(sampler.reset, 64);
        assert_eq!(sampler.buffer_bytes, 16384);
        assert_eq!(sampler.threshold_records, 16384 / 192);
        assert_eq!(resolve_cache(&sf, file.cache.as_ref()).unwrap(), CacheKind::Bypass);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "[sampler]\nrest = 128\n").unwrap();
        assert!(load_run_file(Some(&path)).is_err());
    }

    #[test]
    fn sim_config_from_toml_applies_file_values() {
        let sim = sim_config_from_toml(
            "[workload]\npattern = \"hot_set\"\n[sampler]\nreset = 128\n[cache]\nmode = \"bypass\"\n",
        )
        .unwrap();
        assert_eq!(sim.workload.pattern, Pattern::HotSet);
        assert_eq!(sim.sampler.reset, 128);
        assert_eq!(sim.cache, CacheKind::Bypass);
        assert!(sim_config_from_toml("not [toml").is_err());
    }
}
