//! Desk-scale simulator for event-based memory-access sampling.
//!
//! The crate models the full pipeline a hardware sampling unit implements in
//! silicon: synthetic multi-threaded workloads ([`workload`]) run through a
//! set-associative cache filter ([`cache`]), the surviving misses are
//! decimated and buffered by a per-thread sampler ([`sampler`]), and the
//! harvested batches land in a binary dump ([`trace`]) that the analysis
//! passes ([`analyze`]) and report writers ([`report`]) consume. [`sim`] wires
//! the stages together and [`cli`] exposes them as the `pebssim` binary.

pub mod analyze;
pub mod cache;
pub mod cli;
pub mod report;
pub mod sampler;
pub mod sim;
pub mod trace;
pub mod workload;

/// Simulated page size; dump headers record it so readers need not guess.
pub const PAGE_SIZE: u64 = 4096;
