use anyhow::Result;
use clap::Parser;

use pebssim::cli::{run, Cli};

fn main() -> Result<()> {
    // Die quietly when stdout closes early (`pebssim sweep | head`) instead
    // of panicking on the broken pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    run(Cli::parse())
}
