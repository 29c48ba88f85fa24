use std::env;
use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let crate_dir = env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR set by cargo");
    let header = PathBuf::from(&crate_dir).join("include").join("pebssim.h");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(header);
        }
        // Header generation failing should not break `cargo build` for Rust
        // consumers; surface it as a warning instead.
        Err(e) => println!("cargo:warning=cbindgen failed: {e}"),
    }
}
