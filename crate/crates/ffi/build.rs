//! Regenerates `include/probseg.h` from the `extern "C"` surface whenever
//! it changes. The header is a shipped deliverable, so a generation failure
//! fails the build rather than leaving a stale file behind.

fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR is set");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let header = std::path::Path::new(&crate_dir).join("include").join("probseg.h");
    cbindgen::generate(&crate_dir)
        .expect("C header generation failed")
        .write_to_file(header);
}
