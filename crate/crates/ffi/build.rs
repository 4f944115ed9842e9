//! Generates the C header from the public extern "C" surface. The
//! header lands in OUT_DIR for consumers building from source and is
//! mirrored to include/seqpipe.h, which is committed; a test asserts
//! the two stay in sync.

use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("cargo sets this"));
    let out_path = PathBuf::from(env::var("OUT_DIR").expect("cargo sets this")).join("seqpipe.h");

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    println!("cargo:rustc-env=SEQPIPE_GENERATED_HEADER={}", out_path.display());

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml parses");
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation succeeds")
        .write_to_file(&out_path);

    // Refresh the committed copy when the surface changed; best-effort
    // so read-only checkouts still build.
    let committed = crate_dir.join("include").join("seqpipe.h");
    let generated = fs::read(&out_path).expect("generated header is readable");
    if fs::read(&committed).ok().as_deref() != Some(generated.as_slice()) {
        let _ = fs::create_dir_all(committed.parent().expect("include/ has a parent"));
        let _ = fs::write(&committed, &generated);
    }
}
