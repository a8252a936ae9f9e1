use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml");
    let header = crate_dir.join("include/navmine.h");
    let bindings = cbindgen::Builder::new().with_crate(&crate_dir).with_config(config).generate().expect("generating navmine.h");
    // Only touches the file when the API changed.
    bindings.write_to_file(header);
}
