use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml");
    let bindings = match cbindgen::generate_with_config(&crate_dir, config) {
        Ok(b) => b,
        Err(e) => {
            // Keep the checked-in header when the source cannot be parsed mid-edit.
            println!("cargo:warning=header not regenerated: {e}");
            return;
        }
    };
    let mut bytes = Vec::new();
    bindings.write(&mut bytes);
    let header = crate_dir.join("include").join("tokennet.h");
    if fs::read(&header).ok().as_deref() != Some(bytes.as_slice()) {
        fs::create_dir_all(header.parent().unwrap()).expect("include dir");
        fs::write(&header, bytes).expect("write header");
    }
}
