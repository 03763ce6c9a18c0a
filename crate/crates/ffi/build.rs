use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("nlss.h");

    let mut config = cbindgen::Config::default();
    config.enumeration.prefix_with_name = true;
    config.usize_is_size_t = true;

    cbindgen::Builder::new()
        .with_config(config)
        .with_crate(&crate_dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("NLSS_H")
        .with_documentation(true)
        .with_cpp_compat(true)
        .with_style(cbindgen::Style::Both)
        .generate()
        .expect("unable to generate C bindings")
        .write_to_file(header);

    println!("cargo:rerun-if-changed=src/");
    println!("cargo:rerun-if-changed=build.rs");
}
