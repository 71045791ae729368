fn main() {
    let dir = std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR");
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("MAGWEYL_H".into()),
        cpp_compat: true,
        documentation: true,
        usize_is_size_t: true,
        // enum arguments travel as int; export the value sets explicitly
        export: cbindgen::ExportConfig { include: ["MwPotential", "MwRoute", "MwFormat"].map(String::from).to_vec(), ..Default::default() },
        enumeration: cbindgen::EnumConfig { prefix_with_name: true, ..Default::default() },
        ..Default::default()
    };
    println!("cargo:rerun-if-changed=src/lib.rs");
    cbindgen::Builder::new()
        .with_crate(&dir)
        .with_config(config)
        .generate()
        .expect("header generation")
        .write_to_file(std::path::Path::new(&dir).join("include/magweyl.h"));
}
