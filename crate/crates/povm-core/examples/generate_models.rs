//! Regenerates the bundled model files in canonical form.
//!
//! Usage: `cargo run -p povm-core --example generate_models [out_dir]`
//! (default `data`, relative to the working directory).

use povm_core::io::{save_model, Model};
use povm_core::presets::{
    diagonal_triple, misregistered_spin_half, misregistration_ancilla_model, spin_one_z,
    up_projection_measure,
};
use povm_core::DensityMatrix;

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data".to_string());
    std::fs::create_dir_all(&out_dir).expect("create output directory");

    let files: Vec<(&str, Model)> = vec![
        (
            "misregistered_spin_half.json",
            Model::Povm(misregistered_spin_half(0.1, 0.2).unwrap()),
        ),
        ("diagonal_triple.json", Model::Povm(diagonal_triple().unwrap())),
        ("spin_one_z.json", Model::Sharp(spin_one_z().unwrap())),
        (
            "up_projection.json",
            Model::Sharp(up_projection_measure().unwrap()),
        ),
        (
            "maximally_mixed_qubit.json",
            Model::Density(DensityMatrix::maximally_mixed(2).unwrap()),
        ),
        (
            "ancilla_misregistration.json",
            Model::Ancilla(misregistration_ancilla_model(0.1, 0.2).unwrap()),
        ),
    ];
    for (name, model) in &files {
        let path = std::path::Path::new(&out_dir).join(name);
        save_model(&path, model).expect("write model file");
        println!("wrote {}", path.display());
    }
}
