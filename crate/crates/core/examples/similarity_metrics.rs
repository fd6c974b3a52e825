//! Per-model precision/recall next to the Jaccard and containment matrices.
//!
//!     cargo run --example similarity_metrics

use std::path::PathBuf;

use agreeset::engine::build_artifact;
use agreeset::ingest::load_dataset;
use agreeset::metrics::{metrics_report, tversky, tversky_containment};
use agreeset::{Engine, EvalParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let folder = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/desk");
    let engine = Engine::new(build_artifact(load_dataset(&folder, "dog")?, 0.3, "desk")?);
    let report = metrics_report(&engine, &EvalParams::new(0.5, 0.5, 1.0)?);
    print!("{}", report.to_table());

    // plain sets work too
    let a: std::collections::BTreeSet<u32> = (0..100).collect();
    let b: std::collections::BTreeSet<u32> = (0..90).collect();
    println!("\ncontainment of 90 in 100: {}", tversky_containment(&b, &a));
    println!("containment of 100 in 90: {}", tversky_containment(&a, &b));
    println!("tversky(0.5, 0.5): {:.4}", tversky(&a, &b, 0.5, 0.5));
    Ok(())
}
