//! Load the desk fixture, build an artifact and print its intersection bars.
//!
//!     cargo run --example detection_pipeline

use std::path::PathBuf;

use agreeset::engine::build_artifact;
use agreeset::ingest::{load_dataset, validate_dataset};
use agreeset::{Engine, EvalParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let folder = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/desk");
    let raw = load_dataset(&folder, "dog")?;
    println!(
        "{} models, {} detections, {} ground-truth objects ({} records of other classes dropped)",
        raw.models.len(),
        raw.detections.len(),
        raw.ground_truth.len(),
        raw.dropped.detections + raw.dropped.ground_truth
    );
    assert!(validate_dataset(&raw).is_valid());

    let artifact = build_artifact(raw, 0.3, &folder.display().to_string())?;
    println!("{} cross-model edges at set IOU {}", artifact.edges.len(), artifact.set_iou);

    let engine = Engine::new(artifact);
    let p = EvalParams::new(0.5, 0.7, 1.0)?;
    let eval = engine.evaluate(&p);
    println!("{} clusters\n", eval.clusters.len());
    println!("{:<40} {:>3} {:>3}", "signature", "tp", "fp");
    for bar in eval.bars() {
        println!("{:<40} {:>3} {:>3}", bar.signature.to_string(), bar.tp_count, bar.fp_count);
    }
    Ok(())
}
