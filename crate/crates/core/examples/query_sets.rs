//! Tri-state queries over the desk fixture: what only one model finds, and
//! what two models agree on while the third disagrees.
//!
//!     cargo run --example query_sets

use std::path::PathBuf;

use agreeset::engine::build_artifact;
use agreeset::ingest::load_dataset;
use agreeset::{query::query, Engine, EvalParams, QuerySpec, StatusFilter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let folder = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/desk");
    let engine = Engine::new(build_artifact(load_dataset(&folder, "dog")?, 0.3, "desk")?);
    let p = EvalParams::default();
    let eval = engine.evaluate(&p);
    let models = engine.models().to_vec();

    for m in &models {
        let others: Vec<&str> = models.iter().filter(|o| *o != m).map(String::as_str).collect();
        let spec = QuerySpec::from_lists(&models, &[m.as_str()], &others, &[], StatusFilter::All, p)?;
        let ids = query(&spec, &eval.clusters, &eval.statuses);
        println!("clusters only {m} predicts: {}", ids.len());
    }

    let spec = QuerySpec::from_lists(
        &models,
        &["detr-resnet", "yolo-base"],
        &["faster-rcnn"],
        &[],
        StatusFilter::Fp,
        p,
    )?;
    for id in query(&spec, &eval.clusters, &eval.statuses) {
        let (cluster, _) = eval.cluster(id).expect("queried id exists");
        println!("shared false positive {id} on {}", cluster.image_id);
    }
    Ok(())
}
