//! Tag images and write the tag document next to an artifact.
//!
//!     cargo run --example tagging_export

use std::path::PathBuf;

use agreeset::engine::build_artifact;
use agreeset::ingest::{load_dataset, write_artifact};
use agreeset::query::sidecar_path;
use agreeset::TagStore;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let folder = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/desk");
    let artifact = build_artifact(load_dataset(&folder, "dog")?, 0.3, "desk")?;
    let out = std::env::temp_dir().join("desk-example.artifact");
    write_artifact(&artifact, &out)?;

    let images = &artifact.dataset.images;
    let mut tags = TagStore::new();
    tags.assign("Partial Detection", &["img03", "img05"], images)?;
    tags.assign("Duplicate Labels", &["img04"], images)?;
    if let Err(e) = tags.assign("Nope", &["img99"], images) {
        println!("rejected: {e}");
    }

    let sidecar = sidecar_path(&out);
    tags.export(&sidecar, images)?;
    println!("wrote {}", sidecar.display());
    print!("{}", std::fs::read_to_string(&sidecar)?);
    Ok(())
}
