//! Serve the desk fixture on 127.0.0.1:8080 (or AGREESET_LISTEN).
//!
//!     cargo run --example serve
//!     curl 'localhost:8080/api/intersections?conf_min=0.5'

use std::path::PathBuf;

use agreeset::engine::build_artifact;
use agreeset::ingest::{load_dataset, write_artifact};
use agreeset::service::{serve, ServiceConfig, DEFAULT_LISTEN, LISTEN_ENV};
use agreeset::EvalParams;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let folder = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/desk");
    let artifact = build_artifact(load_dataset(&folder, "dog")?, 0.3, &folder.display().to_string())?;
    let path = std::env::temp_dir().join("desk-serve.artifact");
    write_artifact(&artifact, &path)?;

    let config = ServiceConfig {
        artifact_path: path,
        listen_address: std::env::var(LISTEN_ENV).unwrap_or_else(|_| DEFAULT_LISTEN.to_string()),
        static_image_root: folder,
        defaults: EvalParams::default(),
    };
    println!("listening on {}", config.listen_address);
    serve(config).await?;
    Ok(())
}
