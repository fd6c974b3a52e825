//! Compare machine-learning models by what they predict together.
//!
//! Instead of scoring each model only against ground truth, `agreeset`
//! matches the predictions of several models into *agreement clusters*
//! (one prediction per model at most), keys each cluster by the set of
//! models present in it, and aggregates those keys UpSet-style into
//! exclusive intersections. Analysts can then ask questions such as
//! "where does model B detect something model A does not?" and tag the
//! images behind the answer.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`ingest`]: prediction/ground-truth folders and the artifact file.
//! - [`matcher`]: IOU, confidence filtering, greedy cross-model clustering
//!   and TP/FP evaluation for object detection.
//! - [`generic`]: agreement groups for classification, regression and
//!   clustering outputs.
//! - [`query`]: exclusive-intersection bars, tri-state queries and tags.
//! - [`metrics`]: Jaccard/Tversky similarity and per-model precision/recall.
//! - [`engine`]: the per-request pipeline over a loaded artifact.
//! - [`service`] and [`cli`]: the HTTP interface and the command line.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod cli;
pub mod engine;
pub mod generic;
pub mod ingest;
pub mod matcher;
pub mod metrics;
pub mod query;
pub mod service;

pub use engine::{Engine, Evaluation};
pub use ingest::{
    BoundingBox, Detection, DetectionId, GroundTruthObject, GtId, ImageInfo, RawDataset,
    SetArtifact,
};
pub use matcher::{AgreementCluster, ClusterId, ClusterStatus, EvalParams, Signature, Status};
pub use query::{IntersectionBar, QuerySpec, StatusFilter, TagStore, TriState};
