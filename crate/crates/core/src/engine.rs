//! The per-request pipeline over a loaded artifact:
//! filter, recluster from cached edges, evaluate, aggregate.

use std::collections::HashMap;
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::ingest::{
    validate_dataset, BuildMetadata, Detection, DetectionId, RawDataset, SetArtifact,
    ValidationReport, FORMAT_VERSION,
};
use crate::matcher::{
    check_set_iou, compute_edges, evaluate_clusters, filter_detections, generate_clusters,
    AgreementCluster, ClusterId, ClusterStatus, EvalParams, ParamError,
};
use crate::query::{aggregate, IntersectionBar};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("invalid dataset:\n{0}")]
    Invalid(ValidationReport),
}

/// Validate `raw`, compute its cross-model edges at `set_iou` and wrap both
/// into an artifact.
pub fn build_artifact(
    raw: RawDataset,
    set_iou: f64,
    source_folder: &str,
) -> Result<SetArtifact, BuildError> {
    check_set_iou(set_iou)?;
    let report = validate_dataset(&raw);
    if !report.is_valid() {
        return Err(BuildError::Invalid(report));
    }
    let edges = compute_edges(&raw, set_iou);
    let created_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(SetArtifact {
        format_version: FORMAT_VERSION,
        build: BuildMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            source_folder: source_folder.to_string(),
        },
        set_iou,
        dataset: raw,
        edges,
    })
}

/// Clusters and their statuses for one set of evaluation criteria.
/// `statuses[i]` belongs to `clusters[i]`, and `clusters[i].cluster_id == i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub params: EvalParams,
    pub clusters: Vec<AgreementCluster>,
    pub statuses: Vec<ClusterStatus>,
}

impl Evaluation {
    pub fn cluster(&self, id: ClusterId) -> Option<(&AgreementCluster, &ClusterStatus)> {
        let i = id.0 as usize;
        Some((self.clusters.get(i)?, self.statuses.get(i)?))
    }

    pub fn bars(&self) -> Vec<IntersectionBar> {
        aggregate(&self.clusters, &self.statuses)
    }
}

/// Immutable view of an artifact with lookup tables; cheap to share.
#[derive(Debug)]
pub struct Engine {
    artifact: SetArtifact,
    by_id: HashMap<DetectionId, usize>,
}

impl Engine {
    pub fn new(artifact: SetArtifact) -> Self {
        let by_id = artifact
            .dataset
            .detections
            .iter()
            .enumerate()
            .map(|(i, d)| (d.detection_id, i))
            .collect();
        Engine { artifact, by_id }
    }

    pub fn artifact(&self) -> &SetArtifact {
        &self.artifact
    }

    pub fn dataset(&self) -> &RawDataset {
        &self.artifact.dataset
    }

    pub fn models(&self) -> &[String] {
        &self.artifact.dataset.models
    }

    pub fn detection(&self, id: DetectionId) -> Option<&Detection> {
        self.by_id
            .get(&id)
            .map(|&i| &self.artifact.dataset.detections[i])
    }

    /// Confidence-filtered detections.
    pub fn surviving(&self, p: &EvalParams) -> Vec<&Detection> {
        filter_detections(&self.artifact.dataset.detections, p)
    }

    pub fn evaluate(&self, p: &EvalParams) -> Evaluation {
        let dataset = &self.artifact.dataset;
        let surviving = self.surviving(p);
        let clusters = generate_clusters(
            &dataset.models,
            &surviving,
            &self.artifact.edges,
            self.artifact.set_iou,
        );
        let statuses = evaluate_clusters(
            &dataset.models,
            &clusters,
            &surviving,
            &dataset.ground_truth,
            p,
        );
        Evaluation {
            params: *p,
            clusters,
            statuses,
        }
    }

    pub fn intersections(&self, p: &EvalParams) -> Vec<IntersectionBar> {
        self.evaluate(p).bars()
    }

    /// A set IOU above the evaluation IOU lets clusters form from boxes
    /// looser than what counts as a hit; worth a warning, not an error.
    pub fn set_iou_warning(&self, p: &EvalParams) -> Option<String> {
        (self.artifact.set_iou > p.eval_iou).then(|| {
            format!(
                "warning: set IOU {} is above evaluation IOU {}; set IOU should usually be lower",
                self.artifact.set_iou, p.eval_iou
            )
        })
    }
}
