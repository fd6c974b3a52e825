//! Reading prediction folders and owning the artifact file format.
//!
//! A prediction folder holds one `<model_id>.json` file per model, a
//! `groundtruth.json` file and an `images.json` index. Boxes are
//! `[x, y, w, h]` in pixels with a top-left origin.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::matcher::Edge;

/// Version written into every artifact; readers refuse anything else.
pub const FORMAT_VERSION: u32 = 1;
pub const GROUND_TRUTH_FILE: &str = "groundtruth.json";
pub const IMAGE_INDEX_FILE: &str = "images.json";
/// Model signatures are stored as 64-bit masks.
pub const MAX_MODELS: usize = 64;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("folder not found: {}", .0.display())]
    FolderNotFound(PathBuf),
    #[error("missing ground-truth file {}", .0.display())]
    MissingGroundTruth(PathBuf),
    #[error("missing image index file {}", .0.display())]
    MissingImageIndex(PathBuf),
    #[error("criterion 1 violated: at least two model prediction files are required, found {found}")]
    TooFewModels { found: usize },
    #[error("{found} models found, at most {MAX_MODELS} are supported")]
    TooManyModels { found: usize },
    #[error("object class must not be empty")]
    EmptyObjectClass,
    #[error("{}:{line}:{column}: malformed record: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}: record {record} references unknown image_id {image_id:?}", path.display())]
    UnknownImage {
        path: PathBuf,
        record: usize,
        image_id: String,
    },
    #[error("{}: duplicate image_id {image_id:?}", path.display())]
    DuplicateImage { path: PathBuf, image_id: String },
    #[error("artifact format version mismatch: file declares version {found}, this build reads version {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupted artifact {}: {message}", path.display())]
    Corrupted { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

/// Axis-aligned box in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, String> {
        let b = BoundingBox { x, y, w, h };
        b.check()?;
        Ok(b)
    }

    pub fn check(&self) -> Result<(), String> {
        if ![self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite()) {
            return Err("box coordinates must be finite".into());
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(format!(
                "degenerate box: width {} and height {} must be positive",
                self.w, self.h
            ));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }
}

impl TryFrom<[f64; 4]> for BoundingBox {
    type Error = String;

    fn try_from([x, y, w, h]: [f64; 4]) -> Result<Self, String> {
        BoundingBox::new(x, y, w, h)
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DetectionId(pub u32);

impl fmt::Display for DetectionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GtId(pub u32);

impl fmt::Display for GtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub detection_id: DetectionId,
    pub model_id: String,
    pub image_id: String,
    pub bbox: BoundingBox,
    #[serde(rename = "class")]
    pub class_label: String,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    pub gt_id: GtId,
    pub image_id: String,
    pub bbox: BoundingBox,
    #[serde(rename = "class")]
    pub class_label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageInfo {
    pub file: String,
    pub width: u32,
    pub height: u32,
}

/// Records removed by the class filter while loading.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedCounts {
    pub detections: usize,
    pub ground_truth: usize,
}

/// Predictions of every model plus ground truth, restricted to one class.
///
/// `models` is the canonical order used for every tie-break downstream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawDataset {
    pub object_class: String,
    pub models: Vec<String>,
    pub images: BTreeMap<String, ImageInfo>,
    pub detections: Vec<Detection>,
    pub ground_truth: Vec<GroundTruthObject>,
    #[serde(default)]
    pub dropped: DroppedCounts,
}

impl RawDataset {
    pub fn model_index(&self, model_id: &str) -> Option<usize> {
        self.models.iter().position(|m| m == model_id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildMetadata {
    pub tool_version: String,
    pub created_unix: u64,
    pub source_folder: String,
}

/// Persisted product of a build: the dataset plus cached cross-model edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetArtifact {
    pub format_version: u32,
    pub build: BuildMetadata,
    pub set_iou: f64,
    pub dataset: RawDataset,
    pub edges: Vec<Edge>,
}

impl SetArtifact {
    /// Canonical serialization; `load_artifact` followed by this call
    /// reproduces the written bytes.
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("artifact serializes");
        bytes.push(b'\n');
        bytes
    }

    /// Structural checks run on load: edges reference known detections of
    /// different models on the same image, at or above `set_iou`.
    fn check_edges(&self) -> Result<(), String> {
        if !(self.set_iou > 0.0 && self.set_iou <= 1.0) {
            return Err(format!("set_iou {} outside (0, 1]", self.set_iou));
        }
        let by_id: std::collections::HashMap<DetectionId, &Detection> = self
            .dataset
            .detections
            .iter()
            .map(|d| (d.detection_id, d))
            .collect();
        for (i, e) in self.edges.iter().enumerate() {
            let (Some(a), Some(b)) = (by_id.get(&e.a), by_id.get(&e.b)) else {
                return Err(format!("edge {i} references an unknown detection"));
            };
            if a.model_id == b.model_id {
                return Err(format!("edge {i} joins two detections of model {}", a.model_id));
            }
            if a.image_id != b.image_id {
                return Err(format!("edge {i} crosses images"));
            }
            if !(e.iou >= self.set_iou && e.iou <= 1.0) {
                return Err(format!("edge {i} has iou {} below set_iou", e.iou));
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ImageKey {
    Text(String),
    Number(u64),
}

impl From<ImageKey> for String {
    fn from(k: ImageKey) -> Self {
        match k {
            ImageKey::Text(s) => s,
            ImageKey::Number(n) => n.to_string(),
        }
    }
}

fn image_key<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    ImageKey::deserialize(d).map(String::from)
}

fn unit_ratio<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(serde::de::Error::custom(format!(
            "confidence {v} outside [0, 1]"
        )))
    }
}

#[derive(Deserialize)]
struct PredictionRecord {
    #[serde(deserialize_with = "image_key")]
    image_id: String,
    bbox: BoundingBox,
    class: String,
    #[serde(deserialize_with = "unit_ratio")]
    confidence: f64,
}

#[derive(Deserialize)]
struct GroundTruthRecord {
    #[serde(deserialize_with = "image_key")]
    image_id: String,
    bbox: BoundingBox,
    class: String,
}

#[derive(Deserialize)]
struct ImageRecord {
    #[serde(deserialize_with = "image_key")]
    image_id: String,
    file: String,
    width: u32,
    height: u32,
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_records<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| IngestError::Malformed {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Model prediction files in `root`, sorted by file name.
fn model_files(root: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(root).map_err(|source| IngestError::Io {
        path: root.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| IngestError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if name.starts_with('.')
            || name == GROUND_TRUTH_FILE
            || name == IMAGE_INDEX_FILE
            || !path.is_file()
        {
            continue;
        }
        if let Some(stem) = name.strip_suffix(".json") {
            files.push((name.to_string(), stem.to_string(), path.clone()));
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(files.into_iter().map(|(_, stem, path)| (stem, path)).collect())
}

/// Load every model's predictions plus ground truth from `root`, keeping
/// only records of `object_class`.
pub fn load_dataset(root: impl AsRef<Path>, object_class: &str) -> Result<RawDataset> {
    let root = root.as_ref();
    if object_class.is_empty() {
        return Err(IngestError::EmptyObjectClass);
    }
    if !root.is_dir() {
        return Err(IngestError::FolderNotFound(root.to_path_buf()));
    }
    let gt_path = root.join(GROUND_TRUTH_FILE);
    if !gt_path.is_file() {
        return Err(IngestError::MissingGroundTruth(gt_path));
    }
    let index_path = root.join(IMAGE_INDEX_FILE);
    if !index_path.is_file() {
        return Err(IngestError::MissingImageIndex(index_path));
    }
    let models = model_files(root)?;
    if models.len() < 2 {
        return Err(IngestError::TooFewModels {
            found: models.len(),
        });
    }
    if models.len() > MAX_MODELS {
        return Err(IngestError::TooManyModels {
            found: models.len(),
        });
    }

    let mut images = BTreeMap::new();
    for rec in parse_records::<ImageRecord>(&index_path)? {
        let info = ImageInfo {
            file: rec.file,
            width: rec.width,
            height: rec.height,
        };
        if images.insert(rec.image_id.clone(), info).is_some() {
            return Err(IngestError::DuplicateImage {
                path: index_path,
                image_id: rec.image_id,
            });
        }
    }

    let mut dropped = DroppedCounts::default();
    let mut detections = Vec::new();
    for (model_id, path) in &models {
        for (record, rec) in parse_records::<PredictionRecord>(path)?.into_iter().enumerate() {
            if !images.contains_key(&rec.image_id) {
                return Err(IngestError::UnknownImage {
                    path: path.clone(),
                    record,
                    image_id: rec.image_id,
                });
            }
            if rec.class != object_class {
                dropped.detections += 1;
                continue;
            }
            detections.push(Detection {
                detection_id: DetectionId(detections.len() as u32),
                model_id: model_id.clone(),
                image_id: rec.image_id,
                bbox: rec.bbox,
                class_label: rec.class,
                confidence: rec.confidence,
            });
        }
    }

    let mut ground_truth = Vec::new();
    for (record, rec) in parse_records::<GroundTruthRecord>(&gt_path)?
        .into_iter()
        .enumerate()
    {
        if !images.contains_key(&rec.image_id) {
            return Err(IngestError::UnknownImage {
                path: gt_path.clone(),
                record,
                image_id: rec.image_id,
            });
        }
        if rec.class != object_class {
            dropped.ground_truth += 1;
            continue;
        }
        ground_truth.push(GroundTruthObject {
            gt_id: GtId(ground_truth.len() as u32),
            image_id: rec.image_id,
            bbox: rec.bbox,
            class_label: rec.class,
        });
    }

    Ok(RawDataset {
        object_class: object_class.to_string(),
        models: models.into_iter().map(|(m, _)| m).collect(),
        images,
        detections,
        ground_truth,
        dropped,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DetectionProblem {
    ConfidenceOutOfRange,
    InvalidBox(String),
    UnknownImage,
    UnknownModel,
    ClassMismatch,
    DuplicateId,
}

impl fmt::Display for DetectionProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectionProblem::ConfidenceOutOfRange => f.write_str("confidence out of range"),
            DetectionProblem::InvalidBox(why) => write!(f, "invalid box ({why})"),
            DetectionProblem::UnknownImage => f.write_str("unknown image_id"),
            DetectionProblem::UnknownModel => f.write_str("unknown model_id"),
            DetectionProblem::ClassMismatch => f.write_str("class differs from object class"),
            DetectionProblem::DuplicateId => f.write_str("duplicate detection id"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    TooFewModels { found: usize },
    TooManyModels { found: usize },
    DuplicateModel(String),
    EmptyObjectClass,
    EmptyImage(String),
    Detection {
        model_id: String,
        detection_id: DetectionId,
        problem: DetectionProblem,
    },
    GroundTruth {
        gt_id: GtId,
        problem: DetectionProblem,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewModels { found } => {
                write!(f, "criterion 1 violated: {found} model(s), need at least 2")
            }
            Violation::TooManyModels { found } => {
                write!(f, "{found} models, at most {MAX_MODELS} supported")
            }
            Violation::DuplicateModel(m) => write!(f, "model {m} listed twice"),
            Violation::EmptyObjectClass => f.write_str("object class is empty"),
            Violation::EmptyImage(id) => write!(f, "image {id} has zero width or height"),
            Violation::Detection {
                model_id,
                detection_id,
                problem,
            } => write!(f, "({model_id}, {detection_id}, \"{problem}\")"),
            Violation::GroundTruth { gt_id, problem } => write!(f, "({gt_id}, \"{problem}\")"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Report every violated dataset invariant. An empty report means valid.
pub fn validate_dataset(d: &RawDataset) -> ValidationReport {
    let mut violations = Vec::new();
    if d.models.len() < 2 {
        violations.push(Violation::TooFewModels {
            found: d.models.len(),
        });
    }
    if d.models.len() > MAX_MODELS {
        violations.push(Violation::TooManyModels {
            found: d.models.len(),
        });
    }
    let mut seen_models = HashSet::new();
    for m in &d.models {
        if !seen_models.insert(m.as_str()) {
            violations.push(Violation::DuplicateModel(m.clone()));
        }
    }
    if d.object_class.is_empty() {
        violations.push(Violation::EmptyObjectClass);
    }
    for (id, info) in &d.images {
        if info.width == 0 || info.height == 0 {
            violations.push(Violation::EmptyImage(id.clone()));
        }
    }

    let mut seen_ids = HashSet::new();
    for det in &d.detections {
        let mut flag = |problem| {
            violations.push(Violation::Detection {
                model_id: det.model_id.clone(),
                detection_id: det.detection_id,
                problem,
            })
        };
        if !seen_ids.insert(det.detection_id) {
            flag(DetectionProblem::DuplicateId);
        }
        if !seen_models.contains(det.model_id.as_str()) {
            flag(DetectionProblem::UnknownModel);
        }
        if !(0.0..=1.0).contains(&det.confidence) {
            flag(DetectionProblem::ConfidenceOutOfRange);
        }
        if let Err(why) = det.bbox.check() {
            flag(DetectionProblem::InvalidBox(why));
        }
        if !d.images.contains_key(&det.image_id) {
            flag(DetectionProblem::UnknownImage);
        }
        if det.class_label != d.object_class {
            flag(DetectionProblem::ClassMismatch);
        }
    }

    let mut seen_gt = HashSet::new();
    for gt in &d.ground_truth {
        let mut flag = |problem| {
            violations.push(Violation::GroundTruth {
                gt_id: gt.gt_id,
                problem,
            })
        };
        if !seen_gt.insert(gt.gt_id) {
            flag(DetectionProblem::DuplicateId);
        }
        if let Err(why) = gt.bbox.check() {
            flag(DetectionProblem::InvalidBox(why));
        }
        if !d.images.contains_key(&gt.image_id) {
            flag(DetectionProblem::UnknownImage);
        }
        if gt.class_label != d.object_class {
            flag(DetectionProblem::ClassMismatch);
        }
    }
    ValidationReport { violations }
}

pub fn write_artifact(a: &SetArtifact, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, a.to_canonical_bytes()).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

pub fn load_artifact(path: impl AsRef<Path>) -> Result<SetArtifact> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    parse_artifact(&bytes).map_err(|e| match e {
        IngestError::Corrupted { message, .. } => IngestError::Corrupted {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Parse artifact bytes; the version is checked before the body.
pub fn parse_artifact(bytes: &[u8]) -> Result<SetArtifact> {
    let corrupted = |message: String| IngestError::Corrupted {
        path: PathBuf::from("<memory>"),
        message,
    };
    let probe: VersionProbe =
        serde_json::from_slice(bytes).map_err(|e| corrupted(e.to_string()))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(IngestError::VersionMismatch {
            found: probe.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let artifact: SetArtifact =
        serde_json::from_slice(bytes).map_err(|e| corrupted(e.to_string()))?;
    artifact.check_edges().map_err(corrupted)?;
    Ok(artifact)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(id: u32, model: &str, confidence: f64) -> Detection {
        Detection {
            detection_id: DetectionId(id),
            model_id: model.into(),
            image_id: "img1".into(),
            bbox: BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap(),
            class_label: "dog".into(),
            confidence,
        }
    }

    fn dataset() -> RawDataset {
        let mut images = BTreeMap::new();
        images.insert(
            "img1".to_string(),
            ImageInfo {
                file: "img1.jpg".into(),
                width: 100,
                height: 100,
            },
        );
        RawDataset {
            object_class: "dog".into(),
            models: vec!["modelA".into(), "modelB".into()],
            images,
            detections: vec![det(0, "modelA", 0.9), det(1, "modelB", 0.8)],
            ground_truth: vec![],
            dropped: DroppedCounts::default(),
        }
    }

    #[test]
    fn valid_dataset_has_empty_report() {
        assert!(validate_dataset(&dataset()).is_valid());
    }

    #[test]
    fn confidence_out_of_range_is_named() {
        let mut d = dataset();
        d.detections[0].confidence = 1.3;
        let report = validate_dataset(&d);
        assert_eq!(
            report.violations,
            vec![Violation::Detection {
                model_id: "modelA".into(),
                detection_id: DetectionId(0),
                problem: DetectionProblem::ConfidenceOutOfRange,
            }]
        );
        assert!(report.to_string().contains("confidence out of range"));
    }

    #[test]
    fn duplicate_detection_ids_are_reported() {
        let mut d = dataset();
        d.detections.push(det(1, "modelB", 0.5));
        let report = validate_dataset(&d);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::Detection { model_id, detection_id: DetectionId(1), problem: DetectionProblem::DuplicateId }
                if model_id == "modelB"
        )));
    }

    #[test]
    fn single_model_violates_criterion_one() {
        let mut d = dataset();
        d.models.pop();
        let report = validate_dataset(&d);
        assert!(report
            .violations
            .contains(&Violation::TooFewModels { found: 1 }));
        // modelB's detection now names an unknown model
        assert_eq!(report.violations.len(), 2);
    }

    #[test]
    fn degenerate_boxes_are_rejected() {
        assert!(BoundingBox::new(0.0, 0.0, 0.0, 5.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, 5.0, -1.0).is_err());
        assert!(BoundingBox::new(f64::NAN, 0.0, 5.0, 5.0).is_err());
        let parsed: std::result::Result<BoundingBox, _> = serde_json::from_str("[1, 2, 0, 4]");
        assert!(parsed.is_err());
    }

    #[test]
    fn bbox_serializes_as_array() {
        let b = BoundingBox::new(1.5, 2.0, 3.0, 4.0).unwrap();
        assert_eq!(serde_json::to_string(&b).unwrap(), "[1.5,2.0,3.0,4.0]");
    }

    #[test]
    fn numeric_image_ids_become_strings() {
        let rec: PredictionRecord = serde_json::from_str(
            r#"{"image_id": 42, "bbox": [0, 0, 1, 1], "class": "dog", "confidence": 0.5}"#,
        )
        .unwrap();
        assert_eq!(rec.image_id, "42");
    }

    #[test]
    fn version_mismatch_names_both_versions() {
        let err = parse_artifact(br#"{"format_version": 999}"#).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(
            err,
            IngestError::VersionMismatch {
                found: 999,
                expected: FORMAT_VERSION
            }
        ));
        assert!(msg.contains("999") && msg.contains(&FORMAT_VERSION.to_string()));
    }

    #[test]
    fn garbage_is_corrupted() {
        assert!(matches!(
            parse_artifact(b"{not json"),
            Err(IngestError::Corrupted { .. })
        ));
        assert!(matches!(
            parse_artifact(br#"{"format_version": 1, "edges": 3}"#),
            Err(IngestError::Corrupted { .. })
        ));
    }
}
