//! Cross-model matching of object detections.
//!
//! The pipeline is: confidence filter, greedy clustering over cached
//! cross-model IOU edges, then TP/FP evaluation of each cluster against
//! ground truth.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{BoundingBox, Detection, DetectionId, GroundTruthObject, GtId, RawDataset};

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("eval-iou out of range: {0} not in (0, 1]")]
    EvalIou(f64),
    #[error("set-iou out of range: {0} not in (0, 1]")]
    SetIou(f64),
    #[error("conf-min out of range: {0} not in [0, 1]")]
    ConfMin(f64),
    #[error("conf-max out of range: {0} not in [0, 1]")]
    ConfMax(f64),
    #[error("conf-min {min} exceeds conf-max {max}")]
    ConfOrder { min: f64, max: f64 },
}

pub fn check_set_iou(set_iou: f64) -> Result<(), ParamError> {
    if set_iou > 0.0 && set_iou <= 1.0 {
        Ok(())
    } else {
        Err(ParamError::SetIou(set_iou))
    }
}

/// Interactive evaluation criteria: ground-truth IOU and confidence range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub eval_iou: f64,
    pub conf_min: f64,
    pub conf_max: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            eval_iou: 0.5,
            conf_min: 0.7,
            conf_max: 1.0,
        }
    }
}

impl EvalParams {
    pub fn new(eval_iou: f64, conf_min: f64, conf_max: f64) -> Result<Self, ParamError> {
        let p = EvalParams {
            eval_iou,
            conf_min,
            conf_max,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.eval_iou > 0.0 && self.eval_iou <= 1.0) {
            return Err(ParamError::EvalIou(self.eval_iou));
        }
        if !(0.0..=1.0).contains(&self.conf_min) {
            return Err(ParamError::ConfMin(self.conf_min));
        }
        if !(0.0..=1.0).contains(&self.conf_max) {
            return Err(ParamError::ConfMax(self.conf_max));
        }
        if self.conf_min > self.conf_max {
            return Err(ParamError::ConfOrder {
                min: self.conf_min,
                max: self.conf_max,
            });
        }
        Ok(())
    }

    pub fn accepts(&self, confidence: f64) -> bool {
        self.conf_min <= confidence && confidence <= self.conf_max
    }
}

/// Intersection over union of two boxes; 0 when they do not overlap.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = a.right().min(b.right()) - a.x.max(b.x);
    let ih = a.bottom().min(b.bottom()) - a.y.max(b.y);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Detections whose confidence lies in `[conf_min, conf_max]`, in input order.
pub fn filter_detections<'a>(d: &'a [Detection], p: &EvalParams) -> Vec<&'a Detection> {
    d.iter().filter(|det| p.accepts(det.confidence)).collect()
}

/// A cached cross-model overlap. `a` is the endpoint that sorts first in
/// (model index, detection id) order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: DetectionId,
    pub b: DetectionId,
    pub iou: f64,
}

fn model_positions(models: &[String]) -> HashMap<&str, usize> {
    models
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_str(), i))
        .collect()
}

/// Canonical edge order: descending IOU, then endpoint keys ascending.
fn edge_order(x: &(Edge, usize, usize), y: &(Edge, usize, usize)) -> Ordering {
    y.0.iou
        .total_cmp(&x.0.iou)
        .then(x.1.cmp(&y.1))
        .then(x.0.a.cmp(&y.0.a))
        .then(x.2.cmp(&y.2))
        .then(x.0.b.cmp(&y.0.b))
}

/// All cross-model, same-image pairs with IOU at least `set_iou`, in the
/// canonical order the greedy clustering consumes.
pub fn compute_edges(d: &RawDataset, set_iou: f64) -> Vec<Edge> {
    let positions = model_positions(&d.models);
    let model_of = |det: &Detection| positions.get(det.model_id.as_str()).copied().unwrap_or(usize::MAX);

    let mut by_image: BTreeMap<&str, Vec<&Detection>> = BTreeMap::new();
    for det in &d.detections {
        by_image.entry(det.image_id.as_str()).or_default().push(det);
    }

    let mut keyed = Vec::new();
    for dets in by_image.values() {
        for (i, x) in dets.iter().enumerate() {
            for y in &dets[i + 1..] {
                if x.model_id == y.model_id {
                    continue;
                }
                let v = iou(&x.bbox, &y.bbox);
                if v < set_iou {
                    continue;
                }
                let (mx, my) = (model_of(x), model_of(y));
                let (first, second, m1, m2) = if (mx, x.detection_id) <= (my, y.detection_id) {
                    (x, y, mx, my)
                } else {
                    (y, x, my, mx)
                };
                keyed.push((
                    Edge {
                        a: first.detection_id,
                        b: second.detection_id,
                        iou: v,
                    },
                    m1,
                    m2,
                ));
            }
        }
    }
    keyed.sort_by(edge_order);
    keyed.into_iter().map(|(e, _, _)| e).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub u32);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Models present in a cluster, in canonical model order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature(Vec<String>);

impl Signature {
    /// Build a signature from model ids, ordering them by `models`.
    /// Ids missing from `models` sort last, by name.
    pub fn new<S: AsRef<str>>(present: &[S], models: &[String]) -> Self {
        let mut keyed: Vec<(usize, String)> = present
            .iter()
            .map(|m| {
                let m = m.as_ref();
                (
                    models.iter().position(|x| x == m).unwrap_or(usize::MAX),
                    m.to_string(),
                )
            })
            .collect();
        keyed.sort();
        keyed.dedup();
        Signature(keyed.into_iter().map(|(_, m)| m).collect())
    }

    pub(crate) fn from_mask(mask: u64, models: &[String]) -> Self {
        Signature(
            models
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1u64 << i) != 0)
                .map(|(_, m)| m.clone())
                .collect(),
        )
    }

    pub fn models(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, model_id: &str) -> bool {
        self.0.iter().any(|m| m == model_id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(","))
    }
}

/// Detections judged to be the same prediction, at most one per model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementCluster {
    pub cluster_id: ClusterId,
    pub image_id: String,
    /// Ordered by canonical model order.
    pub members: Vec<DetectionId>,
    pub signature: Signature,
}

struct DisjointSets {
    parent: Vec<usize>,
    mask: Vec<u64>,
}

impl DisjointSets {
    fn new(masks: Vec<u64>) -> Self {
        DisjointSets {
            parent: (0..masks.len()).collect(),
            mask: masks,
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Merge the sets of `a` and `b` when their model masks are disjoint.
    fn union_disjoint(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb || self.mask[ra] & self.mask[rb] != 0 {
            return false;
        }
        let (root, child) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[child] = root;
        self.mask[root] |= self.mask[child];
        true
    }
}

/// Greedy agreement clustering.
///
/// Edges are consumed in the order given (the canonical order produced by
/// [`compute_edges`]); edges below `set_iou` or touching a detection absent
/// from `detections` are skipped. Two clusters merge only when no model
/// appears in both. Every detection ends up in exactly one cluster, and
/// cluster ids ascend with each cluster's lowest detection id.
pub fn generate_clusters(
    models: &[String],
    detections: &[&Detection],
    edges: &[Edge],
    set_iou: f64,
) -> Vec<AgreementCluster> {
    let positions = model_positions(models);
    let model_idx: Vec<usize> = detections
        .iter()
        .map(|d| positions.get(d.model_id.as_str()).copied().unwrap_or(0))
        .collect();
    let slot: HashMap<DetectionId, usize> = detections
        .iter()
        .enumerate()
        .map(|(i, d)| (d.detection_id, i))
        .collect();

    let mut sets = DisjointSets::new(model_idx.iter().map(|&m| 1u64 << m).collect());
    for e in edges {
        if e.iou < set_iou {
            continue;
        }
        if let (Some(&a), Some(&b)) = (slot.get(&e.a), slot.get(&e.b)) {
            sets.union_disjoint(a, b);
        }
    }

    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..detections.len() {
        let root = sets.find(i);
        groups.entry(root).or_default().push(i);
    }
    let mut groups: Vec<(DetectionId, u64, Vec<usize>)> = groups
        .into_iter()
        .map(|(root, mut members)| {
            members.sort_by_key(|&i| (model_idx[i], detections[i].detection_id));
            let lowest = members
                .iter()
                .map(|&i| detections[i].detection_id)
                .min()
                .expect("non-empty group");
            (lowest, sets.mask[root], members)
        })
        .collect();
    groups.sort_by_key(|g| g.0);

    groups
        .into_iter()
        .enumerate()
        .map(|(n, (_, mask, members))| AgreementCluster {
            cluster_id: ClusterId(n as u32),
            image_id: detections[members[0]].image_id.clone(),
            members: members.iter().map(|&i| detections[i].detection_id).collect(),
            signature: Signature::from_mask(mask, models),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "tp")]
    TruePositive,
    #[serde(rename = "fp")]
    FalsePositive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStatus {
    pub cluster_id: ClusterId,
    pub status: Status,
    pub matched_gt: Option<GtId>,
    pub match_iou: Option<f64>,
}

/// Ground truth of one evaluation pass; each object can be claimed once.
struct GtClaims<'a> {
    by_image: HashMap<&'a str, Vec<usize>>,
    gt: &'a [GroundTruthObject],
    claimed: Vec<bool>,
}

impl<'a> GtClaims<'a> {
    fn new(gt: &'a [GroundTruthObject]) -> Self {
        let mut by_image: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, g) in gt.iter().enumerate() {
            by_image.entry(g.image_id.as_str()).or_default().push(i);
        }
        GtClaims {
            by_image,
            gt,
            claimed: vec![false; gt.len()],
        }
    }

    /// Claim the best-IOU unclaimed object on `image_id` if it reaches
    /// `eval_iou`. Ties go to the lower ground-truth id.
    fn claim(&mut self, image_id: &str, bbox: &BoundingBox, eval_iou: f64) -> Option<(GtId, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &i in self.by_image.get(image_id).map(Vec::as_slice).unwrap_or(&[]) {
            if self.claimed[i] {
                continue;
            }
            let v = iou(bbox, &self.gt[i].bbox);
            let better = match best {
                None => true,
                Some((j, bv)) => v > bv || (v == bv && self.gt[i].gt_id < self.gt[j].gt_id),
            };
            if better {
                best = Some((i, v));
            }
        }
        match best {
            Some((i, v)) if v >= eval_iou => {
                self.claimed[i] = true;
                Some((self.gt[i].gt_id, v))
            }
            _ => None,
        }
    }

    fn unclaimed(&self) -> usize {
        self.claimed.iter().filter(|c| !**c).count()
    }
}

fn status_of(claim: Option<(GtId, f64)>) -> (Status, Option<GtId>, Option<f64>) {
    match claim {
        Some((g, v)) => (Status::TruePositive, Some(g), Some(v)),
        None => (Status::FalsePositive, None, None),
    }
}

/// Representative member of a cluster: highest confidence, then lower model
/// index, then lower detection id.
pub fn representative<'a>(
    cluster: &AgreementCluster,
    lookup: &HashMap<DetectionId, &'a Detection>,
    models: &[String],
) -> &'a Detection {
    let positions = model_positions(models);
    representative_with(cluster, lookup, &positions)
}

fn representative_with<'a>(
    cluster: &AgreementCluster,
    lookup: &HashMap<DetectionId, &'a Detection>,
    positions: &HashMap<&str, usize>,
) -> &'a Detection {
    cluster
        .members
        .iter()
        .map(|id| lookup[id])
        .min_by(|x, y| {
            y.confidence
                .total_cmp(&x.confidence)
                .then_with(|| positions.get(x.model_id.as_str()).cmp(&positions.get(y.model_id.as_str())))
                .then(x.detection_id.cmp(&y.detection_id))
        })
        .expect("clusters are non-empty")
}

/// TP/FP status of every cluster, returned in the order of `clusters`.
///
/// Clusters are matched in descending order of their representative's
/// confidence; each ground-truth object validates at most one cluster.
pub fn evaluate_clusters(
    models: &[String],
    clusters: &[AgreementCluster],
    detections: &[&Detection],
    gt: &[GroundTruthObject],
    p: &EvalParams,
) -> Vec<ClusterStatus> {
    let positions = model_positions(models);
    let lookup: HashMap<DetectionId, &Detection> =
        detections.iter().map(|d| (d.detection_id, *d)).collect();
    let mut order: Vec<(usize, &Detection)> = clusters
        .iter()
        .enumerate()
        .map(|(i, c)| (i, representative_with(c, &lookup, &positions)))
        .collect();
    order.sort_by(|(ia, a), (ib, b)| {
        b.confidence
            .total_cmp(&a.confidence)
            .then_with(|| positions.get(a.model_id.as_str()).cmp(&positions.get(b.model_id.as_str())))
            .then(a.detection_id.cmp(&b.detection_id))
            .then(ia.cmp(ib))
    });

    let mut claims = GtClaims::new(gt);
    let mut out: Vec<Option<ClusterStatus>> = vec![None; clusters.len()];
    for (i, rep) in order {
        let (status, matched_gt, match_iou) =
            status_of(claims.claim(&rep.image_id, &rep.bbox, p.eval_iou));
        out[i] = Some(ClusterStatus {
            cluster_id: clusters[i].cluster_id,
            status,
            matched_gt,
            match_iou,
        });
    }
    out.into_iter().map(|s| s.expect("every cluster evaluated")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionStatus {
    pub detection_id: DetectionId,
    pub status: Status,
    pub matched_gt: Option<GtId>,
    pub match_iou: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEvaluation {
    pub model_id: String,
    /// In input order.
    pub statuses: Vec<DetectionStatus>,
    pub tp: usize,
    pub fp: usize,
    pub fn_count: usize,
}

/// Standard single-model matching: detections in descending confidence
/// claim at most one ground-truth object each. Detections of other models
/// are ignored.
pub fn evaluate_model(
    model_id: &str,
    detections: &[&Detection],
    gt: &[GroundTruthObject],
    eval_iou: f64,
) -> ModelEvaluation {
    let own: Vec<&Detection> = detections
        .iter()
        .copied()
        .filter(|d| d.model_id == model_id)
        .collect();
    let mut order: Vec<usize> = (0..own.len()).collect();
    order.sort_by(|&a, &b| {
        own[b]
            .confidence
            .total_cmp(&own[a].confidence)
            .then(own[a].detection_id.cmp(&own[b].detection_id))
    });
    let mut claims = GtClaims::new(gt);
    let mut statuses: Vec<Option<DetectionStatus>> = vec![None; own.len()];
    for i in order {
        let d = own[i];
        let (status, matched_gt, match_iou) =
            status_of(claims.claim(&d.image_id, &d.bbox, eval_iou));
        statuses[i] = Some(DetectionStatus {
            detection_id: d.detection_id,
            status,
            matched_gt,
            match_iou,
        });
    }
    let statuses: Vec<DetectionStatus> = statuses.into_iter().flatten().collect();
    let tp = statuses
        .iter()
        .filter(|s| s.status == Status::TruePositive)
        .count();
    ModelEvaluation {
        model_id: model_id.to_string(),
        fp: statuses.len() - tp,
        tp,
        fn_count: claims.unclaimed(),
        statuses,
    }
}
