//! Exclusive-intersection bars, tri-state queries and image tags.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::ImageInfo;
use crate::matcher::{AgreementCluster, ClusterId, ClusterStatus, EvalParams, Signature, Status};

/// All clusters sharing one exact signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionBar {
    pub signature: Signature,
    pub tp_count: usize,
    pub fp_count: usize,
    pub cluster_ids: Vec<ClusterId>,
}

impl IntersectionBar {
    pub fn total(&self) -> usize {
        self.cluster_ids.len()
    }
}

/// Group clusters by exact signature. Bars come out largest first, ties in
/// lexicographic signature order; cluster ids inside a bar ascend.
pub fn aggregate(clusters: &[AgreementCluster], statuses: &[ClusterStatus]) -> Vec<IntersectionBar> {
    let status: HashMap<ClusterId, Status> =
        statuses.iter().map(|s| (s.cluster_id, s.status)).collect();
    let mut bars: BTreeMap<&Signature, IntersectionBar> = BTreeMap::new();
    for c in clusters {
        let bar = bars.entry(&c.signature).or_insert_with(|| IntersectionBar {
            signature: c.signature.clone(),
            tp_count: 0,
            fp_count: 0,
            cluster_ids: Vec::new(),
        });
        match status.get(&c.cluster_id) {
            Some(Status::TruePositive) => bar.tp_count += 1,
            _ => bar.fp_count += 1,
        }
        bar.cluster_ids.push(c.cluster_id);
    }
    let mut bars: Vec<IntersectionBar> = bars.into_values().collect();
    for b in &mut bars {
        b.cluster_ids.sort_unstable();
    }
    // stable sort keeps the BTreeMap's signature order among equal totals
    bars.sort_by_key(|b| std::cmp::Reverse(b.total()));
    bars
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    /// Model must be present (dark circle).
    Include,
    /// Model must be absent (white circle).
    Exclude,
    /// Either.
    Neutral,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatusFilter {
    #[default]
    All,
    Tp,
    Fp,
}

impl std::str::FromStr for StatusFilter {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, QueryError> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(StatusFilter::All),
            "tp" => Ok(StatusFilter::Tp),
            "fp" => Ok(StatusFilter::Fp),
            other => Err(QueryError::UnknownStatus(other.to_string())),
        }
    }
}

impl StatusFilter {
    pub fn admits(self, s: Status) -> bool {
        match self {
            StatusFilter::All => true,
            StatusFilter::Tp => s == Status::TruePositive,
            StatusFilter::Fp => s == Status::FalsePositive,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("model {0:?} given more than one state")]
    ConflictingState(String),
    #[error("no state for model {0:?}")]
    MissingState(String),
    #[error("unknown status filter {0:?} (expected all, tp or fp)")]
    UnknownStatus(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub states: BTreeMap<String, TriState>,
    pub status_filter: StatusFilter,
    pub params: EvalParams,
}

impl QuerySpec {
    /// Every model Neutral: matches all clusters.
    pub fn neutral(models: &[String], params: EvalParams) -> Self {
        QuerySpec {
            states: models.iter().map(|m| (m.clone(), TriState::Neutral)).collect(),
            status_filter: StatusFilter::All,
            params,
        }
    }

    /// Build a query from explicit lists; models in no list are Neutral.
    pub fn from_lists<S: AsRef<str>>(
        models: &[String],
        include: &[S],
        exclude: &[S],
        neutral: &[S],
        status_filter: StatusFilter,
        params: EvalParams,
    ) -> Result<Self, QueryError> {
        let mut explicit: BTreeMap<String, TriState> = BTreeMap::new();
        for (list, state) in [
            (include, TriState::Include),
            (exclude, TriState::Exclude),
            (neutral, TriState::Neutral),
        ] {
            for m in list {
                let m = m.as_ref();
                if !models.iter().any(|x| x == m) {
                    return Err(QueryError::UnknownModel(m.to_string()));
                }
                if explicit.insert(m.to_string(), state).is_some() {
                    return Err(QueryError::ConflictingState(m.to_string()));
                }
            }
        }
        let mut spec = QuerySpec::neutral(models, params);
        spec.states.extend(explicit);
        spec.status_filter = status_filter;
        Ok(spec)
    }

    pub fn validate(&self, models: &[String]) -> Result<(), QueryError> {
        if let Some(m) = self.states.keys().find(|m| !models.contains(m)) {
            return Err(QueryError::UnknownModel(m.clone()));
        }
        if let Some(m) = models.iter().find(|m| !self.states.contains_key(*m)) {
            return Err(QueryError::MissingState(m.clone()));
        }
        Ok(())
    }

    pub fn matches(&self, signature: &Signature) -> bool {
        self.states.iter().all(|(m, state)| match state {
            TriState::Include => signature.contains(m),
            TriState::Exclude => !signature.contains(m),
            TriState::Neutral => true,
        })
    }
}

/// Ids of clusters whose signature satisfies every Include/Exclude state
/// and whose status passes the filter, ascending.
pub fn query(spec: &QuerySpec, clusters: &[AgreementCluster], statuses: &[ClusterStatus]) -> Vec<ClusterId> {
    let status: HashMap<ClusterId, Status> =
        statuses.iter().map(|s| (s.cluster_id, s.status)).collect();
    let mut ids: Vec<ClusterId> = clusters
        .iter()
        .filter(|c| spec.matches(&c.signature))
        .filter(|c| {
            status
                .get(&c.cluster_id)
                .is_some_and(|s| spec.status_filter.admits(*s))
        })
        .map(|c| c.cluster_id)
        .collect();
    ids.sort_unstable();
    ids
}

#[derive(Debug, Error)]
pub enum TagError {
    #[error("tag name must not be empty")]
    EmptyName,
    #[error("unknown image_id {0:?}")]
    UnknownImage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: malformed tag document: {source}", path.display())]
    Malformed {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedImage {
    pub image_id: String,
    pub file: String,
}

/// Tag name to tagged images, both in sorted order.
pub type TagDocument = BTreeMap<String, Vec<TaggedImage>>;

/// Named image sets. The only mutable state of an explorer session.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TagStore {
    tags: BTreeMap<String, BTreeSet<String>>,
    dirty: bool,
}

impl TagStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tags(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.tags
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn mark_clean(&mut self) {
        self.dirty = false;
    }

    /// Add `image_ids` to `tag`. Either every id is known and all are added,
    /// or nothing changes.
    pub fn assign<S: AsRef<str>>(
        &mut self,
        tag: &str,
        image_ids: &[S],
        images: &BTreeMap<String, ImageInfo>,
    ) -> Result<(), TagError> {
        if tag.trim().is_empty() {
            return Err(TagError::EmptyName);
        }
        if let Some(bad) = image_ids.iter().find(|id| !images.contains_key(id.as_ref())) {
            return Err(TagError::UnknownImage(bad.as_ref().to_string()));
        }
        let set = self.tags.entry(tag.to_string()).or_default();
        for id in image_ids {
            if set.insert(id.as_ref().to_string()) {
                self.dirty = true;
            }
        }
        Ok(())
    }

    pub fn export_document(&self, images: &BTreeMap<String, ImageInfo>) -> TagDocument {
        self.tags
            .iter()
            .map(|(tag, ids)| {
                let entries = ids
                    .iter()
                    .map(|id| TaggedImage {
                        image_id: id.clone(),
                        file: images.get(id).map(|i| i.file.clone()).unwrap_or_default(),
                    })
                    .collect();
                (tag.clone(), entries)
            })
            .collect()
    }

    pub fn from_document(doc: &TagDocument) -> Self {
        TagStore {
            tags: doc
                .iter()
                .map(|(tag, entries)| {
                    (
                        tag.clone(),
                        entries.iter().map(|e| e.image_id.clone()).collect(),
                    )
                })
                .collect(),
            dirty: false,
        }
    }

    /// Write the tag document to `path` via a temporary file and a rename.
    pub fn export(&self, path: impl AsRef<Path>, images: &BTreeMap<String, ImageInfo>) -> Result<(), TagError> {
        let path = path.as_ref();
        let mut bytes =
            serde_json::to_vec_pretty(&self.export_document(images)).expect("tag document serializes");
        bytes.push(b'\n');
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        let io_err = |source| TagError::Io {
            path: path.to_path_buf(),
            source,
        };
        fs::write(&tmp, bytes).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TagError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| TagError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let doc: TagDocument = serde_json::from_slice(&bytes).map_err(|source| TagError::Malformed {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_document(&doc))
    }

    /// Load the sidecar if it exists, else start empty.
    pub fn load_or_default(path: impl AsRef<Path>) -> Result<Self, TagError> {
        if path.as_ref().exists() {
            Self::load(path)
        } else {
            Ok(Self::default())
        }
    }
}

/// Tags live beside the artifact so the artifact itself never changes.
pub fn sidecar_path(artifact: impl AsRef<Path>) -> PathBuf {
    let mut p = artifact.as_ref().as_os_str().to_owned();
    p.push(".tags.json");
    PathBuf::from(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DetectionId;

    fn models() -> Vec<String> {
        ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect()
    }

    fn cluster(id: u32, sig: &[&str]) -> AgreementCluster {
        AgreementCluster {
            cluster_id: ClusterId(id),
            image_id: "img".into(),
            members: (0..sig.len() as u32).map(|i| DetectionId(id * 10 + i)).collect(),
            signature: Signature::new(sig, &models()),
        }
    }

    fn status(id: u32, tp: bool) -> ClusterStatus {
        ClusterStatus {
            cluster_id: ClusterId(id),
            status: if tp { Status::TruePositive } else { Status::FalsePositive },
            matched_gt: None,
            match_iou: None,
        }
    }

    #[test]
    fn bars_group_by_exact_signature() {
        let clusters = vec![cluster(0, &["A", "B"]), cluster(1, &["A", "B"]), cluster(2, &["C"])];
        let statuses = vec![status(0, true), status(1, false), status(2, true)];
        let bars = aggregate(&clusters, &statuses);
        assert_eq!(bars.len(), 2);
        assert_eq!(bars[0].signature, Signature::new(&["A", "B"], &models()));
        assert_eq!((bars[0].tp_count, bars[0].fp_count), (1, 1));
        assert_eq!(bars[0].cluster_ids, vec![ClusterId(0), ClusterId(1)]);
        assert_eq!(bars[1].total(), 1);
    }

    #[test]
    fn full_agreement_is_single_bar() {
        let all = ["A", "B", "C", "D"];
        let clusters: Vec<_> = (0..5).map(|i| cluster(i, &all)).collect();
        let statuses: Vec<_> = (0..5).map(|i| status(i, true)).collect();
        let bars = aggregate(&clusters, &statuses);
        assert_eq!(bars.len(), 1);
        assert_eq!(bars[0].tp_count, 5);
    }

    #[test]
    fn mixed_fixture_tally() {
        // hand tally: {A,B}: tp 2 fp 1; {A}: tp 0 fp 2; {B,C}: tp 1 fp 0
        let clusters = vec![
            cluster(0, &["A", "B"]),
            cluster(1, &["A"]),
            cluster(2, &["A", "B"]),
            cluster(3, &["B", "C"]),
            cluster(4, &["A"]),
            cluster(5, &["A", "B"]),
        ];
        let statuses = vec![
            status(0, true),
            status(1, false),
            status(2, false),
            status(3, true),
            status(4, false),
            status(5, true),
        ];
        let bars = aggregate(&clusters, &statuses);
        let tally: Vec<(String, usize, usize)> = bars
            .iter()
            .map(|b| (b.signature.to_string(), b.tp_count, b.fp_count))
            .collect();
        assert_eq!(
            tally,
            vec![
                ("{A,B}".to_string(), 2, 1),
                ("{A}".to_string(), 0, 2),
                ("{B,C}".to_string(), 1, 0),
            ]
        );
    }

    #[test]
    fn tri_state_query() {
        let clusters = vec![
            cluster(0, &["A"]),
            cluster(1, &["A", "B"]),
            cluster(2, &["A", "C"]),
            cluster(3, &["B"]),
        ];
        let statuses: Vec<_> = (0..4).map(|i| status(i, i % 2 == 0)).collect();
        let p = EvalParams::default();
        let spec = QuerySpec::from_lists(&models(), &["A"], &["C"], &["B"], StatusFilter::All, p).unwrap();
        assert_eq!(query(&spec, &clusters, &statuses), vec![ClusterId(0), ClusterId(1)]);

        let spec = QuerySpec::from_lists::<&str>(&models(), &["A"], &[], &[], StatusFilter::All, p).unwrap();
        assert_eq!(query(&spec, &clusters, &statuses).len(), 3);

        let spec = QuerySpec::from_lists(&models(), &["A", "B"], &["C", "D"], &[], StatusFilter::All, p).unwrap();
        assert_eq!(query(&spec, &clusters, &statuses), vec![ClusterId(1)]);

        let tp = QuerySpec { status_filter: StatusFilter::Tp, ..QuerySpec::neutral(&models(), p) };
        assert_eq!(query(&tp, &clusters, &statuses), vec![ClusterId(0), ClusterId(2)]);
    }

    #[test]
    fn query_construction_errors() {
        let p = EvalParams::default();
        assert_eq!(
            QuerySpec::from_lists(&models(), &["Z"], &[], &[], StatusFilter::All, p).unwrap_err(),
            QueryError::UnknownModel("Z".into())
        );
        assert_eq!(
            QuerySpec::from_lists(&models(), &["A"], &["A"], &[], StatusFilter::All, p).unwrap_err(),
            QueryError::ConflictingState("A".into())
        );
        let mut spec = QuerySpec::neutral(&models(), p);
        spec.states.remove("B");
        assert_eq!(spec.validate(&models()), Err(QueryError::MissingState("B".into())));
        assert!("FP".parse::<StatusFilter>().is_ok());
        assert!("maybe".parse::<StatusFilter>().is_err());
    }

    fn images() -> BTreeMap<String, ImageInfo> {
        ["img1", "img2", "img3"]
            .iter()
            .map(|id| {
                (
                    id.to_string(),
                    ImageInfo {
                        file: format!("{id}.jpg"),
                        width: 10,
                        height: 10,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn tagging_is_idempotent_and_validated() {
        let mut store = TagStore::new();
        store.assign("Partial Detection", &["img1", "img2"], &images()).unwrap();
        assert!(store.is_dirty());
        store.mark_clean();
        store.assign("Partial Detection", &["img1"], &images()).unwrap();
        assert!(!store.is_dirty());
        assert_eq!(store.tags()["Partial Detection"].len(), 2);

        assert!(matches!(store.assign("", &["img1"], &images()), Err(TagError::EmptyName)));
        assert!(matches!(
            store.assign("x", &["img1", "nope"], &images()),
            Err(TagError::UnknownImage(id)) if id == "nope"
        ));
        assert!(!store.tags().contains_key("x"));
    }

    #[test]
    fn export_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tags.json");
        let mut store = TagStore::new();
        store.assign("Partial Detection", &["img2", "img1"], &images()).unwrap();
        store.assign("Missed", &["img3"], &images()).unwrap();
        store.export(&path, &images()).unwrap();
        let back = TagStore::load(&path).unwrap();
        assert_eq!(back.tags(), store.tags());
        let doc = back.export_document(&images());
        assert_eq!(doc["Partial Detection"][0].file, "img1.jpg");
        assert!(!dir.path().join("tags.json.tmp").exists());
    }

    #[test]
    fn sidecar_sits_next_to_artifact() {
        assert_eq!(sidecar_path("/x/car.artifact"), PathBuf::from("/x/car.artifact.tags.json"));
    }
}
