//! Set-based model similarity and per-model precision/recall.
//!
//! The element universe for similarity is the agreement clusters at the
//! current evaluation criteria: a model "contains" a cluster when one of its
//! detections is a member.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Engine;
use crate::matcher::{evaluate_model, AgreementCluster, ClusterId, EvalParams};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("scores require ground truth")]
    NoGroundTruth,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// |A ∩ B| / |A ∪ B|. Two empty sets are identical, so the result is 1.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let common = a.intersection(b).count();
    let union = a.len() + b.len() - common;
    ratio(common as f64, union as f64)
}

/// Tversky index of `x` relative to `y`:
/// |X∩Y| / (|X∩Y| + α|X−Y| + β|Y−X|), with 0/0 taken as 1.
pub fn tversky<T: Ord>(x: &BTreeSet<T>, y: &BTreeSet<T>, alpha: f64, beta: f64) -> f64 {
    let common = x.intersection(y).count() as f64;
    let only_x = x.len() as f64 - common;
    let only_y = y.len() as f64 - common;
    ratio(common, common + alpha * only_x + beta * only_y)
}

/// Share of `contained`'s elements also present in `container`
/// (Tversky with α = 1, β = 0). 1 means every element is matched.
pub fn tversky_containment<T: Ord>(contained: &BTreeSet<T>, container: &BTreeSet<T>) -> f64 {
    tversky(contained, container, 1.0, 0.0)
}

/// For each model (in `models` order), the clusters it takes part in.
pub fn memberships(models: &[String], clusters: &[AgreementCluster]) -> Vec<BTreeSet<ClusterId>> {
    models
        .iter()
        .map(|m| {
            clusters
                .iter()
                .filter(|c| c.signature.contains(m))
                .map(|c| c.cluster_id)
                .collect()
        })
        .collect()
}

/// Square matrix over models in canonical order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub models: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    fn pairwise(models: &[String], sets: &[BTreeSet<ClusterId>], f: impl Fn(&BTreeSet<ClusterId>, &BTreeSet<ClusterId>) -> f64) -> Self {
        let values = sets
            .iter()
            .map(|a| sets.iter().map(|b| f(a, b)).collect())
            .collect();
        SimilarityMatrix {
            models: models.to_vec(),
            values,
        }
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.models.iter().position(|m| m == a)?;
        let j = self.models.iter().position(|m| m == b)?;
        Some(self.values[i][j])
    }
}

pub fn jaccard_matrix_of(models: &[String], clusters: &[AgreementCluster]) -> SimilarityMatrix {
    SimilarityMatrix::pairwise(models, &memberships(models, clusters), jaccard)
}

/// `values[i][j]` is the containment of model i in model j.
pub fn containment_matrix_of(models: &[String], clusters: &[AgreementCluster]) -> SimilarityMatrix {
    SimilarityMatrix::pairwise(models, &memberships(models, clusters), tversky_containment)
}

pub fn jaccard_matrix(engine: &Engine, p: &EvalParams) -> SimilarityMatrix {
    jaccard_matrix_of(engine.models(), &engine.evaluate(p).clusters)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model_id: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
    pub precision: f64,
    pub recall: f64,
}

impl ModelScore {
    pub fn new(model_id: &str, tp: usize, fp: usize, fn_count: usize) -> Self {
        let div = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        ModelScore {
            model_id: model_id.to_string(),
            tp,
            fp,
            fn_count,
            precision: div(tp, tp + fp),
            recall: div(tp, tp + fn_count),
        }
    }
}

/// Precision and recall of every model against ground truth, on detections
/// inside the confidence range.
pub fn model_scores(engine: &Engine, p: &EvalParams) -> Result<Vec<ModelScore>, MetricsError> {
    let dataset = engine.dataset();
    if dataset.ground_truth.is_empty() {
        return Err(MetricsError::NoGroundTruth);
    }
    let surviving = engine.surviving(p);
    Ok(dataset
        .models
        .iter()
        .map(|m| {
            let e = evaluate_model(m, &surviving, &dataset.ground_truth, p.eval_iou);
            ModelScore::new(m, e.tp, e.fp, e.fn_count)
        })
        .collect())
}

/// Everything the `metrics` command and endpoint report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub params: EvalParams,
    pub models: Vec<String>,
    /// Absent when the artifact carries no ground truth.
    pub scores: Option<Vec<ModelScore>>,
    pub jaccard: SimilarityMatrix,
    pub containment: SimilarityMatrix,
}

pub fn metrics_report(engine: &Engine, p: &EvalParams) -> MetricsReport {
    let clusters = engine.evaluate(p).clusters;
    let models = engine.models();
    MetricsReport {
        params: *p,
        models: models.to_vec(),
        scores: model_scores(engine, p).ok(),
        jaccard: jaccard_matrix_of(models, &clusters),
        containment: containment_matrix_of(models, &clusters),
    }
}

impl MetricsReport {
    /// Plain-text rendering: score table then the Jaccard matrix.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        match &self.scores {
            Some(scores) => {
                out.push_str("model\ttp\tfp\tfn\tprecision\trecall\n");
                for s in scores {
                    out.push_str(&format!(
                        "{}\t{}\t{}\t{}\t{:.4}\t{:.4}\n",
                        s.model_id, s.tp, s.fp, s.fn_count, s.precision, s.recall
                    ));
                }
            }
            None => out.push_str("no ground truth: scores unavailable\n"),
        }
        out.push_str("\njaccard");
        for m in &self.models {
            out.push('\t');
            out.push_str(m);
        }
        out.push('\n');
        for (m, row) in self.models.iter().zip(&self.jaccard.values) {
            out.push_str(m);
            for v in row {
                out.push_str(&format!("\t{v:.4}"));
            }
            out.push('\n');
        }
        out
    }
}
