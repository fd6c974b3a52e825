//! Agreement groups for non-detection models: classification labels,
//! regression values and clustering assignments.
//!
//! Groups are emitted per item: for a fixed item the groups' signatures
//! partition the models.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::{Signature, Status};

#[derive(Debug, Error)]
pub enum GenericError {
    #[error("criterion 2 violated: model {model:?} has no prediction for item {item:?}")]
    Incomplete { model: String, item: String },
    #[error("model {model:?} predicts item {item:?} more than once")]
    Duplicate { model: String, item: String },
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("value for model {model:?} is not finite")]
    NonFinite { model: String },
    #[error("{0} values given for {1} models")]
    LengthMismatch(usize, usize),
    #[error("clusterings cover different items (e.g. {0:?})")]
    ItemMismatch(String),
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = GenericError> = std::result::Result<T, E>;

/// Complete model × item prediction matrix. Models and items are sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionTable<T> {
    pub models: Vec<String>,
    pub items: Vec<String>,
    /// `values[item][model]`
    pub values: Vec<Vec<T>>,
}

impl<T: Clone> PredictionTable<T> {
    /// Assemble `(model_id, item_id, value)` records, requiring exactly one
    /// prediction per model and item.
    pub fn from_records(records: impl IntoIterator<Item = (String, String, T)>) -> Result<Self> {
        let mut cells: BTreeMap<(String, String), T> = BTreeMap::new();
        let mut models = BTreeSet::new();
        let mut items = BTreeSet::new();
        for (model, item, value) in records {
            models.insert(model.clone());
            items.insert(item.clone());
            if cells.insert((model.clone(), item.clone()), value).is_some() {
                return Err(GenericError::Duplicate { model, item });
            }
        }
        let models: Vec<String> = models.into_iter().collect();
        let items: Vec<String> = items.into_iter().collect();
        let mut values = Vec::with_capacity(items.len());
        for item in &items {
            let mut row = Vec::with_capacity(models.len());
            for model in &models {
                let v = cells
                    .remove(&(model.clone(), item.clone()))
                    .ok_or_else(|| GenericError::Incomplete {
                        model: model.clone(),
                        item: item.clone(),
                    })?;
                row.push(v);
            }
            values.push(row);
        }
        Ok(PredictionTable {
            models,
            items,
            values,
        })
    }
}

#[derive(Deserialize)]
struct CsvRecord {
    model_id: String,
    item_id: String,
    value: String,
}

/// Read a `model_id,item_id,value` CSV file.
pub fn read_predictions_csv<T>(path: impl AsRef<Path>) -> Result<PredictionTable<T>>
where
    T: FromStr + Clone,
    T::Err: std::fmt::Display,
{
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let mut records = Vec::new();
    for row in reader.deserialize::<CsvRecord>() {
        let row = row?;
        let value = row.value.trim().parse::<T>().map_err(|e| GenericError::Parse {
            path: path.display().to_string(),
            line: records.len() as u64 + 2,
            message: e.to_string(),
        })?;
        records.push((row.model_id, row.item_id, value));
    }
    PredictionTable::from_records(records)
}

/// Read an `item_id,label` ground-truth CSV file.
pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    #[derive(Deserialize)]
    struct Row {
        item_id: String,
        label: String,
    }
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = BTreeMap::new();
    for row in reader.deserialize::<Row>() {
        let row = row?;
        out.insert(row.item_id, row.label);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Consensus {
    Label { label: String },
    Value { mean: f64, min: f64, max: f64 },
    Cluster { label: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementGroup {
    pub item_id: String,
    pub signature: Signature,
    pub consensus: Consensus,
    pub correctness: Option<Status>,
}

/// Partition the models of each item by identical label. With ground truth,
/// a group is TP iff its label is the item's true label.
pub fn match_classification(
    preds: &PredictionTable<String>,
    gt: Option<&BTreeMap<String, String>>,
) -> Vec<AgreementGroup> {
    let mut out = Vec::new();
    for (item, row) in preds.items.iter().zip(&preds.values) {
        // blocks in order of their first model
        let mut blocks: Vec<(&str, Vec<&str>)> = Vec::new();
        for (model, label) in preds.models.iter().zip(row) {
            match blocks.iter_mut().find(|(l, _)| *l == label.as_str()) {
                Some((_, ms)) => ms.push(model),
                None => blocks.push((label, vec![model])),
            }
        }
        let truth = gt.and_then(|g| g.get(item));
        for (label, ms) in blocks {
            out.push(AgreementGroup {
                item_id: item.clone(),
                signature: Signature::new(&ms, &preds.models),
                consensus: Consensus::Label {
                    label: label.to_string(),
                },
                correctness: truth.map(|t| {
                    if t == label {
                        Status::TruePositive
                    } else {
                        Status::FalsePositive
                    }
                }),
            });
        }
    }
    out
}

/// Chain-link one item's regression predictions: after sorting, neighbours
/// at most `epsilon` apart share a group. `values[i]` belongs to `models[i]`.
pub fn match_regression(
    item_id: &str,
    models: &[String],
    values: &[f64],
    epsilon: f64,
) -> Result<Vec<AgreementGroup>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(GenericError::InvalidEpsilon(epsilon));
    }
    if models.len() != values.len() {
        return Err(GenericError::LengthMismatch(values.len(), models.len()));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(GenericError::NonFinite {
            model: models[i].clone(),
        });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let mut chains: Vec<Vec<usize>> = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        let linked = k > 0 && values[i] - values[order[k - 1]] <= epsilon;
        match chains.last_mut() {
            Some(chain) if linked => chain.push(i),
            _ => chains.push(vec![i]),
        }
    }

    Ok(chains
        .into_iter()
        .map(|chain| {
            let vals: Vec<f64> = chain.iter().map(|&i| values[i]).collect();
            let names: Vec<&str> = chain.iter().map(|&i| models[i].as_str()).collect();
            AgreementGroup {
                item_id: item_id.to_string(),
                signature: Signature::new(&names, models),
                consensus: Consensus::Value {
                    mean: vals.iter().sum::<f64>() / vals.len() as f64,
                    min: vals[0],
                    max: vals[vals.len() - 1],
                },
                correctness: None,
            }
        })
        .collect())
}

pub fn match_regression_table(preds: &PredictionTable<f64>, epsilon: f64) -> Result<Vec<AgreementGroup>> {
    let mut out = Vec::new();
    for (item, row) in preds.items.iter().zip(&preds.values) {
        out.extend(match_regression(item, &preds.models, row, epsilon)?);
    }
    Ok(out)
}

/// One model's cluster label per item.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub model_id: String,
    pub labels: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Alignment {
    /// Label of the first clustering → matched label of the second. Only
    /// pairs that share at least one item are listed.
    pub mapping: BTreeMap<String, String>,
    /// Items sorted by id; agreeing items get one two-model group, the
    /// others one group per model.
    pub groups: Vec<AgreementGroup>,
}

impl Alignment {
    /// Items whose labels coincide under the mapping.
    pub fn agreeing_items(&self) -> BTreeSet<&str> {
        self.groups
            .iter()
            .filter(|g| g.signature.len() == 2)
            .map(|g| g.item_id.as_str())
            .collect()
    }
}

/// Co-occurrence counts: `counts[i][j]` items labelled `rows[i]` by the
/// first clustering and `cols[j]` by the second.
#[derive(Clone, Debug, PartialEq)]
pub struct Contingency {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl Contingency {
    pub fn new(a: &Clustering, b: &Clustering) -> Result<Self> {
        if let Some(item) = a
            .labels
            .keys()
            .find(|k| !b.labels.contains_key(*k))
            .or_else(|| b.labels.keys().find(|k| !a.labels.contains_key(*k)))
        {
            return Err(GenericError::ItemMismatch(item.clone()));
        }
        let rows: Vec<String> = a.labels.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let cols: Vec<String> = b.labels.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
        for (item, la) in &a.labels {
            let i = rows.binary_search(la).expect("row label");
            let j = cols.binary_search(&b.labels[item]).expect("col label");
            counts[i][j] += 1;
        }
        Ok(Contingency { rows, cols, counts })
    }
}

/// Maximum-weight one-to-one assignment of rows to columns (Hungarian
/// method on negated weights). Returns the column of each row, `None` for
/// rows left over when there are more rows than columns.
pub fn max_weight_assignment(weights: &[Vec<i64>]) -> Vec<Option<usize>> {
    let n = weights.len();
    let m = weights.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return vec![None; n];
    }
    if n > m {
        let transposed: Vec<Vec<i64>> = (0..m).map(|j| (0..n).map(|i| weights[i][j]).collect()).collect();
        let cols = max_weight_assignment(&transposed);
        let mut out = vec![None; n];
        for (j, i) in cols.into_iter().enumerate() {
            if let Some(i) = i {
                out[i] = Some(j);
            }
        }
        return out;
    }

    // 1-indexed potentials; column 0 is a sentinel.
    let cost = |i: usize, j: usize| -weights[i - 1][j - 1];
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
        }
    }
    out
}

/// Align two clusterings of the same items by the assignment of labels that
/// maximizes total co-occurrence. Among equally good assignments, pairing
/// identically named labels is preferred.
pub fn align_clusterings(a: &Clustering, b: &Clustering) -> Result<Alignment> {
    let table = Contingency::new(a, b)?;
    let scale = table.rows.len().min(table.cols.len()) as i64 + 1;
    let weights: Vec<Vec<i64>> = table
        .counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &c)| c as i64 * scale + i64::from(table.rows[i] == table.cols[j]))
                .collect()
        })
        .collect();
    let assignment = max_weight_assignment(&weights);
    let mapping: BTreeMap<String, String> = assignment
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .filter(|&(i, j)| table.counts[i][j] > 0)
        .map(|(i, j)| (table.rows[i].clone(), table.cols[j].clone()))
        .collect();

    let models = [a.model_id.clone(), b.model_id.clone()];
    let mut groups = Vec::new();
    for (item, la) in &a.labels {
        let lb = &b.labels[item];
        if mapping.get(la) == Some(lb) {
            groups.push(AgreementGroup {
                item_id: item.clone(),
                signature: Signature::new(&models, &models),
                consensus: Consensus::Cluster { label: la.clone() },
                correctness: None,
            });
        } else {
            for (model, label) in [(&a.model_id, la), (&b.model_id, lb)] {
                groups.push(AgreementGroup {
                    item_id: item.clone(),
                    signature: Signature::new(&[model], &models),
                    consensus: Consensus::Cluster {
                        label: label.clone(),
                    },
                    correctness: None,
                });
            }
        }
    }
    Ok(Alignment { mapping, groups })
}
