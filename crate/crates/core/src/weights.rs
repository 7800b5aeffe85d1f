//! Attribute-weight inference from re-ranking interactions.
//!
//! A re-ranked window of items becomes all ordered pairs of difference
//! vectors, each labelled by which item the user put first. A linear
//! soft-margin Ranking SVM over those differences yields the weight vector;
//! rank scores are dot products of the weights with normalized rows.

use std::collections::{HashMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::data::{AttributeSchema, Dataset, ItemId};
use crate::error::{Error, Result};

/// Minimum number of marked rows needed to train.
pub const MIN_MARKED: usize = 6;

/// One training instance for the Ranking SVM.
///
/// `diff` is the normalized row of `first` minus the normalized row of
/// `second`; `label` is `+1` when `first` was ranked above `second`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseConstraint {
    pub first: ItemId,
    pub second: ItemId,
    pub diff: Vec<f64>,
    pub label: i8,
}

/// The user's adjusted order over the marked rows, best first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedRanking {
    ids: Vec<ItemId>,
}

impl MarkedRanking {
    pub fn new(ids: Vec<ItemId>, dataset: &Dataset) -> Result<Self> {
        Self::with_minimum(ids, dataset, MIN_MARKED)
    }

    /// Same checks as [`MarkedRanking::new`] with a custom minimum length.
    pub fn with_minimum(ids: Vec<ItemId>, dataset: &Dataset, minimum: usize) -> Result<Self> {
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            dataset.index_of(id)?;
            if !seen.insert(id) {
                return Err(Error::DuplicateMarked(id.clone()));
            }
        }
        if ids.len() < minimum {
            return Err(Error::InsufficientTrainingData { required: minimum, got: ids.len() });
        }
        Ok(Self { ids })
    }

    pub fn ids(&self) -> &[ItemId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Applies a drag of the row at `from` to position `to` in `order` and
/// returns the new table order together with the marked window: `k` rows of
/// the new order around the drop position, clamped to the table bounds.
pub fn drag_window(order: &[ItemId], from: usize, to: usize, k: usize) -> Result<(Vec<ItemId>, Vec<ItemId>)> {
    if from >= order.len() || to >= order.len() {
        return Err(Error::InvalidParameter(format!("drag positions must be below {}", order.len())));
    }
    let mut reordered = order.to_vec();
    let moved = reordered.remove(from);
    reordered.insert(to, moved);
    let k = k.min(reordered.len());
    let start = to.saturating_sub(k / 2).min(reordered.len() - k);
    let window = reordered[start..start + k].to_vec();
    Ok((reordered, window))
}

/// All ordered pairs of the marked rows: `k * (k - 1)` constraints.
pub fn derive_constraints(marked: &MarkedRanking, dataset: &Dataset) -> Result<Vec<PairwiseConstraint>> {
    let rows = marked.ids().iter().map(|id| dataset.row(id)).collect::<Result<Vec<_>>>()?;
    let k = rows.len();
    let mut out = Vec::with_capacity(k * k.saturating_sub(1));
    for (i, (a_id, a)) in marked.ids().iter().zip(&rows).enumerate() {
        for (j, (b_id, b)) in marked.ids().iter().zip(&rows).enumerate() {
            if i == j {
                continue;
            }
            out.push(PairwiseConstraint {
                first: a_id.clone(),
                second: b_id.clone(),
                diff: a.iter().zip(b.iter()).map(|(x, y)| x - y).collect(),
                label: if i < j { 1 } else { -1 },
            });
        }
    }
    Ok(out)
}

/// Reads a constraint file with `preferred_id,other_id` columns. Every row
/// contributes the labelled pair in both directions.
pub fn read_constraint_csv<R: Read>(source: R, dataset: &Dataset) -> Result<Vec<PairwiseConstraint>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            row: 1,
            column: 1,
            message: format!("missing column '{name}'"),
        })
    };
    let (pi, oi) = (col("preferred_id")?, col("other_id")?);
    let mut out = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| {
            rec.get(i).map(ItemId::from).ok_or_else(|| Error::Parse {
                row: n + 2,
                column: i + 1,
                message: "missing field".into(),
            })
        };
        let (p, o) = (field(pi)?, field(oi)?);
        if p == o {
            return Err(Error::Parse {
                row: n + 2,
                column: oi + 1,
                message: format!("item '{p}' cannot be preferred over itself"),
            });
        }
        let (rp, ro) = (dataset.row(&p)?, dataset.row(&o)?);
        let diff: Vec<f64> = rp.iter().zip(ro).map(|(x, y)| x - y).collect();
        let neg = diff.iter().map(|v| -v).collect();
        out.push(PairwiseConstraint { first: p.clone(), second: o.clone(), diff, label: 1 });
        out.push(PairwiseConstraint { first: o, second: p, diff: neg, label: -1 });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("constraint file has no rows"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Soft-margin penalty `C`.
    pub regularization: f64,
    /// Maximum number of full passes over the constraints.
    pub max_iterations: usize,
    /// Stop once every projected dual gradient is below this in magnitude.
    pub tolerance: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { regularization: 1.0, max_iterations: 10_000, tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub regularization: f64,
    pub iterations: usize,
    pub converged: bool,
    pub constraint_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingMeta>,
}

impl WeightVector {
    /// Untrained weights, e.g. the equal weighting a session starts from.
    pub fn fixed(values: Vec<f64>) -> Self {
        Self { values, training: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for v in &self.values {
            hasher.update(v.to_bits().to_le_bytes());
        }
        crate::hex_prefix(&hasher.finalize(), 16)
    }

    /// `{attribute name -> weight}` in schema order.
    pub fn to_named(&self, schema: &AttributeSchema) -> serde_json::Map<String, serde_json::Value> {
        schema.names().zip(&self.values).map(|(n, w)| (n.to_owned(), serde_json::Value::from(*w))).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trains a linear Ranking SVM on difference vectors.
///
/// Minimizes `½‖w‖² + C·Σ max(0, 1 − y·(w·diff))` by dual coordinate descent
/// in a fixed cyclic order starting from `w = 0`, so identical inputs give
/// bit-identical weights. Contradictory constraints only cost hinge loss.
pub fn train_ranking_svm(constraints: &[PairwiseConstraint], config: &SvmConfig) -> Result<WeightVector> {
    if constraints.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "training needs at least 2 constraints, got {}",
            constraints.len()
        )));
    }
    let c = config.regularization;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("regularization must be positive, got {c}")));
    }
    let dim = constraints[0].diff.len();
    if let Some(bad) = constraints.iter().find(|t| t.diff.len() != dim) {
        return Err(Error::LengthMismatch { expected: dim, got: bad.diff.len() });
    }
    if let Some(bad) = constraints.iter().find(|t| t.label != 1 && t.label != -1) {
        return Err(Error::InvalidParameter(format!("class label {} is not ±1", bad.label)));
    }

    let norms: Vec<f64> = constraints.iter().map(|t| dot(&t.diff, &t.diff)).collect();
    if norms.iter().all(|&q| q == 0.0) {
        return Err(Error::DegenerateTrainingSet);
    }

    let mut alpha = vec![0.0; constraints.len()];
    let mut w = vec![0.0; dim];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        iterations += 1;
        let mut worst = 0.0f64;
        for ((t, &q), a) in constraints.iter().zip(&norms).zip(alpha.iter_mut()) {
            if q == 0.0 {
                continue;
            }
            let y = f64::from(t.label);
            let grad = y * dot(&w, &t.diff) - 1.0;
            let projected = if *a <= 0.0 {
                grad.min(0.0)
            } else if *a >= c {
                grad.max(0.0)
            } else {
                grad
            };
            worst = worst.max(projected.abs());
            if projected != 0.0 {
                let old = *a;
                *a = (old - grad / q).clamp(0.0, c);
                let step = (*a - old) * y;
                for (wj, dj) in w.iter_mut().zip(&t.diff) {
                    *wj += step * dj;
                }
            }
        }
        if worst < config.tolerance {
            converged = true;
            break;
        }
    }

    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("training diverged".into()));
    }
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSolution);
    }
    Ok(WeightVector {
        values: w,
        training: Some(TrainingMeta { regularization: c, iterations, converged, constraint_count: constraints.len() }),
    })
}

/// `w · row`.
pub fn rank_score(weights: &[f64], row: &[f64]) -> f64 {
    weights.iter().zip(row).map(|(w, x)| w * x).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub id: ItemId,
    pub score: f64,
    pub rank: u32,
}

/// Items in rank order, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ranking {
    entries: Vec<RankedItem>,
}

impl Ranking {
    /// Sorts by descending score, ties by ascending id, and assigns ranks
    /// `1..=N`.
    pub fn from_scores(scored: impl IntoIterator<Item = (ItemId, f64)>) -> Self {
        let mut entries: Vec<RankedItem> =
            scored.into_iter().map(|(id, score)| RankedItem { id, score, rank: 0 }).collect();
        entries.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        for (i, e) in entries.iter_mut().enumerate() {
            e.rank = i as u32 + 1;
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[RankedItem] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &ItemId> {
        self.entries.iter().map(|e| &e.id)
    }

    pub fn lookup(&self) -> HashMap<&ItemId, &RankedItem> {
        self.entries.iter().map(|e| (&e.id, e)).collect()
    }

    /// Scores re-ordered to match the dataset's item order.
    pub fn scores_in_dataset_order(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        let by_id = self.lookup();
        dataset.ids().map(|id| by_id.get(id).map(|e| e.score).ok_or_else(|| Error::UnknownItem(id.clone()))).collect()
    }

    /// Ranks re-ordered to match the dataset's item order.
    pub fn ranks_in_dataset_order(&self, dataset: &Dataset) -> Result<Vec<u32>> {
        let by_id = self.lookup();
        dataset.ids().map(|id| by_id.get(id).map(|e| e.rank).ok_or_else(|| Error::UnknownItem(id.clone()))).collect()
    }
}

pub fn rank_all(weights: &WeightVector, dataset: &Dataset) -> Result<Ranking> {
    if weights.len() != dataset.attribute_count() {
        return Err(Error::LengthMismatch { expected: dataset.attribute_count(), got: weights.len() });
    }
    Ok(Ranking::from_scores(
        dataset.ids().cloned().zip(dataset.normalized().iter().map(|row| rank_score(&weights.values, row))),
    ))
}
