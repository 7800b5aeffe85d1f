//! Saved ranking schemes, cross-scheme comparison and attribute similarity.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ItemId};
use crate::error::{Error, Result};
use crate::projection::ProjectionConfig;
use crate::rating::{RatingAssignment, RatingPartition};
use crate::weights::{RankedItem, Ranking, WeightVector};

/// Guard added to the distance in [`attribute_similarity`].
pub const SIMILARITY_EPSILON: f64 = 1e-9;

/// Number of recent schemes shown side by side as comparative projections.
pub const COMPARATIVE_PROJECTIONS: usize = 3;

/// Immutable snapshot of one ranking scheme. Per-item vectors follow the
/// dataset's item order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingScheme {
    pub name: String,
    pub created_at: DateTime<Utc>,
    pub dataset_fingerprint: String,
    pub item_ids: Vec<ItemId>,
    pub weights: WeightVector,
    pub scores: Vec<f64>,
    pub ranks: Vec<u32>,
    pub split_points: Vec<f64>,
    pub ratings: Vec<u32>,
    pub projection_config: ProjectionConfig,
}

/// What a session holds when the user presses "save".
#[derive(Debug, Clone, Copy)]
pub struct SchemeInputs<'a> {
    pub dataset: &'a Dataset,
    pub weights: Option<&'a WeightVector>,
    pub ranking: Option<&'a Ranking>,
    pub partition: Option<&'a RatingPartition>,
    pub projection_config: ProjectionConfig,
}

impl RankingScheme {
    pub fn snapshot(name: &str, inputs: SchemeInputs<'_>, created_at: DateTime<Utc>) -> Result<Self> {
        let weights = inputs.weights.ok_or(Error::NothingToSave("no weights"))?;
        let ranking = inputs.ranking.ok_or(Error::NothingToSave("no ranking"))?;
        let partition = inputs.partition.ok_or(Error::NothingToSave("no rating partition"))?;
        let dataset = inputs.dataset;
        let ratings_by_id = partition.lookup();
        let ratings = dataset
            .ids()
            .map(|id| ratings_by_id.get(id).copied().ok_or_else(|| Error::UnknownItem(id.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.to_owned(),
            created_at,
            dataset_fingerprint: dataset.fingerprint(),
            item_ids: dataset.ids().cloned().collect(),
            weights: weights.clone(),
            scores: ranking.scores_in_dataset_order(dataset)?,
            ranks: ranking.ranks_in_dataset_order(dataset)?,
            split_points: partition.split_points.clone(),
            ratings,
            projection_config: inputs.projection_config,
        })
    }

    pub fn ranking(&self) -> Ranking {
        Ranking::from_scores(self.item_ids.iter().cloned().zip(self.scores.iter().copied()))
    }

    pub fn ranked_items(&self) -> Vec<RankedItem> {
        let mut out: Vec<RankedItem> = self
            .item_ids
            .iter()
            .zip(&self.scores)
            .zip(&self.ranks)
            .map(|((id, &score), &rank)| RankedItem { id: id.clone(), score, rank })
            .collect();
        out.sort_by_key(|e| e.rank);
        out
    }

    pub fn partition(&self) -> RatingPartition {
        RatingPartition {
            n_ratings: self.split_points.len() as u32 + 1,
            split_points: self.split_points.clone(),
            ratings: self
                .item_ids
                .iter()
                .zip(&self.ratings)
                .map(|(id, &rating)| RatingAssignment { id: id.clone(), rating })
                .collect(),
        }
    }
}

/// Append-only collection of schemes, optionally mirrored to a directory
/// with one JSON file per scheme.
#[derive(Debug, Default)]
pub struct SchemeStore {
    dir: Option<PathBuf>,
    schemes: Vec<Arc<RankingScheme>>,
}

impl SchemeStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a scheme directory and loads its files in
    /// save order.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        files.sort();
        let schemes =
            files.iter().map(|p| Ok(Arc::new(serde_json::from_slice(&fs::read(p)?)?))).collect::<Result<Vec<_>>>()?;
        Ok(Self { dir: Some(dir), schemes })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn list(&self) -> &[Arc<RankingScheme>] {
        &self.schemes
    }

    pub fn get(&self, name: &str) -> Result<Arc<RankingScheme>> {
        self.schemes.iter().find(|s| s.name == name).cloned().ok_or_else(|| Error::UnknownScheme(name.to_owned()))
    }

    /// Up to `n` most recent schemes, oldest first.
    pub fn latest(&self, n: usize) -> &[Arc<RankingScheme>] {
        &self.schemes[self.schemes.len().saturating_sub(n)..]
    }

    /// `name`, or `name-2`, `name-3`, ... when taken.
    pub fn unique_name(&self, name: &str) -> String {
        let taken = |n: &str| self.schemes.iter().any(|s| s.name == n);
        if !taken(name) {
            return name.to_owned();
        }
        (2..).map(|i| format!("{name}-{i}")).find(|n| !taken(n)).expect("unbounded suffix search")
    }

    /// Snapshots the inputs under a unique name and appends it.
    pub fn save(&mut self, name: &str, inputs: SchemeInputs<'_>) -> Result<Arc<RankingScheme>> {
        self.save_at(name, inputs, Utc::now())
    }

    pub fn save_at(
        &mut self,
        name: &str,
        inputs: SchemeInputs<'_>,
        created_at: DateTime<Utc>,
    ) -> Result<Arc<RankingScheme>> {
        let name = if name.trim().is_empty() { "scheme" } else { name.trim() };
        let scheme = RankingScheme::snapshot(&self.unique_name(name), inputs, created_at)?;
        if let Some(dir) = &self.dir {
            let file = dir.join(format!("{:04}-{}.json", self.schemes.len() + 1, file_stem(&scheme.name)));
            let mut f = fs::OpenOptions::new().write(true).create_new(true).open(file)?;
            f.write_all(&serde_json::to_vec_pretty(&scheme)?)?;
        }
        let scheme = Arc::new(scheme);
        self.schemes.push(scheme.clone());
        Ok(scheme)
    }
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrow {
    Up,
    Down,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub id: ItemId,
    pub rank_a: u32,
    pub rank_b: u32,
    /// `rank_a - rank_b`: positive when the item moved up in `b`.
    pub delta: i64,
    pub arrow: Arrow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeComparison {
    pub a: String,
    pub b: String,
    pub rows: Vec<ComparisonRow>,
}

pub fn rank_change(rank_a: u32, rank_b: u32) -> (i64, Arrow) {
    let delta = i64::from(rank_a) - i64::from(rank_b);
    let arrow = match delta.signum() {
        1 => Arrow::Up,
        -1 => Arrow::Down,
        _ => Arrow::Flat,
    };
    (delta, arrow)
}

pub fn compare_schemes(a: &RankingScheme, b: &RankingScheme) -> Result<SchemeComparison> {
    if a.dataset_fingerprint != b.dataset_fingerprint || a.item_ids != b.item_ids {
        return Err(Error::DatasetMismatch);
    }
    let rows = a
        .item_ids
        .iter()
        .zip(a.ranks.iter().zip(&b.ranks))
        .map(|(id, (&ra, &rb))| {
            let (delta, arrow) = rank_change(ra, rb);
            ComparisonRow { id: id.clone(), rank_a: ra, rank_b: rb, delta, arrow }
        })
        .collect();
    Ok(SchemeComparison { a: a.name.clone(), b: b.name.clone(), rows })
}

impl SchemeComparison {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["id", "rank_a", "rank_b", "delta", "arrow"])?;
        for r in &self.rows {
            let arrow = match r.arrow {
                Arrow::Up => "up",
                Arrow::Down => "down",
                Arrow::Flat => "flat",
            };
            out.write_record([
                r.id.to_string(),
                r.rank_a.to_string(),
                r.rank_b.to_string(),
                r.delta.to_string(),
                arrow.to_owned(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `1 / (ε + ‖a − b‖)` over normalized attribute rows.
pub fn attribute_similarity(dataset: &Dataset, a: &ItemId, b: &ItemId) -> Result<f64> {
    let (ra, rb) = (dataset.row(a)?, dataset.row(b)?);
    Ok(similarity(ra, rb))
}

fn similarity(a: &[f64], b: &[f64]) -> f64 {
    let dist = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    1.0 / (SIMILARITY_EPSILON + dist)
}

/// The selected item, then every other item by descending similarity to it
/// (ties by id).
pub fn align_order(dataset: &Dataset, selected: &ItemId) -> Result<Vec<ItemId>> {
    let base = dataset.row(selected)?;
    let mut others: Vec<(f64, &ItemId)> = dataset
        .items()
        .iter()
        .zip(dataset.normalized())
        .filter(|(item, _)| &item.id != selected)
        .map(|(item, row)| (similarity(base, row), &item.id))
        .collect();
    others.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(std::iter::once(selected.clone()).chain(others.into_iter().map(|(_, id)| id.clone())).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDiff {
    pub id: ItemId,
    /// `other − selected` per attribute; positive renders blue, negative
    /// orange-red.
    pub diffs: Vec<f64>,
}

pub fn attribute_diff_coloring(dataset: &Dataset, selected: &ItemId) -> Result<Vec<AttributeDiff>> {
    let base = dataset.row(selected)?;
    Ok(dataset
        .items()
        .iter()
        .zip(dataset.normalized())
        .map(|(item, row)| AttributeDiff {
            id: item.id.clone(),
            diffs: row.iter().zip(base).map(|(o, s)| o - s).collect(),
        })
        .collect())
}
