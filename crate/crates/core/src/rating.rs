//! Turning a ranked score list into `n` ordered ratings.
//!
//! Scores are first snapped to a grid of `1/(10n)` of their range so that
//! equal scores carry frequency information. Split points are then chosen
//! greedily: every boundary between consecutive distinct values is a
//! candidate, and the candidate whose split leaves the whole partition with
//! the lowest frequency-weighted entropy wins. The search repeats over the
//! refined partition until `n - 1` boundaries exist.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::ItemId;
use crate::error::{Error, Result};
use crate::weights::Ranking;

/// Grid points per rating used by [`quantize_scores`].
pub const GRID_PER_RATING: u32 = 10;

/// Candidates whose partition entropies differ by less than this are ties.
pub const ENTROPY_TIE_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_RATINGS: usize = 5;

/// Empirical distribution of a score list.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDistribution {
    sorted: Vec<f64>,
    values: Vec<f64>,
    counts: Vec<usize>,
}

impl ScoreDistribution {
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyInput("score distribution is empty"));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("scores must be finite".into()));
        }
        let mut sorted = scores.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut values: Vec<f64> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &s in &sorted {
            match values.last() {
                Some(&last) if last == s => *counts.last_mut().unwrap() += 1,
                _ => {
                    values.push(s);
                    counts.push(1);
                }
            }
        }
        Ok(Self { sorted, values, counts })
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Distinct values, ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.sorted.len() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Shannon entropy in nats.
pub fn entropy(distribution: &ScoreDistribution) -> f64 {
    block_entropy(distribution.counts())
}

fn block_entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Scores snapped to the grid `min + level * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedScores {
    pub min: f64,
    pub step: f64,
    pub levels: Vec<u32>,
}

impl QuantizedScores {
    pub fn values(&self) -> Vec<f64> {
        self.levels.iter().map(|&l| self.value(l)).collect()
    }

    pub fn value(&self, level: u32) -> f64 {
        self.min + f64::from(level) * self.step
    }
}

/// Snaps each score to the nearest multiple of `range / (10 n)` above the
/// minimum score. Half-way values round up.
pub fn quantize_scores(scores: &[f64], n_ratings: usize) -> QuantizedScores {
    let (min, max) = scores.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let range = max - min;
    if scores.is_empty() || range <= 0.0 || n_ratings == 0 {
        return QuantizedScores {
            min: if scores.is_empty() { 0.0 } else { min },
            step: 0.0,
            levels: vec![0; scores.len()],
        };
    }
    let cells = GRID_PER_RATING * n_ratings as u32;
    let step = range / f64::from(cells);
    let levels = scores.iter().map(|&s| (((s - min) / step).round() as u32).min(cells)).collect();
    QuantizedScores { min, step, levels }
}

/// Greedy minimum-entropy boundaries over the distinct values of `scores`.
///
/// Returns `n_ratings - 1` ascending thresholds, each the midpoint between
/// the two distinct values it separates.
pub fn find_split_points(scores: &[f64], n_ratings: usize) -> Result<Vec<f64>> {
    if n_ratings < 2 {
        return Err(Error::InvalidParameter(format!("n must be ≥ 2, got {n_ratings}")));
    }
    let dist = ScoreDistribution::from_scores(scores)?;
    if dist.values().len() < n_ratings {
        return Err(Error::CannotFormRatings { requested: n_ratings, distinct: dist.values().len() });
    }
    let boundaries = greedy_boundaries(dist.counts(), n_ratings - 1);
    let values = dist.values();
    Ok(boundaries.into_iter().map(|b| values[b - 1] + (values[b] - values[b - 1]) / 2.0).collect())
}

/// Boundary `b` separates distinct value `b - 1` from `b`. Returns the chosen
/// boundaries in ascending order.
fn greedy_boundaries(counts: &[usize], splits: usize) -> Vec<usize> {
    let total = counts.iter().sum::<usize>() as f64;
    // Cuts delimiting the current intervals, always including 0 and k.
    let mut cuts = vec![0, counts.len()];
    let weighted = |lo: usize, hi: usize| {
        let block = &counts[lo..hi];
        block.iter().sum::<usize>() as f64 / total * block_entropy(block)
    };
    for _ in 0..splits {
        let mut best: Option<(usize, f64)> = None;
        for b in 1..counts.len() {
            let pos = match cuts.binary_search(&b) {
                Ok(_) => continue,
                Err(pos) => pos,
            };
            let mut sum = 0.0;
            for w in cuts.windows(2).enumerate() {
                let (i, pair) = w;
                if i + 1 == pos {
                    sum += weighted(pair[0], b);
                    sum += weighted(b, pair[1]);
                } else {
                    sum += weighted(pair[0], pair[1]);
                }
            }
            match best {
                Some((_, e)) if sum >= e - ENTROPY_TIE_TOLERANCE => {}
                _ => best = Some((b, sum)),
            }
        }
        let (b, _) = best.expect("enough distinct values for every split");
        let pos = cuts.binary_search(&b).unwrap_err();
        cuts.insert(pos, b);
    }
    cuts[1..cuts.len() - 1].to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingAssignment {
    pub id: ItemId,
    pub rating: u32,
}

/// `n` ordered ratings over a score list. Rating 1 holds the best scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingPartition {
    pub n_ratings: u32,
    pub split_points: Vec<f64>,
    pub ratings: Vec<RatingAssignment>,
}

impl RatingPartition {
    pub fn lookup(&self) -> HashMap<&ItemId, u32> {
        self.ratings.iter().map(|a| (&a.id, a.rating)).collect()
    }

    pub fn rating_of(&self, id: &ItemId) -> Option<u32> {
        self.ratings.iter().find(|a| &a.id == id).map(|a| a.rating)
    }

    /// Ids holding `rating`, in partition order.
    pub fn members(&self, rating: u32) -> impl Iterator<Item = &ItemId> {
        self.ratings.iter().filter(move |a| a.rating == rating).map(|a| &a.id)
    }

    pub fn count(&self, rating: u32) -> usize {
        self.members(rating).count()
    }
}

/// Buckets scores against ascending thresholds. A score equal to a threshold
/// goes to the better rating.
pub fn assign_ratings(
    scored: impl IntoIterator<Item = (ItemId, f64)>,
    split_points: &[f64],
) -> Result<RatingPartition> {
    if split_points.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::InvalidParameter("split points must be strictly increasing".into()));
    }
    let n = split_points.len() + 1;
    let ratings = scored
        .into_iter()
        .map(|(id, score)| RatingAssignment {
            id,
            rating: 1 + split_points.iter().filter(|&&t| t > score).count() as u32,
        })
        .collect();
    Ok(RatingPartition { n_ratings: n as u32, split_points: split_points.to_vec(), ratings })
}

/// Quantizes the ranking's scores, finds `n - 1` split points and assigns
/// every item its rating. The assignment in the returned partition follows
/// the ranking order.
pub fn discretize(ranking: &Ranking, n_ratings: usize) -> Result<RatingPartition> {
    if n_ratings < 2 {
        return Err(Error::InvalidParameter(format!("n must be ≥ 2, got {n_ratings}")));
    }
    let scores: Vec<f64> = ranking.entries().iter().map(|e| e.score).collect();
    let quantized = quantize_scores(&scores, n_ratings);
    let values = quantized.values();
    let split_points = find_split_points(&values, n_ratings)?;
    assign_ratings(ranking.ids().cloned().zip(values), &split_points)
}

/// Writes `id,score,rank,rating` rows in rank order.
pub fn write_ratings_csv<W: Write>(ranking: &Ranking, partition: &RatingPartition, writer: W) -> Result<()> {
    let ratings = partition.lookup();
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["id", "score", "rank", "rating"])?;
    for e in ranking.entries() {
        let rating = ratings.get(&e.id).ok_or_else(|| Error::UnknownItem(e.id.clone()))?;
        out.write_record([e.id.to_string(), e.score.to_string(), e.rank.to_string(), rating.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
