//! Triple-wise consistency between rank scores and projection distances.
//!
//! For items `i`, `j` that sit closer to each other than either does to a
//! third item `k`, the pair forms a cluster. If `k`'s score falls strictly
//! between the scores of `i` and `j`, the projection groups items that the
//! ranking separates: an inconsistency. If `k` scores strictly above or below
//! both, the two views agree.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ItemId};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::projection::Projection;
use crate::weights::Ranking;

/// Item counts up to this size are scanned exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 60;

/// Number of sampled triples for larger inputs; matches the exhaustive
/// triple count at the limit.
pub const SAMPLED_TRIPLES: usize = EXHAUSTIVE_LIMIT * (EXHAUSTIVE_LIMIT - 1) / 2 * (EXHAUSTIVE_LIMIT - 2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    First,
    Second,
    None,
}

/// `First` iff `f_i > f_j`; equal scores express no preference.
pub fn preference(f_i: f64, f_j: f64) -> Preference {
    if f_i > f_j {
        Preference::First
    } else if f_j > f_i {
        Preference::Second
    } else {
        Preference::None
    }
}

/// True when `i` and `j` are closer to each other than either is to `k`.
pub fn cluster_gate(g_ik: f64, g_jk: f64, g_ij: f64) -> bool {
    g_ik.min(g_jk) > g_ij
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Inconsistent,
    Consistent,
    /// The gate holds but `f_k` ties with `f_i` or `f_j`.
    Tie,
    GateFailed,
}

/// The strict score relation that decided a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// `f_i > f_k > f_j`
    BetweenDescending,
    /// `f_i < f_k < f_j`
    BetweenAscending,
    /// `min(f_i, f_j) > f_k`
    BelowBoth,
    /// `max(f_i, f_j) < f_k`
    AboveBoth,
}

impl Witness {
    pub fn as_str(self) -> &'static str {
        match self {
            Witness::BetweenDescending => "between_descending",
            Witness::BetweenAscending => "between_ascending",
            Witness::BelowBoth => "below_both",
            Witness::AboveBoth => "above_both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleVerdict {
    pub gate_holds: bool,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

pub fn classify_triple(f_i: f64, f_j: f64, f_k: f64, g_ik: f64, g_jk: f64, g_ij: f64) -> TripleVerdict {
    if !cluster_gate(g_ik, g_jk, g_ij) {
        return TripleVerdict { gate_holds: false, verdict: Verdict::GateFailed, witness: None };
    }
    let (verdict, witness) = if f_i > f_k && f_k > f_j {
        (Verdict::Inconsistent, Some(Witness::BetweenDescending))
    } else if f_i < f_k && f_k < f_j {
        (Verdict::Inconsistent, Some(Witness::BetweenAscending))
    } else if f_i.min(f_j) > f_k {
        (Verdict::Consistent, Some(Witness::BelowBoth))
    } else if f_i.max(f_j) < f_k {
        (Verdict::Consistent, Some(Witness::AboveBoth))
    } else {
        (Verdict::Tie, None)
    };
    TripleVerdict { gate_holds: true, verdict, witness }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inconsistency {
    pub i: ItemId,
    pub j: ItemId,
    pub k: ItemId,
    pub verdict: TripleVerdict,
    /// `|f_k - (f_i + f_j) / 2|`
    pub severity: f64,
}

/// Index-level triple `(i, j, k)` with `i < j` and `k` distinct from both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

/// Classifies one triple over parallel score and point slices.
pub fn evaluate_triple(scores: &[f64], points: &[Point], t: Triple) -> TripleVerdict {
    let (pi, pj, pk) = (points[t.i], points[t.j], points[t.k]);
    classify_triple(scores[t.i], scores[t.j], scores[t.k], pi.distance(pk), pj.distance(pk), pi.distance(pj))
}

fn severity(scores: &[f64], t: Triple) -> f64 {
    (scores[t.k] - (scores[t.i] + scores[t.j]) / 2.0).abs()
}

/// Triples to scan: all of them up to [`EXHAUSTIVE_LIMIT`] items, otherwise
/// [`SAMPLED_TRIPLES`] distinct triples drawn uniformly with `seed`.
pub fn candidate_triples(n: usize, seed: u64) -> Vec<Triple> {
    if n < 3 {
        return Vec::new();
    }
    if n <= EXHAUSTIVE_LIMIT {
        let mut out = Vec::with_capacity(n * (n - 1) / 2 * (n - 2));
        for i in 0..n {
            for j in i + 1..n {
                for k in (0..n).filter(|&k| k != i && k != j) {
                    out.push(Triple { i, j, k });
                }
            }
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::with_capacity(SAMPLED_TRIPLES);
    let mut out = Vec::with_capacity(SAMPLED_TRIPLES);
    while out.len() < SAMPLED_TRIPLES {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let k = rng.random_range(0..n);
        if a == b || k == a || k == b {
            continue;
        }
        let t = Triple { i: a.min(b), j: a.max(b), k };
        if seen.insert(t) {
            out.push(t);
        }
    }
    out.sort_unstable();
    out
}

/// Inconsistent triples sorted by descending severity (ties by triple
/// index order), at most `budget` of them.
pub fn find_inconsistencies(
    scores: &[f64],
    points: &[Point],
    budget: usize,
    seed: u64,
) -> Vec<(Triple, TripleVerdict, f64)> {
    let triples = candidate_triples(scores.len(), seed);
    let mut found: Vec<(Triple, TripleVerdict, f64)> = triples
        .par_chunks(4096)
        .flat_map_iter(|chunk| {
            chunk.iter().filter_map(|&t| {
                let v = evaluate_triple(scores, points, t);
                (v.verdict == Verdict::Inconsistent).then(|| (t, v, severity(scores, t)))
            })
        })
        .collect();
    found.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
    found.truncate(budget);
    found
}

/// Scans the current ranking against a projection of the same dataset.
pub fn enumerate_inconsistencies(
    dataset: &Dataset,
    ranking: &Ranking,
    projection: &Projection,
    budget: usize,
    seed: u64,
) -> Result<Vec<Inconsistency>> {
    let scores = ranking.scores_in_dataset_order(dataset)?;
    if projection.coords.len() != dataset.len()
        || projection.coords.iter().zip(dataset.ids()).any(|(c, id)| &c.id != id)
    {
        return Err(Error::DatasetMismatch);
    }
    let points = projection.points();
    let ids: Vec<&ItemId> = dataset.ids().collect();
    Ok(find_inconsistencies(&scores, &points, budget, seed)
        .into_iter()
        .map(|(t, verdict, severity)| Inconsistency {
            i: ids[t.i].clone(),
            j: ids[t.j].clone(),
            k: ids[t.k].clone(),
            verdict,
            severity,
        })
        .collect())
}

/// Writes `i,j,k,verdict,witness_equation,severity`.
pub fn write_inconsistencies_csv<W: Write>(report: &[Inconsistency], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["i", "j", "k", "verdict", "witness_equation", "severity"])?;
    for r in report {
        let verdict = match r.verdict.verdict {
            Verdict::Inconsistent => "inconsistent",
            Verdict::Consistent => "consistent",
            Verdict::Tie => "tie",
            Verdict::GateFailed => "gate_failed",
        };
        out.write_record([
            r.i.as_str(),
            r.j.as_str(),
            r.k.as_str(),
            verdict,
            r.verdict.witness.map_or("", Witness::as_str),
            &r.severity.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
