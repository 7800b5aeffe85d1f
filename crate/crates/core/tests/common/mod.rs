//! Fixtures and independent oracles shared by the integration tests and the
//! acceptance gate.
#![allow(dead_code)]

pub mod api;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankaxis::data::{load_csv, AttributeSchema, CsvOptions, DataItem, Dataset};
use rankaxis::geometry::Point;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dataset_from_rows(rows: &[(&str, Vec<f64>)]) -> Dataset {
    let m = rows[0].1.len();
    let names: Vec<String> = (1..=m).map(|j| format!("a{j}")).collect();
    let schema = AttributeSchema::from_names(&names).unwrap();
    let items = rows.iter().map(|(id, v)| DataItem::new(*id, *id, v.clone())).collect();
    Dataset::new(schema, items).unwrap()
}

pub fn random_dataset(r: &mut impl Rng, n: usize, m: usize) -> Dataset {
    let rows: Vec<(String, Vec<f64>)> =
        (0..n).map(|i| (format!("item-{i:03}"), (0..m).map(|_| r.random_range(0.0..1.0)).collect())).collect();
    let refs: Vec<(&str, Vec<f64>)> = rows.iter().map(|(id, v)| (id.as_str(), v.clone())).collect();
    dataset_from_rows(&refs)
}

/// Four items in the unit square whose normalized values equal their raw
/// values. With equal weights the score is `x + y` and PCA is an isometry,
/// so the only gate-passing contradiction is `(A, B; C)`: A and B sit close
/// together while C, far from both, scores between them.
pub const PLANTED_CSV: &str = "name,x,y\nA,0.05,1\nB,0.1,0.8\nC,1,0\nD,0,0\n";

pub fn planted_dataset() -> Dataset {
    load_csv(PLANTED_CSV.as_bytes(), CsvOptions::default()).unwrap()
}

/// Sizes of the seven rating clusters in the case-study fixture.
pub const CASE_STUDY_SIZES: [usize; 7] = [4, 7, 6, 6, 6, 6, 5];

/// Forty items on one attribute, in seven tight score clusters at
/// `1, 5/6, ..., 0`, so that seven ratings cover ranks 1-4, 5-11, 12-17 and
/// so on.
pub fn case_study_csv() -> String {
    let offsets: [f64; 7] = [0.0, -0.001, 0.001, -0.002, 0.002, -0.0015, 0.0015];
    let mut out = String::from("name,score\n");
    let mut n = 0;
    for (r, &size) in CASE_STUDY_SIZES.iter().enumerate() {
        let centre = 1.0 - r as f64 / 6.0;
        for o in &offsets[..size] {
            let o = match r {
                0 => -o.abs(),
                6 => o.abs(),
                _ => *o,
            };
            n += 1;
            out.push_str(&format!("bank-{n:02},{}\n", centre + o));
        }
    }
    out
}

pub fn case_study_dataset() -> Dataset {
    load_csv(case_study_csv().as_bytes(), CsvOptions::default()).unwrap()
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Independent dot product, summed in reverse order.
pub fn dot_oracle(w: &[f64], row: &[f64]) -> f64 {
    w.iter().zip(row).rev().fold(0.0, |acc, (a, b)| acc + a * b)
}

/// Shannon entropy (nats) of the value multiset, counted through a map.
fn multiset_entropy(values: &[f64]) -> f64 {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v.to_bits()).or_default() += 1;
    }
    let n = values.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Partition entropy of `scores` cut at `thresholds`: the size-weighted sum
/// of each part's entropy.
fn partition_entropy(scores: &[f64], thresholds: &[f64]) -> f64 {
    let mut parts: Vec<Vec<f64>> = vec![Vec::new(); thresholds.len() + 1];
    for &s in scores {
        let idx = thresholds.iter().filter(|&&t| s > t).count();
        parts[idx].push(s);
    }
    let n = scores.len() as f64;
    parts.iter().filter(|p| !p.is_empty()).map(|p| p.len() as f64 / n * multiset_entropy(p)).sum()
}

/// Brute-force greedy split search: every step tries every unused midpoint
/// between neighbouring distinct values, re-evaluates the whole partition
/// from scratch and keeps the first candidate that beats the incumbent by
/// more than the tie tolerance. `None` when there are too few distinct
/// values.
pub fn greedy_split_oracle(scores: &[f64], n_ratings: usize) -> Option<Vec<f64>> {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < n_ratings {
        return None;
    }
    let candidates: Vec<f64> = distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect();
    let mut chosen: Vec<f64> = Vec::new();
    for _ in 1..n_ratings {
        let mut best: Option<(f64, f64)> = None;
        for &c in &candidates {
            if chosen.contains(&c) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(c);
            trial.sort_by(f64::total_cmp);
            let e = partition_entropy(scores, &trial);
            if best.is_none_or(|(_, be)| e < be - 1e-12) {
                best = Some((c, e));
            }
        }
        chosen.push(best?.0);
        chosen.sort_by(f64::total_cmp);
    }
    Some(chosen)
}

/// A polyline walked by arc length.
pub struct DensePolyline {
    pub vertices: Vec<Point>,
    pub cumulative: Vec<f64>,
}

impl DensePolyline {
    pub fn new(vertices: Vec<Point>) -> Self {
        let mut cumulative = vec![0.0];
        for w in vertices.windows(2) {
            let d = ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt();
            cumulative.push(cumulative.last().unwrap() + d);
        }
        Self { vertices, cumulative }
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn at(&self, arc: f64) -> Point {
        let arc = arc.clamp(0.0, self.length());
        let s = (1..self.cumulative.len()).find(|&i| arc <= self.cumulative[i]).unwrap_or(self.cumulative.len() - 1);
        let (a, b) = (self.vertices[s - 1], self.vertices[s]);
        let seg = self.cumulative[s] - self.cumulative[s - 1];
        let t = if seg > 0.0 { (arc - self.cumulative[s - 1]) / seg } else { 0.0 };
        Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
    }

    /// `(distance, arc)` of the closest of `samples + 1` evenly spaced points.
    pub fn nearest_sample(&self, p: Point, samples: usize) -> (f64, f64) {
        let len = self.length();
        let spacing = len / samples as f64;
        let mut best = (f64::INFINITY, 0.0);
        let mut s = 0usize;
        for seg in 1..self.cumulative.len() {
            let (a, b) = (self.vertices[seg - 1], self.vertices[seg]);
            let (start, end) = (self.cumulative[seg - 1], self.cumulative[seg]);
            let seg_len = end - start;
            if seg_len <= 0.0 {
                continue;
            }
            let (ux, uy) = ((b.x - a.x) / seg_len, (b.y - a.y) / seg_len);
            let (ox, oy) = (a.x - p.x, a.y - p.y);
            while s <= samples {
                let arc = (s as f64 * spacing).min(len);
                if arc > end && seg + 1 < self.cumulative.len() {
                    break;
                }
                let along = arc - start;
                let (dx, dy) = (ox + ux * along, oy + uy * along);
                let d2 = dx * dx + dy * dy;
                if d2 < best.0 {
                    best = (d2, arc);
                }
                s += 1;
            }
        }
        (best.0.sqrt(), best.1)
    }
}

/// Every inconsistent triple `(i < j, k)` by direct evaluation of the gate
/// and the strict between-ness conditions, with its severity, sorted by
/// descending severity and then by index.
pub fn triple_oracle(scores: &[f64], points: &[Point]) -> Vec<((usize, usize, usize), f64)> {
    let n = scores.len();
    let g = |a: usize, b: usize| ((points[a].x - points[b].x).powi(2) + (points[a].y - points[b].y).powi(2)).sqrt();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let gate = g(i, k).min(g(j, k)) > g(i, j);
                let (fi, fj, fk) = (scores[i], scores[j], scores[k]);
                let between = (fi > fk && fk > fj) || (fi < fk && fk < fj);
                if gate && between {
                    out.push(((i, j, k), (fk - (fi + fj) / 2.0).abs()));
                }
            }
        }
    }
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

/// Ranks by descending score with ties on ascending id, via a plain sort.
pub fn sort_oracle(scored: &[(String, f64)]) -> Vec<String> {
    let mut v = scored.to_vec();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    v.into_iter().map(|(id, _)| id).collect()
}

/// Two schemes over 40 items in which `guangzhou` moves from rank 16 to 26
/// and `dongguan` from 33 to 31.
pub fn scheme_pair() -> (rankaxis::schemes::RankingScheme, rankaxis::schemes::RankingScheme) {
    use rankaxis::rating::discretize;
    use rankaxis::schemes::{RankingScheme, SchemeInputs};
    use rankaxis::weights::{Ranking, WeightVector};

    let mut names: Vec<String> = (1..=38).map(|i| format!("bank-{i:02}")).collect();
    names.insert(15, "guangzhou".into());
    names.insert(32, "dongguan".into());
    let rows: Vec<(&str, Vec<f64>)> = names.iter().map(|n| (n.as_str(), vec![0.0])).collect();
    let ds = dataset_from_rows(&rows);
    let scheme = |order: &[String], name: &str| {
        let ranking = Ranking::from_scores(
            order.iter().enumerate().map(|(i, id)| (rankaxis::data::ItemId::new(id.clone()), (40 - i) as f64)),
        );
        let partition = discretize(&ranking, 5).unwrap();
        RankingScheme::snapshot(
            name,
            SchemeInputs {
                dataset: &ds,
                weights: Some(&WeightVector::fixed(vec![1.0])),
                ranking: Some(&ranking),
                partition: Some(&partition),
                projection_config: Default::default(),
            },
            Default::default(),
        )
        .unwrap()
    };
    let a = scheme(&names, "a");
    let mut order_b = names.clone();
    let g = order_b.remove(15);
    order_b.insert(25, g);
    let d = order_b.iter().position(|n| n == "dongguan").unwrap();
    let dg = order_b.remove(d);
    order_b.insert(30, dg);
    let b = scheme(&order_b, "b");
    (a, b)
}
