//! Two-dimensional projections of the weighted, normalized data.
//!
//! PCA is exact and deterministic. t-SNE is the exact O(N²) variant driven by
//! a seeded ChaCha generator, so a seed plus parameters pins the layout.

use std::collections::HashMap;
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{attribute_contributions, Dataset, ItemId};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::weights::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    #[default]
    Tsne,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pca" => Ok(Method::Pca),
            "tsne" | "t-sne" => Ok(Method::Tsne),
            other => Err(Error::InvalidParameter(format!("unknown projection method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self { perplexity: 15.0, iterations: 1000, learning_rate: 200.0 }
    }
}

/// Iterations run with exaggerated affinities and low momentum.
const EARLY_PHASE: usize = 250;
const EXAGGERATION: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    pub method: Method,
    pub seed: u64,
    pub tsne: TsneParams,
}

impl ProjectionConfig {
    pub fn pca() -> Self {
        Self { method: Method::Pca, ..Self::default() }
    }

    pub fn tsne(seed: u64) -> Self {
        Self { method: Method::Tsne, seed, tsne: TsneParams::default() }
    }

    pub fn validate(&self, items: usize) -> Result<()> {
        if items < 3 {
            return Err(Error::InvalidParameter(format!("projection needs at least 3 items, got {items}")));
        }
        if self.method == Method::Tsne {
            let t = &self.tsne;
            if !(t.perplexity > 0.0 && t.perplexity < items as f64) {
                return Err(Error::InvalidParameter(format!(
                    "perplexity must be in (0, {items}), got {}",
                    t.perplexity
                )));
            }
            if t.iterations < EARLY_PHASE {
                return Err(Error::InvalidParameter(format!(
                    "t-SNE needs at least {EARLY_PHASE} iterations, got {}",
                    t.iterations
                )));
            }
            if !(t.learning_rate > 0.0 && t.learning_rate.is_finite()) {
                return Err(Error::InvalidParameter("learning rate must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Cooperative cancellation flag, checked once per optimizer iteration.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedItem {
    pub id: ItemId,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub coords: Vec<ProjectedItem>,
    pub config: ProjectionConfig,
    pub weights_fingerprint: String,
    /// Set when every input row was identical and all points sit at the origin.
    pub degenerate: bool,
}

impl Projection {
    pub fn point(&self, index: usize) -> Point {
        let c = &self.coords[index];
        Point::new(c.x, c.y)
    }

    pub fn points(&self) -> Vec<Point> {
        self.coords.iter().map(|c| Point::new(c.x, c.y)).collect()
    }

    pub fn index(&self) -> HashMap<&ItemId, usize> {
        self.coords.iter().enumerate().map(|(i, c)| (&c.id, i)).collect()
    }

    pub fn point_of(&self, id: &ItemId) -> Result<Point> {
        self.coords
            .iter()
            .find(|c| &c.id == id)
            .map(|c| Point::new(c.x, c.y))
            .ok_or_else(|| Error::UnknownItem(id.clone()))
    }

    /// Euclidean distance between two items in the projection plane.
    pub fn distance(&self, a: &ItemId, b: &ItemId) -> Result<f64> {
        Ok(self.point_of(a)?.distance(self.point_of(b)?))
    }

    /// Hex digest of ids and coordinates.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for c in &self.coords {
            hasher.update(c.id.as_str().as_bytes());
            hasher.update([0u8]);
            hasher.update(c.x.to_bits().to_le_bytes());
            hasher.update(c.y.to_bits().to_le_bytes());
        }
        crate::hex_prefix(&hasher.finalize(), 16)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["id", "x", "y"])?;
        for c in &self.coords {
            out.write_record([c.id.to_string(), c.x.to_string(), c.y.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `w_j * normalized[i][j]`, the matrix that gets projected.
pub fn weighted_matrix(dataset: &Dataset, weights: &WeightVector) -> Result<Vec<Vec<f64>>> {
    attribute_contributions(dataset, &weights.values)
}

/// Raw 2-D layout of `matrix` rows. The flag is set for all-identical input.
pub fn project(
    matrix: &[Vec<f64>],
    config: &ProjectionConfig,
    cancel: Option<&CancelToken>,
) -> Result<(Vec<Point>, bool)> {
    config.validate(matrix.len())?;
    let degenerate = matrix.windows(2).all(|w| w[0] == w[1]);
    let points = match config.method {
        Method::Pca => pca(matrix),
        Method::Tsne => tsne(matrix, config.seed, &config.tsne, cancel)?,
    };
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter("projection produced non-finite coordinates".into()));
    }
    Ok((points, degenerate))
}

/// Projects the dataset under `weights` and tags the result with ids and the
/// weight fingerprint.
pub fn project_dataset(
    dataset: &Dataset,
    weights: &WeightVector,
    config: &ProjectionConfig,
    cancel: Option<&CancelToken>,
) -> Result<Projection> {
    let matrix = weighted_matrix(dataset, weights)?;
    let (points, degenerate) = project(&matrix, config, cancel)?;
    Ok(Projection {
        coords: dataset.ids().zip(points).map(|(id, p)| ProjectedItem { id: id.clone(), x: p.x, y: p.y }).collect(),
        config: *config,
        weights_fingerprint: weights.fingerprint(),
        degenerate,
    })
}

/// Scores on the top two principal components of the covariance matrix.
/// Each component is signed so its largest-magnitude loading is positive.
fn pca(matrix: &[Vec<f64>]) -> Vec<Point> {
    let n = matrix.len();
    let m = matrix[0].len();
    let means: Vec<f64> = (0..m).map(|j| matrix.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centered = DMatrix::from_fn(n, m, |i, j| matrix[i][j] - means[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let component = |k: usize| -> Option<Vec<f64>> {
        let col = eig.eigenvectors.column(*order.get(k)?);
        let mut v: Vec<f64> = col.iter().copied().collect();
        let lead = v.iter().enumerate().fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        Some(v)
    };
    let scores = |v: &Option<Vec<f64>>, i: usize| -> f64 {
        v.as_ref().map_or(0.0, |v| centered.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
    };
    let (first, second) = (component(0), component(1));
    (0..n).map(|i| Point::new(scores(&first, i), scores(&second, i))).collect()
}

fn squared_distances(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = matrix[i].iter().zip(&matrix[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Symmetric joint affinities with per-point bandwidths found by bisection
/// on the conditional entropy.
fn joint_affinities(distances: &[f64], n: usize, perplexity: f64) -> Vec<f64> {
    let target = perplexity.ln();
    let mut p = vec![0.0; n * n];
    let mut row = vec![0.0; n];
    for i in 0..n {
        let (mut beta, mut lo, mut hi) = (1.0f64, 0.0f64, f64::INFINITY);
        for _ in 0..200 {
            let d = &distances[i * n..(i + 1) * n];
            let min_d = d.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).fold(f64::INFINITY, f64::min);
            let mut sum = 0.0;
            for j in 0..n {
                row[j] = if j == i { 0.0 } else { (-(d[j] - min_d) * beta).exp() };
                sum += row[j];
            }
            let mut h = 0.0;
            for (j, p) in row.iter_mut().enumerate() {
                if j != i {
                    *p /= sum;
                    if *p > 0.0 {
                        h -= *p * p.ln();
                    }
                }
            }
            let diff = h - target;
            if diff.abs() < 1e-5 {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        p[i * n..(i + 1) * n].copy_from_slice(&row);
    }
    let mut joint = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            joint[i * n + j] = ((p[i * n + j] + p[j * n + i]) / (2.0 * n as f64)).max(1e-12);
        }
    }
    joint
}

fn tsne(matrix: &[Vec<f64>], seed: u64, params: &TsneParams, cancel: Option<&CancelToken>) -> Result<Vec<Point>> {
    let n = matrix.len();
    let p = joint_affinities(&squared_distances(matrix), n, params.perplexity);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)]).collect();
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0_f64; 2]; n];
    let mut num = vec![0.0; n * n];
    let mut grad = vec![[0.0; 2]; n];

    for iter in 0..params.iterations {
        if cancel.is_some_and(CancelToken::is_cancelled) {
            return Err(Error::Cancelled);
        }
        let (exaggeration, momentum) = if iter < EARLY_PHASE { (EXAGGERATION, 0.5) } else { (1.0, 0.8) };

        let mut total = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                let q = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = q;
                num[j * n + i] = q;
                total += 2.0 * q;
            }
        }
        for i in 0..n {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let q = num[i * n + j];
                let coeff = 4.0 * (exaggeration * p[i * n + j] - (q / total).max(1e-12)) * q;
                g[0] += coeff * (y[i][0] - y[j][0]);
                g[1] += coeff * (y[i][1] - y[j][1]);
            }
            grad[i] = g;
        }
        for i in 0..n {
            for d in 0..2 {
                let gain = &mut gains[i][d];
                *gain = if (grad[i][d] > 0.0) != (update[i][d] > 0.0) { *gain + 0.2 } else { (*gain * 0.8).max(0.01) };
                update[i][d] = momentum * update[i][d] - params.learning_rate * *gain * grad[i][d];
                y[i][d] += update[i][d];
            }
        }
        let mean = y.iter().fold([0.0; 2], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        for p in y.iter_mut() {
            p[0] -= mean[0] / n as f64;
            p[1] -= mean[1] / n as f64;
        }
    }
    Ok(y.into_iter().map(|[a, b]| Point::new(a, b)).collect())
}
