//! Split a ranking into ratings by greedy minimum-entropy discretization.

use rankaxis::fixtures::synthetic_banks;
use rankaxis::rating::{discretize, entropy, quantize_scores, ScoreDistribution};
use rankaxis::weights::{rank_all, WeightVector};

pub fn run_example() -> rankaxis::Result<()> {
    let (dataset, hidden) = synthetic_banks(60, 6, 8)?;
    let ranking = rank_all(&WeightVector::fixed(hidden), &dataset)?;
    let scores: Vec<f64> = ranking.entries().iter().map(|e| e.score).collect();

    for n in [2, 3, 5, 7] {
        let q = quantize_scores(&scores, n);
        let dist = ScoreDistribution::from_scores(&q.values())?;
        let partition = discretize(&ranking, n)?;
        let sizes: Vec<usize> = (1..=n as u32).map(|r| partition.count(r)).collect();
        println!(
            "n = {n}: {} grid values, entropy {:.3} nats, thresholds {:?}, sizes {sizes:?}",
            dist.values().len(),
            entropy(&dist),
            partition.split_points.iter().map(|t| (t * 1e4).round() / 1e4).collect::<Vec<_>>(),
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rankaxis::Result<()> {
    run_example()
}
