//! Learn attribute weights from a drag in the ranking table.
//!
//! Starts from an equal-weight ranking, drags one row up the table, marks
//! the rows around the drop position and trains a Ranking SVM on the
//! implied pairwise preferences.

use rankaxis::data::ItemId;
use rankaxis::fixtures::synthetic_banks;
use rankaxis::weights::{
    derive_constraints, drag_window, rank_all, train_ranking_svm, MarkedRanking, SvmConfig, WeightVector, MIN_MARKED,
};

pub fn run_example() -> rankaxis::Result<()> {
    let (dataset, _) = synthetic_banks(30, 5, 3)?;
    let start = rank_all(&WeightVector::fixed(vec![1.0; dataset.attribute_count()]), &dataset)?;
    let order: Vec<ItemId> = start.ids().cloned().collect();

    // Drag the row at position 20 up to position 4.
    let (_, window) = drag_window(&order, 20, 4, MIN_MARKED)?;
    println!("marked rows: {}", window.iter().map(ItemId::as_str).collect::<Vec<_>>().join(", "));

    let marked = MarkedRanking::new(window, &dataset)?;
    let constraints = derive_constraints(&marked, &dataset)?;
    println!("{} pairwise constraints", constraints.len());

    let weights = train_ranking_svm(&constraints, &SvmConfig::default())?;
    println!("weights: {}", serde_json::Value::Object(weights.to_named(dataset.schema())));
    if let Some(meta) = &weights.training {
        println!("converged: {} after {} epochs", meta.converged, meta.iterations);
    }

    let ranking = rank_all(&weights, &dataset)?;
    for e in ranking.entries().iter().take(8) {
        println!("{:>3}  {:<10} {:.4}", e.rank, e.id, e.score);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rankaxis::Result<()> {
    run_example()
}
