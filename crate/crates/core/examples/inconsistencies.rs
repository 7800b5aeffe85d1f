//! Find item triples where projection neighbours disagree with the ranking.

use rankaxis::consistency::{classify_triple, enumerate_inconsistencies};
use rankaxis::data::{load_csv, CsvOptions};
use rankaxis::fixtures::synthetic_banks;
use rankaxis::projection::{project_dataset, ProjectionConfig};
use rankaxis::weights::{rank_all, WeightVector};

pub fn run_example() -> rankaxis::Result<()> {
    // A and B sit together in the projection; C is far from both yet scores
    // between them.
    let planted = load_csv("name,x,y\nA,0.05,1\nB,0.1,0.8\nC,1,0\nD,0,0\n".as_bytes(), CsvOptions::default())?;
    let weights = WeightVector::fixed(vec![1.0, 1.0]);
    let ranking = rank_all(&weights, &planted)?;
    let projection = project_dataset(&planted, &weights, &ProjectionConfig::pca(), None)?;
    for x in enumerate_inconsistencies(&planted, &ranking, &projection, 10, 0)? {
        println!("({}, {}; {}) via {}", x.i, x.j, x.k, x.verdict.witness.map_or("-", |w| w.as_str()));
    }

    let v = classify_triple(3.0, 1.0, 2.0, 5.0, 5.0, 1.0);
    println!("f = (3, 1, 2), g = (5, 5, 1): {:?}", v.verdict);

    let (dataset, hidden) = synthetic_banks(80, 6, 5)?;
    let weights = WeightVector::fixed(hidden);
    let ranking = rank_all(&weights, &dataset)?;
    let projection = project_dataset(&dataset, &weights, &ProjectionConfig::pca(), None)?;
    let report = enumerate_inconsistencies(&dataset, &ranking, &projection, 5, 1)?;
    println!("top {} of a sampled scan over 80 items:", report.len());
    for x in &report {
        println!("  ({}, {}; {}) severity {:.4}", x.i, x.j, x.k, x.severity);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rankaxis::Result<()> {
    run_example()
}
