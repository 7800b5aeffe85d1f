//! Lay out the weighted data in 2-D with PCA and t-SNE.

use rankaxis::fixtures::synthetic_banks;
use rankaxis::projection::{project_dataset, ProjectionConfig, TsneParams};
use rankaxis::weights::WeightVector;

pub fn run_example() -> rankaxis::Result<()> {
    let (dataset, hidden) = synthetic_banks(40, 5, 4)?;
    let weights = WeightVector::fixed(hidden);

    let pca = project_dataset(&dataset, &weights, &ProjectionConfig::pca(), None)?;
    let tsne_config = ProjectionConfig {
        tsne: TsneParams { iterations: 500, ..TsneParams::default() },
        ..ProjectionConfig::tsne(42)
    };
    let tsne = project_dataset(&dataset, &weights, &tsne_config, None)?;

    for (name, p) in [("pca", &pca), ("t-sne", &tsne)] {
        println!("{name} (weights {}):", p.weights_fingerprint);
        for c in p.coords.iter().take(4) {
            println!("  {:<10} ({:>8.4}, {:>8.4})", c.id, c.x, c.y);
        }
        let (a, b) = (&p.coords[0].id, &p.coords[1].id);
        println!("  distance {a} - {b}: {:.4}", p.distance(a, b)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> rankaxis::Result<()> {
    run_example()
}
