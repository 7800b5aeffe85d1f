//! Save two ranking schemes to disk, compare them and inspect one item's
//! neighbours by attribute similarity.

use rankaxis::data::ItemId;
use rankaxis::fixtures::synthetic_banks;
use rankaxis::projection::ProjectionConfig;
use rankaxis::rating::discretize;
use rankaxis::schemes::{align_order, attribute_diff_coloring, compare_schemes, Arrow, SchemeInputs, SchemeStore};
use rankaxis::weights::{derive_constraints, rank_all, train_ranking_svm, MarkedRanking, SvmConfig, WeightVector};

pub fn run_example() -> rankaxis::Result<()> {
    let (dataset, hidden) = synthetic_banks(40, 5, 6)?;
    let dir = std::env::temp_dir().join(format!("rankaxis-schemes-{}", std::process::id()));
    let mut store = SchemeStore::open(&dir)?;

    let base = WeightVector::fixed(hidden);
    let ranking = rank_all(&base, &dataset)?;
    let partition = discretize(&ranking, 5)?;
    let inputs = |w, r, p| SchemeInputs {
        dataset: &dataset,
        weights: Some(w),
        ranking: Some(r),
        partition: Some(p),
        projection_config: ProjectionConfig::pca(),
    };
    let a = store.save("baseline", inputs(&base, &ranking, &partition))?;

    // The analyst promotes six mid-table rows in reverse order.
    let mut marked: Vec<ItemId> = ranking.ids().skip(15).take(6).cloned().collect();
    marked.reverse();
    let constraints = derive_constraints(&MarkedRanking::new(marked, &dataset)?, &dataset)?;
    let w = train_ranking_svm(&constraints, &SvmConfig::default())?;
    let r = rank_all(&w, &dataset)?;
    let p = discretize(&r, 5)?;
    let b = store.save("baseline", inputs(&w, &r, &p))?;
    println!("saved {:?} and {:?} under {}", a.name, b.name, dir.display());

    let reopened = SchemeStore::open(&dir)?;
    println!("{} schemes on disk", reopened.list().len());

    let cmp = compare_schemes(&a, &b)?;
    for row in cmp.rows.iter().filter(|r| r.arrow != Arrow::Flat).take(8) {
        let arrow = if row.arrow == Arrow::Up { "up" } else { "down" };
        println!("{:<10} {:>2} -> {:>2}  {:+} {arrow}", row.id, row.rank_a, row.rank_b, row.delta);
    }

    let selected = &dataset.items()[0].id;
    let aligned = align_order(&dataset, selected)?;
    println!("most similar to {selected}: {}", aligned[1..4].iter().map(ItemId::as_str).collect::<Vec<_>>().join(", "));
    let diffs = attribute_diff_coloring(&dataset, selected)?;
    let neighbour = diffs.iter().find(|d| d.id == aligned[1]).expect("aligned ids come from the dataset");
    println!(
        "{} minus {selected}: {:?}",
        neighbour.id,
        neighbour.diffs.iter().map(|d| (d * 100.0).round() / 100.0).collect::<Vec<_>>()
    );

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> rankaxis::Result<()> {
    run_example()
}
