//! Connect rating centroids into a rating line, unroll it into a projection
//! axis and read off each item's inverse ordinal.

use rankaxis::axis::{build_axis, rating_line, self_defined_rating_line, Consistency};
use rankaxis::fixtures::synthetic_banks;
use rankaxis::geometry::Point;
use rankaxis::projection::{project_dataset, ProjectionConfig};
use rankaxis::rating::discretize;
use rankaxis::weights::{rank_all, WeightVector};

pub fn run_example() -> rankaxis::Result<()> {
    let (dataset, hidden) = synthetic_banks(50, 5, 9)?;
    let weights = WeightVector::fixed(hidden);
    let ranking = rank_all(&weights, &dataset)?;
    let partition = discretize(&ranking, 4)?;
    let projection = project_dataset(&dataset, &weights, &ProjectionConfig::pca(), None)?;

    let line = rating_line(&partition, &projection)?;
    println!("rating line length {:.4} through {} anchors", line.length(), line.anchors.len());
    let axis = build_axis(&partition, &line, &projection)?;
    for placement in axis.iter().filter(|p| p.consistency != Consistency::Consistent).take(6) {
        println!(
            "{:<10} rating {} lands in ({}, {}) at arc {:.3}, distance {:.3}: {:+}",
            placement.id,
            placement.rating,
            placement.bracket.low,
            placement.bracket.high,
            placement.arc_position,
            placement.distance,
            placement.inverse_ordinal,
        );
    }
    let improved = axis.iter().filter(|p| p.consistency == Consistency::Improved).count();
    let worsened = axis.iter().filter(|p| p.consistency == Consistency::Worsened).count();
    println!("{improved} items look better in the projection, {worsened} look worse");

    // A user-drawn line: lasso the right half, then the left half.
    let xs: Vec<f64> = projection.coords.iter().map(|c| c.x).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mid = (lo + hi) / 2.0;
    let square = |x0: f64, x1: f64| {
        vec![Point::new(x0, -10.0), Point::new(x1, -10.0), Point::new(x1, 10.0), Point::new(x0, 10.0)]
    };
    let lasso = self_defined_rating_line(&[square(mid, hi), square(lo, mid)], &projection)?;
    println!("self-defined line: {:?}", lasso.anchors.iter().map(|a| (a.point.x, a.point.y)).collect::<Vec<_>>());
    Ok(())
}

#[allow(dead_code)]
fn main() -> rankaxis::Result<()> {
    run_example()
}
