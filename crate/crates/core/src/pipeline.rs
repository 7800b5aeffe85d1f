//! End-to-end batch run: constraints in, every artifact out.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::axis::{build_axis, rating_line, write_axis_csv, AxisPlacement, RatingPolyline};
use crate::consistency::{enumerate_inconsistencies, write_inconsistencies_csv, Inconsistency};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::projection::{project_dataset, Projection, ProjectionConfig};
use crate::rating::{discretize, write_ratings_csv, RatingPartition, DEFAULT_RATINGS};
use crate::weights::{rank_all, train_ranking_svm, PairwiseConstraint, Ranking, SvmConfig, WeightVector};

pub const DEFAULT_BUDGET: usize = 100;

pub const ARTIFACTS: [&str; 6] =
    ["weights.json", "ranking.csv", "ratings.csv", "projection.csv", "axis.csv", "inconsistencies.csv"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub n_ratings: usize,
    pub svm: SvmConfig,
    pub projection: ProjectionConfig,
    pub inconsistency_budget: usize,
    /// Seed for triple sampling on large datasets.
    pub sampling_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n_ratings: DEFAULT_RATINGS,
            svm: SvmConfig::default(),
            projection: ProjectionConfig::default(),
            inconsistency_budget: DEFAULT_BUDGET,
            sampling_seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub weights: WeightVector,
    pub ranking: Ranking,
    pub partition: RatingPartition,
    pub projection: Projection,
    pub polyline: RatingPolyline,
    pub axis: Vec<AxisPlacement>,
    pub inconsistencies: Vec<Inconsistency>,
}

/// Trains weights, ranks, rates, projects, builds the rating-line axis and
/// scans for inconsistencies.
pub fn run_pipeline(
    dataset: &Dataset,
    constraints: &[PairwiseConstraint],
    config: &PipelineConfig,
) -> Result<PipelineOutput> {
    if config.n_ratings < 2 {
        return Err(Error::InvalidParameter("n must be ≥ 2".into()));
    }
    let weights = train_ranking_svm(constraints, &config.svm)?;
    let ranking = rank_all(&weights, dataset)?;
    let partition = discretize(&ranking, config.n_ratings)?;
    let projection = project_dataset(dataset, &weights, &config.projection, None)?;
    let polyline = rating_line(&partition, &projection)?;
    let axis = build_axis(&partition, &polyline, &projection)?;
    let inconsistencies =
        enumerate_inconsistencies(dataset, &ranking, &projection, config.inconsistency_budget, config.sampling_seed)?;
    Ok(PipelineOutput { weights, ranking, partition, projection, polyline, axis, inconsistencies })
}

/// Writes `ranking.csv` rows: `rank,id,label,score`.
pub fn write_ranking_csv<W: Write>(dataset: &Dataset, ranking: &Ranking, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["rank", "id", "label", "score"])?;
    for e in ranking.entries() {
        let label = &dataset.items()[dataset.index_of(&e.id)?].label;
        out.write_record([e.rank.to_string(), e.id.to_string(), label.clone(), e.score.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes every artifact into `dir`. Existing artifacts are only replaced
/// when `force` is set.
pub fn write_artifacts(dataset: &Dataset, output: &PipelineOutput, dir: &Path, force: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    if !force {
        if let Some(existing) = ARTIFACTS.iter().map(|a| dir.join(a)).find(|p| p.exists()) {
            return Err(Error::InvalidParameter(format!(
                "{} already exists; pass --force to overwrite",
                existing.display()
            )));
        }
    }
    let mut weights = create(dir, "weights.json")?;
    serde_json::to_writer_pretty(&mut weights, &output.weights.to_named(dataset.schema()))?;
    weights.write_all(b"\n")?;
    weights.flush()?;
    write_ranking_csv(dataset, &output.ranking, create(dir, "ranking.csv")?)?;
    write_ratings_csv(&output.ranking, &output.partition, create(dir, "ratings.csv")?)?;
    output.projection.write_csv(create(dir, "projection.csv")?)?;
    write_axis_csv(&output.axis, create(dir, "axis.csv")?)?;
    write_inconsistencies_csv(&output.inconsistencies, create(dir, "inconsistencies.csv")?)?;
    Ok(ARTIFACTS.iter().map(|a| dir.join(a)).collect())
}
