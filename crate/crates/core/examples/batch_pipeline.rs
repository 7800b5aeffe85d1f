//! Run the whole pipeline on files and write every artifact, as
//! `rankaxis run` does.

use std::fs;

use rankaxis::data::{load_csv, CsvOptions};
use rankaxis::fixtures::{synthetic_banks, to_csv};
use rankaxis::pipeline::{run_pipeline, write_artifacts, PipelineConfig};
use rankaxis::projection::ProjectionConfig;
use rankaxis::weights::{rank_all, read_constraint_csv, WeightVector};

pub fn run_example() -> rankaxis::Result<()> {
    let dir = std::env::temp_dir().join(format!("rankaxis-batch-{}", std::process::id()));
    fs::create_dir_all(&dir)?;

    let (dataset, hidden) = synthetic_banks(45, 5, 10)?;
    fs::write(dir.join("banks.csv"), to_csv(&dataset))?;
    let truth = rank_all(&WeightVector::fixed(hidden), &dataset)?;
    let ids: Vec<_> = truth.ids().collect();
    let mut prefs = String::from("preferred_id,other_id\n");
    for w in [0, 9, 18, 27, 36, 44].windows(2) {
        prefs.push_str(&format!("{},{}\n", ids[w[0]], ids[w[1]]));
    }
    fs::write(dir.join("constraints.csv"), prefs)?;

    let dataset = load_csv(fs::File::open(dir.join("banks.csv"))?, CsvOptions::default())?;
    let constraints = read_constraint_csv(fs::File::open(dir.join("constraints.csv"))?, &dataset)?;
    let config = PipelineConfig { projection: ProjectionConfig::tsne(7), ..PipelineConfig::default() };
    let output = run_pipeline(&dataset, &constraints, &config)?;
    for path in write_artifacts(&dataset, &output, &dir.join("out"), true)? {
        println!("{} ({} bytes)", path.display(), fs::metadata(&path)?.len());
    }
    println!("{} inconsistencies reported", output.inconsistencies.len());
    fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> rankaxis::Result<()> {
    run_example()
}
