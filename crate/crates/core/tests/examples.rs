//! Every example runs to completion.

#[path = "../examples/batch_pipeline.rs"]
mod batch_pipeline;
#[path = "../examples/http_session.rs"]
mod http_session;
#[path = "../examples/inconsistencies.rs"]
mod inconsistencies;
#[path = "../examples/infer_weights.rs"]
mod infer_weights;
#[path = "../examples/projection.rs"]
mod projection;
#[path = "../examples/projection_axis.rs"]
mod projection_axis;
#[path = "../examples/ratings.rs"]
mod ratings;
#[path = "../examples/scheme_comparison.rs"]
mod scheme_comparison;

#[test]
fn batch_pipeline_runs() {
    batch_pipeline::run_example().unwrap();
}

#[test]
fn http_session_runs() {
    http_session::run_example().unwrap();
}

#[test]
fn inconsistencies_runs() {
    inconsistencies::run_example().unwrap();
}

#[test]
fn infer_weights_runs() {
    infer_weights::run_example().unwrap();
}

#[test]
fn projection_runs() {
    projection::run_example().unwrap();
}

#[test]
fn projection_axis_runs() {
    projection_axis::run_example().unwrap();
}

#[test]
fn ratings_runs() {
    ratings::run_example().unwrap();
}

#[test]
fn scheme_comparison_runs() {
    scheme_comparison::run_example().unwrap();
}
