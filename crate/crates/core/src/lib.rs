//! Ranking and projection analysis for multi-attribute data.
//!
//! The crate learns attribute weights from a user's re-ranking of a few rows,
//! splits the resulting score list into ratings, lays the weighted data out
//! in 2-D, and compares the two views: ranking lines through the projection
//! are unrolled into a projection axis where every item gets a signed
//! inverse ordinal, and item triples are scanned for cases where projection
//! proximity contradicts the ranking.
//!
//! | module | what it does |
//! |---|---|
//! | [`data`] | CSV ingestion, min-max normalization, attribute contributions |
//! | [`weights`] | pairwise constraints, Ranking SVM training, rank scores |
//! | [`rating`] | entropy-based discretization of scores into ratings |
//! | [`projection`] | PCA and t-SNE layouts of the weighted data |
//! | [`axis`] | ranking/rating polylines and the projection axis |
//! | [`consistency`] | triple-wise consistency checks |
//! | [`schemes`] | saved schemes, comparison, attribute similarity |
//! | [`service`] | HTTP session API |
//! | [`cli`] | batch front end |
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example` lists them.

pub mod axis;
pub mod cli;
pub mod consistency;
pub mod data;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod pipeline;
pub mod projection;
pub mod rating;
pub mod schemes;
pub mod service;
pub mod weights;

pub use error::{Error, Result};

pub(crate) fn hex_prefix(bytes: &[u8], len: usize) -> String {
    bytes
        .iter()
        .flat_map(|b| [b >> 4, b & 0xf])
        .take(len)
        .map(|n| char::from_digit(u32::from(n), 16).unwrap())
        .collect()
}
