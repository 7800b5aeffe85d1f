//! Synthetic datasets for examples, tests and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{AttributeSchema, DataItem, Dataset};
use crate::error::Result;

/// Attribute names used by [`synthetic_banks`], cycled when more are needed.
pub const BANK_ATTRIBUTES: [&str; 8] = [
    "capital_adequacy",
    "asset_quality",
    "profitability",
    "liquidity",
    "asset_size",
    "deposit_growth",
    "loan_growth",
    "cost_efficiency",
];

/// A dataset whose attributes are uniform on `[0, 100)`, together with a
/// hidden positive weight vector (summing to 1) that orders it.
pub fn synthetic_banks(items: usize, attributes: usize, seed: u64) -> Result<(Dataset, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..attributes)
        .map(|j| {
            let base = BANK_ATTRIBUTES[j % BANK_ATTRIBUTES.len()];
            if j < BANK_ATTRIBUTES.len() {
                base.to_owned()
            } else {
                format!("{base}_{}", j / BANK_ATTRIBUTES.len() + 1)
            }
        })
        .collect();
    let schema = AttributeSchema::from_names(&names)?;
    let rows = (0..items)
        .map(|i| {
            let values = (0..attributes).map(|_| rng.random_range(0.0..100.0)).collect();
            let id = format!("bank-{i:03}");
            DataItem::new(id.clone(), id, values)
        })
        .collect();
    let mut hidden: Vec<f64> = (0..attributes).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = hidden.iter().sum();
    hidden.iter_mut().for_each(|w| *w /= total);
    Ok((Dataset::new(schema, rows)?, hidden))
}

/// The same data as CSV text, label column first.
pub fn to_csv(dataset: &Dataset) -> String {
    let mut out = String::from("name");
    for n in dataset.schema().names() {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for item in dataset.items() {
        out.push_str(&item.label);
        for v in &item.raw_values {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}
