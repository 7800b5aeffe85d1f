//! Multi-attribute datasets: CSV ingestion, min-max normalization and
//! per-attribute contributions under a weight vector.
//!
//! Every attribute is treated as "larger is better". Attributes where smaller
//! is better have to be negated before they reach [`load_csv`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable identifier of a data item. Ordering is lexicographic and is the
/// tie-break used everywhere a deterministic order over items is needed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub String);

impl ItemId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ItemId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Higher is better.
    #[default]
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_unit: Option<String>,
}

impl Attribute {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), direction: Direction::Maximize, display_unit: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    attributes: Vec<Attribute>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::InvalidSchema("at least one attribute is required".into()));
        }
        let mut seen = HashSet::new();
        for attr in &attributes {
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate attribute name '{}'", attr.name)));
            }
        }
        Ok(Self { attributes })
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        Self::new(names.iter().map(|n| Attribute::new(n.as_ref())).collect())
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataItem {
    pub id: ItemId,
    pub label: String,
    pub raw_values: Vec<f64>,
}

impl DataItem {
    pub fn new(id: impl Into<String>, label: impl Into<String>, raw_values: Vec<f64>) -> Self {
        Self { id: ItemId(id.into()), label: label.into(), raw_values }
    }
}

/// Result of min-max normalizing a raw matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub values: Vec<Vec<f64>>,
    /// Columns whose raw values are all equal. They normalize to zero.
    pub constant_columns: Vec<usize>,
}

/// Min-max normalizes every column of `raw` to `[0, 1]`.
///
/// A constant column maps to all zeros and is reported in
/// [`Normalization::constant_columns`].
pub fn normalize(raw: &[Vec<f64>]) -> Normalization {
    let cols = raw.first().map_or(0, Vec::len);
    let mut values = vec![vec![0.0; cols]; raw.len()];
    let mut constant_columns = Vec::new();
    for j in 0..cols {
        let (min, max) =
            raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), row| (lo.min(row[j]), hi.max(row[j])));
        let span = max - min;
        if span > 0.0 {
            for (out, row) in values.iter_mut().zip(raw) {
                out[j] = (row[j] - min) / span;
            }
        } else {
            constant_columns.push(j);
        }
    }
    Normalization { values, constant_columns }
}

/// An immutable dataset with its normalized matrix.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: AttributeSchema,
    items: Vec<DataItem>,
    normalized: Vec<Vec<f64>>,
    constant_columns: Vec<usize>,
    renamed: Vec<(String, ItemId)>,
    index: HashMap<ItemId, usize>,
}

impl Dataset {
    pub fn new(schema: AttributeSchema, items: Vec<DataItem>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyInput("dataset has no items"));
        }
        let mut index = HashMap::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            if item.raw_values.len() != schema.len() {
                return Err(Error::InvalidDataset(format!(
                    "item '{}' has {} values, schema has {} attributes",
                    item.id,
                    item.raw_values.len(),
                    schema.len()
                )));
            }
            if let Some(j) = item.raw_values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "item '{}' has a non-finite value for attribute '{}'",
                    item.id,
                    schema.attributes()[j].name
                )));
            }
            if index.insert(item.id.clone(), i).is_some() {
                return Err(Error::InvalidDataset(format!("duplicate item id '{}'", item.id)));
            }
        }
        let raw: Vec<Vec<f64>> = items.iter().map(|it| it.raw_values.clone()).collect();
        let Normalization { values, constant_columns } = normalize(&raw);
        Ok(Self { schema, items, normalized: values, constant_columns, renamed: Vec::new(), index })
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn items(&self) -> &[DataItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn attribute_count(&self) -> usize {
        self.schema.len()
    }

    pub fn normalized(&self) -> &[Vec<f64>] {
        &self.normalized
    }

    pub fn constant_columns(&self) -> &[usize] {
        &self.constant_columns
    }

    /// Labels that collided during CSV ingestion, with the id they received.
    pub fn renamed_items(&self) -> &[(String, ItemId)] {
        &self.renamed
    }

    pub fn ids(&self) -> impl Iterator<Item = &ItemId> {
        self.items.iter().map(|it| &it.id)
    }

    pub fn index_of(&self, id: &ItemId) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownItem(id.clone()))
    }

    pub fn row(&self, id: &ItemId) -> Result<&[f64]> {
        Ok(&self.normalized[self.index_of(id)?])
    }

    /// Hex digest over ids and raw values; two datasets with the same
    /// fingerprint hold the same items in the same order.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for name in self.schema.names() {
            hasher.update(name.as_bytes());
            hasher.update([0u8]);
        }
        for item in &self.items {
            hasher.update(item.id.as_str().as_bytes());
            hasher.update([0u8]);
            for v in &item.raw_values {
                hasher.update(v.to_bits().to_le_bytes());
            }
        }
        crate::hex_prefix(&hasher.finalize(), 16)
    }

    /// Writes the normalized matrix as CSV: `id` followed by the attribute
    /// columns in schema order.
    pub fn write_normalized_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["id"];
        header.extend(self.schema.names());
        out.write_record(&header)?;
        for (item, row) in self.items.iter().zip(&self.normalized) {
            let mut record = vec![item.id.0.clone()];
            record.extend(row.iter().map(|v| v.to_string()));
            out.write_record(&record)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { delimiter: b',', has_header: true }
    }
}

/// Reads a dataset from CSV. The first column is the item label and the
/// remaining columns are numeric attributes.
///
/// Duplicate labels get deterministic ids: the second occurrence of `X`
/// becomes `X-2`, the third `X-3`, skipping any id already taken.
/// Rows and columns in parse errors are 1-based and count the header row.
pub fn load_csv<R: Read>(source: R, options: CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut records = reader.records();
    let mut row_no = 0usize;
    let mut attribute_names: Option<Vec<String>> = None;
    if options.has_header {
        match records.next() {
            None => return Err(Error::EmptyInput("CSV input is empty")),
            Some(rec) => {
                let rec = rec?;
                row_no += 1;
                if rec.len() < 2 {
                    return Err(Error::Parse {
                        row: row_no,
                        column: rec.len().max(1),
                        message: "header needs a label column and at least one attribute".into(),
                    });
                }
                attribute_names = Some(rec.iter().skip(1).map(str::to_owned).collect());
            }
        }
    }

    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec?;
        row_no += 1;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let width = match &attribute_names {
            Some(names) => names.len() + 1,
            None => {
                if rec.len() < 2 {
                    return Err(Error::Parse {
                        row: row_no,
                        column: rec.len().max(1),
                        message: "row needs a label column and at least one attribute".into(),
                    });
                }
                let names = (1..rec.len()).map(|j| format!("a{j}")).collect::<Vec<_>>();
                let w = names.len() + 1;
                attribute_names = Some(names);
                w
            }
        };
        if rec.len() != width {
            return Err(Error::Parse {
                row: row_no,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let mut values = Vec::with_capacity(width - 1);
        for (j, cell) in rec.iter().enumerate().skip(1) {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row: row_no,
                column: j + 1,
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { row: row_no, column: j + 1, message: format!("'{cell}' is not finite") });
            }
            values.push(v);
        }
        labels.push(rec[0].to_owned());
        rows.push(values);
    }

    let names = attribute_names.ok_or(Error::EmptyInput("CSV input is empty"))?;
    if rows.is_empty() {
        return Err(Error::EmptyInput("CSV input has no data rows"));
    }
    let schema = AttributeSchema::from_names(&names)?;

    let (ids, renamed) = dedup_labels(&labels);
    let items = ids
        .into_iter()
        .zip(labels)
        .zip(rows)
        .map(|((id, label), raw_values)| DataItem { id, label, raw_values })
        .collect();
    let mut dataset = Dataset::new(schema, items)?;
    dataset.renamed = renamed;
    Ok(dataset)
}

fn dedup_labels(labels: &[String]) -> (Vec<ItemId>, Vec<(String, ItemId)>) {
    let mut first_seen: HashSet<&str> = HashSet::new();
    // Every literal label is reserved up front so a suffixed duplicate never
    // takes an id that appears verbatim later in the file.
    let mut owned: HashSet<String> = labels.iter().cloned().collect();
    let mut ids = Vec::with_capacity(labels.len());
    let mut renamed = Vec::new();
    for label in labels {
        if first_seen.insert(label.as_str()) {
            ids.push(ItemId(label.clone()));
            continue;
        }
        let mut suffix = 2;
        let id = loop {
            let candidate = format!("{label}-{suffix}");
            if !owned.contains(&candidate) {
                break candidate;
            }
            suffix += 1;
        };
        owned.insert(id.clone());
        renamed.push((label.clone(), ItemId(id.clone())));
        ids.push(ItemId(id));
    }
    (ids, renamed)
}

/// Per-attribute contributions `w_j * normalized[i][j]`. Each row sums to the
/// item's rank score.
pub fn attribute_contributions(dataset: &Dataset, weights: &[f64]) -> Result<Vec<Vec<f64>>> {
    if weights.len() != dataset.attribute_count() {
        return Err(Error::LengthMismatch { expected: dataset.attribute_count(), got: weights.len() });
    }
    Ok(dataset.normalized().iter().map(|row| row.iter().zip(weights).map(|(x, w)| w * x).collect()).collect())
}
