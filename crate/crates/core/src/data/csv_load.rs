//! CSV ingestion (RFC-4180 subset, header row required).
//!
//! Numeric columns parse as f64. Columns listed in
//! [`CsvSchema::categorical`] (or any column with non-numeric cells) are
//! one-hot expanded with categories in sorted order, matching a
//! label-encoder convention.

use std::collections::BTreeSet;
use std::path::Path;

use crate::data::TabularDataset;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Schema hints for [`load_csv`].
#[derive(Debug, Clone, Default)]
pub struct CsvSchema {
    /// Columns dropped entirely (e.g. row ids).
    pub ignore: Vec<String>,
    /// Columns forced to categorical one-hot expansion even if numeric.
    pub categorical: Vec<String>,
    /// Drop the first (sorted) category of each one-hot group.
    pub drop_first: bool,
}

/// Load a CSV with a header row; `label_column` becomes the class id.
///
/// String labels map to ids by sorted order. Row order is preserved as on
/// disk. Parse failures carry row/column context.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str, schema: &CsvSchema) -> Result<TabularDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("bad header row: {e}")))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Data(format!("label column {label_column:?} not found")))?;

    let mut cells: Vec<Vec<String>> = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("row {}: {e}", row_no + 2)))?;
        if record.len() != headers.len() {
            return Err(Error::Data(format!(
                "row {}: expected {} fields, found {}",
                row_no + 2,
                headers.len(),
                record.len()
            )));
        }
        cells.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    if cells.is_empty() {
        return Err(Error::Data("CSV has a header but no rows".into()));
    }

    // Decide column treatment.
    let n = cells.len();
    let mut numeric_cols: Vec<usize> = Vec::new();
    let mut categorical_cols: Vec<usize> = Vec::new();
    for (c, name) in headers.iter().enumerate() {
        if c == label_idx || schema.ignore.iter().any(|i| i == name) {
            continue;
        }
        let forced = schema.categorical.iter().any(|i| i == name);
        let all_numeric = !forced && cells.iter().all(|row| row[c].parse::<f64>().is_ok());
        if all_numeric {
            numeric_cols.push(c);
        } else {
            categorical_cols.push(c);
        }
    }

    // Expanded layout keeps original column order.
    struct Group {
        col: usize,
        categories: Option<Vec<String>>, // None = numeric passthrough
    }
    let mut groups: Vec<Group> = Vec::new();
    for (c, _) in headers.iter().enumerate() {
        if c == label_idx || schema.ignore.iter().any(|i| i == &headers[c]) {
            continue;
        }
        if numeric_cols.contains(&c) {
            groups.push(Group { col: c, categories: None });
        } else if categorical_cols.contains(&c) {
            let mut cats: BTreeSet<String> = BTreeSet::new();
            for row in &cells {
                cats.insert(row[c].clone());
            }
            let mut cats: Vec<String> = cats.into_iter().collect();
            if schema.drop_first && cats.len() > 1 {
                cats.remove(0);
            }
            groups.push(Group { col: c, categories: Some(cats) });
        }
    }

    let mut names: Vec<String> = Vec::new();
    for g in &groups {
        match &g.categories {
            None => names.push(headers[g.col].clone()),
            Some(cats) => {
                for cat in cats {
                    names.push(format!("{}_{}", headers[g.col], cat));
                }
            }
        }
    }

    let f = names.len();
    let mut features = Matrix::zeros(n, f);
    for (r, row) in cells.iter().enumerate() {
        let dst = features.row_mut(r);
        let mut j = 0;
        for g in &groups {
            match &g.categories {
                None => {
                    dst[j] = row[g.col].parse::<f64>().map_err(|e| {
                        Error::Data(format!(
                            "row {} column {:?}: {e}",
                            r + 2,
                            headers[g.col]
                        ))
                    })?;
                    j += 1;
                }
                Some(cats) => {
                    for cat in cats {
                        dst[j] = if &row[g.col] == cat { 1.0 } else { 0.0 };
                        j += 1;
                    }
                }
            }
        }
    }

    // Labels: numeric ids if they parse as integers, else sorted categories.
    let raw_labels: Vec<&String> = cells.iter().map(|row| &row[label_idx]).collect();
    let all_ints = raw_labels.iter().all(|v| v.parse::<u32>().is_ok());
    let labels: Vec<u32> = if all_ints {
        raw_labels.iter().map(|v| v.parse::<u32>().unwrap()).collect()
    } else {
        let cats: Vec<String> = raw_labels
            .iter()
            .map(|v| (*v).clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        raw_labels
            .iter()
            .map(|v| cats.iter().position(|c| c == *v).unwrap() as u32)
            .collect()
    };
    let class_count = labels.iter().copied().max().unwrap_or(0) as usize + 1;

    let mut ds = TabularDataset::new(features, labels, class_count)?;
    ds.feature_names = Some(names);
    Ok(ds)
}
