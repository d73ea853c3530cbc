use std::path::Path;

use ndarray::Array2;

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Which CSV column carries the class tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Column header name; requires a header row.
    Name(String),
    /// Zero-based column position.
    Index(usize),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// `last`, a non-negative integer, or a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = s.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        })
    }
}

/// Loads a dense CSV. The header row is optional unless the label column is
/// given by name; without a name, the first row counts as a header when one of
/// its feature cells is not a number.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    positive_label: Option<&str>,
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)?;
    let first = records
        .first()
        .ok_or_else(|| Error::invalid(format!("{}: empty file", path.display())))?;
    let width = first.len();

    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => return Err(Error::MissingColumn(format!("index {i}"))),
        LabelColumn::Last => width - 1,
        LabelColumn::Name(name) => first
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.clone()))?,
    };
    if width < 2 {
        return Err(Error::invalid(format!(
            "{}: need at least one feature column and a label column",
            path.display()
        )));
    }
    let has_header = match label_column {
        LabelColumn::Name(_) => true,
        _ => first
            .iter()
            .enumerate()
            .any(|(c, v)| c != label_idx && v.parse::<f64>().is_err()),
    };

    let body = if has_header {
        &records[1..]
    } else {
        &records[..]
    };
    let n_features = width - 1;
    let mut values = Vec::with_capacity(body.len() * n_features);
    let mut labels = Vec::with_capacity(body.len());
    for (row, rec) in body.iter().enumerate() {
        let line = row + 1 + usize::from(has_header);
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        if rec.len() != width {
            return Err(parse_err(format!(
                "expected {width} fields, found {}",
                rec.len()
            )));
        }
        for (c, cell) in rec.iter().enumerate() {
            if c == label_idx {
                if cell.is_empty() {
                    return Err(parse_err("missing label".into()));
                }
                labels.push(cell.to_string());
            } else {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| parse_err(format!("non-numeric cell `{cell}` in column {c}")))?;
                values.push(v);
            }
        }
    }

    let features =
        Array2::from_shape_vec((labels.len(), n_features), values).expect("widths checked");
    let dataset = LabeledDataset::new(features, labels, positive_label)?;
    if has_header {
        let names = first
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != label_idx)
            .map(|(_, h)| h.to_string())
            .collect();
        dataset.with_feature_names(names)
    } else {
        Ok(dataset)
    }
}

/// Writes a header row (feature names or `x0..`, then `class`) and one row
/// per sample. Floats use the shortest representation that parses back to the
/// same bits.
pub fn save_csv(dataset: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<String> = match dataset.feature_names() {
        Some(names) => names.to_vec(),
        None => (0..dataset.n_features()).map(|j| format!("x{j}")).collect(),
    };
    header.push("class".to_string());
    writer.write_record(&header).map_err(csv_err)?;
    for (row, label) in dataset.features().rows().into_iter().zip(dataset.labels()) {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(label.clone());
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
