//! Reader for the Keel `.dat` format: `@`-prefixed header lines, then
//! comma-separated rows after `@data`. Lines starting with `%` are comments.

use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug)]
enum AttrKind {
    Numeric,
    Nominal,
}

#[derive(Debug)]
struct Attribute {
    name: String,
    kind: AttrKind,
}

/// Class tag Keel uses for the positive (minority) class.
const KEEL_POSITIVE: &str = "positive";

pub fn load_keel(path: impl AsRef<Path>, positive_label: Option<&str>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_keel(&text, path, positive_label)
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn parse_attribute(rest: &str) -> Option<Attribute> {
    if let Some(open) = rest.find('{') {
        let name = rest[..open].trim();
        if name.is_empty() || !rest.trim_end().ends_with('}') {
            return None;
        }
        return Some(Attribute {
            name: name.to_string(),
            kind: AttrKind::Nominal,
        });
    }
    let mut parts = rest.split_whitespace();
    let name = parts.next()?;
    let ty = parts.next()?.to_ascii_lowercase();
    // anything after the type is a `[lo, hi]` range, which we don't need
    let ty = ty.split('[').next().unwrap_or_default();
    match ty {
        "real" | "integer" | "numeric" => Some(Attribute {
            name: name.to_string(),
            kind: AttrKind::Numeric,
        }),
        _ => None,
    }
}

/// Parses Keel text. `source` only labels error messages.
pub fn parse_keel(
    text: &str,
    source: impl Into<PathBuf>,
    positive_label: Option<&str>,
) -> Result<LabeledDataset> {
    let source = source.into();
    let err = |line: usize, msg: String| Error::Parse {
        path: source.clone(),
        line,
        msg,
    };

    let mut attributes: Vec<Attribute> = Vec::new();
    let mut inputs: Option<Vec<String>> = None;
    let mut outputs: Option<Vec<String>> = None;
    let mut in_data = false;
    let mut columns: Option<(Vec<usize>, usize)> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<String> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            if !line.starts_with('@') {
                return Err(err(lineno, "data row before @data".into()));
            }
            let (directive, rest) = match line.find(char::is_whitespace) {
                Some(p) => (&line[..p], line[p..].trim()),
                None => (line, ""),
            };
            match directive.to_ascii_lowercase().as_str() {
                "@relation" => {}
                "@attribute" => {
                    if let Some(open) = rest.find('{') {
                        if rest[..open].trim().is_empty() {
                            return Err(err(lineno, "attribute without a name".into()));
                        }
                    }
                    let attr = parse_attribute(rest).ok_or_else(|| {
                        err(
                            lineno,
                            format!("cannot parse attribute declaration `{rest}`"),
                        )
                    })?;
                    attributes.push(attr);
                }
                "@inputs" | "@input" => inputs = Some(split_list(rest)),
                "@outputs" | "@output" => outputs = Some(split_list(rest)),
                "@data" => {
                    columns = Some(resolve_columns(
                        &attributes,
                        &inputs,
                        &outputs,
                        lineno,
                        &err,
                    )?);
                    in_data = true;
                }
                other => return Err(err(lineno, format!("unknown directive `{other}`"))),
            }
            continue;
        }

        let (input_cols, class_col) = columns.as_ref().expect("set at @data");
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != attributes.len() {
            return Err(err(
                lineno,
                format!(
                    "expected {} fields, found {}",
                    attributes.len(),
                    fields.len()
                ),
            ));
        }
        for &c in input_cols {
            let f = fields[c];
            if f == "?" || f.eq_ignore_ascii_case("<null>") {
                return Err(err(
                    lineno,
                    format!("missing value in `{}`", attributes[c].name),
                ));
            }
            let v: f64 = f.parse().map_err(|_| {
                err(
                    lineno,
                    format!("non-numeric value `{f}` in `{}`", attributes[c].name),
                )
            })?;
            values.push(v);
        }
        let class = fields[*class_col];
        if class.is_empty() || class == "?" {
            return Err(err(lineno, "missing class value".into()));
        }
        labels.push(class.to_string());
    }

    let (input_cols, _) =
        columns.ok_or_else(|| err(text.lines().count(), "no @data section".into()))?;
    let n_features = input_cols.len();
    let n = labels.len();
    let features = Array2::from_shape_vec((n, n_features), values).expect("row lengths checked");
    let names = input_cols
        .iter()
        .map(|&c| attributes[c].name.clone())
        .collect();

    let distinct: std::collections::BTreeSet<&str> = labels.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(Error::UnsupportedDataset(format!(
            "{}: expected 2 classes, found {}",
            source.display(),
            distinct.len()
        )));
    }
    let positive = positive_label.unwrap_or(KEEL_POSITIVE);
    LabeledDataset::new(features, labels, Some(positive))?.with_feature_names(names)
}

type ColumnPlan = (Vec<usize>, usize);

fn resolve_columns(
    attributes: &[Attribute],
    inputs: &Option<Vec<String>>,
    outputs: &Option<Vec<String>>,
    lineno: usize,
    err: &dyn Fn(usize, String) -> Error,
) -> Result<ColumnPlan> {
    if attributes.len() < 2 {
        return Err(err(
            lineno,
            "need at least one input and one class attribute".into(),
        ));
    }
    let find = |name: &str| {
        attributes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| err(lineno, format!("unknown attribute `{name}`")))
    };
    let class_col = match outputs {
        Some(o) if o.len() == 1 => find(&o[0])?,
        Some(o) => {
            return Err(Error::UnsupportedDataset(format!(
                "expected exactly one output attribute, found {}",
                o.len()
            )))
        }
        None => attributes.len() - 1,
    };
    let input_cols: Vec<usize> = match inputs {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => (0..attributes.len()).filter(|&c| c != class_col).collect(),
    };
    if input_cols.is_empty() || input_cols.contains(&class_col) {
        return Err(err(lineno, "class attribute listed among inputs".into()));
    }
    for &c in &input_cols {
        if let AttrKind::Nominal = attributes[c].kind {
            return Err(Error::UnsupportedAttribute {
                name: attributes[c].name.clone(),
                reason: "only numeric input attributes are supported".into(),
            });
        }
    }
    Ok((input_cols, class_col))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
@relation toy
% comment
@attribute a real [0.0, 10.0]
@attribute b integer [0, 5]
@attribute Class {positive, negative}
@inputs a, b
@outputs Class
@data
1.0, 2, negative
2.5, 3, negative
3.0, 1, negative
4.0, 0, positive
";

    #[test]
    fn parses_small_file() {
        let d = parse_keel(SMALL, "toy.dat", None).unwrap();
        assert_eq!(d.n_samples(), 4);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.minority_label(), "positive");
        assert_eq!(d.features()[[1, 0]], 2.5);
        assert_eq!(
            d.feature_names().unwrap(),
            &["a".to_string(), "b".to_string()]
        );
    }

    #[test]
    fn tie_goes_to_positive_label() {
        let text = SMALL.replace("1.0, 2, negative", "1.0, 2, positive");
        let d = parse_keel(&text, "toy.dat", None).unwrap();
        assert_eq!(d.minority_label(), "positive");
        let d = parse_keel(&text, "toy.dat", Some("negative")).unwrap();
        assert_eq!(d.minority_label(), "negative");
    }

    #[test]
    fn class_defaults_to_last_attribute() {
        let text = "@relation t\n@attribute x real\n@attribute y {p, n}\n@data\n1, p\n2, n\n3, n\n";
        let d = parse_keel(text, "t.dat", None).unwrap();
        assert_eq!(d.minority_label(), "p");
    }

    #[test]
    fn outputs_can_name_a_non_last_column() {
        let text = "@relation t\n@attribute y {p, n}\n@attribute x real\n@inputs x\n@outputs y\n@data\np, 1\nn, 2\nn, 3\n";
        let d = parse_keel(text, "t.dat", None).unwrap();
        assert_eq!(d.n_features(), 1);
        assert_eq!(d.features()[[2, 0]], 3.0);
    }

    #[test]
    fn malformed_header_reports_line() {
        let text = "@relation t\n@attribute x real\n@bogus\n@data\n";
        match parse_keel(text, "t.dat", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "@relation t\n@attribute x\n@data\n";
        assert!(matches!(
            parse_keel(text, "t.dat", None),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn non_binary_class_is_unsupported() {
        let text = "@relation t\n@attribute x real\n@attribute y {a,b,c}\n@data\n1,a\n2,b\n3,c\n";
        assert!(matches!(
            parse_keel(text, "t.dat", None),
            Err(Error::UnsupportedDataset(_))
        ));
    }

    #[test]
    fn nominal_input_is_unsupported() {
        let text = "@relation t\n@attribute s {m, f}\n@attribute y {a,b}\n@data\nm,a\nf,b\nm,b\n";
        assert!(matches!(
            parse_keel(text, "t.dat", None),
            Err(Error::UnsupportedAttribute { .. })
        ));
    }

    #[test]
    fn missing_and_bad_values_rejected() {
        let text = "@relation t\n@attribute x real\n@attribute y {a,b}\n@data\n1,a\n?,b\n";
        assert!(matches!(
            parse_keel(text, "t.dat", None),
            Err(Error::Parse { line: 6, .. })
        ));
        let text = "@relation t\n@attribute x real\n@attribute y {a,b}\n@data\n1,a\nfoo,b\n";
        assert!(matches!(
            parse_keel(text, "t.dat", None),
            Err(Error::Parse { line: 6, .. })
        ));
        let text = "@relation t\n@attribute x real\n@attribute y {a,b}\n@data\n1,a,3\n";
        assert!(matches!(
            parse_keel(text, "t.dat", None),
            Err(Error::Parse { line: 5, .. })
        ));
    }
}
