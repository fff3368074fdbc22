//! Dataset representation and ingestion.
//!
//! Labels always follow the majority = 0 / minority = 1 convention. The role
//! of each raw class string is decided by counting rows at ingestion; when the
//! two classes are equally frequent, the lexicographically smaller class name
//! becomes the minority.
//!
//! Two text formats are supported: KEEL `.dat` files and CSV with a header
//! row. Nominal input attributes are one-hot encoded, one column per value,
//! named `attribute=value`. Missing values are rejected.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Tokens treated as missing values.
const MISSING_TOKENS: [&str; 3] = ["?", "<null>", ""];

/// Feature matrix plus binary labels, with majority = 0 and minority = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Array2<f64>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    target_name: String,
    /// Raw class strings, indexed by label: `[majority, minority]`.
    class_names: [String; 2],
}

/// Class counts of a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImbalanceSummary {
    pub n_majority: usize,
    pub n_minority: usize,
    /// `n_majority / n_minority`.
    pub imbalance_ratio: f64,
}

impl ImbalanceSummary {
    pub fn from_labels(labels: &[u8]) -> Self {
        let n_minority = labels.iter().filter(|&&y| y == 1).count();
        let n_majority = labels.len() - n_minority;
        Self {
            n_majority,
            n_minority,
            imbalance_ratio: n_majority as f64 / n_minority as f64,
        }
    }
}

impl Dataset {
    /// Builds a dataset from already encoded labels.
    ///
    /// The majority/minority convention is not re-checked here: derived
    /// datasets (resampled training sets, layer tasks) inherit the role
    /// mapping of their parent. Ingestion goes through [`Dataset::from_classes`].
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let (n, p) = features.dim();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "a dataset needs at least 2 rows, got {n}"
            )));
        }
        if p == 0 {
            return Err(Error::InvalidInput("a dataset needs at least one feature".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} labels for {n} rows",
                labels.len()
            )));
        }
        if feature_names.len() != p {
            return Err(Error::InvalidInput(format!(
                "{} feature names for {p} columns",
                feature_names.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidInput(format!("label {bad} is not binary")));
        }
        check_finite(features.view())?;
        Ok(Self {
            name: name.into(),
            features,
            labels,
            feature_names,
            target_name: "class".to_string(),
            class_names: ["0".to_string(), "1".to_string()],
        })
    }

    /// Builds a dataset from raw class strings, assigning roles by frequency.
    pub fn from_classes(
        name: impl Into<String>,
        features: Array2<f64>,
        classes: &[String],
        feature_names: Vec<String>,
        target_name: impl Into<String>,
    ) -> Result<Self> {
        let target_name = target_name.into();
        let (class_names, labels) = assign_roles(&target_name, classes)?;
        let mut d = Self::new(name, features, labels, feature_names)?;
        d.target_name = target_name;
        d.class_names = class_names;
        Ok(d)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// Raw class strings as `[majority, minority]`.
    pub fn class_names(&self) -> &[String; 2] {
        &self.class_names
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn summary(&self) -> ImbalanceSummary {
        summarize(self)
    }

    /// Rows at `indices`, in that order, keeping names and class mapping.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        self.derive(features, labels)
    }

    /// A dataset with new rows that keeps this dataset's metadata.
    pub fn derive(&self, features: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        let mut d = Self::new(
            self.name.clone(),
            features,
            labels,
            self.feature_names.clone(),
        )?;
        d.target_name = self.target_name.clone();
        d.class_names = self.class_names.clone();
        Ok(d)
    }

    /// Min-max scales every column to `[0, 1]`; constant columns become 0.
    pub fn min_max_scaled(&self) -> Self {
        let scaling = MinMax::fit(self.features.view());
        let mut d = self.clone();
        d.features = scaling.apply(self.features.view());
        d
    }
}

/// Per-column min-max scaling parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMax {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let mut min = vec![f64::INFINITY; x.ncols()];
        let mut max = vec![f64::NEG_INFINITY; x.ncols()];
        for row in x.rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Self { min, max }
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let span = self.max[j] - self.min[j];
                *v = if span > 0.0 { (*v - self.min[j]) / span } else { 0.0 };
            }
        }
        out
    }
}

/// Exact class counts and imbalance ratio.
pub fn summarize(d: &Dataset) -> ImbalanceSummary {
    ImbalanceSummary::from_labels(d.labels())
}

fn check_finite(x: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, column), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, column });
        }
    }
    Ok(())
}

/// Maps raw class strings to 0 (majority) and 1 (minority).
fn assign_roles(target: &str, classes: &[String]) -> Result<([String; 2], Vec<u8>)> {
    let distinct: BTreeSet<&str> = classes.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(Error::NotBinary {
            column: target.to_string(),
            found: distinct.len(),
            classes: distinct.into_iter().map(str::to_string).collect(),
        });
    }
    let mut it = distinct.into_iter();
    // BTreeSet iteration is sorted, so `small` < `large` lexicographically.
    let (small, large) = (it.next().unwrap(), it.next().unwrap());
    let n_small = classes.iter().filter(|c| c.as_str() == small).count();
    let n_large = classes.len() - n_small;
    let (majority, minority) = if n_small <= n_large {
        (large, small)
    } else {
        (small, large)
    };
    let labels = classes
        .iter()
        .map(|c| u8::from(c.as_str() == minority))
        .collect();
    Ok(([majority.to_string(), minority.to_string()], labels))
}

fn is_missing(token: &str) -> bool {
    MISSING_TOKENS.contains(&token)
}

/// How a raw input column is turned into feature columns.
#[derive(Debug, Clone)]
enum ColumnKind {
    Numeric,
    Nominal(Vec<String>),
}

/// Encodes raw string rows given per-column kinds.
struct Encoder {
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
}

impl Encoder {
    fn output_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, kind) in self.names.iter().zip(&self.kinds) {
            match kind {
                ColumnKind::Numeric => out.push(name.clone()),
                ColumnKind::Nominal(values) => {
                    out.extend(values.iter().map(|v| format!("{name}={v}")))
                }
            }
        }
        out
    }

    fn encode(&self, rows: &[Vec<&str>]) -> Result<Array2<f64>> {
        let width = self.output_names().len();
        let mut x = Array2::zeros((rows.len(), width));
        for (r, row) in rows.iter().enumerate() {
            let mut c = 0;
            for ((token, kind), name) in row.iter().zip(&self.kinds).zip(&self.names) {
                if is_missing(token) {
                    return Err(Error::MissingValue {
                        row: r,
                        column: name.clone(),
                    });
                }
                match kind {
                    ColumnKind::Numeric => {
                        x[[r, c]] = parse_number(token).ok_or_else(|| Error::Numeric {
                            row: r,
                            column: name.clone(),
                            value: token.to_string(),
                        })?;
                        c += 1;
                    }
                    ColumnKind::Nominal(values) => {
                        let k = values.iter().position(|v| v == token).ok_or_else(|| {
                            Error::InvalidInput(format!(
                                "row {r}: value `{token}` is not declared for attribute `{name}`"
                            ))
                        })?;
                        x[[r, c + k]] = 1.0;
                        c += values.len();
                    }
                }
            }
        }
        Ok(x)
    }
}

fn parse_number(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[derive(Debug)]
struct KeelAttribute {
    name: String,
    kind: ColumnKind,
}

fn strip_quotes(s: &str) -> &str {
    let s = s.trim();
    for q in ['\'', '"'] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return &s[1..s.len() - 1];
        }
    }
    s
}

fn parse_attribute(line_no: usize, rest: &str) -> Result<KeelAttribute> {
    let rest = rest.trim();
    let header_err = |message: &str| Error::Header {
        line: line_no,
        message: message.to_string(),
    };
    let (name, tail) = if let Some(q) = rest.chars().next().filter(|c| *c == '\'' || *c == '"') {
        let end = rest[1..]
            .find(q)
            .ok_or_else(|| header_err("unterminated quoted attribute name"))?;
        (&rest[1..=end], &rest[end + 2..])
    } else {
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '{')
            .ok_or_else(|| header_err("attribute without a type"))?;
        (&rest[..end], &rest[end..])
    };
    let tail = tail.trim();
    if name.is_empty() {
        return Err(header_err("empty attribute name"));
    }
    let kind = if let Some(body) = tail.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| header_err("unterminated nominal value list"))?;
        let values: Vec<String> = body
            .split(',')
            .map(|v| strip_quotes(v).to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(header_err("empty nominal value list"));
        }
        ColumnKind::Nominal(values)
    } else {
        let ty: String = tail
            .chars()
            .take_while(|c| c.is_ascii_alphabetic())
            .collect::<String>()
            .to_ascii_lowercase();
        match ty.as_str() {
            "real" | "integer" | "numeric" => ColumnKind::Numeric,
            _ => return Err(header_err(&format!("unsupported attribute type `{tail}`"))),
        }
    };
    Ok(KeelAttribute {
        name: name.to_string(),
        kind,
    })
}

fn name_list(rest: &str) -> Vec<String> {
    rest.split(',')
        .map(|s| strip_quotes(s).to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Parses a KEEL `.dat` file.
pub fn parse_keel(text: &str) -> Result<Dataset> {
    let mut relation = None;
    let mut attributes: Vec<KeelAttribute> = Vec::new();
    let mut inputs: Option<Vec<String>> = None;
    let mut output: Option<String> = None;
    let mut data_start = None;

    let lines: Vec<&str> = text.lines().collect();
    for (idx, raw) in lines.iter().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let line_no = idx + 1;
        let (keyword, rest) = match line.find(char::is_whitespace) {
            Some(pos) => (&line[..pos], &line[pos..]),
            None => (line, ""),
        };
        match keyword.to_ascii_lowercase().as_str() {
            "@relation" => relation = Some(strip_quotes(rest).to_string()),
            "@attribute" => attributes.push(parse_attribute(line_no, rest)?),
            "@inputs" | "@input" => inputs = Some(name_list(rest)),
            "@outputs" | "@output" => {
                let names = name_list(rest);
                if names.len() != 1 {
                    return Err(Error::Header {
                        line: line_no,
                        message: format!("expected one output attribute, found {}", names.len()),
                    });
                }
                output = names.into_iter().next();
            }
            "@data" => {
                data_start = Some(idx + 1);
                break;
            }
            _ => {
                return Err(Error::Header {
                    line: line_no,
                    message: format!("unexpected line `{line}`"),
                })
            }
        }
    }

    let relation = relation.ok_or_else(|| Error::Header {
        line: 1,
        message: "missing @relation".into(),
    })?;
    let data_start = data_start.ok_or_else(|| Error::Header {
        line: lines.len(),
        message: "missing @data section".into(),
    })?;
    if attributes.len() < 2 {
        return Err(Error::Header {
            line: data_start,
            message: "need at least one input and one output attribute".into(),
        });
    }

    let position = |name: &str| {
        attributes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let output_idx = match &output {
        Some(name) => position(name)?,
        None => attributes.len() - 1,
    };
    let input_idx: Vec<usize> = match &inputs {
        Some(names) => names.iter().map(|n| position(n)).collect::<Result<_>>()?,
        None => (0..attributes.len()).filter(|&i| i != output_idx).collect(),
    };
    if input_idx.contains(&output_idx) {
        return Err(Error::Header {
            line: data_start,
            message: "the output attribute is also listed as an input".into(),
        });
    }

    let mut rows: Vec<Vec<&str>> = Vec::new();
    let mut classes: Vec<String> = Vec::new();
    for raw in &lines[data_start..] {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let row_idx = rows.len();
        let tokens: Vec<&str> = line.split(',').map(strip_quotes).collect();
        if tokens.len() != attributes.len() {
            return Err(Error::Arity {
                row: row_idx,
                expected: attributes.len(),
                found: tokens.len(),
            });
        }
        let class = tokens[output_idx];
        if is_missing(class) {
            return Err(Error::MissingValue {
                row: row_idx,
                column: attributes[output_idx].name.clone(),
            });
        }
        classes.push(class.to_string());
        rows.push(input_idx.iter().map(|&i| tokens[i]).collect());
    }

    let encoder = Encoder {
        names: input_idx.iter().map(|&i| attributes[i].name.clone()).collect(),
        kinds: input_idx.iter().map(|&i| attributes[i].kind.clone()).collect(),
    };
    let features = encoder.encode(&rows)?;
    Dataset::from_classes(
        relation,
        features,
        &classes,
        encoder.output_names(),
        attributes[output_idx].name.clone(),
    )
}

/// Parses CSV text with a header row; `label_column` names the class column.
///
/// A column holding at least one number is numeric and every cell must parse;
/// a column with no numeric cell is nominal and gets one-hot encoded with its
/// values in sorted order.
pub fn parse_csv(text: &str, label_column: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingColumn(label_column.to_string()))?;
    let records: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>()?;

    let input_idx: Vec<usize> = (0..header.len()).filter(|&i| i != label_idx).collect();
    let mut rows: Vec<Vec<&str>> = Vec::with_capacity(records.len());
    let mut classes = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        if rec.len() != header.len() {
            return Err(Error::Arity {
                row: r,
                expected: header.len(),
                found: rec.len(),
            });
        }
        let class = &rec[label_idx];
        if is_missing(class) {
            return Err(Error::MissingValue {
                row: r,
                column: label_column.to_string(),
            });
        }
        classes.push(class.to_string());
        rows.push(input_idx.iter().map(|&i| &rec[i]).collect());
    }

    let kinds = (0..input_idx.len())
        .map(|c| {
            let present = rows.iter().map(|row| row[c]).filter(|t| !is_missing(t));
            if present.clone().any(|t| parse_number(t).is_some()) {
                ColumnKind::Numeric
            } else {
                let values: BTreeSet<&str> = present.collect();
                ColumnKind::Nominal(values.into_iter().map(str::to_string).collect())
            }
        })
        .collect();
    let encoder = Encoder {
        names: input_idx.iter().map(|&i| header[i].clone()).collect(),
        kinds,
    };
    let features = encoder.encode(&rows)?;
    Dataset::from_classes(
        "dataset",
        features,
        &classes,
        encoder.output_names(),
        label_column,
    )
}

/// Writes the encoded features plus the raw class column as CSV.
pub fn serialize_csv(d: &Dataset) -> String {
    let mut out = String::new();
    let quote = |s: &str| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    };
    let header: Vec<String> = d
        .feature_names()
        .iter()
        .chain(std::iter::once(&d.target_name))
        .map(|s| quote(s))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (row, &y) in d.features.rows().into_iter().zip(&d.labels) {
        for v in row {
            let _ = write!(out, "{v},");
        }
        out.push_str(&quote(&d.class_names[y as usize]));
        out.push('\n');
    }
    out
}

/// Loads a `.dat` (KEEL) or `.csv` file; CSV needs the label column name.
pub fn load_path(path: &Path, label_column: &str) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let d = if is_csv {
        parse_csv(&text, label_column)?
    } else {
        parse_keel(&text)?
    };
    Ok(d.with_name(stem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SMALL_KEEL: &str = "@relation toy
@attribute a real [0.0, 1.0]
@attribute color {red, green, blue}
@attribute Class {positive, negative}
@inputs a, color
@outputs Class
@data
0.1, red, negative
0.2, green, negative
0.3, blue, negative
0.9, red, positive
";

    #[test]
    fn keel_role_mapping() {
        let d = parse_keel(SMALL_KEEL).unwrap();
        assert_eq!(d.name(), "toy");
        assert_eq!(d.labels(), &[0, 0, 0, 1]);
        assert_eq!(d.class_names(), &["negative".to_string(), "positive".to_string()]);
        assert_eq!(
            d.feature_names(),
            &["a", "color=red", "color=green", "color=blue"]
        );
    }

    #[test]
    fn one_hot_columns_sum_to_one() {
        let d = parse_keel(SMALL_KEEL).unwrap();
        for row in d.features().rows() {
            let s: f64 = row.iter().skip(1).sum();
            assert_eq!(s, 1.0);
        }
        assert_eq!(d.n_rows(), 4);
    }

    #[test]
    fn equal_counts_smaller_name_is_minority() {
        let mut text = String::from("@relation tie\n@attribute x real\n@attribute y {b, a}\n@data\n");
        for i in 0..5 {
            text.push_str(&format!("{i}, a\n{i}.5, b\n"));
        }
        let d = parse_keel(&text).unwrap();
        assert_eq!(d.class_names()[1], "a");
        assert_eq!(d.summary().imbalance_ratio, 1.0);
    }

    #[test]
    fn keel_errors() {
        let missing = SMALL_KEEL.replace("0.2, green", "?, green");
        match parse_keel(&missing) {
            Err(Error::MissingValue { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
        let arity = SMALL_KEEL.replace("0.3, blue, negative", "0.3, negative");
        assert!(matches!(parse_keel(&arity), Err(Error::Arity { row: 2, .. })));
        let three = SMALL_KEEL.replace("0.3, blue, negative", "0.3, blue, other");
        assert!(matches!(parse_keel(&three), Err(Error::NotBinary { found: 3, .. })));
        let no_data = SMALL_KEEL.replace("@data", "");
        assert!(matches!(parse_keel(&no_data), Err(Error::Header { .. })));
        let bad_type = SMALL_KEEL.replace("a real [0.0, 1.0]", "a string");
        assert!(matches!(parse_keel(&bad_type), Err(Error::Header { line: 2, .. })));
    }

    #[test]
    fn keel_singular_output_keyword() {
        let text = SMALL_KEEL
            .replace("@inputs a, color\n", "")
            .replace("@outputs", "@output");
        assert_eq!(parse_keel(&text).unwrap().labels(), &[0, 0, 0, 1]);
    }

    fn csv_text(labels: &[&str]) -> String {
        let mut s = String::from("x1,x2,x3,label\n");
        for (i, l) in labels.iter().enumerate() {
            s.push_str(&format!("{i},{}.5,{},{l}\n", i * 2, 10 - i));
        }
        s
    }

    #[test]
    fn csv_counts() {
        let labels = ["n", "n", "y", "n", "n", "y", "n", "y", "n", "n"];
        let d = parse_csv(&csv_text(&labels), "label").unwrap();
        assert_eq!(d.summary().n_minority, 3);
        assert_eq!(d.summary().n_majority, 7);
        assert_eq!(d.n_features(), 3);
    }

    #[test]
    fn csv_errors() {
        let three = csv_text(&["a", "b", "c", "a"]);
        assert!(matches!(parse_csv(&three, "label"), Err(Error::NotBinary { found: 3, .. })));
        assert!(matches!(
            parse_csv(&csv_text(&["a", "b"]), "nope"),
            Err(Error::MissingColumn(_))
        ));
        let bad = "x,label\n1,a\nfoo,b\n2,a\n";
        assert!(matches!(parse_csv(bad, "label"), Err(Error::Numeric { row: 1, .. })));
        let missing = "x,label\n1,a\n?,b\n2,a\n";
        assert!(matches!(parse_csv(missing, "label"), Err(Error::MissingValue { row: 1, .. })));
    }

    #[test]
    fn csv_nominal_column_is_one_hot() {
        let text = "c,x,label\nu,1,a\nv,2,b\nu,3,a\n";
        let d = parse_csv(text, "label").unwrap();
        assert_eq!(d.feature_names(), &["c=u", "c=v", "x"]);
        assert_eq!(d.row(1).to_vec(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn summary_ratio() {
        let x = Array2::zeros((5, 1));
        let d = Dataset::new("t", x, vec![0, 0, 0, 0, 1], vec!["x".into()]).unwrap();
        assert_eq!(summarize(&d).imbalance_ratio, 4.0);
    }

    #[test]
    fn min_max_scaling() {
        let x = ndarray::array![[1.0, 5.0], [3.0, 5.0], [2.0, 5.0]];
        let d = Dataset::new("t", x, vec![0, 0, 1], vec!["a".into(), "b".into()]).unwrap();
        let s = d.min_max_scaled();
        assert_eq!(s.features().column(0).to_vec(), vec![0.0, 1.0, 0.5]);
        assert_eq!(s.features().column(1).to_vec(), vec![0.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            rows in prop::collection::vec((prop::collection::vec(-1e6f64..1e6, 3), any::<bool>()), 4..30)
        ) {
            prop_assume!(rows.iter().any(|r| r.1) && rows.iter().any(|r| !r.1));
            let mut text = String::from("f0,f1,f2,target\n");
            for (vals, pos) in &rows {
                let cls = if *pos { "yes" } else { "no" };
                text.push_str(&format!("{},{},{},{cls}\n", vals[0], vals[1], vals[2]));
            }
            let d = parse_csv(&text, "target").unwrap();
            let again = parse_csv(&serialize_csv(&d), "target").unwrap();
            prop_assert_eq!(&d, &again);
        }
    }
}
