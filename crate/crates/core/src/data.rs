//! Loading benchmark datasets from delimited text into instances.
//!
//! A [`DatasetSpec`] names the feature columns, where the group label comes
//! from and how raw values map to groups. Every loaded point is both a client
//! and a candidate facility; distances are Euclidean on the (optionally
//! standardized) features and each group is weighted uniformly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, ModelError};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("column {0:?} not found")]
    MissingColumn(String),
    #[error("row {row}: group value {value:?} has no mapping")]
    UnmappedGroup { row: usize, value: String },
    #[error("row {row}: column {column:?} value {value:?} is not numeric")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("invalid dataset spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Where the raw group value of a row comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSource {
    /// The value of a single column.
    Column(String),
    /// The name of the one indicator column that is nonzero.
    OneHot(Vec<String>),
}

/// Keep only rows whose `column` value is one of `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFilter {
    pub column: String,
    pub values: Vec<String>,
}

fn default_delimiter() -> char {
    ','
}

fn default_subsample() -> Option<usize> {
    Some(500)
}

fn default_true() -> bool {
    true
}

fn default_p() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    /// Relative paths resolve against the spec file's directory.
    pub path: PathBuf,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_true")]
    pub has_header: bool,
    /// Column names for files without a header row.
    #[serde(default)]
    pub column_names: Option<Vec<String>>,
    pub feature_columns: Vec<String>,
    pub group_source: GroupSource,
    /// Raw value to group label.
    pub group_mapping: BTreeMap<String, String>,
    /// Group order; sorted distinct labels when absent.
    #[serde(default)]
    pub group_labels: Option<Vec<String>>,
    #[serde(default)]
    pub filter: Option<RowFilter>,
    /// Keep the first N rows (after filtering).
    #[serde(default = "default_subsample")]
    pub subsample: Option<usize>,
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub instance: Instance,
    pub feature_names: Vec<String>,
    /// Constant columns removed before standardization.
    pub dropped_columns: Vec<String>,
    pub group_labels: Vec<String>,
    pub group_sizes: Vec<usize>,
}

impl DatasetSpec {
    pub fn from_json_str(s: &str) -> Result<Self, DataError> {
        serde_json::from_str(s).map_err(|e| DataError::Spec(e.to_string()))
    }

    /// Reads a spec and resolves its data path against the spec's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut spec = Self::from_json_str(&text)?;
        if spec.path.is_relative() {
            if let Some(dir) = path.parent() {
                spec.path = dir.join(&spec.path);
            }
        }
        Ok(spec)
    }

    fn labels(&self) -> Vec<String> {
        match &self.group_labels {
            Some(l) => l.clone(),
            None => {
                let mut l: Vec<String> = self.group_mapping.values().cloned().collect();
                l.sort();
                l.dedup();
                l
            }
        }
    }
}

pub fn load(spec: &DatasetSpec) -> Result<LoadedDataset, DataError> {
    let file = std::fs::File::open(&spec.path).map_err(|source| DataError::Io {
        path: spec.path.clone(),
        source,
    })?;
    load_from_reader(spec, file)
}

pub fn load_from_reader(spec: &DatasetSpec, reader: impl std::io::Read) -> Result<LoadedDataset, DataError> {
    if !spec.delimiter.is_ascii() {
        return Err(DataError::Spec("delimiter must be a single ASCII character".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter as u8)
        .has_headers(spec.has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = match (&spec.column_names, spec.has_header) {
        (Some(names), _) => names.clone(),
        (None, true) => rdr
            .headers()
            .map_err(|e| DataError::Malformed {
                row: 0,
                message: e.to_string(),
            })?
            .iter()
            .map(str::to_string)
            .collect(),
        (None, false) => return Err(DataError::Spec("column_names required without a header".into())),
    };
    // First occurrence wins for duplicated header names.
    let col = |name: &str| -> Result<usize, DataError> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let features: Vec<usize> = spec.feature_columns.iter().map(|c| col(c)).collect::<Result<_, _>>()?;
    let group_cols: Vec<(usize, String)> = match &spec.group_source {
        GroupSource::Column(c) => vec![(col(c)?, c.clone())],
        GroupSource::OneHot(cs) => cs.iter().map(|c| Ok((col(c)?, c.clone()))).collect::<Result<_, DataError>>()?,
    };
    let filter = match &spec.filter {
        Some(f) => Some((col(&f.column)?, &f.values)),
        None => None,
    };
    let labels = spec.labels();
    if labels.is_empty() {
        return Err(DataError::Spec("no group labels".into()));
    }
    for l in spec.group_mapping.values() {
        if !labels.contains(l) {
            return Err(DataError::Spec(format!("mapping target {l:?} is not a listed group label")));
        }
    }

    let limit = spec.subsample.unwrap_or(usize::MAX);
    let first_row = if spec.has_header { 2 } else { 1 };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut label_of: Vec<usize> = Vec::new();
    for (pos, rec) in rdr.records().enumerate() {
        if rows.len() >= limit {
            break;
        }
        let row = pos + first_row;
        let rec = rec.map_err(|e| DataError::Malformed {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(DataError::Malformed {
                row,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        if let Some((c, values)) = filter {
            if !values.iter().any(|v| v == &rec[c]) {
                continue;
            }
        }
        let raw = match &spec.group_source {
            GroupSource::Column(_) => rec[group_cols[0].0].to_string(),
            GroupSource::OneHot(_) => {
                let hot: Vec<&String> = group_cols
                    .iter()
                    .filter(|(c, _)| rec[*c].parse::<f64>().map(|v| v != 0.0).unwrap_or(false))
                    .map(|(_, name)| name)
                    .collect();
                if hot.len() != 1 {
                    return Err(DataError::Malformed {
                        row,
                        message: format!("{} indicator columns set, expected one", hot.len()),
                    });
                }
                hot[0].clone()
            }
        };
        let label = spec
            .group_mapping
            .get(&raw)
            .ok_or(DataError::UnmappedGroup { row, value: raw.clone() })?;
        label_of.push(labels.iter().position(|l| l == label).expect("checked above"));
        let values = features
            .iter()
            .zip(&spec.feature_columns)
            .map(|(&c, name)| {
                rec[c].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| DataError::NonNumeric {
                    row,
                    column: name.clone(),
                    value: rec[c].to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(DataError::Spec("no rows loaded".into()));
    }

    let mut feature_names = spec.feature_columns.clone();
    let mut dropped_columns = Vec::new();
    if spec.standardize {
        let (kept, dropped) = standardize(&mut rows);
        dropped_columns = dropped.iter().map(|&c| feature_names[c].clone()).collect();
        for name in &dropped_columns {
            log::warn!("{}: dropping constant column {name}", spec.name);
        }
        feature_names = kept.iter().map(|&c| feature_names[c].clone()).collect();
    }

    let n = rows.len();
    let group_sizes: Vec<usize> = (0..labels.len()).map(|s| label_of.iter().filter(|&&l| l == s).count()).collect();
    let groups = (0..labels.len())
        .map(|s| (0..n).filter(|&i| label_of[i] == s).map(|i| (i, None)).collect())
        .collect();
    let all: Vec<usize> = (0..n).collect();
    let mut instance = Instance::euclidean(rows, all.clone(), all, groups, 1, spec.p)?;
    instance.set_name(spec.name.clone());
    Ok(LoadedDataset {
        instance,
        feature_names,
        dropped_columns,
        group_labels: labels,
        group_sizes,
    })
}

/// Z-scores every column in place (population variance) and removes constant
/// columns. Returns the kept and dropped column indices.
pub fn standardize(rows: &mut [Vec<f64>]) -> (Vec<usize>, Vec<usize>) {
    let n = rows.len() as f64;
    let dim = rows.first().map_or(0, Vec::len);
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut stats = Vec::new();
    for c in 0..dim {
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
        if var > 0.0 {
            kept.push(c);
            stats.push((mean, var.sqrt()));
        } else {
            dropped.push(c);
        }
    }
    for r in rows.iter_mut() {
        *r = kept.iter().zip(&stats).map(|(&c, &(mean, sd))| (r[c] - mean) / sd).collect();
    }
    (kept, dropped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_spec() -> DatasetSpec {
        DatasetSpec::from_json_str(
            r#"{
                "name": "toy",
                "path": "toy.csv",
                "feature_columns": ["x", "y"],
                "group_source": {"column": "g"},
                "group_mapping": {"a": "a", "b": "b"},
                "standardize": false
            }"#,
        )
        .unwrap()
    }

    const TOY: &str = "x,y,g\n0,0,a\n3,4,b\n6,8,a\n";

    #[test]
    fn toy_file_loads() {
        let d = load_from_reader(&toy_spec(), TOY.as_bytes()).unwrap();
        let inst = &d.instance;
        assert_eq!(inst.num_clients(), 3);
        assert_eq!(inst.num_facilities(), 3);
        assert_eq!(d.group_sizes, vec![2, 1]);
        for g in inst.groups() {
            assert!((g.total_weight() - 1.0).abs() < 1e-12);
        }
        assert_eq!(inst.dist(0, 1), 5.0);
    }

    #[test]
    fn unmapped_and_non_numeric_report_rows() {
        let err = load_from_reader(&toy_spec(), "x,y,g\n0,0,a\n1,1,c\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::UnmappedGroup { row: 3, .. }));
        let err = load_from_reader(&toy_spec(), "x,y,g\n0,zz,a\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::NonNumeric { row: 2, .. }));
        let err = load_from_reader(&toy_spec(), "x,y,g\n0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::Malformed { row: 2, .. }));
    }

    #[test]
    fn missing_column_and_file() {
        let mut spec = toy_spec();
        spec.feature_columns.push("z".into());
        assert!(matches!(
            load_from_reader(&spec, TOY.as_bytes()),
            Err(DataError::MissingColumn(c)) if c == "z"
        ));
        spec.path = "/nonexistent/file.csv".into();
        assert!(matches!(load(&spec), Err(DataError::Io { .. })));
    }

    #[test]
    fn filter_subsample_and_one_hot() {
        let spec = DatasetSpec::from_json_str(
            r#"{
                "name": "hot",
                "path": "x",
                "feature_columns": ["v"],
                "group_source": {"one_hot": ["E1", "E2"]},
                "group_mapping": {"E1": "hi", "E2": "lo"},
                "filter": {"column": "keep", "values": ["y"]},
                "subsample": 2,
                "standardize": false
            }"#,
        )
        .unwrap();
        let text = "v,E1,E2,keep\n1,1,0,n\n2,0,1,y\n3,1,0,y\n4,1,0,y\n";
        let d = load_from_reader(&spec, text.as_bytes()).unwrap();
        assert_eq!(d.instance.num_clients(), 2);
        assert_eq!(d.group_labels, vec!["hi", "lo"]);
        assert_eq!(d.group_sizes, vec![1, 1]);
        assert_eq!(d.instance.dist(0, 1), 1.0);
    }

    #[test]
    fn standardized_columns_have_unit_variance() {
        let mut rows = vec![vec![1.0, 5.0, 2.0], vec![2.0, 5.0, 4.0], vec![6.0, 5.0, 9.0]];
        let (kept, dropped) = standardize(&mut rows);
        assert_eq!(kept, vec![0, 2]);
        assert_eq!(dropped, vec![1]);
        for c in 0..2 {
            let mean: f64 = rows.iter().map(|r| r[c]).sum::<f64>() / 3.0;
            let var: f64 = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / 3.0;
            assert!(mean.abs() < 1e-9 && (var - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn headerless_file_uses_column_names() {
        let mut spec = toy_spec();
        spec.has_header = false;
        spec.column_names = Some(vec!["x".into(), "y".into(), "g".into()]);
        let d = load_from_reader(&spec, "0,0,a\n3,4,b\n".as_bytes()).unwrap();
        assert_eq!(d.instance.num_clients(), 2);
    }
}
