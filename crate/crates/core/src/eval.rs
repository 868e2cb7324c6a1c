//! Confusion matrices against known classes, and the dominant-class accuracy.
//!
//! Accuracy sums, over clusters, the count of the class that dominates each
//! cluster, and divides by the number of records counted in the matrix. Two
//! clusters may share a dominant class.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("accuracy is undefined for an empty confusion matrix")]
    Undefined,
}

/// A confusion-matrix row: a cluster, or the pseudo-cluster of outliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RowId {
    Cluster(usize),
    Outlier,
}

impl fmt::Display for RowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowId::Cluster(c) => write!(f, "{}", c + 1),
            RowId::Outlier => f.write_str("OUTLIER"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub rows: Vec<RowId>,
    pub classes: Vec<String>,
    /// `counts[i][j]`: records of row `i` whose class is `classes[j]`.
    pub counts: Vec<Vec<usize>>,
    /// Records counted in the matrix.
    pub total: usize,
    /// Records in the dataset, counted or not.
    pub records: usize,
}

impl ConfusionMatrix {
    /// A matrix from given counts, rows numbered `1..`.
    pub fn from_counts(classes: &[&str], counts: Vec<Vec<usize>>, records: usize) -> Self {
        let total = counts.iter().flatten().sum();
        Self {
            rows: (0..counts.len()).map(RowId::Cluster).collect(),
            classes: classes.iter().map(|c| c.to_string()).collect(),
            counts,
            total,
            records,
        }
    }
}

/// Cross-tabulates cluster labels (`None` = outlier) against true classes.
/// Rows are clusters in ascending order, then the outlier row if requested;
/// columns are the distinct classes in lexicographic order.
pub fn confusion(
    labels: &[Option<usize>],
    truth: &[String],
    include_outliers: bool,
) -> Result<ConfusionMatrix, EvalError> {
    if labels.len() != truth.len() {
        return Err(EvalError::BadInput(format!(
            "{} labels but {} true classes",
            labels.len(),
            truth.len()
        )));
    }
    let classes: Vec<String> = truth
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let class_index: BTreeMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    let mut by_row: BTreeMap<RowId, Vec<usize>> = BTreeMap::new();
    for (label, class) in labels.iter().zip(truth) {
        let row = match label {
            Some(c) => RowId::Cluster(*c),
            None if include_outliers => RowId::Outlier,
            None => continue,
        };
        by_row.entry(row).or_insert_with(|| vec![0; classes.len()])[class_index[class.as_str()]] +=
            1;
    }
    let total = by_row.values().flatten().sum();
    let (rows, counts) = by_row.into_iter().unzip();
    Ok(ConfusionMatrix {
        rows,
        classes,
        counts,
        total,
        records: labels.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub error: f64,
    pub counted: usize,
    pub records: usize,
}

impl EvalReport {
    pub fn coverage(&self) -> f64 {
        if self.records == 0 {
            0.0
        } else {
            self.counted as f64 / self.records as f64
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "accuracy {:.3}, error {:.3}, coverage {}/{}",
            self.accuracy, self.error, self.counted, self.records
        )
    }
}

pub fn accuracy_error(m: &ConfusionMatrix) -> Result<EvalReport, EvalError> {
    if m.total == 0 {
        return Err(EvalError::Undefined);
    }
    let dominant: usize = m
        .counts
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    let accuracy = dominant as f64 / m.total as f64;
    Ok(EvalReport {
        accuracy,
        error: 1.0 - accuracy,
        counted: m.total,
        records: m.records,
    })
}

/// Rounds half away from zero to three decimals, as in a printed table.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// `record_id TAB cluster_or_OUTLIER`, one-based.
pub fn write_labels<W: Write>(out: &mut W, labels: &[Option<usize>]) -> std::io::Result<()> {
    for (i, label) in labels.iter().enumerate() {
        match label {
            Some(c) => writeln!(out, "{}\t{}", i + 1, c + 1)?,
            None => writeln!(out, "{}\tOUTLIER", i + 1)?,
        }
    }
    Ok(())
}

/// Parses [`write_labels`] output. Records must appear as `1..n` in order.
pub fn read_labels<R: BufRead>(source: R) -> Result<Vec<Option<usize>>, EvalError> {
    let mut labels = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line.map_err(|e| EvalError::BadInput(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| EvalError::BadInput(format!("labels line {}: {what}", i + 1));
        let (id, cluster) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected two fields"))?;
        let id: usize = id.trim().parse().map_err(|_| bad("bad record id"))?;
        if id != labels.len() + 1 {
            return Err(bad("record ids must be consecutive from 1"));
        }
        let cluster = cluster.trim();
        if cluster == "OUTLIER" {
            labels.push(None);
        } else {
            let c: usize = cluster.parse().map_err(|_| bad("bad cluster index"))?;
            if c == 0 {
                return Err(bad("cluster indices are one-based"));
            }
            labels.push(Some(c - 1));
        }
    }
    Ok(labels)
}
