//! Delimited categorical data ingestion.
//!
//! Every token is kept as an opaque string: a column of `1..10` codes is as
//! categorical as a column of `x`/`b`/`s` codes. The class column, when one is
//! configured, is split off before any attribute statistics are computed.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("input contains no data rows")]
    EmptyInput,
    #[error("line {line}: expected {expected} fields, found {found}")]
    MalformedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("bad ingest configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which raw column (if any) carries the true class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassColumn {
    #[default]
    None,
    First,
    Last,
    /// Zero-based position in the raw row.
    Index(usize),
}

impl ClassColumn {
    fn resolve(self, width: usize) -> Result<Option<usize>, DatasetError> {
        match self {
            ClassColumn::None => Ok(None),
            ClassColumn::First => Ok(Some(0)),
            ClassColumn::Last => Ok(Some(width - 1)),
            ClassColumn::Index(i) if i < width => Ok(Some(i)),
            ClassColumn::Index(i) => Err(DatasetError::BadConfig(format!(
                "class column {i} out of range for rows of {width} fields"
            ))),
        }
    }
}

impl std::str::FromStr for ClassColumn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(ClassColumn::None),
            "first" => Ok(ClassColumn::First),
            "last" => Ok(ClassColumn::Last),
            other => other
                .parse::<usize>()
                .map(ClassColumn::Index)
                .map_err(|_| format!("expected first|last|none|INDEX, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// The missing token becomes a category of its own.
    #[default]
    KeepAsCategory,
    /// Rows with a missing attribute value are discarded.
    DropRow,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub delimiter: char,
    pub class_column: ClassColumn,
    pub missing_token: String,
    pub missing_policy: MissingPolicy,
    /// Treat the first non-blank line as attribute names.
    pub has_header: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            delimiter: ',',
            class_column: ClassColumn::None,
            missing_token: "?".to_string(),
            missing_policy: MissingPolicy::KeepAsCategory,
            has_header: false,
        }
    }
}

/// `n` records over `r` categorical attributes.
///
/// Record `i` (zero-based) is the `i`-th data row kept from the source, so
/// record order always follows source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalTable {
    records: Vec<Vec<String>>,
    attribute_names: Vec<String>,
    domains: Vec<BTreeSet<String>>,
}

impl CategoricalTable {
    /// Builds a table from rows, checking that every row has the same arity.
    pub fn new(
        attribute_names: Vec<String>,
        records: Vec<Vec<String>>,
    ) -> Result<Self, DatasetError> {
        let r = attribute_names.len();
        for (i, row) in records.iter().enumerate() {
            if row.len() != r {
                return Err(DatasetError::MalformedRow {
                    line: i + 1,
                    expected: r,
                    found: row.len(),
                });
            }
        }
        let domains = compute_domains(&records, r);
        Ok(Self {
            records,
            attribute_names,
            domains,
        })
    }

    /// Convenience constructor with generated attribute names `A1..Ar`.
    pub fn from_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self, DatasetError> {
        let r = rows.first().map_or(0, Vec::len);
        let names = (1..=r).map(|i| format!("A{i}")).collect();
        let records = rows
            .iter()
            .map(|row| row.iter().map(|t| t.as_ref().to_string()).collect())
            .collect();
        Self::new(names, records)
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn r(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn records(&self) -> &[Vec<String>] {
        &self.records
    }

    pub fn record(&self, i: usize) -> &[String] {
        &self.records[i]
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn domains(&self) -> &[BTreeSet<String>] {
        &self.domains
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn compute_domains(records: &[Vec<String>], r: usize) -> Vec<BTreeSet<String>> {
    let mut domains = vec![BTreeSet::new(); r];
    for row in records {
        for (domain, token) in domains.iter_mut().zip(row) {
            if !domain.contains(token) {
                domain.insert(token.clone());
            }
        }
    }
    domains
}

/// Per-attribute domains, in attribute order.
pub fn attribute_domains(table: &CategoricalTable) -> Vec<BTreeSet<String>> {
    table.domains.clone()
}

/// A table together with the optional class label of each record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub table: CategoricalTable,
    pub labels: Option<Vec<String>>,
    pub class_name: Option<String>,
}

impl LabeledDataset {
    pub fn unlabeled(table: CategoricalTable) -> Self {
        Self {
            table,
            labels: None,
            class_name: None,
        }
    }
}

/// Reads a delimited categorical file.
///
/// Blank lines are skipped; tokens are trimmed of surrounding whitespace.
pub fn load_table<R: BufRead>(
    source: R,
    opts: &IngestOptions,
) -> Result<LabeledDataset, DatasetError> {
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    let mut width: Option<usize> = None;

    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line
            .split(opts.delimiter)
            .map(|t| t.trim().to_string())
            .collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(DatasetError::MalformedRow {
                    line: lineno + 1,
                    expected: w,
                    found: fields.len(),
                })
            }
            Some(_) => {}
        }
        if opts.has_header && header.is_none() {
            header = Some(fields);
        } else {
            rows.push((lineno + 1, fields));
        }
    }

    let width = width.ok_or(DatasetError::EmptyInput)?;
    if rows.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let class_pos = opts.class_column.resolve(width)?;
    if class_pos.is_some() && width < 2 {
        return Err(DatasetError::BadConfig(
            "class column leaves no attributes to cluster on".into(),
        ));
    }

    let names: Vec<String> = match &header {
        Some(h) => h.clone(),
        None => (1..=width).map(|i| format!("A{i}")).collect(),
    };
    let class_name = class_pos.map(|c| names[c].clone());
    let attribute_names: Vec<String> = names
        .into_iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != class_pos)
        .map(|(_, n)| n)
        .collect();

    let mut records = Vec::with_capacity(rows.len());
    let mut labels = class_pos.map(|_| Vec::with_capacity(rows.len()));
    for (_, mut fields) in rows {
        let label = class_pos.map(|c| fields.remove(c));
        if opts.missing_policy == MissingPolicy::DropRow && fields.contains(&opts.missing_token) {
            continue;
        }
        if let (Some(labels), Some(label)) = (labels.as_mut(), label) {
            labels.push(label);
        }
        records.push(fields);
    }
    if records.is_empty() {
        return Err(DatasetError::EmptyInput);
    }

    let table = CategoricalTable::new(attribute_names, records)?;
    Ok(LabeledDataset {
        table,
        labels,
        class_name,
    })
}

/// Writes a dataset back out in the same delimited layout `load_table`
/// reads, with the class (if any) as the last column and a header line
/// when `header` is set.
pub fn write_table<W: Write>(
    out: &mut W,
    data: &LabeledDataset,
    delimiter: char,
    header: bool,
) -> std::io::Result<()> {
    let sep = delimiter.to_string();
    if header {
        let mut names = data.table.attribute_names().to_vec();
        if data.labels.is_some() {
            names.push(data.class_name.clone().unwrap_or_else(|| "class".into()));
        }
        writeln!(out, "{}", names.join(&sep))?;
    }
    for (i, row) in data.table.records().iter().enumerate() {
        write!(out, "{}", row.join(&sep))?;
        if let Some(labels) = &data.labels {
            write!(out, "{sep}{}", labels[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}
