//! Categorical table to link dataset conversion.
//!
//! Each attribute partitions the records into equivalence classes of equal
//! value. Every class becomes one link, so a table over `r` attributes
//! yields `sum_i |D_i|` links and each entity sits in exactly `r` of them.
//!
//! Entity indices are zero-based in memory; the text format written by
//! [`write_links`] uses one-based record numbers and one-based attributes.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::dataset::CategoricalTable;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("attribute {attribute} out of range 1..={r}")]
    BadAttribute { attribute: usize, r: usize },
    #[error("table has no records or no attributes")]
    EmptyTable,
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    /// Zero-based entity indices, ascending.
    pub members: Vec<usize>,
    /// One-based attribute the link came from.
    pub source_attribute: usize,
    pub source_value: String,
}

impl Link {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkDataset {
    n_entities: usize,
    links: Vec<Link>,
}

impl LinkDataset {
    /// Builds a dataset from raw member lists, e.g. for synthetic instances.
    /// Members are sorted and deduplicated; empty links and out-of-range
    /// entities are rejected.
    pub fn from_member_lists(
        n_entities: usize,
        lists: Vec<Vec<usize>>,
    ) -> Result<Self, TransformError> {
        let mut links = Vec::with_capacity(lists.len());
        for (i, mut members) in lists.into_iter().enumerate() {
            members.sort_unstable();
            members.dedup();
            if members.is_empty() || members.last().is_some_and(|&m| m >= n_entities) {
                return Err(TransformError::Parse {
                    line: i + 1,
                    reason: "link is empty or names an unknown entity".into(),
                });
            }
            links.push(Link {
                members,
                source_attribute: 0,
                source_value: String::new(),
            });
        }
        Ok(Self { n_entities, links })
    }

    /// `N_p`.
    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    /// `N_L`.
    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// For every entity, the indices of the links containing it.
    pub fn entity_links(&self) -> Vec<Vec<usize>> {
        let mut by_entity = vec![Vec::new(); self.n_entities];
        for (li, link) in self.links.iter().enumerate() {
            for &e in &link.members {
                by_entity[e].push(li);
            }
        }
        by_entity
    }
}

/// The partition of records induced by one attribute (one-based), classes
/// ordered by the first record that carries each value.
pub fn equivalence_classes(
    table: &CategoricalTable,
    attribute: usize,
) -> Result<Vec<Vec<usize>>, TransformError> {
    Ok(classes_with_values(table, attribute)?
        .into_iter()
        .map(|(_, members)| members)
        .collect())
}

fn classes_with_values(
    table: &CategoricalTable,
    attribute: usize,
) -> Result<Vec<(String, Vec<usize>)>, TransformError> {
    let r = table.r();
    if attribute == 0 || attribute > r {
        return Err(TransformError::BadAttribute { attribute, r });
    }
    let col = attribute - 1;
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut classes: Vec<(String, Vec<usize>)> = Vec::new();
    for (e, row) in table.records().iter().enumerate() {
        let token = row[col].as_str();
        let slot = *index.entry(token).or_insert_with(|| {
            classes.push((token.to_string(), Vec::new()));
            classes.len() - 1
        });
        classes[slot].1.push(e);
    }
    Ok(classes)
}

/// One link per (attribute, value) equivalence class, attribute-major.
pub fn to_link_dataset(table: &CategoricalTable) -> Result<LinkDataset, TransformError> {
    if table.n() == 0 || table.r() == 0 {
        return Err(TransformError::EmptyTable);
    }
    let mut links = Vec::new();
    for attribute in 1..=table.r() {
        for (value, members) in classes_with_values(table, attribute)? {
            links.push(Link {
                members,
                source_attribute: attribute,
                source_value: value,
            });
        }
    }
    Ok(LinkDataset {
        n_entities: table.n(),
        links,
    })
}

/// `attr_index TAB value TAB comma-separated entity ids`, one link per line,
/// ids one-based.
pub fn write_links<W: Write>(out: &mut W, links: &LinkDataset) -> std::io::Result<()> {
    for link in links.links() {
        let ids: Vec<String> = link.members.iter().map(|e| (e + 1).to_string()).collect();
        writeln!(
            out,
            "{}\t{}\t{}",
            link.source_attribute,
            link.source_value,
            ids.join(",")
        )?;
    }
    Ok(())
}

/// Reads the format produced by [`write_links`]. `n_entities` defaults to the
/// largest id seen when not supplied.
pub fn read_links<R: BufRead>(
    source: R,
    n_entities: Option<usize>,
) -> Result<LinkDataset, TransformError> {
    let mut links = Vec::new();
    let mut max_id = 0usize;
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| TransformError::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let mut parts = line.splitn(3, '\t');
        let (Some(attr), Some(value), Some(ids)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(bad("expected three tab-separated fields"));
        };
        let source_attribute = attr
            .trim()
            .parse()
            .map_err(|_| bad("bad attribute index"))?;
        let mut members = Vec::new();
        for id in ids.split(',') {
            let id: usize = id.trim().parse().map_err(|_| bad("bad entity id"))?;
            if id == 0 {
                return Err(bad("entity ids are one-based"));
            }
            max_id = max_id.max(id);
            members.push(id - 1);
        }
        members.sort_unstable();
        members.dedup();
        links.push(Link {
            members,
            source_attribute,
            source_value: value.to_string(),
        });
    }
    let n_entities = n_entities.unwrap_or(max_id);
    if max_id > n_entities {
        return Err(TransformError::Parse {
            line: 0,
            reason: format!("entity id {max_id} exceeds entity count {n_entities}"),
        });
    }
    Ok(LinkDataset { n_entities, links })
}
