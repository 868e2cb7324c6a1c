//! Reference categorical clusterers: batch k-modes and one-pass Squeezer.
//!
//! Both are deterministic functions of record order and their parameters.
//! Cluster labels are zero-based.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::dataset::CategoricalTable;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("no threshold on the search grid yields {target} clusters")]
    NotFound { target: usize },
}

/// Tokens replaced by per-attribute integer codes, in first-seen order.
struct Encoded {
    rows: Vec<Vec<u32>>,
    cardinality: Vec<usize>,
}

impl Encoded {
    fn new(table: &CategoricalTable) -> Self {
        let r = table.r();
        let mut maps: Vec<HashMap<&str, u32>> = vec![HashMap::new(); r];
        let rows = table
            .records()
            .iter()
            .map(|row| {
                row.iter()
                    .zip(maps.iter_mut())
                    .map(|(tok, map)| {
                        let next = map.len() as u32;
                        *map.entry(tok.as_str()).or_insert(next)
                    })
                    .collect()
            })
            .collect();
        let cardinality = maps.iter().map(HashMap::len).collect();
        Self { rows, cardinality }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KModesConfig {
    pub k: usize,
    pub max_iters: usize,
}

impl KModesConfig {
    pub fn new(k: usize) -> Self {
        Self { k, max_iters: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KModesResult {
    pub labels: Vec<usize>,
    pub modes: Vec<Vec<String>>,
    pub iterations: usize,
    /// Total mismatches between records and their cluster's mode.
    pub cost: usize,
}

fn mismatches(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Batch k-modes seeded with the first `k` distinct records.
pub fn kmodes(
    table: &CategoricalTable,
    config: &KModesConfig,
) -> Result<KModesResult, BaselineError> {
    let k = config.k;
    if k == 0 {
        return Err(BaselineError::BadConfig("k must be at least 1".into()));
    }
    let enc = Encoded::new(table);
    let mut modes: Vec<Vec<u32>> = Vec::with_capacity(k);
    for row in &enc.rows {
        if modes.len() == k {
            break;
        }
        if !modes.contains(row) {
            modes.push(row.clone());
        }
    }
    if modes.len() < k {
        return Err(BaselineError::BadConfig(format!(
            "k={k} exceeds the {} distinct records",
            modes.len()
        )));
    }

    let assign = |modes: &[Vec<u32>]| -> Vec<usize> {
        enc.rows
            .iter()
            .map(|row| {
                let mut best = 0;
                let mut best_d = usize::MAX;
                for (c, mode) in modes.iter().enumerate() {
                    let d = mismatches(row, mode);
                    if d < best_d {
                        best = c;
                        best_d = d;
                    }
                }
                best
            })
            .collect()
    };

    let mut labels: Vec<usize> = Vec::new();
    let mut iterations = 0;
    while iterations < config.max_iters.max(1) {
        let next = assign(&modes);
        iterations += 1;
        if next == labels {
            break;
        }
        labels = next;
        update_modes(&enc, &labels, &mut modes);
    }

    let cost = enc
        .rows
        .iter()
        .zip(&labels)
        .map(|(row, &c)| mismatches(row, &modes[c]))
        .sum();
    let decode = decoder(table);
    let modes = modes
        .iter()
        .map(|m| {
            m.iter()
                .enumerate()
                .map(|(j, &v)| decode[j][v as usize].clone())
                .collect()
        })
        .collect();
    Ok(KModesResult {
        labels,
        modes,
        iterations,
        cost,
    })
}

/// Most frequent value per attribute among members; ties go to the value
/// seen first among the members in record order. Empty clusters keep their
/// mode.
fn update_modes(enc: &Encoded, labels: &[usize], modes: &mut [Vec<u32>]) {
    let r = enc.cardinality.len();
    for (c, mode) in modes.iter_mut().enumerate() {
        for j in 0..r {
            let mut counts = vec![0usize; enc.cardinality[j]];
            let mut first_seen: Vec<u32> = Vec::new();
            for (row, _) in enc.rows.iter().zip(labels).filter(|(_, &l)| l == c) {
                let v = row[j];
                if counts[v as usize] == 0 {
                    first_seen.push(v);
                }
                counts[v as usize] += 1;
            }
            let mut best: Option<(u32, usize)> = None;
            for v in first_seen {
                let n = counts[v as usize];
                if best.is_none_or(|(_, bn)| n > bn) {
                    best = Some((v, n));
                }
            }
            if let Some((v, _)) = best {
                mode[j] = v;
            }
        }
    }
}

fn decoder(table: &CategoricalTable) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new(); table.r()];
    let mut seen: Vec<HashMap<&str, ()>> = vec![HashMap::new(); table.r()];
    for row in table.records() {
        for (j, tok) in row.iter().enumerate() {
            if seen[j].insert(tok.as_str(), ()).is_none() {
                out[j].push(tok.clone());
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezerConfig {
    pub threshold: f64,
}

/// One-pass Squeezer. A record joins the existing cluster with the highest
/// support-sum similarity `sum_j |{u in C : u_j = t_j}| / |C|` if that
/// similarity reaches the threshold (earliest cluster on ties), and founds a
/// new cluster otherwise.
pub fn squeezer(
    table: &CategoricalTable,
    config: &SqueezerConfig,
) -> Result<Vec<usize>, BaselineError> {
    if config.threshold.is_nan() || config.threshold < 0.0 {
        return Err(BaselineError::BadConfig("threshold must be >= 0".into()));
    }
    if table.is_empty() {
        return Err(BaselineError::BadConfig("table has no records".into()));
    }
    let enc = Encoded::new(table);
    Ok(squeeze_encoded(&enc, config.threshold))
}

struct Summary {
    size: usize,
    counts: Vec<Vec<u32>>,
}

fn squeeze_encoded(enc: &Encoded, threshold: f64) -> Vec<usize> {
    let mut clusters: Vec<Summary> = Vec::new();
    let mut labels = Vec::with_capacity(enc.rows.len());
    for row in &enc.rows {
        let mut best: Option<(usize, f64)> = None;
        for (c, summary) in clusters.iter().enumerate() {
            let support: u64 = row
                .iter()
                .zip(&summary.counts)
                .map(|(&v, counts)| counts[v as usize] as u64)
                .sum();
            let sim = support as f64 / summary.size as f64;
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((c, sim));
            }
        }
        let target = match best {
            Some((c, sim)) if sim >= threshold => c,
            _ => {
                clusters.push(Summary {
                    size: 0,
                    counts: enc.cardinality.iter().map(|&d| vec![0; d]).collect(),
                });
                clusters.len() - 1
            }
        };
        let summary = &mut clusters[target];
        summary.size += 1;
        for (&v, counts) in row.iter().zip(summary.counts.iter_mut()) {
            counts[v as usize] += 1;
        }
        labels.push(target);
    }
    labels
}

/// The threshold grid `{0, 0.05 r, 0.10 r, ..., r}`.
pub fn threshold_grid(r: usize) -> Vec<f64> {
    (0..=20).map(|i| (i * r) as f64 / 20.0).collect()
}

/// First grid threshold for which Squeezer produces exactly `k_target`
/// clusters.
pub fn find_threshold_for_k(
    table: &CategoricalTable,
    k_target: usize,
) -> Result<f64, BaselineError> {
    if k_target == 0 {
        return Err(BaselineError::BadConfig(
            "target cluster count must be >= 1".into(),
        ));
    }
    if table.is_empty() {
        return Err(BaselineError::BadConfig("table has no records".into()));
    }
    let enc = Encoded::new(table);
    for s in threshold_grid(table.r()) {
        let labels = squeeze_encoded(&enc, s);
        let count = labels.iter().max().map_or(0, |m| m + 1);
        if count == k_target {
            return Ok(s);
        }
    }
    Err(BaselineError::NotFound { target: k_target })
}
