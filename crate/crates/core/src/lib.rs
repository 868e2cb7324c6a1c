//! Categorical data clustering by way of link (group) detection.
//!
//! A categorical table is rewritten as a set of links, one per
//! attribute-value equivalence class ([`transform`]). Groups of entities are
//! then found by maximizing a generative link log-likelihood
//! ([`groupmodel`]) with noisy hill climbing ([`hillclimb`]). The k-modes and
//! Squeezer clusterers in [`baselines`] and the dominant-class accuracy in
//! [`eval`] make up the comparison harness; [`cli`] ties them together.

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod eval;
pub mod groupmodel;
pub mod hillclimb;
pub mod transform;

pub use dataset::{load_table, CategoricalTable, IngestOptions, LabeledDataset};
pub use groupmodel::{Chart, ClusteringResult, LinkModelParams};
pub use hillclimb::{fit_lcbcdc, optimize, OptimizerConfig};
pub use transform::{to_link_dataset, Link, LinkDataset};
