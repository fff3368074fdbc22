//! Two-layer classification of imbalanced binary data, with layers defined by hierarchical clustering.
//!
//! The training data is clustered with Ward linkage and cut at an automatic
//! threshold. Each instance is then labelled pure-majority, pure-minority or
//! mixed according to the class composition of its cluster, which defines two
//! learning tasks:
//!
//! * layer 1 separates pure-majority instances from everything else;
//! * layer 2 solves the original task on the mixed and pure-minority instances.
//!
//! The final score is the product of the two layer scores. The crate also
//! ships the resampling baselines, base learners and cross-validation protocol
//! used to compare the method against the usual alternatives.

pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod hcluster;
pub mod icll;
pub mod layering;
pub mod learners;
pub mod resampling;
pub mod seed;

pub use data::{Dataset, ImbalanceSummary};
pub use error::{Error, Result};
pub use icll::{IcllConfig, IcllModel, Variant};
