//! Synthesis, verification and metering of low-addition summation circuits
//! for the classical Hough transform and related line-pattern families.
//!
//! The pipeline: generate line-pattern partitions over a cyclic image grid,
//! build a binary partition tree whose nodes are common refinements (tracked
//! compactly on the 1-D column domain for the Hough family), turn the tree's
//! computation chain into a fanin-2 summation DAG, then measure it and verify
//! it against direct summation.

mod bits;
mod error;

pub mod circuit;
pub mod grid;
pub mod oracle;
pub mod partition;
pub mod tree;

pub use error::{Error, Result};

pub use circuit::{Circuit, ComputationChain, Evaluation};
pub use grid::{BaseFunction, ImageDomain, ImageValues, Pattern, Pixel, XSet};
pub use partition::{Ensemble, EqualityPartition, Partition, WeightReport, XPartition};
pub use tree::{BoundReport, NodeContent, PartitionTree, TreeMetrics, TreeNode};
