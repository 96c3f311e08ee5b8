//! Hierarchical Laplacians on finite windows of ultrametric ball trees.

pub mod checks;
pub mod error;
pub mod gen;
pub mod laplacian;
pub mod padic;
pub mod par;
pub mod perturbation;
pub mod semigroup;
pub mod synthesis;
pub mod tree;

pub use error::{Error, Result};
pub use laplacian::{CellFunction, ChoiceFunction, Mode, SpectrumReport};
pub use tree::{BallId, BallKind, BallTree, Partition, PointId, TreeSpec, WhitneyMap};
