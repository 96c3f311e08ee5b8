//! Choice functions, the hierarchical Laplacian and its explicit
//! eigen-system, with a dense brute-force oracle.

mod basis;
mod cell;
mod choice;
mod dense;
mod ops;
mod spectrum;

pub(crate) use basis::child_basis;
pub use basis::eigenbasis;
pub use cell::{averages, integrals, CellFunction};
pub use choice::{alpha_tail, choice_alpha, choice_standard, lambda_of, ChoiceFunction, Mode};
pub use dense::{assemble_dense, cluster, dense_eigenvalues, weighted_asymmetry, DEFAULT_DENSE_CAP};
pub(crate) use ops::require_mean_zero;
pub use ops::{apply, apply_ft_closed_form, eigenfunction, MEAN_ZERO_TOL};
pub use spectrum::{spectrum, SpectrumEntry, SpectrumReport};
