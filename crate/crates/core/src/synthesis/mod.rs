//! Ultrametrics with prescribed value sets and choice functions with
//! prescribed spectra.

mod metric;
mod prescribe;
mod refine;
mod values;

pub use metric::{
    d_pi_metric, d_pi_metric_strict, synthesize_whitney_t1, synthesize_whitney_t2, SynthesizedMetric,
};
pub use prescribe::{prescribe_spectrum, Prescription};
pub use refine::{is_infinite, refine_partition};
pub use values::{LevelBins, TargetSpectrum, ValueSet};
