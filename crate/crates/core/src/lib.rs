//! Multivariate multiscale graph-based dispersion entropy (mvDEG).
//!
//! A `p`-channel signal is treated as a signal on the Cartesian product of
//! a directed time path and a channel interaction graph. Hop-aggregated
//! copies of the signal form the embedding, whose class patterns are
//! counted and summarized by a normalized Shannon entropy at every
//! coarse-graining scale. Powers of the product adjacency are applied
//! through their Kronecker-factored binomial expansion, so the cost stays
//! linear in the number of samples.

pub mod baseline;
pub mod bench;
pub mod curve;
pub mod entropy;
pub mod error;
pub mod graph;
pub mod histogram;
pub mod io;
pub mod kron;
pub mod signal;
pub mod synth;

pub use baseline::{classical_mvde, pattern_counts, univariate_mde, PatternCounts, DEFAULT_PATTERN_CAP};
pub use curve::{CurveConfig, CurveRecord, EntropyCurve};
pub use entropy::{
    coarse_grain, mvdeg_curve, mvdeg_scales, mvdeg_single_scale, ncdf_map, EmbeddingConfig,
    ScaleOutcome, SingleScale,
};
pub use error::{Error, ErrorClass, Result};
pub use graph::{StationLayout, WeightedGraph};
pub use histogram::DispersionHistogram;
pub use signal::MultivariateSignal;
