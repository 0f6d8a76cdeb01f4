//! Spectral topic inference from joint-stochastic word co-occurrence.
//!
//! The crate covers the full pipeline: loading or synthesizing bag-of-words
//! corpora ([`corpus`]), building the unbiased co-occurrence estimator in
//! dense or matrix-free form ([`cooc`]), rectifying it onto the
//! model-consistent manifold with alternating projections, epsilon
//! non-negative compression, or PALM ([`rectify`]), recovering anchor words
//! and topics from either the dense or the compressed statistics ([`infer`]),
//! and scoring the result ([`metrics`]). Shared numerical kernels (Lanczos,
//! randomized eigendecomposition, pivoted QR, simplex-constrained least
//! squares) live in [`linalg`]; persistence formats in [`io`].

pub mod cooc;
pub mod corpus;
pub mod infer;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod rectify;
