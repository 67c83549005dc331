//! permforge: Android permission analysis and malware classification, end to end.
//!
//! The crate covers the whole desk-scale pipeline:
//!
//! * [`catalog`] — the ordered permission catalog defining feature columns;
//! * [`manifest`] — parsers for binary AXML, text XML, and APK containers;
//! * [`dataset`] — labeled binary feature matrices, splits, CSV I/O, and a
//!   synthetic corpus generator;
//! * [`features`] — frequency/correlation/variance analysis and the three
//!   reduction techniques (variance threshold, PCA, autoencoders);
//! * [`classify`] — eight from-scratch classifiers behind one interface;
//! * [`nn`] — the small dense-network engine under the autoencoders and DNNs;
//! * [`eval`] — metrics, ROC/AUC, and the reduction-by-classifier grid;
//! * [`model_io`] — a versioned text format for fitted models.
//!
//! Everything stochastic takes an explicit `u64` seed and is bit-reproducible
//! on a given platform.

pub mod catalog;
pub mod classify;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod manifest;
pub mod model_io;
pub mod nn;
mod util;

pub use error::{Error, Result};

// The README's and the guide's code samples run under `cargo test --doc`,
// so neither can drift from the library it documents.
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/catalog.md")]
    mod catalog {}
    #[doc = include_str!("../../../book/src/manifests.md")]
    mod manifests {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/classifiers.md")]
    mod classifiers {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
