//! Margin perceptrons with constant and variable weight shrinking.
//!
//! Patterns are augmented with a bias coordinate (and optionally one private
//! coordinate each), reflected by their labels, and a weight vector `a` is
//! updated whenever `a . y_k` falls at or below a threshold. Two shrinking
//! schemes are provided:
//!
//! * constant shrinking ([`Algorithm::Mpcs`]): `a <- (1 - eta lambda) a + eta y`
//!   on `a . y <= b`;
//! * variable shrinking ([`Algorithm::Mpvs`]): `a <- a + eta (t+1)^n y` on
//!   `a . y <= b (t+1)^n`.
//!
//! Both converge in a finite number of updates to a solution whose margin is
//! a guaranteed fraction of the maximum, and [`certify`] turns a finished run
//! into a lower bound on that fraction.
//!
//! ```
//! use mpshrink::{build_dataset, parse_str, train, Algorithm, Hyperparams, Order};
//!
//! let examples = parse_str("+1 1:1\n-1 1:-1\n").unwrap();
//! let ds = build_dataset(&examples, 1.0, 0.0).unwrap();
//! let hp = Hyperparams { eta: 1.0, b: 0.5, n: 0, ..Default::default() };
//! let run = train(&ds, &hp, Algorithm::Mpvs, Order::Sequential, true).unwrap();
//! assert!(run.converged);
//! assert_eq!(run.state.weights(), vec![2.0, 0.0]);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod cli;
pub mod data;
pub mod error;
pub mod model;
pub mod mpcs;
pub mod mpvs;
pub mod oracle;
pub mod persist;
pub mod scheduler;
pub mod synth;

pub use certify::{certify_run, Certificate};
pub use data::{
    build_dataset, build_dataset_with_features, dataset_from_patterns, parse_dataset, parse_str,
    sparse_dot, Dataset, Pattern, RawExample,
};
pub use error::{Error, Result};
pub use model::{evaluate_margin, Algorithm, Hyperparams, MarginReport, TrainState};
pub use oracle::{exact_gamma_d, reference_train, OracleResult};
pub use persist::ModelFile;
pub use scheduler::{train, train_observed, Order, RunResult};

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/algorithms.md")]
    mod algorithms {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/tuning.md")]
    mod tuning {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
