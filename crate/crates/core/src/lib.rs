//! Batch-mode active learning driven by fixed-size determinantal point
//! processes.
//!
//! Each round a committee of classifiers votes on the unlabeled pool, a
//! GLAD-style EM model turns those votes into per-instance informativeness
//! scores, greedy k-center yields representativeness features, and the two
//! are fused into an L-ensemble from which a batch is drawn with an exact
//! k-DPP sampler. The determinant rewards informative points and penalizes
//! redundant ones in the same batch.
//!
//! The crate also ships the benchmark harness around that loop: synthetic
//! dataset generators, baseline strategies, budget-curve metrics (AUBC),
//! paired t-tests and a configuration-driven experiment runner.
//!
//! ```no_run
//! use dppal::{alcore, dataset};
//!
//! let ds = dataset::gen_synthetic(dataset::SyntheticKind::GcloudBalance, 7).unwrap();
//! let cfg = alcore::AlConfig::default();
//! let record = alcore::run_al(&ds, alcore::StrategyKind::KdppMulti, 100, 5, 0, &cfg).unwrap();
//! println!("AUBC(acc) = {:.3}", dppal::eval::aubc(&record.curves.acc).unwrap());
//! ```

pub mod alcore;
pub mod cli;
pub mod committee;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod glad;
pub mod kdpp;
pub mod kernels;
pub mod linalg;
pub mod representativeness;

pub use error::{Error, Result};
