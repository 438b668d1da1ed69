//! AdaBoosted extreme learning machine ensembles over randomly partitioned
//! data.
//!
//! Training rows are scattered uniformly at random over `M` splits. Each split
//! is boosted into a weighted-vote ensemble of small ELMs, and the split
//! ensembles are combined by plurality vote:
//!
//! ```no_run
//! use boostelm::dataio::read_svmlight_file;
//! use boostelm::engine::{train_pipeline, ExperimentConfig};
//!
//! let train = read_svmlight_file("data/waveform.train", None)?;
//! let mut cfg = ExperimentConfig::default();
//! cfg.m = 19;
//! cfg.boost.t_max = 6;
//! cfg.boost.weak_l = 40;
//! let run = train_pipeline(&train, &cfg)?;
//! let labels = run.ensemble.predict(train.features())?;
//! # Ok::<(), boostelm::Error>(())
//! ```
//!
//! With the default `parallel` feature the reduce phase runs on a rayon pool
//! bounded by `ExperimentConfig::workers`; without it every split is trained
//! sequentially. Results are identical either way.

pub mod boost;
pub mod dataio;
pub mod elm;
pub mod engine;
pub mod error;
pub mod exec;
pub mod harness;
pub mod linalg;
mod matrix_serde;
pub mod metrics;
pub mod seed;

pub use boost::{AlphaVariant, BoostConfig, ChunkEnsemble, WeakHypothesis, WeightingMode};
pub use dataio::{Dataset, Scaling};
pub use elm::{ActivationKind, ElmModel, ElmParams};
pub use engine::{ExperimentConfig, GlobalEnsemble};
pub use error::{Error, Result};
pub use metrics::{ConfusionMatrix, MetricsReport};
