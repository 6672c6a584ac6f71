//! Boosting linear classifiers from Rademacher observations (rados).
//!
//! A rado is the sum of the edge vectors `y_i x_i` over the examples where a
//! sign vector agrees with the labels. The crate covers
//!
//! * rado construction ([`rados`]) and Laplace protection ([`privacy`]),
//! * regularized coordinate boosting of the exponential rado loss
//!   ([`boost`], [`regularizers`]),
//! * small-scale checks that example and rado losses agree up to monotone
//!   transforms ([`losses`]),
//! * persistence, cross-validation and an experiment harness ([`io`],
//!   [`folds`], [`experiment`]).

pub mod boost;
pub mod data;
pub mod error;
pub mod experiment;
pub mod folds;
pub mod io;
pub mod losses;
pub mod math;
pub mod model;
pub mod privacy;
pub mod rados;
pub mod regularizers;
pub mod rng;

pub use boost::{
    alpha_update, baseline_example_boost, boost, boost_observed, clamp_edge_ridge, edge, regularized_exp_rado_loss,
    weak_learner, BoostConfig, FeatureScale, Selection, WeakLearnerMode, WeightVector,
};
pub use data::{edge_vectors, Dataset, EdgeVector, MinMaxScaling, Sign};
pub use error::{Error, ErrorCategory, Result};
pub use losses::{GameKind, GamePair, LossValue};
pub use model::{predict, IterationRecord, LinearModel};
pub use rados::{RadoMode, RadoSet, SigmaVector};
pub use regularizers::{Gamma, RegularizerKind, RegularizerSpec};
