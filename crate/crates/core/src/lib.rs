//! Minority oversampling for imbalanced binary classification.
//!
//! The centerpiece is [`samplers::adaptive_gmm_resample`]: an oversized pool
//! of SMOTE-style interpolants is clustered with a Gaussian mixture, every
//! cluster is weighted by how many majority samples it claims, and the
//! balancing quota is drawn from the clusters in proportion to those weights.
//! Clusters that sit inside the majority class get weight zero, so noisy
//! minority regions are not amplified.
//!
//! Around it live the pieces needed to evaluate it: the classic oversamplers
//! (ROS, SMOTE, Borderline-SMOTE 1/2, SVM-SMOTE, ADASYN), a ball tree for
//! exact k-NN, an EM-fitted GMM, an RBF-kernel SVM trained by SMO, F-beta
//! metrics and a cross-validation benchmark runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod gmm;
pub mod metrics;
pub mod neighbors;
pub mod samplers;
pub mod svm;

mod linalg;
pub(crate) mod seed;

pub use data::LabeledDataset;
pub use error::{Error, Result};
pub use samplers::{SamplerKind, SamplerSpec};
