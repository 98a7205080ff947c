//! Texture classification of grayscale regions of interest.
//!
//! Two families of classifiers share the crate: hand-crafted texture
//! features with feature selection and naive Bayes, and sparse representation
//! classification, either on the whole image or as an ensemble of per-block
//! classifiers fused by voting or by averaged log-likelihood scores.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`). The aliases below
//! fix the scalar to `f64`.

pub mod bayes;
mod binio;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod featsel;
pub mod imgio;
mod linalg;
pub mod pipeline;
pub mod scalar;
pub mod sparse;
pub mod src;
pub mod synth;
pub mod texture;

pub use error::{Error, Result};
pub use imgio::KeepFraction;
pub use scalar::Real;

pub type GrayImage = imgio::GrayImage<f64>;
pub type Plane = imgio::Plane<f64>;
pub type BlockGrid = imgio::BlockGrid<f64>;
pub type FeatureVector = texture::FeatureVector<f64>;
pub type FeatureMatrix = featsel::FeatureMatrix<f64>;
pub type CfsEvaluator = featsel::CfsEvaluator<f64>;
pub type NbModel = bayes::NbModel<f64>;
pub type NbDecision = bayes::NbDecision<f64>;
pub type Dictionary = sparse::Dictionary<f64>;
pub type SparseSolution = sparse::SparseSolution<f64>;
pub type SrcModel = src::SrcModel<f64>;
pub type SrcDecision = src::SrcDecision<f64>;
pub type BlockEnsembleModel = ensemble::BlockEnsembleModel<f64>;
pub type EnsembleDecision = ensemble::EnsembleDecision<f64>;
pub type LabeledImages = pipeline::LabeledImages<f64>;
pub type RocCurve = eval::RocCurve<f64>;
