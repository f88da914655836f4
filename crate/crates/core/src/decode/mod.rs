//! Movement decoding: rest-epoch sampling, shrinkage LDA, chronological
//! holdout, cross-validation and binomial-annotated evaluation.

mod eval;
mod lda;
mod pipeline;
mod rest;
mod split;

pub use eval::evaluate;
pub use lda::{lda_fit, lda_predict, LdaModel, Prediction, MAX_CONDITION, SHRINKAGE_GRID};
pub use pipeline::{cross_validate, decoding_epochs, run_decode, CvResult, DecodeConfig, DecodeReport, SelectedFeature};
pub use rest::sample_rest_epochs;
pub use split::{chronological_holdout, fold_indices, stratified_holdout, FoldMode};
