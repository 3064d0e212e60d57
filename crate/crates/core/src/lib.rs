//! Sequence-labeling NER laboratory.
//!
//! Implements three sentence encoders for named entity recognition — a
//! baseline deep BiLSTM-CNN, a cross-connected variant whose second-layer
//! cells see both directions, and a self-attentive variant — together with
//! softmax and linear-chain CRF output heads, all built on a small
//! reverse-mode autodiff tape. The crate also ships the desk-scale XOR
//! experiments that separate what these encoders can and cannot learn,
//! strict mention-F1 evaluation, an ablation harness, and attention
//! heat-map export.

pub mod attention;
pub mod checkpoint;
pub mod chunk;
pub mod classifier;
pub mod data;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod optim;
pub mod rng;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
