//! Dual-stream sigmoid-contrastive alignment of EEG segments with their
//! topographic maps.

pub mod checkpoint;
pub mod loss;
pub mod model;
pub mod optim;
pub mod train;

pub use checkpoint::{Checkpoint, Manifest, BLOB_FILE, MANIFEST_FILE};
pub use loss::{log_sigmoid, pairwise_logits, sigmoid, sigmoid_align_loss, LossNormalization, Square};
pub use model::{
    encode_eeg, encode_topo, gelu, l2_normalize, project, AlignModel, AlignPair, EegInput, EncoderParams,
    Gradients, ModelConfig, ProjectionHead, FROZEN, TRAINABLE,
};
pub use optim::{adamw_step, AdamState, AdamWConfig};
pub use train::{eval_loss, train_pairs, AlignHyper};
