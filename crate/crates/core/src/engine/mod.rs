//! Differentiable building blocks: tensors, a reverse-mode graph, layers,
//! losses, Adam, early stopping, a finite-difference checker and checkpoints.

mod adam;
mod checkpoint;
mod early_stop;
mod gradcheck;
mod graph;
mod layers;
mod lstm;
mod params;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{
    checkpoint_from_bytes, checkpoint_to_bytes, load_checkpoint, save_checkpoint, CheckpointMeta,
};
pub use early_stop::{early_stopping, EarlyStopping, StopDecision};
pub use gradcheck::{gradient_check, relative_error, GradCheckReport};
pub use graph::{
    apply_activation, cross_entropy, Activation, Gradients, Graph, LossKind, NodeId, PROB_EPS,
};
pub use layers::{
    add_broadcast, concat, dense_forward, dropout, dropout_mask, dropout_node, lstm_forward, Dense,
    Lstm, Mode,
};
pub use params::{glorot_uniform, uniform, ParamEntry, ParamId, ParamStore};
pub use tensor::Tensor;
