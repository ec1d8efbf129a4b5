//! Layer kernels: convolution, activations, pooling, LSTM/BiLSTM and dense.
//!
//! Each forward kernel has a matching backward function used by
//! [`crate::train`]. Sequences are `[steps, channels]` tensors.

pub mod activation;
pub mod conv;
pub mod dense;
pub mod lstm;
pub mod pool;

pub use activation::{relu, relu_backward, sigmoid, sigmoid_scalar, tanh};
pub use conv::{conv1d_backward, conv1d_forward, ConvParams, Padding};
pub use dense::{dense_backward, dense_forward, DenseParams};
pub use lstm::{
    bilstm_backward, bilstm_forward, bilstm_forward_cached, lstm_backward, lstm_cell_forward,
    lstm_forward, lstm_forward_cached, BiLstmCache, Direction, LstmCache, LstmGrads, LstmOutput,
    LstmParams,
};
pub use pool::{maxpool1d, maxpool1d_backward};
