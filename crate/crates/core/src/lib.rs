//! Short-term daily electricity load forecasting with a convolutional
//! front end feeding stacked bidirectional LSTMs.
//!
//! Everything is implemented directly on `f64` tensors: data cleaning and
//! min-max scaling ([`data`]), layer kernels ([`nn`]), the proposed network
//! and its benchmark ablations ([`model`]), backpropagation and Adam
//! ([`train`]), and the MAPE/MAE/MSE/RMSE evaluation harness ([`eval`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod nn;
pub mod tensor;
pub mod train;

pub use data::{Scaler, TimeSeries, WindowedDataset};
pub use error::{CheckpointError, Error, ErrorClass, Result};
pub use eval::{EvalSeries, MetricsReport, ModelMetrics};
pub use model::{Architecture, Model, Widths};
pub use tensor::Tensor;
pub use train::{TrainConfig, TrainHistory};
