//! The proposed CNN + stacked BiLSTM network, its three benchmark
//! ablations, inference, and checkpointing.

mod checkpoint;
mod layer;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::nn::{lstm, ConvParams, DenseParams, LstmParams, Padding};
use crate::tensor::Tensor;

pub use checkpoint::{decode, encode, load_model, save_model, MAGIC, SUPPORTED_VERSIONS, VERSION};
pub use layer::{Layer, LayerManifest, LayerSpec, ParamManifest};

pub const KERNEL_SIZE: usize = 3;
pub const POOL_SIZE: usize = 2;
/// Three pool-2 stages halve the window three times.
pub const WINDOW_MULTIPLE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Conv x3 -> BiLSTM (sequences) -> BiLSTM -> Dense.
    Proposed,
    /// LSTM -> Dense, no convolutional front end.
    Lstm,
    /// Conv x3 -> LSTM (sequences) -> LSTM -> Dense.
    CnnLstm,
    /// Conv x3 -> BiLSTM -> Dense.
    CnnBilstm,
}

impl Architecture {
    /// Benchmarks first, proposed last: the row order of the comparison table.
    pub const ALL: [Architecture; 4] = [
        Architecture::Lstm,
        Architecture::CnnBilstm,
        Architecture::CnnLstm,
        Architecture::Proposed,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Architecture::Proposed => "proposed",
            Architecture::Lstm => "lstm",
            Architecture::CnnLstm => "cnn_lstm",
            Architecture::CnnBilstm => "cnn_bilstm",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Architecture::Proposed => "Proposed Method",
            Architecture::Lstm => "LSTM",
            Architecture::CnnLstm => "CNN-LSTM",
            Architecture::CnnBilstm => "CNN-BiLSTM",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "proposed" => Ok(Architecture::Proposed),
            "lstm" => Ok(Architecture::Lstm),
            "cnn_lstm" => Ok(Architecture::CnnLstm),
            "cnn_bilstm" => Ok(Architecture::CnnBilstm),
            _ => Err(Error::UnknownArchitecture(s.to_string())),
        }
    }
}

/// Filter counts of the three conv layers and units per (Bi)LSTM direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Widths {
    pub filters: [usize; 3],
    pub units: usize,
}

impl Widths {
    pub const FULL: Widths = Widths {
        filters: [64, 128, 256],
        units: 256,
    };

    /// Small network used for finite-difference gradient checks.
    pub const REDUCED: Widths = Widths {
        filters: [4, 8, 16],
        units: 8,
    };

    /// Multiplies every full width by `scale` and rounds to the nearest
    /// integer. `scale` must lie in `(0, 1]` and every result must be >= 1.
    pub fn scaled(scale: f64) -> Result<Widths> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "width_scale must lie in (0, 1], got {scale}"
            )));
        }
        let s = |n: usize| (n as f64 * scale).round() as usize;
        let w = Widths {
            filters: Widths::FULL.filters.map(s),
            units: s(Widths::FULL.units),
        };
        w.check()?;
        Ok(w)
    }

    fn check(&self) -> Result<()> {
        if self.filters.iter().any(|&f| f < 1) || self.units < 1 {
            return Err(Error::InvalidParameter(format!(
                "every layer width must be >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Values recorded at training time so later commands can reproduce the
/// data preparation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingContext {
    pub horizon: usize,
    pub split_ratio: f64,
    pub max_mw: f64,
    pub epochs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    architecture: Architecture,
    window: usize,
    widths: Widths,
    width_scale: f64,
    seed: u64,
    scaler: Option<Scaler>,
    context: Option<TrainingContext>,
    layers: Vec<Layer>,
    /// `shapes[0]` is the input shape, `shapes[k + 1]` the output of layer `k`.
    shapes: Vec<Vec<usize>>,
}

fn cnn_front(widths: &Widths) -> (Vec<Layer>, usize) {
    let mut layers = Vec::new();
    let mut channels = 1;
    for &filters in &widths.filters {
        layers.push(Layer::Conv1d(ConvParams::zeros(
            filters,
            channels,
            KERNEL_SIZE,
            Padding::Same,
        )));
        layers.push(Layer::Relu);
        layers.push(Layer::MaxPool { size: POOL_SIZE });
        channels = filters;
    }
    (layers, channels)
}

fn bilstm(input: usize, units: usize, return_sequences: bool) -> Layer {
    Layer::BiLstm {
        forward: LstmParams::zeros(input, units),
        backward: LstmParams::zeros(input, units),
        return_sequences,
    }
}

fn lstm_layer(input: usize, units: usize, return_sequences: bool) -> Layer {
    Layer::Lstm {
        params: LstmParams::zeros(input, units),
        return_sequences,
    }
}

fn zero_layers(architecture: Architecture, widths: &Widths) -> Vec<Layer> {
    let u = widths.units;
    match architecture {
        Architecture::Proposed => {
            let (mut layers, c) = cnn_front(widths);
            layers.push(bilstm(c, u, true));
            layers.push(bilstm(2 * u, u, false));
            layers.push(Layer::Dense(DenseParams::zeros(2 * u, 1)));
            layers
        }
        Architecture::Lstm => vec![
            lstm_layer(1, u, false),
            Layer::Dense(DenseParams::zeros(u, 1)),
        ],
        Architecture::CnnLstm => {
            let (mut layers, c) = cnn_front(widths);
            layers.push(lstm_layer(c, u, true));
            layers.push(lstm_layer(u, u, false));
            layers.push(Layer::Dense(DenseParams::zeros(u, 1)));
            layers
        }
        Architecture::CnnBilstm => {
            let (mut layers, c) = cnn_front(widths);
            layers.push(bilstm(c, u, false));
            layers.push(Layer::Dense(DenseParams::zeros(2 * u, 1)));
            layers
        }
    }
}

fn glorot(rng: &mut ChaCha8Rng, t: &mut Tensor, fan_in: usize, fan_out: usize) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
    for v in t.data_mut() {
        *v = dist.sample(rng);
    }
}

fn init_lstm(rng: &mut ChaCha8Rng, p: &mut LstmParams) {
    let (input, units) = (p.input_dim(), p.units());
    glorot(rng, &mut p.w, input, lstm::GATES * units);
    glorot(rng, &mut p.u, units, lstm::GATES * units);
    let b = p.b.data_mut();
    b.fill(0.0);
    b[lstm::FORGET * units..(lstm::FORGET + 1) * units].fill(1.0);
}

/// Glorot-uniform weights, zero biases, forget-gate biases of one.
fn initialize(layers: &mut [Layer], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in layers {
        match layer {
            Layer::Conv1d(p) => {
                let (j, c, m) = (p.filters(), p.in_channels(), p.kernel());
                glorot(&mut rng, &mut p.weight, c * m, j * m);
                p.bias.data_mut().fill(0.0);
            }
            Layer::Lstm { params, .. } => init_lstm(&mut rng, params),
            Layer::BiLstm {
                forward, backward, ..
            } => {
                init_lstm(&mut rng, forward);
                init_lstm(&mut rng, backward);
            }
            Layer::Dense(p) => {
                let (fan_in, fan_out) = (p.inputs(), p.outputs());
                glorot(&mut rng, &mut p.weight, fan_in, fan_out);
                p.bias.data_mut().fill(0.0);
            }
            Layer::Relu | Layer::MaxPool { .. } => {}
        }
    }
}

fn shape_chain(window: usize, layers: &[Layer]) -> Result<Vec<Vec<usize>>> {
    let mut shapes = vec![vec![window, 1]];
    for layer in layers {
        let next = layer.output_shape(shapes.last().expect("input shape"))?;
        shapes.push(next);
    }
    if shapes.last() != Some(&vec![1]) {
        return Err(Error::shape("model output", &[1], shapes.last().expect("output")));
    }
    Ok(shapes)
}

impl Model {
    /// Builds and initializes `architecture` with explicit widths.
    pub fn build(architecture: Architecture, window: usize, widths: Widths, seed: u64) -> Result<Model> {
        let mut model = Model::zeroed(architecture, window, widths)?;
        initialize(&mut model.layers, seed);
        model.seed = seed;
        Ok(model)
    }

    /// Same structure as [`Model::build`] with every parameter zero.
    pub fn zeroed(architecture: Architecture, window: usize, widths: Widths) -> Result<Model> {
        if window < WINDOW_MULTIPLE || !window.is_multiple_of(WINDOW_MULTIPLE) {
            return Err(Error::InvalidParameter(format!(
                "window length must be a positive multiple of {WINDOW_MULTIPLE}, got {window}"
            )));
        }
        widths.check()?;
        let layers = zero_layers(architecture, &widths);
        let shapes = shape_chain(window, &layers)?;
        Ok(Model {
            architecture,
            window,
            widths,
            width_scale: widths.units as f64 / Widths::FULL.units as f64,
            seed: 0,
            scaler: None,
            context: None,
            layers,
            shapes,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn widths(&self) -> Widths {
        self.widths
    }

    pub fn width_scale(&self) -> f64 {
        self.width_scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scaler(&self) -> Option<&Scaler> {
        self.scaler.as_ref()
    }

    pub fn set_scaler(&mut self, scaler: Scaler) {
        self.scaler = Some(scaler);
    }

    pub fn context(&self) -> Option<&TrainingContext> {
        self.context.as_ref()
    }

    pub fn set_context(&mut self, context: TrainingContext) {
        self.context = Some(context);
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Input shape followed by each layer's output shape.
    pub fn shapes(&self) -> &[Vec<usize>] {
        &self.shapes
    }

    pub fn manifest(&self) -> Vec<LayerManifest> {
        self.layers
            .iter()
            .enumerate()
            .map(|(k, layer)| LayerManifest {
                layer: layer.spec(),
                output_shape: self.shapes[k + 1].clone(),
                params: layer
                    .params()
                    .into_iter()
                    .map(|(name, t)| ParamManifest {
                        name: format!("{k}.{}.{name}", layer.kind()),
                        shape: t.shape().to_vec(),
                    })
                    .collect(),
            })
            .collect()
    }

    /// Every parameter tensor in checkpoint order.
    pub fn parameters(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .flat_map(|l| l.params().into_iter().map(|(_, t)| t))
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    /// Names matching [`Model::parameters`], e.g. `9.bi_lstm.forward.u`.
    pub fn parameter_names(&self) -> Vec<String> {
        self.manifest()
            .into_iter()
            .flat_map(|m| m.params.into_iter().map(|p| p.name))
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    fn input_tensor(&self, window: &[f64]) -> Result<Tensor> {
        if window.len() != self.window {
            return Err(Error::shape("model input window", &[self.window], &[window.len()]));
        }
        Tensor::matrix(self.window, 1, window.to_vec())
    }

    pub(crate) fn input_for(&self, window: &[f64]) -> Result<Tensor> {
        self.input_tensor(window)
    }

    /// Direct access to layer parameters; the layer structure itself must
    /// not be changed through it.
    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub(crate) fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }

    pub(crate) fn set_width_scale(&mut self, scale: f64) {
        self.width_scale = scale;
    }
}

/// Builds the proposed network at `width_scale` times the full widths.
pub fn build_proposed(window: usize, width_scale: f64, seed: u64) -> Result<Model> {
    let mut model = Model::build(Architecture::Proposed, window, Widths::scaled(width_scale)?, seed)?;
    model.width_scale = width_scale;
    Ok(model)
}

/// Builds one of the benchmark networks (`lstm`, `cnn_lstm`, `cnn_bilstm`).
pub fn build_benchmark(kind: Architecture, window: usize, width_scale: f64, seed: u64) -> Result<Model> {
    if kind == Architecture::Proposed {
        return Err(Error::InvalidParameter(
            "`proposed` is not a benchmark; use build_proposed".into(),
        ));
    }
    let mut model = Model::build(kind, window, Widths::scaled(width_scale)?, seed)?;
    model.width_scale = width_scale;
    Ok(model)
}

/// Builds any architecture at a width scale.
pub fn build(kind: Architecture, window: usize, width_scale: f64, seed: u64) -> Result<Model> {
    match kind {
        Architecture::Proposed => build_proposed(window, width_scale, seed),
        other => build_benchmark(other, window, width_scale, seed),
    }
}

/// One forward pass over a scaled window; returns the scaled prediction.
pub fn predict(model: &Model, window: &[f64]) -> Result<f64> {
    let mut x = model.input_tensor(window)?;
    for layer in &model.layers {
        x = layer.forward(&x)?;
    }
    Ok(x.data()[0])
}

/// Predictions for many windows, in input order.
pub fn predict_batch(model: &Model, windows: &[Vec<f64>]) -> Result<Vec<f64>> {
    windows.par_iter().map(|w| predict(model, w)).collect()
}

/// Rolls the model forward `steps` times, feeding each prediction back in
/// as the newest observation. Returns scaled predictions in time order.
pub fn forecast_recursive(model: &Model, seed_window: &[f64], steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("forecast steps must be >= 1".into()));
    }
    let mut window = seed_window.to_vec();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let next = predict(model, &window)?;
        out.push(next);
        window.remove(0);
        window.push(next);
    }
    Ok(out)
}
