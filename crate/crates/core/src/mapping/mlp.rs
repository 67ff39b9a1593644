use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    /// No hidden nonlinearity; used to store linear maps in the same format.
    Identity,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }

    /// Derivative expressed through the activation output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::Format(format!("unknown activation `{other}`"))),
        }
    }
}

/// Feed-forward network: activation on hidden layers, affine output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpMap {
    layer_sizes: Vec<usize>,
    /// `weights[l]` is `layer_sizes[l+1] × layer_sizes[l]`.
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
    activation: Activation,
}

impl MlpMap {
    pub fn from_parts(weights: Vec<Matrix>, biases: Vec<Vec<f64>>, activation: Activation) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("network needs at least one layer".into()));
        }
        if biases.len() != weights.len() {
            return Err(Error::mismatch("bias vector count", weights.len(), biases.len()));
        }
        let mut layer_sizes = vec![weights[0].cols()];
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.cols() != layer_sizes[l] {
                return Err(Error::mismatch("layer input width", layer_sizes[l], w.cols()));
            }
            if b.len() != w.rows() {
                return Err(Error::mismatch("bias length", w.rows(), b.len()));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite bias".into()));
            }
            layer_sizes.push(w.rows());
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
            activation,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().expect("non-empty")
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.rows() * w.cols() + w.rows()).sum()
    }

    /// All layer activations for one input, the input itself first.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let last = self.weights.len() - 1;
        let mut acts = Vec::with_capacity(self.weights.len() + 1);
        acts.push(x.to_vec());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let input = &acts[l];
            let out: Vec<f64> = (0..w.rows())
                .map(|i| {
                    let z = b[i] + w.row(i).iter().zip(input).map(|(a, v)| a * v).sum::<f64>();
                    if l == last {
                        z
                    } else {
                        self.activation.apply(z)
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    /// Applies the network to every column of `inputs`.
    pub fn forward_columns(&self, inputs: &Matrix) -> Result<Matrix> {
        if inputs.rows() != self.input_size() {
            return Err(Error::mismatch("network input length", self.input_size(), inputs.rows()));
        }
        let outs: Vec<Vec<f64>> = inputs
            .columns()
            .iter()
            .map(|c| self.activations(c).pop().expect("output layer"))
            .collect();
        if outs.is_empty() {
            return Ok(Matrix::zeros(self.output_size(), 0));
        }
        Matrix::from_columns(&outs)
    }
}

/// Initial weights uniform in ±√(6/(fan_in+fan_out)), zero biases.
pub fn mlp_init(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<MlpMap> {
    if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
        return Err(Error::InvalidInput(format!("bad layer sizes {layer_sizes:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-limit..=limit)).collect();
        weights.push(Matrix::new(fan_out, fan_in, data)?);
        biases.push(vec![0.0; fan_out]);
    }
    MlpMap::from_parts(weights, biases, activation)
}

pub fn mlp_forward(map: &MlpMap, code: &[f64]) -> Result<Vec<f64>> {
    if code.len() != map.input_size() {
        return Err(Error::mismatch("network input length", map.input_size(), code.len()));
    }
    Ok(map.activations(code).pop().expect("output layer"))
}

/// Gradients laid out like the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    /// Batch loss at the evaluated parameters.
    pub loss: f64,
}

fn check_batch(map: &MlpMap, inputs: &Matrix, targets: &Matrix) -> Result<()> {
    if inputs.rows() != map.input_size() {
        return Err(Error::mismatch("network input length", map.input_size(), inputs.rows()));
    }
    if targets.rows() != map.output_size() {
        return Err(Error::mismatch("network target length", map.output_size(), targets.rows()));
    }
    if inputs.cols() != targets.cols() {
        return Err(Error::mismatch("target sample count", inputs.cols(), targets.cols()));
    }
    Ok(())
}

/// Loss `(1/n) Σ ‖f(x_j) − t_j‖²` over the batch columns.
pub fn mlp_loss(map: &MlpMap, inputs: &Matrix, targets: &Matrix) -> Result<f64> {
    check_batch(map, inputs, targets)?;
    let out = map.forward_columns(inputs)?;
    let n = inputs.cols().max(1) as f64;
    Ok(out
        .as_slice()
        .iter()
        .zip(targets.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

fn batch_gradients(map: &MlpMap, inputs: &[&[f64]], targets: &[&[f64]]) -> MlpGradients {
    let layers = map.weights.len();
    let mut gw: Vec<Matrix> = map.weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect();
    let mut gb: Vec<Vec<f64>> = map.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    let n = inputs.len() as f64;
    let mut loss = 0.0;
    for (x, t) in inputs.iter().zip(targets) {
        let acts = map.activations(x);
        let mut delta: Vec<f64> = acts[layers]
            .iter()
            .zip(t.iter())
            .map(|(a, b)| {
                loss += (a - b) * (a - b);
                2.0 * (a - b) / n
            })
            .collect();
        for l in (0..layers).rev() {
            let input = &acts[l];
            let cols = input.len();
            let g = gw[l].as_mut_slice();
            for (i, d) in delta.iter().enumerate() {
                gb[l][i] += d;
                for (gv, a) in g[i * cols..(i + 1) * cols].iter_mut().zip(input) {
                    *gv += d * a;
                }
            }
            if l > 0 {
                let w = &map.weights[l];
                let mut prev = vec![0.0; cols];
                for (i, d) in delta.iter().enumerate() {
                    for (p, wv) in prev.iter_mut().zip(w.row(i)) {
                        *p += wv * d;
                    }
                }
                for (p, a) in prev.iter_mut().zip(input) {
                    *p *= map.activation.derivative_from_output(*a);
                }
                delta = prev;
            }
        }
    }
    MlpGradients {
        weights: gw,
        biases: gb,
        loss: loss / n,
    }
}

/// Analytic gradients of [`mlp_loss`] with respect to every parameter.
pub fn mlp_gradients(map: &MlpMap, inputs: &Matrix, targets: &Matrix) -> Result<MlpGradients> {
    check_batch(map, inputs, targets)?;
    if inputs.cols() == 0 {
        return Err(Error::InvalidInput("empty batch".into()));
    }
    let xs = inputs.columns();
    let ts = targets.columns();
    let xr: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let tr: Vec<&[f64]> = ts.iter().map(Vec::as_slice).collect();
    Ok(batch_gradients(map, &xr, &tr))
}

/// Mini-batch SGD schedule: each `(rate, epochs)` phase runs in order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSchedule {
    pub phases: Vec<(f64, usize)>,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainSchedule {
    /// 1000 epochs at 1e-3, then 1000 at 1e-5, batches of 40.
    pub fn reference(seed: u64) -> Self {
        Self {
            phases: vec![(1e-3, 1000), (1e-5, 1000)],
            batch_size: 40,
            seed,
        }
    }

    pub fn total_epochs(&self) -> usize {
        self.phases.iter().map(|(_, e)| e).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidInput("batch size must be positive".into()));
        }
        for (rate, epochs) in &self.phases {
            if !(rate.is_finite() && *rate > 0.0) {
                return Err(Error::InvalidInput(format!("learning rate must be positive, got {rate}")));
            }
            if *epochs == 0 {
                return Err(Error::InvalidInput("phase epoch count must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedMlp {
    pub map: MlpMap,
    /// Full training-set loss after each epoch.
    pub loss_history: Vec<f64>,
}

/// Trains a freshly initialized network on column-paired codes.
///
/// Initialization draws from stream 0 of `schedule.seed` and the epoch
/// shuffles from stream 1, so results are reproducible bit for bit.
pub fn mlp_train(
    layer_sizes: &[usize],
    activation: Activation,
    inputs: &Matrix,
    targets: &Matrix,
    schedule: &TrainSchedule,
) -> Result<TrainedMlp> {
    schedule.validate()?;
    let mut map = mlp_init(layer_sizes, activation, schedule.seed)?;
    check_batch(&map, inputs, targets)?;
    let n = inputs.cols();
    if n == 0 {
        return Err(Error::InvalidInput("no training pairs".into()));
    }
    let xs = inputs.columns();
    let ts = targets.columns();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    rng.set_stream(1);
    let mut loss_history = Vec::with_capacity(schedule.total_epochs());
    let mut epoch = 0;
    for &(rate, epochs) in &schedule.phases {
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(schedule.batch_size) {
                let xb: Vec<&[f64]> = chunk.iter().map(|&j| xs[j].as_slice()).collect();
                let tb: Vec<&[f64]> = chunk.iter().map(|&j| ts[j].as_slice()).collect();
                let g = batch_gradients(&map, &xb, &tb);
                for (w, gw) in map.weights.iter_mut().zip(&g.weights) {
                    for (v, d) in w.as_mut_slice().iter_mut().zip(gw.as_slice()) {
                        *v -= rate * d;
                    }
                }
                for (b, gb) in map.biases.iter_mut().zip(&g.biases) {
                    for (v, d) in b.iter_mut().zip(gb) {
                        *v -= rate * d;
                    }
                }
            }
            let blown = map.weights.iter().any(|w| w.as_slice().iter().any(|v| !v.is_finite()))
                || map.biases.iter().flatten().any(|v| !v.is_finite());
            if blown {
                return Err(Error::Diverged { epoch });
            }
            let loss = mlp_loss(&map, inputs, targets)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            loss_history.push(loss);
            epoch += 1;
        }
    }
    Ok(TrainedMlp { map, loss_history })
}
