use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Single-hidden-layer linear autoencoder `x ↦ W_d (W_e x + b_e) + b_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAutoencoder {
    pub encoder_weights: Matrix,
    pub encoder_bias: Vec<f64>,
    pub decoder_weights: Matrix,
    pub decoder_bias: Vec<f64>,
    /// Mean squared reconstruction error after the last epoch.
    pub final_loss: f64,
}

impl LinearAutoencoder {
    pub fn dim(&self) -> usize {
        self.encoder_weights.cols()
    }

    pub fn k(&self) -> usize {
        self.encoder_weights.rows()
    }

    /// `W_d · W_e`, the linear part of the reconstruction map.
    pub fn projector(&self) -> Matrix {
        self.decoder_weights
            .matmul(&self.encoder_weights)
            .expect("autoencoder layer shapes agree")
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut h = self.encoder_weights.mul_vec(x)?;
        for (v, b) in h.iter_mut().zip(&self.encoder_bias) {
            *v += b;
        }
        let mut out = self.decoder_weights.mul_vec(&h)?;
        for (v, b) in out.iter_mut().zip(&self.decoder_bias) {
            *v += b;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoencoderInit {
    Zeros,
    /// Uniform in ±√(6/(fan_in+fan_out)) per layer, biases zero.
    Uniform { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutoencoderSchedule {
    pub learning_rate: f64,
    pub epochs: usize,
    pub init: AutoencoderInit,
}

impl AutoencoderSchedule {
    /// Schedule used for the PCA agreement check on small problems.
    pub fn reference(seed: u64) -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 40_000,
            init: AutoencoderInit::Uniform { seed },
        }
    }
}

fn init_layer(rows: usize, cols: usize, rng: &mut Option<ChaCha8Rng>) -> Matrix {
    match rng {
        None => Matrix::zeros(rows, cols),
        Some(rng) => {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            let data = (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect();
            Matrix::new(rows, cols, data).expect("finite init")
        }
    }
}

fn add_bias(m: &mut Matrix, bias: &[f64]) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            m[(i, j)] += bias[i];
        }
    }
}

fn row_sums(m: &Matrix) -> Vec<f64> {
    (0..m.rows()).map(|i| m.row(i).iter().sum()).collect()
}

/// Trains a linear autoencoder on the columns of a dim×n matrix by
/// full-batch gradient descent on the mean squared reconstruction error
/// (averaged over all dim·n entries).
pub fn train_linear_autoencoder(
    samples: &Matrix,
    k: usize,
    schedule: &AutoencoderSchedule,
) -> Result<LinearAutoencoder> {
    let (dim, n) = samples.shape();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {n}")));
    }
    if k > dim.min(n) {
        return Err(Error::InvalidInput(format!(
            "subspace dimension {k} exceeds min(dim {dim}, samples {n})"
        )));
    }
    if !(schedule.learning_rate > 0.0 && schedule.learning_rate.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "learning rate must be positive, got {}",
            schedule.learning_rate
        )));
    }
    if schedule.epochs == 0 {
        return Err(Error::InvalidInput("epoch count must be positive".into()));
    }

    let mut rng = match schedule.init {
        AutoencoderInit::Zeros => None,
        AutoencoderInit::Uniform { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut we = init_layer(k, dim, &mut rng);
    let mut wd = init_layer(dim, k, &mut rng);
    let mut be = vec![0.0; k];
    let mut bd = vec![0.0; dim];
    let xt = samples.transpose();
    let scale = 2.0 / (dim * n) as f64;
    let lr = schedule.learning_rate;
    let mut loss = f64::NAN;

    for epoch in 0..schedule.epochs {
        let mut h = we.matmul(samples)?;
        add_bias(&mut h, &be);
        let mut out = wd.matmul(&h)?;
        add_bias(&mut out, &bd);
        let resid = out.sub(samples)?;
        loss = resid.as_slice().iter().map(|r| r * r).sum::<f64>() / (dim * n) as f64;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }

        let g_out = resid.scale(scale);
        let g_wd = g_out.matmul(&h.transpose())?;
        let g_bd = row_sums(&g_out);
        let g_h = wd.transpose().matmul(&g_out)?;
        let g_we = g_h.matmul(&xt)?;
        let g_be = row_sums(&g_h);

        wd = wd.sub(&g_wd.scale(lr))?;
        we = we.sub(&g_we.scale(lr))?;
        for (b, g) in bd.iter_mut().zip(&g_bd) {
            *b -= lr * g;
        }
        for (b, g) in be.iter_mut().zip(&g_be) {
            *b -= lr * g;
        }
    }

    let model = LinearAutoencoder {
        encoder_weights: we,
        encoder_bias: be,
        decoder_weights: wd,
        decoder_bias: bd,
        final_loss: loss,
    };
    let check = model.reconstruct(&samples.column(0))?;
    if check.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged { epoch: schedule.epochs });
    }
    Ok(model)
}
