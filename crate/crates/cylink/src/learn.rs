//! A small feedforward regressor trained with Adam, plus the evaluation
//! metrics and cross-validation used to score it.
//!
//! The network is deliberately tiny: weights go in, one scalar comes out.
//! Everything is seeded, so a fixed seed, config, and dataset reproduce the
//! same trained parameters and the same report bit for bit. There is no
//! autograd; the architecture is fixed enough that writing the backward pass
//! by hand is simpler than carrying a dependency.

use rand::Rng;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::NVARS;

/// Layer widths of the standard regressor: five weights in, one value out.
pub const DEFAULT_WIDTHS: [usize; 5] = [5, 16, 32, 16, 1];

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("input length {got}, model expects {expected}")]
    InputLength { got: usize, expected: usize },
    #[error("empty dataset")]
    EmptyData,
    #[error("target variance is zero; the score is undefined")]
    ZeroVariance,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize, trajectory: Vec<f64> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// How inputs are scaled before entering the first layer.
#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Debug, Default)]
pub enum Normalization {
    /// Zero mean, unit variance per feature, fitted on the training data.
    #[default]
    Standardize,
    Raw,
}

/// Fully connected network with rectified hidden layers and an identity
/// output. Weight matrices are row-major, one row per output unit.
#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct MLPModel {
    pub widths: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub seed: u64,
}

impl MLPModel {
    /// Standard architecture, parameters drawn uniformly scaled by fan-in.
    pub fn new_seeded(seed: u64) -> Self {
        Self::with_widths(&DEFAULT_WIDTHS, seed)
    }

    pub fn with_widths(widths: &[usize], seed: u64) -> Self {
        assert!(widths.len() >= 2, "need an input and an output layer");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in widths.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let scale = 1.0 / (fan_in as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.gen_range(-scale..scale))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        MLPModel {
            widths: widths.to_vec(),
            weights,
            biases,
            input_mean: vec![0.0; widths[0]],
            input_std: vec![1.0; widths[0]],
            seed,
        }
    }

    pub fn input_len(&self) -> usize {
        self.widths[0]
    }

    fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.input_mean)
            .zip(&self.input_std)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect()
    }

    /// Activations of every layer, input included, for one normalized input.
    fn activations(&self, x_norm: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![x_norm.to_vec()];
        let last = self.weights.len() - 1;
        for (layer, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let input = &acts[layer];
            let fan_in = self.widths[layer];
            let mut out = Vec::with_capacity(b.len());
            for (row, bias) in b.iter().enumerate() {
                let mut z = *bias;
                for (k, &v) in input.iter().enumerate() {
                    z += w[row * fan_in + k] * v;
                }
                out.push(if layer < last { z.max(0.0) } else { z });
            }
            acts.push(out);
        }
        acts
    }

    /// Evaluate the network on one raw input vector.
    pub fn forward(&self, x: &[f64]) -> Result<f64, LearnError> {
        if x.len() != self.input_len() {
            return Err(LearnError::InputLength {
                got: x.len(),
                expected: self.input_len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFiniteInput);
        }
        let acts = self.activations(&self.normalize(x));
        Ok(acts.last().unwrap()[0])
    }
}

/// Optimizer and schedule settings for one training run.
#[derive(Clone, Copy, Serialize, Deserialize, Debug)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Stop after this many epochs without the training loss improving.
    pub patience: usize,
    pub normalization: Normalization,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 500,
            batch_size: 32,
            patience: 50,
            normalization: Normalization::Standardize,
            seed: 0,
        }
    }
}

/// Per-epoch mean squared error, and where training stopped.
#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct TrainingTrace {
    pub epoch_losses: Vec<f64>,
    pub stopped_epoch: usize,
}

struct Gradients {
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeroed(model: &MLPModel) -> Self {
        Gradients {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

/// Mean squared error over a batch and its gradient in every parameter,
/// shaped like [`MLPModel::weights`] and [`MLPModel::biases`].
#[derive(Clone, Debug)]
pub struct LossGradients {
    pub loss: f64,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Backpropagate the mean squared error of a batch. Inputs are taken as the
/// first layer sees them, with no normalization applied, so the gradients
/// can be compared directly against finite differences of the same loss.
pub fn loss_and_gradients(
    model: &MLPModel,
    data: &[(Vec<f64>, f64)],
) -> Result<LossGradients, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyData);
    }
    let scale = 1.0 / data.len() as f64;
    let mut grads = Gradients::zeroed(model);
    let mut loss = 0.0;
    for (x, y) in data {
        if x.len() != model.input_len() {
            return Err(LearnError::InputLength {
                got: x.len(),
                expected: model.input_len(),
            });
        }
        loss += accumulate_sample(model, x, *y, scale, &mut grads);
    }
    Ok(LossGradients {
        loss: loss * scale,
        weights: grads.weights,
        biases: grads.biases,
    })
}

/// Squared-error loss of one sample and its parameter gradients, added into
/// the accumulator. The factor `scale` distributes the batch mean.
fn accumulate_sample(
    model: &MLPModel,
    x_norm: &[f64],
    y: f64,
    scale: f64,
    grads: &mut Gradients,
) -> f64 {
    let acts = model.activations(x_norm);
    let pred = acts.last().unwrap()[0];
    let err = pred - y;
    let n_layers = model.weights.len();
    let mut delta = vec![2.0 * err * scale];
    for layer in (0..n_layers).rev() {
        let fan_in = model.widths[layer];
        let input = &acts[layer];
        for (row, &dz) in delta.iter().enumerate() {
            grads.biases[layer][row] += dz;
            for (k, &v) in input.iter().enumerate() {
                grads.weights[layer][row * fan_in + k] += dz * v;
            }
        }
        if layer == 0 {
            break;
        }
        let mut prev = vec![0.0; fan_in];
        for (row, &dz) in delta.iter().enumerate() {
            for (k, p) in prev.iter_mut().enumerate() {
                *p += dz * model.weights[layer][row * fan_in + k];
            }
        }
        for (p, &a) in prev.iter_mut().zip(&acts[layer]) {
            if a <= 0.0 {
                *p = 0.0;
            }
        }
        delta = prev;
    }
    err * err
}

/// Fit the model in place with mini-batch Adam on mean squared error.
///
/// Normalization statistics are fitted on `data` and stored in the model, so
/// later forward passes see the same scaling. A loss that stops being finite
/// aborts with the trajectory collected so far.
pub fn train(
    model: &mut MLPModel,
    data: &[(Vec<f64>, f64)],
    cfg: &TrainConfig,
) -> Result<TrainingTrace, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyData);
    }
    if cfg.learning_rate <= 0.0 || cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(LearnError::InvalidConfig(
            "learning rate, epochs, and batch size must be positive".into(),
        ));
    }
    let dim = model.input_len();
    for (x, y) in data {
        if x.len() != dim {
            return Err(LearnError::InputLength {
                got: x.len(),
                expected: dim,
            });
        }
        if x.iter().any(|v| !v.is_finite()) || !y.is_finite() {
            return Err(LearnError::NonFiniteInput);
        }
    }

    match cfg.normalization {
        Normalization::Standardize => {
            let n = data.len() as f64;
            for j in 0..dim {
                let mean = data.iter().map(|(x, _)| x[j]).sum::<f64>() / n;
                let var = data.iter().map(|(x, _)| (x[j] - mean).powi(2)).sum::<f64>() / n;
                let std = var.sqrt();
                model.input_mean[j] = mean;
                model.input_std[j] = if std > 1e-9 { std } else { 1.0 };
            }
        }
        Normalization::Raw => {
            model.input_mean = vec![0.0; dim];
            model.input_std = vec![1.0; dim];
        }
    }
    let normalized: Vec<(Vec<f64>, f64)> = data
        .iter()
        .map(|(x, y)| (model.normalize(x), *y))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut indices: Vec<usize> = (0..data.len()).collect();
    let mut m = Gradients::zeroed(model);
    let mut v = Gradients::zeroed(model);
    let mut step = 0u64;
    let mut trace = TrainingTrace {
        epoch_losses: Vec::with_capacity(cfg.epochs),
        stopped_epoch: 0,
    };
    let mut best = f64::INFINITY;
    let mut stale = 0usize;

    for epoch in 0..cfg.epochs {
        use rand::seq::SliceRandom;
        indices.shuffle(&mut rng);
        let mut epoch_sq_sum = 0.0;
        for batch in indices.chunks(cfg.batch_size) {
            let mut grads = Gradients::zeroed(model);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (x_norm, y) = &normalized[i];
                epoch_sq_sum += accumulate_sample(model, x_norm, *y, scale, &mut grads);
            }
            step += 1;
            let bc1 = 1.0 - cfg.beta1.powi(step as i32);
            let bc2 = 1.0 - cfg.beta2.powi(step as i32);
            for layer in 0..model.weights.len() {
                for (p, (g, (mi, vi))) in model.weights[layer].iter_mut().zip(
                    grads.weights[layer]
                        .iter()
                        .zip(m.weights[layer].iter_mut().zip(v.weights[layer].iter_mut())),
                ) {
                    *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * g;
                    *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * g * g;
                    *p -= cfg.learning_rate * (*mi / bc1) / ((*vi / bc2).sqrt() + cfg.epsilon);
                }
                for (p, (g, (mi, vi))) in model.biases[layer].iter_mut().zip(
                    grads.biases[layer]
                        .iter()
                        .zip(m.biases[layer].iter_mut().zip(v.biases[layer].iter_mut())),
                ) {
                    *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * g;
                    *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * g * g;
                    *p -= cfg.learning_rate * (*mi / bc1) / ((*vi / bc2).sqrt() + cfg.epsilon);
                }
            }
        }
        let epoch_loss = epoch_sq_sum / data.len() as f64;
        trace.epoch_losses.push(epoch_loss);
        trace.stopped_epoch = epoch;
        if !epoch_loss.is_finite() {
            return Err(LearnError::Diverged {
                epoch,
                trajectory: trace.epoch_losses,
            });
        }
        if epoch_loss + 1e-12 < best {
            best = epoch_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }
    Ok(trace)
}

/// Coefficient of determination, mean absolute error, and the fraction of
/// predictions within 0.05 of the true value range.
#[derive(Clone, Copy, Serialize, Deserialize, Debug, PartialEq)]
pub struct Metrics {
    pub r2: f64,
    pub mae: f64,
    pub accuracy: f64,
}

pub fn metrics(y_true: &[f64], y_pred: &[f64]) -> Result<Metrics, LearnError> {
    if y_true.len() != y_pred.len() {
        return Err(LearnError::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(LearnError::EmptyData);
    }
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(LearnError::ZeroVariance);
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    let mae = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p).abs())
        .sum::<f64>()
        / n;
    let lo = y_true.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = y_true.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bound = 0.05 * (hi - lo);
    let accuracy = y_true
        .iter()
        .zip(y_pred)
        .filter(|(y, p)| (*y - *p).abs() <= bound)
        .count() as f64
        / n;
    Ok(Metrics {
        r2: 1.0 - ss_res / ss_tot,
        mae,
        accuracy,
    })
}

/// Sample product-moment correlation in [-1, 1].
pub fn pmcc(x: &[f64], y: &[f64]) -> Result<f64, LearnError> {
    if x.len() != y.len() {
        return Err(LearnError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(LearnError::TooFewSamples {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(LearnError::ZeroVariance);
    }
    Ok(cov / (vx * vy).sqrt())
}

#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub metrics: Metrics,
}

/// Per-fold scores with their mean and standard error.
#[derive(Clone, Serialize, Deserialize, Debug)]
pub struct RegressionReport {
    pub folds: Vec<FoldReport>,
    pub mean: Metrics,
    pub std_error: Metrics,
    pub k: usize,
    pub train_fraction: f64,
}

/// Shuffled k-fold cross-validation: k disjoint test folds covering the
/// data, one freshly initialized model per fold, scores aggregated as
/// mean and standard error. Folds train in parallel.
pub fn cross_validate(
    data: &[(Vec<f64>, f64)],
    cfg: &TrainConfig,
    k: usize,
) -> Result<RegressionReport, LearnError> {
    if k < 2 {
        return Err(LearnError::InvalidConfig("need at least 2 folds".into()));
    }
    if data.len() < k {
        return Err(LearnError::TooFewSamples {
            needed: k,
            got: data.len(),
        });
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        order.shuffle(&mut rng);
    }
    let n = data.len();
    let bounds: Vec<usize> = (0..=k).map(|i| i * n / k).collect();
    let folds: Vec<FoldReport> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let test_idx = &order[bounds[fold]..bounds[fold + 1]];
            let train: Vec<(Vec<f64>, f64)> = order[..bounds[fold]]
                .iter()
                .chain(&order[bounds[fold + 1]..])
                .map(|&i| data[i].clone())
                .collect();
            let mut seed_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            seed_rng.set_stream(fold as u64 + 1);
            let mut model = MLPModel::new_seeded(seed_rng.next_u64());
            let fold_cfg = TrainConfig {
                seed: seed_rng.next_u64(),
                ..*cfg
            };
            train_fold(&mut model, &train, &fold_cfg, data, test_idx, fold)
        })
        .collect::<Result<_, _>>()?;

    let agg = |f: fn(&Metrics) -> f64| {
        let vals: Vec<f64> = folds.iter().map(|r| f(&r.metrics)).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        (mean, (var / vals.len() as f64).sqrt())
    };
    let (r2_m, r2_se) = agg(|m| m.r2);
    let (mae_m, mae_se) = agg(|m| m.mae);
    let (acc_m, acc_se) = agg(|m| m.accuracy);
    Ok(RegressionReport {
        folds,
        mean: Metrics {
            r2: r2_m,
            mae: mae_m,
            accuracy: acc_m,
        },
        std_error: Metrics {
            r2: r2_se,
            mae: mae_se,
            accuracy: acc_se,
        },
        k,
        train_fraction: 1.0 - 1.0 / k as f64,
    })
}

fn train_fold(
    model: &mut MLPModel,
    train_data: &[(Vec<f64>, f64)],
    cfg: &TrainConfig,
    all: &[(Vec<f64>, f64)],
    test_idx: &[usize],
    fold: usize,
) -> Result<FoldReport, LearnError> {
    train(model, train_data, cfg)?;
    let y_true: Vec<f64> = test_idx.iter().map(|&i| all[i].1).collect();
    let y_pred: Vec<f64> = test_idx
        .iter()
        .map(|&i| model.forward(&all[i].0))
        .collect::<Result<_, _>>()?;
    Ok(FoldReport {
        fold,
        train_size: train_data.len(),
        test_size: test_idx.len(),
        metrics: metrics(&y_true, &y_pred)?,
    })
}

/// Split for the extrapolation experiment: the given fraction with the
/// smallest targets trains, the largest targets test. Ties broken by the
/// input vector so the split is deterministic.
pub fn extrapolation_split(
    data: &[(Vec<f64>, f64)],
    train_fraction: f64,
) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        data[a]
            .1
            .partial_cmp(&data[b].1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                data[a]
                    .0
                    .partial_cmp(&data[b].0)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    let cut = ((data.len() as f64) * train_fraction).floor() as usize;
    (order[..cut].to_vec(), order[cut..].to_vec())
}

/// Fraction of samples where thresholding the regression output at 1/2
/// matches a {0, 1} label. Used for the two-class probe.
pub fn threshold_accuracy(
    model: &MLPModel,
    data: &[(Vec<f64>, f64)],
) -> Result<f64, LearnError> {
    if data.is_empty() {
        return Err(LearnError::EmptyData);
    }
    let mut correct = 0usize;
    for (x, y) in data {
        let pred = model.forward(x)?;
        if (pred >= 0.5) == (*y >= 0.5) {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Feature vector for one weight system: the five weights sorted ascending.
pub fn weight_features(weights: &[u32; NVARS]) -> Vec<f64> {
    let mut sorted = *weights;
    sorted.sort_unstable();
    sorted.iter().map(|&w| f64::from(w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeroed_model(widths: &[usize]) -> MLPModel {
        let mut model = MLPModel::with_widths(widths, 0);
        for w in &mut model.weights {
            w.iter_mut().for_each(|v| *v = 0.0);
        }
        model
    }

    fn random_vectors(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..NVARS).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn forward_trivial_cases() {
        let zero = zeroed_model(&DEFAULT_WIDTHS);
        assert_eq!(zero.forward(&[3.0, -1.0, 2.0, 0.5, 9.0]).unwrap(), 0.0);

        let mut path = zeroed_model(&DEFAULT_WIDTHS);
        for w in &mut path.weights {
            w[0] = 1.0;
        }
        let x = [7.5, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(path.forward(&x).unwrap(), 7.5);

        let a = MLPModel::new_seeded(99);
        let b = MLPModel::new_seeded(99);
        let input = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(a.forward(&input).unwrap(), b.forward(&input).unwrap());
        assert!(matches!(
            a.forward(&[f64::NAN, 0.0, 0.0, 0.0, 0.0]),
            Err(LearnError::NonFiniteInput)
        ));
        assert!(matches!(
            a.forward(&[1.0, 2.0]),
            Err(LearnError::InputLength { got: 2, expected: 5 })
        ));
    }

    #[test]
    fn constant_target_converges() {
        let data: Vec<(Vec<f64>, f64)> = random_vectors(128, 5)
            .into_iter()
            .map(|x| (x, 3.25))
            .collect();
        let mut model = MLPModel::new_seeded(1);
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 1e-2,
            ..TrainConfig::default()
        };
        let trace = train(&mut model, &data, &cfg).unwrap();
        assert!(
            *trace.epoch_losses.last().unwrap() < 1e-3,
            "final loss {}",
            trace.epoch_losses.last().unwrap()
        );
    }

    #[test]
    fn linear_target_is_learned() {
        let xs = random_vectors(600, 8);
        let data: Vec<(Vec<f64>, f64)> = xs
            .into_iter()
            .map(|x| {
                let y = x.iter().sum::<f64>();
                (x, y)
            })
            .collect();
        let (train_set, test_set) = data.split_at(500);
        let mut model = MLPModel::new_seeded(2);
        train(&mut model, train_set, &TrainConfig::default()).unwrap();
        let y_true: Vec<f64> = test_set.iter().map(|(_, y)| *y).collect();
        let y_pred: Vec<f64> = test_set
            .iter()
            .map(|(x, _)| model.forward(x).unwrap())
            .collect();
        let m = metrics(&y_true, &y_pred).unwrap();
        assert!(m.r2 >= 0.99, "r2 {}", m.r2);
    }

    /// Smallest |pre-activation| over all hidden units and samples. Central
    /// differences are only trustworthy away from the rectifier kink.
    fn kink_margin(model: &MLPModel, xs: &[Vec<f64>]) -> f64 {
        let mut margin = f64::INFINITY;
        for x in xs {
            let mut input = x.clone();
            for layer in 0..model.weights.len() - 1 {
                let fan_in = model.widths[layer];
                let mut out = Vec::new();
                for (row, bias) in model.biases[layer].iter().enumerate() {
                    let mut z = *bias;
                    for (k, &v) in input.iter().enumerate() {
                        z += model.weights[layer][row * fan_in + k] * v;
                    }
                    margin = margin.min(z.abs());
                    out.push(z.max(0.0));
                }
                input = out;
            }
        }
        margin
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let widths = [5, 4, 3, 1];
        let model = MLPModel::with_widths(&widths, 17);
        let (xs, seed) = (0..)
            .map(|s| (random_vectors(3, s), s))
            .find(|(xs, _)| kink_margin(&model, xs) > 1e-3)
            .unwrap();
        assert!(seed < 20, "no kink-free sample batch among early seeds");
        let ys = [0.7, -1.1, 0.4];
        let data: Vec<(Vec<f64>, f64)> = xs.iter().cloned().zip(ys).collect();

        let loss_of = |m: &MLPModel| loss_and_gradients(m, &data).unwrap().loss;
        let grads = loss_and_gradients(&model, &data).unwrap();

        let h = 1e-5;
        for layer in 0..model.weights.len() {
            for idx in 0..model.weights[layer].len() {
                let mut plus = model.clone();
                plus.weights[layer][idx] += h;
                let mut minus = model.clone();
                minus.weights[layer][idx] -= h;
                let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                let analytic = grads.weights[layer][idx];
                let denom = numeric.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    (numeric - analytic).abs() / denom < 1e-4,
                    "layer {layer} weight {idx}: analytic {analytic}, numeric {numeric}"
                );
            }
            for idx in 0..model.biases[layer].len() {
                let mut plus = model.clone();
                plus.biases[layer][idx] += h;
                let mut minus = model.clone();
                minus.biases[layer][idx] -= h;
                let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                let analytic = grads.biases[layer][idx];
                let denom = numeric.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    (numeric - analytic).abs() / denom < 1e-4,
                    "layer {layer} bias {idx}: analytic {analytic}, numeric {numeric}"
                );
            }
        }
    }

    #[test]
    fn metric_identities_and_examples() {
        let y = [1.0, 2.0, 5.0, 9.0];
        let perfect = metrics(&y, &y).unwrap();
        assert_eq!((perfect.r2, perfect.mae, perfect.accuracy), (1.0, 0.0, 1.0));

        let mean = y.iter().sum::<f64>() / 4.0;
        let at_mean = metrics(&y, &[mean; 4]).unwrap();
        assert!(at_mean.r2.abs() < 1e-12);

        let m = metrics(&[0.0, 10.0], &[0.4, 10.0]).unwrap();
        assert!((m.mae - 0.2).abs() < 1e-12);
        assert_eq!(m.accuracy, 1.0);

        assert!(matches!(
            metrics(&[2.0, 2.0], &[1.0, 3.0]),
            Err(LearnError::ZeroVariance)
        ));
    }

    #[test]
    fn pmcc_examples_and_affine_invariance() {
        let x = [1.0, 2.0, 3.0];
        assert!((pmcc(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pmcc(&x, &neg).unwrap() + 1.0).abs() < 1e-12);

        let y = [1.0, 2.0, 4.0];
        let r = pmcc(&x, &y).unwrap();
        assert!((r - 0.981_980_506_061_965_9).abs() < 1e-12, "r {r}");

        let scaled: Vec<f64> = y.iter().map(|v| 3.5 * v + 11.0).collect();
        assert!((pmcc(&x, &scaled).unwrap() - r).abs() < 1e-12);
        assert!((pmcc(&y, &x).unwrap() - r).abs() < 1e-12);
        assert!(matches!(
            pmcc(&[1.0, 1.0], &[0.0, 2.0]),
            Err(LearnError::ZeroVariance)
        ));
    }

    #[test]
    fn cross_validation_partitions_and_reproduces() {
        let xs = random_vectors(100, 31);
        let data: Vec<(Vec<f64>, f64)> = xs
            .into_iter()
            .map(|x| {
                let y = 2.0 * x[0] - x[3] + 0.5;
                (x, y)
            })
            .collect();
        let cfg = TrainConfig {
            epochs: 40,
            seed: 4,
            ..TrainConfig::default()
        };
        let report = cross_validate(&data, &cfg, 5).unwrap();
        assert_eq!(report.k, 5);
        assert_eq!(report.folds.len(), 5);
        for fold in &report.folds {
            assert_eq!(fold.test_size, 20);
            assert_eq!(fold.train_size, 80);
            assert!(fold.metrics.r2.is_finite());
        }
        assert!((report.train_fraction - 0.8).abs() < 1e-12);

        let again = cross_validate(&data, &cfg, 5).unwrap();
        for (a, b) in report.folds.iter().zip(&again.folds) {
            assert_eq!(a.metrics, b.metrics);
        }
        assert_eq!(report.mean, again.mean);
        assert_eq!(report.std_error, again.std_error);
    }

    #[test]
    fn tiny_two_fold_report_is_well_formed() {
        let data: Vec<(Vec<f64>, f64)> = (0..10)
            .map(|i| {
                let x: Vec<f64> = (0..NVARS).map(|j| (i * NVARS + j) as f64).collect();
                (x, i as f64)
            })
            .collect();
        let cfg = TrainConfig {
            epochs: 30,
            ..TrainConfig::default()
        };
        let report = cross_validate(&data, &cfg, 2).unwrap();
        assert_eq!(report.folds.len(), 2);
        for fold in &report.folds {
            assert!(fold.metrics.mae.is_finite());
            assert!((0.0..=1.0).contains(&fold.metrics.accuracy));
        }
    }

    #[test]
    fn extrapolation_split_isolates_the_largest_targets() {
        let data: Vec<(Vec<f64>, f64)> = (0..40)
            .map(|i| {
                let x: Vec<f64> = (0..NVARS).map(|j| ((i + j) % 7) as f64).collect();
                (x, ((i * 13) % 40) as f64)
            })
            .collect();
        let (train_idx, test_idx) = extrapolation_split(&data, 0.95);
        assert_eq!(train_idx.len(), 38);
        assert_eq!(test_idx.len(), 2);
        let max_train = train_idx.iter().map(|&i| data[i].1).fold(f64::MIN, f64::max);
        let min_test = test_idx.iter().map(|&i| data[i].1).fold(f64::MAX, f64::min);
        assert!(max_train <= min_test);
        let mut all: Vec<usize> = train_idx.iter().chain(&test_idx).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..40).collect::<Vec<_>>());
    }

    #[test]
    fn divergence_is_reported_with_trajectory() {
        let data: Vec<(Vec<f64>, f64)> = random_vectors(8, 2)
            .into_iter()
            .map(|x| (x, 1e200))
            .collect();
        let mut model = MLPModel::new_seeded(0);
        let cfg = TrainConfig {
            learning_rate: 1.0,
            epochs: 50,
            ..TrainConfig::default()
        };
        match train(&mut model, &data, &cfg) {
            Err(LearnError::Diverged { trajectory, .. }) => assert!(!trajectory.is_empty()),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn checkpoint_round_trip_preserves_predictions() {
        let xs = random_vectors(50, 13);
        let data: Vec<(Vec<f64>, f64)> = xs
            .into_iter()
            .map(|x| {
                let y = x[1] * 3.0 - x[4];
                (x, y)
            })
            .collect();
        let mut model = MLPModel::new_seeded(6);
        let cfg = TrainConfig {
            epochs: 20,
            ..TrainConfig::default()
        };
        train(&mut model, &data, &cfg).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let restored: MLPModel = serde_json::from_str(&json).unwrap();
        for (x, _) in &data {
            assert_eq!(model.forward(x).unwrap(), restored.forward(x).unwrap());
        }
    }

    #[test]
    fn sorted_weight_features() {
        assert_eq!(
            weight_features(&[75, 22, 49, 29, 50]),
            vec![22.0, 29.0, 49.0, 50.0, 75.0]
        );
    }

    #[test]
    fn threshold_probe_scores_labels() {
        let mut model = zeroed_model(&DEFAULT_WIDTHS);
        let last = model.biases.len() - 1;
        model.biases[last][0] = 1.0;
        let data = vec![
            (vec![0.0; NVARS], 1.0),
            (vec![1.0; NVARS], 0.0),
            (vec![2.0; NVARS], 1.0),
        ];
        let acc = threshold_accuracy(&model, &data).unwrap();
        assert!((acc - 2.0 / 3.0).abs() < 1e-12);
    }
}
