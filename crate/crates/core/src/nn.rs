//! Fully connected ReLU network used as the learned distance estimator.
//!
//! Inputs are mostly 0/1 vectors with few ones, so the first layer only
//! touches nonzero inputs. Training and inference share that code path.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::sampler::TrainingSet;
use crate::task::{Layout, StateVector};

pub const MODEL_MAGIC: &[u8; 7] = b"SINGNN1";

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs × inputs`, row-major.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        DenseLayer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layout: Layout,
    /// Fingerprint of the fact space the model was trained on.
    pub fingerprint: u64,
    pub layers: Vec<DenseLayer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    /// `Σ |ŷ − y| / (y + 1)`
    RelativeError,
    /// `Σ (ŷ − y)² / n`
    Mse,
}

/// Glorot-uniform weights, zero biases, single linear output.
pub fn init_network<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], rng: &mut R) -> MlpModel {
    assert!(input_dim >= 1 && hidden.iter().all(|&w| w >= 1));
    let mut dims = vec![input_dim];
    dims.extend_from_slice(hidden);
    dims.push(1);
    let layers = dims
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut layer = DenseLayer::zeros(fan_in, fan_out);
            for x in layer.weights.iter_mut() {
                *x = rng.gen_range(-limit..=limit);
            }
            layer
        })
        .collect();
    MlpModel {
        layout: Layout::Boolean,
        fingerprint: 0,
        layers,
    }
}

/// Nonzero entries of an input vector.
pub fn sparse_input(values: &[f64]) -> Vec<(usize, f64)> {
    values
        .iter()
        .enumerate()
        .filter(|(_, &x)| x != 0.0)
        .map(|(i, &x)| (i, x))
        .collect()
}

/// Per-caller activation buffers.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    activations: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn hidden(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.outputs)
            .collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            activations: self.layers[..self.layers.len() - 1]
                .iter()
                .map(|l| vec![0.0; l.outputs])
                .collect(),
        }
    }

    /// Raw network output for a sparse input; hidden activations are left in
    /// `scratch`.
    pub fn forward_sparse(&self, input: &[(usize, f64)], scratch: &mut Scratch) -> f64 {
        if scratch.activations.len() + 1 != self.layers.len() {
            *scratch = self.scratch();
        }
        let mut output = 0.0;
        for (l, layer) in self.layers.iter().enumerate() {
            let last = l + 1 == self.layers.len();
            let (done, rest) = scratch.activations.split_at_mut(l);
            for o in 0..layer.outputs {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                let mut z = layer.biases[o];
                if l == 0 {
                    for &(j, x) in input {
                        z += row[j] * x;
                    }
                } else {
                    for (w, a) in row.iter().zip(done[l - 1].iter()) {
                        z += w * a;
                    }
                }
                if last {
                    output = z;
                } else {
                    rest[0][o] = z.max(0.0);
                }
            }
        }
        output
    }

    fn check_dim(&self, v: &StateVector) -> Result<()> {
        if v.values.len() != self.input_dim() {
            return Err(PlanError::DimensionMismatch {
                expected: self.input_dim(),
                found: v.values.len(),
            });
        }
        Ok(())
    }

    /// Raw output, not clamped.
    pub fn forward(&self, v: &StateVector) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.forward_sparse(&sparse_input(&v.values), &mut self.scratch()))
    }

    pub fn forward_batch(&self, vs: &[StateVector]) -> Result<Vec<f64>> {
        let mut scratch = self.scratch();
        vs.iter()
            .map(|v| {
                self.check_dim(v)?;
                Ok(self.forward_sparse(&sparse_input(&v.values), &mut scratch))
            })
            .collect()
    }

    /// Output clamped below at zero, as used for heuristic values.
    pub fn evaluate(&self, v: &StateVector) -> Result<f64> {
        Ok(self.forward(v)?.max(0.0))
    }

    /// Loss of a batch and its gradient with respect to every parameter.
    pub fn gradient(&self, inputs: &[&[(usize, f64)]], targets: &[f64], kind: LossKind) -> (f64, Gradients) {
        let mut grads = Gradients::zeros_like(self);
        let mut scratch = self.scratch();
        let n = inputs.len();
        let mut total = 0.0;
        let mut deltas: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.outputs]).collect();
        for (input, &y) in inputs.iter().zip(targets) {
            let yhat = self.forward_sparse(input, &mut scratch);
            let diff = yhat - y;
            let dout = match kind {
                LossKind::RelativeError => {
                    total += diff.abs() / (y + 1.0);
                    if diff > 0.0 {
                        1.0 / (y + 1.0)
                    } else if diff < 0.0 {
                        -1.0 / (y + 1.0)
                    } else {
                        0.0
                    }
                }
                LossKind::Mse => {
                    total += diff * diff / n as f64;
                    2.0 * diff / n as f64
                }
            };
            let last = self.layers.len() - 1;
            deltas[last][0] = dout;
            for l in (0..self.layers.len()).rev() {
                let layer = &self.layers[l];
                let g = &mut grads.layers[l];
                for o in 0..layer.outputs {
                    let d = deltas[l][o];
                    if d == 0.0 {
                        continue;
                    }
                    g.biases[o] += d;
                    let grow = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    if l == 0 {
                        for &(j, x) in input.iter() {
                            grow[j] += d * x;
                        }
                    } else {
                        for (gw, a) in grow.iter_mut().zip(scratch.activations[l - 1].iter()) {
                            *gw += d * a;
                        }
                    }
                }
                if l > 0 {
                    let (lower, upper) = deltas.split_at_mut(l);
                    let below = &mut lower[l - 1];
                    let acts = &scratch.activations[l - 1];
                    for (j, b) in below.iter_mut().enumerate() {
                        if acts[j] <= 0.0 {
                            *b = 0.0;
                            continue;
                        }
                        let mut s = 0.0;
                        for o in 0..layer.outputs {
                            s += layer.weights[o * layer.inputs + j] * upper[0][o];
                        }
                        *b = s;
                    }
                }
            }
        }
        (total, grads)
    }

    fn parameters_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn parameters(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<DenseLayer>,
}

impl Gradients {
    fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            layers: model
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.inputs, l.outputs))
                .collect(),
        }
    }

    /// Same order as [`MlpModel::parameters`].
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied())
            .collect()
    }
}

pub fn loss(predictions: &[f64], targets: &[f64], kind: LossKind) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(PlanError::DimensionMismatch {
            expected: targets.len(),
            found: predictions.len(),
        });
    }
    let pairs = predictions.iter().zip(targets);
    Ok(match kind {
        LossKind::RelativeError => pairs.map(|(p, y)| (p - y).abs() / (y + 1.0)).sum(),
        LossKind::Mse => {
            if targets.is_empty() {
                0.0
            } else {
                pairs.map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / targets.len() as f64
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub validation_fraction: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossKind::RelativeError,
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 300,
            validation_fraction: 0.1,
            patience: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.batch_size > 0
            && self.max_epochs > 0
            && self.patience > 0
            && self.validation_fraction > 0.0
            && self.validation_fraction < 1.0;
        if ok {
            Ok(())
        } else {
            Err(PlanError::InvalidConfig(format!("bad training configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean per-sample loss on the training split, per epoch.
    pub train_loss: Vec<f64>,
    /// Mean per-sample loss on the validation split, per epoch.
    pub validation_loss: Vec<f64>,
    pub best_epoch: usize,
    pub wall_time_secs: f64,
    /// Training stopped at the deadline rather than by early stopping.
    pub timed_out: bool,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &Gradients) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let g = grads.flat();
        for (i, p) in model.parameters_mut().enumerate() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * g[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * g[i] * g[i];
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            *p -= self.lr * mhat / (vhat.sqrt() + Self::EPS);
        }
    }
}

fn mean_loss(model: &MlpModel, inputs: &[Vec<(usize, f64)>], targets: &[f64], idx: &[usize], kind: LossKind) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let mut scratch = model.scratch();
    let mut total = 0.0;
    for &i in idx {
        let d = model.forward_sparse(&inputs[i], &mut scratch) - targets[i];
        total += match kind {
            LossKind::RelativeError => d.abs() / (targets[i] + 1.0),
            LossKind::Mse => d * d,
        };
    }
    total / idx.len() as f64
}

/// Mini-batch Adam on the training split; returns the parameters of the epoch
/// with the lowest validation loss.
pub fn train(
    mut model: MlpModel,
    tset: &TrainingSet,
    cfg: &TrainConfig,
    deadline: Option<Instant>,
) -> Result<(MlpModel, TrainReport)> {
    cfg.validate()?;
    if tset.is_empty() {
        return Err(PlanError::EmptyTrainingSet);
    }
    if tset.width != model.input_dim() {
        return Err(PlanError::DimensionMismatch {
            expected: model.input_dim(),
            found: tset.width,
        });
    }
    let started = Instant::now();
    model.layout = tset.layout;
    model.fingerprint = tset.fingerprint;

    let inputs: Vec<Vec<(usize, f64)>> = tset
        .samples
        .iter()
        .map(|s| sparse_input(&s.vector.values))
        .collect();
    let targets: Vec<f64> = tset.samples.iter().map(|s| s.label as f64).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    order.shuffle(&mut rng);
    let n_val = if inputs.len() < 2 {
        0
    } else {
        ((inputs.len() as f64 * cfg.validation_fraction).round() as usize).clamp(1, inputs.len() - 1)
    };
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut train_idx = train_idx.to_vec();
    // with a single sample, select on training loss
    let val_idx: Vec<usize> = if val_idx.is_empty() { train_idx.clone() } else { val_idx.to_vec() };

    let mut adam = Adam::new(model.num_parameters(), cfg.learning_rate);
    let mut best = (f64::INFINITY, model.clone(), 0usize);
    let mut report = TrainReport {
        train_loss: Vec::new(),
        validation_loss: Vec::new(),
        best_epoch: 0,
        wall_time_secs: 0.0,
        timed_out: false,
    };
    let mut since_best = 0;
    'epochs: for epoch in 0..cfg.max_epochs {
        train_idx.shuffle(&mut rng);
        for batch in train_idx.chunks(cfg.batch_size) {
            let xs: Vec<&[(usize, f64)]> = batch.iter().map(|&i| inputs[i].as_slice()).collect();
            let ys: Vec<f64> = batch.iter().map(|&i| targets[i]).collect();
            let (batch_loss, grads) = model.gradient(&xs, &ys, cfg.loss);
            if !batch_loss.is_finite() {
                return Err(PlanError::NonFiniteLoss { epoch });
            }
            adam.step(&mut model, &grads);
            if deadline.is_some_and(|d| Instant::now() >= d) {
                report.timed_out = true;
                break 'epochs;
            }
        }
        let tl = mean_loss(&model, &inputs, &targets, &train_idx, cfg.loss);
        let vl = mean_loss(&model, &inputs, &targets, &val_idx, cfg.loss);
        if !tl.is_finite() || !vl.is_finite() {
            return Err(PlanError::NonFiniteLoss { epoch });
        }
        report.train_loss.push(tl);
        report.validation_loss.push(vl);
        if vl < best.0 {
            best = (vl, model.clone(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    if report.train_loss.is_empty() {
        // deadline hit inside the first epoch
        best.1 = model;
    }
    report.best_epoch = best.2;
    report.wall_time_secs = started.elapsed().as_secs_f64();
    Ok((best.1, report))
}

pub fn serialize_model(model: &MlpModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + model.num_parameters() * 8);
    out.extend_from_slice(MODEL_MAGIC);
    out.push(model.layout.tag());
    out.extend_from_slice(&model.fingerprint.to_le_bytes());
    out.extend_from_slice(&(model.input_dim() as u32).to_le_bytes());
    out.extend_from_slice(&(model.layers.len() as u32).to_le_bytes());
    for l in &model.layers {
        out.extend_from_slice(&(l.outputs as u32).to_le_bytes());
    }
    for l in &model.layers {
        for w in l.weights.iter().chain(l.biases.iter()) {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn deserialize_model(bytes: &[u8]) -> Result<MlpModel> {
    let bad = |m: &str| PlanError::ModelFormat(m.to_string());
    if bytes.len() < MODEL_MAGIC.len() || &bytes[..MODEL_MAGIC.len()] != MODEL_MAGIC {
        return Err(bad("unknown magic or version"));
    }
    if bytes.len() < MODEL_MAGIC.len() + 4 {
        return Err(bad("checksum mismatch"));
    }
    let (payload, crc) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(payload) != u32::from_le_bytes(crc.try_into().unwrap()) {
        return Err(bad("checksum mismatch"));
    }
    let mut pos = MODEL_MAGIC.len();
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = payload.get(pos..pos + n).ok_or_else(|| bad("truncated payload"))?;
        pos += n;
        Ok(s)
    };
    let layout = Layout::from_tag(take(1)?[0]).ok_or_else(|| bad("unknown layout tag"))?;
    let fingerprint = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let input_dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let nlayers = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if input_dim == 0 || nlayers == 0 {
        return Err(bad("empty network"));
    }
    let widths = (0..nlayers)
        .map(|_| Ok(u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize))
        .collect::<Result<Vec<_>>>()?;
    if *widths.last().unwrap() != 1 || widths.contains(&0) {
        return Err(bad("bad layer widths"));
    }
    let mut layers = Vec::with_capacity(nlayers);
    let mut fan_in = input_dim;
    for &w in &widths {
        let mut layer = DenseLayer::zeros(fan_in, w);
        for x in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
            *x = f64::from_le_bytes(take(8)?.try_into().unwrap());
            if !x.is_finite() {
                return Err(bad("non-finite parameter"));
            }
        }
        layers.push(layer);
        fan_in = w;
    }
    if pos != payload.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(MlpModel {
        layout,
        fingerprint,
        layers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Sample;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn vector(values: Vec<f64>) -> StateVector {
        StateVector {
            values,
            layout: Layout::Boolean,
        }
    }

    #[test]
    fn shapes_follow_widths() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = init_network(9, &[16], &mut rng);
        assert_eq!((m.layers[0].outputs, m.layers[0].inputs), (16, 9));
        assert_eq!((m.layers[1].outputs, m.layers[1].inputs), (1, 16));
        let m = init_network(25, &[64, 64, 64, 64], &mut rng);
        assert_eq!(m.hidden(), vec![64, 64, 64, 64]);
        assert_eq!(m.layers.len(), 5);
        let limit = (6.0f64 / (25.0 + 64.0)).sqrt();
        assert!(m.layers[0].weights.iter().all(|w| w.abs() <= limit));
        assert!(m.layers.iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn same_seed_same_parameters() {
        let a = init_network(9, &[16], &mut ChaCha8Rng::seed_from_u64(5));
        let b = init_network(9, &[16], &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut m = init_network(4, &[3], &mut ChaCha8Rng::seed_from_u64(0));
        for l in &mut m.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        assert_eq!(m.forward(&vector(vec![1.0, 0.0, 3.0, -2.0])).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_forward() {
        // 2 -> 1 hidden -> 1: h = relu(2*x0 - x1 + 0.5); y = 3h - 1
        let m = MlpModel {
            layout: Layout::Boolean,
            fingerprint: 0,
            layers: vec![
                DenseLayer { inputs: 2, outputs: 1, weights: vec![2.0, -1.0], biases: vec![0.5] },
                DenseLayer { inputs: 1, outputs: 1, weights: vec![3.0], biases: vec![-1.0] },
            ],
        };
        assert_eq!(m.forward(&vector(vec![1.0, 1.0])).unwrap(), 3.5);
        // hidden unit inactive: output is the bias, clamped to 0 for use
        assert_eq!(m.forward(&vector(vec![0.0, 1.0])).unwrap(), -1.0);
        assert_eq!(m.evaluate(&vector(vec![0.0, 1.0])).unwrap(), 0.0);
        assert!(matches!(
            m.forward(&vector(vec![1.0])),
            Err(PlanError::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn batch_equals_single() {
        let m = init_network(5, &[4, 3], &mut ChaCha8Rng::seed_from_u64(2));
        let vs: Vec<StateVector> = (0..6)
            .map(|i| vector((0..5).map(|j| ((i * j) % 3) as f64).collect()))
            .collect();
        let batch = m.forward_batch(&vs).unwrap();
        for (v, b) in vs.iter().zip(batch) {
            assert_eq!(m.forward(v).unwrap().to_bits(), b.to_bits());
        }
    }

    #[test]
    fn loss_examples() {
        assert_eq!(loss(&[2.0], &[1.0], LossKind::RelativeError).unwrap(), 0.5);
        assert_eq!(loss(&[3.0], &[0.0], LossKind::RelativeError).unwrap(), 3.0);
        assert_eq!(loss(&[2.0], &[1.0], LossKind::Mse).unwrap(), 1.0);
        assert!(loss(&[1.0, 2.0], &[1.0], LossKind::Mse).is_err());
    }

    fn toy_set() -> TrainingSet {
        let samples = [(0.0, 0), (1.0, 1)]
            .into_iter()
            .map(|(x, y)| Sample { vector: vector(vec![x]), label: y })
            .collect();
        TrainingSet {
            samples,
            layout: Layout::Boolean,
            width: 1,
            fingerprint: 7,
            per_search: vec![2],
        }
    }

    #[test]
    fn learns_identity_on_toy_set() {
        let m = init_network(1, &[4], &mut ChaCha8Rng::seed_from_u64(1));
        let cfg = TrainConfig {
            max_epochs: 200,
            patience: 200,
            learning_rate: 0.02,
            ..TrainConfig::default()
        };
        let (m, report) = train(m, &toy_set(), &cfg, None).unwrap();
        let final_train = *report.train_loss.last().unwrap();
        assert!(final_train < 0.1, "train loss {final_train}");
        assert!(report.train_loss.len() <= 200);
        assert_eq!(m.fingerprint, 7);
        let min_val = report.validation_loss.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(report.validation_loss[report.best_epoch], min_val);
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = TrainConfig { max_epochs: 20, ..TrainConfig::default() };
        let run = || {
            let m = init_network(1, &[4], &mut ChaCha8Rng::seed_from_u64(1));
            train(m, &toy_set(), &cfg, None).unwrap().0
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn empty_set_rejected() {
        let m = init_network(1, &[4], &mut ChaCha8Rng::seed_from_u64(1));
        let mut ts = toy_set();
        ts.samples.clear();
        assert!(matches!(train(m, &ts, &TrainConfig::default(), None), Err(PlanError::EmptyTrainingSet)));
    }

    #[test]
    fn divergence_is_reported() {
        let m = init_network(1, &[4], &mut ChaCha8Rng::seed_from_u64(1));
        let mut ts = toy_set();
        ts.samples[1].vector.values[0] = f64::INFINITY;
        let r = train(m, &ts, &TrainConfig::default(), None);
        assert!(matches!(r, Err(PlanError::NonFiniteLoss { epoch: 0 })), "{r:?}");
    }

    #[test]
    fn truncated_file_fails_checksum() {
        let m = init_network(3, &[2], &mut ChaCha8Rng::seed_from_u64(0));
        let bytes = serialize_model(&m);
        let err = deserialize_model(&bytes[..bytes.len() - 9]).unwrap_err();
        assert!(err.to_string().contains("checksum"), "{err}");
        let mut wrong = bytes.clone();
        wrong[6] = b'2';
        assert!(deserialize_model(&wrong).unwrap_err().to_string().contains("magic"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn serialization_round_trip(seed in any::<u64>(), dim in 1usize..12, h1 in 1usize..9, h2 in 0usize..5, fp in any::<u64>()) {
            let hidden: Vec<usize> = if h2 == 0 { vec![h1] } else { vec![h1, h2] };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = init_network(dim, &hidden, &mut rng);
            for l in &mut m.layers {
                for b in &mut l.biases { *b = rng.gen_range(-1.0..1.0); }
            }
            m.fingerprint = fp;
            let back = deserialize_model(&serialize_model(&m)).unwrap();
            prop_assert_eq!(&back, &m);
            let v = vector((0..dim).map(|_| rng.gen_range(0..2) as f64).collect());
            prop_assert_eq!(back.forward(&v).unwrap().to_bits(), m.forward(&v).unwrap().to_bits());
        }

        #[test]
        fn losses_nonnegative_and_zero_only_at_equality(
            ys in proptest::collection::vec(0u32..50, 1..20),
            noise in proptest::collection::vec(-3.0f64..3.0, 20),
        ) {
            let ys: Vec<f64> = ys.into_iter().map(f64::from).collect();
            let preds: Vec<f64> = ys.iter().zip(&noise).map(|(y, e)| y + e).collect();
            for kind in [LossKind::RelativeError, LossKind::Mse] {
                let l = loss(&preds, &ys, kind).unwrap();
                prop_assert!(l >= 0.0);
                prop_assert_eq!(l == 0.0, preds == ys);
                prop_assert_eq!(loss(&ys, &ys, kind).unwrap(), 0.0);
            }
        }

        #[test]
        fn forward_is_finite(seed in any::<u64>(), xs in proptest::collection::vec(-1e6f64..1e6, 6)) {
            let m = init_network(6, &[5, 4], &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(m.forward(&vector(xs)).unwrap().is_finite());
        }
    }
}
