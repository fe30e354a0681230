//! The 5-20-10-1 ReLU degradation predictor with structured neuron masks.
//!
//! Inputs are the five normalized cycle features; the single linear output is
//! the normalized SOH loss. Pruning removes whole hidden neurons (incoming
//! row, bias and outgoing column), which is what removes binaries once the
//! network is compiled into a MILP.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{CycleFeatures, Dataset, DegradationSample, Normalization, FEATURE_COUNT};

pub const LAYER_SIZES: [usize; 4] = [FEATURE_COUNT, 20, 10, 1];
pub const HIDDEN_LAYERS: usize = 2;
pub const HIDDEN_NEURONS: usize = 30;
/// Relative-error denominators never drop below this many SOH units.
pub const ACCURACY_FLOOR: f64 = 1e-7;
pub const DEFAULT_TOLERANCES: [f64; 3] = [0.05, 0.10, 0.15];

const NET_FORMAT: &str = "sparse-relu-net/1";
const TRAIN_SALT: u64 = 0x2545_f491_4f6c_dd1d;

/// Fully connected layer; `weights[out][in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseLayer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(outputs: usize, inputs: usize) -> Self {
        DenseLayer {
            weights: vec![vec![0.0; inputs]; outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn outputs(&self) -> usize {
        self.bias.len()
    }

    pub fn inputs(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn affine(&self, x: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out.iter_mut().zip(self.weights.iter().zip(&self.bias)) {
            *o = row.iter().zip(x).fold(*b, |acc, (w, xi)| acc + w * xi);
        }
    }
}

/// Identifies a hidden neuron: `layer` 0 is the 20-wide layer, 1 the 10-wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NeuronId {
    pub layer: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseNet {
    /// Input→hidden1, hidden1→hidden2, hidden2→output.
    pub layers: [DenseLayer; 3],
    /// Hidden neuron masks; `false` means pruned.
    pub masks: [Vec<bool>; HIDDEN_LAYERS],
    /// Requested sparsity the masks were built for.
    pub sparsity: f64,
    pub normalization: Normalization,
}

/// Intermediate values of one forward pass, all in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub pre: [Vec<f64>; HIDDEN_LAYERS],
    pub post: [Vec<f64>; HIDDEN_LAYERS],
    pub output: f64,
}

impl SparseNet {
    pub fn zeros(normalization: Normalization) -> Self {
        SparseNet {
            layers: empty_layers(),
            masks: [vec![true; LAYER_SIZES[1]], vec![true; LAYER_SIZES[2]]],
            sparsity: 0.0,
            normalization,
        }
    }

    /// Dense net with weights and biases drawn from `U(-0.5, 0.5)`.
    pub fn random(seed: u64, normalization: Normalization) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = SparseNet::zeros(normalization);
        for layer in net.layers.iter_mut() {
            for row in layer.weights.iter_mut() {
                for w in row.iter_mut() {
                    *w = rng.gen_range(-0.5..0.5);
                }
            }
            for b in layer.bias.iter_mut() {
                *b = rng.gen_range(-0.5..0.5);
            }
        }
        net
    }

    pub fn is_active(&self, id: NeuronId) -> bool {
        self.masks[id.layer][id.index]
    }

    pub fn active_neurons(&self) -> usize {
        self.masks.iter().flatten().filter(|&&m| m).count()
    }

    /// Fraction of hidden neurons that are masked off.
    pub fn realized_sparsity(&self) -> f64 {
        (HIDDEN_NEURONS - self.active_neurons()) as f64 / HIDDEN_NEURONS as f64
    }

    /// Checks dimensions, finiteness and mask hygiene.
    pub fn validate(&self) -> Result<()> {
        for (l, layer) in self.layers.iter().enumerate() {
            let (outs, ins) = (LAYER_SIZES[l + 1], LAYER_SIZES[l]);
            if layer.bias.len() != outs
                || layer.weights.len() != outs
                || layer.weights.iter().any(|r| r.len() != ins)
            {
                return Err(Error::Structural(format!(
                    "layer {} must be {outs}x{ins}",
                    l + 1
                )));
            }
            let finite = layer.bias.iter().chain(layer.weights.iter().flatten()).all(|v| v.is_finite());
            if !finite {
                return Err(Error::Structural(format!("layer {} has non-finite parameters", l + 1)));
            }
        }
        for (h, mask) in self.masks.iter().enumerate() {
            if mask.len() != LAYER_SIZES[h + 1] {
                return Err(Error::Structural(format!(
                    "mask {} must have {} entries",
                    h + 1,
                    LAYER_SIZES[h + 1]
                )));
            }
        }
        if !(0.0..1.0).contains(&self.sparsity) {
            return Err(Error::Structural(format!("sparsity {} not in [0, 1)", self.sparsity)));
        }
        if let Some(id) = self.mask_violation() {
            return Err(Error::Structural(format!(
                "masked neuron {}:{} has nonzero parameters",
                id.layer + 1,
                id.index
            )));
        }
        Ok(())
    }

    /// First masked neuron that still carries a nonzero bias, incoming or outgoing weight.
    pub fn mask_violation(&self) -> Option<NeuronId> {
        for h in 0..HIDDEN_LAYERS {
            let (incoming, outgoing) = (&self.layers[h], &self.layers[h + 1]);
            for (j, &keep) in self.masks[h].iter().enumerate() {
                if keep {
                    continue;
                }
                let dirty = incoming.bias[j] != 0.0
                    || incoming.weights[j].iter().any(|&w| w != 0.0)
                    || outgoing.weights.iter().any(|row| row[j] != 0.0);
                if dirty {
                    return Some(NeuronId { layer: h, index: j });
                }
            }
        }
        None
    }

    /// Zeroes every parameter attached to a masked neuron.
    pub fn apply_masks(&mut self) {
        zero_masked(&mut self.layers, &self.masks);
    }

    pub fn set_masks(&mut self, masks: [Vec<bool>; HIDDEN_LAYERS], sparsity: f64) {
        self.masks = masks;
        self.sparsity = sparsity;
        self.apply_masks();
    }

    pub fn activations(&self, x: &[f64; FEATURE_COUNT]) -> Activations {
        let mut pre1 = vec![0.0; LAYER_SIZES[1]];
        self.layers[0].affine(x, &mut pre1);
        let post1: Vec<f64> = pre1
            .iter()
            .zip(&self.masks[0])
            .map(|(&z, &m)| if m { z.max(0.0) } else { 0.0 })
            .collect();
        let mut pre2 = vec![0.0; LAYER_SIZES[2]];
        self.layers[1].affine(&post1, &mut pre2);
        let post2: Vec<f64> = pre2
            .iter()
            .zip(&self.masks[1])
            .map(|(&z, &m)| if m { z.max(0.0) } else { 0.0 })
            .collect();
        let mut out = [0.0];
        self.layers[2].affine(&post2, &mut out);
        Activations {
            pre: [pre1, pre2],
            post: [post1, post2],
            output: out[0],
        }
    }

    /// Normalized output for a normalized input.
    pub fn forward_normalized(&self, x: &[f64; FEATURE_COUNT]) -> f64 {
        self.activations(x).output
    }

    /// Predicted SOH loss for a normalized feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        let x: &[f64; FEATURE_COUNT] = x.try_into().map_err(|_| {
            Error::Structural(format!("expected {FEATURE_COUNT} inputs, got {}", x.len()))
        })?;
        Ok(self.normalization.denormalize_target(self.forward_normalized(x)))
    }

    /// Predicted SOH loss for raw cycle features.
    pub fn predict(&self, f: &CycleFeatures) -> Result<f64> {
        let x = self.normalization.normalize(f)?;
        Ok(self.normalization.denormalize_target(self.forward_normalized(&x)))
    }

    /// Batch MSE on normalized targets and its gradient for every parameter.
    pub fn mse_gradients(&self, xs: &[[f64; FEATURE_COUNT]], ys: &[f64]) -> (f64, [DenseLayer; 3]) {
        let mut grads = empty_layers();
        let n = xs.len().max(1) as f64;
        let mut loss = 0.0;
        let mut dz2 = vec![0.0; LAYER_SIZES[2]];
        let mut dz1 = vec![0.0; LAYER_SIZES[1]];
        for (x, &y) in xs.iter().zip(ys) {
            let act = self.activations(x);
            let err = act.output - y;
            loss += err * err;
            let g = 2.0 * err / n;

            grads[2].bias[0] += g;
            for (j, dz) in dz2.iter_mut().enumerate() {
                grads[2].weights[0][j] += g * act.post[1][j];
                let open = self.masks[1][j] && act.pre[1][j] > 0.0;
                *dz = if open { g * self.layers[2].weights[0][j] } else { 0.0 };
            }
            dz1.iter_mut().for_each(|d| *d = 0.0);
            for (j, &dz) in dz2.iter().enumerate() {
                if dz == 0.0 {
                    continue;
                }
                grads[1].bias[j] += dz;
                let row = &self.layers[1].weights[j];
                let grow = &mut grads[1].weights[j];
                for i in 0..LAYER_SIZES[1] {
                    grow[i] += dz * act.post[0][i];
                    dz1[i] += dz * row[i];
                }
            }
            for (i, dz) in dz1.iter_mut().enumerate() {
                if !(self.masks[0][i] && act.pre[0][i] > 0.0) {
                    continue;
                }
                grads[0].bias[i] += *dz;
                for (gw, xk) in grads[0].weights[i].iter_mut().zip(x) {
                    *gw += *dz * xk;
                }
            }
        }
        (loss / n, grads)
    }

    fn step(&mut self, velocity: &[DenseLayer; 3]) {
        for (layer, vel) in self.layers.iter_mut().zip(velocity) {
            for (b, v) in layer.bias.iter_mut().zip(&vel.bias) {
                *b += v;
            }
            for (row, vrow) in layer.weights.iter_mut().zip(&vel.weights) {
                for (w, v) in row.iter_mut().zip(vrow) {
                    *w += v;
                }
            }
        }
    }

    /// Importance of a hidden neuron: `L1(incoming) + L1(outgoing) + |bias|`.
    pub fn neuron_score(&self, id: NeuronId) -> f64 {
        let incoming = &self.layers[id.layer];
        let outgoing = &self.layers[id.layer + 1];
        let l1_in: f64 = incoming.weights[id.index].iter().map(|w| w.abs()).sum();
        let l1_out: f64 = outgoing.weights.iter().map(|row| row[id.index].abs()).sum();
        l1_in + l1_out + incoming.bias[id.index].abs()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        SparseNet::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = NetFile {
            format: NET_FORMAT.to_string(),
            layer_sizes: LAYER_SIZES.to_vec(),
            sparsity: self.sparsity,
            normalization: self.normalization.clone(),
            layers: self.layers.to_vec(),
            masks: self.masks.to_vec(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("net serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetFile = serde_json::from_str(text).map_err(|e| Error::from_json(e, "net"))?;
        if file.format != NET_FORMAT {
            return Err(Error::parse(1, "format", format!("expected `{NET_FORMAT}`")));
        }
        if file.layer_sizes != LAYER_SIZES {
            return Err(Error::Structural(format!(
                "layer sizes {:?} must be {LAYER_SIZES:?}",
                file.layer_sizes
            )));
        }
        let layers: [DenseLayer; 3] = file
            .layers
            .try_into()
            .map_err(|_| Error::Structural("expected exactly 3 weight layers".into()))?;
        let masks: [Vec<bool>; HIDDEN_LAYERS] = file
            .masks
            .try_into()
            .map_err(|_| Error::Structural("expected exactly 2 hidden masks".into()))?;
        let net = SparseNet {
            layers,
            masks,
            sparsity: file.sparsity,
            normalization: file.normalization,
        };
        net.validate()?;
        Ok(net)
    }
}

fn zero_masked(layers: &mut [DenseLayer; 3], masks: &[Vec<bool>; HIDDEN_LAYERS]) {
    for h in 0..HIDDEN_LAYERS {
        let (left, right) = layers.split_at_mut(h + 1);
        let (incoming, outgoing) = (&mut left[h], &mut right[0]);
        for (j, &keep) in masks[h].iter().enumerate() {
            if keep {
                continue;
            }
            incoming.bias[j] = 0.0;
            incoming.weights[j].iter_mut().for_each(|w| *w = 0.0);
            outgoing.weights.iter_mut().for_each(|row| row[j] = 0.0);
        }
    }
}

fn empty_layers() -> [DenseLayer; 3] {
    [
        DenseLayer::zeros(LAYER_SIZES[1], LAYER_SIZES[0]),
        DenseLayer::zeros(LAYER_SIZES[2], LAYER_SIZES[1]),
        DenseLayer::zeros(LAYER_SIZES[3], LAYER_SIZES[2]),
    ]
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetFile {
    format: String,
    layer_sizes: Vec<usize>,
    sparsity: f64,
    normalization: Normalization,
    layers: Vec<DenseLayer>,
    masks: Vec<Vec<bool>>,
}

/// Number of hidden neurons removed at sparsity `eps`: `⌈eps·30⌉`.
pub fn pruned_count(eps: f64) -> usize {
    // The small offset keeps products like 0.3·30 from rounding up past 9.
    (eps * HIDDEN_NEURONS as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Masks off the `⌈eps·30⌉` lowest-scoring hidden neurons, ranked jointly
/// across both hidden layers (ties: lower layer, then lower index). A neuron
/// is skipped when removing it would empty its layer.
pub fn prune_mask(net: &SparseNet, eps: f64) -> Result<[Vec<bool>; HIDDEN_LAYERS]> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Config(format!("sparsity {eps} not in [0, 1)")));
    }
    let k = pruned_count(eps);
    if k > HIDDEN_NEURONS - HIDDEN_LAYERS {
        return Err(Error::Config(format!(
            "sparsity {eps} prunes {k} of {HIDDEN_NEURONS} neurons and would empty a hidden layer"
        )));
    }
    let mut ranked: Vec<(f64, NeuronId)> = (0..HIDDEN_LAYERS)
        .flat_map(|layer| (0..LAYER_SIZES[layer + 1]).map(move |index| NeuronId { layer, index }))
        .map(|id| (net.neuron_score(id), id))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut masks = [vec![true; LAYER_SIZES[1]], vec![true; LAYER_SIZES[2]]];
    let mut remaining = [LAYER_SIZES[1], LAYER_SIZES[2]];
    let mut pruned = 0;
    for (_, id) in ranked {
        if pruned == k {
            break;
        }
        if remaining[id.layer] == 1 {
            continue;
        }
        masks[id.layer][id.index] = false;
        remaining[id.layer] -= 1;
        pruned += 1;
    }
    Ok(masks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub sparsity: f64,
    /// Epoch `e` uses `learning_rate / (1 + lr_decay·(e − 1))`.
    #[serde(default)]
    pub lr_decay: f64,
    /// Heavy-ball coefficient; 0 is plain gradient descent.
    #[serde(default)]
    pub momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 8,
            learning_rate: 0.05,
            seed: 0,
            sparsity: 0.0,
            lr_decay: 0.01,
            momentum: 0.9,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate < 1.0) {
            return Err(Error::Config(format!(
                "learning_rate {} not in (0, 1)",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.sparsity) {
            return Err(Error::Config(format!("sparsity {} not in [0, 1)", self.sparsity)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum {} not in [0, 1)", self.momentum)));
        }
        if !(self.lr_decay >= 0.0 && self.lr_decay.is_finite()) {
            return Err(Error::Config(format!("lr_decay {} must be >= 0", self.lr_decay)));
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub test_mse: f64,
    pub active_neurons: usize,
    /// Whether this epoch's mask differs from the previous epoch's.
    pub mask_changed: bool,
}

impl EpochRecord {
    pub const CSV_HEADER: &'static str = "epoch,train_mse,test_mse,active_neurons";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.epoch, self.train_mse, self.test_mse, self.active_neurons
        )
    }
}

/// Trains from `U(-0.5, 0.5)` initial weights with the mask recomputed every epoch.
pub fn train_cold(data: &Dataset, cfg: &TrainConfig) -> Result<SparseNet> {
    train_cold_observed(data, cfg, &mut |_| {})
}

pub fn train_cold_observed(
    data: &Dataset,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<SparseNet> {
    cfg.validate()?;
    let net = SparseNet::random(cfg.seed, data.normalization.clone());
    fit(net, data, cfg, observer)
}

/// Starts from a trained dense net and fine-tunes under the sparsity mask.
pub fn train_warm(dense: &SparseNet, data: &Dataset, cfg: &TrainConfig) -> Result<SparseNet> {
    train_warm_observed(dense, data, cfg, &mut |_| {})
}

pub fn train_warm_observed(
    dense: &SparseNet,
    data: &Dataset,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<SparseNet> {
    cfg.validate()?;
    dense.validate()?;
    if dense.active_neurons() != HIDDEN_NEURONS {
        return Err(Error::Config("warm start needs a dense (unpruned) net".into()));
    }
    let mut net = dense.clone();
    net.normalization = data.normalization.clone();
    fit(net, data, cfg, observer)
}

fn normalized_batch(net: &SparseNet, samples: &[DegradationSample]) -> Result<(Vec<[f64; FEATURE_COUNT]>, Vec<f64>)> {
    let n = &net.normalization;
    let xs = samples
        .iter()
        .map(|s| n.normalize(&s.features))
        .collect::<Result<Vec<_>>>()?;
    let ys = samples.iter().map(|s| n.normalize_target(s.delta_soh)).collect();
    Ok((xs, ys))
}

fn fit(
    mut net: SparseNet,
    data: &Dataset,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<SparseNet> {
    let train = data.train_samples();
    if train.is_empty() {
        return Err(Error::Config("training split is empty".into()));
    }
    let (xs, ys) = normalized_batch(&net, &train)?;
    let (test_xs, test_ys) = normalized_batch(&net, &data.test_samples())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ TRAIN_SALT);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut batch_x = Vec::with_capacity(cfg.batch_size);
    let mut batch_y = Vec::with_capacity(cfg.batch_size);
    let mut velocity = empty_layers();

    for epoch in 1..=cfg.epochs {
        let masks = prune_mask(&net, cfg.sparsity)?;
        let mask_changed = masks != net.masks;
        net.set_masks(masks, cfg.sparsity);

        order.shuffle(&mut rng);
        let lr = cfg.learning_rate / (1.0 + cfg.lr_decay * (epoch - 1) as f64);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            batch_x.clear();
            batch_y.clear();
            batch_x.extend(chunk.iter().map(|&i| xs[i]));
            batch_y.extend(chunk.iter().map(|&i| ys[i]));
            let (loss, grads) = net.mse_gradients(&batch_x, &batch_y);
            loss_sum += loss * chunk.len() as f64;
            for (vel, grad) in velocity.iter_mut().zip(&grads) {
                for (v, g) in vel.bias.iter_mut().zip(&grad.bias) {
                    *v = cfg.momentum * *v - lr * g;
                }
                for (vrow, grow) in vel.weights.iter_mut().zip(&grad.weights) {
                    for (v, g) in vrow.iter_mut().zip(grow) {
                        *v = cfg.momentum * *v - lr * g;
                    }
                }
            }
            zero_masked(&mut velocity, &net.masks);
            net.step(&velocity);
            net.apply_masks();
        }
        let train_mse = loss_sum / xs.len() as f64;
        if !train_mse.is_finite() || net.validate().is_err() {
            return Err(Error::Divergence {
                epoch,
                loss: train_mse,
            });
        }
        let test_mse = if test_xs.is_empty() {
            f64::NAN
        } else {
            mse(&net, &test_xs, &test_ys)
        };
        observer(&EpochRecord {
            epoch,
            train_mse,
            test_mse,
            active_neurons: net.active_neurons(),
            mask_changed,
        });
    }
    Ok(net)
}

/// Mean squared error on normalized targets.
pub fn mse(net: &SparseNet, xs: &[[f64; FEATURE_COUNT]], ys: &[f64]) -> f64 {
    let sum: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (net.forward_normalized(x) - y).powi(2))
        .sum();
    sum / xs.len().max(1) as f64
}

/// Normalized-target MSE over raw samples.
pub fn sample_mse(net: &SparseNet, samples: &[DegradationSample]) -> Result<f64> {
    let (xs, ys) = normalized_batch(net, samples)?;
    Ok(mse(net, &xs, &ys))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    /// `(tolerance, fraction accurate)` sorted by tolerance.
    pub by_tolerance: Vec<(f64, f64)>,
    /// Test MSE on normalized targets.
    pub mse: f64,
    pub samples: usize,
}

impl AccuracyReport {
    pub fn at(&self, tolerance: f64) -> Option<f64> {
        self.by_tolerance
            .iter()
            .find(|(t, _)| (t - tolerance).abs() < 1e-12)
            .map(|&(_, a)| a)
    }
}

/// A prediction is accurate at `τ` iff `|pred − actual| ≤ τ·max(actual, 1e-7)`.
pub fn evaluate_accuracy(
    net: &SparseNet,
    samples: &[DegradationSample],
    tolerances: &[f64],
) -> Result<AccuracyReport> {
    if samples.is_empty() {
        return Err(Error::Config("accuracy needs at least one sample".into()));
    }
    let mut tols = tolerances.to_vec();
    tols.sort_by(f64::total_cmp);
    let mut hits = vec![0usize; tols.len()];
    for s in samples {
        let pred = net.predict(&s.features)?;
        let rel = (pred - s.delta_soh).abs() / s.delta_soh.max(ACCURACY_FLOOR);
        for (h, &t) in hits.iter_mut().zip(&tols) {
            if rel <= t {
                *h += 1;
            }
        }
    }
    let n = samples.len() as f64;
    Ok(AccuracyReport {
        by_tolerance: tols.into_iter().zip(hits).map(|(t, h)| (t, h as f64 / n)).collect(),
        mse: sample_mse(net, samples)?,
        samples: samples.len(),
    })
}
