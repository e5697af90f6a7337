//! Dense ReLU classifier used as the conventional reference: seeded
//! initialization, mini-batch SGD with softmax cross-entropy, finite-difference
//! gradient checking, MAC counting for the energy proxy, and rate-based
//! conversion to a spiking network.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::SpikeRaster;
use crate::seed;
use crate::snn::{Layer, LifParams, ResetMode, SimTrace, SpikingNetwork};

/// Fully connected network with ReLU hidden layers and linear output scores.
#[derive(Debug, Clone)]
pub struct DenseNet {
    sizes: Vec<usize>,
    /// Per layer, `weights[l][(i, j)]` connects input i to unit j.
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

impl DenseNet {
    /// He-initialized weights (N(0, 2/fan_in)) and uniform(-0.1, 0.1) biases.
    pub fn new(sizes: &[usize], seed_value: u64) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Config(format!("need ≥ 2 layer sizes, got {}", sizes.len())));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config("layer sizes must be ≥ 1".into()));
        }
        let mut rng = seed::rng(seed_value);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let std = (2.0 / fan_in as f64).sqrt();
            let w = Array2::from_shape_fn((fan_in, fan_out), |_| {
                let g: f64 = rng.sample(StandardNormal);
                g * std
            });
            let b = Array1::from_shape_fn(fan_out, |_| rng.gen_range(-0.1..0.1));
            weights.push(w);
            biases.push(b);
        }
        Ok(Self { sizes: sizes.to_vec(), weights, biases })
    }

    /// Build from explicit parameters (used for hand-crafted nets and tests).
    pub fn from_parts(weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Shape("need one bias vector per weight matrix".into()));
        }
        let mut sizes = vec![weights[0].nrows()];
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.nrows() != sizes[l] {
                return Err(Error::Shape(format!(
                    "layer {l}: fan-in {} vs previous size {}",
                    w.nrows(),
                    sizes[l]
                )));
            }
            if b.len() != w.ncols() {
                return Err(Error::Shape(format!(
                    "layer {l}: bias length {} vs {} units",
                    b.len(),
                    w.ncols()
                )));
            }
            if !w.iter().all(|x| x.is_finite()) || !b.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite("network parameters"));
            }
            sizes.push(w.ncols());
        }
        Ok(Self { sizes, weights, biases })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    fn check_input_width(&self, width: usize) -> Result<()> {
        if width != self.sizes[0] {
            return Err(Error::Shape(format!(
                "input width {width} vs first layer size {}",
                self.sizes[0]
            )));
        }
        Ok(())
    }

    /// Class scores for a batch (rows are samples).
    pub fn forward_batch(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_input_width(inputs.ncols())?;
        let mut h = inputs.to_owned();
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let z = h.dot(w) + b;
            h = if l < last { z.mapv(|x| x.max(0.0)) } else { z };
        }
        Ok(h)
    }

    /// Class scores for one input vector.
    pub fn forward(&self, input: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let batch = input.insert_axis(Axis(0));
        Ok(self.forward_batch(batch)?.row(0).to_owned())
    }

    pub fn predict(&self, input: ArrayView1<'_, f64>) -> Result<usize> {
        Ok(argmax_low(self.forward(input)?.view()))
    }

    pub fn predict_batch(&self, inputs: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        let scores = self.forward_batch(inputs)?;
        Ok(scores.rows().into_iter().map(|r| argmax_low(r)).collect())
    }

    /// Pre-activation values (before ReLU) of every layer for a batch;
    /// drives the conversion normalization.
    pub fn pre_activations(&self, inputs: ArrayView2<'_, f64>) -> Result<Vec<Array2<f64>>> {
        self.check_input_width(inputs.ncols())?;
        let mut h = inputs.to_owned();
        let last = self.weights.len() - 1;
        let mut pres = Vec::with_capacity(self.weights.len());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let z = h.dot(w) + b;
            h = if l < last { z.mapv(|x| x.max(0.0)) } else { z.clone() };
            pres.push(z);
        }
        Ok(pres)
    }

    /// Multiply-accumulates per inference: Σ_layers in·out.
    pub fn count_macs(&self) -> u64 {
        self.weights.iter().map(|w| (w.nrows() * w.ncols()) as u64).sum()
    }

    pub fn to_json(&self) -> String {
        let doc = NetDoc {
            sizes: self.sizes.clone(),
            weights: self.weights.iter().map(|w| w.iter().copied().collect()).collect(),
            biases: self.biases.iter().map(|b| b.to_vec()).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetDoc =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("model JSON: {e}")))?;
        if doc.sizes.len() < 2 || doc.weights.len() != doc.sizes.len() - 1 {
            return Err(Error::Format("model JSON: inconsistent layer counts".into()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (l, (wv, bv)) in doc.weights.into_iter().zip(doc.biases).enumerate() {
            let shape = (doc.sizes[l], doc.sizes[l + 1]);
            weights.push(
                Array2::from_shape_vec(shape, wv)
                    .map_err(|e| Error::Format(format!("weight array {l}: {e}")))?,
            );
            biases.push(Array1::from_vec(bv));
        }
        Self::from_parts(weights, biases)
    }
}

#[derive(Serialize, Deserialize)]
struct NetDoc {
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Argmax with ties broken toward the lowest index.
pub fn argmax_low(scores: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// SGD hyper-parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// L2 penalty applied to weights (not biases).
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.1, epochs: 100, batch_size: 32, seed: 0, l2: 0.0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Range(format!("learning rate {}", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(Error::Range("epochs must be ≥ 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Range("batch size must be ≥ 1".into()));
        }
        if !self.l2.is_finite() || self.l2 < 0.0 {
            return Err(Error::Range(format!("L2 penalty {}", self.l2)));
        }
        Ok(())
    }
}

/// Per-epoch loss and training accuracy.
#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub loss: Vec<f64>,
    pub accuracy: Vec<f64>,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,accuracy\n");
        for (e, (l, a)) in self.loss.iter().zip(&self.accuracy).enumerate() {
            out.push_str(&format!("{e},{l},{a}\n"));
        }
        out
    }
}

/// Mini-batch SGD with softmax cross-entropy. Shuffling uses the config seed;
/// when the batch covers the whole dataset, shuffling is skipped (the
/// full-batch gradient does not depend on sample order).
pub fn train_sgd(
    net: &mut DenseNet,
    inputs: ArrayView2<'_, f64>,
    labels: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    let n = inputs.nrows();
    if n == 0 {
        return Err(Error::Config("empty training set".into()));
    }
    if labels.len() != n {
        return Err(Error::Shape(format!("{} labels for {n} samples", labels.len())));
    }
    net.check_input_width(inputs.ncols())?;
    let classes = *net.sizes.last().unwrap();
    if let Some(&bad) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::Range(format!("label {bad} outside {classes} classes")));
    }

    let mut rng = seed::rng(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let last = net.weights.len() - 1;
    let mut report = TrainReport::default();
    for _epoch in 0..cfg.epochs {
        if cfg.batch_size < n {
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let bsz = chunk.len();
            let mut xb = Array2::zeros((bsz, inputs.ncols()));
            for (r, &i) in chunk.iter().enumerate() {
                xb.row_mut(r).assign(&inputs.row(i));
            }
            // forward, keeping activations and pre-activations
            let mut hs: Vec<Array2<f64>> = vec![xb];
            let mut zs: Vec<Array2<f64>> = Vec::with_capacity(net.weights.len());
            for (l, (w, b)) in net.weights.iter().zip(&net.biases).enumerate() {
                let z = hs[l].dot(w) + b;
                let h = if l < last { z.mapv(|x| x.max(0.0)) } else { z.clone() };
                zs.push(z);
                hs.push(h);
            }
            // softmax cross-entropy gradient at the scores
            let scores = hs.last().unwrap();
            let mut g = softmax_rows(scores.view());
            for (r, &i) in chunk.iter().enumerate() {
                let p = g[(r, labels[i])].max(f64::MIN_POSITIVE);
                loss_sum -= p.ln();
                if argmax_low(scores.row(r)) == labels[i] {
                    correct += 1;
                }
                g[(r, labels[i])] -= 1.0;
            }
            g.mapv_inplace(|x| x / bsz as f64);
            // backward pass; gradients flow through pre-update weights
            for l in (0..net.weights.len()).rev() {
                let mut gw = hs[l].t().dot(&g);
                if cfg.l2 > 0.0 {
                    gw.scaled_add(cfg.l2, &net.weights[l]);
                }
                let gb = g.sum_axis(Axis(0));
                if l > 0 {
                    let mut back = g.dot(&net.weights[l].t());
                    back.zip_mut_with(&zs[l - 1], |x, &z| {
                        if z <= 0.0 {
                            *x = 0.0;
                        }
                    });
                    g = back;
                }
                net.weights[l].scaled_add(-cfg.learning_rate, &gw);
                net.biases[l].scaled_add(-cfg.learning_rate, &gb);
            }
        }
        report.loss.push(loss_sum / n as f64);
        report.accuracy.push(correct as f64 / n as f64);
    }
    Ok(report)
}

fn softmax_rows(scores: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut p = scores.to_owned();
    for mut row in p.rows_mut() {
        let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|x| (x - m).exp());
        let s: f64 = row.sum();
        row.mapv_inplace(|x| x / s);
    }
    p
}

/// Loss under which gradients are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckLoss {
    /// Softmax cross-entropy — the training loss.
    CrossEntropy,
    /// ½‖scores − onehot‖², exactly quadratic for linear nets.
    Squared,
}

/// Compare analytic gradients against central finite differences (step 1e-5)
/// on up to `max_params` seeded-random parameters; returns the worst relative
/// error max(|ga−gn|)/max(|ga|,|gn|,1e-3).
pub fn grad_check(
    net: &DenseNet,
    input: ArrayView1<'_, f64>,
    label: usize,
    loss: CheckLoss,
    max_params: usize,
    seed_value: u64,
) -> Result<f64> {
    net.check_input_width(input.len())?;
    let classes = *net.sizes.last().unwrap();
    if label >= classes {
        return Err(Error::Range(format!("label {label} outside {classes} classes")));
    }
    if max_params == 0 {
        return Err(Error::Range("max_params must be ≥ 1".into()));
    }
    let (gw, gb) = analytic_gradient(net, input, label, loss)?;

    // flat parameter indexing: all weights layer by layer, then all biases
    let weight_params: usize = net.weights.iter().map(|w| w.len()).sum();
    let total = weight_params + net.biases.iter().map(|b| b.len()).sum::<usize>();
    let chosen: Vec<usize> = if total <= max_params {
        (0..total).collect()
    } else {
        let mut rng = seed::rng(seed_value);
        let mut v = rand::seq::index::sample(&mut rng, total, max_params).into_vec();
        v.sort_unstable();
        v
    };

    let h = 1e-5;
    let mut worst = 0.0f64;
    for flat in chosen {
        let analytic = read_flat(&gw, &gb, weight_params, flat);
        let mut plus = net.clone();
        write_flat(&mut plus, weight_params, flat, h);
        let mut minus = net.clone();
        write_flat(&mut minus, weight_params, flat, -h);
        let numeric = (loss_value(&plus, input, label, loss)?
            - loss_value(&minus, input, label, loss)?)
            / (2.0 * h);
        let denom = analytic.abs().max(numeric.abs()).max(1e-3);
        worst = worst.max((analytic - numeric).abs() / denom);
    }
    Ok(worst)
}

fn analytic_gradient(
    net: &DenseNet,
    input: ArrayView1<'_, f64>,
    label: usize,
    loss: CheckLoss,
) -> Result<(Vec<Array2<f64>>, Vec<Array1<f64>>)> {
    let xb = input.insert_axis(Axis(0)).to_owned();
    let last = net.weights.len() - 1;
    let mut hs = vec![xb];
    let mut zs = Vec::new();
    for (l, (w, b)) in net.weights.iter().zip(&net.biases).enumerate() {
        let z = hs[l].dot(w) + b;
        let h = if l < last { z.mapv(|x| x.max(0.0)) } else { z.clone() };
        zs.push(z);
        hs.push(h);
    }
    let scores = hs.last().unwrap();
    let mut g = match loss {
        CheckLoss::CrossEntropy => softmax_rows(scores.view()),
        CheckLoss::Squared => scores.clone(),
    };
    g[(0, label)] -= 1.0;
    let mut gw = vec![Array2::zeros((0, 0)); net.weights.len()];
    let mut gb = vec![Array1::zeros(0); net.weights.len()];
    for l in (0..net.weights.len()).rev() {
        gw[l] = hs[l].t().dot(&g);
        gb[l] = g.sum_axis(Axis(0));
        if l > 0 {
            let mut back = g.dot(&net.weights[l].t());
            back.zip_mut_with(&zs[l - 1], |x, &z| {
                if z <= 0.0 {
                    *x = 0.0;
                }
            });
            g = back;
        }
    }
    Ok((gw, gb))
}

fn loss_value(
    net: &DenseNet,
    input: ArrayView1<'_, f64>,
    label: usize,
    loss: CheckLoss,
) -> Result<f64> {
    let scores = net.forward(input)?;
    Ok(match loss {
        CheckLoss::CrossEntropy => {
            let m = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let logsum = scores.iter().map(|&s| (s - m).exp()).sum::<f64>().ln() + m;
            logsum - scores[label]
        }
        CheckLoss::Squared => {
            let mut acc = 0.0;
            for (i, &s) in scores.iter().enumerate() {
                let target = if i == label { 1.0 } else { 0.0 };
                acc += (s - target) * (s - target);
            }
            0.5 * acc
        }
    })
}

fn read_flat(gw: &[Array2<f64>], gb: &[Array1<f64>], weight_params: usize, flat: usize) -> f64 {
    if flat < weight_params {
        let mut rest = flat;
        for w in gw {
            if rest < w.len() {
                return w.as_slice().expect("row-major")[rest];
            }
            rest -= w.len();
        }
        unreachable!("flat index within weight range");
    }
    let mut rest = flat - weight_params;
    for b in gb {
        if rest < b.len() {
            return b[rest];
        }
        rest -= b.len();
    }
    unreachable!("flat index within parameter range");
}

fn write_flat(net: &mut DenseNet, weight_params: usize, flat: usize, delta: f64) {
    if flat < weight_params {
        let mut rest = flat;
        for w in &mut net.weights {
            if rest < w.len() {
                w.as_slice_mut().expect("row-major")[rest] += delta;
                return;
            }
            rest -= w.len();
        }
        unreachable!("flat index within weight range");
    }
    let mut rest = flat - weight_params;
    for b in &mut net.biases {
        if rest < b.len() {
            b[rest] += delta;
            return;
        }
        rest -= b.len();
    }
    unreachable!("flat index within parameter range");
}

/// Rate-based ANN→SNN conversion: scale each layer by the 99th percentile of
/// its pre-activations over `calib`, wire the scaled weights into
/// integrate-and-fire neurons (θ=1, no leak, subtract reset) and inject the
/// scaled biases as constant current.
pub fn convert_to_snn(net: &DenseNet, calib: ArrayView2<'_, f64>) -> Result<SpikingNetwork> {
    if calib.nrows() == 0 {
        return Err(Error::Config("conversion needs a non-empty calibration set".into()));
    }
    if net.weights.iter().all(|w| w.iter().all(|&x| x == 0.0)) {
        return Err(Error::Config("cannot convert an all-zero network".into()));
    }
    let pres = net.pre_activations(calib)?;
    let params = LifParams {
        decay: 1.0,
        threshold: 1.0,
        reset: ResetMode::Subtract,
        refractory: 0,
    };
    let mut layers = Vec::with_capacity(net.weights.len());
    let mut prev_scale = 1.0;
    for (l, z) in pres.iter().enumerate() {
        let mut values: Vec<f64> = z.iter().copied().collect();
        let scale = percentile_linear(&mut values, 99.0).max(1e-9);
        let w = net.weights[l].mapv(|x| x * prev_scale / scale);
        let b = net.biases[l].mapv(|x| x / scale);
        let mut layer = Layer::new(params, w);
        layer.bias = Some(b);
        layers.push(layer);
        prev_scale = scale;
    }
    SpikingNetwork::new(layers)
}

/// Percentile with linear interpolation between order statistics.
pub(crate) fn percentile_linear(values: &mut [f64], q: f64) -> f64 {
    debug_assert!(!values.is_empty() && (0.0..=100.0).contains(&q));
    values.sort_unstable_by(f64::total_cmp);
    let rank = q / 100.0 * (values.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(values.len() - 1);
    values[lo] + (rank - lo as f64) * (values[hi] - values[lo])
}

/// Run a converted network on an input raster and classify by output spike
/// counts (ties toward the lowest class index).
pub fn snn_predict(snn: &SpikingNetwork, input: &SpikeRaster) -> Result<(usize, SimTrace)> {
    let trace = crate::snn::run_network(snn, input, input.steps())?;
    let out = trace.rasters.last().expect("network has ≥ 1 layer");
    let counts = Array1::from_iter((0..out.channels()).map(|c| out.row_count(c) as f64));
    Ok((argmax_low(counts.view()), trace))
}
