//! Subband interference detection: synthetic complex-baseband signals with a
//! tone or narrowband interferer, subband power features from an FFT or from
//! a resonate-and-fire filter bank, an energy-detector oracle, and the
//! (L+1)-class classification pipeline in dense and spiking form.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ann::{self, DenseNet, TrainConfig, TrainReport};
use crate::dsp;
use crate::error::{Error, Result};
use crate::raster::SpikeRaster;
use crate::seed;
use crate::snn::{self, RfParams, SimTrace};

/// What occupies the interfered subband.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceKind {
    /// Complex exponential at the subband center frequency.
    Tone,
    /// White Gaussian noise band-limited to the subband.
    NarrowbandNoise,
}

/// One received-signal draw: full-band unit-power QPSK plus AWGN at `snr_db`,
/// and, for `label ≥ 1`, an interferer at `isr_db` confined to that subband.
/// Label 0 means interference-free.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SignalScenario {
    pub n: usize,
    pub l: usize,
    pub label: usize,
    pub snr_db: f64,
    pub isr_db: f64,
    pub kind: InterferenceKind,
    pub seed: u64,
}

impl SignalScenario {
    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 2 {
            return Err(Error::Shape(format!("sample count {} is not a power of two", self.n)));
        }
        if self.l == 0 || (self.n / 2) % self.l != 0 {
            return Err(Error::Config(format!(
                "{} subbands do not evenly split {} positive-frequency bins",
                self.l,
                self.n / 2
            )));
        }
        if self.label > self.l {
            return Err(Error::Range(format!("label {} exceeds L={}", self.label, self.l)));
        }
        if self.snr_db.is_nan() || self.isr_db.is_nan() {
            return Err(Error::NonFinite("SNR/ISR"));
        }
        Ok(())
    }
}

/// Where a feature vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSource {
    ClassicalFft,
    RfSpiking,
}

/// Per-subband share of average power over the positive half-spectrum,
/// normalized to unit total.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubbandFeatures {
    shares: Vec<f64>,
    source: FeatureSource,
}

impl SubbandFeatures {
    /// Normalize raw per-subband powers to shares. Errors if the total power
    /// is zero or any entry is negative.
    pub fn from_powers(powers: &[f64], source: FeatureSource) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::Shape("no subbands".into()));
        }
        if powers.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::Range("subband powers must be finite and ≥ 0".into()));
        }
        let total: f64 = powers.iter().sum();
        if total <= 0.0 {
            return Err(Error::Range("zero-power signal has no subband shares".into()));
        }
        Ok(Self { shares: powers.iter().map(|p| p / total).collect(), source })
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn source(&self) -> FeatureSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }
}

/// Generate one complex-baseband signal. Deterministic per scenario seed:
/// the QPSK symbols, the noise, and the interferer each consume their own
/// derived stream, so zeroing one term leaves the others untouched.
pub fn synth_signal(scenario: &SignalScenario) -> Result<Vec<Complex64>> {
    scenario.validate()?;
    let n = scenario.n;
    let mut rd = seed::rng(seed::derive(scenario.seed, 1, 0));
    let mut rn = seed::rng(seed::derive(scenario.seed, 2, 0));
    let mut ri = seed::rng(seed::derive(scenario.seed, 3, 0));

    const Q: f64 = std::f64::consts::FRAC_1_SQRT_2;
    let sigma = (10f64.powf(-scenario.snr_db / 10.0) / 2.0).sqrt();
    let mut x: Vec<Complex64> = (0..n)
        .map(|_| {
            let sym = Complex64::new(
                if rd.gen::<bool>() { Q } else { -Q },
                if rd.gen::<bool>() { Q } else { -Q },
            );
            let noise = Complex64::new(
                sigma * rn.sample::<f64, _>(StandardNormal),
                sigma * rn.sample::<f64, _>(StandardNormal),
            );
            sym + noise
        })
        .collect();

    if scenario.label > 0 {
        let amp = 10f64.powf(scenario.isr_db / 20.0);
        let h = n / 2 / scenario.l;
        match scenario.kind {
            InterferenceKind::Tone => {
                let freq = ((scenario.label - 1) * h + h / 2) as f64;
                let phase = ri.gen_range(0.0..2.0 * std::f64::consts::PI);
                for (t, sample) in x.iter_mut().enumerate() {
                    let arg = 2.0 * std::f64::consts::PI * freq * t as f64 / n as f64 + phase;
                    *sample += amp * Complex64::from_polar(1.0, arg);
                }
            }
            InterferenceKind::NarrowbandNoise => {
                let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
                for bin in spectrum.iter_mut().skip((scenario.label - 1) * h).take(h) {
                    *bin = Complex64::new(
                        ri.sample::<f64, _>(StandardNormal),
                        ri.sample::<f64, _>(StandardNormal),
                    );
                }
                let wave = dsp::ifft(&spectrum)?;
                let mean_power: f64 =
                    wave.iter().map(|w| w.norm_sqr()).sum::<f64>() / n as f64;
                let scale = if mean_power > 0.0 { amp / mean_power.sqrt() } else { 0.0 };
                for (sample, w) in x.iter_mut().zip(&wave) {
                    *sample += scale * w;
                }
            }
        }
    }
    Ok(x)
}

/// Mean |FFT bin|² per subband over the positive half-spectrum, normalized.
pub fn fft_features(samples: &[Complex64], l: usize) -> Result<SubbandFeatures> {
    let spectrum = dsp::fft(samples)?;
    let half = samples.len() / 2;
    if l == 0 || half % l != 0 {
        return Err(Error::Config(format!(
            "{l} subbands do not evenly split {half} positive-frequency bins"
        )));
    }
    let h = half / l;
    let powers: Vec<f64> = (0..l)
        .map(|band| {
            spectrum[band * h..(band + 1) * h].iter().map(|c| c.norm_sqr()).sum::<f64>()
                / h as f64
        })
        .collect();
    SubbandFeatures::from_powers(&powers, FeatureSource::ClassicalFft)
}

/// Raw output of the resonate-and-fire filter bank: end-of-window magnitude
/// per probed bin plus spike activity for energy accounting.
#[derive(Debug, Clone)]
pub struct RfSpectrum {
    /// |z| per positive-frequency bin, averaged over windows.
    pub magnitudes: Vec<f64>,
    pub trace: SimTrace,
}

/// Run one resonator per positive-frequency bin (ω_k = 2πk/window) over the
/// sample stream, in quadrature: I drives the real axis and Q the imaginary
/// axis, so at λ=1 each oscillator holds the exact windowed DFT bin.
/// Resonators reset between windows; magnitudes average across windows.
pub fn rf_spectrum(
    samples: &[Complex64],
    window: usize,
    template: &RfParams,
) -> Result<RfSpectrum> {
    if !window.is_power_of_two() || window < 2 {
        return Err(Error::Shape(format!("window {window} is not a power of two")));
    }
    if samples.is_empty() || samples.len() % window != 0 {
        return Err(Error::Shape(format!(
            "{} samples do not split into windows of {window}",
            samples.len()
        )));
    }
    template.validate()?;
    let bins = window / 2;
    let windows = samples.len() / window;
    let params: Vec<RfParams> = (0..bins)
        .map(|k| RfParams {
            omega: 2.0 * std::f64::consts::PI * k as f64 / window as f64,
            ..*template
        })
        .collect();

    let mut magnitudes = vec![0.0; bins];
    let mut raster = SpikeRaster::zeros(bins, samples.len())?;
    let per_bin: Vec<(f64, Vec<usize>)> = params
        .par_iter()
        .map(|p| -> Result<_> {
            let mut mag = 0.0;
            let mut spike_steps = Vec::new();
            for w in 0..windows {
                let mut z = Complex64::new(0.0, 0.0);
                for t in 0..window {
                    let step = w * window + t;
                    if snn::rf_step_iq(&mut z, samples[step], p)? {
                        spike_steps.push(step);
                    }
                }
                mag += z.norm();
            }
            Ok((mag / windows as f64, spike_steps))
        })
        .collect::<Result<_>>()?;
    let mut spike_count = 0u64;
    for (k, (mag, steps)) in per_bin.into_iter().enumerate() {
        magnitudes[k] = mag;
        spike_count += steps.len() as u64;
        for t in steps {
            raster.set(k, t, true);
        }
    }
    let steps = samples.len();
    let trace = SimTrace {
        rasters: vec![raster],
        spike_count,
        // every complex sample feeds every resonator once per step
        syn_events: (bins * steps) as u64,
        neuron_updates: (bins * steps) as u64,
        steps,
    };
    Ok(RfSpectrum { magnitudes, trace })
}

/// Subband features from the resonate-and-fire bank: per-subband mean of
/// |z|², aggregated and normalized exactly as [`fft_features`].
pub fn rf_stft_features(
    samples: &[Complex64],
    l: usize,
    window: usize,
    template: &RfParams,
) -> Result<(SubbandFeatures, SimTrace)> {
    let spectrum = rf_spectrum(samples, window, template)?;
    let bins = spectrum.magnitudes.len();
    if l == 0 || bins % l != 0 {
        return Err(Error::Config(format!(
            "{l} subbands do not evenly split {bins} probed bins"
        )));
    }
    let h = bins / l;
    let powers: Vec<f64> = (0..l)
        .map(|band| {
            spectrum.magnitudes[band * h..(band + 1) * h]
                .iter()
                .map(|m| m * m)
                .sum::<f64>()
                / h as f64
        })
        .collect();
    let features = SubbandFeatures::from_powers(&powers, FeatureSource::RfSpiking)?;
    Ok((features, spectrum.trace))
}

/// Classical baseline: the interfered subband is the one holding the largest
/// share, provided that share reaches η times the uniform level 1/L;
/// otherwise the signal is declared clean (label 0). Ties break low.
pub fn energy_detector_oracle(features: &SubbandFeatures, eta: f64) -> usize {
    let l = features.len();
    let mut best = 0usize;
    let mut best_share = f64::NEG_INFINITY;
    for (i, &s) in features.shares().iter().enumerate() {
        if s > best_share {
            best_share = s;
            best = i;
        }
    }
    if best_share >= eta / l as f64 {
        best + 1
    } else {
        0
    }
}

/// Interleaved f64 I/Q serialization (little-endian) for dataset files.
pub fn iq_to_bytes(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 16);
    for s in samples {
        out.extend_from_slice(&s.re.to_le_bytes());
        out.extend_from_slice(&s.im.to_le_bytes());
    }
    out
}

pub fn iq_from_bytes(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if bytes.len() % 16 != 0 {
        return Err(Error::Format(format!(
            "{} bytes is not a whole number of I/Q pairs",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect())
}

/// Sidecar manifest describing an I/Q dataset file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdManifest {
    pub n: usize,
    pub l: usize,
    pub snr_db: f64,
    pub isr_db: f64,
    pub kind: InterferenceKind,
    pub labels: Vec<usize>,
    pub seeds: Vec<u64>,
}

/// Spike encoding used to drive the converted classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdEncoder {
    /// Deterministic rate code.
    Rate,
    /// First-spike latency code, held high after onset so the converted
    /// rate network still integrates a count proportional to the value.
    Ttfs,
}

/// Full pipeline description; defaults give the standard N=256 / L=4 task.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct IdScenario {
    pub n: usize,
    pub l: usize,
    pub snr_db: f64,
    pub isr_db: f64,
    pub kind: InterferenceKind,
    pub samples_per_class: usize,
    pub train_fraction: f64,
    /// Energy-detector threshold η (relative to the uniform share 1/L).
    pub eta: f64,
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for IdScenario {
    fn default() -> Self {
        Self {
            n: 256,
            l: 4,
            snr_db: 10.0,
            isr_db: 5.0,
            kind: InterferenceKind::Tone,
            samples_per_class: 500,
            train_fraction: 0.8,
            eta: 2.0,
            hidden: 16,
            epochs: 60,
            learning_rate: 0.5,
            batch_size: 32,
            l2: 0.0,
            seed: 7,
        }
    }
}

/// Labeled feature split plus oracle decisions on the held-out set.
#[derive(Debug, Clone)]
pub struct IdPrepared {
    pub train_x: Array2<f64>,
    pub train_y: Vec<usize>,
    pub test_x: Array2<f64>,
    pub test_y: Vec<usize>,
    /// Energy-detector labels on the held-out rows.
    pub oracle_test: Vec<usize>,
    pub manifest: IdManifest,
}

/// Synthesize the dataset (classes interleaved, one derived seed per sample),
/// extract FFT subband features, and split train/test in sample order.
pub fn prepare(scenario: &IdScenario) -> Result<IdPrepared> {
    let classes = scenario.l + 1;
    let total = scenario.samples_per_class * classes;
    if total < 2 {
        return Err(Error::Config("need at least two samples".into()));
    }
    if !(scenario.train_fraction > 0.0 && scenario.train_fraction < 1.0) {
        return Err(Error::Range(format!(
            "train_fraction {} outside (0,1)",
            scenario.train_fraction
        )));
    }
    let seeds: Vec<u64> = (0..total).map(|i| seed::derive(scenario.seed, 4, i as u64)).collect();
    let labels: Vec<usize> = (0..total).map(|i| i % classes).collect();
    let feats: Vec<Vec<f64>> = (0..total)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let sig = SignalScenario {
                n: scenario.n,
                l: scenario.l,
                label: labels[i],
                snr_db: scenario.snr_db,
                isr_db: scenario.isr_db,
                kind: scenario.kind,
                seed: seeds[i],
            };
            let samples = synth_signal(&sig)?;
            Ok(fft_features(&samples, scenario.l)?.shares().to_vec())
        })
        .collect::<Result<_>>()?;

    let mut x = Array2::zeros((total, scenario.l));
    for (i, f) in feats.iter().enumerate() {
        for (j, &v) in f.iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    let n_train = ((scenario.train_fraction * total as f64).round() as usize).clamp(1, total - 1);
    let oracle_test: Vec<usize> = (n_train..total)
        .map(|i| {
            let features = SubbandFeatures {
                shares: feats[i].clone(),
                source: FeatureSource::ClassicalFft,
            };
            energy_detector_oracle(&features, scenario.eta)
        })
        .collect();
    Ok(IdPrepared {
        train_x: x.slice(ndarray::s![..n_train, ..]).to_owned(),
        train_y: labels[..n_train].to_vec(),
        test_x: x.slice(ndarray::s![n_train.., ..]).to_owned(),
        test_y: labels[n_train..].to_vec(),
        oracle_test,
        manifest: IdManifest {
            n: scenario.n,
            l: scenario.l,
            snr_db: scenario.snr_db,
            isr_db: scenario.isr_db,
            kind: scenario.kind,
            labels,
            seeds,
        },
    })
}

/// Train the dense (L+1)-way classifier on the subband shares.
pub fn train_ann(prep: &IdPrepared, scenario: &IdScenario) -> Result<(DenseNet, TrainReport)> {
    let classes = scenario.l + 1;
    let mut net = DenseNet::new(
        &[scenario.l, scenario.hidden, classes],
        seed::derive(scenario.seed, 5, 0),
    )?;
    let cfg = TrainConfig {
        learning_rate: scenario.learning_rate,
        epochs: scenario.epochs,
        batch_size: scenario.batch_size,
        seed: seed::derive(scenario.seed, 6, 0),
        l2: scenario.l2,
    };
    let report = ann::train_sgd(&mut net, prep.train_x.view(), &prep.train_y, &cfg)?;
    Ok((net, report))
}

/// Row-per-true-label confusion counts.
pub fn confusion_matrix(truth: &[usize], pred: &[usize], classes: usize) -> Array2<u64> {
    let mut m = Array2::zeros((classes, classes));
    for (&t, &p) in truth.iter().zip(pred) {
        m[(t, p)] += 1;
    }
    m
}

pub fn confusion_to_csv(m: &Array2<u64>) -> String {
    let mut out = String::from("true\\pred");
    for j in 0..m.ncols() {
        out.push_str(&format!(",{j}"));
    }
    out.push('\n');
    for (i, row) in m.rows().into_iter().enumerate() {
        out.push_str(&i.to_string());
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct IdAnnEval {
    pub accuracy: f64,
    pub oracle_accuracy: f64,
    pub predictions: Vec<usize>,
    pub confusion: Vec<Vec<u64>>,
}

pub fn eval_ann(net: &DenseNet, prep: &IdPrepared) -> Result<IdAnnEval> {
    let predictions = net.predict_batch(prep.test_x.view())?;
    let n = prep.test_y.len();
    let hits = predictions.iter().zip(&prep.test_y).filter(|(p, y)| p == y).count();
    let oracle_hits =
        prep.oracle_test.iter().zip(&prep.test_y).filter(|(p, y)| p == y).count();
    let classes = prep.test_y.iter().chain(&predictions).max().unwrap_or(&0) + 1;
    let confusion = confusion_matrix(&prep.test_y, &predictions, classes);
    Ok(IdAnnEval {
        accuracy: hits as f64 / n as f64,
        oracle_accuracy: oracle_hits as f64 / n as f64,
        predictions,
        confusion: confusion.rows().into_iter().map(|r| r.to_vec()).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdSnnEval {
    pub encoder: IdEncoder,
    pub steps: usize,
    pub accuracy: f64,
    /// Fraction of held-out samples where the SNN matches the source ANN.
    pub agreement: f64,
    pub samples: usize,
    pub spikes: u64,
    pub syn_events: u64,
    pub neuron_updates: u64,
    pub predictions: Vec<usize>,
}

/// First-spike onset from the latency code, then held high so spike counts
/// stay proportional to the encoded value.
fn ttfs_hold_raster(values: &[f64], steps: usize) -> Result<SpikeRaster> {
    let onsets = crate::codec::encode_ttfs(values, steps)?;
    let mut raster = SpikeRaster::zeros(values.len(), steps)?;
    for ch in 0..values.len() {
        if let Some(first) = onsets.row_steps(ch).first() {
            for t in *first..steps {
                raster.set(ch, t, true);
            }
        }
    }
    Ok(raster)
}

/// Convert the trained net and classify the held-out set from spike trains.
pub fn eval_snn(
    net: &DenseNet,
    prep: &IdPrepared,
    encoder: IdEncoder,
    steps: usize,
) -> Result<IdSnnEval> {
    let snn = ann::convert_to_snn(net, prep.train_x.view())?;
    let ann_pred = net.predict_batch(prep.test_x.view())?;
    let per_sample: Vec<(usize, u64, u64, u64)> = (0..prep.test_x.nrows())
        .into_par_iter()
        .map(|i| -> Result<_> {
            let values: Vec<f64> = prep.test_x.row(i).to_vec();
            let raster = match encoder {
                IdEncoder::Rate => {
                    crate::codec::encode_rate(&values, steps, crate::codec::RateMode::Deterministic)?
                }
                IdEncoder::Ttfs => ttfs_hold_raster(&values, steps)?,
            };
            let (pred, trace) = ann::snn_predict(&snn, &raster)?;
            Ok((pred, trace.spike_count, trace.syn_events, trace.neuron_updates))
        })
        .collect::<Result<_>>()?;
    let mut agree = 0usize;
    let mut hits = 0usize;
    let (mut spikes, mut syn_events, mut neuron_updates) = (0u64, 0u64, 0u64);
    for (i, &(pred, sp, se, nu)) in per_sample.iter().enumerate() {
        agree += usize::from(pred == ann_pred[i]);
        hits += usize::from(pred == prep.test_y[i]);
        spikes += sp;
        syn_events += se;
        neuron_updates += nu;
    }
    let n = per_sample.len();
    Ok(IdSnnEval {
        encoder,
        steps,
        accuracy: hits as f64 / n as f64,
        agreement: agree as f64 / n as f64,
        samples: n,
        spikes,
        syn_events,
        neuron_updates,
        predictions: per_sample.iter().map(|&(p, ..)| p).collect(),
    })
}
