//! Discrete-time spiking-network simulation: LIF and resonate-and-fire neuron
//! dynamics, layered feed-forward networks with optional lateral connections,
//! and exact event counting for the energy proxies.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::SpikeRaster;

/// Membrane reset behavior after a spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResetMode {
    /// Subtract the threshold; residual charge carries over (preserves rate
    /// linearity, required for ANN-converted networks).
    Subtract,
    /// Clamp the membrane back to zero.
    Zero,
}

/// Leaky integrate-and-fire neuron parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LifParams {
    /// Per-step membrane decay α ∈ [0, 1]; 1 = perfect integrator.
    pub decay: f64,
    /// Firing threshold θ > 0.
    pub threshold: f64,
    pub reset: ResetMode,
    /// Steps after a spike during which input is ignored and no spike is emitted.
    pub refractory: u32,
}

impl Default for LifParams {
    fn default() -> Self {
        Self { decay: 1.0, threshold: 1.0, reset: ResetMode::Subtract, refractory: 0 }
    }
}

impl LifParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.decay) {
            return Err(Error::Range(format!("LIF decay {} outside [0,1]", self.decay)));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::Range(format!("LIF threshold {} must be > 0", self.threshold)));
        }
        Ok(())
    }
}

/// Resonate-and-fire neuron parameters. The internal state is a complex
/// oscillator z rotated by `omega` radians per step and damped by `damping`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RfParams {
    /// Resonant frequency in radians per step.
    pub omega: f64,
    /// Amplitude retention λ ∈ (0, 1] per step.
    pub damping: f64,
    /// Real-part threshold for spiking.
    pub threshold: f64,
    /// Phase window |arg z| ≤ ε around zero in which spiking is allowed;
    /// exact zero phase never occurs in discrete time.
    pub phase_tol: f64,
}

impl RfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Range(format!("R&F damping {} outside (0,1]", self.damping)));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Range(format!("R&F threshold {} must be > 0", self.threshold)));
        }
        if !(self.phase_tol > 0.0 && self.phase_tol < std::f64::consts::PI) {
            return Err(Error::Range(format!("R&F phase_tol {} outside (0,π)", self.phase_tol)));
        }
        Ok(())
    }
}

/// Mutable LIF neuron state.
#[derive(Debug, Clone, Copy, Default)]
pub struct LifState {
    pub v: f64,
    pub refractory_left: u32,
}

/// Advance one LIF neuron one step: v' = α·v + input, spike iff v' ≥ θ.
/// Refractory neurons ignore input and emit nothing.
pub fn lif_step(state: &mut LifState, input: f64, params: &LifParams) -> Result<bool> {
    if !input.is_finite() {
        return Err(Error::NonFinite("lif_step input"));
    }
    if state.refractory_left > 0 {
        state.refractory_left -= 1;
        return Ok(false);
    }
    let v = params.decay * state.v + input;
    if v >= params.threshold {
        state.v = match params.reset {
            ResetMode::Subtract => v - params.threshold,
            ResetMode::Zero => 0.0,
        };
        state.refractory_left = params.refractory;
        Ok(true)
    } else {
        state.v = v;
        Ok(false)
    }
}

/// Advance one resonate-and-fire neuron one step:
/// z' = λ·e^{iω}·z + input, spike iff Re z' ≥ θ and |arg z'| ≤ ε.
pub fn rf_step(z: &mut Complex64, input: f64, params: &RfParams) -> Result<bool> {
    rf_step_iq(z, Complex64::new(input, 0.0), params)
}

/// [`rf_step`] with quadrature drive: the in-phase component enters on the
/// real axis and the quadrature component on the imaginary axis, so that at
/// λ=1 the oscillator accumulates the exact running DFT of a complex stream.
pub fn rf_step_iq(z: &mut Complex64, input: Complex64, params: &RfParams) -> Result<bool> {
    if !input.re.is_finite() || !input.im.is_finite() {
        return Err(Error::NonFinite("rf_step input"));
    }
    let rot = Complex64::from_polar(params.damping, params.omega);
    *z = rot * *z + input;
    Ok(z.re >= params.threshold && z.arg().abs() <= params.phase_tol)
}

/// One feed-forward layer. `weights[(i, j)]` connects input channel i to
/// neuron j; `bias` is a constant current injected every step; `lateral`
/// feeds the layer's own previous-step spikes back with one step of delay.
#[derive(Debug, Clone)]
pub struct Layer {
    pub params: LifParams,
    pub weights: Array2<f64>,
    pub bias: Option<Array1<f64>>,
    pub lateral: Option<Array2<f64>>,
}

impl Layer {
    pub fn new(params: LifParams, weights: Array2<f64>) -> Self {
        Self { params, weights, bias: None, lateral: None }
    }

    pub fn fan_in(&self) -> usize {
        self.weights.nrows()
    }

    pub fn size(&self) -> usize {
        self.weights.ncols()
    }
}

/// A stack of layers evaluated synchronously with a global time step.
#[derive(Debug, Clone)]
pub struct SpikingNetwork {
    layers: Vec<Layer>,
}

impl SpikingNetwork {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for (l, layer) in layers.iter().enumerate() {
            layer.params.validate()?;
            if !layer.weights.iter().all(|w| w.is_finite()) {
                return Err(Error::NonFinite("layer weights"));
            }
            if let Some(b) = &layer.bias {
                if b.len() != layer.size() {
                    return Err(Error::Shape(format!(
                        "layer {l}: bias length {} vs {} neurons",
                        b.len(),
                        layer.size()
                    )));
                }
            }
            if let Some(lat) = &layer.lateral {
                if lat.nrows() != layer.size() || lat.ncols() != layer.size() {
                    return Err(Error::Shape(format!(
                        "layer {l}: lateral matrix {}x{} vs {} neurons",
                        lat.nrows(),
                        lat.ncols(),
                        layer.size()
                    )));
                }
                if (0..layer.size()).any(|i| lat[(i, i)] != 0.0) {
                    return Err(Error::Config(format!("layer {l}: lateral diagonal must be zero")));
                }
            }
            if l > 0 && layer.fan_in() != layers[l - 1].size() {
                return Err(Error::Shape(format!(
                    "layer {l} fan-in {} vs previous layer size {}",
                    layer.fan_in(),
                    layers[l - 1].size()
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().unwrap().size()
    }

    /// Serialize to a plain JSON document (sizes, params, row-major weights).
    pub fn to_json(&self) -> String {
        let doc = NetworkDoc {
            layers: self
                .layers
                .iter()
                .map(|l| LayerDoc {
                    fan_in: l.fan_in(),
                    size: l.size(),
                    params: l.params,
                    weights: l.weights.iter().copied().collect(),
                    bias: l.bias.as_ref().map(|b| b.to_vec()),
                    lateral: l.lateral.as_ref().map(|m| m.iter().copied().collect()),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("network serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDoc =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("network JSON: {e}")))?;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for l in doc.layers {
            let weights = Array2::from_shape_vec((l.fan_in, l.size), l.weights)
                .map_err(|e| Error::Format(format!("weight array: {e}")))?;
            let bias = l.bias.map(Array1::from_vec);
            let lateral = match l.lateral {
                Some(v) => Some(
                    Array2::from_shape_vec((l.size, l.size), v)
                        .map_err(|e| Error::Format(format!("lateral array: {e}")))?,
                ),
                None => None,
            };
            layers.push(Layer { params: l.params, weights, bias, lateral });
        }
        Self::new(layers)
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    fan_in: usize,
    size: usize,
    params: LifParams,
    weights: Vec<f64>,
    bias: Option<Vec<f64>>,
    lateral: Option<Vec<f64>>,
}

/// Exact event counts from one simulation run.
#[derive(Debug, Clone)]
pub struct SimTrace {
    /// One output raster per layer (the input raster is not included).
    pub rasters: Vec<SpikeRaster>,
    /// Total spikes across all layer rasters.
    pub spike_count: u64,
    /// One event per spike per outgoing nonzero connection; input-raster
    /// spikes count through the first layer's weights.
    pub syn_events: u64,
    /// Neurons times steps.
    pub neuron_updates: u64,
    pub steps: usize,
}

/// Return the exact counters of a trace.
pub fn count_events(trace: &SimTrace) -> (u64, u64, u64) {
    (trace.spike_count, trace.syn_events, trace.neuron_updates)
}

/// Run a network on an input raster for `horizon` steps (input columns past the
/// raster's end are treated as silent). Evaluation is synchronous: at each step
/// every layer sees the current spikes of the layer below and its own lateral
/// spikes from the previous step.
pub fn run_network(net: &SpikingNetwork, input: &SpikeRaster, horizon: usize) -> Result<SimTrace> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    if input.channels() != net.input_size() {
        return Err(Error::Shape(format!(
            "input raster has {} channels, network expects {}",
            input.channels(),
            net.input_size()
        )));
    }
    // Fan-out of each spike source: nonzero outgoing feed-forward connections
    // plus, for layer neurons, nonzero lateral connections.
    let input_fan_out: Vec<u64> =
        (0..net.input_size()).map(|i| nonzeros_in_row(&net.layers[0].weights, i)).collect();
    let layer_fan_out: Vec<Vec<u64>> = (0..net.layers.len())
        .map(|l| {
            (0..net.layers[l].size())
                .map(|i| {
                    let ff = if l + 1 < net.layers.len() {
                        nonzeros_in_row(&net.layers[l + 1].weights, i)
                    } else {
                        0
                    };
                    let lat = net.layers[l]
                        .lateral
                        .as_ref()
                        .map_or(0, |m| nonzeros_in_row(m, i));
                    ff + lat
                })
                .collect()
        })
        .collect();

    let mut states: Vec<Vec<LifState>> =
        net.layers.iter().map(|l| vec![LifState::default(); l.size()]).collect();
    let mut prev_spikes: Vec<Vec<bool>> =
        net.layers.iter().map(|l| vec![false; l.size()]).collect();
    let mut rasters: Vec<SpikeRaster> = net
        .layers
        .iter()
        .map(|l| SpikeRaster::zeros(l.size(), horizon))
        .collect::<Result<_>>()?;

    let mut spike_count = 0u64;
    let mut syn_events = 0u64;
    for t in 0..horizon {
        let mut below: Vec<bool> = if t < input.steps() {
            input.column(t).collect()
        } else {
            vec![false; net.input_size()]
        };
        for (i, &s) in below.iter().enumerate() {
            if s {
                syn_events += input_fan_out[i];
            }
        }
        for (l, layer) in net.layers.iter().enumerate() {
            let mut fired = vec![false; layer.size()];
            for j in 0..layer.size() {
                let mut current = 0.0;
                for (i, &s) in below.iter().enumerate() {
                    if s {
                        current += layer.weights[(i, j)];
                    }
                }
                if let Some(lat) = &layer.lateral {
                    for (i, &s) in prev_spikes[l].iter().enumerate() {
                        if s {
                            current += lat[(i, j)];
                        }
                    }
                }
                if let Some(b) = &layer.bias {
                    current += b[j];
                }
                if lif_step(&mut states[l][j], current, &layer.params)? {
                    fired[j] = true;
                    rasters[l].set(j, t, true);
                    spike_count += 1;
                    syn_events += layer_fan_out[l][j];
                }
            }
            prev_spikes[l] = fired.clone();
            below = fired;
        }
    }
    let neuron_updates = horizon as u64 * net.layers.iter().map(|l| l.size() as u64).sum::<u64>();
    Ok(SimTrace { rasters, spike_count, syn_events, neuron_updates, steps: horizon })
}

fn nonzeros_in_row(m: &Array2<f64>, row: usize) -> u64 {
    m.row(row).iter().filter(|&&w| w != 0.0).count() as u64
}
