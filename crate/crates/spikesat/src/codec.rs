//! Spike encoding and decoding: rate coding (deterministic quota schedule or
//! seeded Bernoulli), time-to-first-spike coding, and LIF stream coding, plus
//! min–max feature normalization with recorded bounds.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::SpikeRaster;
use crate::seed;
use crate::snn::{lif_step, LifParams, LifState};

/// A real feature matrix normalized to [0,1] with the min–max bounds it was
/// normalized by, so values can be mapped back to physical units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    min: f64,
    max: f64,
    /// Row-major normalized values.
    data: Vec<f64>,
}

impl FeatureMatrix {
    /// Normalize `raw` by its own min and max. Errors on non-finite entries or
    /// a constant matrix (max ≤ min leaves nothing to encode).
    pub fn from_raw(raw: ArrayView2<'_, f64>) -> Result<Self> {
        let (min, max) = raw_bounds(raw)?;
        Self::with_bounds(raw, min, max)
    }

    /// Normalize `raw` by externally supplied bounds (e.g. bounds of a
    /// training set applied to held-out data). Values outside the bounds are
    /// clamped into [0,1].
    pub fn with_bounds(raw: ArrayView2<'_, f64>, min: f64, max: f64) -> Result<Self> {
        if raw.nrows() == 0 || raw.ncols() == 0 {
            return Err(Error::Shape("feature matrix must be non-empty".into()));
        }
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::NonFinite("feature bounds"));
        }
        if max <= min {
            return Err(Error::Range(format!("feature bounds max {max} ≤ min {min}")));
        }
        let mut data = Vec::with_capacity(raw.len());
        for &x in raw.iter() {
            if !x.is_finite() {
                return Err(Error::NonFinite("feature matrix"));
            }
            data.push(((x - min) / (max - min)).clamp(0.0, 1.0));
        }
        Ok(Self { rows: raw.nrows(), cols: raw.ncols(), min, max, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The (min, max) bounds used for normalization.
    pub fn bounds(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    /// Normalized values as an n×m array.
    pub fn data(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.rows, self.cols), self.data.clone())
            .expect("stored shape is consistent")
    }

    /// Row-major flattening to an n·m vector; `data()` plus the stored shape
    /// inverts it.
    pub fn flatten(&self) -> Array1<f64> {
        Array1::from_vec(self.data.clone())
    }

    /// Map a normalized value back to physical units.
    pub fn denormalize(&self, v: f64) -> f64 {
        self.min + v * (self.max - self.min)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("feature serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fm: FeatureMatrix =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("feature JSON: {e}")))?;
        if fm.data.len() != fm.rows * fm.cols {
            return Err(Error::Shape(format!(
                "feature JSON: {} values for {}x{} matrix",
                fm.data.len(),
                fm.rows,
                fm.cols
            )));
        }
        if !(fm.max > fm.min) {
            return Err(Error::Range(format!("feature bounds max {} ≤ min {}", fm.max, fm.min)));
        }
        Ok(fm)
    }
}

fn raw_bounds(raw: ArrayView2<'_, f64>) -> Result<(f64, f64)> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in raw.iter() {
        if !x.is_finite() {
            return Err(Error::NonFinite("feature matrix"));
        }
        min = min.min(x);
        max = max.max(x);
    }
    if !(max > min) {
        return Err(Error::Range("feature matrix is constant; bounds need max > min".into()));
    }
    Ok((min, max))
}

/// Rate-coding variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    /// Exactly round(v·T) spikes per channel on an even quota schedule.
    Deterministic,
    /// Independent Bernoulli(v) per step, one seeded stream per channel.
    Stochastic { seed: u64 },
}

/// Rate-encode normalized values: channel i carries value `values[i]`.
pub fn encode_rate(values: &[f64], steps: usize, mode: RateMode) -> Result<SpikeRaster> {
    check_unit_range(values)?;
    let mut raster = SpikeRaster::zeros(values.len(), steps)?;
    match mode {
        RateMode::Deterministic => {
            let t_u64 = steps as u64;
            for (ch, &v) in values.iter().enumerate() {
                // quota n = round(v·T); spike at t iff ⌊(t+1)n/T⌋ > ⌊tn/T⌋,
                // which places exactly n spikes evenly across the window.
                let n = (v * steps as f64).round() as u64;
                for t in 0..steps {
                    let t_u = t as u64;
                    if ((t_u + 1) * n) / t_u64 > (t_u * n) / t_u64 {
                        raster.set(ch, t, true);
                    }
                }
            }
        }
        RateMode::Stochastic { seed } => {
            for (ch, &v) in values.iter().enumerate() {
                let mut rng = seed::rng(seed::derive(seed, 0, ch as u64));
                for t in 0..steps {
                    if rand::Rng::gen::<f64>(&mut rng) < v {
                        raster.set(ch, t, true);
                    }
                }
            }
        }
    }
    Ok(raster)
}

/// Time-to-first-spike encoding: channel i spikes once at
/// t = round((1−v)·(T−1)); v = 0 is reserved silence. Needs T ≥ 2.
pub fn encode_ttfs(values: &[f64], steps: usize) -> Result<SpikeRaster> {
    check_unit_range(values)?;
    if steps < 2 {
        return Err(Error::Range(format!("TTFS needs at least 2 steps, got {steps}")));
    }
    let mut raster = SpikeRaster::zeros(values.len(), steps)?;
    for (ch, &v) in values.iter().enumerate() {
        if v > 0.0 {
            let t = ((1.0 - v) * (steps - 1) as f64).round() as usize;
            raster.set(ch, t, true);
        }
    }
    Ok(raster)
}

/// Drive one LIF neuron per channel with the channel's time series; the raster
/// spans the series length. Rows of `series` are channels, columns are steps.
pub fn encode_lif_stream(series: ArrayView2<'_, f64>, params: &LifParams) -> Result<SpikeRaster> {
    params.validate()?;
    let mut raster = SpikeRaster::zeros(series.nrows(), series.ncols())?;
    for (ch, row) in series.rows().into_iter().enumerate() {
        let mut state = LifState::default();
        for (t, &sample) in row.iter().enumerate() {
            if lif_step(&mut state, sample, params)? {
                raster.set(ch, t, true);
            }
        }
    }
    Ok(raster)
}

/// Inverse of rate coding: spike count over window length.
pub fn decode_rate(raster: &SpikeRaster) -> Vec<f64> {
    (0..raster.channels())
        .map(|ch| raster.row_count(ch) as f64 / raster.steps() as f64)
        .collect()
}

/// Inverse of TTFS coding: v̂ = 1 − t/(T−1), silent rows decode to 0.
/// Errors if any row carries more than one spike or the raster is too short.
pub fn decode_ttfs(raster: &SpikeRaster) -> Result<Vec<f64>> {
    if raster.steps() < 2 {
        return Err(Error::Range(format!(
            "TTFS raster needs at least 2 steps, got {}",
            raster.steps()
        )));
    }
    let mut out = Vec::with_capacity(raster.channels());
    for ch in 0..raster.channels() {
        let steps = raster.row_steps(ch);
        match steps.len() {
            0 => out.push(0.0),
            1 => out.push(1.0 - steps[0] as f64 / (raster.steps() - 1) as f64),
            n => {
                return Err(Error::Format(format!("TTFS row {ch} has {n} spikes, expected ≤ 1")))
            }
        }
    }
    Ok(out)
}

fn check_unit_range(values: &[f64]) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite("encoder input"));
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Range(format!("value {v} at index {i} outside [0,1]")));
        }
    }
    Ok(())
}
