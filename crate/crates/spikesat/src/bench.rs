//! Energy/delay proxy models for conventional (MAC-counting) versus spiking
//! (event-counting) execution, batch sweeps, energy-delay-product ratios, and
//! CSV/JSON/SVG report emission. The default constants are illustrative
//! placeholders, not measurements of any specific chip.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-operation energy and throughput proxies. The per-batch overheads
/// default to zero, making both estimators exactly linear in batch size; set
/// them to nonzero values to model fixed dispatch costs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyModel {
    /// Joules per multiply-accumulate on the conventional path.
    pub e_mac: f64,
    /// Joules per emitted spike.
    pub e_spike: f64,
    /// Joules per synaptic event (spike × outgoing connection).
    pub e_syn: f64,
    /// Joules per neuron-step update.
    pub e_update: f64,
    pub p_idle_conv: f64,
    pub p_idle_neuro: f64,
    /// Seconds per simulated spiking step.
    pub t_step: f64,
    /// Conventional throughput in MACs per second.
    pub conv_throughput: f64,
    /// Fixed seconds added to each conventional batch.
    pub overhead_conv: f64,
    /// Fixed seconds added to each spiking batch.
    pub overhead_neuro: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            e_mac: 4.6e-12,
            e_spike: 1e-12,
            e_syn: 1e-13,
            e_update: 5e-14,
            p_idle_conv: 0.0,
            p_idle_neuro: 0.0,
            t_step: 1e-6,
            conv_throughput: 1e9,
            overhead_conv: 0.0,
            overhead_neuro: 0.0,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("e_mac", self.e_mac),
            ("e_spike", self.e_spike),
            ("e_syn", self.e_syn),
            ("e_update", self.e_update),
            ("p_idle_conv", self.p_idle_conv),
            ("p_idle_neuro", self.p_idle_neuro),
            ("overhead_conv", self.overhead_conv),
            ("overhead_neuro", self.overhead_neuro),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Range(format!("{name} = {v} must be ≥ 0")));
            }
        }
        if !(self.t_step > 0.0) || !self.t_step.is_finite() {
            return Err(Error::Range(format!("t_step = {} must be > 0", self.t_step)));
        }
        if !(self.conv_throughput > 0.0) || !self.conv_throughput.is_finite() {
            return Err(Error::Range(format!(
                "conv_throughput = {} must be > 0",
                self.conv_throughput
            )));
        }
        Ok(())
    }
}

/// Mean spiking activity per classified sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EventTotals {
    pub spikes: f64,
    pub syn_events: f64,
    pub neuron_updates: f64,
    pub steps: f64,
}

impl EventTotals {
    /// Per-sample means from activity summed over a batch of samples.
    pub fn per_sample(
        spikes: u64,
        syn_events: u64,
        neuron_updates: u64,
        steps: usize,
        samples: usize,
    ) -> Result<Self> {
        if samples == 0 {
            return Err(Error::Config("per-sample totals need ≥ 1 sample".into()));
        }
        let n = samples as f64;
        Ok(Self {
            spikes: spikes as f64 / n,
            syn_events: syn_events as f64 / n,
            neuron_updates: neuron_updates as f64 / n,
            steps: steps as f64,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("spikes", self.spikes),
            ("syn_events", self.syn_events),
            ("neuron_updates", self.neuron_updates),
            ("steps", self.steps),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Range(format!("{name} = {v} must be ≥ 0")));
            }
        }
        Ok(())
    }
}

/// One workload to be swept: per-sample MAC count on the conventional path
/// and per-sample event totals on the spiking path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Workload {
    pub id: String,
    pub macs_per_sample: f64,
    pub events_per_sample: EventTotals,
    /// Classification accuracy carried through to the report.
    pub accuracy: Option<f64>,
}

/// (energy J, delay s) of running a batch on the conventional path.
pub fn estimate_conv(macs_per_sample: f64, batch: u64, model: &EnergyModel) -> Result<(f64, f64)> {
    model.validate()?;
    if !(macs_per_sample >= 0.0) || !macs_per_sample.is_finite() {
        return Err(Error::Range(format!("MAC count {macs_per_sample} must be ≥ 0")));
    }
    if batch == 0 {
        return Err(Error::Range("batch size must be ≥ 1".into()));
    }
    let work = batch as f64 * macs_per_sample;
    let delay = work / model.conv_throughput + model.overhead_conv;
    let energy = work * model.e_mac + model.p_idle_conv * delay;
    Ok((energy, delay))
}

/// (energy J, delay s) of running a batch on the spiking path.
pub fn estimate_neuro(totals: &EventTotals, batch: u64, model: &EnergyModel) -> Result<(f64, f64)> {
    model.validate()?;
    totals.validate()?;
    if batch == 0 {
        return Err(Error::Range("batch size must be ≥ 1".into()));
    }
    let b = batch as f64;
    let delay = b * totals.steps * model.t_step + model.overhead_neuro;
    let energy = b
        * (totals.spikes * model.e_spike
            + totals.syn_events * model.e_syn
            + totals.neuron_updates * model.e_update)
        + model.p_idle_neuro * delay;
    Ok((energy, delay))
}

/// One measured point of the conventional-vs-spiking comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub workload: String,
    pub batch: u64,
    pub energy_conv: f64,
    pub energy_neuro: f64,
    pub delay_conv: f64,
    pub delay_neuro: f64,
    pub accuracy: Option<f64>,
}

/// (energy_ratio, delay_ratio, edp_ratio), each conventional/neuromorphic.
/// An EDP ratio above one puts the record on the neuromorphic-favorable side
/// of the unit energy-delay-product line.
pub fn edp_gain(record: &BenchRecord) -> Result<(f64, f64, f64)> {
    if !(record.energy_neuro > 0.0) || !(record.delay_neuro > 0.0) {
        return Err(Error::Range(format!(
            "neuromorphic energy {} / delay {} must be > 0",
            record.energy_neuro, record.delay_neuro
        )));
    }
    let energy_ratio = record.energy_conv / record.energy_neuro;
    let delay_ratio = record.delay_conv / record.delay_neuro;
    Ok((energy_ratio, delay_ratio, energy_ratio * delay_ratio))
}

/// One record per batch size.
pub fn sweep_batches(
    workload: &Workload,
    batches: &[u64],
    model: &EnergyModel,
) -> Result<Vec<BenchRecord>> {
    if batches.is_empty() {
        return Err(Error::Config("batch list is empty".into()));
    }
    if workload.id.is_empty() || workload.id.contains(',') || workload.id.contains('\n') {
        return Err(Error::Format(format!(
            "workload id {:?} must be nonempty without commas",
            workload.id
        )));
    }
    batches
        .iter()
        .map(|&b| {
            let (energy_conv, delay_conv) = estimate_conv(workload.macs_per_sample, b, model)?;
            let (energy_neuro, delay_neuro) =
                estimate_neuro(&workload.events_per_sample, b, model)?;
            Ok(BenchRecord {
                workload: workload.id.clone(),
                batch: b,
                energy_conv,
                energy_neuro,
                delay_conv,
                delay_neuro,
                accuracy: workload.accuracy,
            })
        })
        .collect()
}

/// CSV with one row per record; floats use the shortest lossless form.
pub fn records_to_csv(records: &[BenchRecord]) -> Result<String> {
    let mut out = String::from(
        "workload,B,energy_conv,energy_neuro,delay_conv,delay_neuro,energy_ratio,delay_ratio,edp_ratio\n",
    );
    for r in records {
        let (er, dr, edp) = edp_gain(r)?;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.workload, r.batch, r.energy_conv, r.energy_neuro, r.delay_conv, r.delay_neuro,
            er, dr, edp
        ));
    }
    Ok(out)
}

pub fn records_from_csv(text: &str) -> Result<Vec<BenchRecord>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header
        != "workload,B,energy_conv,energy_neuro,delay_conv,delay_neuro,energy_ratio,delay_ratio,edp_ratio"
    {
        return Err(Error::Format(format!("unexpected report header {header:?}")));
    }
    let mut records = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 9 {
            return Err(Error::Format(format!("line {}: expected 9 fields", ln + 2)));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Format(format!("line {}: bad number {s:?}", ln + 2)))
        };
        records.push(BenchRecord {
            workload: parts[0].to_string(),
            batch: parts[1]
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad batch {:?}", ln + 2, parts[1])))?,
            energy_conv: num(parts[2])?,
            energy_neuro: num(parts[3])?,
            delay_conv: num(parts[4])?,
            delay_neuro: num(parts[5])?,
            accuracy: None,
        });
    }
    Ok(records)
}

/// JSON report row: the raw record plus its derived ratios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(flatten)]
    pub record: BenchRecord,
    pub energy_ratio: f64,
    pub delay_ratio: f64,
    pub edp_ratio: f64,
}

pub fn records_to_json(records: &[BenchRecord]) -> Result<String> {
    let rows: Vec<ReportRow> = records
        .iter()
        .map(|r| {
            let (energy_ratio, delay_ratio, edp_ratio) = edp_gain(r)?;
            Ok(ReportRow { record: r.clone(), energy_ratio, delay_ratio, edp_ratio })
        })
        .collect::<Result<_>>()?;
    serde_json::to_string_pretty(&rows).map_err(|e| Error::Format(e.to_string()))
}

pub fn records_from_json(text: &str) -> Result<Vec<BenchRecord>> {
    let rows: Vec<ReportRow> =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    Ok(rows.into_iter().map(|r| r.record).collect())
}

/// Log-log scatter of delay ratio (x) against energy ratio (y) with the unit
/// energy-delay-product curve as the single reference path. Points above the
/// line favor the spiking path.
pub fn scatter_svg(records: &[BenchRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Config("no records to plot".into()));
    }
    let (width, height, margin) = (640.0, 480.0, 60.0);
    let mut points = Vec::with_capacity(records.len());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in records {
        let (er, dr, _) = edp_gain(r)?;
        if !(er > 0.0) || !(dr > 0.0) {
            return Err(Error::Range(format!(
                "ratios ({er}, {dr}) must be positive for a log plot"
            )));
        }
        let (x, y) = (dr.log10(), er.log10());
        lo = lo.min(x).min(y);
        hi = hi.max(x).max(y);
        points.push((x, y, r));
    }
    // pad and keep the EDP line y = −x visible inside the frame
    lo = (lo.min(-hi) - 0.5).floor();
    hi = (hi.max(-lo) + 0.5).ceil();
    let span = hi - lo;
    let sx = |v: f64| margin + (v - lo) / span * (width - 2.0 * margin);
    let sy = |v: f64| height - margin - (v - lo) / span * (height - 2.0 * margin);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333\"/>\n",
        margin,
        margin,
        width - 2.0 * margin,
        height - 2.0 * margin
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">log10 delay ratio (conventional / spiking)</text>\n",
        width / 2.0,
        height - margin / 3.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 {} {})\">log10 energy ratio (conventional / spiking)</text>\n",
        margin / 3.0,
        height / 2.0,
        margin / 3.0,
        height / 2.0
    ));
    // unit EDP curve energy_ratio·delay_ratio = 1 is the line y = −x in log axes
    svg.push_str(&format!(
        "  <path class=\"edp-line\" d=\"M {:.2} {:.2} L {:.2} {:.2}\" stroke=\"#888\" stroke-dasharray=\"6 4\" fill=\"none\"/>\n",
        sx(lo),
        sy(-lo),
        sx(hi),
        sy(-hi)
    ));
    for (x, y, r) in points {
        svg.push_str(&format!(
            "  <circle class=\"record\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"#1f77b4\" fill-opacity=\"0.8\"><title>{} B={}</title></circle>\n",
            sx(x),
            sy(y),
            r.workload,
            r.batch
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(ec: f64, en: f64, dc: f64, dn: f64) -> BenchRecord {
        BenchRecord {
            workload: "w".into(),
            batch: 1,
            energy_conv: ec,
            energy_neuro: en,
            delay_conv: dc,
            delay_neuro: dn,
            accuracy: None,
        }
    }

    #[test]
    fn conv_estimator_examples() {
        let model = EnergyModel { e_mac: 1e-12, ..EnergyModel::default() };
        assert_eq!(estimate_conv(0.0, 1, &model).unwrap(), (0.0, 0.0));
        let (e, d) = estimate_conv(1e6, 1, &model).unwrap();
        assert!((e - 1e-6).abs() < 1e-18);
        assert!((d - 1e-3).abs() < 1e-15);
        // linearity in B, including with idle power
        let model = EnergyModel { p_idle_conv: 0.5, ..EnergyModel::default() };
        let (e1, d1) = estimate_conv(1e6, 3, &model).unwrap();
        let (e2, d2) = estimate_conv(1e6, 6, &model).unwrap();
        assert!((e2 - 2.0 * e1).abs() < 1e-15 * e2);
        assert!((d2 - 2.0 * d1).abs() < 1e-15 * d2);
    }

    #[test]
    fn neuro_estimator_examples() {
        let quiet = EventTotals { spikes: 0.0, syn_events: 0.0, neuron_updates: 0.0, steps: 64.0 };
        let (e, d) = estimate_neuro(&quiet, 1, &EnergyModel::default()).unwrap();
        assert_eq!(e, 0.0);
        assert!(d > 0.0);
        let model = EnergyModel {
            e_spike: 2.0,
            e_syn: 1.0,
            e_update: 0.0,
            ..EnergyModel::default()
        };
        let busy = EventTotals { spikes: 10.0, syn_events: 100.0, neuron_updates: 7.0, steps: 4.0 };
        let (e, _) = estimate_neuro(&busy, 1, &model).unwrap();
        assert_eq!(e, 120.0);
    }

    #[test]
    fn neuro_energy_is_monotone_in_every_counter() {
        let model = EnergyModel::default();
        let base = EventTotals { spikes: 5.0, syn_events: 50.0, neuron_updates: 300.0, steps: 16.0 };
        let (e0, _) = estimate_neuro(&base, 2, &model).unwrap();
        for bump in [
            EventTotals { spikes: 6.0, ..base },
            EventTotals { syn_events: 51.0, ..base },
            EventTotals { neuron_updates: 301.0, ..base },
        ] {
            let (e1, _) = estimate_neuro(&bump, 2, &model).unwrap();
            assert!(e1 > e0);
        }
    }

    #[test]
    fn edp_gain_examples() {
        let (er, dr, edp) = edp_gain(&record(1e-3, 1e-6, 2e-3, 4e-3)).unwrap();
        assert!((er - 1000.0).abs() < 1e-9);
        assert!((dr - 0.5).abs() < 1e-15);
        assert!((edp - 500.0).abs() < 1e-9);
        let (er, dr, edp) = edp_gain(&record(3.0, 3.0, 7.0, 7.0)).unwrap();
        assert_eq!((er, dr, edp), (1.0, 1.0, 1.0));
        // swapping platforms inverts all three
        let fwd = edp_gain(&record(2.0, 5.0, 3.0, 11.0)).unwrap();
        let rev = edp_gain(&record(5.0, 2.0, 11.0, 3.0)).unwrap();
        assert!((fwd.0 * rev.0 - 1.0).abs() < 1e-15);
        assert!((fwd.1 * rev.1 - 1.0).abs() < 1e-15);
        assert!((fwd.2 * rev.2 - 1.0).abs() < 1e-12);
        assert!(edp_gain(&record(1.0, 0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn edp_is_the_exact_product() {
        for i in 1..50u64 {
            let r = record(
                1e-5 * i as f64,
                3e-8 * (51 - i) as f64,
                2e-4 * i as f64,
                7e-5 * i as f64,
            );
            let (er, dr, edp) = edp_gain(&r).unwrap();
            assert_eq!(edp, er * dr);
        }
    }

    fn workload() -> Workload {
        Workload {
            id: "id-task".into(),
            macs_per_sample: 144.0,
            events_per_sample: EventTotals {
                spikes: 40.0,
                syn_events: 600.0,
                neuron_updates: 1344.0,
                steps: 64.0,
            },
            accuracy: Some(1.0),
        }
    }

    #[test]
    fn sweep_is_batch_invariant_by_default() {
        let records = sweep_batches(&workload(), &[1], &EnergyModel::default()).unwrap();
        assert_eq!(records.len(), 1);
        let records =
            sweep_batches(&workload(), &[1, 10, 100], &EnergyModel::default()).unwrap();
        let ratios: Vec<_> = records.iter().map(|r| edp_gain(r).unwrap()).collect();
        for pair in ratios.windows(2) {
            assert!((pair[0].2 - pair[1].2).abs() < 1e-12 * pair[0].2);
        }
    }

    #[test]
    fn batch_overhead_restores_batch_dependence() {
        // a smaller conventional dispatch overhead still shrinks the EDP
        // advantage as B grows, because the conventional per-sample delay is
        // far below the spiking one
        let model = EnergyModel {
            overhead_conv: 1e-3,
            overhead_neuro: 2e-3,
            ..EnergyModel::default()
        };
        let records = sweep_batches(&workload(), &[1, 10, 100], &model).unwrap();
        let ratios: Vec<_> = records.iter().map(|r| edp_gain(r).unwrap().2).collect();
        assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{ratios:?}");
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let records = sweep_batches(&workload(), &[1, 10, 100], &EnergyModel::default()).unwrap();
        let csv = records_to_csv(&records).unwrap();
        assert!(csv.starts_with(
            "workload,B,energy_conv,energy_neuro,delay_conv,delay_neuro,energy_ratio,delay_ratio,edp_ratio\n"
        ));
        assert_eq!(csv.lines().count(), 4);
        let back = records_from_csv(&csv).unwrap();
        for (a, b) in records.iter().zip(&back) {
            assert_eq!(a.workload, b.workload);
            assert_eq!(a.batch, b.batch);
            assert_eq!(a.energy_conv, b.energy_conv);
            assert_eq!(a.energy_neuro, b.energy_neuro);
            assert_eq!(a.delay_conv, b.delay_conv);
            assert_eq!(a.delay_neuro, b.delay_neuro);
        }
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let records = sweep_batches(&workload(), &[1, 7], &EnergyModel::default()).unwrap();
        let json = records_to_json(&records).unwrap();
        let back = records_from_json(&json).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn svg_has_one_reference_line_and_one_marker_per_record() {
        let records = sweep_batches(&workload(), &[1, 10, 100], &EnergyModel::default()).unwrap();
        let svg = scatter_svg(&records).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        assert_eq!(svg.matches("class=\"edp-line\"").count(), 1);
        assert_eq!(svg.matches("<circle").count(), records.len());
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(estimate_conv(-1.0, 1, &EnergyModel::default()).is_err());
        assert!(estimate_conv(10.0, 0, &EnergyModel::default()).is_err());
        let bad = EnergyModel { t_step: 0.0, ..EnergyModel::default() };
        assert!(bad.validate().is_err());
        let w = Workload { id: "a,b".into(), ..workload() };
        assert!(sweep_batches(&w, &[1], &EnergyModel::default()).is_err());
        assert!(sweep_batches(&workload(), &[], &EnergyModel::default()).is_err());
    }
}
