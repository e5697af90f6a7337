//! Release gate: one test per numbered acceptance criterion. Each test
//! prints a `criterion N PASS` line (visible with `--nocapture`) once its
//! assertions hold, so a full run reads as a checklist.

use std::sync::OnceLock;
use std::time::Instant;

use ndarray::{array, Array1, Array2, ArrayView1};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use spikesat::ann::{self, CheckLoss, DenseNet};
use spikesat::bench::{self, EnergyModel, EventTotals, Workload};
use spikesat::codec::{self, RateMode};
use spikesat::interference::{self, IdEncoder, IdPrepared, IdScenario};
use spikesat::lasso::{
    self, FistaConfig, LassoProblem, LcaConfig, SlcaConfig,
};
use spikesat::rrm::{self, RrmPrepared, RrmScenario};
use spikesat::snn::RfParams;
use spikesat::{beam, seed};

const ACCEPT_SEED: u64 = 0xACCE;

fn gaussian_instance(m: usize, n: usize, index: u64) -> LassoProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(ACCEPT_SEED, 1, index));
    let phi: Array2<f64> = Array2::from_shape_fn((m, n), |_| StandardNormal.sample(&mut rng));
    let s: Array1<f64> = Array1::from_shape_fn(m, |_| StandardNormal.sample(&mut rng));
    let grad = phi.t().dot(&s);
    let lambda = 0.1 * grad.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    LassoProblem::new(phi, s, lambda).unwrap()
}

fn linf(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[test]
fn criterion_01_lasso_solvers_match_oracles() {
    let start = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for i in 0..50 {
        let problem = gaussian_instance(20, 40, i);
        let fista = lasso::solve_fista(&problem, &FistaConfig::default()).unwrap();
        let lca = lasso::solve_lca(&problem, &LcaConfig::default()).unwrap();
        assert!(fista.converged && lca.converged, "instance {i} did not converge");
        let gap = linf(lca.a.view(), fista.a.view());
        assert!(gap <= 1e-3, "instance {i}: LCA vs FISTA ‖·‖∞ = {gap:.3e}");
        assert!(fista.kkt <= 1e-5, "instance {i}: FISTA KKT {:.3e}", fista.kkt);
        assert!(lca.kkt <= 1e-5, "instance {i}: LCA KKT {:.3e}", lca.kkt);
        worst_gap = worst_gap.max(gap);
        worst_kkt = worst_kkt.max(fista.kkt.max(lca.kkt));
    }
    let mut worst_exact = 0.0f64;
    // A stop tolerance well below the comparison tolerance, so solver
    // truncation error cannot eat the whole 1e-8 budget.
    let tight = FistaConfig { tol: 1e-12, max_iter: 200_000 };
    for i in 0..8 {
        let problem = gaussian_instance(6, 8, 100 + i);
        let fista = lasso::solve_fista(&problem, &tight).unwrap();
        let exact = lasso::solve_bruteforce(&problem).unwrap();
        let gap = linf(fista.a.view(), exact.view());
        assert!(gap <= 1e-8, "instance {i}: FISTA vs brute force {gap:.3e}");
        worst_exact = worst_exact.max(gap);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "solver suite took {elapsed:.2?}");
    println!(
        "criterion 1 PASS: LCA vs FISTA ≤ {worst_gap:.2e}, brute force ≤ {worst_exact:.2e}, \
         KKT ≤ {worst_kkt:.2e}, {elapsed:.2?}"
    );
}

#[test]
fn criterion_02_slca_reaches_lca_fixed_point() {
    let start = Instant::now();
    // Diagonal case: soft thresholding is the known answer.
    let eye = LassoProblem::new(Array2::eye(2), array![1.0, 0.2], 0.5).unwrap();
    let lca = lasso::solve_lca(&eye, &LcaConfig::default()).unwrap();
    let (spiking, _) = lasso::solve_slca(&eye, &SlcaConfig::default()).unwrap();
    let rel_eye = rel_l2(spiking.as_slice().unwrap(), lca.a.as_slice().unwrap());
    assert!(rel_eye <= 0.02, "identity case relative L2 {rel_eye:.4}");

    // 16-element beamforming task at a fifth of the critical sparsity weight.
    let geometry = beam::ArrayGeometry { elements: 16, spacing: 0.5 };
    let mut task = beam::BeamTask::default_scenario();
    let (problem, _) = beam::build_lasso(&task, &geometry).unwrap();
    task.lambda_reg = 0.2 * beam::lambda_max(&problem);
    let (problem, _) = beam::build_lasso(&task, &geometry).unwrap();
    let lca = lasso::solve_lca(&problem, &LcaConfig::default()).unwrap();
    let cfg = SlcaConfig { t_window: 20_000, ..SlcaConfig::default() };
    let (spiking, _) = lasso::solve_slca(&problem, &cfg).unwrap();
    let rel_beam = rel_l2(spiking.as_slice().unwrap(), lca.a.as_slice().unwrap());
    assert!(rel_beam <= 0.05, "beam task relative L2 {rel_beam:.4}");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "S-LCA suite took {elapsed:.2?}");
    println!(
        "criterion 2 PASS: relative L2 {rel_eye:.4} (identity), {rel_beam:.4} (beam), {elapsed:.2?}"
    );
}

#[test]
fn criterion_03_resonator_bank_matches_fourier_features() {
    let template = RfParams { omega: 0.0, damping: 1.0, threshold: 8.0, phase_tol: 0.3 };
    let n = 128usize;
    let mut worst_tone = 0.0f64;
    for &k in &[1usize, 8, 32] {
        let samples: Vec<Complex64> = (0..n)
            .map(|t| {
                Complex64::new(
                    (2.0 * std::f64::consts::PI * k as f64 * t as f64 / n as f64).cos(),
                    0.0,
                )
            })
            .collect();
        let spectrum = interference::rf_spectrum(&samples, n, &template).unwrap();
        let expected = n as f64 / 2.0;
        let err = (spectrum.magnitudes[k] - expected).abs() / expected;
        assert!(err <= 0.05, "bin {k}: |z| off by {:.2}%", err * 100.0);
        worst_tone = worst_tone.max(err);
    }

    let mut worst_linf = 0.0f64;
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(ACCEPT_SEED, 3, i));
        let samples: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let reference = interference::fft_features(&samples, 4).unwrap();
        let (spiking, _) = interference::rf_stft_features(&samples, 4, n, &template).unwrap();
        let gap = reference
            .shares()
            .iter()
            .zip(spiking.shares())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(gap <= 0.05, "signal {i}: subband share L∞ {gap:.4}");
        worst_linf = worst_linf.max(gap);
    }
    println!(
        "criterion 3 PASS: on-bin tone error ≤ {:.3}%, feature L∞ ≤ {worst_linf:.2e}",
        worst_tone * 100.0
    );
}

#[test]
fn criterion_04_codec_round_trip_error_bounds() {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
    for &t in &[16usize, 64, 256] {
        let rate_bound = 1.0 / (2.0 * t as f64) + 1.0 / t as f64 + 1e-12;
        let raster = codec::encode_rate(&grid, t, RateMode::Deterministic).unwrap();
        let decoded = codec::decode_rate(&raster);
        for (v, d) in grid.iter().zip(&decoded) {
            assert!((v - d).abs() <= rate_bound, "rate T={t}: {v} -> {d}");
        }
        let ttfs_bound = 1.0 / (2.0 * (t as f64 - 1.0)) + 1e-12;
        let raster = codec::encode_ttfs(&grid, t).unwrap();
        let decoded = codec::decode_ttfs(&raster).unwrap();
        for (v, d) in grid.iter().zip(&decoded) {
            assert!((v - d).abs() <= ttfs_bound, "TTFS T={t}: {v} -> {d}");
        }
    }

    // Stochastic rate: the spike count is Binomial(T, v), so the mean of
    // `seeds` decoded values sits within 3σ of v.
    let t = 64usize;
    let seeds = 100u64;
    for &v in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        let mut sum = 0.0;
        for s in 0..seeds {
            let raster = codec::encode_rate(&[v], t, RateMode::Stochastic { seed: s }).unwrap();
            sum += codec::decode_rate(&raster)[0];
        }
        let mean = sum / seeds as f64;
        let sigma = (v * (1.0 - v) / (t as f64 * seeds as f64)).sqrt();
        assert!(
            (mean - v).abs() <= 3.0 * sigma,
            "stochastic rate: mean {mean:.4} vs {v} (3σ = {:.4})",
            3.0 * sigma
        );
    }
    println!("criterion 4 PASS: rate/TTFS bounds hold for T ∈ {{16, 64, 256}}, stochastic mean within 3σ");
}

#[test]
fn criterion_05_analytic_gradients_match_finite_differences() {
    let mut worst = 0.0f64;
    for (arch, label) in [(&[256usize, 96, 16][..], 3usize), (&[4, 16, 5][..], 2)] {
        let net = DenseNet::new(arch, seed::derive(ACCEPT_SEED, 5, arch[0] as u64)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(ACCEPT_SEED, 5, 99));
        let input: Vec<f64> = (0..arch[0]).map(|_| rng.gen::<f64>()).collect();
        for loss in [CheckLoss::CrossEntropy, CheckLoss::Squared] {
            let err = ann::grad_check(
                &net,
                ArrayView1::from(&input),
                label,
                loss,
                400,
                seed::derive(ACCEPT_SEED, 5, 7),
            )
            .unwrap();
            assert!(err <= 1e-5, "architecture {arch:?}: gradient error {err:.3e}");
            worst = worst.max(err);
        }
    }
    println!("criterion 5 PASS: max relative gradient error {worst:.2e} on both architectures");
}

static RRM_FIXTURE: OnceLock<(DenseNet, RrmPrepared)> = OnceLock::new();
static ID_FIXTURE: OnceLock<(DenseNet, IdPrepared)> = OnceLock::new();

fn rrm_fixture() -> &'static (DenseNet, RrmPrepared) {
    RRM_FIXTURE.get_or_init(|| {
        let scenario = RrmScenario::default();
        let prep = rrm::prepare(&scenario).unwrap();
        let (net, _) = rrm::train_ann(&prep, &scenario).unwrap();
        (net, prep)
    })
}

fn id_fixture() -> &'static (DenseNet, IdPrepared) {
    ID_FIXTURE.get_or_init(|| {
        let scenario = IdScenario::default();
        let prep = interference::prepare(&scenario).unwrap();
        let (net, _) = interference::train_ann(&prep, &scenario).unwrap();
        (net, prep)
    })
}

#[test]
fn criterion_06_conversion_agreement_holds_and_grows_with_window() {
    let (net, prep) = rrm_fixture();
    assert!(prep.pool.len() <= 32, "config pool has {} entries", prep.pool.len());
    let steps = [16usize, 32, 64, 128];
    let rrm_agreement: Vec<f64> = steps
        .iter()
        .map(|&t| rrm::eval_snn(net, prep, t).unwrap().agreement)
        .collect();
    let at64 = rrm_agreement[2];
    assert!(at64 >= 0.95, "RRM agreement at T=64 is {at64:.4}");
    for w in rrm_agreement.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "RRM agreement dropped: {rrm_agreement:?}");
    }

    let (net, prep) = id_fixture();
    let id_agreement: Vec<f64> = steps
        .iter()
        .map(|&t| interference::eval_snn(net, prep, IdEncoder::Rate, t).unwrap().agreement)
        .collect();
    let at64 = id_agreement[2];
    assert!(at64 >= 0.95, "ID agreement at T=64 is {at64:.4}");
    for w in id_agreement.windows(2) {
        assert!(w[1] >= w[0] - 1e-12, "ID agreement dropped: {id_agreement:?}");
    }
    println!(
        "criterion 6 PASS: agreement over T={steps:?} — RRM {rrm_agreement:?}, ID {id_agreement:?}"
    );
}

#[test]
fn criterion_07_classifier_quality_on_default_scenarios() {
    let (net, prep) = rrm_fixture();
    let rrm_eval = rrm::eval_ann(net, prep).unwrap();
    assert!(rrm_eval.accuracy >= 0.90, "RRM oracle-label agreement {:.4}", rrm_eval.accuracy);

    let (net, prep) = id_fixture();
    let id_eval = interference::eval_ann(net, prep).unwrap();
    assert!(id_eval.accuracy >= 0.95, "ID accuracy {:.4}", id_eval.accuracy);
    assert!(
        id_eval.accuracy >= id_eval.oracle_accuracy - 0.03,
        "ID accuracy {:.4} trails the energy detector ({:.4}) by more than 3 points",
        id_eval.accuracy,
        id_eval.oracle_accuracy
    );
    let rate = interference::eval_snn(net, prep, IdEncoder::Rate, 64).unwrap().accuracy;
    let ttfs = interference::eval_snn(net, prep, IdEncoder::Ttfs, 64).unwrap().accuracy;
    assert!(
        (rate - ttfs).abs() <= 0.03,
        "rate ({rate:.4}) and TTFS ({ttfs:.4}) accuracies differ by more than 3 points"
    );
    println!(
        "criterion 7 PASS: RRM ANN {:.3}, ID ANN {:.3} (oracle {:.3}), rate {rate:.3} vs TTFS {ttfs:.3}",
        rrm_eval.accuracy, id_eval.accuracy, id_eval.oracle_accuracy
    );
}

#[test]
fn criterion_08_sparse_beamforming_turns_off_chains_cheaply() {
    let geometry = beam::ArrayGeometry::default();
    assert_eq!(geometry.elements, 32);
    let task = beam::BeamTask::default_scenario();
    let fractions = [0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4];
    let rows = beam::sweep_lambda(&task, &geometry, &fractions, beam::BeamSolver::Fista).unwrap();
    let hit = rows
        .iter()
        .find(|r| r.off_fraction >= 0.60 && r.mainlobe_loss_db <= 3.0)
        .unwrap_or_else(|| panic!("no sweep point reaches 60% off within 3 dB: {rows:?}"));

    let (problem, _) = beam::build_lasso(&task, &geometry).unwrap();
    let sparse_task = beam::BeamTask {
        lambda_reg: hit.fraction_of_lambda_max * beam::lambda_max(&problem),
        ..task.clone()
    };
    let fista = beam::solve_beam(&sparse_task, &geometry, beam::BeamSolver::Fista).unwrap();
    let slca = beam::solve_beam(&sparse_task, &geometry, beam::BeamSolver::Slca).unwrap();
    let fista_pattern = beam::beampattern(&fista.weights.w, &geometry, &task.grid_deg).unwrap();
    let slca_pattern = beam::beampattern(&slca.weights.w, &geometry, &task.grid_deg).unwrap();
    let window = beam::mainlobe_window(&task, &geometry);
    let worst_db = window
        .iter()
        .map(|&i| (beam::power_db(fista_pattern[i]) - beam::power_db(slca_pattern[i])).abs())
        .fold(0.0f64, f64::max);
    assert!(worst_db <= 0.5, "FISTA and S-LCA main lobes differ by {worst_db:.3} dB");
    println!(
        "criterion 8 PASS: λ/λ_max={} gives {:.1}% chains off at {:.2} dB loss; solver gap {worst_db:.3} dB",
        hit.fraction_of_lambda_max,
        hit.off_fraction * 100.0,
        hit.mainlobe_loss_db
    );
}

#[test]
fn criterion_09_benchmark_algebra_and_serialization() {
    let workload = Workload {
        id: "algebra".into(),
        macs_per_sample: 27_456.0,
        events_per_sample: EventTotals::per_sample(9_000, 120_000, 31_000, 64, 100).unwrap(),
        accuracy: Some(0.9375),
    };
    let model = EnergyModel { overhead_conv: 1e-4, overhead_neuro: 2e-3, ..EnergyModel::default() };
    let records = bench::sweep_batches(&workload, &[1, 10, 100], &model).unwrap();
    assert_eq!(records.len(), 3);
    for r in &records {
        let (er, dr, edp) = bench::edp_gain(r).unwrap();
        assert_eq!(edp, er * dr, "EDP ratio is not the exact product");
    }

    let csv = bench::records_to_csv(&records).unwrap();
    let back = bench::records_from_csv(&csv).unwrap();
    // The nine-column CSV does not carry the optional accuracy annotation.
    let numeric_only: Vec<_> = records
        .iter()
        .map(|r| bench::BenchRecord { accuracy: None, ..r.clone() })
        .collect();
    assert_eq!(numeric_only, back, "CSV round trip changed a value");
    let json = bench::records_to_json(&records).unwrap();
    let back = bench::records_from_json(&json).unwrap();
    assert_eq!(records, back, "JSON round trip changed a value");

    let svg = bench::scatter_svg(&records).unwrap();
    assert_eq!(svg.matches("class=\"edp-line\"").count(), 1);
    assert_eq!(svg.matches("class=\"record\"").count(), records.len());
    println!("criterion 9 PASS: EDP product exact, CSV/JSON lossless, SVG has line + {} markers", records.len());
}
