//! Command-line driver: runs the three workload pipelines from scenario
//! files, emits JSON/CSV/SVG reports, and benchmarks conventional against
//! spiking execution. Every subcommand is deterministic for a given
//! (scenario, seed, flags) tuple — reruns produce byte-identical files
//! regardless of thread count.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use spikesat::bench::{self, BenchRecord, EnergyModel, EventTotals, Workload};
use spikesat::codec::{self, RateMode};
use spikesat::interference::{self, IdEncoder, IdScenario};
use spikesat::raster::SpikeRaster;
use spikesat::rrm::{self, RrmScenario};
use spikesat::{beam, seed};

#[derive(Parser)]
#[command(
    name = "spikesat",
    about = "Satellite-communication workloads in conventional and spiking form",
    version
)]
struct Cli {
    /// Size of the global worker pool (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory for report files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Payload resource classification: demand maps -> config labels.
    Rrm(RrmArgs),
    /// Subband interference detection on synthetic received signals.
    Id(IdArgs),
    /// Sparse receive beamforming with FISTA and spiking-LCA solvers.
    Beam(BeamArgs),
    /// Energy/delay comparison over previously produced workload files.
    Bench(BenchArgs),
    /// Standalone spike-codec round trip on a value vector.
    Encode(EncodeArgs),
}

#[derive(Args)]
struct RrmArgs {
    /// Scenario file (.toml or .json); defaults are built in.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Which classifier variants to evaluate.
    #[arg(long, value_enum, default_value_t = RunMode::Both)]
    mode: RunMode,
    /// Spike-train length for the converted network.
    #[arg(long, default_value_t = 64)]
    steps: usize,
    /// Comma-separated batch sizes for the bench rows.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    batches: Vec<u64>,
}

#[derive(Args)]
struct IdArgs {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Spike encoder(s) for the converted network.
    #[arg(long, value_enum, default_value_t = EncoderChoice::Both)]
    encoder: EncoderChoice,
    #[arg(long, default_value_t = 64)]
    steps: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    batches: Vec<u64>,
}

#[derive(Args)]
struct BeamArgs {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solver(s) to run.
    #[arg(long, value_enum, default_value_t = SolverChoice::Both)]
    solver: SolverChoice,
    /// Absolute sparsity weight override (default: fraction of λ_max from
    /// the scenario).
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Energy-model file (.toml or .json); defaults are built in.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    batches: Vec<u64>,
}

#[derive(Args)]
struct EncodeArgs {
    /// Value file (.toml or .json with a `values` array); defaults to a
    /// 0.05-spaced grid over [0, 1].
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CodecChoice::Rate)]
    encoder: CodecChoice,
    #[arg(long, default_value_t = 64)]
    steps: usize,
    /// Seed for the stochastic encoder.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Raster serialization format.
    #[arg(long, value_enum, default_value_t = RasterFormat::Spkr)]
    format: RasterFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunMode {
    Ann,
    Snn,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EncoderChoice {
    Rate,
    Ttfs,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    Fista,
    Slca,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodecChoice {
    Rate,
    Stochastic,
    Ttfs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RasterFormat {
    Spkr,
    Csv,
}

/// Machine-readable failure: `code` goes into the error JSON on stderr and
/// `exit` becomes the process status (1 domain/config, 2 I/O).
struct CliError {
    code: &'static str,
    message: String,
    exit: u8,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self { code: "E_CONFIG", message: message.into(), exit: 1 }
    }

    fn input(message: impl Into<String>) -> Self {
        Self { code: "E_INPUT", message: message.into(), exit: 1 }
    }

    fn io(message: impl Into<String>) -> Self {
        Self { code: "E_IO", message: message.into(), exit: 2 }
    }
}

impl From<spikesat::Error> for CliError {
    fn from(e: spikesat::Error) -> Self {
        match e {
            spikesat::Error::Io(inner) => Self::io(inner.to_string()),
            other => Self::config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) =
            rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()
        {
            eprintln!("{}", json!({ "error": "E_CONFIG", "message": e.to_string() }));
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Rrm(args) => cmd_rrm(&cli.out, args),
        Command::Id(args) => cmd_id(&cli.out, args),
        Command::Beam(args) => cmd_beam(&cli.out, args),
        Command::Bench(args) => cmd_bench(&cli.out, args),
        Command::Encode(args) => cmd_encode(&cli.out, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.code, "message": e.message }));
            ExitCode::from(e.exit)
        }
    }
}

/// Parse a scenario file as TOML or JSON according to its extension.
fn load_scenario<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config(format!("cannot read scenario {}: {e}", path.display()))
    })?;
    match path.extension().and_then(|s| s.to_str()) {
        Some("toml") => toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display()))),
        Some("json") => serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display()))),
        other => Err(CliError::config(format!(
            "scenario {} has unsupported extension {other:?} (use .toml or .json)",
            path.display()
        ))),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn write_bytes(dir: &Path, name: &str, contents: &[u8]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::config(e.to_string()))
}

/// Epochs renumbered continuously across training stages.
fn curves_csv(reports: &[spikesat::ann::TrainReport]) -> String {
    let mut out = String::from("epoch,loss,accuracy\n");
    let mut epoch = 0usize;
    for report in reports {
        for (l, a) in report.loss.iter().zip(&report.accuracy) {
            out.push_str(&format!("{epoch},{l},{a}\n"));
            epoch += 1;
        }
    }
    out
}

fn workload_events(
    spikes: u64,
    syn_events: u64,
    neuron_updates: u64,
    steps: usize,
    samples: usize,
) -> Result<EventTotals, CliError> {
    Ok(EventTotals::per_sample(spikes, syn_events, neuron_updates, steps, samples)?)
}

#[derive(Serialize)]
struct RrmReport {
    scenario: RrmScenario,
    pool_size: usize,
    kept_configs: Vec<usize>,
    train_samples: usize,
    test_samples: usize,
    final_train_loss: f64,
    final_train_accuracy: f64,
    ann: Option<RrmAnnSection>,
    snn: Option<RrmSnnSection>,
}

#[derive(Serialize)]
struct RrmAnnSection {
    test_accuracy: f64,
}

#[derive(Serialize)]
struct RrmSnnSection {
    steps: usize,
    agreement_with_ann: f64,
    test_accuracy: f64,
    spikes: u64,
    syn_events: u64,
    neuron_updates: u64,
}

fn cmd_rrm(out: &Path, args: &RrmArgs) -> Result<(), CliError> {
    let mut scenario: RrmScenario = match &args.scenario {
        Some(path) => load_scenario(path)?,
        None => RrmScenario::default(),
    };
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    if args.steps == 0 {
        return Err(CliError::config("--steps must be ≥ 1"));
    }
    let prep = rrm::prepare(&scenario)?;
    let (net, reports) = rrm::train_ann(&prep, &scenario)?;
    write_file(out, "rrm_curves.csv", &curves_csv(&reports))?;

    let last = reports.last().expect("at least one training stage");
    let mut report = RrmReport {
        scenario: scenario.clone(),
        pool_size: prep.pool.len(),
        kept_configs: prep.kept.clone(),
        train_samples: prep.train_y.len(),
        test_samples: prep.test_y.len(),
        final_train_loss: *last.loss.last().unwrap_or(&f64::NAN),
        final_train_accuracy: *last.accuracy.last().unwrap_or(&f64::NAN),
        ann: None,
        snn: None,
    };

    let ann_eval = rrm::eval_ann(&net, &prep)?;
    if args.mode != RunMode::Snn {
        let m = interference::confusion_matrix(&prep.test_y, &ann_eval.predictions, prep.pool.len());
        write_file(out, "rrm_confusion_ann.csv", &interference::confusion_to_csv(&m))?;
        report.ann = Some(RrmAnnSection { test_accuracy: ann_eval.accuracy });
    }
    if args.mode != RunMode::Ann {
        let snn_eval = rrm::eval_snn(&net, &prep, args.steps)?;
        let m =
            interference::confusion_matrix(&prep.test_y, &snn_eval.predictions, prep.pool.len());
        write_file(out, "rrm_confusion_snn.csv", &interference::confusion_to_csv(&m))?;
        let workload = Workload {
            id: "rrm".into(),
            macs_per_sample: net.count_macs() as f64,
            events_per_sample: workload_events(
                snn_eval.spikes,
                snn_eval.syn_events,
                snn_eval.neuron_updates,
                snn_eval.steps,
                snn_eval.samples,
            )?,
            accuracy: Some(snn_eval.accuracy),
        };
        write_file(out, "rrm_workload.json", &to_pretty_json(&workload)?)?;
        let records = bench::sweep_batches(&workload, &args.batches, &EnergyModel::default())?;
        write_file(out, "rrm_bench.csv", &bench::records_to_csv(&records)?)?;
        report.snn = Some(RrmSnnSection {
            steps: snn_eval.steps,
            agreement_with_ann: snn_eval.agreement,
            test_accuracy: snn_eval.accuracy,
            spikes: snn_eval.spikes,
            syn_events: snn_eval.syn_events,
            neuron_updates: snn_eval.neuron_updates,
        });
    }
    write_file(out, "rrm_report.json", &to_pretty_json(&report)?)
}

#[derive(Serialize)]
struct IdReport {
    scenario: IdScenario,
    ann_accuracy: f64,
    oracle_accuracy: f64,
    snn: Vec<IdSnnSection>,
}

#[derive(Serialize)]
struct IdSnnSection {
    encoder: IdEncoder,
    steps: usize,
    agreement_with_ann: f64,
    test_accuracy: f64,
    spikes: u64,
    syn_events: u64,
    neuron_updates: u64,
}

fn cmd_id(out: &Path, args: &IdArgs) -> Result<(), CliError> {
    let mut scenario: IdScenario = match &args.scenario {
        Some(path) => load_scenario(path)?,
        None => IdScenario::default(),
    };
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    if args.steps == 0 {
        return Err(CliError::config("--steps must be ≥ 1"));
    }
    let prep = interference::prepare(&scenario)?;
    let (net, train_report) = interference::train_ann(&prep, &scenario)?;
    write_file(out, "id_curves.csv", &curves_csv(std::slice::from_ref(&train_report)))?;
    let ann_eval = interference::eval_ann(&net, &prep)?;
    let classes = scenario.l + 1;
    let m = interference::confusion_matrix(&prep.test_y, &ann_eval.predictions, classes);
    write_file(out, "id_confusion_ann.csv", &interference::confusion_to_csv(&m))?;

    let encoders: &[IdEncoder] = match args.encoder {
        EncoderChoice::Rate => &[IdEncoder::Rate],
        EncoderChoice::Ttfs => &[IdEncoder::Ttfs],
        EncoderChoice::Both => &[IdEncoder::Rate, IdEncoder::Ttfs],
    };
    let mut snn_sections = Vec::new();
    let mut workload_written = false;
    for &encoder in encoders {
        let eval = interference::eval_snn(&net, &prep, encoder, args.steps)?;
        let name = match encoder {
            IdEncoder::Rate => "id_confusion_rate.csv",
            IdEncoder::Ttfs => "id_confusion_ttfs.csv",
        };
        let m = interference::confusion_matrix(&prep.test_y, &eval.predictions, classes);
        write_file(out, name, &interference::confusion_to_csv(&m))?;
        if !workload_written {
            let workload = Workload {
                id: "id".into(),
                macs_per_sample: net.count_macs() as f64,
                events_per_sample: workload_events(
                    eval.spikes,
                    eval.syn_events,
                    eval.neuron_updates,
                    eval.steps,
                    eval.samples,
                )?,
                accuracy: Some(eval.accuracy),
            };
            write_file(out, "id_workload.json", &to_pretty_json(&workload)?)?;
            let records = bench::sweep_batches(&workload, &args.batches, &EnergyModel::default())?;
            write_file(out, "id_bench.csv", &bench::records_to_csv(&records)?)?;
            workload_written = true;
        }
        snn_sections.push(IdSnnSection {
            encoder,
            steps: eval.steps,
            agreement_with_ann: eval.agreement,
            test_accuracy: eval.accuracy,
            spikes: eval.spikes,
            syn_events: eval.syn_events,
            neuron_updates: eval.neuron_updates,
        });
    }
    let report = IdReport {
        scenario,
        ann_accuracy: ann_eval.accuracy,
        oracle_accuracy: ann_eval.oracle_accuracy,
        snn: snn_sections,
    };
    write_file(out, "id_report.json", &to_pretty_json(&report)?)
}

/// Beam scenario file: geometry, task, sweep grid, and power-simulation
/// settings in one document.
#[derive(Clone, Serialize, Deserialize)]
#[serde(default)]
struct BeamScenario {
    geometry: beam::ArrayGeometry,
    task: beam::BeamTask,
    /// λ_reg as a fraction of λ_max when no absolute --lambda is given.
    lambda_frac: f64,
    sweep_fractions: Vec<f64>,
    snapshots: usize,
    power_seeds: u64,
    seed: u64,
}

impl Default for BeamScenario {
    fn default() -> Self {
        Self {
            geometry: beam::ArrayGeometry::default(),
            task: beam::BeamTask::default_scenario(),
            lambda_frac: 0.2,
            sweep_fractions: vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4],
            snapshots: 2048,
            power_seeds: 30,
            seed: 42,
        }
    }
}

#[derive(Serialize)]
struct PowerStats {
    solver: String,
    mean: f64,
    q1: f64,
    median: f64,
    q3: f64,
    iqr: f64,
    seeds: u64,
    snapshots: usize,
}

#[derive(Serialize)]
struct BeamSolverSection {
    solver: String,
    degenerate: bool,
    off_count: usize,
    off_fraction: f64,
    mainlobe_loss_db: f64,
    output_power: Option<PowerStats>,
}

#[derive(Serialize)]
struct BeamReport {
    scenario: BeamScenario,
    lambda_reg: f64,
    lambda_max: f64,
    solvers: Vec<BeamSolverSection>,
    warnings: Vec<String>,
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn solver_name(s: beam::BeamSolver) -> &'static str {
    match s {
        beam::BeamSolver::Fista => "fista",
        beam::BeamSolver::Slca => "slca",
    }
}

/// Polar beampattern plot (upper half-plane): one trace per solver, radius
/// mapped from dB relative to each pattern's peak with a −60 dB floor.
fn polar_svg(grid_deg: &[f64], traces: &[(String, Vec<f64>)]) -> String {
    let (width, height) = (640.0, 380.0);
    let (cx, cy, radius) = (width / 2.0, height - 40.0, height - 90.0);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    );
    svg.push_str(&format!(
        "  <path d=\"M {:.2} {:.2} A {radius:.2} {radius:.2} 0 0 1 {:.2} {:.2} Z\" \
         fill=\"none\" stroke=\"#ccc\"/>\n",
        cx - radius,
        cy,
        cx + radius,
        cy
    ));
    let colors = ["#1f77b4", "#d62728", "#2ca02c"];
    for (i, (name, pattern)) in traces.iter().enumerate() {
        let peak = pattern.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
        let mut d = String::new();
        for (g, (&theta, &p)) in grid_deg.iter().zip(pattern).enumerate() {
            let db = beam::power_db(p / peak);
            let r = ((db + 60.0) / 60.0).clamp(0.0, 1.0) * radius;
            let (x, y) =
                (cx + r * theta.to_radians().sin(), cy - r * theta.to_radians().cos());
            d.push_str(if g == 0 { "M" } else { " L" });
            d.push_str(&format!(" {x:.2} {y:.2}"));
        }
        svg.push_str(&format!(
            "  <path class=\"trace\" data-solver=\"{name}\" d=\"{d}\" fill=\"none\" \
             stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            colors[i % colors.len()]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn cmd_beam(out: &Path, args: &BeamArgs) -> Result<(), CliError> {
    let mut scenario: BeamScenario = match &args.scenario {
        Some(path) => load_scenario(path)?,
        None => BeamScenario::default(),
    };
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    scenario.task.validate(&scenario.geometry)?;
    let (problem, _) = beam::build_lasso(&scenario.task, &scenario.geometry)?;
    let lambda_max = beam::lambda_max(&problem);
    let lambda_reg = match args.lambda {
        Some(l) if l >= 0.0 && l.is_finite() => l,
        Some(l) => return Err(CliError::config(format!("--lambda {l} must be ≥ 0"))),
        None => scenario.lambda_frac * lambda_max,
    };
    let task = beam::BeamTask { lambda_reg, ..scenario.task.clone() };
    let dense_task = beam::BeamTask { lambda_reg: 0.0, ..scenario.task.clone() };
    let dense = beam::solve_beam(&dense_task, &scenario.geometry, beam::BeamSolver::Fista)?;
    let dense_pattern =
        beam::beampattern(&dense.weights.w, &scenario.geometry, &task.grid_deg)?;
    let window = beam::mainlobe_window(&task, &scenario.geometry);

    let solvers: &[beam::BeamSolver] = match args.solver {
        SolverChoice::Fista => &[beam::BeamSolver::Fista],
        SolverChoice::Slca => &[beam::BeamSolver::Slca],
        SolverChoice::Both => &[beam::BeamSolver::Fista, beam::BeamSolver::Slca],
    };
    let mut warnings = Vec::new();
    let mut sections = Vec::new();
    let mut traces = Vec::new();
    for &solver in solvers {
        let name = solver_name(solver);
        let sol = beam::solve_beam(&task, &scenario.geometry, solver)?;
        let pattern = beam::beampattern(&sol.weights.w, &scenario.geometry, &task.grid_deg)?;
        write_file(
            out,
            &format!("beam_pattern_{name}.csv"),
            &beam::pattern_to_csv(&task.grid_deg, &pattern),
        )?;
        let (off_count, off_fraction) = beam::rf_chains_off(&sol.weights.w, sol.weights.eps_off);
        let output_power = if sol.degenerate {
            warnings.push(format!(
                "{name}: λ_reg = {lambda_reg} zeroed every weight; skipping the rescale and \
                 output-power statistics"
            ));
            None
        } else {
            let mut powers: Vec<f64> = (0..scenario.power_seeds)
                .map(|s| {
                    beam::avg_output_power(
                        &sol.weights.w,
                        &task,
                        &scenario.geometry,
                        scenario.snapshots,
                        seed::derive(scenario.seed, 7, s),
                    )
                })
                .collect::<spikesat::Result<_>>()?;
            powers.sort_by(f64::total_cmp);
            let mean = powers.iter().sum::<f64>() / powers.len() as f64;
            let (q1, median, q3) = (
                percentile(&powers, 25.0),
                percentile(&powers, 50.0),
                percentile(&powers, 75.0),
            );
            Some(PowerStats {
                solver: name.into(),
                mean,
                q1,
                median,
                q3,
                iqr: q3 - q1,
                seeds: scenario.power_seeds,
                snapshots: scenario.snapshots,
            })
        };
        sections.push(BeamSolverSection {
            solver: name.into(),
            degenerate: sol.degenerate,
            off_count,
            off_fraction,
            mainlobe_loss_db: if sol.degenerate {
                f64::INFINITY
            } else {
                beam::mainlobe_loss_db(&pattern, &dense_pattern, &window)
            },
            output_power,
        });
        traces.push((name.to_string(), pattern));
    }
    write_file(out, "beam.svg", &polar_svg(&task.grid_deg, &traces))?;
    let rows = beam::sweep_lambda(
        &scenario.task,
        &scenario.geometry,
        &scenario.sweep_fractions,
        beam::BeamSolver::Fista,
    )?;
    write_file(out, "beam_sweep.csv", &beam::sweep_to_csv(&rows))?;
    let power_stats: Vec<&PowerStats> =
        sections.iter().filter_map(|s| s.output_power.as_ref()).collect();
    write_file(out, "power_stats.json", &to_pretty_json(&power_stats)?)?;
    let report = BeamReport { scenario, lambda_reg, lambda_max, solvers: sections, warnings };
    write_file(out, "beam_report.json", &to_pretty_json(&report)?)
}

fn cmd_bench(out: &Path, args: &BenchArgs) -> Result<(), CliError> {
    let model: EnergyModel = match &args.scenario {
        Some(path) => load_scenario(path)?,
        None => EnergyModel::default(),
    };
    let mut workload_files: Vec<PathBuf> = match std::fs::read_dir(out) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.ends_with("_workload.json"))
            })
            .collect(),
        Err(_) => Vec::new(),
    };
    workload_files.sort();
    if workload_files.is_empty() {
        return Err(CliError::input(format!(
            "no *_workload.json event-count files in {}; run the rrm/id subcommands first",
            out.display()
        )));
    }
    let mut records: Vec<BenchRecord> = Vec::new();
    for path in &workload_files {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        let workload: Workload = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        records.extend(bench::sweep_batches(&workload, &args.batches, &model)?);
    }
    write_file(out, "bench.csv", &bench::records_to_csv(&records)?)?;
    write_file(out, "bench.json", &bench::records_to_json(&records)?)?;
    write_file(out, "bench.svg", &bench::scatter_svg(&records)?)
}

#[derive(Deserialize)]
struct EncodeInput {
    values: Vec<f64>,
}

fn cmd_encode(out: &Path, args: &EncodeArgs) -> Result<(), CliError> {
    let values = match &args.scenario {
        Some(path) => load_scenario::<EncodeInput>(path)?.values,
        None => (0..=20).map(|i| i as f64 * 0.05).collect(),
    };
    let raster = match args.encoder {
        CodecChoice::Rate => codec::encode_rate(&values, args.steps, RateMode::Deterministic)?,
        CodecChoice::Stochastic => {
            codec::encode_rate(&values, args.steps, RateMode::Stochastic { seed: args.seed })?
        }
        CodecChoice::Ttfs => codec::encode_ttfs(&values, args.steps)?,
    };
    let decoded = match args.encoder {
        CodecChoice::Ttfs => codec::decode_ttfs(&raster)?,
        _ => codec::decode_rate(&raster),
    };
    let max_error = values
        .iter()
        .zip(&decoded)
        .map(|(v, d)| (v - d).abs())
        .fold(0.0f64, f64::max);
    let (name, round_trip): (&str, SpikeRaster) = match args.format {
        RasterFormat::Spkr => {
            write_bytes(out, "encoded.spkr", &raster.to_spkr())?;
            ("encoded.spkr", SpikeRaster::from_spkr(&raster.to_spkr())?)
        }
        RasterFormat::Csv => {
            let csv = raster.to_rle_csv();
            write_file(out, "encoded.csv", &csv)?;
            ("encoded.csv", SpikeRaster::from_rle_csv(&csv, args.steps)?)
        }
    };
    if round_trip != raster {
        return Err(CliError::io(format!("{name} did not round-trip")));
    }
    let summary = json!({
        "file": name,
        "channels": values.len(),
        "steps": args.steps,
        "spikes": raster.total_spikes(),
        "max_decode_error": max_error,
    });
    println!("{summary:#}");
    Ok(())
}
