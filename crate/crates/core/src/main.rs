use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use asn_reservoir::io::{
    emit_csv, emit_trace, export_netlist, load_model, read_csv, save_model, ModelFile, NetlistOptions, RunConfig,
};
use asn_reservoir::reservoir::{RunMode, Runner};
use asn_reservoir::tasks::{median, ReservoirConfig, TaskKind, TaskReport};
use asn_reservoir::{Error, Result};

#[derive(Parser)]
#[command(name = "asn-reservoir", version, about = "Stochastic-neuron reservoir simulator")]
struct Cli {
    /// Master seed; overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured task's reservoir and write it as a model file.
    Gen {
        #[arg(long, default_value = "model.json")]
        out: PathBuf,
    },
    /// Harvest states for the configured task and fit the readout.
    Train {
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        /// Defaults to overwriting the input model.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drive a model with inputs from a CSV file and write states/outputs.
    Run {
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        /// Input CSV; every column except `t` is an input channel.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Teacher CSV for open-loop runs.
        #[arg(long)]
        teacher: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::NoFeedback)]
        mode: Mode,
        /// Zero-input steps when no input file is given.
        #[arg(long, default_value_t = 0)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        washout: usize,
        /// Also emit neuron states.
        #[arg(long)]
        states: bool,
        #[arg(long, default_value = "run.csv")]
        out: PathBuf,
    },
    /// Score a trained model on the configured task.
    Eval {
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        /// Summary JSON; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full task pipeline and write its traces and summary.
    Demo {
        #[arg(value_enum)]
        task: DemoTask,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Independent seeds `seed, seed+1, ...` run in parallel.
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
    /// Write the recurrent connectivity as an RC netlist.
    ExportNetlist {
        #[arg(long, default_value = "model.json")]
        model: PathBuf,
        #[arg(long, default_value = "model.sp")]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        step_seconds: f64,
        #[arg(long, default_value_t = 1e3)]
        unit_ohms: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    NoFeedback,
    OpenLoop,
    ClosedLoop,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoTask {
    Inverter,
    Video,
    Autoencoder,
}

impl From<DemoTask> for TaskKind {
    fn from(t: DemoTask) -> Self {
        match t {
            DemoTask::Inverter => TaskKind::Inverter,
            DemoTask::Video => TaskKind::Video,
            DemoTask::Autoencoder => TaskKind::Autoencoder,
        }
    }
}

#[derive(Serialize)]
struct TrialSummary {
    task: TaskKind,
    seeds: Vec<u64>,
    median_nrmse: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    median_sign_agreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    median_recovery_rate: Option<f64>,
    reports: Vec<TaskReport>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.seed);

    match cli.command {
        Command::Gen { out } => {
            let rc = cfg.reservoir();
            let topo = rc.build(seed)?;
            save_model(&ModelFile::new(rc.dynamics.clone(), topo), out)
        }
        Command::Train { model, out } => {
            let m = load_model(&model)?;
            use_model_dynamics(&mut cfg, &m);
            let (report, w) = cfg.run_on(&m.topology, seed, None)?;
            save_model(&m.with_readout(w)?, out.as_ref().unwrap_or(&model))?;
            print_out(&to_json(&report)?);
            Ok(())
        }
        Command::Eval { model, out } => {
            let m = load_model(&model)?;
            let w = m.readout.as_ref().ok_or(Error::Untrained)?;
            use_model_dynamics(&mut cfg, &m);
            let (report, _) = cfg.run_on(&m.topology, seed, Some(w))?;
            let text = to_json(&report)?;
            match out {
                Some(p) => write(&p, &text),
                None => {
                    print_out(&text);
                    Ok(())
                }
            }
        }
        Command::Run {
            model,
            input,
            teacher,
            mode,
            steps,
            washout,
            states,
            out,
        } => {
            let m = load_model(&model)?;
            run_model(&m, seed, input.as_deref(), teacher.as_deref(), mode, steps, washout, states, &out)
        }
        Command::Demo { task, out_dir, trials } => {
            cfg.task = task.into();
            demo(&cfg, seed, trials, &out_dir)
        }
        Command::ExportNetlist {
            model,
            out,
            step_seconds,
            unit_ohms,
        } => {
            let m = load_model(&model)?;
            export_netlist(&m.topology, out, &NetlistOptions { step_seconds, unit_ohms })
        }
    }
}

fn use_model_dynamics(cfg: &mut RunConfig, m: &ModelFile) {
    let rc: &mut ReservoirConfig = match cfg.task {
        TaskKind::Inverter => &mut cfg.inverter.reservoir,
        TaskKind::Video => &mut cfg.video.reservoir,
        TaskKind::Autoencoder => &mut cfg.autoencoder.reservoir,
    };
    rc.dynamics = m.params.clone();
}

#[allow(clippy::too_many_arguments)]
fn run_model(
    m: &ModelFile,
    seed: u64,
    input: Option<&Path>,
    teacher: Option<&Path>,
    mode: Mode,
    steps: usize,
    washout: usize,
    with_states: bool,
    out: &Path,
) -> Result<()> {
    let topo = &m.topology;
    let inputs = match input {
        Some(p) => channels(p, topo.inputs())?,
        None => DMatrix::zeros(topo.inputs(), steps),
    };
    let teacher = teacher.map(|p| channels(p, topo.outputs())).transpose()?;
    let run_mode = match mode {
        Mode::NoFeedback => RunMode::NoFeedback,
        Mode::OpenLoop => RunMode::OpenLoop {
            teacher: teacher
                .as_ref()
                .ok_or_else(|| Error::InvalidParam("open-loop run needs --teacher".into()))?,
        },
        Mode::ClosedLoop => RunMode::ClosedLoop {
            readout: m.readout.as_ref().ok_or(Error::Untrained)?,
        },
    };
    let mut runner = Runner::new(topo, &m.params, ReservoirConfig::noise_seed(seed))?;
    let harvest = runner.drive(&inputs, run_mode, washout)?;

    let mut labels = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = &m.readout {
        let y = w.apply_matrix(&harvest.states)?;
        for (k, row) in y.row_iter().enumerate() {
            labels.push(format!("y{k}"));
            columns.push(row.iter().copied().collect());
        }
    }
    if with_states || m.readout.is_none() {
        for (k, row) in harvest.states.row_iter().enumerate() {
            labels.push(format!("x{k}"));
            columns.push(row.iter().copied().collect());
        }
    }
    emit_csv(out, &labels, &columns)
}

/// Reads a CSV and returns its non-`t` columns as rows of a matrix.
fn channels(path: &Path, expected: usize) -> Result<DMatrix<f64>> {
    let (labels, columns) = read_csv(path)?;
    let cols: Vec<Vec<f64>> = labels
        .iter()
        .zip(columns)
        .filter(|(l, _)| l.as_str() != "t")
        .map(|(_, c)| c)
        .collect();
    if cols.len() != expected {
        return Err(Error::Malformed(format!(
            "{}: expected {expected} data columns, found {}",
            path.display(),
            cols.len()
        )));
    }
    let len = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(expected, len, |r, c| cols[r][c]))
}

fn demo(cfg: &RunConfig, seed: u64, trials: u64, out_dir: &Path) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParam("--trials must be >= 1".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let seeds: Vec<u64> = (0..trials).map(|k| seed.wrapping_add(k)).collect();
    let reports: Vec<TaskReport> = seeds.par_iter().map(|&s| cfg.run(s)).collect::<Result<_>>()?;

    if let [report] = reports.as_slice() {
        for trace in &report.traces {
            emit_trace(out_dir.join(format!("{}.csv", trace.name)), trace)?;
        }
        let text = to_json(report)?;
        print_out(&text);
        return write(&out_dir.join("summary.json"), &text);
    }

    for report in &reports {
        let dir = out_dir.join(format!("seed_{}", report.seed));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for trace in &report.traces {
            emit_trace(dir.join(format!("{}.csv", trace.name)), trace)?;
        }
    }
    let pick = |f: fn(&TaskReport) -> Option<f64>| -> Option<f64> {
        let v: Option<Vec<f64>> = reports.iter().map(f).collect();
        v.map(|v| median(&v))
    };
    let summary = TrialSummary {
        task: cfg.task,
        seeds,
        median_nrmse: median(&reports.iter().map(|r| r.metrics.nrmse).collect::<Vec<_>>()),
        median_sign_agreement: pick(|r| r.metrics.sign_agreement),
        median_recovery_rate: pick(|r| r.metrics.recovery_rate),
        reports,
    };
    let text = to_json(&summary)?;
    print_out(&text);
    write(&out_dir.join("summary.json"), &text)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    let mut body = text.to_string();
    body.push('\n');
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Stdout is informational; a closed pipe is not an error.
fn print_out(text: &str) {
    let _ = writeln!(std::io::stdout(), "{text}");
}
