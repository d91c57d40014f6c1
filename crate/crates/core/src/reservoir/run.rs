use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{step, ReservoirParams, ReservoirState, Topology};
use crate::readout::ReadoutWeights;
use crate::seed::{component_rng, Rng as StreamRng};
use crate::{Error, Result};

/// Where the feedback signal `y[t]` comes from.
#[derive(Debug, Clone, Copy)]
pub enum RunMode<'a> {
    /// Teacher forcing: `y[t]` is column `t` of the teacher (p×T).
    OpenLoop { teacher: &'a DMatrix<f64> },
    /// `y[t] = W_out·x[t]`, fed back on the next step.
    ClosedLoop { readout: &'a ReadoutWeights },
    /// The feedback path is held at zero.
    NoFeedback,
}

/// States and outputs collected after the washout.
#[derive(Debug, Clone, PartialEq)]
pub struct Harvest {
    /// n × (T − washout)
    pub states: DMatrix<f64>,
    /// p × (T − washout): the value fed back at each step (teacher,
    /// prediction, or zero).
    pub outputs: DMatrix<f64>,
}

/// A reservoir being driven step by step. Owns its state and noise stream.
#[derive(Debug, Clone)]
pub struct Runner<'a> {
    topo: &'a Topology,
    params: &'a ReservoirParams,
    state: ReservoirState,
    last_output: DVector<f64>,
    rng: StreamRng,
}

impl<'a> Runner<'a> {
    /// Starts from the zero state; noise is drawn from a stream derived
    /// from `seed`.
    pub fn new(topo: &'a Topology, params: &'a ReservoirParams, seed: u64) -> Result<Self> {
        Self::with_state(topo, params, ReservoirState::zeros(topo.n(), topo.d_max()), seed)
    }

    pub fn with_state(
        topo: &'a Topology,
        params: &'a ReservoirParams,
        state: ReservoirState,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        if state.n() != topo.n() {
            return Err(Error::dim("initial state width", topo.n(), state.n()));
        }
        Ok(Self {
            topo,
            params,
            state,
            last_output: DVector::zeros(topo.outputs()),
            rng: component_rng(seed, "reservoir-noise"),
        })
    }

    pub fn state(&self) -> &ReservoirState {
        &self.state
    }

    /// External input dimension m.
    pub fn input_dim(&self) -> usize {
        self.topo.inputs()
    }

    /// Output fed back on the most recent step.
    pub fn last_output(&self) -> &DVector<f64> {
        &self.last_output
    }

    /// Overrides the value fed back on the next step.
    pub fn set_last_output(&mut self, y: &[f64]) -> Result<()> {
        if y.len() != self.topo.outputs() {
            return Err(Error::dim("feedback vector", self.topo.outputs(), y.len()));
        }
        self.last_output.copy_from_slice(y);
        Ok(())
    }

    /// Drives the reservoir with `inputs` (m×T), discarding the first
    /// `washout` columns of the result.
    pub fn drive(
        &mut self,
        inputs: &DMatrix<f64>,
        mode: RunMode<'_>,
        washout: usize,
    ) -> Result<Harvest> {
        let (n, m, p) = (self.topo.n(), self.topo.inputs(), self.topo.outputs());
        let steps = inputs.ncols();
        if inputs.nrows() != m {
            return Err(Error::dim("input rows", m, inputs.nrows()));
        }
        match mode {
            RunMode::OpenLoop { teacher } => {
                if teacher.ncols() != steps {
                    return Err(Error::dim("teacher length", steps, teacher.ncols()));
                }
                if teacher.nrows() != p {
                    return Err(Error::dim("teacher rows", p, teacher.nrows()));
                }
            }
            RunMode::ClosedLoop { readout } => {
                if readout.inputs() != n || readout.outputs() != p {
                    return Err(Error::dim(
                        "readout shape",
                        format!("{p}x{n}"),
                        format!("{}x{}", readout.outputs(), readout.inputs()),
                    ));
                }
            }
            RunMode::NoFeedback => {}
        }

        let kept = steps.saturating_sub(washout);
        let mut states = DMatrix::zeros(n, kept);
        let mut outputs = DMatrix::zeros(p, kept);
        let zero_fb = vec![0.0; p];
        let mut u = vec![0.0; m];

        for t in 0..steps {
            u.iter_mut().zip(inputs.column(t).iter()).for_each(|(d, s)| *d = *s);
            let fb: &[f64] = match mode {
                RunMode::NoFeedback => &zero_fb,
                _ => self.last_output.as_slice(),
            };
            step(&mut self.state, &u, fb, self.topo, self.params, &mut self.rng)?;

            match mode {
                RunMode::OpenLoop { teacher } => {
                    self.last_output.copy_from(&teacher.column(t));
                }
                RunMode::ClosedLoop { readout } => {
                    self.last_output = readout.apply(self.state.current())?;
                    if self.last_output.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite("closed-loop output"));
                    }
                }
                RunMode::NoFeedback => self.last_output.fill(0.0),
            }

            if t >= washout {
                let col = t - washout;
                states.column_mut(col).copy_from_slice(self.state.current());
                outputs.column_mut(col).copy_from(&self.last_output);
            }
        }
        Ok(Harvest { states, outputs })
    }

    /// Closed-loop generation with zero external input.
    pub fn free_run(&mut self, steps: usize, readout: &ReadoutWeights) -> Result<Harvest> {
        let inputs = DMatrix::zeros(self.topo.inputs(), steps);
        self.drive(&inputs, RunMode::ClosedLoop { readout }, 0)
    }
}

/// Runs from the zero state, discarding `rp.washout` leading steps.
pub fn run(
    topo: &Topology,
    rp: &ReservoirParams,
    inputs: &DMatrix<f64>,
    mode: RunMode<'_>,
    seed: u64,
) -> Result<Harvest> {
    Runner::new(topo, rp, seed)?.drive(inputs, mode, rp.washout)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoStateReport {
    /// True iff every trial's gap fell below the tolerance.
    pub converged: bool,
    /// Largest gap over trials at the point each trial stopped.
    pub final_gap: f64,
    /// Per trial: step at which the gap first dropped below tolerance.
    pub converged_at: Vec<Option<usize>>,
}

/// Drives two random initial states with one shared input sequence and
/// reports whether their difference dies out. All noise is switched off.
pub fn echo_state_check(
    topo: &Topology,
    rp: &ReservoirParams,
    trials: usize,
    horizon: usize,
    tol: f64,
    seed: u64,
) -> Result<EchoStateReport> {
    let quiet = rp.noiseless();
    quiet.validate()?;
    let (n, m, depth) = (topo.n(), topo.inputs(), topo.d_max() as usize + 1);
    let gain = quiet.activation_gain;
    let no_fb = vec![0.0; topo.outputs()];

    let mut final_gap = 0.0f64;
    let mut converged_at = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = component_rng(seed, &format!("echo-state-{trial}"));
        let random_history = |rng: &mut StreamRng| -> Result<ReservoirState> {
            let history: Vec<Vec<f64>> = (0..depth)
                .map(|_| (0..n).map(|_| gain * rng.random_range(-1.0..=1.0)).collect())
                .collect();
            ReservoirState::from_history(&history, topo.d_max())
        };
        let mut a = random_history(&mut rng)?;
        let mut b = random_history(&mut rng)?;
        // Noise is off, so the stream handed to step() is never drawn from.
        let mut idle = component_rng(seed, "echo-state-idle");

        let mut hit = None;
        let mut gap = max_gap(a.current(), b.current());
        for t in 1..=horizon {
            let u: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
            step(&mut a, &u, &no_fb, topo, &quiet, &mut idle)?;
            step(&mut b, &u, &no_fb, topo, &quiet, &mut idle)?;
            gap = max_gap(a.current(), b.current());
            if gap < tol {
                hit = Some(t);
                break;
            }
        }
        final_gap = final_gap.max(gap);
        converged_at.push(hit);
    }

    Ok(EchoStateReport {
        converged: converged_at.iter().all(Option::is_some),
        final_gap,
        converged_at,
    })
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}
