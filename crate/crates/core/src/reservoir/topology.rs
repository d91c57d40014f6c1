use nalgebra::{DMatrix, Schur};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::component_rng;
use crate::{Error, Result};

/// Attempts at drawing a recurrent matrix with nonzero spectral radius.
pub const MAX_DRAWS: usize = 64;

/// Construction parameters for a random reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologySpec {
    pub n: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub connectivity: f64,
    pub spectral_radius: f64,
    pub input_scale: f64,
    pub fb_scale: f64,
    pub tau0: f64,
    pub d_max: u32,
}

impl Default for TopologySpec {
    fn default() -> Self {
        Self {
            n: 25,
            inputs: 1,
            outputs: 1,
            connectivity: 0.2,
            spectral_radius: 0.9,
            input_scale: 1.0,
            fb_scale: 1.0,
            tau0: 1.0,
            d_max: 10,
        }
    }
}

impl TopologySpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParam("reservoir size n must be >= 1".into()));
        }
        if !(self.connectivity > 0.0 && self.connectivity <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "connectivity must lie in (0, 1], got {}",
                self.connectivity
            )));
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "spectral_radius must be > 0, got {}",
                self.spectral_radius
            )));
        }
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return Err(Error::InvalidParam(format!("tau0 must be > 0, got {}", self.tau0)));
        }
        if self.d_max == 0 {
            return Err(Error::InvalidParam("d_max must be >= 1".into()));
        }
        for (name, v) in [("input_scale", self.input_scale), ("fb_scale", self.fb_scale)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// One incoming recurrent connection of a neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub weight: f64,
    pub delay: u32,
}

/// Weights and per-edge delays of a reservoir. Immutable once built.
#[derive(Debug, Clone)]
pub struct Topology {
    w_in: DMatrix<f64>,
    w_self: DMatrix<f64>,
    w_fb: DMatrix<f64>,
    delays: DMatrix<u32>,
    d_max: u32,
    spectral_radius: f64,
    seed: u64,
    incoming: Vec<Vec<Edge>>,
}

/// Equality over the defining matrices; the cached spectral radius is
/// derived and may differ in the last bits between computations.
impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.w_in == other.w_in
            && self.w_self == other.w_self
            && self.w_fb == other.w_fb
            && self.delays == other.delays
            && self.d_max == other.d_max
            && self.seed == other.seed
    }
}

impl Topology {
    /// Assembles a topology from explicit matrices, checking shapes and the
    /// delay range on every nonzero recurrent edge.
    pub fn from_parts(
        w_in: DMatrix<f64>,
        w_self: DMatrix<f64>,
        w_fb: DMatrix<f64>,
        delays: DMatrix<u32>,
        d_max: u32,
        seed: u64,
    ) -> Result<Self> {
        let n = w_self.nrows();
        if n == 0 {
            return Err(Error::InvalidParam("reservoir size n must be >= 1".into()));
        }
        if w_self.ncols() != n {
            return Err(Error::dim("w_self", format!("{n}x{n}"), shape(&w_self)));
        }
        if w_in.nrows() != n {
            return Err(Error::dim("w_in rows", n, w_in.nrows()));
        }
        if w_fb.nrows() != n {
            return Err(Error::dim("w_fb rows", n, w_fb.nrows()));
        }
        if delays.shape() != (n, n) {
            return Err(Error::dim(
                "delays",
                format!("{n}x{n}"),
                format!("{}x{}", delays.nrows(), delays.ncols()),
            ));
        }
        if d_max == 0 {
            return Err(Error::InvalidParam("d_max must be >= 1".into()));
        }
        for m in [&w_in, &w_self, &w_fb] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("topology weights"));
            }
        }

        let mut incoming = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                let weight = w_self[(i, j)];
                if weight != 0.0 {
                    let delay = delays[(i, j)];
                    if delay < 1 || delay > d_max {
                        return Err(Error::InvalidParam(format!(
                            "delay {delay} on edge ({i},{j}) outside [1, {d_max}]"
                        )));
                    }
                    incoming[i].push(Edge { from: j, weight, delay });
                }
            }
        }
        let spectral_radius = spectral_radius(&w_self)?;

        Ok(Self {
            w_in,
            w_self,
            w_fb,
            delays,
            d_max,
            spectral_radius,
            seed,
            incoming,
        })
    }

    pub fn n(&self) -> usize {
        self.w_self.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.w_in.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.w_fb.ncols()
    }

    pub fn w_in(&self) -> &DMatrix<f64> {
        &self.w_in
    }

    pub fn w_self(&self) -> &DMatrix<f64> {
        &self.w_self
    }

    pub fn w_fb(&self) -> &DMatrix<f64> {
        &self.w_fb
    }

    pub fn delays(&self) -> &DMatrix<u32> {
        &self.delays
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Nonzero recurrent connections into neuron `i`.
    pub fn incoming(&self, i: usize) -> &[Edge] {
        &self.incoming[i]
    }

    pub fn edge_count(&self) -> usize {
        self.incoming.iter().map(Vec::len).sum()
    }
}

fn shape(m: &DMatrix<f64>) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

/// Largest eigenvalue modulus, from the real Schur form.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::InvalidParam("eigenvalue iteration did not converge".into()))?;
    let rho = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if rho.is_finite() {
        Ok(rho)
    } else {
        Err(Error::NonFinite("spectral radius"))
    }
}

/// Transport delay per edge: `clamp(round(tau0 · w_max / |w_ij|), 1, d_max)`.
///
/// Weaker links get longer lines. Zero entries get delay 0 and are never
/// read. `tau0 > 0` and `d_max >= 1` are expected.
pub fn compute_delays(w_self: &DMatrix<f64>, tau0: f64, d_max: u32) -> DMatrix<u32> {
    let w_max = w_self.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    w_self.map(|w| {
        if w == 0.0 {
            0
        } else {
            let raw = (tau0 * w_max / w.abs()).round();
            raw.clamp(1.0, d_max as f64) as u32
        }
    })
}

fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    // Row-major fill so the draw order matches the serialized layout.
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| scale * rng.random_range(-1.0..=1.0))
        .collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

/// Draws a random reservoir fully determined by `spec` and `seed`.
pub fn generate_topology(spec: &TopologySpec, seed: u64) -> Result<Topology> {
    spec.validate()?;
    let n = spec.n;

    let mut rng = component_rng(seed, "w_self");
    let mut attempt = 0;
    let (w_self, rho) = loop {
        if attempt == MAX_DRAWS {
            return Err(Error::DegenerateTopology(MAX_DRAWS));
        }
        attempt += 1;
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let keep = rng.random::<f64>() < spec.connectivity;
                let value = rng.random_range(-1.0..=1.0);
                if keep {
                    w[(i, j)] = value;
                }
            }
        }
        let rho = spectral_radius(&w)?;
        if rho > 1e-12 {
            break (w, rho);
        }
    };
    let w_self = w_self * (spec.spectral_radius / rho);

    let w_in = uniform_matrix(&mut component_rng(seed, "w_in"), n, spec.inputs, spec.input_scale);
    let w_fb = uniform_matrix(&mut component_rng(seed, "w_fb"), n, spec.outputs, spec.fb_scale);
    let delays = compute_delays(&w_self, spec.tau0, spec.d_max);

    Topology::from_parts(w_in, w_self, w_fb, delays, spec.d_max, seed)
}
