use rand::Rng;
use rand_distr::StandardNormal;

use super::{Backend, ReservoirParams, Topology};
use crate::device::asn_response;
use crate::{Error, Result};

/// Current activations plus enough history to serve every delayed tap.
///
/// The ring holds `d_max + 1` vectors: `x[t], x[t-1], …, x[t-d_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    n: usize,
    depth: usize,
    /// Row `k` of the ring, stored flat.
    ring: Vec<f64>,
    /// Ring row holding `x[t]`.
    head: usize,
    t: u64,
}

impl ReservoirState {
    /// All-zero state with room for delays up to `d_max`.
    pub fn zeros(n: usize, d_max: u32) -> Self {
        let depth = d_max as usize + 1;
        Self {
            n,
            depth,
            ring: vec![0.0; n * depth],
            head: 0,
            t: 0,
        }
    }

    /// `x[t] = x0` with zero history behind it.
    pub fn with_current(x0: &[f64], d_max: u32) -> Self {
        let mut s = Self::zeros(x0.len(), d_max);
        s.ring[..x0.len()].copy_from_slice(x0);
        s
    }

    /// Fills the whole history, newest first (`history[0] = x[t]`).
    pub fn from_history(history: &[Vec<f64>], d_max: u32) -> Result<Self> {
        let n = history.first().map_or(0, Vec::len);
        let mut s = Self::zeros(n, d_max);
        if history.len() > s.depth {
            return Err(Error::dim("state history depth", s.depth, history.len()));
        }
        for (lag, x) in history.iter().enumerate() {
            if x.len() != n {
                return Err(Error::dim("state history width", n, x.len()));
            }
            let row = (s.head + s.depth - lag) % s.depth;
            s.ring[row * n..(row + 1) * n].copy_from_slice(x);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Longest delay this state can serve.
    pub fn max_lag(&self) -> usize {
        self.depth - 1
    }

    pub fn current(&self) -> &[f64] {
        self.lagged(0)
    }

    /// `x[t - lag]`.
    pub fn lagged(&self, lag: usize) -> &[f64] {
        assert!(lag < self.depth, "lag {lag} beyond history depth {}", self.depth);
        let row = (self.head + self.depth - lag) % self.depth;
        &self.ring[row * self.n..(row + 1) * self.n]
    }

    fn push(&mut self, x: &[f64]) {
        self.head = (self.head + 1) % self.depth;
        let n = self.n;
        self.ring[self.head * n..(self.head + 1) * n].copy_from_slice(x);
        self.t += 1;
    }

    /// Iterates over every stored activation.
    pub fn history_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.ring.iter().copied()
    }
}

/// Advances `state` by one step.
///
/// `u_next` is the input at `t+1`, `y_prev` the output fed back from `t`.
pub fn step<R: Rng + ?Sized>(
    state: &mut ReservoirState,
    u_next: &[f64],
    y_prev: &[f64],
    topo: &Topology,
    rp: &ReservoirParams,
    rng: &mut R,
) -> Result<()> {
    let n = topo.n();
    if state.n() != n {
        return Err(Error::dim("state width", n, state.n()));
    }
    if state.max_lag() < topo.d_max() as usize {
        return Err(Error::dim("state history depth", topo.d_max() + 1, state.max_lag() + 1));
    }
    if u_next.len() != topo.inputs() {
        return Err(Error::dim("input vector", topo.inputs(), u_next.len()));
    }
    if y_prev.len() != topo.outputs() {
        return Err(Error::dim("feedback vector", topo.outputs(), y_prev.len()));
    }

    let w_in = topo.w_in();
    let w_fb = topo.w_fb();
    let current = state.current();
    let mut next = vec![0.0; n];

    for (i, out) in next.iter_mut().enumerate() {
        let mut z = 0.0;
        for e in topo.incoming(i) {
            z += e.weight * state.lagged(e.delay as usize)[e.from];
        }
        for (k, u) in u_next.iter().enumerate() {
            z += w_in[(i, k)] * u;
        }
        for (k, y) in y_prev.iter().enumerate() {
            z += w_fb[(i, k)] * y;
        }
        z -= rp.decay * current[i];

        *out = match &rp.backend {
            Backend::Ideal => {
                if rp.noise_gain > 0.0 {
                    let v: f64 = rng.sample(StandardNormal);
                    z += rp.noise_gain * v;
                }
                rp.activation_gain * z.tanh()
            }
            Backend::Asn { device, voltage_scale } => {
                let v_out = asn_response(voltage_scale * z, device, rng);
                2.0 * rp.activation_gain / device.v_dd * v_out
            }
        };
    }

    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("reservoir state"));
    }
    state.push(&next);
    Ok(())
}
