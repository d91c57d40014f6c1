//! Structural netlist: one `N<i>` instance per neuron and one RC line
//! `L<i>_<j>` per nonzero `w_self(i, j)`, carrying neuron j into neuron i.
//!
//! The strongest edge gets resistance `unit_ohms`; weaker edges scale as
//! `w_max/|w|`. Capacitance is chosen so that `R·C = delay · step_seconds`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::reservoir::Topology;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetlistOptions {
    /// Physical duration of one logical step.
    pub step_seconds: f64,
    /// Resistance of the strongest edge.
    pub unit_ohms: f64,
}

impl Default for NetlistOptions {
    fn default() -> Self {
        Self {
            step_seconds: 1e-9,
            unit_ohms: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetLine {
    pub to: usize,
    pub from: usize,
    pub ohms: f64,
    pub farads: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub step_seconds: f64,
    pub neurons: usize,
    pub lines: Vec<NetLine>,
}

impl Netlist {
    /// Delay of each line in logical steps, recovered from its RC product.
    pub fn delays(&self) -> Vec<u32> {
        self.lines
            .iter()
            .map(|l| (l.ohms * l.farads / self.step_seconds).round() as u32)
            .collect()
    }
}

pub fn netlist_text(topo: &Topology, opts: &NetlistOptions) -> Result<String> {
    if !(opts.step_seconds > 0.0 && opts.step_seconds.is_finite()) {
        return Err(Error::InvalidParam("step_seconds must be positive".into()));
    }
    if !(opts.unit_ohms > 0.0 && opts.unit_ohms.is_finite()) {
        return Err(Error::InvalidParam("unit_ohms must be positive".into()));
    }
    let w = topo.w_self();
    let w_max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = String::new();
    out.push_str("* asn-reservoir structural netlist\n");
    out.push_str("* L<i>_<j> carries neuron j into neuron i\n");
    let _ = writeln!(out, ".step {:e}", opts.step_seconds);
    for i in 0..topo.n() {
        let _ = writeln!(out, "N{i} asn");
    }
    for i in 0..topo.n() {
        for e in topo.incoming(i) {
            let ohms = opts.unit_ohms * w_max / e.weight.abs();
            let farads = f64::from(e.delay) * opts.step_seconds / ohms;
            let _ = writeln!(out, "L{i}_{} R={ohms:e} C={farads:e}", e.from);
        }
    }
    out.push_str(".end\n");
    Ok(out)
}

pub fn export_netlist(topo: &Topology, path: impl AsRef<Path>, opts: &NetlistOptions) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, netlist_text(topo, opts)?).map_err(|e| Error::io(path, e))
}

pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let bad = |n: usize, msg: &str| Error::Malformed(format!("netlist line {}: {msg}", n + 1));
    let mut step = None;
    let mut neurons = 0;
    let mut lines = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('*') || line == ".end" {
            continue;
        }
        let mut tok = line.split_whitespace();
        let head = tok.next().unwrap_or_default();
        if head == ".step" {
            let v = tok.next().and_then(|s| s.parse::<f64>().ok());
            step = Some(v.ok_or_else(|| bad(n, "bad .step value"))?);
        } else if let Some(idx) = head.strip_prefix('N') {
            let idx: usize = idx.parse().map_err(|_| bad(n, "bad neuron index"))?;
            if idx != neurons {
                return Err(bad(n, "neuron instances out of order"));
            }
            neurons += 1;
        } else if let Some(pair) = head.strip_prefix('L') {
            let (to, from) = pair.split_once('_').ok_or_else(|| bad(n, "bad line name"))?;
            let to: usize = to.parse().map_err(|_| bad(n, "bad line target"))?;
            let from: usize = from.parse().map_err(|_| bad(n, "bad line source"))?;
            let mut value = |key: &str| {
                tok.next()
                    .and_then(|t| t.strip_prefix(key))
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| bad(n, &format!("missing {key}")))
            };
            let ohms = value("R=")?;
            let farads = value("C=")?;
            lines.push(NetLine { to, from, ohms, farads });
        } else {
            return Err(bad(n, "unrecognised statement"));
        }
    }
    let step_seconds = step.ok_or_else(|| Error::Malformed("netlist has no .step".into()))?;
    if let Some(l) = lines.iter().find(|l| l.to >= neurons || l.from >= neurons) {
        return Err(Error::Malformed(format!("line L{}_{} references a missing neuron", l.to, l.from)));
    }
    Ok(Netlist {
        step_seconds,
        neurons,
        lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn two_neurons(w: f64, d: u32) -> Topology {
        let w_self = DMatrix::from_row_slice(2, 2, &[0.0, w, 0.0, 0.0]);
        let delays = DMatrix::from_row_slice(2, 2, &[0, d, 0, 0]);
        Topology::from_parts(DMatrix::zeros(2, 1), w_self, DMatrix::zeros(2, 1), delays, 10, 0).unwrap()
    }

    #[test]
    fn one_edge_gives_two_neurons_and_one_line() {
        let text = netlist_text(&two_neurons(0.5, 2), &NetlistOptions::default()).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with('N')).count(), 2);
        assert_eq!(text.lines().filter(|l| l.starts_with('L')).count(), 1);
        let net = parse_netlist(&text).unwrap();
        assert_eq!((net.lines[0].to, net.lines[0].from), (0, 1));
        assert_eq!(net.delays(), [2]);
    }

    #[test]
    fn rc_product_tracks_delay() {
        let opts = NetlistOptions::default();
        let rc = |d| {
            let net = parse_netlist(&netlist_text(&two_neurons(0.5, d), &opts).unwrap()).unwrap();
            net.lines[0].ohms * net.lines[0].farads
        };
        assert!((rc(3) / rc(1) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn garbage_rejected() {
        assert!(parse_netlist(".step 1e-9\nQ1 foo\n").is_err());
        assert!(parse_netlist("N0 asn\n").is_err());
        assert!(parse_netlist(".step 1e-9\nN0 asn\nL0_1 R=1 C=1\n").is_err());
    }
}
