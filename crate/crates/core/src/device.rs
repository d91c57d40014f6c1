//! Analog stochastic neuron (ASN) device model.
//!
//! The cell's long-run mean transfer curve is `(v_dd/2)·tanh(β·v_in)`. On top
//! of that sits a white Gaussian noise voltage whose standard deviation is
//! largest at zero input and vanishes as the cell saturates. The envelope is
//! the sigmoid derivative, `α·(1 − tanh²(β·v_in))`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Temperature used for the kT conversion of energy barriers.
pub const ROOM_TEMPERATURE: f64 = 300.0;

/// ASN cell constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    /// Full supply in volts; the output swings over ±v_dd/2.
    pub v_dd: f64,
    /// Sigmoid steepness in 1/V.
    pub slope_beta: f64,
    /// Noise standard deviation at zero input, in volts.
    pub noise_amp_alpha: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        let v_dd = 0.8;
        Self {
            v_dd,
            slope_beta: 5.0,
            // 5% of the full output swing at the noisiest point.
            noise_amp_alpha: 0.05 * v_dd,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_dd > 0.0 && self.v_dd.is_finite()) {
            return Err(Error::InvalidParam(format!("v_dd must be > 0, got {}", self.v_dd)));
        }
        if !(self.slope_beta > 0.0 && self.slope_beta.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "slope_beta must be > 0, got {}",
                self.slope_beta
            )));
        }
        if !(self.noise_amp_alpha >= 0.0 && self.noise_amp_alpha.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "noise_amp_alpha must be >= 0, got {}",
                self.noise_amp_alpha
            )));
        }
        Ok(())
    }

    /// Noise-free output at `v_in`.
    pub fn mean_response(&self, v_in: f64) -> f64 {
        0.5 * self.v_dd * (self.slope_beta * v_in).tanh()
    }
}

/// Standard deviation of the device noise at input `v_in`.
pub fn noise_sigma(v_in: f64, p: &DeviceParams) -> f64 {
    let th = (p.slope_beta * v_in).tanh();
    p.noise_amp_alpha * (1.0 - th * th)
}

/// One stochastic sample of the cell output.
pub fn asn_response<R: Rng + ?Sized>(v_in: f64, p: &DeviceParams, rng: &mut R) -> f64 {
    let eta: f64 = rng.sample(StandardNormal);
    p.mean_response(v_in) + eta * noise_sigma(v_in, p)
}

/// Material and geometry constants of the free magnetic layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetParams {
    /// rad/(s·T)
    pub gyromagnetic_ratio: f64,
    /// A/m
    pub saturation_magnetization: f64,
    /// A/m
    pub anisotropy_field: f64,
    /// m³
    pub volume: f64,
}

impl MagnetParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gyromagnetic_ratio", self.gyromagnetic_ratio),
            ("saturation_magnetization", self.saturation_magnetization),
            ("anisotropy_field", self.anisotropy_field),
            ("volume", self.volume),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BarrierClass {
    /// Below 5 kT: thermally agitated, retention of ps to ns.
    LowBarrier,
    Intermediate,
    /// 40-60 kT: non-volatile storage.
    StorageClass,
    AboveStorage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBarrier {
    pub joules: f64,
    pub kt: f64,
}

impl EnergyBarrier {
    pub fn class(&self) -> BarrierClass {
        classify_barrier(self.kt)
    }
}

/// `U = γ·M_s·H_k·Ω/2`, taken literally including the gyromagnetic factor.
pub fn energy_barrier(m: &MagnetParams) -> EnergyBarrier {
    let joules =
        m.gyromagnetic_ratio * m.saturation_magnetization * m.anisotropy_field * m.volume / 2.0;
    EnergyBarrier {
        joules,
        kt: joules / (BOLTZMANN * ROOM_TEMPERATURE),
    }
}

pub fn classify_barrier(kt: f64) -> BarrierClass {
    if kt < 5.0 {
        BarrierClass::LowBarrier
    } else if kt < 40.0 {
        BarrierClass::Intermediate
    } else if kt <= 60.0 {
        BarrierClass::StorageClass
    } else {
        BarrierClass::AboveStorage
    }
}
