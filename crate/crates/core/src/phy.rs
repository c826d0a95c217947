//! Link-level physical layer: SINR with Bernoulli interferers, the
//! finite-blocklength rate/error approximation and ARQ.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{q_func, q_inv};
use crate::units::dbm_to_mw;

/// Thermal noise power in dBm over `bandwidth_hz`.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_density_dbm_hz: f64, rx_noise_figure_db: f64) -> f64 {
    noise_density_dbm_hz + 10.0 * bandwidth_hz.log10() + rx_noise_figure_db
}

/// Potential co-channel interferers seen by one receiver.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InterferenceField {
    /// `(tx_power_dbm, channel_power_gain)` per interferer.
    pub interferers: Vec<(f64, f64)>,
    pub activation_prob: f64,
}

impl InterferenceField {
    pub fn new(activation_prob: f64) -> Self {
        Self { interferers: Vec::new(), activation_prob }
    }

    pub fn push(&mut self, tx_power_dbm: f64, gain: f64) {
        self.interferers.push((tx_power_dbm, gain));
    }

    /// Received interference in mW given one activation uniform per
    /// interferer; interferer `i` is active iff `u[i] < activation_prob`.
    pub fn power_with(&self, uniforms: &[f64]) -> f64 {
        debug_assert!(uniforms.len() >= self.interferers.len());
        self.interferers
            .iter()
            .zip(uniforms)
            .filter(|(_, &u)| u < self.activation_prob)
            .map(|(&(p, g), _)| dbm_to_mw(p) * g)
            .sum()
    }

    /// Received interference in mW with fresh activation draws.
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: Vec<f64> = (0..self.interferers.len()).map(|_| rng.random()).collect();
        self.power_with(&u)
    }
}

/// SINR with each interferer independently active with the field's
/// activation probability. Powers in mW.
pub fn sinr<R: Rng + ?Sized>(signal_mw: f64, field: &InterferenceField, noise_mw: f64, rng: &mut R) -> f64 {
    signal_mw / (field.sample_power(rng) + noise_mw)
}

fn capacity_dispersion(sinr: f64) -> (f64, f64) {
    let c = sinr.ln_1p() / LN_2;
    let v = 1.0 - (1.0 + sinr).powi(-2);
    (c, v)
}

/// Achievable rate in bit/s at block error rate `target_bler`; zero when the
/// finite-blocklength penalty exceeds capacity.
pub fn fbl_rate(sinr: f64, bandwidth_hz: f64, tx_delay_s: f64, target_bler: f64) -> f64 {
    let (c, v) = capacity_dispersion(sinr);
    let penalty = (v / (bandwidth_hz * tx_delay_s)).sqrt() * q_inv(target_bler) / LN_2;
    (bandwidth_hz * (c - penalty)).max(0.0)
}

/// Decoding error probability at rate `rate_bps` and transmission time
/// `tx_delay_s`.
pub fn fbl_error(sinr: f64, rate_bps: f64, bandwidth_hz: f64, tx_delay_s: f64) -> f64 {
    let (c, v) = capacity_dispersion(sinr);
    if v <= 0.0 {
        // Zero dispersion: nothing gets through at a positive rate.
        return if rate_bps > 0.0 { 1.0 } else { 0.0 };
    }
    let f = (bandwidth_hz * c - rate_bps) * LN_2 / (bandwidth_hz * v / tx_delay_s).sqrt();
    q_func(f).clamp(0.0, 1.0)
}

/// Decoding error for a `packet_bits` packet sent at `rate_bps`, i.e. with
/// `D_t = b / R`.
pub fn fbl_error_packet(sinr: f64, rate_bps: f64, bandwidth_hz: f64, packet_bits: f64) -> f64 {
    fbl_error(sinr, rate_bps, bandwidth_hz, packet_bits / rate_bps)
}

/// Mean ARQ delay `D_t / (1 - eps)`.
pub fn arq_mean_delay(tx_delay_s: f64, decode_error: f64) -> Result<f64> {
    if decode_error >= 1.0 {
        return Err(Error::ErrorProbabilityOne);
    }
    Ok(tx_delay_s / (1.0 - decode_error))
}

/// Number of ARQ rounds until success, geometric on `{1, 2, ...}`.
/// Consumes exactly one uniform.
pub fn sample_arq_rounds<R: Rng + ?Sized>(decode_error: f64, rng: &mut R) -> Result<u64> {
    let u: f64 = rng.random();
    arq_rounds_from_uniform(decode_error, u)
}

/// Inverse-CDF geometric draw from a uniform in `[0, 1)`.
pub fn arq_rounds_from_uniform(decode_error: f64, u: f64) -> Result<u64> {
    if decode_error >= 1.0 {
        return Err(Error::ErrorProbabilityOne);
    }
    if decode_error <= 0.0 {
        return Ok(1);
    }
    // P(rounds > k) = eps^k; rounds = 1 + floor(ln(1-u) / ln eps).
    let extra = ((1.0 - u).ln() / decode_error.ln()).floor();
    Ok(1 + extra.min(u64::MAX as f64 / 2.0) as u64)
}

/// Achieved rate `b / mean_tx_delay`.
pub fn achieved_rate(packet_bits: f64, mean_tx_delay_s: f64) -> f64 {
    packet_bits / mean_tx_delay_s
}

/// One fading realization of a radio link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkRealization {
    pub sinr: f64,
    pub bandwidth_hz: f64,
    pub tx_delay_s: f64,
    pub decode_error: f64,
    /// ARQ-adjusted mean transmission delay; infinite when `decode_error = 1`.
    pub mean_tx_delay_s: f64,
}

impl LinkRealization {
    /// Link carrying `packet_bits` packets at the nominal rate `rate_bps`.
    pub fn new(sinr: f64, bandwidth_hz: f64, rate_bps: f64, packet_bits: f64) -> Self {
        let tx_delay_s = packet_bits / rate_bps;
        let decode_error = fbl_error(sinr, rate_bps, bandwidth_hz, tx_delay_s);
        let mean_tx_delay_s = arq_mean_delay(tx_delay_s, decode_error).unwrap_or(f64::INFINITY);
        Self { sinr, bandwidth_hz, tx_delay_s, decode_error, mean_tx_delay_s }
    }

    pub fn achieved_rate(&self, packet_bits: f64) -> f64 {
        achieved_rate(packet_bits, self.mean_tx_delay_s)
    }
}
