//! Antenna radiation patterns: the ground BS vertical ULA and the circular
//! aperture beam of HAP and satellite payloads.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::special::bessel_j1;
use crate::units::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaConfig {
    pub n_elements: usize,
    pub max_element_gain_db: f64,
    pub downtilt_deg: f64,
}

impl Default for UlaConfig {
    fn default() -> Self {
        Self { n_elements: 8, max_element_gain_db: 8.0, downtilt_deg: 102.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    pub max_gain_db: f64,
}

impl BeamConfig {
    /// Aperture radius in wavelengths.
    pub const APERTURE_RADIUS_WAVELENGTHS: f64 = 10.0;

    pub fn peak_linear(&self) -> f64 {
        db_to_linear(self.max_gain_db)
    }

    /// Absolute linear gain at `offset_deg` from boresight.
    pub fn gain(&self, offset_deg: f64) -> f64 {
        self.peak_linear() * beam_gain(offset_deg)
    }
}

/// Element gain `g_max sin^2(zenith)`, linear.
pub fn ula_element_gain(zenith_deg: f64, cfg: &UlaConfig) -> f64 {
    let s = zenith_deg.to_radians().sin();
    db_to_linear(cfg.max_element_gain_db) * s * s
}

/// Array factor of a half-wavelength spaced vertical ULA with fixed downtilt.
pub fn ula_array_factor(zenith_deg: f64, cfg: &UlaConfig) -> f64 {
    let n = cfg.n_elements as f64;
    let delta = zenith_deg.to_radians().cos() - cfg.downtilt_deg.to_radians().cos();
    let half = PI * delta / 2.0;
    let den = half.sin();
    // 0/0 at delta = 0 and at grating lobes; the limit is N.
    if den.abs() < 1e-12 {
        return n;
    }
    let num = (n * half).sin();
    (num * num / (n * den * den)).min(n)
}

/// Total linear BS antenna gain toward a given zenith angle.
pub fn bs_total_gain(zenith_deg: f64, cfg: &UlaConfig) -> f64 {
    ula_element_gain(zenith_deg, cfg) * ula_array_factor(zenith_deg, cfg)
}

/// Normalized circular-aperture beam gain at `offset_deg` from boresight.
pub fn beam_gain(offset_deg: f64) -> f64 {
    let u = 2.0 * PI * BeamConfig::APERTURE_RADIUS_WAVELENGTHS * offset_deg.to_radians().sin();
    if u == 0.0 {
        return 1.0;
    }
    if u.abs() < 1e-4 {
        // J1(u)/u = 1/2 - u^2/16 + ...
        let r = 0.5 - u * u / 16.0;
        return 4.0 * r * r;
    }
    let r = bessel_j1(u) / u;
    (4.0 * r * r).min(1.0)
}
