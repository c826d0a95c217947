//! Large-scale path loss and Rician small-scale fading.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Band, DbRange, LinkGeometry, ScenarioConfig};

const Q1: f64 = 0.3;
const Q2: f64 = 500.0;
const Q3: f64 = 20.0;

/// Radio link classes by transmitter/receiver type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    /// Ground BS to AV.
    GroundAir,
    /// AV to AV.
    AirAir,
    /// Ground station to HAP (feeder).
    GroundHap,
    /// HAP to AV.
    HapAir,
    /// Ground station to satellite (feeder).
    GroundSat,
    /// Satellite to AV.
    SatAir,
}

impl LinkKind {
    pub fn path_loss_model(self) -> PathLossModel {
        match self {
            LinkKind::GroundAir => PathLossModel::G2aUma,
            LinkKind::AirAir | LinkKind::HapAir | LinkKind::SatAir => PathLossModel::FsplAirToAir,
            LinkKind::GroundHap | LinkKind::GroundSat => PathLossModel::NtnBasic,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LinkKind::GroundAir => "ga",
            LinkKind::AirAir => "aa",
            LinkKind::GroundHap => "gh",
            LinkKind::HapAir => "ha",
            LinkKind::GroundSat => "gs",
            LinkKind::SatAir => "sa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathLossModel {
    G2aUma,
    FsplAirToAir,
    NtnBasic,
}

/// Probability of line of sight between a ground node at height `h_g` and
/// an aerial node at height `h_a`, `r_2d` apart horizontally (urban profile).
pub fn p_los(r_2d: f64, h_g: f64, h_a: f64) -> f64 {
    let k = (r_2d * (Q1 * Q2).sqrt() / 1000.0 - 1.0).floor();
    if k < 0.0 {
        return 1.0;
    }
    let k = k as u64;
    let mut p = 1.0;
    for j in 0..=k {
        let h = h_g - (j as f64 + 0.5) * (h_g - h_a) / (k as f64 + 1.0);
        p *= 1.0 - (-(h * h) / (2.0 * Q3 * Q3)).exp();
        if p == 0.0 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveDistance(d))
    }
}

/// UMa path loss of a G2A link in dB for a given LoS state.
pub fn pathloss_g2a(geom: &LinkGeometry, h_a: f64, fc_ghz: f64, los: bool) -> Result<f64> {
    let d = geom.distance_3d;
    check_distance(d)?;
    Ok(if los {
        28.0 + 22.0 * d.log10() + 20.0 * fc_ghz.log10()
    } else {
        -17.5 + (46.0 - 7.0 * h_a.log10()) * d.log10() + 20.0 * (40.0 * PI * fc_ghz / 3.0).log10()
    })
}

/// LoS-probability weighted G2A path loss in dB.
pub fn pathloss_g2a_avg(geom: &LinkGeometry, h_g: f64, h_a: f64, fc_ghz: f64) -> Result<f64> {
    let p = p_los(geom.distance_2d, h_g, h_a);
    let los = pathloss_g2a(geom, h_a, fc_ghz, true)?;
    let nlos = pathloss_g2a(geom, h_a, fc_ghz, false)?;
    Ok(p * los + (1.0 - p) * nlos)
}

/// Free-space path loss in dB; `d` in meters, `fc` in GHz.
pub fn fspl(d: f64, fc_ghz: f64) -> Result<f64> {
    check_distance(d)?;
    Ok(32.45 + 20.0 * d.log10() + 20.0 * fc_ghz.log10())
}

/// Basic NTN path loss: FSPL plus a normal shadowing draw. Clutter loss is
/// 0 dB under line of sight, which is the only state modelled for feeder
/// links. Always consumes one normal draw.
pub fn pathloss_ntn<R: Rng + ?Sized>(
    geom: &LinkGeometry,
    fc_ghz: f64,
    sigma_sf_db: f64,
    los: bool,
    rng: &mut R,
) -> Result<f64> {
    let base = fspl(geom.distance_3d, fc_ghz)?;
    let z: f64 = StandardNormal.sample(rng);
    Ok(base + sigma_sf_db * z + clutter_loss_db(los))
}

/// Clutter loss in dB. Only the line-of-sight entry is tabulated.
pub fn clutter_loss_db(_los: bool) -> f64 {
    0.0
}

/// Rice factor ranges per link kind and band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiceFactorTable {
    pub ga: DbRange,
    pub aa: DbRange,
    pub gh: DbRange,
    pub ha: DbRange,
    pub gs_s: DbRange,
    pub gs_ka: DbRange,
    pub sa_s: DbRange,
    pub sa_ka: DbRange,
}

impl RiceFactorTable {
    pub const BIN_WIDTH_DEG: f64 = 10.0;

    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            ga: cfg.rice_ga_db,
            aa: cfg.rice_aa_db,
            gh: cfg.rice_gh_db,
            ha: cfg.rice_ha_db,
            gs_s: cfg.rice_gs_s_db,
            gs_ka: cfg.rice_gs_ka_db,
            sa_s: cfg.rice_sa_s_db,
            sa_ka: cfg.rice_sa_ka_db,
        }
    }

    /// Range for a link; `band` only matters for satellite links.
    pub fn range(&self, kind: LinkKind, band: Band) -> DbRange {
        match (kind, band) {
            (LinkKind::GroundAir, _) => self.ga,
            (LinkKind::AirAir, _) => self.aa,
            (LinkKind::GroundHap, _) => self.gh,
            (LinkKind::HapAir, _) => self.ha,
            (LinkKind::GroundSat, Band::S) => self.gs_s,
            (LinkKind::GroundSat, Band::Ka) => self.gs_ka,
            (LinkKind::SatAir, Band::S) => self.sa_s,
            (LinkKind::SatAir, Band::Ka) => self.sa_ka,
        }
    }
}

impl Default for RiceFactorTable {
    fn default() -> Self {
        Self::from_config(&ScenarioConfig::default())
    }
}

/// Rice factor in dB, constant within 10 degree elevation bins and rising
/// linearly from bin to bin across the configured range.
pub fn rice_k(elevation_deg: f64, table: &RiceFactorTable, kind: LinkKind, band: Band) -> f64 {
    let DbRange(lo, hi) = table.range(kind, band);
    let e = elevation_deg.clamp(0.0, 90.0);
    let bin = ((e / RiceFactorTable::BIN_WIDTH_DEG).floor() as u32).min(8);
    if bin == 8 {
        return hi;
    }
    lo + bin as f64 * (hi - lo) / 8.0
}

/// One small-scale fading draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw {
    pub amplitude: f64,
    pub phase: f64,
}

impl FadingDraw {
    pub fn power_gain(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    pub fn coefficient(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Rician amplitude with unit mean power and an independent uniform phase.
/// Consumes two normals and one uniform regardless of `k_db`.
pub fn sample_rician<R: Rng + ?Sized>(k_db: f64, rng: &mut R) -> FadingDraw {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    let u: f64 = rng.random();
    let k = (k_db * LN_10 / 10.0).exp();
    let (rho, sigma) = if k.is_infinite() { (1.0, 0.0) } else { ((k / (k + 1.0)).sqrt(), (0.5 / (k + 1.0)).sqrt()) };
    let amplitude = (rho + sigma * x).hypot(sigma * y);
    FadingDraw { amplitude, phase: 2.0 * PI * u }
}
