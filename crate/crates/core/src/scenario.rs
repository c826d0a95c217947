//! Static geometry of an experiment: the hexagonal ground grid, aerial vehicle
//! placement, non-terrestrial platforms and pairwise link geometry.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldIssue, Result};
use crate::units::EARTH_RADIUS_M;

type Point = (f64, f64);

// ============================================================================
// Positions and link geometry
// ============================================================================

/// Cartesian position in a local ground frame; `z` is altitude above ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodePosition {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl NodePosition {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite() && self.z >= 0.0
    }

    pub fn horizontal_distance(&self, other: &NodePosition) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance(&self, other: &NodePosition) -> f64 {
        let d = self.vector_to(other);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn vector_to(&self, other: &NodePosition) -> [f64; 3] {
        [other.x - self.x, other.y - self.y, other.z - self.z]
    }

    pub fn with_z(self, z: f64) -> Self {
        Self { z, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    GroundBS,
    TargetAV,
    RelayAV,
    InterfererAV,
    HAP,
    LEOSat,
    HapGroundStation,
    SatGroundStation,
    ControlUnit,
}

/// Geometry of the link from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance_2d: f64,
    pub distance_3d: f64,
    /// Angle between the link and the horizontal plane, in `[0, 90]`.
    pub elevation_deg: f64,
    /// Angle between the link direction `b - a` and the upward vertical.
    pub zenith_deg: f64,
    /// Angle between `b - a` and the transmit boresight.
    pub boresight_offset_deg: f64,
}

/// Computes the geometry of the link `a -> b`, with the boresight offset
/// measured against `boresight` (need not be normalized).
pub fn link_geometry(a: &NodePosition, b: &NodePosition, boresight: [f64; 3]) -> Result<LinkGeometry> {
    let v = a.vector_to(b);
    let distance_3d = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if distance_3d == 0.0 {
        return Err(Error::ZeroDistance);
    }
    let distance_2d = v[0].hypot(v[1]);
    let zenith_deg = (v[2] / distance_3d).clamp(-1.0, 1.0).acos().to_degrees();
    let elevation_deg = (v[2].abs() / distance_3d).clamp(0.0, 1.0).asin().to_degrees();
    Ok(LinkGeometry {
        distance_2d,
        distance_3d,
        elevation_deg,
        zenith_deg,
        boresight_offset_deg: angle_between_deg(v, boresight),
    })
}

/// Angle between two vectors in degrees; 0 if either is null.
pub fn angle_between_deg(u: [f64; 3], v: [f64; 3]) -> f64 {
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let cos = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (nu * nv);
    cos.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Slant range from a node at altitude `h_node` to a satellite at altitude
/// `h_sat`, seen at elevation `elevation_deg` over a spherical Earth.
pub fn slant_range(h_sat: f64, h_node: f64, elevation_deg: f64) -> f64 {
    let rs = EARTH_RADIUS_M + h_sat;
    let rn = EARTH_RADIUS_M + h_node;
    let e = elevation_deg.to_radians();
    (rs * rs - rn * rn * e.cos().powi(2)).sqrt() - rn * e.sin()
}

// ============================================================================
// Hexagonal grid and placement regions
// ============================================================================

/// Number of cells in a hexagonal grid with `tiers` rings around the center.
pub fn hex_cell_count(tiers: u32) -> usize {
    let t = tiers as usize;
    1 + 3 * t * (t + 1)
}

/// Cell centers of a hexagonal grid with `tiers` rings and inter-site
/// distance `isd`, all at height `height`. The first entry is the origin.
pub fn build_hex_grid(tiers: u32, isd: f64, height: f64) -> Vec<NodePosition> {
    let t = tiers as i64;
    let mut cells = Vec::with_capacity(hex_cell_count(tiers));
    // Axial coordinates ordered by ring, so the center comes first.
    for ring in 0..=t {
        for q in -t..=t {
            for r in (-t).max(-q - t)..=t.min(-q + t) {
                let dist = (q.abs() + r.abs() + (q + r).abs()) / 2;
                if dist != ring {
                    continue;
                }
                let x = isd * (q as f64 + r as f64 / 2.0);
                let y = isd * (r as f64) * 3f64.sqrt() / 2.0;
                cells.push(NodePosition::new(x, y, height));
            }
        }
    }
    cells
}

/// Six points on a ring of radius `spacing` around `center` (in its plane),
/// starting at azimuth 0.
pub fn hex_ring(center: NodePosition, spacing: f64) -> Vec<NodePosition> {
    (0..6)
        .map(|k| {
            let a = (60.0 * k as f64).to_radians();
            NodePosition::new(center.x + spacing * a.cos(), center.y + spacing * a.sin(), center.z)
        })
        .collect()
}

/// A convex polygon in the horizontal plane, used for uniform placement.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRegion {
    /// Counter-clockwise hull vertices as `(x, y)`.
    vertices: Vec<(f64, f64)>,
}

impl ConvexRegion {
    /// Convex hull of the horizontal projections of `points`.
    pub fn hull_of(points: &[NodePosition]) -> Self {
        let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        pts.dedup();
        if pts.len() < 3 {
            return Self { vertices: pts };
        }
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
        // Andrew's monotone chain; collinear points are dropped.
        let mut lower: Vec<(f64, f64)> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-9 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<(f64, f64)> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-9 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self { vertices: lower }
    }

    /// Hexagonal cell (Voronoi region) of a grid site with the given
    /// inter-site distance.
    pub fn hex_cell(center: NodePosition, isd: f64) -> Self {
        let r = isd / 3f64.sqrt();
        let vertices = (0..6)
            .map(|k| {
                let a = (30.0 + 60.0 * k as f64).to_radians();
                (center.x + r * a.cos(), center.y + r * a.sin())
            })
            .collect();
        Self { vertices }
    }

    pub fn point(p: NodePosition) -> Self {
        Self { vertices: vec![(p.x, p.y)] }
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        self.fan().map(|(_, _, _, a)| a).sum()
    }

    /// Area centroid; the vertex mean for degenerate regions.
    pub fn centroid(&self) -> (f64, f64) {
        let area = self.area();
        if area <= 0.0 {
            let n = self.vertices.len().max(1) as f64;
            let sx: f64 = self.vertices.iter().map(|v| v.0).sum();
            let sy: f64 = self.vertices.iter().map(|v| v.1).sum();
            return (sx / n, sy / n);
        }
        let (mut cx, mut cy) = (0.0, 0.0);
        for (a, b, c, w) in self.fan() {
            cx += w * (a.0 + b.0 + c.0) / 3.0;
            cy += w * (a.1 + b.1 + c.1) / 3.0;
        }
        (cx / area, cy / area)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0) >= -1e-9
        })
    }

    /// Triangles of a fan from the first vertex with their areas.
    fn fan(&self) -> impl Iterator<Item = (Point, Point, Point, f64)> + '_ {
        let v = &self.vertices;
        (1..v.len().saturating_sub(1)).map(move |i| {
            let (a, b, c) = (v[0], v[i], v[i + 1]);
            let area = 0.5 * ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).abs();
            (a, b, c, area)
        })
    }

    /// Uniform sample over the region. Always consumes three uniforms.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let pick: f64 = rng.random();
        let mut u: f64 = rng.random();
        let mut v: f64 = rng.random();
        let area = self.area();
        if area <= 0.0 {
            return self.vertices.first().copied().unwrap_or((0.0, 0.0));
        }
        let target = pick * area;
        let mut acc = 0.0;
        let mut chosen = None;
        for tri in self.fan() {
            acc += tri.3;
            chosen = Some(tri);
            if target < acc {
                break;
            }
        }
        let (a, b, c, _) = chosen.expect("non-degenerate region has a triangle");
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        (a.0 + u * (b.0 - a.0) + v * (c.0 - a.0), a.1 + u * (b.1 - a.1) + v * (c.1 - a.1))
    }
}

/// Places `count` AVs uniformly over `region` at a fixed `altitude`.
pub fn place_avs<R: Rng + ?Sized>(
    count: usize,
    region: &ConvexRegion,
    altitude: f64,
    rng: &mut R,
) -> Vec<NodePosition> {
    (0..count)
        .map(|_| {
            let (x, y) = region.sample(rng);
            NodePosition::new(x, y, altitude)
        })
        .collect()
}

// ============================================================================
// Configuration
// ============================================================================

/// Satellite frequency band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    S,
    Ka,
}

impl Band {
    pub fn label(self) -> &'static str {
        match self {
            Band::S => "S",
            Band::Ka => "Ka",
        }
    }

    pub fn parse(s: &str) -> Option<Band> {
        match s.trim() {
            "S" | "s" => Some(Band::S),
            "Ka" | "ka" | "KA" => Some(Band::Ka),
            _ => None,
        }
    }
}

/// Rice-factor range `[min, max]` in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbRange(pub f64, pub f64);

/// Largest relay swarm with its own random substreams.
pub const MAX_SWARM_SIZE: usize = 16;

/// Full parameterization of one experiment. Defaults reproduce the reference
/// system parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    // --- topology
    pub tiers: u32,
    pub isd_m: f64,
    pub bs_height_m: f64,
    pub av_altitude_m: f64,
    pub hap_altitude_m: f64,
    pub leo_altitude_m: f64,
    pub n_avs: usize,
    pub n_interfering_avs: usize,
    pub swarm_size: usize,
    pub hap_gs_distance_m: f64,
    pub sat_gs_distance_m: f64,
    pub gs_height_m: f64,
    /// Elevation of the serving satellite seen from the AV and from its
    /// ground station. `None` places the satellite at nadir over the origin.
    pub leo_elevation_deg: Option<f64>,
    pub hap_beam_spacing_m: f64,
    pub leo_beam_spacing_m: f64,
    pub n_side_beams: usize,

    // --- radio
    pub fc_s_ghz: f64,
    pub fc_ka_ghz: f64,
    pub av_tx_power_dbm: f64,
    pub bs_tx_power_dbm: f64,
    pub hap_tx_power_dbm: f64,
    pub leo_tx_power_dbm: f64,
    pub gs_tx_power_dbm: f64,
    pub av_antenna_gain_dbi: f64,
    pub bs_element_gain_dbi: f64,
    pub bs_n_elements: usize,
    pub bs_downtilt_deg: f64,
    pub hap_antenna_gain_dbi: f64,
    pub leo_antenna_gain_dbi: f64,
    pub av_noise_figure_db: f64,
    pub ntn_noise_figure_db: f64,
    pub noise_density_dbm_hz: f64,
    pub shadow_fading_los_db: f64,
    pub shadow_fading_nlos_db: f64,
    pub rice_ga_db: DbRange,
    pub rice_aa_db: DbRange,
    pub rice_gh_db: DbRange,
    pub rice_ha_db: DbRange,
    pub rice_gs_s_db: DbRange,
    pub rice_gs_ka_db: DbRange,
    pub rice_sa_s_db: DbRange,
    pub rice_sa_ka_db: DbRange,
    pub p_interf: f64,

    // --- traffic and resources
    pub data_rate_bps: f64,
    pub packet_size_bytes: usize,
    pub rb_bandwidth_hz: f64,
    pub bandwidth_rbs: u32,
    pub feeder_bandwidth_hz: f64,
    pub lambda_av: f64,
    pub lambda_bs: f64,
    pub lambda_hap: f64,
    pub lambda_sat: f64,
    pub queue_delay_bound_s: f64,
    pub queue_violation_prob: f64,

    // --- backhaul and CoMP
    pub backhaul_failure_prob: f64,
    pub comp_backhaul_failure_c: f64,
    pub comp_backhaul_failure_d: f64,
    pub csi_feedback_failure: f64,
    pub core_backhaul_delay_s: f64,
    pub comp_hop_delay_s: f64,
    pub csi_feedback_delay_s: f64,
    pub comp_cluster_size: usize,
    pub comp_served_avs: usize,

    // --- constellation
    pub n_satellites: u32,
    pub theta_min_deg: f64,
    pub sat_bands: Vec<Band>,

    // --- QoS
    pub eps_th: f64,
    pub d_th_s: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            tiers: 3,
            isd_m: 500.0,
            bs_height_m: 25.0,
            av_altitude_m: 300.0,
            hap_altitude_m: 20_000.0,
            leo_altitude_m: 1_110_000.0,
            n_avs: 10,
            n_interfering_avs: 6,
            swarm_size: 3,
            hap_gs_distance_m: 5_000.0,
            sat_gs_distance_m: 300_000.0,
            gs_height_m: 25.0,
            leo_elevation_deg: Some(45.0),
            hap_beam_spacing_m: 5_000.0,
            leo_beam_spacing_m: 25_000.0,
            n_side_beams: 6,
            fc_s_ghz: 2.0,
            fc_ka_ghz: 30.0,
            av_tx_power_dbm: 23.0,
            bs_tx_power_dbm: 46.0,
            hap_tx_power_dbm: 46.0,
            leo_tx_power_dbm: 50.0,
            gs_tx_power_dbm: 46.0,
            av_antenna_gain_dbi: 0.0,
            bs_element_gain_dbi: 8.0,
            bs_n_elements: 8,
            bs_downtilt_deg: 102.0,
            hap_antenna_gain_dbi: 32.0,
            leo_antenna_gain_dbi: 38.0,
            av_noise_figure_db: 9.0,
            ntn_noise_figure_db: 5.0,
            noise_density_dbm_hz: -174.0,
            shadow_fading_los_db: 4.0,
            shadow_fading_nlos_db: 6.0,
            rice_ga_db: DbRange(5.0, 12.0),
            rice_aa_db: DbRange(12.0, 12.0),
            rice_gh_db: DbRange(5.0, 15.0),
            rice_ha_db: DbRange(12.0, 15.0),
            rice_gs_s_db: DbRange(5.0, 15.0),
            rice_gs_ka_db: DbRange(10.0, 30.0),
            rice_sa_s_db: DbRange(12.0, 15.0),
            rice_sa_ka_db: DbRange(20.0, 30.0),
            p_interf: 0.05,
            data_rate_bps: 500e3,
            packet_size_bytes: 32,
            rb_bandwidth_hz: 0.2e6,
            bandwidth_rbs: 4,
            feeder_bandwidth_hz: 1e6,
            lambda_av: 100.0,
            lambda_bs: 1_000.0,
            lambda_hap: 10_000.0,
            lambda_sat: 10_000.0,
            queue_delay_bound_s: 0.7e-3,
            queue_violation_prob: 1e-6,
            backhaul_failure_prob: 1e-6,
            comp_backhaul_failure_c: 1e-6,
            comp_backhaul_failure_d: 1e-6,
            csi_feedback_failure: 0.0,
            core_backhaul_delay_s: 1e-3,
            comp_hop_delay_s: 0.1e-3,
            csi_feedback_delay_s: 5e-3,
            comp_cluster_size: 3,
            comp_served_avs: 1,
            n_satellites: 4425,
            theta_min_deg: 15.0,
            sat_bands: vec![Band::S, Band::Ka],
            eps_th: 1e-5,
            d_th_s: 20e-3,
        }
    }
}

impl ScenarioConfig {
    pub fn n_cells(&self) -> usize {
        hex_cell_count(self.tiers)
    }

    /// Bandwidth of the AV-facing radio links (G2A, A2A, H2A, S2A).
    pub fn access_bandwidth_hz(&self) -> f64 {
        self.rb_bandwidth_hz * self.bandwidth_rbs as f64
    }

    pub fn packet_bits(&self) -> f64 {
        8.0 * self.packet_size_bytes as f64
    }

    /// Nominal per-attempt transmission time `b / R`.
    pub fn tx_delay_s(&self) -> f64 {
        self.packet_bits() / self.data_rate_bps
    }

    pub fn carrier_ghz(&self, band: Band) -> f64 {
        match band {
            Band::S => self.fc_s_ghz,
            Band::Ka => self.fc_ka_ghz,
        }
    }

    /// Every violated invariant, by field name.
    pub fn validate(&self) -> Vec<FieldIssue> {
        let mut issues = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                issues.push(FieldIssue::new(name, format!("must be a positive number, got {v}")));
            }
        };
        positive("isd_m", self.isd_m);
        positive("bs_height_m", self.bs_height_m);
        positive("av_altitude_m", self.av_altitude_m);
        positive("hap_altitude_m", self.hap_altitude_m);
        positive("leo_altitude_m", self.leo_altitude_m);
        positive("gs_height_m", self.gs_height_m);
        positive("hap_beam_spacing_m", self.hap_beam_spacing_m);
        positive("leo_beam_spacing_m", self.leo_beam_spacing_m);
        positive("fc_s_ghz", self.fc_s_ghz);
        positive("fc_ka_ghz", self.fc_ka_ghz);
        positive("data_rate_bps", self.data_rate_bps);
        positive("rb_bandwidth_hz", self.rb_bandwidth_hz);
        positive("feeder_bandwidth_hz", self.feeder_bandwidth_hz);
        positive("lambda_av", self.lambda_av);
        positive("lambda_bs", self.lambda_bs);
        positive("lambda_hap", self.lambda_hap);
        positive("lambda_sat", self.lambda_sat);
        positive("queue_delay_bound_s", self.queue_delay_bound_s);
        positive("d_th_s", self.d_th_s);

        let mut finite = |name: &str, v: f64| {
            if !v.is_finite() {
                issues.push(FieldIssue::new(name, "must be finite"));
            }
        };
        for (name, v) in [
            ("av_tx_power_dbm", self.av_tx_power_dbm),
            ("bs_tx_power_dbm", self.bs_tx_power_dbm),
            ("hap_tx_power_dbm", self.hap_tx_power_dbm),
            ("leo_tx_power_dbm", self.leo_tx_power_dbm),
            ("gs_tx_power_dbm", self.gs_tx_power_dbm),
            ("av_antenna_gain_dbi", self.av_antenna_gain_dbi),
            ("bs_element_gain_dbi", self.bs_element_gain_dbi),
            ("hap_antenna_gain_dbi", self.hap_antenna_gain_dbi),
            ("leo_antenna_gain_dbi", self.leo_antenna_gain_dbi),
            ("av_noise_figure_db", self.av_noise_figure_db),
            ("ntn_noise_figure_db", self.ntn_noise_figure_db),
            ("noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("shadow_fading_los_db", self.shadow_fading_los_db),
            ("shadow_fading_nlos_db", self.shadow_fading_nlos_db),
        ] {
            finite(name, v);
        }

        let mut prob = |name: &str, v: f64| {
            if !(0.0..=1.0).contains(&v) {
                issues.push(FieldIssue::new(name, format!("must be a probability in [0, 1], got {v}")));
            }
        };
        prob("p_interf", self.p_interf);
        prob("backhaul_failure_prob", self.backhaul_failure_prob);
        prob("comp_backhaul_failure_c", self.comp_backhaul_failure_c);
        prob("comp_backhaul_failure_d", self.comp_backhaul_failure_d);
        prob("csi_feedback_failure", self.csi_feedback_failure);
        prob("eps_th", self.eps_th);
        if !(self.queue_violation_prob > 0.0 && self.queue_violation_prob < 1.0) {
            issues.push(FieldIssue::new("queue_violation_prob", "must lie in (0, 1)"));
        }

        for (name, v) in [
            ("core_backhaul_delay_s", self.core_backhaul_delay_s),
            ("comp_hop_delay_s", self.comp_hop_delay_s),
            ("csi_feedback_delay_s", self.csi_feedback_delay_s),
            ("shadow_fading_los_db", self.shadow_fading_los_db),
            ("shadow_fading_nlos_db", self.shadow_fading_nlos_db),
        ] {
            if v < 0.0 {
                issues.push(FieldIssue::new(name, "must be non-negative"));
            }
        }

        for (name, r) in [
            ("rice_ga_db", self.rice_ga_db),
            ("rice_aa_db", self.rice_aa_db),
            ("rice_gh_db", self.rice_gh_db),
            ("rice_ha_db", self.rice_ha_db),
            ("rice_gs_s_db", self.rice_gs_s_db),
            ("rice_gs_ka_db", self.rice_gs_ka_db),
            ("rice_sa_s_db", self.rice_sa_s_db),
            ("rice_sa_ka_db", self.rice_sa_ka_db),
        ] {
            if !(r.0.is_finite() && r.1.is_finite() && r.0 <= r.1) {
                issues.push(FieldIssue::new(name, "needs finite [min, max] with min <= max"));
            }
        }

        if self.packet_size_bytes == 0 {
            issues.push(FieldIssue::new("packet_size_bytes", "must be at least 1"));
        }
        if self.bandwidth_rbs == 0 {
            issues.push(FieldIssue::new("bandwidth_rbs", "must be at least 1"));
        }
        if self.bs_n_elements == 0 {
            issues.push(FieldIssue::new("bs_n_elements", "must be at least 1"));
        }
        if !(self.bs_downtilt_deg > 0.0 && self.bs_downtilt_deg < 180.0) {
            issues.push(FieldIssue::new("bs_downtilt_deg", "must lie in (0, 180)"));
        }
        if self.comp_cluster_size == 0 {
            issues.push(FieldIssue::new("comp_cluster_size", "must be at least 1"));
        } else if self.comp_cluster_size > self.n_cells() {
            issues.push(FieldIssue::new(
                "comp_cluster_size",
                format!("exceeds the number of base stations ({})", self.n_cells()),
            ));
        }
        if self.comp_served_avs == 0 || self.comp_served_avs > self.comp_cluster_size.max(1) {
            issues.push(FieldIssue::new("comp_served_avs", "must lie in [1, comp_cluster_size]"));
        }
        if self.swarm_size == 0 || self.swarm_size > MAX_SWARM_SIZE {
            issues.push(FieldIssue::new("swarm_size", format!("must lie in [1, {MAX_SWARM_SIZE}]")));
        }
        if self.n_avs < 1 + self.swarm_size + self.n_interfering_avs {
            issues.push(FieldIssue::new("n_avs", "must cover the target AV, the relay swarm and the interfering AVs"));
        }
        if self.leo_altitude_m <= self.av_altitude_m || self.leo_altitude_m <= self.gs_height_m {
            issues.push(FieldIssue::new("leo_altitude_m", "must exceed the AV and ground-station heights"));
        }
        if let Some(e) = self.leo_elevation_deg {
            if !(e > 0.0 && e <= 90.0) {
                issues.push(FieldIssue::new("leo_elevation_deg", "must lie in (0, 90]"));
            }
        }
        if !(0.0..=90.0).contains(&self.theta_min_deg) {
            issues.push(FieldIssue::new("theta_min_deg", "must lie in [0, 90]"));
        }
        let mut bands = self.sat_bands.clone();
        bands.sort();
        bands.dedup();
        if bands.len() != self.sat_bands.len() {
            issues.push(FieldIssue::new("sat_bands", "contains duplicates"));
        }
        issues
    }
}

// ============================================================================
// Deployment
// ============================================================================

/// Static node layout shared by every drop of an experiment.
#[derive(Debug, Clone)]
pub struct Deployment {
    /// Ground BS sites; index 0 is the serving site at the origin.
    pub base_stations: Vec<NodePosition>,
    pub serving_cell: ConvexRegion,
    pub grid_hull: ConvexRegion,
    pub hap: NodePosition,
    pub hap_ground_station: NodePosition,
    pub sat_ground_station: NodePosition,
    /// Ground points illuminated by the HAP serving beam and its side beams.
    pub hap_beam_centers: Vec<NodePosition>,
    pub leo_beam_centers: Vec<NodePosition>,
}

impl Deployment {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let base_stations = build_hex_grid(cfg.tiers, cfg.isd_m, cfg.bs_height_m);
        let origin = NodePosition::new(0.0, 0.0, 0.0);
        let side = |spacing| {
            let mut ring = hex_ring(origin, spacing);
            ring.truncate(cfg.n_side_beams.min(6));
            ring
        };
        Self {
            serving_cell: ConvexRegion::hex_cell(base_stations[0], cfg.isd_m),
            grid_hull: ConvexRegion::hull_of(&base_stations),
            base_stations,
            hap: NodePosition::new(0.0, 0.0, cfg.hap_altitude_m),
            hap_ground_station: NodePosition::new(cfg.hap_gs_distance_m, 0.0, cfg.gs_height_m),
            sat_ground_station: NodePosition::new(cfg.sat_gs_distance_m, 0.0, cfg.gs_height_m),
            hap_beam_centers: side(cfg.hap_beam_spacing_m),
            leo_beam_centers: side(cfg.leo_beam_spacing_m),
        }
    }

    /// Indices of the CoMP cluster: the serving site plus its `size - 1`
    /// nearest neighbours (ties broken by index).
    pub fn comp_cluster(&self, size: usize) -> Vec<usize> {
        let serving = self.base_stations[0];
        let mut idx: Vec<usize> = (0..self.base_stations.len()).collect();
        idx.sort_by(|&a, &b| {
            let da = self.base_stations[a].horizontal_distance(&serving);
            let db = self.base_stations[b].horizontal_distance(&serving);
            da.partial_cmp(&db).expect("finite").then(a.cmp(&b))
        });
        idx.truncate(size.min(self.base_stations.len()));
        idx
    }

    /// Position of the serving LEO satellite in the local frame, for beam
    /// pointing. The satellite sits in the x-z plane above the origin side.
    pub fn leo_position(&self, cfg: &ScenarioConfig) -> NodePosition {
        match cfg.leo_elevation_deg {
            Some(e) => {
                let d = slant_range(cfg.leo_altitude_m, 0.0, e);
                let er = e.to_radians();
                NodePosition::new(-d * er.cos(), 0.0, d * er.sin())
            }
            None => NodePosition::new(0.0, 0.0, cfg.leo_altitude_m),
        }
    }

    /// Slant range and elevation of the satellite seen from a node.
    pub fn leo_link(&self, cfg: &ScenarioConfig, node: &NodePosition) -> (f64, f64) {
        match cfg.leo_elevation_deg {
            Some(e) => (slant_range(cfg.leo_altitude_m, node.z, e), e),
            None => {
                let sat = NodePosition::new(0.0, 0.0, cfg.leo_altitude_m);
                let d = node.distance(&sat);
                let elev = ((sat.z - node.z) / d).clamp(0.0, 1.0).asin().to_degrees();
                (d, elev)
            }
        }
    }
}

/// Large-scale placement of the mobile nodes in one drop.
#[derive(Debug, Clone)]
pub struct Placement {
    pub target: NodePosition,
    pub relays: Vec<NodePosition>,
    pub interferers: Vec<NodePosition>,
    /// Extra AVs jointly served by the CoMP cluster besides the target.
    pub comp_co_served: Vec<NodePosition>,
}

impl Placement {
    /// Target and relays fall uniformly in the serving cell, interfering AVs
    /// over the grid hull, co-served CoMP users in the cluster's cells.
    pub fn sample<R: Rng + ?Sized>(cfg: &ScenarioConfig, dep: &Deployment, rng: &mut R) -> Self {
        let target = place_avs(1, &dep.serving_cell, cfg.av_altitude_m, rng)[0];
        let relays = place_avs(cfg.swarm_size, &dep.serving_cell, cfg.av_altitude_m, rng);
        let interferers = place_avs(cfg.n_interfering_avs, &dep.grid_hull, cfg.av_altitude_m, rng);
        let cluster = dep.comp_cluster(cfg.comp_cluster_size);
        let comp_co_served = (1..cfg.comp_served_avs)
            .map(|i| {
                let site = dep.base_stations[cluster[i % cluster.len()]];
                let cell = ConvexRegion::hex_cell(site, cfg.isd_m);
                place_avs(1, &cell, cfg.av_altitude_m, rng)[0]
            })
            .collect();
        Self { target, relays, interferers, comp_co_served }
    }
}
