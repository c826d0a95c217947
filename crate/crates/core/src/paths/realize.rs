//! Link budgets of one drop and the per-packet fading realizations that turn
//! them into path chains.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::comp::{comp_symbol_power, zf_precoder, CompCluster};
use super::{
    a2a_chain, comp_chain, da2g_chain, hap_chain, leo_chain, visibility_prob, BackhaulSpec, ChainParams, NtnHops,
    PathRealization, RelayBranch,
};
use crate::antenna::{beam_gain, bs_total_gain, UlaConfig};
use crate::channel::{fspl, p_los, pathloss_g2a, rice_k, sample_rician, FadingDraw, LinkKind, RiceFactorTable};
use crate::phy::{noise_power_dbm, InterferenceField, LinkRealization};
use crate::queueing::QueueSpec;
use crate::rng::{StreamFactory, StreamTag};
use crate::scenario::{angle_between_deg, link_geometry, Band, Deployment, NodePosition, Placement, ScenarioConfig};
use crate::units::{db_to_linear, dbm_to_mw, propagation_delay};

const UP: [f64; 3] = [0.0, 0.0, 1.0];

/// Everything about an experiment point that does not change between drops.
#[derive(Debug, Clone)]
pub struct Environment {
    pub cfg: ScenarioConfig,
    pub deployment: Deployment,
    /// BS indices of the CoMP cluster, serving site first.
    pub cluster: Vec<usize>,
    pub chain: ChainParams,
    pub queue_av: QueueSpec,
    pub queue_hap: QueueSpec,
    pub queue_sat: QueueSpec,
    ula: UlaConfig,
    rice: RiceFactorTable,
    noise_access_mw: f64,
    noise_feeder_mw: f64,
    leo_position: NodePosition,
    /// Visibility of the serving constellation from the ground station and
    /// from the AV.
    p_vis: (f64, f64),
}

impl Environment {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let deployment = Deployment::new(cfg);
        let cluster = deployment.comp_cluster(cfg.comp_cluster_size);
        let q = |lambda| QueueSpec::new(lambda, cfg.queue_delay_bound_s, cfg.queue_violation_prob);
        let leo_position = deployment.leo_position(cfg);
        Self {
            chain: ChainParams {
                backhaul: BackhaulSpec::from_config(cfg),
                queue_bs: q(cfg.lambda_bs),
                packet_bits: cfg.packet_bits(),
            },
            queue_av: q(cfg.lambda_av),
            queue_hap: q(cfg.lambda_hap),
            queue_sat: q(cfg.lambda_sat),
            ula: UlaConfig {
                n_elements: cfg.bs_n_elements,
                max_element_gain_db: cfg.bs_element_gain_dbi,
                downtilt_deg: cfg.bs_downtilt_deg,
            },
            rice: RiceFactorTable::from_config(cfg),
            noise_access_mw: dbm_to_mw(noise_power_dbm(
                cfg.access_bandwidth_hz(),
                cfg.noise_density_dbm_hz,
                cfg.av_noise_figure_db,
            )),
            noise_feeder_mw: dbm_to_mw(noise_power_dbm(
                cfg.feeder_bandwidth_hz,
                cfg.noise_density_dbm_hz,
                cfg.ntn_noise_figure_db,
            )),
            leo_position,
            p_vis: (
                visibility_prob(cfg.leo_altitude_m, cfg.n_satellites, cfg.theta_min_deg, cfg.gs_height_m),
                visibility_prob(cfg.leo_altitude_m, cfg.n_satellites, cfg.theta_min_deg, cfg.av_altitude_m),
            ),
            cluster,
            deployment,
            cfg: cfg.clone(),
        }
    }

    pub fn visibility(&self) -> (f64, f64) {
        self.p_vis
    }

    fn link(&self, sinr: f64, bandwidth_hz: f64) -> LinkRealization {
        LinkRealization::new(sinr, bandwidth_hz, self.cfg.data_rate_bps, self.cfg.packet_bits())
    }
}

/// Mean channel power gain (antennas over path loss) and Rice factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScale {
    pub gain: f64,
    pub k_db: f64,
}

/// Large-scale state of a non-terrestrial relay towards the target.
#[derive(Debug, Clone, PartialEq)]
pub struct NtnLargeScale {
    pub band: Option<Band>,
    pub feeder: LargeScale,
    pub feeder_distance_m: f64,
    pub access: LargeScale,
    pub access_distance_m: f64,
    /// Gains of the co-channel side beams at the target.
    pub side_beams: Vec<LargeScale>,
}

/// Large-scale realization of one drop: placements, LoS states and
/// shadowing, reduced to per-link mean gains.
#[derive(Debug, Clone)]
pub struct DropState {
    pub placement: Placement,
    /// Per BS, towards the target AV.
    pub target: Vec<LargeScale>,
    /// Per relay, per BS.
    pub relays: Vec<Vec<LargeScale>>,
    /// Per co-served CoMP user, per BS.
    pub co_served: Vec<Vec<LargeScale>>,
    /// Relay `k` to target.
    pub a2a: Vec<LargeScale>,
    /// Interfering AV to target.
    pub air_interferers: Vec<LargeScale>,
    pub hap: NtnLargeScale,
    /// S-band then Ka-band.
    pub leo: [NtnLargeScale; 2],
}

impl DropState {
    /// Draws the large-scale state of a drop. The number of draws depends
    /// only on node counts, so sweeping rates, bandwidths or activation
    /// probabilities reuses the same drops.
    pub fn sample(env: &Environment, rng: &mut ChaCha8Rng) -> Self {
        let cfg = &env.cfg;
        let dep = &env.deployment;
        let placement = Placement::sample(cfg, dep, rng);
        let ground = |av: &NodePosition, rng: &mut ChaCha8Rng| -> Vec<LargeScale> {
            dep.base_stations.iter().map(|bs| ground_air(env, bs, av, rng)).collect()
        };
        let target = ground(&placement.target, rng);
        let relays = placement.relays.iter().map(|r| ground(r, rng)).collect();
        let co_served = placement.comp_co_served.iter().map(|r| ground(r, rng)).collect();
        let air = |from: &NodePosition| air_air(env, from, &placement.target);
        let a2a = placement.relays.iter().map(air).collect();
        let air_interferers = placement.interferers.iter().map(air).collect();
        let sf: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let hap = hap_large_scale(env, &placement.target, sf[0]);
        let leo = [
            leo_large_scale(env, &placement.target, Band::S, sf[1]),
            leo_large_scale(env, &placement.target, Band::Ka, sf[2]),
        ];
        Self { placement, target, relays, co_served, a2a, air_interferers, hap, leo }
    }

    fn leo(&self, band: Band) -> &NtnLargeScale {
        match band {
            Band::S => &self.leo[0],
            Band::Ka => &self.leo[1],
        }
    }
}

fn ground_air(env: &Environment, bs: &NodePosition, av: &NodePosition, rng: &mut ChaCha8Rng) -> LargeScale {
    let cfg = &env.cfg;
    let u: f64 = rng.random();
    let geom = link_geometry(bs, av, UP).expect("BS and AV heights differ");
    let los = u < p_los(geom.distance_2d, bs.z, av.z);
    let pl = pathloss_g2a(&geom, av.z, cfg.fc_s_ghz, los).expect("positive distance");
    let g = bs_total_gain(geom.zenith_deg, &env.ula) * db_to_linear(cfg.av_antenna_gain_dbi);
    LargeScale { gain: g / db_to_linear(pl), k_db: rice_k(geom.elevation_deg, &env.rice, LinkKind::GroundAir, Band::S) }
}

fn air_air(env: &Environment, from: &NodePosition, to: &NodePosition) -> LargeScale {
    let cfg = &env.cfg;
    match link_geometry(from, to, UP) {
        Ok(geom) => {
            let pl = fspl(geom.distance_3d, cfg.fc_s_ghz).expect("positive distance");
            LargeScale {
                gain: db_to_linear(2.0 * cfg.av_antenna_gain_dbi - pl),
                k_db: rice_k(geom.elevation_deg, &env.rice, LinkKind::AirAir, Band::S),
            }
        }
        // Coincident AVs have no meaningful link; treat as a silent one.
        Err(_) => LargeScale { gain: 0.0, k_db: env.cfg.rice_aa_db.1 },
    }
}

fn hap_large_scale(env: &Environment, target: &NodePosition, sf: f64) -> NtnLargeScale {
    let cfg = &env.cfg;
    let dep = &env.deployment;
    let hap = dep.hap;
    let gs = dep.hap_ground_station;
    let feeder = link_geometry(&gs, &hap, UP).expect("HAP above its ground station");
    let feeder_pl = fspl(feeder.distance_3d, cfg.fc_s_ghz).expect("positive distance") + cfg.shadow_fading_los_db * sf;
    let access = link_geometry(&hap, target, UP).expect("HAP above the AV");
    let access_pl = fspl(access.distance_3d, cfg.fc_s_ghz).expect("positive distance");
    let to_target = hap.vector_to(target);
    let k_access = rice_k(access.elevation_deg, &env.rice, LinkKind::HapAir, Band::S);
    let beam = |center: &NodePosition| {
        let off = angle_between_deg(to_target, hap.vector_to(center));
        LargeScale {
            gain: db_to_linear(cfg.hap_antenna_gain_dbi + cfg.av_antenna_gain_dbi - access_pl) * beam_gain(off),
            k_db: k_access,
        }
    };
    let boresight = NodePosition::new(0.0, 0.0, 0.0);
    NtnLargeScale {
        band: None,
        feeder: LargeScale {
            gain: db_to_linear(2.0 * cfg.hap_antenna_gain_dbi - feeder_pl),
            k_db: rice_k(feeder.elevation_deg, &env.rice, LinkKind::GroundHap, Band::S),
        },
        feeder_distance_m: feeder.distance_3d,
        access: beam(&boresight),
        access_distance_m: access.distance_3d,
        side_beams: dep.hap_beam_centers.iter().map(beam).collect(),
    }
}

fn leo_large_scale(env: &Environment, target: &NodePosition, band: Band, sf: f64) -> NtnLargeScale {
    let cfg = &env.cfg;
    let dep = &env.deployment;
    let fc = cfg.carrier_ghz(band);
    let (feeder_d, feeder_el) = dep.leo_link(cfg, &dep.sat_ground_station);
    let (access_d, access_el) = dep.leo_link(cfg, target);
    let feeder_pl = fspl(feeder_d, fc).expect("positive distance") + cfg.shadow_fading_los_db * sf;
    let access_pl = fspl(access_d, fc).expect("positive distance");
    let sat = env.leo_position;
    let to_target = sat.vector_to(target);
    let k_access = rice_k(access_el, &env.rice, LinkKind::SatAir, band);
    let beam = |center: &NodePosition| {
        let off = angle_between_deg(to_target, sat.vector_to(center));
        LargeScale {
            gain: db_to_linear(cfg.leo_antenna_gain_dbi + cfg.av_antenna_gain_dbi - access_pl) * beam_gain(off),
            k_db: k_access,
        }
    };
    let boresight = NodePosition::new(0.0, 0.0, 0.0);
    NtnLargeScale {
        band: Some(band),
        feeder: LargeScale {
            gain: db_to_linear(2.0 * cfg.leo_antenna_gain_dbi - feeder_pl),
            k_db: rice_k(feeder_el, &env.rice, LinkKind::GroundSat, band),
        },
        feeder_distance_m: feeder_d,
        access: beam(&boresight),
        access_distance_m: access_d,
        side_beams: dep.leo_beam_centers.iter().map(beam).collect(),
    }
}

fn fading_vec(ls: &[LargeScale], rng: &mut ChaCha8Rng) -> Vec<FadingDraw> {
    ls.iter().map(|l| sample_rician(l.k_db, rng)).collect()
}

fn uniforms(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random()).collect()
}

/// Ground-to-air small-scale state of one receiving AV.
#[derive(Debug, Clone)]
struct GroundFading {
    draws: Vec<FadingDraw>,
}

/// Radio links of one packet slot, ready to be chained into paths.
#[derive(Debug, Clone)]
pub struct PacketChannels {
    pub target_ga: LinkRealization,
    pub target_jt: LinkRealization,
    pub relay_ga: Vec<LinkRealization>,
    pub relay_jt: Vec<LinkRealization>,
    pub relay_aa: Vec<LinkRealization>,
    pub hap: NtnHops,
    /// S-band then Ka-band.
    pub leo: [NtnHops; 2],
    /// Singular CoMP channel matrices met in this slot (served as outage).
    pub singular_comp: usize,
}

impl PacketChannels {
    /// Draws the small-scale state of packet `packet` in drop `drop`.
    pub fn sample(env: &Environment, state: &DropState, streams: &StreamFactory, drop: u64, packet: u64) -> Self {
        let cfg = &env.cfg;
        let p_bs = dbm_to_mw(cfg.bs_tx_power_dbm);
        let n_bs = state.target.len();

        let mut rng = streams.packet(drop, packet, StreamTag::GroundTarget);
        let active = uniforms(n_bs, &mut rng);
        let target = GroundFading { draws: fading_vec(&state.target, &mut rng) };
        let relays: Vec<GroundFading> = state
            .relays
            .iter()
            .enumerate()
            .map(|(k, ls)| {
                let mut rng = streams.packet(drop, packet, StreamTag::GroundRelay(k as u8));
                GroundFading { draws: fading_vec(ls, &mut rng) }
            })
            .collect();
        let mut rng = streams.packet(drop, packet, StreamTag::CompCoServed);
        let co_served: Vec<GroundFading> =
            state.co_served.iter().map(|ls| GroundFading { draws: fading_vec(ls, &mut rng) }).collect();

        let mut singular_comp = 0;
        let ga = |ls: &[LargeScale], f: &GroundFading| {
            let mut field = InterferenceField::new(cfg.p_interf);
            let mut u = Vec::with_capacity(n_bs - 1);
            for b in 1..n_bs {
                field.push(cfg.bs_tx_power_dbm, ls[b].gain * f.draws[b].power_gain());
                u.push(active[b]);
            }
            let s = p_bs * ls[0].gain * f.draws[0].power_gain();
            env.link(s / (field.power_with(&u) + env.noise_access_mw), cfg.access_bandwidth_hz())
        };
        let mut jt = |ls: &[LargeScale], f: &GroundFading| match comp_sinr(env, state, &active, ls, f, &co_served) {
            Some(g) => env.link(g, cfg.access_bandwidth_hz()),
            None => {
                singular_comp += 1;
                env.link(0.0, cfg.access_bandwidth_hz())
            }
        };
        let target_ga = ga(&state.target, &target);
        let target_jt = jt(&state.target, &target);
        let relay_ga = state.relays.iter().zip(&relays).map(|(ls, f)| ga(ls, f)).collect();
        let relay_jt = state.relays.iter().zip(&relays).map(|(ls, f)| jt(ls, f)).collect();

        // Air-to-air: the interfering AVs are common to every relay link.
        let mut rng = streams.packet(drop, packet, StreamTag::AirInterferers);
        let air_active = uniforms(state.air_interferers.len(), &mut rng);
        let air_fading = fading_vec(&state.air_interferers, &mut rng);
        let mut air_field = InterferenceField::new(cfg.p_interf);
        for (ls, f) in state.air_interferers.iter().zip(&air_fading) {
            air_field.push(cfg.av_tx_power_dbm, ls.gain * f.power_gain());
        }
        let air_interference = air_field.power_with(&air_active);
        let p_av = dbm_to_mw(cfg.av_tx_power_dbm);
        let relay_aa = state
            .a2a
            .iter()
            .enumerate()
            .map(|(k, ls)| {
                let mut rng = streams.packet(drop, packet, StreamTag::AirRelay(k as u8));
                let f = sample_rician(ls.k_db, &mut rng);
                let s = p_av * ls.gain * f.power_gain();
                env.link(s / (air_interference + env.noise_access_mw), cfg.access_bandwidth_hz())
            })
            .collect();

        let mut rng = streams.packet(drop, packet, StreamTag::Hap);
        let hap = ntn_hops(env, &state.hap, cfg.gs_tx_power_dbm, cfg.hap_tx_power_dbm, &mut rng);
        let mut rng = streams.packet(drop, packet, StreamTag::SatS);
        let leo_s = ntn_hops(env, state.leo(Band::S), cfg.gs_tx_power_dbm, cfg.leo_tx_power_dbm, &mut rng);
        let mut rng = streams.packet(drop, packet, StreamTag::SatKa);
        let leo_ka = ntn_hops(env, state.leo(Band::Ka), cfg.gs_tx_power_dbm, cfg.leo_tx_power_dbm, &mut rng);

        Self { target_ga, target_jt, relay_ga, relay_jt, relay_aa, hap, leo: [leo_s, leo_ka], singular_comp }
    }

    pub fn da2g(&self, env: &Environment) -> PathRealization {
        da2g_chain(&env.chain, &self.target_ga)
    }

    pub fn comp(&self, env: &Environment) -> PathRealization {
        comp_chain(&env.chain, env.cluster.len(), &self.target_jt)
    }

    /// Swarm of the first `k` relays, fed directly or by the CoMP cluster.
    pub fn a2a(&self, env: &Environment, k: usize, via_comp: bool) -> PathRealization {
        let ground = if via_comp { &self.relay_jt } else { &self.relay_ga };
        let branches: Vec<RelayBranch> =
            ground.iter().zip(&self.relay_aa).take(k).map(|(ga, aa)| RelayBranch { ga: *ga, aa: *aa }).collect();
        let comp_n = via_comp.then_some(env.cluster.len());
        a2a_chain(&env.chain, &env.queue_av, comp_n, &branches)
    }

    pub fn hap(&self, env: &Environment) -> PathRealization {
        hap_chain(&env.chain, &env.queue_hap, &self.hap)
    }

    pub fn leo(&self, env: &Environment, band: Band) -> PathRealization {
        let hops = match band {
            Band::S => &self.leo[0],
            Band::Ka => &self.leo[1],
        };
        leo_chain(&env.chain, &env.queue_sat, band, hops, env.visibility())
    }
}

/// Joint-transmission SINR of one AV served together with the co-served
/// users; `None` when the cluster channel is singular.
fn comp_sinr(
    env: &Environment,
    state: &DropState,
    active: &[f64],
    ls: &[LargeScale],
    fading: &GroundFading,
    co_served: &[GroundFading],
) -> Option<f64> {
    let cfg = &env.cfg;
    let cluster = &env.cluster;
    let n = cluster.len();
    let m = 1 + co_served.len().min(n.saturating_sub(1));
    let coeff =
        |ls: &[LargeScale], f: &GroundFading, b: usize| -> Complex64 { ls[b].gain.sqrt() * f.draws[b].coefficient() };
    let h = DMatrix::from_fn(m, n, |i, j| {
        let b = cluster[j];
        if i == 0 {
            coeff(ls, fading, b)
        } else {
            coeff(&state.co_served[i - 1], &co_served[i - 1], b)
        }
    });
    let p_max = dbm_to_mw(cfg.bs_tx_power_dbm);
    let cl = CompCluster::new(h, cfg.bs_tx_power_dbm).ok()?;
    let w = zf_precoder(&cl).ok()?;
    let p_m = comp_symbol_power(&w, p_max);
    let mut interference = 0.0;
    for b in 0..ls.len() {
        if !cluster.contains(&b) && active[b] < cfg.p_interf {
            interference += p_max * ls[b].gain * fading.draws[b].power_gain();
        }
    }
    Some(p_m / (interference + env.noise_access_mw))
}

/// Feeder and access hops of a HAP or satellite: an interference-free
/// feeder, then an access link with Bernoulli-gated side-beam interference.
fn ntn_hops(
    env: &Environment,
    ls: &NtnLargeScale,
    p_feeder_dbm: f64,
    p_access_dbm: f64,
    rng: &mut ChaCha8Rng,
) -> NtnHops {
    let cfg = &env.cfg;
    let feeder_fading = sample_rician(ls.feeder.k_db, rng);
    let access_fading = sample_rician(ls.access.k_db, rng);
    let active = uniforms(ls.side_beams.len(), rng);
    let side_fading = fading_vec(&ls.side_beams, rng);
    let feeder_sinr = dbm_to_mw(p_feeder_dbm) * ls.feeder.gain * feeder_fading.power_gain() / env.noise_feeder_mw;
    let mut field = InterferenceField::new(cfg.p_interf);
    for (b, f) in ls.side_beams.iter().zip(&side_fading) {
        field.push(p_access_dbm, b.gain * f.power_gain());
    }
    let s = dbm_to_mw(p_access_dbm) * ls.access.gain * access_fading.power_gain();
    let access_sinr = s / (field.power_with(&active) + env.noise_access_mw);
    NtnHops {
        feeder: env.link(feeder_sinr, cfg.feeder_bandwidth_hz),
        feeder_propagation_s: propagation_delay(ls.feeder_distance_m),
        access: env.link(access_sinr, cfg.access_bandwidth_hz()),
        access_propagation_s: propagation_delay(ls.access_distance_m),
    }
}
