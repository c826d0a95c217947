//! End-to-end path chains for each radio access technology: delay and loss
//! accounting from the core network to the target AV.

mod comp;
mod realize;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::LinkKind;
use crate::phy::{arq_rounds_from_uniform, LinkRealization};
use crate::queueing::{queue_budget, QueueSpec};
use crate::scenario::{Band, ScenarioConfig};
use crate::units::EARTH_RADIUS_M;

pub use comp::{comp_symbol_power, zf_precoder, CompCluster, MAX_GRAM_CONDITION};
pub use realize::{DropState, Environment, PacketChannels};

/// Radio access technology of a single end-to-end path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rat {
    DA2G,
    CoMP,
    A2A,
    HAP,
    LeoS,
    LeoKa,
}

impl Rat {
    pub fn leo(band: Band) -> Rat {
        match band {
            Band::S => Rat::LeoS,
            Band::Ka => Rat::LeoKa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DelayLabel {
    Backhaul,
    CompCoordination,
    Queue,
    Transmission,
    Propagation,
    /// Earliest parallel relay branch.
    RelayBranches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossLabel {
    Backhaul,
    Coop,
    Queue,
    Decode,
    Visibility,
    /// All parallel relay branches lost.
    RelayBranches,
}

impl fmt::Display for DelayLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for LossLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One radio hop of a path as seen by the spectral-efficiency objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkUse {
    pub kind: LinkKind,
    pub bandwidth_hz: f64,
    pub achieved_rate_bps: f64,
    pub tx_delay_s: f64,
    pub decode_error: f64,
    /// Relay branch the hop belongs to; `None` for the shared stage.
    pub branch: Option<usize>,
}

impl LinkUse {
    pub fn from_link(kind: LinkKind, link: &LinkRealization, packet_bits: f64, branch: Option<usize>) -> Self {
        Self {
            kind,
            bandwidth_hz: link.bandwidth_hz,
            achieved_rate_bps: link.achieved_rate(packet_bits),
            tx_delay_s: link.tx_delay_s,
            decode_error: link.decode_error,
            branch,
        }
    }
}

/// Serial chain of delay and loss terms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Segment {
    pub delay_components: Vec<(DelayLabel, f64)>,
    pub loss_components: Vec<(LossLabel, f64)>,
    pub links: Vec<LinkUse>,
}

impl Segment {
    fn delay(&mut self, label: DelayLabel, v: f64) -> &mut Self {
        self.delay_components.push((label, v));
        self
    }

    fn loss(&mut self, label: LossLabel, v: f64) -> &mut Self {
        self.loss_components.push((label, v));
        self
    }

    fn link(&mut self, kind: LinkKind, link: &LinkRealization, packet_bits: f64, branch: Option<usize>) -> &mut Self {
        self.delay_components.push((DelayLabel::Transmission, link.mean_tx_delay_s));
        self.loss_components.push((LossLabel::Decode, link.decode_error));
        self.links.push(LinkUse::from_link(kind, link, packet_bits, branch));
        self
    }

    fn queue(&mut self, spec: &QueueSpec) -> &mut Self {
        let (d, e) = queue_budget(spec);
        self.delay(DelayLabel::Queue, d).loss(LossLabel::Queue, e)
    }

    pub fn total_delay(&self) -> f64 {
        self.delay_components.iter().map(|c| c.1).sum()
    }

    pub fn total_loss(&self) -> f64 {
        1.0 - self.survival()
    }

    pub fn survival(&self) -> f64 {
        self.loss_components.iter().map(|c| 1.0 - c.1).product()
    }

    /// Delay excluding the mean ARQ transmission terms.
    fn fixed_delay(&self) -> f64 {
        self.delay_components.iter().filter(|c| c.0 != DelayLabel::Transmission).map(|c| c.1).sum()
    }

    /// Sampled `(delivered, delay)` of this segment. Consumes one uniform for
    /// delivery plus one per radio link.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (bool, f64) {
        let u: f64 = rng.random();
        let delivered = u < self.survival();
        let mut delay = self.fixed_delay();
        for l in &self.links {
            let v: f64 = rng.random();
            match arq_rounds_from_uniform(l.decode_error, v) {
                Ok(rounds) => delay += rounds as f64 * l.tx_delay_s,
                Err(_) => delay = f64::INFINITY,
            }
        }
        if delivered && delay.is_finite() {
            (true, delay)
        } else {
            (false, f64::INFINITY)
        }
    }
}

/// One end-to-end draw of a single-RAT path.
///
/// Serial paths have no `branches`. Relay paths carry one branch per relay
/// AV after the shared stage; the branches combine by cloning, so the branch
/// stage is lost only if every branch is lost and its delay is that of the
/// earliest branch.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRealization {
    pub rat: Rat,
    pub e2e_delay_s: f64,
    pub loss_prob: f64,
    pub delay_components: Vec<(DelayLabel, f64)>,
    pub loss_components: Vec<(LossLabel, f64)>,
    pub links_used: Vec<LinkUse>,
    shared: Segment,
    branches: Vec<Segment>,
}

impl PathRealization {
    fn serial(rat: Rat, seg: Segment) -> Self {
        Self {
            rat,
            e2e_delay_s: seg.total_delay(),
            loss_prob: seg.total_loss(),
            delay_components: seg.delay_components.clone(),
            loss_components: seg.loss_components.clone(),
            links_used: seg.links.clone(),
            shared: seg,
            branches: Vec::new(),
        }
    }

    fn with_branches(rat: Rat, shared: Segment, branches: Vec<Segment>) -> Self {
        let branch_loss: f64 = branches.iter().map(Segment::total_loss).product();
        let branch_delay = branches.iter().map(Segment::total_delay).fold(f64::INFINITY, f64::min);
        let mut delay_components = shared.delay_components.clone();
        delay_components.push((DelayLabel::RelayBranches, branch_delay));
        let mut loss_components = shared.loss_components.clone();
        loss_components.push((LossLabel::RelayBranches, branch_loss));
        let mut links_used = shared.links.clone();
        links_used.extend(branches.iter().flat_map(|b| b.links.iter().copied()));
        Self {
            rat,
            e2e_delay_s: delay_components.iter().map(|c| c.1).sum(),
            loss_prob: 1.0 - loss_components.iter().map(|c| 1.0 - c.1).product::<f64>(),
            delay_components,
            loss_components,
            links_used,
            shared,
            branches,
        }
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    /// Minimum achieved rate along the path; for relay paths the best branch.
    pub fn bottleneck_rate(&self) -> f64 {
        let shared = self
            .links_used
            .iter()
            .filter(|l| l.branch.is_none())
            .map(|l| l.achieved_rate_bps)
            .fold(f64::INFINITY, f64::min);
        if self.branches.is_empty() {
            return if shared.is_finite() { shared } else { 0.0 };
        }
        let best_branch = (0..self.branches.len())
            .map(|b| {
                self.links_used
                    .iter()
                    .filter(|l| l.branch == Some(b))
                    .map(|l| l.achieved_rate_bps)
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        let r = shared.min(best_branch);
        if r.is_finite() {
            r
        } else {
            0.0
        }
    }

    pub fn total_bandwidth(&self) -> f64 {
        self.links_used.iter().map(|l| l.bandwidth_hz).sum()
    }

    pub fn n_links(&self) -> usize {
        self.links_used.len()
    }

    /// Per-packet outcome: whether the packet arrives and its delay with
    /// sampled ARQ rounds (`+inf` when lost). The number of uniforms drawn
    /// depends only on the path structure.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, rng: &mut R) -> (bool, f64) {
        let (ok, shared_delay) = self.shared.sample(rng);
        if self.branches.is_empty() {
            return (ok, shared_delay);
        }
        let mut best = f64::INFINITY;
        for b in &self.branches {
            let (bok, d) = b.sample(rng);
            if bok {
                best = best.min(d);
            }
        }
        if ok && best.is_finite() {
            (true, shared_delay + best)
        } else {
            (false, f64::INFINITY)
        }
    }
}

/// Backhaul and CoMP coordination parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackhaulSpec {
    pub core_delay_s: f64,
    pub comp_hop_delay_s: f64,
    pub csi_feedback_delay_s: f64,
    pub failure_prob: f64,
    /// `(BS to CU, CU to BS)` failure probabilities.
    pub comp_failure_probs: (f64, f64),
    pub csi_feedback_failure: f64,
}

impl BackhaulSpec {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            core_delay_s: cfg.core_backhaul_delay_s,
            comp_hop_delay_s: cfg.comp_hop_delay_s,
            csi_feedback_delay_s: cfg.csi_feedback_delay_s,
            failure_prob: cfg.backhaul_failure_prob,
            comp_failure_probs: (cfg.comp_backhaul_failure_c, cfg.comp_backhaul_failure_d),
            csi_feedback_failure: cfg.csi_feedback_failure,
        }
    }

    /// CSI feedback plus the two BS/CU backhaul hops.
    pub fn comp_coordination_delay(&self) -> f64 {
        self.csi_feedback_delay_s + 2.0 * self.comp_hop_delay_s
    }
}

impl Default for BackhaulSpec {
    fn default() -> Self {
        Self::from_config(&ScenarioConfig::default())
    }
}

/// Probability that one BS of an `n`-BS cluster fails to cooperate.
pub fn coop_failure(eps_bd: f64, eps_bc: f64, eps_f: f64, n: usize) -> f64 {
    let per_bs = eps_bc + (1.0 - eps_bc) * eps_f;
    eps_bd + (1.0 - eps_bd) * per_bs.powi(n as i32)
}

/// Largest slant range at which a satellite at altitude `h_s` is seen above
/// `theta_min_deg` from a node at altitude `h_node`.
pub fn max_slant_range(h_s: f64, theta_min_deg: f64, h_node: f64) -> f64 {
    let rs = EARTH_RADIUS_M + h_s;
    let rn = EARTH_RADIUS_M + h_node;
    let t = theta_min_deg.to_radians();
    (rs * rs - rn * rn * t.cos().powi(2)).sqrt() - rn * t.sin()
}

/// Probability that one uniformly placed satellite is visible.
pub fn single_visibility_prob(h_s: f64, theta_min_deg: f64, h_node: f64) -> f64 {
    let d = max_slant_range(h_s, theta_min_deg, h_node);
    ((d * d - h_s * h_s) / (4.0 * EARTH_RADIUS_M * (EARTH_RADIUS_M + h_s))).clamp(0.0, 1.0)
}

/// Probability that at least one of `n_s` satellites is visible.
pub fn visibility_prob(h_s: f64, n_s: u32, theta_min_deg: f64, h_node: f64) -> f64 {
    let p = single_visibility_prob(h_s, theta_min_deg, h_node);
    // 1 - (1-p)^n without cancellation for small p.
    -((n_s as f64) * (-p).ln_1p()).exp_m1()
}

/// Shared inputs of every chain builder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub backhaul: BackhaulSpec,
    pub queue_bs: QueueSpec,
    pub packet_bits: f64,
}

/// Backhaul, BS queue and G2A link.
pub fn da2g_chain(p: &ChainParams, ga: &LinkRealization) -> PathRealization {
    let mut s = Segment::default();
    s.delay(DelayLabel::Backhaul, p.backhaul.core_delay_s)
        .loss(LossLabel::Backhaul, p.backhaul.failure_prob)
        .queue(&p.queue_bs)
        .link(LinkKind::GroundAir, ga, p.packet_bits, None);
    PathRealization::serial(Rat::DA2G, s)
}

/// Shared CoMP stage: backhaul, coordination, cooperation failure and the
/// cluster queues.
fn comp_head(p: &ChainParams, n: usize) -> Segment {
    let bh = &p.backhaul;
    let (eps_bc, eps_bd) = bh.comp_failure_probs;
    let eps_c = coop_failure(eps_bd, eps_bc, bh.csi_feedback_failure, n);
    let mut s = Segment::default();
    s.delay(DelayLabel::Backhaul, bh.core_delay_s)
        .loss(LossLabel::Backhaul, bh.failure_prob)
        .delay(DelayLabel::CompCoordination, bh.comp_coordination_delay())
        .loss(LossLabel::Coop, eps_c.powi(n as i32))
        .delay(DelayLabel::Queue, p.queue_bs.delay_bound_s)
        .loss(LossLabel::Queue, p.queue_bs.violation_prob.powi(n as i32));
    s
}

/// Joint-transmission CoMP over an `n`-BS cluster.
pub fn comp_chain(p: &ChainParams, n: usize, jt: &LinkRealization) -> PathRealization {
    let mut s = comp_head(p, n);
    s.link(LinkKind::GroundAir, jt, p.packet_bits, None);
    PathRealization::serial(Rat::CoMP, s)
}

/// Ground hop towards relay `k`, direct or joint-transmitted.
#[derive(Debug, Clone, Copy)]
pub struct RelayBranch {
    pub ga: LinkRealization,
    pub aa: LinkRealization,
}

/// Relay swarm: shared ground stage then one branch per relay AV, each with
/// its own G2A hop, relay queue and A2A hop. With `comp_n = Some(n)` the
/// relays are fed by an `n`-BS CoMP cluster.
pub fn a2a_chain(
    p: &ChainParams,
    queue_av: &QueueSpec,
    comp_n: Option<usize>,
    branches: &[RelayBranch],
) -> PathRealization {
    let shared = match comp_n {
        Some(n) => comp_head(p, n),
        None => {
            let mut s = Segment::default();
            s.delay(DelayLabel::Backhaul, p.backhaul.core_delay_s)
                .loss(LossLabel::Backhaul, p.backhaul.failure_prob)
                .queue(&p.queue_bs);
            s
        }
    };
    let segs = branches
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let mut s = Segment::default();
            s.link(LinkKind::GroundAir, &b.ga, p.packet_bits, Some(k)).queue(queue_av).link(
                LinkKind::AirAir,
                &b.aa,
                p.packet_bits,
                Some(k),
            );
            s
        })
        .collect();
    PathRealization::with_branches(Rat::A2A, shared, segs)
}

/// Feeder and access hops of a non-terrestrial relay, with their one-way
/// propagation delays.
#[derive(Debug, Clone, Copy)]
pub struct NtnHops {
    pub feeder: LinkRealization,
    pub feeder_propagation_s: f64,
    pub access: LinkRealization,
    pub access_propagation_s: f64,
}

/// Backhaul, BS queue, G2H, HAP queue and H2A.
pub fn hap_chain(p: &ChainParams, queue_hap: &QueueSpec, hops: &NtnHops) -> PathRealization {
    let mut s = Segment::default();
    s.delay(DelayLabel::Backhaul, p.backhaul.core_delay_s)
        .loss(LossLabel::Backhaul, p.backhaul.failure_prob)
        .queue(&p.queue_bs)
        .link(LinkKind::GroundHap, &hops.feeder, p.packet_bits, None)
        .delay(DelayLabel::Propagation, hops.feeder_propagation_s)
        .queue(queue_hap)
        .link(LinkKind::HapAir, &hops.access, p.packet_bits, None)
        .delay(DelayLabel::Propagation, hops.access_propagation_s);
    PathRealization::serial(Rat::HAP, s)
}

/// Backhaul, BS queue, G2S, satellite queue and S2A, each satellite hop also
/// subject to visibility outage.
pub fn leo_chain(
    p: &ChainParams,
    queue_sat: &QueueSpec,
    band: Band,
    hops: &NtnHops,
    p_vis: (f64, f64),
) -> PathRealization {
    let mut s = Segment::default();
    s.delay(DelayLabel::Backhaul, p.backhaul.core_delay_s)
        .loss(LossLabel::Backhaul, p.backhaul.failure_prob)
        .queue(&p.queue_bs)
        .loss(LossLabel::Visibility, 1.0 - p_vis.0)
        .link(LinkKind::GroundSat, &hops.feeder, p.packet_bits, None)
        .delay(DelayLabel::Propagation, hops.feeder_propagation_s)
        .queue(queue_sat)
        .loss(LossLabel::Visibility, 1.0 - p_vis.1)
        .link(LinkKind::SatAir, &hops.access, p.packet_bits, None)
        .delay(DelayLabel::Propagation, hops.access_propagation_s);
    PathRealization::serial(Rat::leo(band), s)
}
