//! Spectral efficiency of multi-connectivity paths and brute-force selection
//! of the best path under QoS constraints.

use serde::{Deserialize, Serialize};

use crate::error::FieldIssue;
use crate::mc_kpi::{McPath, PathKind};
use crate::paths::PathRealization;
use crate::scenario::{Band, ScenarioConfig};

/// Minimum achieved link rate along a path, bits/s.
pub fn bottleneck_rate(path: &PathRealization) -> f64 {
    path.bottleneck_rate()
}

/// Best member bottleneck over the bandwidth of every link of every member.
pub fn spectral_efficiency(members: &[PathRealization]) -> f64 {
    let rate = members.iter().map(bottleneck_rate).fold(0.0, f64::max);
    let bw: f64 = members.iter().map(PathRealization::total_bandwidth).sum();
    if bw > 0.0 {
        rate / bw
    } else {
        0.0
    }
}

/// Default candidate set: a master link with any combination of the relay
/// swarm, the HAP and one satellite band, plus the NTN-only paths.
pub fn candidate_set(cfg: &ScenarioConfig) -> Vec<McPath> {
    let mut out = Vec::new();
    let sats: Vec<Option<Band>> = std::iter::once(None).chain(cfg.sat_bands.iter().copied().map(Some)).collect();
    for via_comp in [false, true] {
        let master = if via_comp { PathKind::CoMP } else { PathKind::DA2G };
        for swarm in [false, true] {
            for hap in [false, true] {
                for sat in &sats {
                    let mut m = vec![master];
                    if swarm && cfg.swarm_size > 0 {
                        m.push(PathKind::A2A { relays: cfg.swarm_size, via_comp });
                    } else if swarm {
                        continue;
                    }
                    if hap {
                        m.push(PathKind::HAP);
                    }
                    if let Some(b) = sat {
                        m.push(PathKind::Sat(*b));
                    }
                    out.push(McPath::new(&m).expect("valid by construction"));
                }
            }
        }
    }
    out.push(McPath::new(&[PathKind::HAP]).expect("valid"));
    for b in &cfg.sat_bands {
        out.push(McPath::new(&[PathKind::Sat(*b)]).expect("valid"));
    }
    out
}

/// How the loss constraint reads the per-drop loss distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossCriterion {
    Mean,
    /// Quantile of the per-drop conditional loss at the given level.
    Quantile(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosConstraint {
    pub eps_th: f64,
    pub d_th_s: f64,
    /// Minimum availability.
    pub p_th: f64,
    pub loss: LossCriterion,
}

impl QosConstraint {
    pub fn new(eps_th: f64, d_th_s: f64, p_th: f64) -> Self {
        Self { eps_th, d_th_s, p_th, loss: LossCriterion::Mean }
    }

    pub fn validate(&self) -> Vec<FieldIssue> {
        let mut v = Vec::new();
        if !(self.eps_th > 0.0 && self.eps_th < 1.0) {
            v.push(FieldIssue::new("eps_th", "must lie in (0, 1)"));
        }
        if !(self.d_th_s > 0.0) {
            v.push(FieldIssue::new("d_th", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.p_th) {
            v.push(FieldIssue::new("p_th", "must lie in [0, 1]"));
        }
        if let LossCriterion::Quantile(q) = self.loss {
            if !(q > 0.0 && q <= 1.0) {
                v.push(FieldIssue::new("loss_quantile", "must lie in (0, 1]"));
            }
        }
        v
    }
}

/// Estimated KPIs of one candidate on a common seed set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateKpi {
    pub path: McPath,
    pub n_links: usize,
    pub se_mean: f64,
    /// Loss figure read by the constraint: mean or quantile.
    pub loss: f64,
    pub mean_delay_s: f64,
    pub availability: f64,
}

impl CandidateKpi {
    /// Slack of each constraint; all non-negative when feasible.
    pub fn margins(&self, qos: &QosConstraint) -> [f64; 3] {
        [qos.eps_th - self.loss, qos.d_th_s - self.mean_delay_s, self.availability - qos.p_th]
    }

    pub fn is_feasible(&self, qos: &QosConstraint) -> bool {
        self.se_mean.is_finite() && self.margins(qos).iter().all(|&m| m >= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Selection {
    Selected { path: McPath, se_mean: f64 },
    Infeasible,
}

/// Feasible candidate of highest mean SE; ties go to fewer links, then the
/// lexicographically smaller id.
pub fn best_mc_path(candidates: &[CandidateKpi], qos: &QosConstraint) -> Selection {
    candidates
        .iter()
        .filter(|c| c.is_feasible(qos))
        .min_by(|a, b| {
            b.se_mean.total_cmp(&a.se_mean).then(a.n_links.cmp(&b.n_links)).then_with(|| a.path.id().cmp(b.path.id()))
        })
        .map_or(Selection::Infeasible, |c| Selection::Selected { path: c.path.clone(), se_mean: c.se_mean })
}
