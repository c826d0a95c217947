//! Packet cloning over parallel paths and the reliability / availability
//! estimators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::PathRealization;
use crate::scenario::Band;

/// One single-RAT member of a multi-connectivity path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PathKind {
    DA2G,
    CoMP,
    /// Swarm of `relays` AVs; fed by the CoMP cluster when `via_comp`.
    A2A {
        relays: usize,
        via_comp: bool,
    },
    HAP,
    Sat(Band),
}

impl PathKind {
    pub fn is_master(self) -> bool {
        matches!(self, PathKind::DA2G | PathKind::CoMP)
    }

    /// Stable index of the member's delivery stream.
    pub fn stream_index(self) -> u8 {
        match self {
            PathKind::DA2G => 0,
            PathKind::CoMP => 1,
            PathKind::HAP => 2,
            PathKind::Sat(Band::S) => 3,
            PathKind::Sat(Band::Ka) => 4,
            PathKind::A2A { relays, via_comp } => 8 + 2 * relays.min(19) as u8 + u8::from(via_comp),
        }
    }

    fn rank(self) -> u8 {
        match self {
            PathKind::DA2G | PathKind::CoMP => 0,
            PathKind::A2A { .. } => 1,
            PathKind::HAP => 2,
            PathKind::Sat(_) => 3,
        }
    }
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathKind::DA2G => f.write_str("DA2G"),
            PathKind::CoMP => f.write_str("CoMP"),
            PathKind::A2A { relays, .. } => write!(f, "{relays}-A2A"),
            PathKind::HAP => f.write_str("HAP"),
            PathKind::Sat(b) => write!(f, "Sat-{}", b.label()),
        }
    }
}

/// Set of single-RAT paths carrying clones of every packet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct McPath {
    members: Vec<PathKind>,
    id: String,
}

impl McPath {
    /// Validates and orders the members: master first, then relays, HAP and
    /// one satellite band. A relay swarm is fed the same way as the master, or
    /// by DA2G when it stands alone.
    pub fn new(members: &[PathKind]) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyPathSet);
        }
        let mut m = members.to_vec();
        m.sort_by_key(|k| (k.rank(), *k));
        if m.windows(2).any(|w| w[0].rank() == w[1].rank()) {
            return Err(Error::InvalidPathId(format!("duplicate or exclusive members in {m:?}")));
        }
        if let Some(PathKind::A2A { via_comp, .. }) = m.iter().find(|k| matches!(k, PathKind::A2A { .. })) {
            let expect = if *via_comp { PathKind::CoMP } else { PathKind::DA2G };
            let fed_by = m.first().copied().filter(|k| k.is_master());
            if fed_by.is_some_and(|k| k != expect) || (fed_by.is_none() && *via_comp) {
                return Err(Error::InvalidPathId("relay swarm must follow its master link".into()));
            }
        }
        if let Some(PathKind::A2A { relays: 0, .. }) = m.iter().find(|k| matches!(k, PathKind::A2A { .. })) {
            return Err(Error::InvalidPathId("empty relay swarm".into()));
        }
        let id = m.iter().map(ToString::to_string).collect::<Vec<_>>().join("+");
        Ok(Self { members: m, id })
    }

    pub fn members(&self) -> &[PathKind] {
        &self.members
    }

    pub fn id(&self) -> &str {
        &self.id
    }
}

impl fmt::Display for McPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

impl FromStr for McPath {
    type Err = Error;

    /// Parses ids such as `CoMP+3-A2A+HAP`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('+').map(str::trim).collect();
        let via_comp = parts.iter().any(|p| p.eq_ignore_ascii_case("comp"));
        let mut members = Vec::with_capacity(parts.len());
        for p in parts {
            let lower = p.to_ascii_lowercase();
            let k = match lower.as_str() {
                "da2g" => PathKind::DA2G,
                "comp" => PathKind::CoMP,
                "hap" => PathKind::HAP,
                _ => {
                    if let Some(b) = lower.strip_prefix("sat-").and_then(Band::parse) {
                        PathKind::Sat(b)
                    } else if let Some(n) = lower.strip_suffix("-a2a").and_then(|n| n.parse().ok()) {
                        PathKind::A2A { relays: n, via_comp }
                    } else {
                        return Err(Error::InvalidPathId(format!("unknown path member {p:?}")));
                    }
                }
            };
            members.push(k);
        }
        McPath::new(&members)
    }
}

impl TryFrom<String> for McPath {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<McPath> for String {
    fn from(p: McPath) -> String {
        p.id
    }
}

/// Mean-form cloning: loss is the product of member losses, delay the
/// smallest member delay.
pub fn clone_combine(realizations: &[PathRealization]) -> Result<(f64, f64)> {
    if realizations.is_empty() {
        return Err(Error::EmptyPathSet);
    }
    let loss = realizations.iter().map(|r| r.loss_prob).product();
    let delay = realizations.iter().map(|r| r.e2e_delay_s).fold(f64::INFINITY, f64::min);
    Ok((loss, delay))
}

/// Sampled cloning: delivered if any copy arrives, at the earliest arrival.
pub fn clone_outcomes(outcomes: &[(bool, f64)]) -> Result<(bool, f64)> {
    if outcomes.is_empty() {
        return Err(Error::EmptyPathSet);
    }
    let delay = outcomes.iter().filter(|o| o.0).map(|o| o.1).fold(f64::INFINITY, f64::min);
    Ok((delay.is_finite(), delay))
}

pub fn reliability_error_based(loss_prob: f64) -> f64 {
    1.0 - loss_prob
}

/// Fraction of samples with delay at most `d_th`; lost packets carry `+inf`.
pub fn reliability_delay_based(delay_samples: &[f64], d_th: f64) -> f64 {
    if delay_samples.is_empty() {
        return 0.0;
    }
    delay_samples.iter().filter(|&&d| d <= d_th).count() as f64 / delay_samples.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AvailabilityMode {
    ErrorBased,
    DelayAware,
}

/// Fraction of drops whose conditional `(loss, delay)` meet the thresholds.
pub fn availability(samples: &[(f64, f64)], eps_th: f64, d_th: f64, mode: AvailabilityMode) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let ok =
        samples.iter().filter(|(l, d)| *l <= eps_th && (mode == AvailabilityMode::ErrorBased || *d <= d_th)).count();
    ok as f64 / samples.len() as f64
}

/// Empirical `P(delay > t)` at each threshold.
pub fn delay_ccdf(delay_samples: &[f64], thresholds: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = delay_samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    thresholds
        .iter()
        .map(|&t| {
            let le = sorted.partition_point(|&d| d <= t);
            (t, (sorted.len() - le) as f64 / n)
        })
        .collect()
}

/// KPIs of one path at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiEstimate {
    pub mean_loss_prob: f64,
    pub reliability_error_based: f64,
    pub reliability_delay_based: f64,
    pub availability_error_based: f64,
    pub availability_delay_aware: f64,
    /// Fraction of sampled packets lost; the CCDF asymptote.
    pub lost_fraction: f64,
    /// Mean sampled delay of delivered packets.
    pub mean_delay_s: f64,
    pub mean_se: f64,
    pub delay_ccdf: Vec<(f64, f64)>,
    pub n_samples: u64,
    /// 95% half-width of `mean_loss_prob`, treating packets as independent.
    pub ci_halfwidth: f64,
    /// 95% half-width of `mean_loss_prob` from the spread of drop means.
    pub ci_halfwidth_drops: f64,
}

/// Thresholds that turn tallies into KPIs.
#[derive(Debug, Clone, PartialEq)]
pub struct KpiThresholds {
    pub eps_th: f64,
    pub d_th: f64,
    pub ccdf: Vec<f64>,
}

/// Per-drop conditional tallies of one path.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct DropTally {
    n: u64,
    loss_sum: f64,
    delivered: u64,
    delay_sum: f64,
}

impl DropTally {
    fn loss(&self) -> f64 {
        self.loss_sum / self.n as f64
    }

    fn delay(&self) -> f64 {
        if self.delivered == 0 {
            f64::INFINITY
        } else {
            self.delay_sum / self.delivered as f64
        }
    }
}

/// Running tallies of one path. Packets are pushed drop by drop; tallies of
/// disjoint drop ranges merge by [`KpiAccumulator::merge`].
#[derive(Debug, Clone, PartialEq)]
pub struct KpiAccumulator {
    ccdf_thresholds: Vec<f64>,
    d_th: f64,
    n: u64,
    loss_sum: f64,
    loss_sq_sum: f64,
    se_sum: f64,
    lost: u64,
    within_d_th: u64,
    delay_sum: f64,
    /// Samples with delay `> ccdf_thresholds[i]`.
    above: Vec<u64>,
    drops: Vec<DropTally>,
    current: DropTally,
}

impl KpiAccumulator {
    pub fn new(thresholds: &KpiThresholds) -> Self {
        Self {
            ccdf_thresholds: thresholds.ccdf.clone(),
            d_th: thresholds.d_th,
            n: 0,
            loss_sum: 0.0,
            loss_sq_sum: 0.0,
            se_sum: 0.0,
            lost: 0,
            within_d_th: 0,
            delay_sum: 0.0,
            above: vec![0; thresholds.ccdf.len()],
            drops: Vec::new(),
            current: DropTally::default(),
        }
    }

    /// Adds one packet: its conditional loss probability, sampled delay
    /// (`+inf` if lost) and spectral efficiency.
    pub fn push(&mut self, loss_prob: f64, delay_s: f64, se: f64) {
        self.n += 1;
        self.loss_sum += loss_prob;
        self.loss_sq_sum += loss_prob * loss_prob;
        self.se_sum += se;
        self.current.n += 1;
        self.current.loss_sum += loss_prob;
        if delay_s.is_finite() {
            self.delay_sum += delay_s;
            self.current.delivered += 1;
            self.current.delay_sum += delay_s;
        } else {
            self.lost += 1;
        }
        if delay_s <= self.d_th {
            self.within_d_th += 1;
        }
        let le = self.ccdf_thresholds.partition_point(|&t| t < delay_s);
        for c in &mut self.above[..le] {
            *c += 1;
        }
    }

    /// Closes the current drop.
    pub fn end_drop(&mut self) {
        if self.current.n > 0 {
            self.drops.push(self.current);
        }
        self.current = DropTally::default();
    }

    /// Appends the tallies of later drops.
    pub fn merge(&mut self, other: &KpiAccumulator) {
        self.n += other.n;
        self.loss_sum += other.loss_sum;
        self.loss_sq_sum += other.loss_sq_sum;
        self.se_sum += other.se_sum;
        self.lost += other.lost;
        self.within_d_th += other.within_d_th;
        self.delay_sum += other.delay_sum;
        for (a, b) in self.above.iter_mut().zip(&other.above) {
            *a += b;
        }
        self.drops.extend_from_slice(&other.drops);
    }

    pub fn n_samples(&self) -> u64 {
        self.n
    }

    /// Per-drop `(conditional loss, mean delivered delay)`.
    pub fn drop_samples(&self) -> Vec<(f64, f64)> {
        self.drops.iter().map(|d| (d.loss(), d.delay())).collect()
    }

    pub fn estimate(&self, eps_th: f64) -> KpiEstimate {
        let n = self.n.max(1) as f64;
        let mean = self.loss_sum / n;
        let var = (self.loss_sq_sum / n - mean * mean).max(0.0);
        let drops = self.drop_samples();
        let nd = drops.len().max(1) as f64;
        let drop_mean = drops.iter().map(|d| d.0).sum::<f64>() / nd;
        let drop_var = if drops.len() > 1 {
            drops.iter().map(|d| (d.0 - drop_mean).powi(2)).sum::<f64>() / (nd - 1.0)
        } else {
            0.0
        };
        let delivered = self.n - self.lost;
        KpiEstimate {
            mean_loss_prob: mean,
            reliability_error_based: reliability_error_based(mean),
            reliability_delay_based: self.within_d_th as f64 / n,
            availability_error_based: availability(&drops, eps_th, self.d_th, AvailabilityMode::ErrorBased),
            availability_delay_aware: availability(&drops, eps_th, self.d_th, AvailabilityMode::DelayAware),
            lost_fraction: self.lost as f64 / n,
            mean_delay_s: if delivered > 0 { self.delay_sum / delivered as f64 } else { f64::INFINITY },
            mean_se: self.se_sum / n,
            delay_ccdf: self.ccdf_thresholds.iter().zip(&self.above).map(|(&t, &c)| (t, c as f64 / n)).collect(),
            n_samples: self.n,
            ci_halfwidth: 1.96 * (var / n).sqrt(),
            ci_halfwidth_drops: 1.96 * (drop_var / nd).sqrt(),
        }
    }

    /// Quantile of the per-drop conditional loss.
    pub fn loss_quantile(&self, q: f64) -> f64 {
        let mut l: Vec<f64> = self.drops.iter().map(DropTally::loss).collect();
        if l.is_empty() {
            return f64::NAN;
        }
        l.sort_by(f64::total_cmp);
        let i = ((q * l.len() as f64).ceil() as usize).clamp(1, l.len()) - 1;
        l[i]
    }
}
