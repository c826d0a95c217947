//! Two-level Monte-Carlo engine: outer drops in parallel, inner packets per
//! drop, tallies merged in drop order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentSpec, SweepParam, SweepPoint, SweepValue};
use crate::error::{ConfigError, Error, Result};
use crate::mc_kpi::{clone_outcomes, KpiAccumulator, KpiEstimate, KpiThresholds, McPath, PathKind};
use crate::optimizer::{best_mc_path, candidate_set, CandidateKpi, LossCriterion, QosConstraint, Selection};
use crate::paths::{DropState, Environment, PacketChannels, PathRealization};
use crate::rng::{StreamFactory, StreamTag};

/// Drops per parallel work item. Fixed so that the merge order, and hence
/// every floating-point sum, is independent of the worker count.
const DROPS_PER_CHUNK: u64 = 8;

/// KPIs of one path at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub coords: Vec<(SweepParam, SweepValue)>,
    pub path: McPath,
    pub n_links: usize,
    pub kpi: KpiEstimate,
    pub runtime_s: f64,
}

/// Optimizer outcome at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointOptimum {
    pub coords: Vec<(SweepParam, SweepValue)>,
    pub qos: QosConstraint,
    pub selection: Selection,
    pub candidates: Vec<CandidateKpi>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub optimizer: Vec<PointOptimum>,
    /// Packet slots simulated, summed over sweep points.
    pub total_samples: u64,
    /// Packet slots in which a CoMP channel was singular and served as an
    /// outage.
    pub singular_comp_events: u64,
}

impl ExperimentResult {
    /// True when every sweep point found a feasible path.
    pub fn all_feasible(&self) -> bool {
        self.optimizer.iter().all(|o| o.selection != Selection::Infeasible)
    }
}

/// Paths evaluated at one point and the distinct single-RAT members they
/// share.
struct PathPlan {
    paths: Vec<McPath>,
    primitives: Vec<PathKind>,
    /// Member indices into `primitives`, per path.
    members: Vec<Vec<usize>>,
}

impl PathPlan {
    fn new(paths: Vec<McPath>) -> Self {
        let mut primitives: Vec<PathKind> = paths.iter().flat_map(|p| p.members().iter().copied()).collect();
        primitives.sort();
        primitives.dedup();
        let members = paths
            .iter()
            .map(|p| p.members().iter().map(|k| primitives.binary_search(k).expect("collected")).collect())
            .collect();
        Self { paths, primitives, members }
    }
}

fn realize(kind: PathKind, ch: &PacketChannels, env: &Environment) -> PathRealization {
    match kind {
        PathKind::DA2G => ch.da2g(env),
        PathKind::CoMP => ch.comp(env),
        PathKind::A2A { relays, via_comp } => ch.a2a(env, relays, via_comp),
        PathKind::HAP => ch.hap(env),
        PathKind::Sat(b) => ch.leo(env, b),
    }
}

/// Tallies of a run of consecutive drops.
struct Chunk {
    acc: Vec<KpiAccumulator>,
    n_links: Vec<usize>,
    singular: u64,
}

fn run_chunk(
    env: &Environment,
    plan: &PathPlan,
    streams: &StreamFactory,
    thresholds: &KpiThresholds,
    drops: std::ops::Range<u64>,
    n_packets: u64,
) -> Chunk {
    let mut acc: Vec<KpiAccumulator> = plan.paths.iter().map(|_| KpiAccumulator::new(thresholds)).collect();
    let mut n_links = vec![0; plan.paths.len()];
    let mut singular = 0;
    let np = plan.primitives.len();
    let mut loss = vec![0.0; np];
    let mut rate = vec![0.0; np];
    let mut bandwidth = vec![0.0; np];
    let mut outcome = vec![(false, f64::INFINITY); np];
    let mut picked = Vec::new();
    for d in drops {
        let state = DropState::sample(env, &mut streams.outer(d));
        for p in 0..n_packets {
            let ch = PacketChannels::sample(env, &state, streams, d, p);
            singular += ch.singular_comp as u64;
            for (i, &kind) in plan.primitives.iter().enumerate() {
                let r = realize(kind, &ch, env);
                let mut rng = streams.packet(d, p, StreamTag::Delivery(kind.stream_index()));
                outcome[i] = r.sample_outcome(&mut rng);
                loss[i] = r.loss_prob;
                rate[i] = r.bottleneck_rate();
                bandwidth[i] = r.total_bandwidth();
                if d == 0 && p == 0 {
                    for (j, m) in plan.members.iter().enumerate() {
                        if m.contains(&i) {
                            n_links[j] += r.n_links();
                        }
                    }
                }
            }
            for (j, m) in plan.members.iter().enumerate() {
                picked.clear();
                picked.extend(m.iter().map(|&i| outcome[i]));
                let (_, delay) = clone_outcomes(&picked).expect("non-empty path");
                let l: f64 = m.iter().map(|&i| loss[i]).product();
                let best = m.iter().map(|&i| rate[i]).fold(0.0, f64::max);
                let bw: f64 = m.iter().map(|&i| bandwidth[i]).sum();
                acc[j].push(l, delay, if bw > 0.0 { best / bw } else { 0.0 });
            }
        }
        for a in &mut acc {
            a.end_drop();
        }
    }
    Chunk { acc, n_links, singular }
}

/// Accumulated tallies of every path at one sweep point.
pub struct PointTallies {
    pub paths: Vec<McPath>,
    pub n_links: Vec<usize>,
    pub acc: Vec<KpiAccumulator>,
    pub singular_comp_events: u64,
}

/// Runs every drop of one sweep point. Must be called inside the rayon pool
/// that should do the work.
pub fn evaluate_point(spec: &ExperimentSpec, point: &SweepPoint) -> PointTallies {
    let env = Environment::new(&point.scenario);
    let paths = spec.paths.clone().unwrap_or_else(|| candidate_set(&point.scenario));
    let plan = PathPlan::new(paths);
    let streams = StreamFactory::new(spec.master_seed);
    let thresholds = KpiThresholds {
        eps_th: point.scenario.eps_th,
        d_th: point.scenario.d_th_s,
        ccdf: spec.ccdf_thresholds_s.clone(),
    };
    let n_chunks = spec.n_outer_drops.div_ceil(DROPS_PER_CHUNK);
    let chunks: Vec<Chunk> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * DROPS_PER_CHUNK;
            let end = (start + DROPS_PER_CHUNK).min(spec.n_outer_drops);
            run_chunk(&env, &plan, &streams, &thresholds, start..end, spec.n_inner_packets)
        })
        .collect();
    let mut it = chunks.into_iter();
    let first = it.next().expect("at least one drop");
    let (mut acc, n_links, mut singular) = (first.acc, first.n_links, first.singular);
    for c in it {
        for (a, b) in acc.iter_mut().zip(&c.acc) {
            a.merge(b);
        }
        singular += c.singular;
    }
    PointTallies { paths: plan.paths, n_links, acc, singular_comp_events: singular }
}

fn candidate_kpis(t: &PointTallies, est: &[KpiEstimate], qos: &QosConstraint) -> Vec<CandidateKpi> {
    t.paths
        .iter()
        .enumerate()
        .map(|(i, p)| CandidateKpi {
            path: p.clone(),
            n_links: t.n_links[i],
            se_mean: est[i].mean_se,
            loss: match qos.loss {
                LossCriterion::Mean => est[i].mean_loss_prob,
                LossCriterion::Quantile(q) => t.acc[i].loss_quantile(q),
            },
            mean_delay_s: est[i].mean_delay_s,
            availability: est[i].availability_delay_aware,
        })
        .collect()
}

/// Runs the whole sweep grid. `workers = None` uses the global rayon pool.
pub fn run_experiment(spec: &ExperimentSpec, workers: Option<usize>) -> Result<ExperimentResult> {
    let issues = spec.validate();
    if !issues.is_empty() {
        return Err(ConfigError::Validation(issues).into());
    }
    let run = || {
        let mut out = ExperimentResult::default();
        let qos_list = spec.qos_list();
        for point in spec.points() {
            let started = Instant::now();
            let t = evaluate_point(spec, &point);
            let est: Vec<KpiEstimate> = t.acc.iter().map(|a| a.estimate(point.scenario.eps_th)).collect();
            let runtime_s = if spec.record_runtime { started.elapsed().as_secs_f64() } else { 0.0 };
            out.total_samples += spec.n_outer_drops * spec.n_inner_packets;
            out.singular_comp_events += t.singular_comp_events;
            for qos in &qos_list {
                let candidates = candidate_kpis(&t, &est, qos);
                out.optimizer.push(PointOptimum {
                    coords: point.coords.clone(),
                    qos: *qos,
                    selection: best_mc_path(&candidates, qos),
                    candidates,
                });
            }
            for (i, kpi) in est.into_iter().enumerate() {
                out.rows.push(ResultRow {
                    coords: point.coords.clone(),
                    path: t.paths[i].clone(),
                    n_links: t.n_links[i],
                    kpi,
                    runtime_s,
                });
            }
        }
        out
    };
    match workers {
        None => Ok(run()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Runtime(e.to_string()))?;
            Ok(pool.install(run))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Sweep;

    fn small(paths: &[&str]) -> ExperimentSpec {
        ExperimentSpec {
            n_outer_drops: 12,
            n_inner_packets: 10,
            paths: Some(paths.iter().map(|p| p.parse().unwrap()).collect()),
            ..ExperimentSpec::default()
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let spec = ExperimentSpec { n_outer_drops: 1, n_inner_packets: 1, ..small(&["DA2G", "HAP"]) };
        let a = run_experiment(&spec, Some(1)).unwrap();
        for _ in 0..2 {
            assert_eq!(run_experiment(&spec, Some(1)).unwrap(), a);
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let spec = small(&["DA2G+HAP", "CoMP+3-A2A", "Sat-Ka"]);
        let a = run_experiment(&spec, Some(1)).unwrap();
        let b = run_experiment(&spec, Some(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_accounting() {
        let spec = ExperimentSpec {
            sweeps: vec![Sweep::numbers(SweepParam::DataRate, &[250e3, 1e6])],
            ..small(&["DA2G", "HAP"])
        };
        let r = run_experiment(&spec, None).unwrap();
        assert_eq!(r.total_samples, 2 * 12 * 10);
        assert_eq!(r.rows.len(), 4);
        assert!(r.rows.iter().all(|row| row.kpi.n_samples == 120));
        assert_eq!(r.optimizer.len(), 2);
        assert_eq!(r.rows[0].n_links, 1);
        assert_eq!(r.rows[1].n_links, 2);
    }

    #[test]
    fn default_candidates_evaluated() {
        let spec = ExperimentSpec { n_outer_drops: 2, n_inner_packets: 2, ..ExperimentSpec::default() };
        let r = run_experiment(&spec, None).unwrap();
        assert_eq!(r.rows.len(), 27);
        assert_eq!(r.optimizer[0].candidates.len(), 27);
    }

    #[test]
    fn cloning_bounds_hold_per_row() {
        let r = run_experiment(&small(&["DA2G", "HAP", "DA2G+HAP"]), None).unwrap();
        let k: Vec<&KpiEstimate> = r.rows.iter().map(|x| &x.kpi).collect();
        assert!(k[2].mean_loss_prob <= k[0].mean_loss_prob.min(k[1].mean_loss_prob));
        assert!(k[2].lost_fraction <= k[0].lost_fraction.min(k[1].lost_fraction));
        assert!(k[2].mean_se <= k[0].mean_se.max(k[1].mean_se));
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = ExperimentSpec { n_inner_packets: 0, ..ExperimentSpec::default() };
        assert!(matches!(run_experiment(&spec, None), Err(Error::Config(_))));
    }
}
