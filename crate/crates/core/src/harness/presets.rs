//! Built-in experiments reproducing the reference figures.

use super::config::{ExperimentSpec, OutputKind, QosTarget, Sweep, SweepParam};
use crate::mc_kpi::McPath;
use crate::scenario::ScenarioConfig;

pub const PRESET_NAMES: [&str; 7] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

fn paths(ids: &[&str]) -> Option<Vec<McPath>> {
    Some(ids.iter().map(|s| s.parse().expect("preset path id")).collect())
}

const SINGLES: [&str; 6] = ["DA2G", "CoMP", "3-A2A", "HAP", "Sat-S", "Sat-Ka"];

/// Named preset, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<ExperimentSpec> {
    let base = ExperimentSpec::default();
    let spec = match name {
        // Delay CCDF of the single-RAT paths at the lowest and highest rate.
        "fig3" => ExperimentSpec {
            sweeps: vec![Sweep::numbers(SweepParam::DataRate, &[250e3, 1e6])],
            paths: paths(&SINGLES),
            outputs: vec![OutputKind::KpiTable, OutputKind::Ccdf],
            ccdf_thresholds_s: (0..=200).map(|i| i as f64 / 2000.0).collect(),
            ..base
        },
        // Error-based against delay-based KPIs under a strict 10 ms bound.
        "fig4" => ExperimentSpec {
            scenario: ScenarioConfig { d_th_s: 10e-3, ..ScenarioConfig::default() },
            sweeps: vec![Sweep::numbers(SweepParam::DataRate, &[20e3, 40e3, 70e3, 100e3, 250e3, 500e3, 750e3, 1e6])],
            paths: paths(&["DA2G", "HAP", "Sat-S", "Sat-Ka"]),
            ..base
        },
        "fig5" => ExperimentSpec {
            sweeps: vec![Sweep::numbers(SweepParam::DataRate, &[250e3, 375e3, 500e3, 625e3, 750e3, 875e3, 1e6])],
            ..base
        },
        "fig6" => {
            ExperimentSpec { sweeps: vec![Sweep::numbers(SweepParam::CompClusterSize, &[1.0, 2.0, 3.0, 4.0])], ..base }
        }
        "fig7" => ExperimentSpec {
            sweeps: vec![Sweep::numbers(SweepParam::BandwidthRbs, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0])],
            ..base
        },
        "fig8" => {
            ExperimentSpec { sweeps: vec![Sweep::numbers(SweepParam::PInterf, &[0.001, 0.01, 0.05, 0.2])], ..base }
        }
        // Best path for a grid of reliability and availability demands.
        "fig9" => ExperimentSpec {
            outputs: vec![OutputKind::OptimizerReport],
            qos_grid: [1e-2, 1e-3, 1e-4, 1e-5]
                .iter()
                .flat_map(|&eps_th| [0.9, 0.99, 0.999].map(|p_th| QosTarget { eps_th, p_th }))
                .collect(),
            ..base
        },
        _ => return None,
    };
    Some(spec)
}
