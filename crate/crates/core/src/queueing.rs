//! Queue provisioning via effective bandwidth and the per-node
//! `(delay bound, violation probability)` budget.

use serde::{Deserialize, Serialize};

use crate::error::FieldIssue;

/// Delay requirement of a node's queue under Poisson arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueSpec {
    /// Mean arrival rate, packets/s.
    pub arrival_rate: f64,
    pub delay_bound_s: f64,
    pub violation_prob: f64,
}

impl QueueSpec {
    pub fn new(arrival_rate: f64, delay_bound_s: f64, violation_prob: f64) -> Self {
        Self { arrival_rate, delay_bound_s, violation_prob }
    }

    pub fn validate(&self) -> Vec<FieldIssue> {
        let mut issues = Vec::new();
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            issues.push(FieldIssue::new("arrival_rate", "must be positive"));
        }
        if !(self.delay_bound_s > 0.0 && self.delay_bound_s.is_finite()) {
            issues.push(FieldIssue::new("delay_bound_s", "must be positive"));
        }
        if !(self.violation_prob > 0.0 && self.violation_prob < 1.0) {
            issues.push(FieldIssue::new("violation_prob", "must lie in (0, 1)"));
        }
        issues
    }
}

/// Minimal constant service rate (packets/s) meeting the queue spec.
pub fn effective_bandwidth(spec: &QueueSpec) -> f64 {
    let l = (1.0 / spec.violation_prob).ln();
    l / (spec.delay_bound_s * (l / (spec.arrival_rate * spec.delay_bound_s)).ln_1p())
}

/// Delay and loss charged by one queueing node to an end-to-end chain.
pub fn queue_budget(spec: &QueueSpec) -> (f64, f64) {
    (spec.delay_bound_s, spec.violation_prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(lambda: f64) -> QueueSpec {
        QueueSpec::new(lambda, 0.7e-3, 1e-6)
    }

    #[test]
    fn effective_bandwidth_reference_values() {
        for (lambda, expect) in [(100.0, 3700.0), (1000.0, 6500.0), (10_000.0, 18_000.0)] {
            let e = effective_bandwidth(&table(lambda));
            assert!((e / expect - 1.0).abs() < 0.02, "lambda={lambda}: {e}");
        }
    }

    #[test]
    fn budget_is_pass_through() {
        assert_eq!(queue_budget(&table(1000.0)), (0.7e-3, 1e-6));
        assert_eq!(queue_budget(&QueueSpec::new(10.0, 1e-3, 0.5)), (1e-3, 0.5));
        let (_, e) = queue_budget(&table(1000.0));
        let survival = (1.0 - e) * (1.0 - e);
        assert!((survival - (1.0 - 1e-6f64).powi(2)).abs() < 1e-18);
    }

    #[test]
    fn validation() {
        assert!(table(1.0).validate().is_empty());
        assert_eq!(QueueSpec::new(0.0, 0.0, 1.0).validate().len(), 3);
    }

    proptest! {
        #[test]
        fn exceeds_arrival_rate(lambda in 1e-2f64..1e6, d in 1e-5f64..1.0, eps in 1e-12f64..0.9) {
            prop_assert!(effective_bandwidth(&QueueSpec::new(lambda, d, eps)) > lambda);
        }

        #[test]
        fn monotone(lambda in 1.0f64..1e5, d in 1e-4f64..1e-1, eps in 1e-10f64..0.5) {
            let base = effective_bandwidth(&QueueSpec::new(lambda, d, eps));
            prop_assert!(effective_bandwidth(&QueueSpec::new(lambda * 1.1, d, eps)) > base);
            prop_assert!(effective_bandwidth(&QueueSpec::new(lambda, d * 1.1, eps)) < base);
            prop_assert!(effective_bandwidth(&QueueSpec::new(lambda, d, eps * 1.1)) < base);
        }
    }
}
