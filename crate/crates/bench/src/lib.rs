//! Shared fixtures for the criterion benchmarks.

use reorder_core::{CostParams, PolicyParams, ProcessParams, RenewalSeriesConfig};

/// Default demand, policy, costs and series truncation.
pub fn default_setup() -> (ProcessParams, PolicyParams, CostParams, RenewalSeriesConfig) {
    (
        ProcessParams::default(),
        PolicyParams::default(),
        CostParams::default(),
        RenewalSeriesConfig::default(),
    )
}
