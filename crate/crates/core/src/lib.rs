//! Reorder-point inventory control when cumulative demand is a drifted
//! Poisson process `D_t = mu t + alpha N_t`.
//!
//! The crate has three layers:
//!
//! * analytical: [`passage`] approximates the n-th reorder time by a gamma
//!   law and sums the renewal series, [`cost`] turns those sums into the
//!   closed-form expected inventory and expected total cost;
//! * simulation: [`process`] samples exact demand paths and [`mc`] runs the
//!   event-driven inventory system that serves as the brute-force oracle;
//! * baseline: [`forecast`] (ARIMA and Croston) and [`experiment`] run the
//!   rolling-forecast reorder simulation behind the average-cost table.

pub mod cost;
pub mod error;
pub mod experiment;
pub mod forecast;
pub mod mc;
pub mod passage;
pub mod process;
pub mod quadrature;
pub mod special;
pub mod stats;

pub use cost::{
    argmax_time, cost_curve, expected_inventory, expected_total_cost, sweep, CostBreakdown,
    CostCurve, CostParams, OrderingMode, PolicyParams, SweepRow,
};
pub use error::{Error, Result};
pub use experiment::{
    reorder_sim_discrete, run_table_experiment, table1_grid, DiscreteSimResult, ExperimentConfig,
    TableRow, TableSpec, TriggerRule,
};
pub use forecast::{croston_forecast, fit_arima, rolling_forecast, ArimaModel, ArimaSearch};
pub use mc::{mc_summary, realized_cost, simulate, SimSummary, Trajectory};
pub use passage::{
    expected_integrated_renewals, expected_renewals, fpt_empirical_cdf, fpt_gamma_spec,
    gamma_cdf, paper_literal_cdf, truncated_mean, GammaSpec, RenewalSeriesConfig,
};
pub use process::{demand_at, period_increments, sample_path, ProcessParams, SamplePath};
