//! Rolling-forecast reorder-point baseline: demand series from the drifted
//! Poisson process, one-step ARIMA forecasts on a trailing window, and a
//! period-by-period inventory simulation with backorders.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{CostBreakdown, CostParams, OrderingMode, PolicyParams};
use crate::error::{ensure, Error, Result};
use crate::forecast::{rolling_forecast, ArimaSearch};
use crate::process::{period_increments, sample_path, ProcessParams};
use crate::stats::mean_stderr;

/// When the discrete simulation places an order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerRule {
    /// Order when `inventory - forecast <= reorder point`.
    ForecastProjected,
    /// Order when `inventory <= reorder point`; the forecast is ignored.
    OnHand,
}

impl std::str::FromStr for TriggerRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forecast_projected" => Ok(TriggerRule::ForecastProjected),
            "on_hand" => Ok(TriggerRule::OnHand),
            other => Err(Error::InvalidParameter(format!("unknown trigger rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub process: ProcessParams,
    pub n_series: usize,
    pub window: usize,
    /// First simulated period (1-based); must be `window + 1`.
    pub first_period: usize,
    pub last_period: usize,
    pub period_length: f64,
    pub policy: PolicyParams,
    pub costs: CostParams,
    pub trigger: TriggerRule,
    pub search: ArimaSearch,
    pub base_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            process: ProcessParams::default(),
            n_series: 1000,
            window: 12,
            first_period: 13,
            last_period: 50,
            period_length: 1.0,
            policy: PolicyParams::from_reorder_point(100.0, 40.0, 50.0).expect("valid default policy"),
            costs: CostParams {
                c_o: 5.0,
                c_h: 1.0,
                c_so: 10.0,
                ordering_mode: OrderingMode::PerOrder,
            },
            trigger: TriggerRule::OnHand,
            search: ArimaSearch::default(),
            base_seed: 2024,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.process.validate()?;
        self.policy.validate()?;
        self.costs.validate()?;
        ensure(self.n_series >= 1, || "n_series must be at least 1".into())?;
        ensure(self.window >= 1, || "window must be at least 1".into())?;
        ensure(self.first_period == self.window + 1, || {
            format!(
                "simulation must start right after the window (period {}), got {}",
                self.window + 1,
                self.first_period
            )
        })?;
        ensure(self.last_period >= self.first_period, || "empty simulation range".into())?;
        ensure(self.period_length > 0.0, || "period length must be positive".into())
    }

    pub fn sim_periods(&self) -> usize {
        self.last_period - self.first_period + 1
    }
}

/// Outcome of one discrete simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSimResult {
    pub breakdown: CostBreakdown,
    pub orders: usize,
    /// Inventory at the end of each period, after demand.
    pub end_inventory: Vec<f64>,
    /// Cumulative total cost at the end of each period.
    pub cumulative_total: Vec<f64>,
}

impl DiscreteSimResult {
    pub fn backorder_periods(&self) -> usize {
        self.end_inventory.iter().filter(|&&x| x < 0.0).count()
    }
}

/// Per period: maybe order `Q` (arrives at once), subtract actual demand,
/// then charge holding on stock and shortage on backorders.
pub fn reorder_sim_discrete(
    actuals: &[f64],
    forecasts: &[f64],
    policy: &PolicyParams,
    costs: &CostParams,
    trigger: TriggerRule,
) -> Result<DiscreteSimResult> {
    ensure(actuals.len() == forecasts.len(), || {
        format!("{} actuals but {} forecasts", actuals.len(), forecasts.len())
    })?;
    policy.validate()?;
    let reorder_point = policy.reorder_point();
    let mut inventory = policy.x0;
    let (mut ordering, mut holding, mut shortage) = (0.0, 0.0, 0.0);
    let mut orders = 0;
    let mut end_inventory = Vec::with_capacity(actuals.len());
    let mut cumulative_total = Vec::with_capacity(actuals.len());
    for (&demand, &forecast) in actuals.iter().zip(forecasts) {
        let projected = match trigger {
            TriggerRule::ForecastProjected => inventory - forecast,
            TriggerRule::OnHand => inventory,
        };
        if projected <= reorder_point {
            inventory += policy.q;
            orders += 1;
            ordering += costs.ordering_mode.charge(costs.c_o, policy.q, 1.0);
        }
        inventory -= demand;
        holding += costs.c_h * inventory.max(0.0);
        shortage += costs.c_so * (-inventory).max(0.0);
        end_inventory.push(inventory);
        cumulative_total.push(ordering + holding + shortage);
    }
    Ok(DiscreteSimResult {
        breakdown: CostBreakdown::new(actuals.len() as f64, ordering, holding, shortage),
        orders,
        end_inventory,
        cumulative_total,
    })
}

/// One generated demand series with its rolling forecasts for the
/// simulated periods.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRun {
    pub seed: u64,
    pub demand: Vec<f64>,
    pub actuals: Vec<f64>,
    pub forecasts: Vec<f64>,
}

/// Demand series `i` uses seed `base_seed + i`. Forecasts do not depend on
/// the policy, so they are computed once and shared by every table row.
pub fn generate_runs(cfg: &ExperimentConfig) -> Result<Vec<SeriesRun>> {
    cfg.validate()?;
    let horizon = cfg.last_period as f64 * cfg.period_length;
    (0..cfg.n_series)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.base_seed.wrapping_add(i as u64);
            let path = sample_path(cfg.process, horizon, seed)?;
            let demand = period_increments(&path, cfg.period_length)?;
            let forecasts =
                rolling_forecast(&demand, cfg.window, cfg.first_period, cfg.last_period, &cfg.search)?;
            let actuals = demand[cfg.first_period - 1..cfg.last_period].to_vec();
            Ok(SeriesRun { seed, demand, actuals, forecasts })
        })
        .collect()
}

/// One row of the parameter grid: reorder level `r` and costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub r: f64,
    pub q: f64,
    pub c_h: f64,
    pub c_o: f64,
    pub c_so: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub spec: TableSpec,
    pub mean_total: f64,
    pub stderr_total: f64,
    pub mean_orders: f64,
    /// Fraction of simulated periods ending with backorders.
    pub stockout_rate: f64,
    /// Mean cumulative total cost at the end of each simulated period.
    pub mean_cumulative: Vec<f64>,
}

/// The 48-row grid: `R in {40, 50, 60}`, `Q in {50, 60, 110, 120}`,
/// `C_o in {5, 10}`, `C_so in {10, 15}`, `C_h = 1`, listed small-Q block
/// first, then `R`, `Q`, `C_so`, `C_o`.
pub fn table1_grid() -> Vec<TableSpec> {
    let mut rows = Vec::with_capacity(48);
    for q_block in [[50.0, 60.0], [110.0, 120.0]] {
        for r in [40.0, 50.0, 60.0] {
            for q in q_block {
                for c_so in [10.0, 15.0] {
                    for c_o in [5.0, 10.0] {
                        rows.push(TableSpec { r, q, c_h: 1.0, c_o, c_so });
                    }
                }
            }
        }
    }
    rows
}

/// Runs every spec on the same runs and averages.
pub fn evaluate_spec(
    runs: &[SeriesRun],
    spec: &TableSpec,
    cfg: &ExperimentConfig,
) -> Result<TableRow> {
    let policy = PolicyParams::from_reorder_point(cfg.policy.x0, spec.r, spec.q)?;
    let costs = CostParams {
        c_o: spec.c_o,
        c_h: spec.c_h,
        c_so: spec.c_so,
        ordering_mode: cfg.costs.ordering_mode,
    };
    let results: Vec<DiscreteSimResult> = runs
        .iter()
        .map(|run| reorder_sim_discrete(&run.actuals, &run.forecasts, &policy, &costs, cfg.trigger))
        .collect::<Result<_>>()?;
    let totals: Vec<f64> = results.iter().map(|r| r.breakdown.total).collect();
    let (mean_total, stderr_total) = mean_stderr(&totals);
    let n = results.len() as f64;
    let periods = cfg.sim_periods();
    let mut mean_cumulative = vec![0.0; periods];
    for r in &results {
        for (acc, v) in mean_cumulative.iter_mut().zip(&r.cumulative_total) {
            *acc += v;
        }
    }
    mean_cumulative.iter_mut().for_each(|v| *v /= n);
    let backorders: usize = results.iter().map(|r| r.backorder_periods()).sum();
    Ok(TableRow {
        spec: *spec,
        mean_total,
        stderr_total: if results.len() > 1 { stderr_total } else { 0.0 },
        mean_orders: results.iter().map(|r| r.orders as f64).sum::<f64>() / n,
        stockout_rate: backorders as f64 / (n * periods as f64),
        mean_cumulative,
    })
}

pub fn run_table_experiment(cfg: &ExperimentConfig, grid: &[TableSpec]) -> Result<Vec<TableRow>> {
    ensure(!grid.is_empty(), || "parameter grid is empty".into())?;
    let runs = generate_runs(cfg)?;
    grid.par_iter().map(|spec| evaluate_spec(&runs, spec, cfg)).collect()
}

/// Pairs of grid values over which the averaged total must not decrease,
/// per field: reorder level, order quantity (within each block), `C_o`, `C_so`.
const MONOTONE_STEPS: [(&str, f64, f64); 6] = [
    ("R", 40.0, 50.0),
    ("R", 50.0, 60.0),
    ("Q", 50.0, 60.0),
    ("Q", 110.0, 120.0),
    ("C_o", 5.0, 10.0),
    ("C_so", 10.0, 15.0),
];

fn field(spec: &TableSpec, name: &str) -> f64 {
    match name {
        "R" => spec.r,
        "Q" => spec.q,
        "C_o" => spec.c_o,
        _ => spec.c_so,
    }
}

/// Every pair of rows that differ in one field by one of the monotone steps
/// and whose averaged total decreases.
pub fn table_monotonicity_violations(rows: &[TableRow]) -> Vec<String> {
    let mut out = Vec::new();
    for lo in rows {
        for hi in rows {
            for &(name, from, to) in &MONOTONE_STEPS {
                if field(&lo.spec, name) != from || field(&hi.spec, name) != to {
                    continue;
                }
                let others_equal = ["R", "Q", "C_o", "C_so"]
                    .iter()
                    .filter(|&&f| f != name)
                    .all(|f| field(&lo.spec, f) == field(&hi.spec, f))
                    && lo.spec.c_h == hi.spec.c_h;
                if others_equal && hi.mean_total < lo.mean_total {
                    out.push(format!(
                        "{name} {from} -> {to} at {:?}: {} -> {}",
                        lo.spec, lo.mean_total, hi.mean_total
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn costs() -> CostParams {
        CostParams { c_o: 5.0, c_h: 1.0, c_so: 10.0, ordering_mode: OrderingMode::PerOrder }
    }

    #[test]
    fn idle_inventory_only_holds() {
        let policy = PolicyParams::from_reorder_point(100.0, 40.0, 50.0).unwrap();
        let r = reorder_sim_discrete(&[0.0; 5], &[0.0; 5], &policy, &costs(), TriggerRule::ForecastProjected)
            .unwrap();
        assert_eq!(r.orders, 0);
        assert_eq!(r.breakdown.holding, 500.0);
        assert_eq!(r.breakdown.total, 500.0);
    }

    #[test]
    fn big_demand_backorders() {
        let policy = PolicyParams::from_reorder_point(100.0, 40.0, 50.0).unwrap();
        let r = reorder_sim_discrete(&[200.0], &[200.0], &policy, &costs(), TriggerRule::ForecastProjected)
            .unwrap();
        assert_eq!(r.orders, 1);
        assert_eq!(r.end_inventory, vec![-50.0]);
        assert_eq!(r.breakdown.shortage, 500.0);
        assert_eq!(r.breakdown.holding, 0.0);
        assert_eq!(r.breakdown.ordering, 5.0);
    }

    #[test]
    fn inventory_balance() {
        let policy = PolicyParams::from_reorder_point(100.0, 40.0, 50.0).unwrap();
        let actuals = [15.0, 25.0, 5.0, 35.0, 15.0, 45.0, 5.0, 5.0];
        let forecasts = [15.0; 8];
        for trigger in [TriggerRule::ForecastProjected, TriggerRule::OnHand] {
            let r = reorder_sim_discrete(&actuals, &forecasts, &policy, &costs(), trigger).unwrap();
            let mut prev = policy.x0;
            let mut orders = 0;
            for (k, &end) in r.end_inventory.iter().enumerate() {
                let ordered = end - prev + actuals[k];
                assert!(ordered == 0.0 || ordered == policy.q);
                orders += usize::from(ordered > 0.0);
                prev = end;
            }
            assert_eq!(orders, r.orders);
        }
    }

    #[test]
    fn trigger_rules_differ() {
        let policy = PolicyParams::from_reorder_point(100.0, 40.0, 50.0).unwrap();
        // 100 - 70 <= 40 triggers the projected rule only.
        let p = reorder_sim_discrete(&[0.0], &[70.0], &policy, &costs(), TriggerRule::ForecastProjected).unwrap();
        let h = reorder_sim_discrete(&[0.0], &[70.0], &policy, &costs(), TriggerRule::OnHand).unwrap();
        assert_eq!((p.orders, h.orders), (1, 0));
        assert!(reorder_sim_discrete(&[0.0], &[], &policy, &costs(), TriggerRule::OnHand).is_err());
    }

    #[test]
    fn grid_layout() {
        let g = table1_grid();
        assert_eq!(g.len(), 48);
        assert_eq!(g[0], TableSpec { r: 40.0, q: 50.0, c_h: 1.0, c_o: 5.0, c_so: 10.0 });
        assert_eq!(g[1].c_o, 10.0);
        assert_eq!(g[2].c_so, 15.0);
        assert_eq!(g[4].q, 60.0);
        assert_eq!(g[8].r, 50.0);
        assert_eq!(g[24].q, 110.0);
        assert_eq!(g[47], TableSpec { r: 60.0, q: 120.0, c_h: 1.0, c_o: 10.0, c_so: 15.0 });
    }

    #[test]
    fn single_series_row_equals_single_sim() {
        let cfg = ExperimentConfig { n_series: 1, ..ExperimentConfig::default() };
        let spec = table1_grid()[0];
        let rows = run_table_experiment(&cfg, &[spec]).unwrap();
        let run = &generate_runs(&cfg).unwrap()[0];
        let policy = PolicyParams::from_reorder_point(100.0, spec.r, spec.q).unwrap();
        let single =
            reorder_sim_discrete(&run.actuals, &run.forecasts, &policy, &costs(), cfg.trigger).unwrap();
        assert_eq!(rows[0].mean_total, single.breakdown.total);
        assert_eq!(run.actuals.len(), 38);
        assert_eq!(run.demand.len(), 50);
    }

    #[test]
    fn monotonicity_checker() {
        let row = |r: f64, c_o: f64, total: f64| TableRow {
            spec: TableSpec { r, q: 50.0, c_h: 1.0, c_o, c_so: 10.0 },
            mean_total: total,
            stderr_total: 0.0,
            mean_orders: 0.0,
            stockout_rate: 0.0,
            mean_cumulative: vec![],
        };
        let ok = [row(40.0, 5.0, 100.0), row(50.0, 5.0, 120.0), row(40.0, 10.0, 110.0)];
        assert!(table_monotonicity_violations(&ok).is_empty());
        let bad = [row(40.0, 5.0, 100.0), row(50.0, 5.0, 90.0), row(50.0, 10.0, 80.0)];
        assert_eq!(table_monotonicity_violations(&bad).len(), 2);
    }

    #[test]
    fn config_checks() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = ExperimentConfig { first_period: 14, ..ExperimentConfig::default() };
        assert!(bad.validate().is_err());
    }
}
