//! Closed-form expected inventory and expected total cost of the
//! `(x - a, Q)` reorder-point policy, plus curves and sweeps built on it.
//!
//! The shortage term is taken as zero: the analytical cost is ordering plus
//! signed holding. The Monte Carlo oracle in [`crate::mc`] measures the real
//! shortage so the size of that approximation stays visible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::passage::{expected_integrated_renewals, expected_renewals, RenewalSeriesConfig};
use crate::process::ProcessParams;

/// Initial stock `x0`, drawdown `a` (reorder point `x0 - a`), order size `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyParams {
    pub x0: f64,
    pub a: f64,
    pub q: f64,
}

impl PolicyParams {
    pub fn new(x0: f64, a: f64, q: f64) -> Result<Self> {
        let p = Self { x0, a, q };
        p.validate()?;
        Ok(p)
    }

    /// Policy from a reorder level `r` instead of a drawdown.
    pub fn from_reorder_point(x0: f64, reorder_point: f64, q: f64) -> Result<Self> {
        Self::new(x0, x0 - reorder_point, q)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.x0 > 0.0, || format!("initial stock must be positive, got {}", self.x0))?;
        ensure(self.q > 0.0, || format!("order quantity must be positive, got {}", self.q))?;
        ensure(self.a > 0.0 && self.a < self.x0, || {
            format!("need 0 < a < x0, got a={} x0={}", self.a, self.x0)
        })
    }

    pub fn reorder_point(&self) -> f64 {
        self.x0 - self.a
    }
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            x0: 100.0,
            a: 50.0,
            q: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingMode {
    /// `C_o` is charged per unit ordered, so each order costs `C_o Q`.
    #[serde(rename = "per_unit_times_Q", alias = "per_unit_times_q")]
    PerUnitTimesQ,
    /// `C_o` is charged once per order.
    PerOrder,
}

impl OrderingMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderingMode::PerUnitTimesQ => "per_unit_times_Q",
            OrderingMode::PerOrder => "per_order",
        }
    }

    /// Cost of `orders` replenishments of size `q`.
    pub fn charge(&self, c_o: f64, q: f64, orders: f64) -> f64 {
        match self {
            OrderingMode::PerUnitTimesQ => q * (c_o * orders),
            OrderingMode::PerOrder => c_o * orders,
        }
    }
}

impl std::str::FromStr for OrderingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_unit_times_Q" | "per_unit_times_q" => Ok(OrderingMode::PerUnitTimesQ),
            "per_order" => Ok(OrderingMode::PerOrder),
            other => Err(Error::InvalidParameter(format!("unknown ordering mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    pub c_o: f64,
    pub c_h: f64,
    pub c_so: f64,
    pub ordering_mode: OrderingMode,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            c_o: 5.0,
            c_h: 1.0,
            c_so: 10.0,
            ordering_mode: OrderingMode::PerUnitTimesQ,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.c_o >= 0.0 && self.c_h >= 0.0 && self.c_so >= 0.0, || {
            format!(
                "costs must be nonnegative, got c_o={} c_h={} c_so={}",
                self.c_o, self.c_h, self.c_so
            )
        })?;
        if let Some(w) = self.ordering_warning() {
            log::warn!("{w}");
        }
        Ok(())
    }

    /// Soft check of the usual cost ordering `c_h <= c_o <= c_so`.
    pub fn ordering_warning(&self) -> Option<String> {
        if self.c_h <= self.c_o && self.c_o <= self.c_so {
            None
        } else {
            Some(format!(
                "costs do not satisfy c_h <= c_o <= c_so (c_h={}, c_o={}, c_so={})",
                self.c_h, self.c_o, self.c_so
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub t: f64,
    pub ordering: f64,
    pub holding: f64,
    pub shortage: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(t: f64, ordering: f64, holding: f64, shortage: f64) -> Self {
        Self {
            t,
            ordering,
            holding,
            shortage,
            total: ordering + holding + shortage,
        }
    }

    pub fn zero(t: f64) -> Self {
        Self::new(t, 0.0, 0.0, 0.0)
    }
}

/// Expected cost over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostCurve {
    pub grid: Vec<f64>,
    pub points: Vec<CostBreakdown>,
    /// Expected inventory at each grid point.
    pub inventory: Vec<f64>,
}

impl CostCurve {
    /// Grid points where the expected inventory came out negative.
    pub fn negative_inventory_times(&self) -> Vec<f64> {
        self.grid
            .iter()
            .zip(&self.inventory)
            .filter(|(_, &x)| x < 0.0)
            .map(|(&t, _)| t)
            .collect()
    }
}

/// `E[X_t] = x0 - (mu + alpha lambda) t + Q E[R_t]`.
pub fn expected_inventory(
    params: &ProcessParams,
    policy: &PolicyParams,
    t: f64,
    cfg: &RenewalSeriesConfig,
) -> Result<f64> {
    policy.validate()?;
    let renewals = expected_renewals(params, policy, t, cfg)?;
    Ok(policy.x0 - params.mean_rate() * t + policy.q * renewals)
}

/// Expected ordering and holding cost accumulated over `[0, t]`, shortage
/// taken as zero.
pub fn expected_total_cost(
    params: &ProcessParams,
    policy: &PolicyParams,
    costs: &CostParams,
    t: f64,
    cfg: &RenewalSeriesConfig,
) -> Result<CostBreakdown> {
    policy.validate()?;
    costs.validate()?;
    let renewals = expected_renewals(params, policy, t, cfg)?;
    let integrated = expected_integrated_renewals(params, policy, t, cfg)?;
    let ordering = costs.ordering_mode.charge(costs.c_o, policy.q, renewals);
    let holding = costs.c_h * policy.x0 * t - costs.c_h * 0.5 * t * t * params.mean_rate()
        + costs.c_h * policy.q * integrated;
    Ok(CostBreakdown::new(t, ordering, holding, 0.0))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    ensure(!grid.is_empty(), || "time grid is empty".into())?;
    ensure(grid.iter().all(|&t| t >= 0.0), || "time grid has negative times".into())?;
    ensure(grid.windows(2).all(|w| w[0] < w[1]), || {
        "time grid must be strictly increasing".into()
    })
}

/// `n + 1` evenly spaced points from `start` to `end`.
pub fn linear_grid(start: f64, end: f64, steps: usize) -> Vec<f64> {
    if steps == 0 || end <= start {
        return vec![start];
    }
    let dt = (end - start) / steps as f64;
    (0..=steps).map(|i| start + dt * i as f64).collect()
}

pub fn cost_curve(
    params: &ProcessParams,
    policy: &PolicyParams,
    costs: &CostParams,
    grid: &[f64],
    cfg: &RenewalSeriesConfig,
) -> Result<CostCurve> {
    check_grid(grid)?;
    let evaluated: Result<Vec<(CostBreakdown, f64)>> = grid
        .par_iter()
        .map(|&t| {
            Ok((
                expected_total_cost(params, policy, costs, t, cfg)?,
                expected_inventory(params, policy, t, cfg)?,
            ))
        })
        .collect();
    let (points, inventory) = evaluated?.into_iter().unzip();
    Ok(CostCurve {
        grid: grid.to_vec(),
        points,
        inventory,
    })
}

/// Time and value of the largest total on the curve; earliest time wins ties.
pub fn argmax_time(curve: &CostCurve) -> Result<(f64, f64)> {
    let mut best: Option<&CostBreakdown> = None;
    for p in &curve.points {
        if best.map_or(true, |b| p.total > b.total) {
            best = Some(p);
        }
    }
    best.map(|b| (b.t, b.total))
        .ok_or_else(|| Error::InvalidParameter("empty cost curve".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub q: f64,
    pub costs: CostParams,
    pub breakdown: CostBreakdown,
}

/// Cross product of `a_list x q_list x costs_list x grid`, in that
/// lexicographic order.
pub fn sweep(
    params: &ProcessParams,
    x0: f64,
    costs_list: &[CostParams],
    a_list: &[f64],
    q_list: &[f64],
    grid: &[f64],
    cfg: &RenewalSeriesConfig,
) -> Result<Vec<SweepRow>> {
    ensure(
        !costs_list.is_empty() && !a_list.is_empty() && !q_list.is_empty(),
        || "sweep lists must be non-empty".into(),
    )?;
    check_grid(grid)?;
    let mut cells = Vec::new();
    for &a in a_list {
        for &q in q_list {
            for costs in costs_list {
                for &t in grid {
                    cells.push((a, q, *costs, t));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(a, q, costs, t)| {
            let policy = PolicyParams::new(x0, a, q)?;
            Ok(SweepRow {
                a,
                q,
                costs,
                breakdown: expected_total_cost(params, &policy, &costs, t, cfg)?,
            })
        })
        .collect()
}
