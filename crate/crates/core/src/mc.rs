//! Event-driven Monte Carlo of the controlled inventory `X_t = x - D_t + Q R_t`.
//!
//! Orders fire the instant cumulative demand reaches `a + (n - 1) Q` and
//! arrive immediately. Between events inventory falls with slope `-mu`, so
//! every time integral is evaluated exactly segment by segment.

use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{CostBreakdown, CostParams, PolicyParams};
use crate::error::{ensure, Error, Result};
use crate::process::{rng_from_seed, ProcessParams};
use crate::stats::mean_stderr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Jump,
    Order,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Jump => "jump",
            EventKind::Order => "order",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub inventory_after: f64,
}

impl PathMetrics {
    /// Accumulates a drift-only stretch of length `len` starting at
    /// inventory `start`; returns the level at its end.
    fn add_segment(&mut self, mu: f64, len: f64, start: f64) -> f64 {
        let end = start - mu * len;
        self.integrated_orders += self.orders * len;
        self.integrated_inventory += 0.5 * (start + end) * len;
        self.positive_inventory += positive_area(start, end, len);
        self.backorders += positive_area(-start, -end, len);
        self.went_negative |= end < 0.0;
        end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub events: Vec<Event>,
    pub policy: PolicyParams,
    pub params: ProcessParams,
    pub horizon: f64,
    pub seed: u64,
}

/// Per-path quantities measured at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathMetrics {
    pub orders: f64,
    pub inventory: f64,
    /// `int_0^t R_s ds`
    pub integrated_orders: f64,
    /// `int_0^t X_s ds` (signed)
    pub integrated_inventory: f64,
    /// `int_0^t max(X_s, 0) ds`
    pub positive_inventory: f64,
    /// `int_0^t max(-X_s, 0) ds`
    pub backorders: f64,
    pub went_negative: bool,
}

pub fn simulate(params: &ProcessParams, policy: &PolicyParams, horizon: f64, seed: u64) -> Result<Trajectory> {
    params.validate()?;
    policy.validate()?;
    ensure(horizon > 0.0 && horizon.is_finite(), || {
        format!("horizon must be positive, got {horizon}")
    })?;
    let exp = Exp::new(params.lambda).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = rng_from_seed(seed);

    let inventory = |t: f64, jumps: f64, orders: f64| {
        policy.x0 - (params.mu * t + params.alpha * jumps) + policy.q * orders
    };

    let mut events = Vec::new();
    let mut now = 0.0;
    let mut jumps = 0.0_f64;
    let mut orders = 0.0_f64;
    let mut threshold = policy.a;
    loop {
        let next_jump = now + exp.sample(&mut rng);
        let limit = next_jump.min(horizon);
        loop {
            let hit = (threshold - params.alpha * jumps) / params.mu;
            if hit > limit {
                break;
            }
            orders += 1.0;
            threshold += policy.q;
            events.push(Event {
                t: hit,
                kind: EventKind::Order,
                inventory_after: inventory(hit, jumps, orders),
            });
        }
        if next_jump >= horizon {
            break;
        }
        now = next_jump;
        jumps += 1.0;
        events.push(Event {
            t: now,
            kind: EventKind::Jump,
            inventory_after: inventory(now, jumps, orders),
        });
        // A single jump may clear several thresholds when Q < alpha.
        while params.mu * now + params.alpha * jumps >= threshold {
            orders += 1.0;
            threshold += policy.q;
            events.push(Event {
                t: now,
                kind: EventKind::Order,
                inventory_after: inventory(now, jumps, orders),
            });
        }
    }
    Ok(Trajectory {
        events,
        policy: *policy,
        params: *params,
        horizon,
        seed,
    })
}

/// Integral over a segment of length `len` of `max(v, 0)` where `v` runs
/// linearly from `v0` to `v1`.
fn positive_area(v0: f64, v1: f64, len: f64) -> f64 {
    if v0 >= 0.0 && v1 >= 0.0 {
        0.5 * (v0 + v1) * len
    } else if v0 <= 0.0 && v1 <= 0.0 {
        0.0
    } else {
        let (hi, lo) = if v0 > 0.0 { (v0, v1) } else { (v1, v0) };
        0.5 * hi * len * hi / (hi - lo)
    }
}

impl Trajectory {
    pub fn order_count(&self) -> usize {
        self.events.iter().filter(|e| e.kind == EventKind::Order).count()
    }

    /// Exact path functionals on `[0, t]`, `t <= horizon`.
    pub fn metrics_at(&self, t: f64) -> PathMetrics {
        let mut m = PathMetrics::default();
        let mut prev_t = 0.0;
        let mut level = self.policy.x0;
        for ev in self.events.iter().take_while(|e| e.t <= t) {
            m.add_segment(self.params.mu, ev.t - prev_t, level);
            if ev.kind == EventKind::Order {
                m.orders += 1.0;
            }
            level = ev.inventory_after;
            m.went_negative |= level < 0.0;
            prev_t = ev.t;
        }
        m.inventory = m.add_segment(self.params.mu, t - prev_t, level);
        m
    }

    /// Inventory `x - D_t + Q R_t` rebuilt from the event log at time `t`.
    pub fn inventory_at(&self, t: f64) -> f64 {
        self.metrics_at(t).inventory
    }

    /// `t,kind,inventory`, starting with the initial stock at time 0.
    pub fn to_csv(&self) -> String {
        let mut out = format!("t,kind,inventory\n0,start,{}\n", self.policy.x0);
        for e in &self.events {
            out.push_str(&format!("{},{},{}\n", e.t, e.kind.as_str(), e.inventory_after));
        }
        out
    }
}

fn breakdown(m: &PathMetrics, policy: &PolicyParams, costs: &CostParams, t: f64) -> CostBreakdown {
    CostBreakdown::new(
        t,
        costs.ordering_mode.charge(costs.c_o, policy.q, m.orders),
        costs.c_h * m.positive_inventory,
        costs.c_so * m.backorders,
    )
}

/// Realized cost on `[0, t]`: holding on stock on hand, shortage on backorders.
pub fn realized_cost_until(traj: &Trajectory, costs: &CostParams, t: f64) -> CostBreakdown {
    breakdown(&traj.metrics_at(t), &traj.policy, costs, t)
}

/// Realized cost over the whole trajectory horizon.
pub fn realized_cost(traj: &Trajectory, costs: &CostParams) -> CostBreakdown {
    realized_cost_until(traj, costs, traj.horizon)
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn of(xs: &[f64]) -> Self {
        let (mean, stderr) = mean_stderr(xs);
        Self { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub n_paths: usize,
    pub t: f64,
    pub mean_total: f64,
    pub stderr_total: f64,
    pub ordering: Estimate,
    pub holding: Estimate,
    pub shortage: Estimate,
    pub mean_orders: f64,
    pub stderr_orders: f64,
    /// `X_t`
    pub inventory: Estimate,
    /// `int_0^t R_s ds`
    pub integrated_orders: Estimate,
    /// Ordering plus holding on signed inventory, no shortage: the quantity
    /// the closed-form expected cost approximates.
    pub shortage_free_total: Estimate,
    /// Fraction of paths whose inventory was ever negative on `[0, t]`.
    pub shortage_fraction: f64,
}

/// Aggregates per-path metrics in index order.
pub fn summarize_metrics(
    metrics: &[PathMetrics],
    policy: &PolicyParams,
    costs: &CostParams,
    t: f64,
) -> Result<SimSummary> {
    ensure(metrics.len() >= 2, || {
        format!("need at least 2 paths for a standard error, got {}", metrics.len())
    })?;
    let col = |f: &dyn Fn(&PathMetrics) -> f64| metrics.iter().map(f).collect::<Vec<f64>>();
    let costs_per_path: Vec<CostBreakdown> =
        metrics.iter().map(|m| breakdown(m, policy, costs, t)).collect();
    let total = Estimate::of(&costs_per_path.iter().map(|b| b.total).collect::<Vec<_>>());
    let orders = Estimate::of(&col(&|m| m.orders));
    let shortage_free = col(&|m| {
        costs.ordering_mode.charge(costs.c_o, policy.q, m.orders) + costs.c_h * m.integrated_inventory
    });
    let negative = metrics.iter().filter(|m| m.went_negative).count();
    Ok(SimSummary {
        n_paths: metrics.len(),
        t,
        mean_total: total.mean,
        stderr_total: total.stderr,
        ordering: Estimate::of(&costs_per_path.iter().map(|b| b.ordering).collect::<Vec<_>>()),
        holding: Estimate::of(&costs_per_path.iter().map(|b| b.holding).collect::<Vec<_>>()),
        shortage: Estimate::of(&costs_per_path.iter().map(|b| b.shortage).collect::<Vec<_>>()),
        mean_orders: orders.mean,
        stderr_orders: orders.stderr,
        inventory: Estimate::of(&col(&|m| m.inventory)),
        integrated_orders: Estimate::of(&col(&|m| m.integrated_orders)),
        shortage_free_total: Estimate::of(&shortage_free),
        shortage_fraction: negative as f64 / metrics.len() as f64,
    })
}

/// Summaries at several times from one batch of paths simulated to the
/// latest time. Path `i` uses seed `base_seed + i`.
pub fn mc_summary_at(
    params: &ProcessParams,
    policy: &PolicyParams,
    costs: &CostParams,
    times: &[f64],
    n_paths: usize,
    base_seed: u64,
) -> Result<Vec<SimSummary>> {
    ensure(n_paths >= 2, || format!("need at least 2 paths, got {n_paths}"))?;
    ensure(!times.is_empty() && times.iter().all(|&t| t > 0.0), || {
        "summary times must be positive".into()
    })?;
    costs.validate()?;
    let horizon = times.iter().cloned().fold(0.0, f64::max);
    let per_path: Vec<Vec<PathMetrics>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let traj = simulate(params, policy, horizon, base_seed.wrapping_add(i as u64))?;
            Ok(times.iter().map(|&t| traj.metrics_at(t)).collect())
        })
        .collect::<Result<_>>()?;
    times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let col: Vec<PathMetrics> = per_path.iter().map(|m| m[k]).collect();
            summarize_metrics(&col, policy, costs, t)
        })
        .collect()
}

pub fn mc_summary(
    params: &ProcessParams,
    policy: &PolicyParams,
    costs: &CostParams,
    horizon: f64,
    n_paths: usize,
    base_seed: u64,
) -> Result<SimSummary> {
    Ok(mc_summary_at(params, policy, costs, &[horizon], n_paths, base_seed)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::OrderingMode;
    use crate::process::sample_path;

    fn default_setup() -> (ProcessParams, PolicyParams, CostParams) {
        (ProcessParams::default(), PolicyParams::default(), CostParams::default())
    }

    #[test]
    fn drift_only_orders_every_ten() {
        let p = ProcessParams::new(5.0, 10.0, 1e-12).unwrap();
        let pol = PolicyParams::default();
        let traj = simulate(&p, &pol, 35.0, 1).unwrap();
        let times: Vec<f64> = traj.events.iter().map(|e| e.t).collect();
        assert_eq!(times, vec![10.0, 20.0, 30.0]);
        assert!(traj.events.iter().all(|e| e.kind == EventKind::Order));
        assert_eq!(traj.events[0].inventory_after, 100.0);
    }

    #[test]
    fn orders_match_thresholds_below_final_demand() {
        let (p, pol, _) = default_setup();
        for seed in 0..200 {
            let traj = simulate(&p, &pol, 10.0, seed).unwrap();
            let path = sample_path(p, 10.0, seed).unwrap();
            let d = p.mu * 10.0 + p.alpha * path.jump_times.len() as f64;
            let expected = if d >= pol.a { ((d - pol.a) / pol.q).floor() as usize + 1 } else { 0 };
            assert_eq!(traj.order_count(), expected, "seed {seed}");
        }
    }

    #[test]
    fn pathwise_balance_at_events() {
        let (p, _, _) = default_setup();
        // Q < alpha so single jumps can trigger several orders at once.
        let pol = PolicyParams::new(100.0, 20.0, 4.0).unwrap();
        for seed in 0..50 {
            let traj = simulate(&p, &pol, 10.0, seed).unwrap();
            let path = sample_path(p, 10.0, seed).unwrap();
            let mut orders = 0.0;
            for (i, e) in traj.events.iter().enumerate() {
                if e.kind == EventKind::Order {
                    orders += 1.0;
                }
                let demand = p.mu * e.t + p.alpha * path.jumps_until(e.t) as f64;
                assert_eq!(e.inventory_after, pol.x0 - demand + pol.q * orders);
                // Once all orders at this instant fired, demand is below the next threshold.
                if traj.events.get(i + 1).map_or(true, |n| n.t > e.t) {
                    assert!(demand < pol.a + orders * pol.q);
                }
            }
        }
    }

    #[test]
    fn zero_event_holding_is_trapezoid() {
        let p = ProcessParams::new(5.0, 10.0, 1e-12).unwrap();
        let pol = PolicyParams::default();
        let costs = CostParams { c_o: 0.0, c_h: 1.0, c_so: 10.0, ordering_mode: OrderingMode::PerOrder };
        let traj = simulate(&p, &pol, 8.0, 0).unwrap();
        assert!(traj.events.is_empty());
        for &t in &[1.0, 4.0, 8.0] {
            let b = realized_cost_until(&traj, &costs, t);
            assert!((b.holding - (100.0 * t - 2.5 * t * t)).abs() < 1e-9);
            assert_eq!(b.shortage, 0.0);
        }
    }

    #[test]
    fn shortage_integral_on_crossing_segment() {
        assert_eq!(positive_area(4.0, -4.0, 2.0), 2.0);
        assert_eq!(positive_area(-4.0, 4.0, 2.0), 2.0);
        assert_eq!(positive_area(-1.0, -3.0, 2.0), 0.0);
        // Starting at 10 and falling at slope 5 for 4 units: 10 above, 10 below.
        let m = {
            let traj = Trajectory {
                events: vec![],
                policy: PolicyParams { x0: 10.0, a: 5.0, q: 1.0 },
                params: ProcessParams::default(),
                horizon: 4.0,
                seed: 0,
            };
            traj.metrics_at(4.0)
        };
        assert!((m.positive_inventory - 10.0).abs() < 1e-12);
        assert!((m.backorders - 10.0).abs() < 1e-12);
        assert!((m.integrated_inventory - 0.0).abs() < 1e-12);
        assert!(m.went_negative);
    }

    #[test]
    fn summary_stderr_zero_for_identical_paths() {
        let (p, pol, c) = default_setup();
        let traj = simulate(&p, &pol, 5.0, 9).unwrap();
        let m = traj.metrics_at(5.0);
        let s = summarize_metrics(&[m, m], &pol, &c, 5.0).unwrap();
        assert_eq!(s.stderr_total, 0.0);
        assert_eq!(s.stderr_orders, 0.0);
        assert!(summarize_metrics(&[m], &pol, &c, 5.0).is_err());
        assert!(mc_summary(&p, &pol, &c, 5.0, 1, 0).is_err());
    }

    #[test]
    fn summary_mean_orders_and_replay() {
        let (p, pol, c) = default_setup();
        let s = mc_summary(&p, &pol, &c, 10.0, 500, 77).unwrap();
        let direct: f64 = (0..500)
            .map(|i| simulate(&p, &pol, 10.0, 77 + i).unwrap().order_count() as f64)
            .sum::<f64>()
            / 500.0;
        assert!((s.mean_orders - direct).abs() < 1e-12);
        assert_eq!(s, mc_summary(&p, &pol, &c, 10.0, 500, 77).unwrap());
        assert!((0.0..=1.0).contains(&s.shortage_fraction));
        assert!((s.mean_total - (s.ordering.mean + s.holding.mean + s.shortage.mean)).abs() < 1e-9);
    }

    #[test]
    fn trajectory_csv_header() {
        let (p, pol, _) = default_setup();
        let csv = simulate(&p, &pol, 3.0, 1).unwrap().to_csv();
        assert!(csv.starts_with("t,kind,inventory\n0,start,100\n"));
    }
}
