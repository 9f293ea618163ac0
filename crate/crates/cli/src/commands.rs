//! The subcommands. Each writes its files into the output directory and
//! returns a [`Report`] whose lines go to standard output.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use reorder_core::cost::linear_grid;
use reorder_core::experiment::{evaluate_spec, generate_runs, table_monotonicity_violations};
use reorder_core::mc::mc_summary_at;
use reorder_core::passage::fpt_samples;
use reorder_core::stats::{empirical_cdf, ks_statistic, ks_two_sample, linear_fit};
use reorder_core::{
    argmax_time, cost_curve, expected_integrated_renewals, expected_inventory, expected_renewals,
    expected_total_cost, fpt_gamma_spec, gamma_cdf, paper_literal_cdf, run_table_experiment,
    sample_path, simulate, sweep, table1_grid, CostBreakdown, CostParams, PolicyParams,
    ProcessParams, TableSpec,
};

use crate::config::RunConfig;
use crate::svg::{LineChart, Series};

pub const COST_HEADER: [&str; 11] =
    ["a", "Q", "c_h", "c_o", "c_so", "mode", "t", "ordering", "holding", "shortage", "total"];
pub const FPT_HEADER: [&str; 7] = ["n", "shape", "rate", "t", "gamma_cdf", "paper_literal", "empirical"];
pub const TABLE_HEADER: [&str; 9] = [
    "R", "Q", "C_h", "C_o", "C_so", "mean_total", "stderr_total", "mean_orders", "stockout_rate",
];
pub const VALIDATION_HEADER: [&str; 7] =
    ["quantity", "t", "analytical", "mc_mean", "mc_stderr", "tolerance", "pass"];

/// What a command did: printable lines, written files, and whether every
/// check it ran passed.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub ok: bool,
}

impl Report {
    fn new() -> Self {
        Self { ok: true, ..Self::default() }
    }

    fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }
}

struct Out<'a> {
    dir: &'a Path,
}

impl Out<'_> {
    fn csv(&self, report: &mut Report, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        report.files.push(path);
        Ok(())
    }

    fn text(&self, report: &mut Report, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        report.files.push(path);
        Ok(())
    }
}

fn out_dir(dir: &Path) -> Result<Out<'_>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(Out { dir })
}

fn cost_row(policy: &PolicyParams, costs: &CostParams, b: &CostBreakdown) -> Vec<String> {
    vec![
        policy.a.to_string(),
        policy.q.to_string(),
        costs.c_h.to_string(),
        costs.c_o.to_string(),
        costs.c_so.to_string(),
        costs.ordering_mode.as_str().to_string(),
        b.t.to_string(),
        b.ordering.to_string(),
        b.holding.to_string(),
        b.shortage.to_string(),
        b.total.to_string(),
    ]
}

fn total_series(name: String, points: &[CostBreakdown]) -> Series {
    Series { name, points: points.iter().map(|b| (b.t, b.total)).collect() }
}

pub fn expected_cost(cfg: &RunConfig, dir: &Path) -> Result<Report> {
    let out = out_dir(dir)?;
    let mut report = Report::new();
    let grid = cfg.grid.points();
    let curve = cost_curve(&cfg.process, &cfg.policy, &cfg.costs, &grid, &cfg.series)
        .context("expected cost curve")?;
    let rows: Vec<Vec<String>> = curve.points.iter().map(|b| cost_row(&cfg.policy, &cfg.costs, b)).collect();
    out.csv(&mut report, "expected_cost.csv", &COST_HEADER, &rows)?;
    let inv_rows: Vec<Vec<String>> = curve
        .grid
        .iter()
        .zip(&curve.inventory)
        .map(|(t, x)| vec![t.to_string(), x.to_string(), (*x < 0.0).to_string()])
        .collect();
    out.csv(&mut report, "expected_inventory.csv", &["t", "expected_inventory", "negative"], &inv_rows)?;

    let chart = LineChart {
        title: format!("Expected total cost (a={}, Q={})", cfg.policy.a, cfg.policy.q),
        x_label: "t".into(),
        y_label: "cost".into(),
        series: vec![
            total_series("total".into(), &curve.points),
            Series { name: "ordering".into(), points: curve.points.iter().map(|b| (b.t, b.ordering)).collect() },
            Series { name: "holding".into(), points: curve.points.iter().map(|b| (b.t, b.holding)).collect() },
        ],
    };
    out.text(&mut report, "expected_cost.svg", &chart.render())?;

    let (t_star, total_star) = argmax_time(&curve)?;
    report.say(format!("argmax: t*={t_star} total*={total_star}"));
    let negative = curve.negative_inventory_times();
    if let Some(first) = negative.first() {
        report.say(format!(
            "warning: expected inventory negative at {} grid points (first at t={first})",
            negative.len()
        ));
    }
    Ok(report)
}

pub fn sweep_cmd(cfg: &RunConfig, dir: &Path) -> Result<Report> {
    let out = out_dir(dir)?;
    let mut report = Report::new();
    let grid = cfg.grid.points();
    let costs_list: Vec<CostParams> =
        cfg.sweep.c_o_list.iter().map(|&c_o| CostParams { c_o, ..cfg.costs }).collect();
    let rows = sweep(
        &cfg.process,
        cfg.policy.x0,
        &costs_list,
        &cfg.sweep.a_list,
        &cfg.sweep.q_list,
        &grid,
        &cfg.series,
    )?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let policy = PolicyParams { x0: cfg.policy.x0, a: r.a, q: r.q };
            cost_row(&policy, &r.costs, &r.breakdown)
        })
        .collect();
    out.csv(&mut report, "sweep.csv", &COST_HEADER, &csv_rows)?;

    let curve_for = |policy: PolicyParams, costs: CostParams| -> Result<Vec<CostBreakdown>> {
        Ok(cost_curve(&cfg.process, &policy, &costs, &grid, &cfg.series)?.points)
    };
    let mut fixed_aq = Vec::new();
    for costs in &costs_list {
        fixed_aq.push(total_series(format!("C_o={}", costs.c_o), &curve_for(cfg.policy, *costs)?));
    }
    let mut fixed_q_co = Vec::new();
    for &a in &cfg.sweep.a_list {
        let policy = PolicyParams::new(cfg.policy.x0, a, cfg.policy.q)?;
        fixed_q_co.push(total_series(format!("a={a}"), &curve_for(policy, cfg.costs)?));
    }
    let mut fixed_a_co = Vec::new();
    for &q in &cfg.sweep.q_list {
        let policy = PolicyParams::new(cfg.policy.x0, cfg.policy.a, q)?;
        fixed_a_co.push(total_series(format!("Q={q}"), &curve_for(policy, cfg.costs)?));
    }
    let charts = [
        ("sweep_fixed_a_q.svg", format!("Fixed a={}, Q={}", cfg.policy.a, cfg.policy.q), fixed_aq),
        ("sweep_fixed_q_co.svg", format!("Fixed Q={}, C_o={}", cfg.policy.q, cfg.costs.c_o), fixed_q_co),
        ("sweep_fixed_a_co.svg", format!("Fixed a={}, C_o={}", cfg.policy.a, cfg.costs.c_o), fixed_a_co),
    ];
    for (name, title, series) in charts {
        let chart = LineChart { title, x_label: "t".into(), y_label: "expected total cost".into(), series };
        out.text(&mut report, name, &chart.render())?;
    }
    report.say(format!("sweep: {} rows", rows.len()));
    Ok(report)
}

pub fn simulate_cmd(cfg: &RunConfig, dir: &Path) -> Result<Report> {
    let out = out_dir(dir)?;
    let mut report = Report::new();
    let seed = cfg.mc.base_seed;
    let horizon = cfg.mc.horizon;
    let traj = simulate(&cfg.process, &cfg.policy, horizon, seed)?;
    out.text(&mut report, "trajectory.csv", &traj.to_csv())?;
    let path = sample_path(cfg.process, horizon, seed)?;
    out.text(&mut report, "path.csv", &path.to_csv())?;
    out.text(&mut report, "path.json", &format!("{}\n", path.sidecar_json()))?;

    let summary = mc_summary_at(&cfg.process, &cfg.policy, &cfg.costs, &[horizon], cfg.mc.n_paths, seed)?
        .remove(0);
    out.text(&mut report, "summary.json", &format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
    report.say(format!(
        "simulated {} paths to t={horizon}: mean total {} (stderr {}), mean orders {}, shortage fraction {}",
        summary.n_paths, summary.mean_total, summary.stderr_total, summary.mean_orders, summary.shortage_fraction
    ));
    Ok(report)
}

/// One analytical-versus-Monte-Carlo comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub quantity: &'static str,
    pub t: f64,
    pub analytical: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(quantity: &'static str, t: f64, analytical: f64, mc_mean: f64, mc_stderr: f64, slack: f64) -> Self {
        let tolerance = 3.0 * mc_stderr + slack;
        Self {
            quantity,
            t,
            analytical,
            mc_mean,
            mc_stderr,
            tolerance,
            pass: (analytical - mc_mean).abs() <= tolerance,
        }
    }
}

/// Analytical `E[R_t]`, `E[X_t]`, `E[int R]` and total cost against Monte
/// Carlo means at each validation time (3 standard errors; the total also
/// gets the measured mean shortage cost as slack).
pub fn validation_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let analytical_process = ProcessParams {
        lambda: cfg.process.lambda * cfg.validate.analytical_lambda_scale,
        ..cfg.process
    };
    let times = &cfg.validate.times;
    let summaries = mc_summary_at(&cfg.process, &cfg.policy, &cfg.costs, times, cfg.mc.n_paths, cfg.mc.base_seed)?;
    let mut checks = Vec::new();
    for (s, &t) in summaries.iter().zip(times) {
        let (p, pol, c) = (&analytical_process, &cfg.policy, &cfg.series);
        checks.push(Check::new("renewals", t, expected_renewals(p, pol, t, c)?, s.mean_orders, s.stderr_orders, 0.0));
        checks.push(Check::new(
            "inventory",
            t,
            expected_inventory(p, pol, t, c)?,
            s.inventory.mean,
            s.inventory.stderr,
            0.0,
        ));
        checks.push(Check::new(
            "integrated_renewals",
            t,
            expected_integrated_renewals(p, pol, t, c)?,
            s.integrated_orders.mean,
            s.integrated_orders.stderr,
            0.0,
        ));
        checks.push(Check::new(
            "total_cost",
            t,
            expected_total_cost(p, pol, &cfg.costs, t, c)?.total,
            s.mean_total,
            s.stderr_total,
            s.shortage.mean.abs(),
        ));
    }
    Ok(checks)
}

pub fn validate_cmd(cfg: &RunConfig, dir: &Path) -> Result<Report> {
    let out = out_dir(dir)?;
    let mut report = Report::new();
    if cfg.mc.n_paths < 1000 {
        report.say(format!(
            "warning: {} paths is too few for a meaningful 3-stderr comparison (use >= 1000)",
            cfg.mc.n_paths
        ));
    }
    let checks = validation_checks(cfg)?;
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.quantity.to_string(),
                c.t.to_string(),
                c.analytical.to_string(),
                c.mc_mean.to_string(),
                c.mc_stderr.to_string(),
                c.tolerance.to_string(),
                c.pass.to_string(),
            ]
        })
        .collect();
    out.csv(&mut report, "validation.csv", &VALIDATION_HEADER, &rows)?;
    for c in &checks {
        report.say(format!(
            "{:<4} {:<20} t={:<4} analytical={:<14.6} mc={:<14.6} stderr={:<10.6} tol={:.6}",
            if c.pass { "PASS" } else { "FAIL" },
            c.quantity,
            c.t,
            c.analytical,
            c.mc_mean,
            c.mc_stderr,
            c.tolerance
        ));
    }
    report.ok = checks.iter().all(|c| c.pass);
    Ok(report)
}

/// Per-passage diagnostic summary.
#[derive(Debug, Clone, Serialize)]
pub struct FptKs {
    pub n: usize,
    pub shape: f64,
    pub rate: f64,
    /// Sup distance between the gamma CDF and the empirical passage CDF.
    pub ks_gamma: f64,
    /// Sup distance between two independent simulated batches.
    pub ks_batches: f64,
    pub empirical_mean: f64,
    pub gamma_mean: f64,
}

pub fn fpt_diag(cfg: &RunConfig, dir: &Path) -> Result<(Report, Vec<FptKs>)> {
    let out = out_dir(dir)?;
    let mut report = Report::new();
    let grid = linear_grid(cfg.fpt.grid.t_start, cfg.fpt.grid.t_end, cfg.fpt.grid.steps);
    let n_paths = cfg.mc.n_paths;
    let seed = cfg.mc.base_seed;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut series = Vec::new();
    for n in 1..=cfg.fpt.n_max {
        let spec = fpt_gamma_spec(&cfg.process, &cfg.policy, n)?;
        let mut samples = fpt_samples(&cfg.process, &cfg.policy, n, n_paths, seed)?;
        let second = fpt_samples(&cfg.process, &cfg.policy, n, n_paths, seed.wrapping_add(n_paths as u64))?;
        samples.sort_by(f64::total_cmp);
        let empirical = empirical_cdf(&samples, &grid);
        let mut gamma_pts = Vec::with_capacity(grid.len());
        for (&t, &emp) in grid.iter().zip(&empirical) {
            let g = gamma_cdf(&spec, t)?;
            gamma_pts.push((t, g));
            rows.push(vec![
                n.to_string(),
                spec.shape.to_string(),
                spec.rate.to_string(),
                t.to_string(),
                g.to_string(),
                paper_literal_cdf(&spec, t)?.to_string(),
                emp.to_string(),
            ]);
        }
        let ks_gamma = ks_statistic(&samples, |t| gamma_cdf(&spec, t.max(0.0)).unwrap_or(0.0));
        let ks_batches = ks_two_sample(&samples, &second);
        let empirical_mean = samples.iter().sum::<f64>() / samples.len() as f64;
        summary.push(FptKs { n, shape: spec.shape, rate: spec.rate, ks_gamma, ks_batches, empirical_mean, gamma_mean: spec.mean() });
        series.push(Series { name: format!("gamma n={n}"), points: gamma_pts });
        series.push(Series { name: format!("empirical n={n}"), points: grid.iter().cloned().zip(empirical).collect() });
    }
    out.csv(&mut report, "fpt_diag.csv", &FPT_HEADER, &rows)?;
    let ks_rows: Vec<Vec<String>> = summary
        .iter()
        .map(|k| {
            vec![
                k.n.to_string(),
                k.shape.to_string(),
                k.rate.to_string(),
                k.ks_gamma.to_string(),
                k.ks_batches.to_string(),
                k.empirical_mean.to_string(),
                k.gamma_mean.to_string(),
            ]
        })
        .collect();
    out.csv(
        &mut report,
        "fpt_ks.csv",
        &["n", "shape", "rate", "ks_gamma", "ks_batches", "empirical_mean", "gamma_mean"],
        &ks_rows,
    )?;
    let chart = LineChart {
        title: "Passage-time CDF: gamma approximation vs simulation".into(),
        x_label: "t".into(),
        y_label: "P(T_n < t)".into(),
        series,
    };
    out.text(&mut report, "fpt_diag.svg", &chart.render())?;
    for k in &summary {
        report.say(format!(
            "n={} shape={} rate={}: KS(gamma, empirical)={:.4}  KS(batch1, batch2)={:.4}  mean empirical={:.4} gamma={:.4}",
            k.n, k.shape, k.rate, k.ks_gamma, k.ks_batches, k.empirical_mean, k.gamma_mean
        ));
    }
    Ok((report, summary))
}

pub fn table1(cfg: &RunConfig, dir: &Path) -> Result<Report> {
    let out = out_dir(dir)?;
    let mut report = Report::new();
    let rows = run_table_experiment(&cfg.experiment, &table1_grid())?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.spec.r.to_string(),
                r.spec.q.to_string(),
                r.spec.c_h.to_string(),
                r.spec.c_o.to_string(),
                r.spec.c_so.to_string(),
                r.mean_total.to_string(),
                r.stderr_total.to_string(),
                r.mean_orders.to_string(),
                r.stockout_rate.to_string(),
            ]
        })
        .collect();
    out.csv(&mut report, "table1.csv", &TABLE_HEADER, &csv_rows)?;
    let violations = table_monotonicity_violations(&rows);
    if violations.is_empty() {
        report.say(format!("table1: {} rows, monotone in R, Q, C_o and C_so", rows.len()));
    } else {
        report.ok = false;
        for v in &violations {
            report.say(format!("monotonicity violation: {v}"));
        }
    }
    Ok(report)
}

pub fn compare(cfg: &RunConfig, dir: &Path) -> Result<Report> {
    let out = out_dir(dir)?;
    let mut report = Report::new();
    let exp = &cfg.experiment;
    let spec = TableSpec {
        r: cfg.policy.reorder_point(),
        q: cfg.policy.q,
        c_h: cfg.costs.c_h,
        c_o: cfg.costs.c_o,
        c_so: cfg.costs.c_so,
    };
    let runs = generate_runs(exp)?;
    let row = evaluate_spec(&runs, &spec, exp)?;
    let costs = CostParams { ordering_mode: exp.costs.ordering_mode, ..cfg.costs };
    let periods = exp.sim_periods();
    let grid: Vec<f64> = (0..=periods).map(|k| k as f64 * exp.period_length).collect();
    let curve = cost_curve(&cfg.process, &cfg.policy, &costs, &grid, &cfg.series)?;
    let mut arima = vec![0.0];
    arima.extend(&row.mean_cumulative);
    let rows: Vec<Vec<String>> = grid
        .iter()
        .zip(&curve.points)
        .zip(&arima)
        .map(|((t, b), a)| vec![t.to_string(), b.total.to_string(), a.to_string()])
        .collect();
    out.csv(&mut report, "compare.csv", &["t", "analytical_total", "arima_mean_cumulative"], &rows)?;
    let chart = LineChart {
        title: format!("Expected total cost vs ARIMA baseline (a={}, Q={})", cfg.policy.a, cfg.policy.q),
        x_label: "t (periods after the training window)".into(),
        y_label: "cost".into(),
        series: vec![
            total_series("expected (analytical)".into(), &curve.points),
            Series { name: "ARIMA baseline".into(), points: grid.iter().cloned().zip(arima.iter().cloned()).collect() },
        ],
    };
    out.text(&mut report, "compare.svg", &chart.render())?;
    let xs: Vec<f64> = (1..=periods).map(|k| k as f64).collect();
    let (_, slope, r2) = linear_fit(&xs, &row.mean_cumulative);
    report.say(format!(
        "ARIMA baseline over {} series: final mean cost {}, linear fit slope {slope:.3}, R^2 {r2:.5}",
        exp.n_series,
        row.mean_cumulative.last().copied().unwrap_or(0.0)
    ));
    report.say(format!(
        "analytical expected total at t={}: {}",
        grid.last().copied().unwrap_or(0.0),
        curve.points.last().map_or(0.0, |b| b.total)
    ));
    Ok(report)
}
