//! Reorder times as first passages of cumulative demand over the thresholds
//! `a + (n - 1) Q`, their gamma approximation, and the renewal sums built
//! from it.

use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::PolicyParams;
use crate::error::{ensure, Error, Result};
use crate::process::{rng_from_seed, ProcessParams};
use crate::quadrature;
use crate::special::{gamma_p, ln_gamma};
use crate::stats;

/// Gamma law with the given shape and rate (mean `shape / rate`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSpec {
    pub shape: f64,
    pub rate: f64,
}

impl GammaSpec {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        ensure(shape > 0.0 && shape.is_finite(), || {
            format!("gamma shape must be positive, got {shape}")
        })?;
        ensure(rate > 0.0 && rate.is_finite(), || {
            format!("gamma rate must be positive, got {rate}")
        })?;
        Ok(Self { shape, rate })
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn density(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let log = self.shape * self.rate.ln() + (self.shape - 1.0) * s.ln()
            - self.rate * s
            - ln_gamma(self.shape);
        log.exp()
    }
}

/// Truncation rule for the infinite sums over `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenewalSeriesConfig {
    pub tail_tol: f64,
    pub n_max: usize,
}

impl Default for RenewalSeriesConfig {
    fn default() -> Self {
        Self {
            tail_tol: 1e-12,
            n_max: 10_000,
        }
    }
}

impl RenewalSeriesConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.tail_tol > 0.0 && self.tail_tol < 1.0, || {
            format!("tail_tol must lie in (0, 1), got {}", self.tail_tol)
        })?;
        ensure(self.n_max >= 1, || "n_max must be at least 1".into())
    }
}

/// Gamma approximation of the n-th reorder time:
/// shape `(a + (n - 1) Q) / mu`, rate `alpha lambda`.
pub fn fpt_gamma_spec(params: &ProcessParams, policy: &PolicyParams, n: usize) -> Result<GammaSpec> {
    params.validate()?;
    ensure(n >= 1, || "passage index n starts at 1".into())?;
    ensure(policy.a > 0.0, || format!("threshold a must be positive, got {}", policy.a))?;
    ensure(policy.q > 0.0, || format!("order quantity must be positive, got {}", policy.q))?;
    GammaSpec::new(
        (policy.a + (n as f64 - 1.0) * policy.q) / params.mu,
        params.alpha * params.lambda,
    )
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be >= 0, got {t}")))
    }
}

/// `P(T < t)` for `T ~ Gamma(shape, rate)`.
pub fn gamma_cdf(spec: &GammaSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    gamma_p(spec.shape, spec.rate * t)
}

/// Quadrature of `(r s)^(k-1) / Gamma(k) * s * e^(-r s)` over `[0, t]`.
///
/// This is the integrand as printed next to the renewal sum. It is not a
/// probability density (no factor `r`, an extra factor `s`) and exists only to
/// be reported next to [`gamma_cdf`].
pub fn paper_literal_cdf(spec: &GammaSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    let (k, r) = (spec.shape, spec.rate);
    let log_norm = (k - 1.0) * r.ln() - ln_gamma(k);
    let integrand = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            (log_norm + k * s.ln() - r * s).exp()
        }
    };
    Ok(quadrature::integrate(integrand, 0.0, t, 1e-13))
}

/// `E[T 1{T < t}]` for `T ~ Gamma(shape, rate)`.
pub fn truncated_mean(spec: &GammaSpec, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(spec.mean() * gamma_p(spec.shape + 1.0, spec.rate * t)?)
}

/// Sums `term(spec_n)` over `n = 1, 2, ...` until `P(T_n < t)` drops under the
/// tail tolerance.
fn renewal_series<F>(
    params: &ProcessParams,
    policy: &PolicyParams,
    t: f64,
    cfg: &RenewalSeriesConfig,
    term: F,
) -> Result<f64>
where
    F: Fn(&GammaSpec, f64) -> Result<f64>,
{
    check_time(t)?;
    cfg.validate()?;
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for n in 1..=cfg.n_max {
        let spec = fpt_gamma_spec(params, policy, n)?;
        let cdf = gamma_cdf(&spec, t)?;
        sum += term(&spec, cdf)?;
        last = cdf;
        if cdf < cfg.tail_tol {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNotConverged {
        t,
        terms: cfg.n_max,
        last_term: last,
        partial_sum: sum,
    })
}

/// `E[R_t] = sum_n P(T_n < t)`.
pub fn expected_renewals(
    params: &ProcessParams,
    policy: &PolicyParams,
    t: f64,
    cfg: &RenewalSeriesConfig,
) -> Result<f64> {
    renewal_series(params, policy, t, cfg, |_, cdf| Ok(cdf))
}

/// `E[int_0^t R_s ds] = sum_n (t P(T_n < t) - E[T_n 1{T_n < t}])`.
pub fn expected_integrated_renewals(
    params: &ProcessParams,
    policy: &PolicyParams,
    t: f64,
    cfg: &RenewalSeriesConfig,
) -> Result<f64> {
    renewal_series(params, policy, t, cfg, |spec, cdf| {
        Ok((t * cdf - truncated_mean(spec, t)?).max(0.0))
    })
}

/// Exact first time cumulative demand reaches `level`, simulated jump by jump.
pub(crate) fn first_passage<R: rand::Rng>(
    params: &ProcessParams,
    level: f64,
    exp: &Exp<f64>,
    rng: &mut R,
) -> f64 {
    let mut jumps = 0.0_f64;
    let mut now = 0.0;
    loop {
        let next_jump = now + exp.sample(rng);
        let drift_hit = (level - params.alpha * jumps) / params.mu;
        if drift_hit <= next_jump {
            return drift_hit;
        }
        jumps += 1.0;
        now = next_jump;
        if params.mu * now + params.alpha * jumps >= level {
            return now;
        }
    }
}

/// Exact passage times of the n-th threshold on `n_paths` independent paths
/// (path `i` uses seed `seed + i`).
pub fn fpt_samples(
    params: &ProcessParams,
    policy: &PolicyParams,
    n: usize,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    params.validate()?;
    ensure(n >= 1, || "passage index n starts at 1".into())?;
    ensure(n_paths >= 1, || "need at least one path".into())?;
    let level = policy.a + (n as f64 - 1.0) * policy.q;
    let exp = Exp::new(params.lambda).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(seed.wrapping_add(i as u64));
            first_passage(params, level, &exp, &mut rng)
        })
        .collect())
}

/// Empirical CDF of the exact n-th passage time on `t_grid`.
pub fn fpt_empirical_cdf(
    params: &ProcessParams,
    policy: &PolicyParams,
    n: usize,
    t_grid: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut samples = fpt_samples(params, policy, n, n_paths, seed)?;
    samples.sort_by(f64::total_cmp);
    Ok(stats::empirical_cdf(&samples, t_grid))
}
