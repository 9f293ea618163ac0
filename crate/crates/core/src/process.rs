//! Cumulative demand `D_t = mu t + alpha N_t` with `N` a Poisson process.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Drift, jump size and jump intensity of the demand process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProcessParams {
    pub mu: f64,
    pub alpha: f64,
    pub lambda: f64,
}

impl ProcessParams {
    pub fn new(mu: f64, alpha: f64, lambda: f64) -> Result<Self> {
        let p = Self { mu, alpha, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.mu > 0.0 && self.mu.is_finite(), || {
            format!("mu must be positive, got {}", self.mu)
        })?;
        ensure(self.alpha > 0.0 && self.alpha.is_finite(), || {
            format!("alpha must be positive, got {}", self.alpha)
        })?;
        ensure(self.lambda > 0.0 && self.lambda.is_finite(), || {
            format!("lambda must be positive, got {}", self.lambda)
        })
    }

    /// Mean demand per unit time, `mu + alpha lambda`.
    pub fn mean_rate(&self) -> f64 {
        self.mu + self.alpha * self.lambda
    }
}

impl Default for ProcessParams {
    fn default() -> Self {
        Self {
            mu: 5.0,
            alpha: 10.0,
            lambda: 1.0,
        }
    }
}

/// The seeded RNG used for every stochastic component.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One realization of the demand process on `[0, horizon)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub params: ProcessParams,
    pub jump_times: Vec<f64>,
    pub horizon: f64,
    pub seed: u64,
}

/// Sidecar metadata written next to the jump-time CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PathMeta {
    params: ProcessParams,
    horizon: f64,
    seed: u64,
    n_jumps: usize,
}

/// Draws an exact path: exponential(lambda) inter-arrival times, no time grid.
pub fn sample_path(params: ProcessParams, horizon: f64, seed: u64) -> Result<SamplePath> {
    params.validate()?;
    ensure(horizon > 0.0 && horizon.is_finite(), || {
        format!("horizon must be positive, got {horizon}")
    })?;
    let mut rng = rng_from_seed(seed);
    let exp = Exp::new(params.lambda).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut jump_times = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(&mut rng);
        if t >= horizon {
            break;
        }
        jump_times.push(t);
    }
    Ok(SamplePath {
        params,
        jump_times,
        horizon,
        seed,
    })
}

impl SamplePath {
    /// Number of jumps in `[0, t]` (jumps at exactly `t` included).
    pub fn jumps_until(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t)
    }

    /// Jump times as CSV with header `t,jump`; `jump` is the running count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,jump\n");
        for (i, t) in self.jump_times.iter().enumerate() {
            out.push_str(&format!("{t},{}\n", i + 1));
        }
        out
    }

    pub fn sidecar_json(&self) -> String {
        let meta = PathMeta {
            params: self.params,
            horizon: self.horizon,
            seed: self.seed,
            n_jumps: self.jump_times.len(),
        };
        serde_json::to_string_pretty(&meta).expect("path metadata serializes")
    }
}

/// `mu t + alpha * #{jumps <= t}`; paths are right-continuous.
pub fn demand_at(path: &SamplePath, t: f64) -> Result<f64> {
    if !(0.0..=path.horizon).contains(&t) {
        return Err(Error::Domain(format!(
            "t={t} outside [0, {}]",
            path.horizon
        )));
    }
    Ok(path.params.mu * t + path.params.alpha * path.jumps_until(t) as f64)
}

/// Demand in each full period `[k p, (k+1) p)` that fits inside the horizon.
pub fn period_increments(path: &SamplePath, period: f64) -> Result<Vec<f64>> {
    ensure(period > 0.0 && period.is_finite(), || {
        format!("period must be positive, got {period}")
    })?;
    ensure(period <= path.horizon, || {
        format!("period {period} exceeds horizon {}", path.horizon)
    })?;
    // Small slack so horizon = n * period yields n periods despite rounding.
    let n = ((path.horizon / period) * (1.0 + 1e-12)).floor() as usize;
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for k in 1..=n {
        let t = (k as f64 * period).min(path.horizon);
        let d = demand_at(path, t)?;
        out.push(d - prev);
        prev = d;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(jumps: &[f64], horizon: f64) -> SamplePath {
        SamplePath {
            params: ProcessParams::default(),
            jump_times: jumps.to_vec(),
            horizon,
            seed: 0,
        }
    }

    #[test]
    fn demand_examples() {
        let p = fixed(&[1.0], 10.0);
        assert_eq!(demand_at(&p, 0.0).unwrap(), 0.0);
        // 5 * 2 + 10 * 1
        assert_eq!(demand_at(&p, 2.0).unwrap(), 20.0);
        let p = fixed(&[1.0, 1.5], 10.0);
        assert_eq!(demand_at(&p, 1.5).unwrap(), 27.5);
        assert!(matches!(demand_at(&p, 10.5), Err(Error::Domain(_))));
        assert!(matches!(demand_at(&p, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn increments_examples() {
        assert_eq!(
            period_increments(&fixed(&[], 3.0), 1.0).unwrap(),
            vec![5.0, 5.0, 5.0]
        );
        assert_eq!(
            period_increments(&fixed(&[0.5], 2.0), 1.0).unwrap(),
            vec![15.0, 5.0]
        );
        assert!(period_increments(&fixed(&[], 3.0), 0.0).is_err());
        assert!(period_increments(&fixed(&[], 3.0), 4.0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ProcessParams::default();
        assert!(sample_path(p, 0.0, 1).is_err());
        assert!(sample_path(ProcessParams { mu: 0.0, ..p }, 1.0, 1).is_err());
        assert!(ProcessParams::new(5.0, -1.0, 1.0).is_err());
        assert!(ProcessParams::new(5.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn same_seed_same_path() {
        let p = ProcessParams::default();
        let a = sample_path(p, 10.0, 42).unwrap();
        let b = sample_path(p, 10.0, 42).unwrap();
        assert_eq!(a.jump_times, b.jump_times);
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.jump_times.windows(2).all(|w| w[0] < w[1]));
        assert!(a.jump_times.iter().all(|&t| t < 10.0));
    }

    #[test]
    fn csv_layout() {
        let csv = fixed(&[0.25, 1.5], 2.0).to_csv();
        assert_eq!(csv, "t,jump\n0.25,1\n1.5,2\n");
        let meta: serde_json::Value =
            serde_json::from_str(&fixed(&[0.25], 2.0).sidecar_json()).unwrap();
        assert_eq!(meta["n_jumps"], 1);
        assert_eq!(meta["params"]["alpha"], 10.0);
    }
}
