//! Small-sample ARIMA(p, d, q) with conditional least squares fitting and
//! AIC order selection.
//!
//! Fitting is two-stage: a long autoregression supplies innovation proxies,
//! then the AR and MA coefficients are estimated jointly by one linear
//! regression of `y_t` on `1, y_{t-1..p}, e_{t-1..q}`. Every candidate order
//! is scored on the same rows so the AIC values are comparable.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Order search space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArimaSearch {
    pub p_max: usize,
    pub q_max: usize,
    /// Allowed differencing orders, each 0 or 1.
    pub d_set: Vec<usize>,
}

impl Default for ArimaSearch {
    fn default() -> Self {
        Self {
            p_max: 2,
            q_max: 2,
            d_set: vec![0, 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    pub intercept: f64,
    pub aic: f64,
    /// The (differenced) series the model was fitted on.
    fitted_on: Vec<f64>,
    /// In-sample residuals aligned with `fitted_on`, zero where unavailable.
    residuals: Vec<f64>,
    last_observation: f64,
}

impl ArimaModel {
    /// One-step-ahead forecast on the original (undifferenced) scale.
    pub fn forecast_one(&self) -> f64 {
        let n = self.fitted_on.len();
        let mut y = self.intercept;
        for (i, phi) in self.ar_coeffs.iter().enumerate() {
            y += phi * self.fitted_on[n - 1 - i];
        }
        for (j, theta) in self.ma_coeffs.iter().enumerate() {
            y += theta * self.residuals[n - 1 - j];
        }
        match self.d {
            0 => y,
            _ => self.last_observation + y,
        }
    }

    fn mean_model(d: usize, y: &[f64], last_observation: f64) -> Self {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        Self {
            p: 0,
            d,
            q: 0,
            ar_coeffs: vec![],
            ma_coeffs: vec![],
            intercept: mean,
            aic: f64::NAN,
            fitted_on: y.to_vec(),
            residuals: y.iter().map(|v| v - mean).collect(),
            last_observation,
        }
    }
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// True when `1 - sum phi_i z^i` has no root in the closed unit disk,
/// via the step-down (reverse Levinson) recursion.
pub(crate) fn is_stationary(ar: &[f64]) -> bool {
    let mut a = ar.to_vec();
    while let Some(&r) = a.last() {
        if !(r.abs() < 1.0) {
            return false;
        }
        let k = a.len();
        let denom = 1.0 - r * r;
        a = (0..k - 1).map(|j| (a[j] + r * a[k - 2 - j]) / denom).collect();
    }
    true
}

/// Least squares with a rank check. Returns coefficients and residuals.
fn least_squares(rows: usize, cols: usize, design: &[f64], target: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = DMatrix::from_row_slice(rows, cols, design);
    let y = DVector::from_column_slice(target);
    let svd = x.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    if !(max_sv > 0.0) || min_sv <= 1e-9 * max_sv {
        return Err(Error::Singular);
    }
    let beta = svd.solve(&y, 0.0).map_err(|_| Error::Singular)?;
    let resid = &y - &x * &beta;
    Ok((beta.iter().cloned().collect(), resid.iter().cloned().collect()))
}

/// Regression of `y_t` on an intercept and the given lagged columns for
/// `t in start..y.len()`.
fn lag_regression(y: &[f64], start: usize, ar: usize, innov: Option<(&[f64], usize)>) -> Result<(Vec<f64>, Vec<f64>)> {
    let ma = innov.map_or(0, |(_, q)| q);
    let cols = 1 + ar + ma;
    let rows = y.len() - start;
    let mut design = Vec::with_capacity(rows * cols);
    for t in start..y.len() {
        design.push(1.0);
        design.extend((1..=ar).map(|i| y[t - i]));
        if let Some((e, q)) = innov {
            design.extend((1..=q).map(|j| e[t - j]));
        }
    }
    least_squares(rows, cols, &design, &y[start..])
}

/// Fits every order in the search space and keeps the lowest AIC
/// (ties: fewer coefficients, then smaller `p`). Falls back to the
/// `(0, d, 0)` mean model when nothing else can be estimated.
pub fn fit_arima(series: &[f64], search: &ArimaSearch) -> Result<ArimaModel> {
    ensure(!search.d_set.is_empty() && search.d_set.iter().all(|&d| d <= 1), || {
        "d_set must be a non-empty subset of {0, 1}".into()
    })?;
    if series.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: series.len() });
    }
    let last = *series.last().unwrap();
    let diffed: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let d = if search.d_set.contains(&0) && search.d_set.contains(&1) {
        usize::from(sample_variance(&diffed) < sample_variance(series))
    } else {
        search.d_set[0]
    };
    let y: &[f64] = if d == 1 { &diffed } else { series };
    let n = y.len();

    // Long autoregression for the innovation proxies.
    let long_order = (search.p_max.max(search.q_max) + 1).min(n.saturating_sub(1) / 2);
    let innovations: Option<Vec<f64>> = if search.q_max > 0 && long_order >= 1 {
        lag_regression(y, long_order, long_order, None).ok().map(|(_, resid)| {
            let mut e = vec![0.0; long_order];
            e.extend(resid);
            e
        })
    } else {
        None
    };
    let q_max = if innovations.is_some() { search.q_max } else { 0 };
    let start = if q_max > 0 { search.p_max.max(long_order + q_max) } else { search.p_max };

    let mut best: Option<ArimaModel> = None;
    let mut candidates: Vec<(usize, usize)> = (0..=search.p_max)
        .flat_map(|p| (0..=q_max).map(move |q| (p, q)))
        .collect();
    candidates.sort_by_key(|&(p, q)| (p + q, p));
    for (p, q) in candidates {
        let k = 1 + p + q;
        if start >= n || n - start <= k {
            continue;
        }
        let innov = innovations.as_deref().map(|e| (e, q)).filter(|_| q > 0);
        let Ok((beta, resid)) = lag_regression(y, start, p, innov) else {
            continue;
        };
        let ar = beta[1..=p].to_vec();
        if !is_stationary(&ar) {
            continue;
        }
        let rows = (n - start) as f64;
        let rss: f64 = resid.iter().map(|r| r * r).sum();
        let aic = rows * (rss / rows).max(f64::MIN_POSITIVE).ln() + 2.0 * k as f64;
        if best.as_ref().map_or(true, |b| aic < b.aic) {
            let mut residuals = vec![0.0; start];
            residuals.extend(resid);
            best = Some(ArimaModel {
                p,
                d,
                q,
                ar_coeffs: ar,
                ma_coeffs: beta[1 + p..].to_vec(),
                intercept: beta[0],
                aic,
                fitted_on: y.to_vec(),
                residuals,
                last_observation: last,
            });
        }
    }
    Ok(best.unwrap_or_else(|| ArimaModel::mean_model(d, y, last)))
}

/// One-step-ahead forecasts for periods `first..=last` (1-based). Period `k`
/// is forecast from the `window` observations ending at period `k - 1`.
/// Forecasts are clamped at zero; a failed fit falls back to the window mean.
pub fn rolling_forecast(
    series: &[f64],
    window: usize,
    first: usize,
    last: usize,
    search: &ArimaSearch,
) -> Result<Vec<f64>> {
    ensure(window >= 1, || "window must be at least 1".into())?;
    ensure(first > window && first <= last, || {
        format!("forecast periods {first}..={last} need a full window of {window} before them")
    })?;
    if series.len() < last - 1 {
        return Err(Error::InsufficientData { needed: last - 1, got: series.len() });
    }
    Ok((first..=last)
        .map(|k| {
            let obs = &series[k - 1 - window..k - 1];
            let raw = match fit_arima(obs, search) {
                Ok(model) => model.forecast_one(),
                Err(e) => {
                    log::debug!("period {k}: {e}; using window mean");
                    obs.iter().sum::<f64>() / obs.len() as f64
                }
            };
            raw.max(0.0)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::rng_from_seed;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn stationarity_check() {
        assert!(is_stationary(&[]));
        assert!(is_stationary(&[0.8]));
        assert!(!is_stationary(&[1.2]));
        assert!(!is_stationary(&[1.0]));
        assert!(is_stationary(&[0.5, 0.3]));
        assert!(!is_stationary(&[0.5, 0.6]));
        assert!(is_stationary(&[1.5, -0.7]));
        assert!(!is_stationary(&[0.2, -1.1]));
    }

    #[test]
    fn constant_series_falls_back_to_mean() {
        let m = fit_arima(&[15.0; 12], &ArimaSearch::default()).unwrap();
        assert_eq!((m.p, m.q), (0, 0));
        assert!((m.forecast_one() - 15.0).abs() < 1e-9);
    }

    #[test]
    fn trend_selects_first_difference() {
        let series: Vec<f64> = (0..12).map(|i| 3.0 + 2.0 * i as f64).collect();
        let m = fit_arima(&series, &ArimaSearch::default()).unwrap();
        assert_eq!(m.d, 1);
        assert!((m.forecast_one() - 27.0).abs() < 1e-9);
    }

    #[test]
    fn recovers_ar1() {
        let mut rng = rng_from_seed(11);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut y = vec![0.0];
        for _ in 0..600 {
            let prev = *y.last().unwrap();
            y.push(0.8 * prev + noise.sample(&mut rng));
        }
        let series = &y[100..];
        let search = ArimaSearch { d_set: vec![0], ..ArimaSearch::default() };
        let m = fit_arima(series, &search).unwrap();
        assert!(m.p >= 1, "{m:?}");
        assert!((m.ar_coeffs[0] - 0.8).abs() < 0.1, "{m:?}");
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            fit_arima(&[1.0, 2.0], &ArimaSearch::default()),
            Err(Error::InsufficientData { .. })
        ));
        let bad = ArimaSearch { d_set: vec![2], ..ArimaSearch::default() };
        assert!(fit_arima(&[1.0; 12], &bad).is_err());
    }

    #[test]
    fn rolling_constant() {
        let f = rolling_forecast(&[15.0; 50], 12, 13, 50, &ArimaSearch::default()).unwrap();
        assert_eq!(f.len(), 38);
        assert!(f.iter().all(|v| (v - 15.0).abs() < 1e-9));
        assert!(rolling_forecast(&[15.0; 20], 12, 13, 50, &ArimaSearch::default()).is_err());
        assert!(rolling_forecast(&[15.0; 50], 12, 12, 50, &ArimaSearch::default()).is_err());
    }
}
