use crate::error::{ensure, Result};

/// Croston's method. Element `k` is the forecast issued after observing
/// `series[..=k]`; it stays 0 until the first nonzero demand.
///
/// Sizes and inter-demand intervals are smoothed separately and only on
/// periods with demand; the forecast is `size / interval`.
pub fn croston_forecast(series: &[f64], smoothing: f64) -> Result<Vec<f64>> {
    ensure(smoothing > 0.0 && smoothing <= 1.0, || {
        format!("smoothing must lie in (0, 1], got {smoothing}")
    })?;
    ensure(series.iter().all(|&d| d >= 0.0), || "demand must be nonnegative".into())?;

    let mut size: Option<f64> = None;
    let mut interval = 0.0;
    let mut since_last = 0.0;
    let mut out = Vec::with_capacity(series.len());
    for &d in series {
        since_last += 1.0;
        if d > 0.0 {
            match size {
                None => {
                    size = Some(d);
                    interval = since_last;
                }
                Some(z) => {
                    size = Some(z + smoothing * (d - z));
                    interval += smoothing * (since_last - interval);
                }
            }
            since_last = 0.0;
        }
        out.push(size.map_or(0.0, |z| z / interval));
    }
    Ok(out)
}
