//! Point forecasters used by the rolling-window baseline.

mod arima;
mod croston;

pub use arima::{fit_arima, rolling_forecast, ArimaModel, ArimaSearch};
pub use croston::croston_forecast;
