//! Chi-square survival function.

use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// P(X > x) for X ~ χ²(df), the upper regularized incomplete gamma
/// Q(df / 2, x / 2).
pub fn chi_square_sf(x: f64, df: u32) -> Result<f64> {
    if df < 1 {
        return Err(Error::DegreesOfFreedom(df));
    }
    if x.is_nan() {
        return Ok(f64::NAN);
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_ur(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0))
}
