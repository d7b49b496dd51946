use crate::error::{Error, Result};

/// `(1 − g*/(|S²| + g*)) · 100`: the share of meaningful attributes in an
/// interpolated set that sits as far from the meaningful subspace as the
/// evaluated one.
pub fn gamma_score(g_star: f64, s2_size: usize) -> Result<f64> {
    if s2_size == 0 {
        return Err(Error::InvalidParameter("|S2| must be at least 1".into()));
    }
    if !(g_star >= 0.0 && g_star.is_finite()) {
        return Err(Error::InvalidParameter(format!("g* must be finite and nonnegative, got {g_star}")));
    }
    let s2 = s2_size as f64;
    Ok((1.0 - g_star / (s2 + g_star)) * 100.0)
}

/// Equal-weight combination of the two calibrated scores.
pub fn combined_score(gamma_cvx: f64, gamma_jp: f64) -> Result<f64> {
    for g in [gamma_cvx, gamma_jp] {
        if !(0.0..=100.0).contains(&g) {
            return Err(Error::OutOfRange(g));
        }
    }
    Ok(0.5 * gamma_cvx + 0.5 * gamma_jp)
}
