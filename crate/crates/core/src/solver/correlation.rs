use crate::error::{Error, Result};

/// Number of images on which two attributes agree.
pub fn agreements(z: &[i8], h: &[i8]) -> usize {
    // a*b is +1 on agreement and -1 otherwise, so the dot product is 2*agree - N.
    let dot: i64 = z.iter().zip(h).map(|(&a, &b)| i64::from(a * b)).sum();
    ((z.len() as i64 + dot) / 2) as usize
}

/// Fraction of images on which `z` and `h` carry the same sign.
pub fn correlation(z: &[i8], h: &[i8]) -> Result<f64> {
    if z.len() != h.len() {
        return Err(Error::LengthMismatch { left: z.len(), right: h.len() });
    }
    if z.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    Ok(agreements(z, h) as f64 / z.len() as f64)
}
