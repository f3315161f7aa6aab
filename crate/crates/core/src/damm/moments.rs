//! Conditional moments of a Gaussian mixture.

use serde::{Deserialize, Serialize};

use super::DammError;
use crate::Real;

/// Variance, standardized skewness and excess kurtosis of one mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments<T> {
    pub vol: T,
    pub skew: T,
    pub kurt: T,
}

/// Central standardized moments of `Σ_j w_j N(μ_j, σ_j²)` about the mixture mean.
pub fn mixture_moments<T: Real>(
    weights: &[T],
    means: &[T],
    scales: &[T],
) -> Result<Moments<T>, DammError> {
    check_shapes(weights, means, scales)?;
    let mean = weights
        .iter()
        .zip(means)
        .fold(T::zero(), |acc, (&w, &m)| acc + w * m);
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    let (three, six) = (T::c(3.0), T::c(6.0));
    for ((&w, &mu), &s) in weights.iter().zip(means).zip(scales) {
        let d = mu - mean;
        let (d2, s2) = (d * d, s * s);
        m2 += w * (s2 + d2);
        m3 += w * (d2 * d + three * d * s2);
        m4 += w * (d2 * d2 + six * d2 * s2 + three * s2 * s2);
    }
    if !(m2 > T::zero()) || !m2.finite() {
        return Err(DammError::Domain("mixture variance is not positive".into()));
    }
    Ok(Moments {
        vol: m2,
        skew: m3 / (m2 * m2.sqrt()),
        kurt: m4 / (m2 * m2) - three,
    })
}

/// The moment expressions as they are commonly printed: raw second moment,
/// and third/fourth expressions normalised by powers of that raw moment.
///
/// Kept for side-by-side comparison only; these are not the standardized
/// moments of the mixture.
pub fn printed_mixture_moments<T: Real>(
    weights: &[T],
    means: &[T],
    scales: &[T],
) -> Result<Moments<T>, DammError> {
    check_shapes(weights, means, scales)?;
    let (three, six) = (T::c(3.0), T::c(6.0));
    let mut vol = T::zero();
    let mut s3 = T::zero();
    let mut s4 = T::zero();
    for ((&w, &mu), &s) in weights.iter().zip(means).zip(scales) {
        let s2 = s * s;
        vol += w * (s2 + mu * mu);
        s3 += w * mu * (three * s2 + mu * mu);
        s4 += w * (mu * mu * mu * mu + six * mu * s2 + three * s2 * s2);
    }
    if !(vol > T::zero()) {
        return Err(DammError::Domain("mixture variance is not positive".into()));
    }
    let v2 = vol * vol;
    Ok(Moments {
        vol,
        skew: s3 / v2,
        kurt: s4 / (v2 * v2) - three,
    })
}

fn check_shapes<T: Real>(weights: &[T], means: &[T], scales: &[T]) -> Result<(), DammError> {
    if weights.is_empty() || weights.len() != means.len() || weights.len() != scales.len() {
        return Err(DammError::Parameter(format!(
            "mixture arrays must be non-empty and equal length ({}, {}, {})",
            weights.len(),
            means.len(),
            scales.len()
        )));
    }
    if scales.iter().any(|&s| !(s > T::zero())) {
        return Err(DammError::Parameter(
            "mixture scales must be positive".into(),
        ));
    }
    Ok(())
}
