use nalgebra::DMatrix;

use super::TvpVarError;
use crate::Real;

/// `Ψ_0..Ψ_{H−1}` of the moving-average representation.
#[derive(Debug, Clone, PartialEq)]
pub struct VmaCoefficients<T: Real> {
    pub psi: Vec<DMatrix<T>>,
}

/// Raw and row-normalized generalized variance shares at one date.
#[derive(Debug, Clone, PartialEq)]
pub struct GfevdTable<T: Real> {
    pub theta: DMatrix<T>,
    /// `d_ij`: share of `i`'s forecast-error variance due to shocks in `j`.
    pub d: DMatrix<T>,
}

/// Sum whose value does not depend on the order of `terms`.
///
/// Terms are added in increasing magnitude (ties broken by sign), so any
/// relabelling of variables that permutes the summands gives the same bits.
fn canonical_sum<T: Real>(terms: &mut [T]) -> T {
    terms.sort_by(|a, b| {
        a.abs()
            .partial_cmp(&b.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
    });
    terms.iter().fold(T::zero(), |acc, &v| acc + v)
}

/// `Ψ_0 = I`, `Ψ_h = Σ_{k=1..min(h,p)} B_k Ψ_{h−k}`. The intercept plays no
/// role in the expansion.
pub fn vma_expand<T: Real>(b: &[DMatrix<T>], horizon: usize) -> VmaCoefficients<T> {
    let n = b.first().map_or(0, |m| m.nrows());
    let mut psi: Vec<DMatrix<T>> = Vec::with_capacity(horizon);
    if horizon == 0 {
        return VmaCoefficients { psi };
    }
    psi.push(DMatrix::identity(n, n));
    let mut terms = Vec::with_capacity(n * b.len());
    for h in 1..horizon {
        let next = DMatrix::from_fn(n, n, |i, j| {
            terms.clear();
            for k in 1..=h.min(b.len()) {
                let prev = &psi[h - k];
                for m in 0..n {
                    terms.push(b[k - 1][(i, m)] * prev[(m, j)]);
                }
            }
            canonical_sum(&mut terms)
        });
        psi.push(next);
    }
    VmaCoefficients { psi }
}

/// Generalized FEVD over the horizon `psi.len()`.
pub fn gfevd<T: Real>(
    vma: &VmaCoefficients<T>,
    sigma: &DMatrix<T>,
) -> Result<GfevdTable<T>, TvpVarError> {
    let n = sigma.nrows();
    if sigma.ncols() != n || vma.psi.iter().any(|p| p.shape() != (n, n)) {
        return Err(TvpVarError::Dimension(
            "GFEVD inputs must be square and conformable".into(),
        ));
    }
    if vma.psi.is_empty() {
        return Err(TvpVarError::Spec("horizon must be at least 1".into()));
    }
    if let Some(j) = (0..n).find(|&j| !(sigma[(j, j)] > T::zero())) {
        return Err(TvpVarError::Domain(format!(
            "variance of variable {j} is not positive"
        )));
    }
    let mut terms = Vec::with_capacity(n);
    let mut numer = DMatrix::<T>::zeros(n, n);
    let mut denom = vec![T::zero(); n];
    for psi in &vma.psi {
        let psi_sigma = DMatrix::from_fn(n, n, |i, j| {
            terms.clear();
            terms.extend((0..n).map(|m| psi[(i, m)] * sigma[(m, j)]));
            canonical_sum(&mut terms)
        });
        for i in 0..n {
            for j in 0..n {
                let v = psi_sigma[(i, j)];
                numer[(i, j)] += v * v;
            }
            terms.clear();
            terms.extend((0..n).map(|m| psi_sigma[(i, m)] * psi[(i, m)]));
            denom[i] += canonical_sum(&mut terms);
        }
    }
    if let Some(i) = (0..n).find(|&i| !(denom[i] > T::zero())) {
        return Err(TvpVarError::Domain(format!(
            "forecast-error variance of variable {i} is zero"
        )));
    }
    let theta = DMatrix::from_fn(n, n, |i, j| numer[(i, j)] / sigma[(j, j)] / denom[i]);
    let mut d = theta.clone();
    for i in 0..n {
        terms.clear();
        terms.extend(theta.row(i).iter().copied());
        let total = canonical_sum(&mut terms);
        if !(total > T::zero()) {
            return Err(TvpVarError::Domain(format!(
                "row {i} of the decomposition is zero"
            )));
        }
        for j in 0..n {
            d[(i, j)] = theta[(i, j)] / total;
        }
    }
    Ok(GfevdTable { theta, d })
}
