use nalgebra::Matrix2;
use rand::Rng;
use rayon::prelude::*;

use super::bvar::stream;
use super::{BvarPosterior, ShocksError};

/// Accepted rotation of one reduced-form draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralDraw {
    /// Index into [`BvarPosterior::draws`].
    pub draw: usize,
    /// Lower Cholesky factor of the surprise block of `Σ`.
    pub cholesky: Matrix2<f64>,
    pub angle: f64,
    /// Impact of (MP, information) shocks on (rate, equity); column 0 is MP.
    pub impact: Matrix2<f64>,
}

#[derive(Debug, Clone)]
pub struct Identification {
    pub accepted: Vec<StructuralDraw>,
    pub tried: usize,
}

impl Identification {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted.len() as f64 / self.tried.max(1) as f64
    }
}

/// `C·R(θ)` with each column flipped so the rate response is positive.
pub fn rotate(cholesky: &Matrix2<f64>, angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    let mut m = cholesky * Matrix2::new(c, -s, s, c);
    for col in 0..2 {
        if m[(0, col)] < 0.0 {
            m[(0, col)] = -m[(0, col)];
            m[(1, col)] = -m[(1, col)];
        }
    }
    m
}

/// MP shock: rate up, equity down. Information shock: both up.
pub fn satisfies_signs(impact: &Matrix2<f64>) -> bool {
    impact[(0, 0)] > 0.0 && impact[(1, 0)] < 0.0 && impact[(0, 1)] > 0.0 && impact[(1, 1)] > 0.0
}

/// Cholesky of `[[a, b], [b, d]]`, or `None` if not positive definite.
pub fn cholesky2(a: f64, b: f64, d: f64) -> Option<Matrix2<f64>> {
    if !(a > 0.0) {
        return None;
    }
    let l11 = a.sqrt();
    let l21 = b / l11;
    let rest = d - l21 * l21;
    if !(rest > 0.0) {
        return None;
    }
    Some(Matrix2::new(l11, 0.0, l21, rest.sqrt()))
}

/// Rotates each draw's surprise block by `angles` uniform angles and keeps the
/// rotations that satisfy both sign patterns.
pub fn identify_signs(
    posterior: &BvarPosterior,
    angles: usize,
    seed: u64,
) -> Result<Identification, ShocksError> {
    let per_draw: Vec<Vec<StructuralDraw>> = posterior
        .draws
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let chol =
                cholesky2(d.sigma[(0, 0)], d.sigma[(1, 0)], d.sigma[(1, 1)]).ok_or_else(|| {
                    ShocksError::Numerical(format!(
                        "draw {i}: surprise covariance not positive definite"
                    ))
                })?;
            let mut rng = stream(seed, 2, i);
            let mut out = Vec::new();
            for _ in 0..angles {
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let impact = rotate(&chol, angle);
                if satisfies_signs(&impact) {
                    out.push(StructuralDraw {
                        draw: i,
                        cholesky: chol,
                        angle,
                        impact,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_, ShocksError>>()?;
    let accepted: Vec<StructuralDraw> = per_draw.into_iter().flatten().collect();
    let tried = posterior.draws.len() * angles;
    if accepted.is_empty() {
        return Err(ShocksError::Identification(format!(
            "no rotation out of {tried} satisfied the sign restrictions"
        )));
    }
    Ok(Identification { accepted, tried })
}
