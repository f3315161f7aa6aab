use nalgebra::DMatrix;

use super::NetworkError;
use crate::Real;

/// All-pairs shortest path lengths with edge length `1/w` (Floyd–Warshall).
/// Nonpositive weights are absent edges.
fn distances<T: Real>(edges: &DMatrix<T>) -> DMatrix<T> {
    let n = edges.nrows();
    let inf = T::c(f64::INFINITY);
    let mut dist = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            T::zero()
        } else if edges[(i, j)] > T::zero() {
            T::one() / edges[(i, j)]
        } else {
            inf
        }
    });
    for k in 0..n {
        for i in 0..n {
            let dik = dist[(i, k)];
            if dik == inf {
                continue;
            }
            for j in 0..n {
                let via = dik + dist[(k, j)];
                if via < dist[(i, j)] {
                    dist[(i, j)] = via;
                }
            }
        }
    }
    dist
}

/// Mean over ordered pairs of reciprocal shortest-path length.
fn cohesion<T: Real>(edges: &DMatrix<T>) -> T {
    let n = edges.nrows();
    let dist = distances(edges);
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j && dist[(i, j)].finite() {
                s += T::one() / dist[(i, j)];
            }
        }
    }
    s / T::from_count(n * (n - 1))
}

/// Cohesion lost by deleting each of a node's edges one at a time, summed
/// over the node's edges and rescaled so the largest score is 1.
pub fn bridge_centrality<T: Real>(edges: &DMatrix<T>) -> Result<Vec<T>, NetworkError> {
    let n = edges.nrows();
    if n < 3 {
        return Err(NetworkError::TooFewNodes(n));
    }
    if edges.ncols() != n {
        return Err(NetworkError::Dimension("edge matrix must be square".into()));
    }
    let base = cohesion(edges);
    let mut scores = vec![T::zero(); n];
    let mut work = edges.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = edges[(i, j)];
            if !(w > T::zero()) {
                continue;
            }
            work[(i, j)] = T::zero();
            work[(j, i)] = T::zero();
            let drop = base - cohesion(&work);
            work[(i, j)] = w;
            work[(j, i)] = w;
            scores[i] += drop;
            scores[j] += drop;
        }
    }
    let max = scores
        .iter()
        .fold(T::zero(), |m, &v| if v > m { v } else { m });
    if max > T::zero() {
        for s in &mut scores {
            *s /= max;
        }
    }
    Ok(scores)
}
