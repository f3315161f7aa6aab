use nalgebra::Vector2;

use super::{Identification, ShocksError, SurprisePanel};
use crate::timeseries::YearMonth;

/// Minimum number of accepted draws for a stable median.
pub const RECOMMENDED_ACCEPTED: usize = 100;

/// Rate surprise split into policy and information parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockSeries {
    pub months: Vec<YearMonth>,
    pub total: Vec<f64>,
    pub mp: Vec<f64>,
    pub info: Vec<f64>,
    pub n_accepted: usize,
    /// Months where the summed raw medians have the opposite sign to the
    /// surprise, so the proportional rescaling flips them.
    pub flagged: Vec<bool>,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Splits `s` into parts proportional to `(a, b)` that add to `s` exactly
/// in floating point.
pub fn rescale_pair(s: f64, a: f64, b: f64) -> (f64, f64) {
    let raw = a + b;
    let mut x = if raw != 0.0 && (raw.abs() > 1e-12 * (a.abs() + b.abs())) {
        a * (s / raw)
    } else {
        a + 0.5 * (s - raw)
    };
    if !x.is_finite() {
        x = 0.5 * s;
    }
    let mut y = s - x;
    // Nudge the second part until the pair sums to s exactly.
    for _ in 0..64 {
        let r = x + y;
        if r == s {
            return (x, y);
        }
        let step = s - r;
        y = if step != 0.0 && y + step != y {
            y + step
        } else if r < s {
            y.next_up()
        } else {
            y.next_down()
        };
    }
    (s, 0.0)
}

/// Pointwise posterior medians of the two rate contributions, rescaled so
/// they add to the observed surprise.
pub fn decompose_shocks(
    ident: &Identification,
    m: &SurprisePanel,
) -> Result<ShockSeries, ShocksError> {
    if ident.accepted.is_empty() {
        return Err(ShocksError::Identification("no accepted draws".into()));
    }
    if ident.accepted.len() < RECOMMENDED_ACCEPTED {
        log::warn!(
            "only {} accepted draws; medians may be unstable",
            ident.accepted.len()
        );
    }
    let t_len = m.months.len();
    let n = ident.accepted.len();
    let mut mp = vec![0.0; n * t_len];
    let mut info = vec![0.0; n * t_len];
    for (k, d) in ident.accepted.iter().enumerate() {
        let inv = d.impact.try_inverse().ok_or_else(|| {
            ShocksError::Numerical(format!("draw {}: singular impact matrix", d.draw))
        })?;
        for t in 0..t_len {
            let u = Vector2::new(m.values[(t, 0)], m.values[(t, 1)]);
            let e = inv * u;
            mp[t * n + k] = d.impact[(0, 0)] * e[0];
            info[t * n + k] = d.impact[(0, 1)] * e[1];
        }
    }
    let mut out = ShockSeries {
        months: m.months.clone(),
        total: Vec::with_capacity(t_len),
        mp: Vec::with_capacity(t_len),
        info: Vec::with_capacity(t_len),
        n_accepted: n,
        flagged: Vec::with_capacity(t_len),
    };
    for t in 0..t_len {
        let s = m.values[(t, 0)];
        let (a, b) = if n == 1 {
            (mp[t], info[t])
        } else {
            (
                median(&mut mp[t * n..(t + 1) * n]),
                median(&mut info[t * n..(t + 1) * n]),
            )
        };
        let (x, y) = rescale_pair(s, a, b);
        out.flagged.push(s != 0.0 && (a + b) * s < 0.0);
        out.total.push(s);
        out.mp.push(x);
        out.info.push(y);
    }
    Ok(out)
}
