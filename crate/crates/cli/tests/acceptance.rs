//! One line per acceptance criterion.
//!
//! Failures are reported but only turn into a nonzero exit status when
//! `MMCONNECT_ACCEPTANCE_STRICT=1`. `MMCONNECT_LP_REPS` and `MMCONNECT_LP_SEED`
//! rerun the coverage study with more replications or another seed.

#[path = "../../core/tests/common/tables.rs"]
mod tables;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use mmconnect::connectedness::{read_gfevd_long, total_index};
use mmconnect::damm::{
    damm_step, mixture_moments, score_step, simplex_jacobian, simplex_map, ComponentCoefficients,
    MixtureState, ScoreScaling, SdCoefficients,
};
use mmconnect::localproj::{
    heat_indicator, heat_p_threshold, lp_regress, LpInput, LpSpec, RegimeDummies, HEAT_CUTOFF,
};
use mmconnect::network::{
    bridge_centrality, layer_weights, project_matrices, Category, MomentLayer, MultiLayerNetwork,
};
use mmconnect::shocks::{
    decompose_shocks, fit_restricted_bvar, identify_signs, satisfies_signs, BvarConfig,
};
use mmconnect::synth::{gen_shock_dataset, ShockSynthConfig};
use mmconnect::timeseries::YearMonth;
use mmconnect::tvpvar::{fit_tvpvar, gfevd, minnesota_prior, regressors, vma_expand, TvpVarSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64())
    })
}

// ---------------------------------------------------------------- 1

fn table_fixtures() -> Outcome {
    let start = Instant::now();
    let worst = tables::check_published()?;
    within_budget(start.elapsed(), 1.0)?;
    Ok(format!(
        "projection table and four local tables, worst margin deviation {worst:.4}"
    ))
}

// ---------------------------------------------------------------- 2

const POWERS: usize = 5;

fn mixture_pdf(x: f64, w: &[f64], mu: &[f64], sd: &[f64]) -> f64 {
    let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    w.iter()
        .zip(mu)
        .zip(sd)
        .map(|((w, m), s)| {
            let z = (x - m) / s;
            w * c * (-0.5 * z * z).exp() / s
        })
        .sum()
}

/// `f(x) (x − center)^k` for `k = 0..5`.
fn moment_integrand(x: f64, center: f64, w: &[f64], mu: &[f64], sd: &[f64]) -> [f64; POWERS] {
    let f = mixture_pdf(x, w, mu, sd);
    let d = x - center;
    let mut out = [0.0; POWERS];
    let mut p = 1.0;
    for v in &mut out {
        *v = f * p;
        p *= d;
    }
    out
}

fn simpson(
    a: f64,
    fa: &[f64; POWERS],
    m: &[f64; POWERS],
    b: f64,
    fb: &[f64; POWERS],
) -> [f64; POWERS] {
    let mut s = [0.0; POWERS];
    for k in 0..POWERS {
        s[k] = (b - a) / 6.0 * (fa[k] + 4.0 * m[k] + fb[k]);
    }
    s
}

/// Adaptive Simpson with Richardson correction on the vector integrand.
#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> [f64; POWERS],
    a: f64,
    fa: [f64; POWERS],
    b: f64,
    fb: [f64; POWERS],
    fm: [f64; POWERS],
    whole: [f64; POWERS],
    tol: f64,
    depth: usize,
) -> [f64; POWERS] {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, &fa, &flm, m, &fm);
    let right = simpson(m, &fm, &frm, b, &fb);
    let err = (0..POWERS)
        .map(|k| (left[k] + right[k] - whole[k]).abs())
        .fold(0.0, f64::max);
    if depth == 0 || err <= 15.0 * tol {
        let mut out = [0.0; POWERS];
        for k in 0..POWERS {
            out[k] = left[k] + right[k] + (left[k] + right[k] - whole[k]) / 15.0;
        }
        return out;
    }
    let l = adaptive(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1);
    let r = adaptive(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1);
    let mut out = [0.0; POWERS];
    for k in 0..POWERS {
        out[k] = l[k] + r[k];
    }
    out
}

fn integrate(f: &dyn Fn(f64) -> [f64; POWERS], knots: &[f64], tol: f64) -> [f64; POWERS] {
    let mut total = [0.0; POWERS];
    for pair in knots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = simpson(a, &fa, &fm, b, &fb);
        let part = adaptive(f, a, fa, b, fb, fm, whole, tol, 40);
        for k in 0..POWERS {
            total[k] += part[k];
        }
    }
    total
}

fn quadrature_moments(w: &[f64], mu: &[f64], sd: &[f64]) -> (f64, f64, f64, f64) {
    let mut knots: Vec<f64> = Vec::new();
    for (m, s) in mu.iter().zip(sd) {
        for k in [-14.0, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, 14.0] {
            knots.push(m + k * s);
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let raw = integrate(&|x| moment_integrand(x, 0.0, w, mu, sd), &knots, 1e-14);
    let mean = raw[1] / raw[0];
    let c = integrate(&|x| moment_integrand(x, mean, w, mu, sd), &knots, 1e-14);
    let var = c[2];
    (c[0], var, c[3] / var.powf(1.5), c[4] / (var * var) - 3.0)
}

fn mixture_moment_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let j = rng.random_range(1..=4);
        let raw: Vec<f64> = (0..j).map(|_| rng.random_range(0.05..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / sum).collect();
        let mu: Vec<f64> = (0..j).map(|_| rng.random_range(-3.0..3.0)).collect();
        let sd: Vec<f64> = (0..j).map(|_| rng.random_range(0.2..3.0)).collect();
        let m = mixture_moments(&w, &mu, &sd).map_err(|e| e.to_string())?;
        let (mass, vol, skew, kurt) = quadrature_moments(&w, &mu, &sd);
        for (name, a, b) in [
            ("mass", mass, 1.0),
            ("vol", m.vol, vol),
            ("skew", m.skew, skew),
            ("kurt", m.kurt, kurt),
        ] {
            let dev = (a - b).abs();
            worst = worst.max(dev);
            ensure(dev < 1e-6, || {
                format!("mixture {case} {name}: closed form {a}, quadrature {b}")
            })?;
        }
    }
    within_budget(start.elapsed(), 30.0)?;
    Ok(format!(
        "1000 mixtures, J <= 4, worst deviation {worst:.2e}"
    ))
}

// ---------------------------------------------------------------- 3

fn score_recursion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut check = |what: &str, analytic: f64, fd: f64| -> Result<(), String> {
        let dev = (analytic - fd).abs();
        worst = worst.max(dev);
        ensure(dev < 1e-6, || {
            format!("{what}: analytic {analytic}, finite difference {fd}")
        })
    };
    for case in 0..200 {
        let j = rng.random_range(2..=4);
        let w_tilde: Vec<f64> = (0..j - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
        let theta: Vec<[f64; 2]> = (0..j)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..0.7)])
            .collect();
        let y = rng.random_range(-3.0..3.0);
        let state = MixtureState::from_unconstrained(w_tilde.clone(), theta.clone());
        let step = score_step(y, &state, ScoreScaling::Identity).map_err(|e| e.to_string())?;
        let log_p = |wt: &[f64], th: &[[f64; 2]]| {
            MixtureState::from_unconstrained(wt.to_vec(), th.to_vec()).log_density(y)
        };

        // simplex Jacobian
        let jac = simplex_jacobian(&w_tilde);
        for b in 0..j - 1 {
            let (mut up, mut dn) = (w_tilde.clone(), w_tilde.clone());
            up[b] += h;
            dn[b] -= h;
            let (wu, wd) = (simplex_map(&up), simplex_map(&dn));
            for r in 0..j {
                check(
                    &format!("state {case} jacobian ({r},{b})"),
                    jac[(r, b)],
                    (wu[r] - wd[r]) / (2.0 * h),
                )?;
            }
            check(
                &format!("state {case} weight score {b}"),
                step.score_w[b],
                (log_p(&up, &theta) - log_p(&dn, &theta)) / (2.0 * h),
            )?;
        }
        // weight gradient with the weights as free coordinates
        for r in 0..j {
            let p = |wr: f64| {
                let mut w = state.weights.clone();
                w[r] = wr;
                w.iter()
                    .zip(&state.means)
                    .zip(&state.scales)
                    .map(|((w, m), s)| {
                        let z = (y - m) / s;
                        w * (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
                    })
                    .sum::<f64>()
                    .ln()
            };
            let wr = state.weights[r];
            check(
                &format!("state {case} weight gradient {r}"),
                step.grad_weights[r],
                (p(wr + h) - p(wr - h)) / (2.0 * h),
            )?;
        }
        for c in 0..j {
            let shifted = |dmu: f64, dsig: f64| {
                let mut th = theta.clone();
                th[c][0] += dmu;
                th[c][1] = (state.scales[c] + dsig).ln();
                log_p(&w_tilde, &th)
            };
            check(
                &format!("state {case} mean gradient {c}"),
                step.grad_components[c][0],
                (shifted(h, 0.0) - shifted(-h, 0.0)) / (2.0 * h),
            )?;
            check(
                &format!("state {case} scale gradient {c}"),
                step.grad_components[c][1],
                (shifted(0.0, h) - shifted(0.0, -h)) / (2.0 * h),
            )?;
            let lns = theta[c][1];
            check(
                &format!("state {case} scale link {c}"),
                step.jacobian_components[c][1],
                ((lns + h).exp() - (lns - h).exp()) / (2.0 * h),
            )?;
            // chained score in the unconstrained coordinates
            for k in 0..2 {
                let (mut up, mut dn) = (theta.clone(), theta.clone());
                up[c][k] += h;
                dn[c][k] -= h;
                check(
                    &format!("state {case} chained score ({c},{k})"),
                    step.scaled_components[c][k],
                    (log_p(&w_tilde, &up) - log_p(&w_tilde, &dn)) / (2.0 * h),
                )?;
            }
        }
    }

    // A = 0 with κ = (1 − B) x leaves dyadic states unchanged
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let persistence = [0.5, 0.75, 0.875, 0.9375];
    let scalings = [
        ScoreScaling::Identity,
        ScoreScaling::InverseSqrtFisher,
        ScoreScaling::InverseFisher,
    ];
    for case in 0..200 {
        let j = rng.random_range(1..=4);
        let dyadic = |rng: &mut ChaCha8Rng| rng.random_range(-64i32..=64) as f64 / 64.0;
        let w_tilde: Vec<f64> = (0..j - 1).map(|_| dyadic(&mut rng)).collect();
        let theta: Vec<[f64; 2]> = (0..j)
            .map(|_| [dyadic(&mut rng), dyadic(&mut rng)])
            .collect();
        let mut pick = || persistence[rng.random_range(0..persistence.len())];
        let b_w: Vec<f64> = (0..j - 1).map(|_| pick()).collect();
        let comps: Vec<ComponentCoefficients<f64>> = theta
            .iter()
            .map(|th| {
                let b = [pick(), pick()];
                ComponentCoefficients {
                    kappa: [(1.0 - b[0]) * th[0], (1.0 - b[1]) * th[1]],
                    a: [0.0, 0.0],
                    b,
                }
            })
            .collect();
        let coeffs = SdCoefficients {
            kappa_w: w_tilde
                .iter()
                .zip(&b_w)
                .map(|(x, b)| (1.0 - b) * x)
                .collect(),
            a_w: vec![0.0; j - 1],
            b_w,
            components: comps,
            scaling: scalings[case % 3],
        };
        let state = MixtureState::from_unconstrained(w_tilde, theta);
        let mut s = state.clone();
        for _ in 0..5 {
            let y = rng.random_range(-4.0..4.0);
            s = damm_step(y, &s, &coeffs).map_err(|e| e.to_string())?;
            ensure(s == state, || format!("fixed point {case} moved"))?;
        }
    }
    Ok(format!("200 random states, worst finite-difference gap {worst:.2e}; 200 zero-loading states fixed exactly"))
}

// ---------------------------------------------------------------- 4

fn random_stable(n: usize, p: usize, bound: f64, rng: &mut ChaCha8Rng) -> Vec<DMatrix<f64>> {
    loop {
        let b: Vec<DMatrix<f64>> = (0..p)
            .map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.4..0.4)))
            .collect();
        if spectral_radius(&b) < bound {
            return b;
        }
    }
}

fn companion(b: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = b[0].nrows();
    let p = b.len();
    let mut c = DMatrix::zeros(n * p, n * p);
    for (l, bl) in b.iter().enumerate() {
        c.view_mut((0, l * n), (n, n)).copy_from(bl);
    }
    for l in 1..p {
        c.view_mut((l * n, (l - 1) * n), (n, n))
            .copy_from(&DMatrix::<f64>::identity(n, n));
    }
    c
}

fn spectral_radius(b: &[DMatrix<f64>]) -> f64 {
    companion(b)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn simulate_var(
    b: &[DMatrix<f64>],
    c: &DVector<f64>,
    t_len: usize,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let n = c.len();
    let mut data = DMatrix::zeros(t_len, n);
    for t in b.len()..t_len {
        let mut next = c.clone();
        for (k, bk) in b.iter().enumerate() {
            next += bk * data.row(t - 1 - k).transpose();
        }
        next += DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        data.set_row(t, &next.transpose());
    }
    data
}

/// Information-form posterior of the stacked regression using every row up to `upto`.
fn batch_posterior(
    data: &DMatrix<f64>,
    p: usize,
    sigmas: &[DMatrix<f64>],
    prior_var: &DVector<f64>,
    upto: usize,
) -> DVector<f64> {
    let n = data.ncols();
    let k = 1 + n * p;
    let mut info = DMatrix::from_diagonal(&prior_var.map(|v| 1.0 / v));
    let mut score = DVector::zeros(n * k);
    for (s, t) in (p..=upto).enumerate() {
        let x = regressors(data, t, p);
        let mut z = DMatrix::zeros(n, n * k);
        for i in 0..n {
            for j in 0..k {
                z[(i, i * k + j)] = x[j];
            }
        }
        let w = sigmas[s]
            .clone()
            .try_inverse()
            .expect("invertible covariance");
        info += z.transpose() * &w * &z;
        score += z.transpose() * &w * data.row(t).transpose();
    }
    info.lu()
        .solve(&score)
        .expect("posterior precision invertible")
}

fn filter_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut rows = 0;
    for case in 0..50 {
        let p = 1 + case % 2;
        let b = random_stable(3, p, 0.9, &mut rng);
        let c = DVector::from_fn(3, |_, _| rng.random_range(-0.3..0.3));
        let data = simulate_var(&b, &c, 80, &mut rng);
        let spec = TvpVarSpec {
            lags: p,
            lambda: 1.0,
            ..TvpVarSpec::new(3)
        };
        let out = fit_tvpvar(&data, &spec).map_err(|e| e.to_string())?;
        let (_, prior_var) = minnesota_prior(3, p, spec.gamma);
        let sigmas: Vec<DMatrix<f64>> = out.snapshots.iter().map(|s| s.sigma.clone()).collect();
        for (s, snap) in out.snapshots.iter().enumerate() {
            let batch = batch_posterior(&data, p, &sigmas[..=s], &prior_var, snap.row);
            let dev = (&batch - &snap.beta).amax();
            worst = worst.max(dev);
            rows += 1;
            ensure(dev < 1e-8, || {
                format!("dataset {case} row {}: gap {dev:.3e}", snap.row)
            })?;
        }
    }
    within_budget(start.elapsed(), 60.0)?;
    Ok(format!(
        "50 datasets, {rows} filtered dates, worst gap {worst:.2e}"
    ))
}

// ---------------------------------------------------------------- 5

fn random_cov(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * 0.1
}

/// Loop version written directly from the share formula.
fn reference_gfevd(b: &[DMatrix<f64>], sigma: &DMatrix<f64>, h: usize) -> DMatrix<f64> {
    let n = sigma.nrows();
    let mut psi = vec![DMatrix::<f64>::identity(n, n)];
    for s in 1..h {
        let mut next = DMatrix::zeros(n, n);
        for k in 1..=s.min(b.len()) {
            next += &b[k - 1] * &psi[s - k];
        }
        psi.push(next);
    }
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut den = 0.0;
        for ps in &psi {
            for a in 0..n {
                for c in 0..n {
                    den += ps[(i, a)] * sigma[(a, c)] * ps[(i, c)];
                }
            }
        }
        for j in 0..n {
            let mut num = 0.0;
            for ps in &psi {
                let e: f64 = (0..n).map(|a| ps[(i, a)] * sigma[(a, j)]).sum();
                num += e * e;
            }
            d[(i, j)] = num / sigma[(j, j)] / den;
        }
        let row: f64 = d.row(i).sum();
        for j in 0..n {
            d[(i, j)] /= row;
        }
    }
    d
}

fn gfevd_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut row_worst, mut ref_worst) = (0.0f64, 0.0f64);
    for case in 0..100 {
        let n = rng.random_range(2..=6);
        let p = rng.random_range(1..=3);
        let b = random_stable(n, p, 0.95, &mut rng);
        let sigma = random_cov(n, &mut rng);
        let g = gfevd(&vma_expand(&b, 12), &sigma).map_err(|e| e.to_string())?;
        for i in 0..n {
            let dev = (g.d.row(i).sum() - 1.0).abs();
            row_worst = row_worst.max(dev);
            ensure(dev < 1e-12, || {
                format!("system {case} row {i} sums to 1 + {dev:.2e}")
            })?;
        }
        let dev = (&g.d - reference_gfevd(&b, &sigma, 12)).amax();
        ref_worst = ref_worst.max(dev);
        ensure(dev < 1e-12, || {
            format!("system {case}: reference gap {dev:.2e}")
        })?;

        // relabelling the variables permutes the table bit for bit
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let pb: Vec<DMatrix<f64>> = b
            .iter()
            .map(|m| DMatrix::from_fn(n, n, |i, j| m[(perm[i], perm[j])]))
            .collect();
        let ps = DMatrix::from_fn(n, n, |i, j| sigma[(perm[i], perm[j])]);
        let pg = gfevd(&vma_expand(&pb, 12), &ps).map_err(|e| e.to_string())?;
        for i in 0..n {
            for j in 0..n {
                ensure(pg.d[(i, j)] == g.d[(perm[i], perm[j])], || {
                    format!("system {case}: permutation changed ({i},{j})")
                })?;
            }
        }

        // diagonal dynamics and covariance give no spillovers at all
        let diag: Vec<DMatrix<f64>> = (0..p)
            .map(|_| {
                DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.random_range(-0.3..0.3)))
            })
            .collect();
        let dsig = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.random_range(0.1..3.0)));
        let dg = gfevd(&vma_expand(&diag, 12), &dsig).map_err(|e| e.to_string())?;
        for i in 0..n {
            for j in 0..n {
                ensure(i == j || dg.d[(i, j)] == 0.0, || {
                    format!("diagonal system {case}: ({i},{j}) = {}", dg.d[(i, j)])
                })?;
            }
        }
    }
    Ok(format!("100 stable systems, row-sum gap {row_worst:.1e}, reference gap {ref_worst:.1e}; permutation and diagonal checks exact"))
}

// ---------------------------------------------------------------- 6

fn random_shares(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            rng.random_range(1.0..4.0)
        } else {
            rng.random_range(0.0..1.0)
        }
    });
    for i in 0..n {
        let s = d.row(i).sum();
        d.row_mut(i).scale_mut(1.0 / s);
    }
    d
}

fn projection_linearity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = rng.random_range(3..=9);
        let l_count = rng.random_range(2..=4);
        let names: Vec<String> = (0..n).map(|i| format!("N{i}")).collect();
        let cats: Vec<Category> = (0..n)
            .map(|i| {
                if i < n / 2 {
                    Category::Bond
                } else {
                    Category::Equity
                }
            })
            .collect();
        let shares: Vec<DMatrix<f64>> = (0..l_count).map(|_| random_shares(n, &mut rng)).collect();
        let layers = shares
            .iter()
            .enumerate()
            .map(|(l, d)| MomentLayer::from_shares(format!("L{l}"), names.clone(), cats.clone(), d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let (_, weights) = layer_weights(&layers).map_err(|e| e.to_string())?;
        let wsum: f64 = weights.iter().sum();
        ensure((wsum - 1.0).abs() < 1e-12, || {
            format!("case {case}: weights sum to {wsum}")
        })?;

        let refs: Vec<&DMatrix<f64>> = shares.iter().collect();
        let projected = project_matrices(&refs, &weights).map_err(|e| e.to_string())?;
        let lhs = total_index(&projected);
        let rhs: f64 = shares
            .iter()
            .zip(&weights)
            .map(|(d, w)| w * total_index(d))
            .sum();
        let dev = (lhs - rhs).abs();
        worst = worst.max(dev);
        ensure(dev < 1e-12, || {
            format!("case {case}: projection total {lhs}, weighted layers {rhs}")
        })?;

        // the projected edge layer agrees with edges of the projected shares
        let net = MultiLayerNetwork::new(layers).map_err(|e| e.to_string())?;
        let edges = MomentLayer::from_shares("p", names.clone(), cats.clone(), &projected)
            .map_err(|e| e.to_string())?;
        let dev = (&net.projection.edges - &edges.edges).amax();
        ensure(dev < 1e-12, || {
            format!("case {case}: projected edges differ by {dev:.2e}")
        })?;
    }
    Ok(format!(
        "200 random multi-layer inputs, worst total-index gap {worst:.1e}"
    ))
}

// ---------------------------------------------------------------- 7 and 10

fn bundled_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synth/pipeline.toml")
}

struct PipelineRun {
    dir: PathBuf,
    elapsed: Duration,
}

fn run_pipeline(out: &Path) -> Result<PipelineRun, String> {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_mmconnect"))
        .args(["pipeline", "--config"])
        .arg(bundled_config())
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || {
        format!(
            "pipeline failed: {}",
            String::from_utf8_lossy(&status.stderr)
        )
    })?;
    Ok(PipelineRun {
        dir: out.to_path_buf(),
        elapsed: start.elapsed(),
    })
}

fn scratch() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| tempfile::tempdir().expect("temp dir"))
        .path()
}

fn first_run() -> &'static Result<PipelineRun, String> {
    static RUN: OnceLock<Result<PipelineRun, String>> = OnceLock::new();
    RUN.get_or_init(|| run_pipeline(&scratch().join("run_a")))
}

/// Average of `d_ij + d_ji` over within-block and cross-block pairs.
fn block_averages(d: &DMatrix<f64>, bond: &[bool]) -> (f64, f64) {
    let n = d.nrows();
    let (mut within, mut nw, mut cross, mut nc) = (0.0, 0, 0.0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = d[(i, j)] + d[(j, i)];
            if bond[i] == bond[j] {
                within += v;
                nw += 1;
            } else {
                cross += v;
                nc += 1;
            }
        }
    }
    (within / nw as f64, cross / nc as f64)
}

fn synthetic_recovery() -> Outcome {
    let run = first_run().as_ref().map_err(|e| e.clone())?;
    within_budget(run.elapsed, 300.0)?;
    let layers = ["return", "vol", "skew", "kurt"];
    let mut loaded = Vec::new();
    for l in layers {
        let f =
            fs::File::open(run.dir.join(format!("gfevd_{l}.csv"))).map_err(|e| e.to_string())?;
        let (dates, names, ds) = read_gfevd_long(f).map_err(|e| e.to_string())?;
        let by_date: BTreeMap<_, _> = dates.into_iter().zip(ds).collect();
        loaded.push((names, by_date));
    }
    let names = loaded[0].0.clone();
    let bond: Vec<bool> = names.iter().map(|n| n.starts_with("BOND")).collect();

    let mut weights: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut rdr =
        csv::Reader::from_path(run.dir.join("layer_weights.csv")).map_err(|e| e.to_string())?;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        weights
            .entry(rec[0].to_string())
            .or_default()
            .push(rec[3].parse().map_err(|_| "bad weight".to_string())?);
    }

    let mut hits = 0;
    let mut layer_hits = [0usize; 4];
    for (date, w) in &weights {
        let day = chrono::NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|e| e.to_string())?;
        let mats: Vec<&DMatrix<f64>> = loaded.iter().map(|(_, m)| &m[&day]).collect();
        let projected = project_matrices(&mats, w).map_err(|e| e.to_string())?;
        let (within, cross) = block_averages(&projected, &bond);
        if within >= 2.0 * cross {
            hits += 1;
        }
        for (k, m) in mats.iter().enumerate() {
            let (a, b) = block_averages(m, &bond);
            if a >= 2.0 * b {
                layer_hits[k] += 1;
            }
        }
    }
    let total = weights.len();
    let share = hits as f64 / total as f64;
    let per_layer: Vec<String> = layers
        .iter()
        .zip(layer_hits)
        .map(|(l, h)| format!("{l} {:.1}%", 100.0 * h as f64 / total as f64))
        .collect();
    ensure(share >= 0.95, || {
        format!(
            "within >= 2x cross on {:.1}% of {total} dates",
            100.0 * share
        )
    })?;
    Ok(format!(
        "projection within >= 2x cross on {:.1}% of {total} dates ({}); pipeline {:.1}s",
        100.0 * share,
        per_layer.join(", "),
        run.elapsed.as_secs_f64()
    ))
}

fn list_files(dir: &Path) -> Result<Vec<String>, String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            e.map(|e| e.file_name().to_string_lossy().into_owned())
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    names.sort();
    Ok(names)
}

fn determinism() -> Outcome {
    let a = first_run().as_ref().map_err(|e| e.clone())?;
    let b = run_pipeline(&scratch().join("run_b"))?;
    let files = list_files(&a.dir)?;
    ensure(files == list_files(&b.dir)?, || {
        "runs wrote different file sets".into()
    })?;
    for f in &files {
        let same = fs::read(a.dir.join(f)).map_err(|e| e.to_string())?
            == fs::read(b.dir.join(f)).map_err(|e| e.to_string())?;
        ensure(same, || format!("{f} differs between runs"))?;
    }
    Ok(format!(
        "{} output files byte-identical across two runs",
        files.len()
    ))
}

// ---------------------------------------------------------------- 8

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

fn sign_restrictions() -> Outcome {
    let start = Instant::now();
    let data = gen_shock_dataset(&ShockSynthConfig::default()).map_err(|e| e.to_string())?;
    let config = BvarConfig {
        draws: 1000,
        angles: 100,
        ..BvarConfig::default()
    };
    let posterior =
        fit_restricted_bvar(&data.panel, &data.macro_panel, &config).map_err(|e| e.to_string())?;
    let ident =
        identify_signs(&posterior, config.angles, config.seed).map_err(|e| e.to_string())?;
    for d in &ident.accepted {
        let m = d.impact;
        let explicit = m[(0, 0)] > 0.0 && m[(1, 0)] < 0.0 && m[(0, 1)] > 0.0 && m[(1, 1)] > 0.0;
        ensure(explicit && satisfies_signs(&m), || {
            format!("draw {} angle {} violates the signs", d.draw, d.angle)
        })?;
    }
    let shocks = decompose_shocks(&ident, &data.panel).map_err(|e| e.to_string())?;
    ensure(shocks.months == data.truth.months, || {
        "shock months differ from truth".into()
    })?;
    for t in 0..shocks.months.len() {
        ensure(shocks.mp[t] + shocks.info[t] == shocks.total[t], || {
            format!("month {}: parts do not add up", shocks.months[t])
        })?;
        ensure(shocks.total[t] == data.panel.values[(t, 0)], || {
            format!("month {}: total is not the surprise", shocks.months[t])
        })?;
    }
    let corr = correlation(&shocks.mp, &data.truth.s_mp);
    ensure(corr > 0.9, || {
        format!("median MP shock correlates {corr:.3} with truth")
    })?;
    within_budget(start.elapsed(), 180.0)?;
    Ok(format!(
        "{} of {} rotations accepted, all sign-consistent; MP correlation {corr:.3}; exact additivity over {} months; {:.1}s",
        ident.accepted.len(),
        ident.tried,
        shocks.months.len(),
        start.elapsed().as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 9

/// AR(1) index hit by regime-specific policy shocks; the response at `h` is `0.5^h β`.
fn lp_dgp(t_len: usize, beta: [f64; 3], rng: &mut ChaCha8Rng) -> LpInput {
    let months = YearMonth::new(1990, 1).expect("valid month").range(t_len);
    let mut dummies = RegimeDummies {
        months: months.clone(),
        hike: vec![0.0; t_len],
        unch: vec![0.0; t_len],
        cut: vec![0.0; t_len],
    };
    let (mut mp, mut cpi, mut ip, mut c) = (
        vec![0.0; t_len],
        vec![0.0; t_len],
        vec![0.0; t_len],
        vec![0.0; t_len],
    );
    for t in 0..t_len {
        if rng.random::<f64>() < 0.75 {
            let r: f64 = rng.random();
            let slot = if r < 0.3 {
                &mut dummies.hike
            } else if r < 0.7 {
                &mut dummies.unch
            } else {
                &mut dummies.cut
            };
            slot[t] = 1.0;
            mp[t] = StandardNormal.sample(rng);
        }
        cpi[t] = StandardNormal.sample(rng);
        ip[t] = StandardNormal.sample(rng);
        let e: f64 = StandardNormal.sample(rng);
        let prev = if t > 0 { c[t - 1] } else { 0.0 };
        c[t] = 0.2
            + 0.5 * prev
            + mp[t]
                * (beta[0] * dummies.hike[t]
                    + beta[1] * dummies.unch[t]
                    + beta[2] * dummies.cut[t])
            + 0.3 * cpi[t]
            - 0.2 * ip[t]
            + e;
    }
    LpInput {
        months,
        dependent: c,
        mp,
        dummies,
        controls: Some((cpi, ip)),
    }
}

fn lp_coverage() -> Outcome {
    let beta = [2.0, 0.5, -1.0];
    let horizons = [0usize, 3, 6];
    let spec = LpSpec {
        h_max: 6,
        ..LpSpec::default()
    };
    let band = spec
        .bands
        .iter()
        .position(|&b| b == 0.90)
        .expect("90% band configured");
    let reps: usize = std::env::var("MMCONNECT_LP_REPS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(500);
    let seed: u64 = std::env::var("MMCONNECT_LP_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut covered = [[0usize; 3]; 3];
    for _ in 0..reps {
        let input = lp_dgp(300, beta, &mut rng);
        for (k, &h) in horizons.iter().enumerate() {
            let r = lp_regress(&input, h, &spec).map_err(|e| e.to_string())?;
            for reg in 0..3 {
                let col = r.regime(reg);
                let truth = 0.5f64.powi(h as i32) * beta[reg];
                let b = &r.bands[band];
                if b.lo[col] <= truth && truth <= b.hi[col] {
                    covered[k][reg] += 1;
                }
            }
        }
    }
    let rate = |k: usize, reg: usize| covered[k][reg] as f64 / reps as f64;
    let summary: Vec<String> = horizons
        .iter()
        .enumerate()
        .map(|(k, h)| {
            format!(
                "h={h}: {:.1}% (unch {:.1}%, cut {:.1}%)",
                100.0 * rate(k, 0),
                100.0 * rate(k, 1),
                100.0 * rate(k, 2)
            )
        })
        .collect();
    for (k, h) in horizons.iter().enumerate() {
        let r = rate(k, 0);
        ensure((0.85..=0.95).contains(&r), || {
            format!(
                "h={h}: 90% band covers the hike response {:.1}% ({})",
                100.0 * r,
                summary.join("; ")
            )
        })?;
    }

    // |s| > cutoff exactly when p is below the threshold
    let threshold = heat_p_threshold();
    ensure(
        (threshold - (1.0 - 0.48f64.powf(1.0 / 7.0))).abs() == 0.0 && HEAT_CUTOFF == 0.48,
        || "threshold formula".into(),
    )?;
    for k in 0..=100_000 {
        let p = k as f64 / 100_000.0;
        for coef in [-1.3, 0.7] {
            let s = heat_indicator(coef, p);
            ensure((s.abs() > HEAT_CUTOFF) == (p < threshold), || {
                format!("p = {p}: s = {s}")
            })?;
            ensure(s.signum() == coef.signum() || s == 0.0, || {
                format!("p = {p}: sign of s")
            })?;
        }
    }
    // (1 − p)^7 = cutoff at the threshold, and s is monotone in p around it
    let at = (1.0 - threshold).powi(7);
    ensure((at - HEAT_CUTOFF).abs() < 1e-15, || {
        format!("(1 - threshold)^7 = {at}")
    })?;
    for eps in [1e-9, 1e-12] {
        ensure(
            heat_indicator(1.0, threshold - eps) > HEAT_CUTOFF
                && heat_indicator(1.0, threshold + eps) < HEAT_CUTOFF,
            || format!("boundary at offset {eps}"),
        )?;
    }
    Ok(format!("90% band coverage of the hike response over {reps} replications, {}; heat threshold p < {threshold:.6}", summary.join("; ")))
}

// ---------------------------------------------------------------- 11

fn brute_cohesion(n: usize, adj: &[(usize, usize, f64)]) -> f64 {
    let mut total = 0.0;
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        for _ in 0..n {
            let u = (0..n)
                .filter(|&v| !done[v])
                .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
                .expect("unvisited node");
            if dist[u].is_infinite() {
                break;
            }
            done[u] = true;
            for &(a, b, w) in adj {
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                dist[v] = dist[v].min(dist[u] + 1.0 / w);
            }
        }
        total += (0..n)
            .filter(|&v| v != s && dist[v].is_finite())
            .map(|v| 1.0 / dist[v])
            .sum::<f64>();
    }
    total / (n * (n - 1)) as f64
}

/// Deletes each edge in turn and recomputes cohesion from scratch.
fn brute_bridge(edges: &DMatrix<f64>) -> Vec<f64> {
    let n = edges.nrows();
    let adj: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| edges[(i, j)] > 0.0)
        .map(|(i, j)| (i, j, edges[(i, j)]))
        .collect();
    let base = brute_cohesion(n, &adj);
    let mut scores = vec![0.0; n];
    for (k, &(i, j, _)) in adj.iter().enumerate() {
        let without: Vec<_> = adj
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != k)
            .map(|(_, e)| *e)
            .collect();
        let drop = base - brute_cohesion(n, &without);
        scores[i] += drop;
        scores[j] += drop;
    }
    let max = scores.iter().cloned().fold(0.0, f64::max);
    scores
        .iter()
        .map(|s| if max > 0.0 { s / max } else { 0.0 })
        .collect()
}

fn bridge_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let densities = [1.0, 0.8, 0.5, 0.3];
    let graphs = 200;
    for case in 0..graphs {
        let density = densities[case % densities.len()];
        let mut e = DMatrix::zeros(9, 9);
        for i in 0..9 {
            for j in (i + 1)..9 {
                if rng.random::<f64>() < density {
                    let w = rng.random_range(0.01..1.0);
                    e[(i, j)] = w;
                    e[(j, i)] = w;
                }
            }
        }
        let fast = bridge_centrality(&e).map_err(|e| e.to_string())?;
        let slow = brute_bridge(&e);
        for (k, (a, b)) in fast.iter().zip(&slow).enumerate() {
            let dev = (a - b).abs();
            worst = worst.max(dev);
            ensure(dev < 1e-12, || format!("graph {case} node {k}: {a} vs {b}"))?;
        }
    }
    Ok(format!(
        "{graphs} random 9-node graphs, worst gap {worst:.1e}"
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "table fixtures", table_fixtures),
        (2, "mixture moments", mixture_moment_oracle),
        (3, "score recursion", score_recursion),
        (4, "filter equivalence", filter_equivalence),
        (5, "GFEVD invariants", gfevd_invariants),
        (6, "projection linearity", projection_linearity),
        (7, "synthetic recovery", synthetic_recovery),
        (8, "sign restrictions", sign_restrictions),
        (9, "local-projection coverage", lp_coverage),
        (10, "determinism", determinism),
        (11, "bridge centrality", bridge_brute_force),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2}: PASS  {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2}: FAIL  {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    let strict = std::env::var("MMCONNECT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        std::process::exit(1);
    }
}
