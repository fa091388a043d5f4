//! Magnitude bounds, decay-region diagnostics, error metrics, the noise
//! amplification experiment and timing.

use std::f64::consts::{FRAC_PI_2, PI};
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{compute, Algorithm};
use crate::error::{check_beta, Error, Result};
use crate::recursion::{sweep_backward, sweep_forward, CoeffTriangle, DenseMatrix};
use crate::special::coeff_d;

/// Reduces `(m', m, beta)` to `0 <= beta <= pi/2`, `m >= 0`, `|m'| <= m`
/// without changing `|H|`.
fn reduce_indices(mp: i64, m: i64, beta: f64) -> (i64, i64, f64) {
    let (mp, beta) = if beta > FRAC_PI_2 { (-mp, PI - beta) } else { (mp, beta) };
    let (mp, m) = if m < 0 { (-mp, -m) } else { (mp, m) };
    if mp.abs() <= m {
        return (mp, m, beta);
    }
    let (mp, m) = (m, mp);
    if m < 0 {
        (-mp, -m, beta)
    } else {
        (mp, m, beta)
    }
}

fn ln_binomial(q: i64, l: i64) -> f64 {
    libm::lgamma((q + 1) as f64) - libm::lgamma((l + 1) as f64) - libm::lgamma((q - l + 1) as f64)
}

/// `p * ln(x)` with `0 * ln(0) = 0`.
fn weighted_ln(p: f64, x: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * x.ln()
    }
}

/// `x ln x` with the limit value 0 at `x = 0`.
fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Smallest root of `(n-m'-s)(n-m-s) = t^2 (s+1)(m'+m+s+1)`, in the form
/// that stays finite as `t -> 1`.
fn smallest_root(n: i64, mp: i64, m: i64, t: f64) -> f64 {
    let t2 = t * t;
    let a = 1.0 - t2;
    let b = -(((2 * n - m - mp) as f64) + t2 * (m + mp + 2) as f64);
    let c = ((n - mp) * (n - m)) as f64 - t2 * (m + mp + 1) as f64;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    2.0 * c / (-b + disc.sqrt())
}

/// `ln` of `(n-m+1) * rho * h_sigma`, the bound evaluated at one summation index.
fn ln_bound_at(n: i64, mp: i64, m: i64, sigma: i64, ln_c: f64, ln_s: f64) -> f64 {
    let k = m + mp + sigma;
    let binoms =
        ln_binomial(n - m, sigma) + ln_binomial(n - mp, sigma) + ln_binomial(n + m, k) + ln_binomial(n + mp, k);
    ((n - m + 1) as f64).ln()
        + 0.5 * binoms
        + weighted_ln((2 * sigma + m + mp) as f64, ln_c.exp())
        + weighted_ln((2 * n - 2 * sigma - m - mp) as f64, ln_s.exp())
}

/// Upper bound on `|H_n^{m'm}(beta)|` from the largest term of the direct sum,
/// capped at 1.
///
/// The maximizing index is the integer just below or just above the smallest
/// root of the term-ratio equation; both are evaluated and the larger kept.
pub fn bound_b12(n: usize, mp: i64, m: i64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let ni = n as i64;
    if mp.abs() > ni || m.abs() > ni {
        return Err(Error::Domain(format!("indices ({mp}, {m}) outside degree {n}")));
    }
    let (mp, m, beta) = reduce_indices(mp, m, beta);
    let (ln_c, ln_s) = ((0.5 * beta).cos().ln(), (0.5 * beta).sin().ln());
    let t = (0.5 * beta).tan();
    let top = ni - m;
    let root = smallest_root(ni, mp, m, t);
    let base = if root.is_finite() && root > 0.0 { root.floor() as i64 } else { 0 };
    let ln_b = [base, base + 1]
        .into_iter()
        .map(|s| s.clamp(0, top))
        .map(|s| ln_bound_at(ni, mp, m, s, ln_c, ln_s))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ln_b.exp().min(1.0))
}

/// Scaled indices `mu = m/n`, `mu' = m'/n` with the principal asymptotic
/// maximizer `xi = s/n`, `t = tan(beta/2)` and the growth exponent `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub mu: f64,
    pub mu_prime: f64,
    pub xi: f64,
    pub t: f64,
    pub lambda: f64,
}

impl BoundParams {
    /// Reduces to `0 <= beta <= pi/2`, `mu >= 0`, `|mu'| <= mu` first.
    pub fn new(mu: f64, mu_prime: f64, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if mu.abs() > 1.0 || mu_prime.abs() > 1.0 {
            return Err(Error::Domain(format!("scaled indices ({mu_prime}, {mu}) outside [-1, 1]")));
        }
        let (mu_prime, beta) = if beta > FRAC_PI_2 { (-mu_prime, PI - beta) } else { (mu_prime, beta) };
        let (mu_prime, mu) = if mu < 0.0 { (-mu_prime, -mu) } else { (mu_prime, mu) };
        let (mu_prime, mu) = if mu_prime.abs() > mu {
            if mu_prime < 0.0 {
                (-mu, -mu_prime)
            } else {
                (mu, mu_prime)
            }
        } else {
            (mu_prime, mu)
        };
        let t = (0.5 * beta).tan();
        let xi = principal_xi(mu, mu_prime, t);
        let lambda = lambda_of(mu, mu_prime, xi, beta);
        Ok(Self { mu, mu_prime, xi, t, lambda })
    }

    /// Discriminant of the scaled root equation; never negative.
    pub fn discriminant(&self) -> f64 {
        let a = 1.0 - self.t * self.t;
        let b = 2.0 - a * (self.mu + self.mu_prime);
        b * b - 4.0 * a * (1.0 - self.mu) * (1.0 - self.mu_prime)
    }
}

fn principal_xi(mu: f64, mu_prime: f64, t: f64) -> f64 {
    let a = 1.0 - t * t;
    let b = 2.0 - a * (mu + mu_prime);
    let disc = (b * b - 4.0 * a * (1.0 - mu) * (1.0 - mu_prime)).max(0.0);
    let den = b + disc.sqrt();
    if den == 0.0 {
        0.0
    } else {
        2.0 * (1.0 - mu) * (1.0 - mu_prime) / den
    }
}

fn lambda_of(mu: f64, mup: f64, xi: f64, beta: f64) -> f64 {
    let half = |x: f64| 0.5 * xlnx(x);
    half(1.0 - mu) + half(1.0 - mup) + half(1.0 + mu) + half(1.0 + mup)
        - xlnx(xi)
        - xlnx(mu + mup + xi)
        - xlnx(1.0 - mu - xi)
        - xlnx(1.0 - mup - xi)
        + weighted_ln(mu + mup + 2.0 * xi, (0.5 * beta).cos())
        + weighted_ln(2.0 - mu - mup - 2.0 * xi, (0.5 * beta).sin())
}

/// Exponent `lambda(mu, mu'; beta)` of the asymptotic bound `|H| <= C e^{lambda n}`.
/// Negative values mark the exponentially small region.
pub fn lambda_exponent(mu: f64, mu_prime: f64, beta: f64) -> Result<f64> {
    BoundParams::new(mu, mu_prime, beta).map(|p| p.lambda)
}

/// Position relative to the turning-point ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Inside,
    Boundary,
    Outside,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Inside => "inside",
            Region::Boundary => "boundary",
            Region::Outside => "outside",
        }
    }
}

/// Classifies `(mu, mu')` against the ellipse
/// `(mu+mu')^2 / (4 cos^2(beta/2)) + (mu-mu')^2 / (4 sin^2(beta/2)) = 1`,
/// which separates the oscillatory interior from the decaying exterior.
pub fn ellipse_contains(mu: f64, mu_prime: f64, beta: f64) -> Region {
    let term = |num: f64, den: f64| {
        if num == 0.0 {
            0.0
        } else if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    };
    let (s, c) = (0.5 * beta).sin_cos();
    let v = term((mu + mu_prime).powi(2), 4.0 * c * c) + term((mu - mu_prime).powi(2), 4.0 * s * s);
    if (v - 1.0).abs() <= 1e-12 {
        Region::Boundary
    } else if v < 1.0 {
        Region::Inside
    } else {
        Region::Outside
    }
}

fn k_coeff(n: i64, m: i64) -> f64 {
    0.5 * (coeff_d(n, m - 1) + coeff_d(n, m))
}

/// Propagation speed `c = k^m / k^{m'}` of the recursion, with
/// `k^j = (d^{j-1} + d^j) / 2`.
pub fn cfl_speed(n: usize, m: i64, mp: i64) -> Result<f64> {
    let ni = n as i64;
    if mp == 0 {
        return Err(Error::Degenerate("k^0 vanishes; the speed is undefined at m' = 0".into()));
    }
    if mp.abs() > ni || m.abs() > ni {
        return Err(Error::Domain(format!("indices ({mp}, {m}) outside degree {n}")));
    }
    Ok(k_coeff(ni, m) / k_coeff(ni, mp))
}

fn dense_rows(tri: &CoeffTriangle) -> Vec<Vec<f64>> {
    let ni = tri.n() as i64;
    (-ni..=ni).into_par_iter().map(|mp| tri.row(mp)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn delta(i: i64, j: i64) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// `max |(H H)_{m'm} - delta_{m'm}|` over all index pairs.
///
/// `H H` inherits the index symmetries of `H`, so only pairs `m >= |m'|`
/// are evaluated.
pub fn unitarity_error(tri: &CoeffTriangle) -> f64 {
    let ni = tri.n() as i64;
    let rows = dense_rows(tri);
    let row = |i: i64| &rows[(i + ni) as usize];
    (0..=ni)
        .into_par_iter()
        .map(|m| (-m..=m).map(|mp| (dot(row(mp), row(m)) - delta(mp, m)).abs()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// [`unitarity_error`] for a materialized matrix, over every index pair.
pub fn unitarity_error_dense(mat: &DenseMatrix) -> f64 {
    let ni = mat.n() as i64;
    (-ni..=ni)
        .into_par_iter()
        .map(|i| (-ni..=ni).map(|j| (dot(mat.row(i), mat.row(j)) - delta(i, j)).abs()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// Unitarity error restricted to the given rows, each paired with every
/// column. Uses `O(n * rows)` memory, for degrees too large to densify.
pub fn unitarity_error_sampled(tri: &CoeffTriangle, rows: &[i64]) -> Result<f64> {
    let ni = tri.n() as i64;
    if let Some(r) = rows.iter().find(|r| r.abs() > ni) {
        return Err(Error::Domain(format!("row {r} outside degree {ni}")));
    }
    let picked: Vec<Vec<f64>> = rows.iter().map(|&r| tri.row(r)).collect();
    let width = 2 * tri.n() + 1;
    let worst = (-ni..=ni)
        .into_par_iter()
        .map_init(
            || vec![0.0; width],
            |buf, j| {
                tri.row_into(j, buf);
                rows.iter().zip(&picked).map(|(&i, ri)| (dot(ri, buf) - delta(i, j)).abs()).fold(0.0, f64::max)
            },
        )
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// Largest absolute difference between two coefficient sets over all
/// `(2n+1)^2` indices. Every index maps onto a stored entry, so comparing
/// storage is exhaustive.
pub fn cross_error(a: &CoeffTriangle, b: &CoeffTriangle) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), actual: b.n() });
    }
    if a.beta() != b.beta() {
        return Err(Error::Mismatch(format!("angles differ: {} vs {}", a.beta(), b.beta())));
    }
    Ok(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Statistics of the initial noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// `U(-1, 1)` on both seeded layers.
    Uniform,
    /// `U(0, 1)` on layer 0 and `(-1)^m U(0, 1)` on layer 1.
    Coherent,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Uniform => "uniform",
            NoiseKind::Coherent => "coherent",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NoiseKind::Uniform),
            "coherent" => Ok(NoiseKind::Coherent),
            _ => Err(Error::Domain(format!("unknown noise model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub seed: u64,
    pub trials: u32,
}

/// Generator for one realization; streams are keyed by `(n, trial)` so
/// results do not depend on evaluation order.
fn realization_rng(seed: u64, n: usize, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    rng
}

/// One noisy realization: the two seeded layers filled with noise and then
/// propagated through both sweeps. Returns the triangle and the largest
/// initial magnitude.
pub fn noise_realization(n: usize, kind: NoiseKind, seed: u64, trial: u32) -> Result<(CoeffTriangle, f64)> {
    if n < 2 {
        return Err(Error::Domain(format!("noise experiment needs n >= 2, got {n}")));
    }
    let mut rng = realization_rng(seed, n, trial);
    let mut tri = CoeffTriangle::try_zeros(n, 0.0)?;
    let mut initial = 0.0f64;
    for v in tri.layer_mut(0) {
        *v = match kind {
            NoiseKind::Uniform => rng.gen_range(-1.0..1.0),
            NoiseKind::Coherent => rng.gen_range(0.0..1.0),
        };
        initial = initial.max(v.abs());
    }
    for (k, v) in tri.layer_mut(1).iter_mut().enumerate() {
        let m = k as i64 + 1;
        *v = match kind {
            NoiseKind::Uniform => rng.gen_range(-1.0..1.0),
            NoiseKind::Coherent => rng.gen_range(0.0..1.0) * crate::special::parity(m),
        };
        initial = initial.max(v.abs());
    }
    sweep_forward(&mut tri);
    sweep_backward(&mut tri);
    Ok((tri, initial))
}

/// Worst growth factor `max |eta| / max |eta_0|` over `model.trials` realizations.
pub fn noise_amplification(n: usize, model: &NoiseModel) -> Result<f64> {
    if model.trials == 0 {
        return Err(Error::Domain("at least one trial is needed".into()));
    }
    let factors = (0..model.trials)
        .into_par_iter()
        .map(|t| noise_realization(n, model.kind, model.seed, t).map(|(tri, init)| tri.max_abs() / init))
        .collect::<Result<Vec<_>>>()?;
    Ok(factors.into_iter().fold(0.0, f64::max))
}

/// Least-squares slope of `ln value` against `ln n`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Domain("a power-law fit needs at least two points".into()));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::Domain(format!("non-positive point {p:?} in power-law fit")));
    }
    let k = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    Ok(sxy / sxx)
}

/// One measured quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub n: usize,
    pub beta: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub wall_seconds: f64,
    pub seed: Option<u64>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Median wall time of `repeats` single-degree computations for each `n`.
/// Runs sequentially so timings do not interfere.
pub fn benchmark(algo: Algorithm, n_list: &[usize], beta: f64, repeats: usize) -> Result<Vec<ExperimentRecord>> {
    let repeats = repeats.max(1);
    n_list
        .iter()
        .map(|&n| {
            let mut times = Vec::with_capacity(repeats);
            for _ in 0..repeats {
                let start = Instant::now();
                let tri = compute(algo, n, beta)?;
                black_box(tri.as_slice().iter().sum::<f64>());
                times.push(start.elapsed().as_secs_f64());
            }
            let secs = median(times);
            Ok(ExperimentRecord {
                n,
                beta: Some(beta),
                metric: format!("{}_median_seconds", algo.name()),
                value: secs,
                wall_seconds: secs,
                seed: None,
            })
        })
        .collect()
}
