//! FFT-based computation of the rotation coefficients.
//!
//! Rotating the frame turns `Y_n^m` into a trigonometric polynomial of degree
//! `n` in the azimuth `phi_hat` of the rotated frame, whose Fourier
//! coefficients are `H_n^{m'm}(beta)` times known scale factors. Sampling it at
//! `N >= 2n + 1` equispaced nodes and transforming recovers every `m'` of one
//! column `m` exactly (up to rounding).
//!
//! The basic variant samples on a fixed cone `theta_hat` near the equator. The
//! modified variant samples the equator itself, adding a `theta_hat`
//! derivative so that the odd-parity coefficients, which vanish on the
//! equator, remain recoverable.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_beta, Error, Result};
use crate::recursion::{layer_m0, CoeffTriangle};
use crate::special::{parity, seminorm_legendre_at_zero, seminorm_legendre_orders, seminorm_legendre_orders_sc};

/// Divisors smaller than this make the basic variant unusable.
pub const MIN_DIVISOR: f64 = 1e-250;
/// Above this degree the modified variant is known to lose accuracy.
pub const DEGRADED_ABOVE: usize = 2000;

/// Spherical angles of a point after the frame rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedAngles {
    pub theta: f64,
    pub phi: f64,
}

/// Fourier coefficients of one sampled column, `values[k]` for `m' = k - n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumLine {
    pub n: usize,
    pub m: usize,
    pub values: Vec<Complex64>,
}

impl SpectrumLine {
    pub fn get(&self, mp: i64) -> Complex64 {
        self.values[(mp + self.n as i64) as usize]
    }
}

/// Diagnostics of an FFT run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FftReport {
    /// Largest `|Im(G/K)|` relative to the largest `|G/K|`.
    pub imag_residue: f64,
    /// Set when `n` exceeds [`DEGRADED_ABOVE`].
    pub degraded: bool,
    /// Transform length used.
    pub length: usize,
}

/// Smallest 5-smooth length that is at least `2n + 2`.
pub fn fft_length(n: usize) -> usize {
    let mut len = 2 * n + 2;
    loop {
        let mut r = len;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return len;
        }
        len += 1;
    }
}

fn rotated_cartesian(beta: f64, theta_hat: f64, phi_hat: f64) -> (f64, f64, f64) {
    let (sb, cb) = beta.sin_cos();
    let (st, ct) = theta_hat.sin_cos();
    let (sp, cp) = phi_hat.sin_cos();
    let x = -cb * st * cp + sb * ct;
    let y = -st * sp;
    let z = sb * st * cp + cb * ct;
    (x, y, z)
}

/// Where the point `(theta_hat, phi_hat)` of the rotated frame lies in the
/// original frame, for a rotation by `beta` with `alpha = gamma = 0`.
pub fn rotate_point(beta: f64, theta_hat: f64, phi_hat: f64) -> RotatedAngles {
    let (x, y, z) = rotated_cartesian(beta, theta_hat, phi_hat);
    let theta = z.clamp(-1.0, 1.0).acos();
    let rho = x.hypot(y);
    let phi = if rho < 1e-300 { 0.0 } else { y.atan2(x).rem_euclid(TAU) };
    RotatedAngles { theta, phi: if phi >= TAU { 0.0 } else { phi } }
}

fn normalization(n: usize) -> f64 {
    ((2 * n + 1) as f64 / (4.0 * PI)).sqrt()
}

/// Cone angle for the basic variant: `pi/2 - 0.55/n`, nudged toward the pole
/// by `0.1/n` until no divisor underflows.
pub fn default_theta_hat(n: usize) -> f64 {
    if n == 0 {
        return FRAC_PI_2;
    }
    let step = 1.0 / n as f64;
    let mut theta = FRAC_PI_2 - 0.55 * step;
    let mut q = vec![0.0; n + 1];
    for _ in 0..8 {
        if seminorm_legendre_orders(n, theta.cos(), &mut q).is_ok() && q.iter().all(|v| v.abs() >= MIN_DIVISOR) {
            break;
        }
        theta -= 0.1 * step;
    }
    theta
}

struct Planned {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Planned {
    fn new(len: usize) -> Self {
        Self { fft: FftPlanner::new().plan_fft_forward(len), len }
    }

    /// Spectrum `G_{m'} = (1/N) sum_j g_j e^{-i m' phi_j}` for `|m'| <= n`.
    fn spectrum(&self, n: usize, mut samples: Vec<Complex64>) -> Vec<Complex64> {
        self.fft.process(&mut samples);
        let scale = 1.0 / self.len as f64;
        let ni = n as i64;
        (-ni..=ni).map(|mp| samples[mp.rem_euclid(self.len as i64) as usize] * scale).collect()
    }
}

fn check_length(n: usize, len: usize) -> Result<()> {
    if len < 2 * n + 1 {
        return Err(Error::Domain(format!("transform length {len} cannot resolve degree {n}; need >= {}", 2 * n + 1)));
    }
    Ok(())
}

/// Per-node data: `Q_n^k(x_j)` for all `k`, and `e^{i phi_j}`.
struct NodeTable {
    q: Vec<Vec<f64>>,
    e_phi: Vec<Complex64>,
}

/// Stores column `m` of the recovered coefficients, keeping `|m'| <= m`, and
/// returns the largest real and imaginary magnitudes seen.
fn store_column(tri: &mut CoeffTriangle, m: usize, h: &[Complex64]) -> (f64, f64) {
    let (n, mi) = (tri.n() as i64, m as i64);
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for mp in -mi..=mi {
        let v = h[(mp + n) as usize];
        tri.set(mp, mi, v.re);
        re = re.max(v.re.abs());
        im = im.max(v.im.abs());
    }
    (re, im)
}

fn fill_column_zero(tri: &mut CoeffTriangle) -> Result<()> {
    let row0 = layer_m0(tri.n(), tri.beta())?;
    tri.set(0, 0, row0[0]);
    Ok(())
}

/// Basic variant: samples `Y_n^m` on the cone `theta_hat` of the rotated frame.
pub fn compute_subspace_fft_basic(n: usize, beta: f64, theta_hat: f64) -> Result<CoeffTriangle> {
    compute_subspace_fft_basic_with(n, beta, theta_hat, fft_length(n)).map(|(t, _)| t)
}

/// Basic variant with an explicit transform length.
pub fn compute_subspace_fft_basic_with(
    n: usize,
    beta: f64,
    theta_hat: f64,
    len: usize,
) -> Result<(CoeffTriangle, FftReport)> {
    check_beta(beta)?;
    check_length(n, len)?;
    let mut tri = CoeffTriangle::try_zeros(n, beta)?;
    fill_column_zero(&mut tri)?;
    let report = FftReport { imag_residue: 0.0, degraded: n > DEGRADED_ABOVE, length: len };
    if n == 0 {
        return Ok((tri, report));
    }

    let norm = normalization(n);
    let mut q_hat = vec![0.0; n + 1];
    seminorm_legendre_orders(n, theta_hat.cos(), &mut q_hat)?;
    let divisors: Vec<f64> = (0..=n).map(|k| parity(k as i64) * norm * q_hat[k]).collect();
    if let Some((k, d)) = divisors.iter().enumerate().find(|(_, d)| d.abs() < MIN_DIVISOR) {
        return Err(Error::IllConditioned { m_prime: k as i64, value: *d });
    }

    let nodes = (0..len)
        .into_par_iter()
        .map(|j| {
            let phi_hat = TAU * j as f64 / len as f64;
            let (x, y, z) = rotated_cartesian(beta, theta_hat, phi_hat);
            let rho = x.hypot(y);
            let mut q = vec![0.0; n + 1];
            seminorm_legendre_orders_sc(n, z.clamp(-1.0, 1.0), rho, &mut q)?;
            let e = if rho < 1e-300 { Complex64::new(1.0, 0.0) } else { Complex64::new(x / rho, y / rho) };
            Ok((q, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let (q, e_phi) = nodes.into_iter().unzip();
    let table = NodeTable { q, e_phi };

    let plan = Planned::new(len);
    let ni = n as i64;
    let columns: Vec<Vec<Complex64>> = (1..=n)
        .into_par_iter()
        .map(|m| {
            let pre = parity(m as i64) * norm;
            let samples = (0..len).map(|j| table.e_phi[j].powi(m as i32) * (pre * table.q[j][m])).collect();
            let spec = plan.spectrum(n, samples);
            (-ni..=ni).map(|mp| spec[(mp + ni) as usize] / divisors[mp.unsigned_abs() as usize]).collect()
        })
        .collect();
    finish(tri, columns, report)
}

fn finish(
    mut tri: CoeffTriangle,
    columns: Vec<Vec<Complex64>>,
    mut report: FftReport,
) -> Result<(CoeffTriangle, FftReport)> {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for (k, col) in columns.iter().enumerate() {
        let (r, i) = store_column(&mut tri, k + 1, col);
        re = re.max(r);
        im = im.max(i);
    }
    report.imag_residue = if re > 0.0 { im / re } else { im };
    Ok((tri, report))
}

/// Scale `K_n^{m'}` relating the spectrum of the modified sample function to
/// `H`: `G^{m'm} = K^{m'} H^{m'm}`.
pub fn spectrum_scale_k(n: usize, mp: i64, gamma: f64) -> Result<f64> {
    let k = mp.unsigned_abs() as usize;
    if k > n {
        return Err(Error::Domain(format!("|m'| = {k} exceeds degree {n}")));
    }
    if gamma == 0.0 {
        return Err(Error::Degenerate("gamma must be nonzero".into()));
    }
    let norm = normalization(n);
    let sign = parity(mp);
    let value = if (n + k).is_multiple_of(2) {
        sign * norm * seminorm_legendre_at_zero(n, k)
    } else if k == 0 {
        // uses P_n^{-1} = -P_n^1 / (n(n+1))
        norm * gamma * ((n * (n + 1)) as f64).sqrt() * seminorm_legendre_at_zero(n, 1)
    } else {
        let w = (((n + k) * (n - k + 1)) as f64).sqrt();
        -sign * norm * gamma * w * seminorm_legendre_at_zero(n, k - 1)
    };
    if value == 0.0 {
        return Err(Error::Degenerate(format!("K vanishes at n = {n}, m' = {mp}")));
    }
    Ok(value)
}

/// Index of a pole node (`phi_hat = 0` gives `Some(0)`, `phi_hat = pi` gives `Some(1)`).
fn pole_index(j: usize, len: usize) -> Option<i64> {
    if j == 0 {
        Some(0)
    } else if 2 * j == len {
        Some(1)
    } else {
        None
    }
}

/// Closed-form value at `phi_hat = k pi` for `beta = pi/2`.
fn pole_value(n: usize, m: usize, gamma: f64, k: i64) -> Complex64 {
    if m >= 2 {
        return Complex64::new(0.0, 0.0);
    }
    let nf = n as f64;
    let sign = parity((n as i64 + 1) * k);
    Complex64::new(-gamma * 0.5 * normalization(n) * (nf * (nf + 1.0)).sqrt() * sign, 0.0)
}

/// Sample value from precomputed `Q_n^{m-1}(x), Q_n^m(x)` on the equator of
/// the rotated frame. `x = sin(beta) cos(phi_hat)`.
#[allow(clippy::too_many_arguments)]
fn g_from_legendre(
    n: usize,
    m: usize,
    beta: f64,
    gamma: f64,
    phi_hat: f64,
    q_prev: f64,
    q_m: f64,
    pole: Option<i64>,
) -> Complex64 {
    let norm = normalization(n);
    let mi = m as i64;
    let (sp, cp) = phi_hat.sin_cos();
    if beta == FRAC_PI_2 {
        if let Some(k) = pole {
            return pole_value(n, m, gamma, k);
        }
        let sgn = if sp >= 0.0 { 1.0 } else { -1.0 };
        let phase = Complex64::new(0.0, sgn).powi(mi as i32);
        let factor = Complex64::new(1.0, -gamma * m as f64 / sp);
        return phase * factor * (norm * q_m);
    }
    let (sb, cb) = beta.sin_cos();
    let s = cb.hypot(sb * sp);
    let e = Complex64::new(-cb * cp / s, -sp / s);
    let w = (((n + m) * (n - m + 1)) as f64).sqrt();
    let inner =
        Complex64::new(q_m, 0.0) - (gamma / s) * (Complex64::new(w * cb * q_prev, 0.0) - e * (m as f64 * sb * q_m));
    e.powi(mi as i32) * inner * (parity(mi) * norm)
}

/// Cosine and sine of the polar angle seen by the modified sample function.
fn modified_abscissa(beta: f64, phi_hat: f64) -> (f64, f64) {
    let (sp, cp) = phi_hat.sin_cos();
    if beta == FRAC_PI_2 {
        return (cp.clamp(-1.0, 1.0), sp.abs());
    }
    let (sb, cb) = beta.sin_cos();
    ((sb * cp).clamp(-1.0, 1.0), cb.hypot(sb * sp))
}

/// The modified sample function `g_n^m(phi_hat; beta)`, `m >= 1`.
pub fn sample_g_modified(n: usize, m: usize, beta: f64, gamma: f64, phi_hat: f64) -> Result<Complex64> {
    check_beta(beta)?;
    if m == 0 || m > n {
        return Err(Error::Domain(format!("order m = {m} must lie in 1..={n}")));
    }
    if gamma == 0.0 {
        return Err(Error::Degenerate("gamma must be nonzero".into()));
    }
    let pole = if beta == FRAC_PI_2 && phi_hat.rem_euclid(PI) == 0.0 {
        Some(((phi_hat / PI).round() as i64).rem_euclid(2))
    } else {
        None
    };
    let (x, s) = modified_abscissa(beta, phi_hat);
    let mut q = vec![0.0; n + 1];
    seminorm_legendre_orders_sc(n, x, s, &mut q)?;
    Ok(g_from_legendre(n, m, beta, gamma, phi_hat, q[m - 1], q[m], pole))
}

/// Modified variant with `gamma = 1/n` and the default transform length.
pub fn compute_subspace_fft_modified(n: usize, beta: f64) -> Result<CoeffTriangle> {
    compute_subspace_fft_modified_report(n, beta).map(|(t, _)| t)
}

/// Modified variant returning run diagnostics.
pub fn compute_subspace_fft_modified_report(n: usize, beta: f64) -> Result<(CoeffTriangle, FftReport)> {
    let gamma = if n == 0 { 1.0 } else { 1.0 / n as f64 };
    compute_subspace_fft_modified_with(n, beta, gamma, fft_length(n))
}

/// Modified variant with explicit `gamma` and transform length.
pub fn compute_subspace_fft_modified_with(
    n: usize,
    beta: f64,
    gamma: f64,
    len: usize,
) -> Result<(CoeffTriangle, FftReport)> {
    check_beta(beta)?;
    check_length(n, len)?;
    let mut tri = CoeffTriangle::try_zeros(n, beta)?;
    fill_column_zero(&mut tri)?;
    let report = FftReport { imag_residue: 0.0, degraded: n > DEGRADED_ABOVE, length: len };
    if n == 0 {
        return Ok((tri, report));
    }
    let ni = n as i64;
    let scales = (-ni..=ni).map(|mp| spectrum_scale_k(n, mp, gamma)).collect::<Result<Vec<_>>>()?;

    let half_pi = beta == FRAC_PI_2;
    let q_nodes = (0..len)
        .into_par_iter()
        .map(|j| {
            let (x, s) = modified_abscissa(beta, TAU * j as f64 / len as f64);
            let mut q = vec![0.0; n + 1];
            seminorm_legendre_orders_sc(n, x, s, &mut q)?;
            Ok(q)
        })
        .collect::<Result<Vec<_>>>()?;

    let plan = Planned::new(len);
    let columns: Vec<Vec<Complex64>> = (1..=n)
        .into_par_iter()
        .map(|m| {
            let samples = (0..len)
                .map(|j| {
                    let phi_hat = TAU * j as f64 / len as f64;
                    let pole = if half_pi { pole_index(j, len) } else { None };
                    g_from_legendre(n, m, beta, gamma, phi_hat, q_nodes[j][m - 1], q_nodes[j][m], pole)
                })
                .collect();
            let spec = plan.spectrum(n, samples);
            spec.iter().zip(&scales).map(|(g, k)| g / k).collect()
        })
        .collect();
    finish(tri, columns, report)
}

/// Spectrum of the modified sample function for one column, unscaled.
pub fn spectrum_line_modified(n: usize, m: usize, beta: f64, gamma: f64) -> Result<SpectrumLine> {
    check_beta(beta)?;
    let len = fft_length(n);
    let samples = (0..len)
        .map(|j| sample_g_modified(n, m, beta, gamma, TAU * j as f64 / len as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumLine { n, m, values: Planned::new(len).spectrum(n, samples) })
}
