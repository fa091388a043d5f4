//! Applying rotation coefficients: angle conventions, 3x3 rotation matrices,
//! Wigner-D elements and rotation of spherical-harmonic expansions.

use std::borrow::Cow;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::engine::{compute, Algorithm};
use crate::error::{check_beta, Error, Result};
use crate::recursion::{compute_all, CoeffTriangle};

pub type Mat3 = [[f64; 3]; 3];

/// Rotation angles: `(beta, alpha)` are the spherical angles of the rotated
/// `z` axis in the original frame, `(beta, gamma)` those of the original `z`
/// axis in the rotated frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn wrap(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl RotationAngles {
    /// Normalizes `alpha` and `gamma` into `[0, 2 pi)`; `beta` must lie in `[0, pi]`.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        check_beta(beta)?;
        if !alpha.is_finite() || !gamma.is_finite() {
            return Err(Error::Domain("rotation angles must be finite".into()));
        }
        Ok(Self { alpha: wrap(alpha), beta, gamma: wrap(gamma) })
    }

    /// From z-y-z Euler angles (rotate about `z` by `alpha_e`, then about the
    /// new `y` by `beta_e`, then about the new `z` by `gamma_e`).
    pub fn from_euler(alpha_e: f64, beta_e: f64, gamma_e: f64) -> Result<Self> {
        Self::new(alpha_e, beta_e, PI - gamma_e)
    }

    /// Back to z-y-z Euler angles, each in `[0, 2 pi)` (`beta` in `[0, pi]`).
    pub fn to_euler(&self) -> (f64, f64, f64) {
        (self.alpha, self.beta, wrap(PI - self.gamma))
    }

    /// Angles of the inverse rotation.
    pub fn inverse(&self) -> Self {
        Self { alpha: self.gamma, beta: self.beta, gamma: self.alpha }
    }
}

/// Elementary rotation about `z` (frame convention).
pub fn qz(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// Elementary rotation about `y` (frame convention).
pub fn qy(b: f64) -> Mat3 {
    let (s, c) = b.sin_cos();
    [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

/// `A(gamma) = Q_z(pi/2 - gamma)`.
pub fn a_matrix(gamma: f64) -> Mat3 {
    qz(FRAC_PI_2 - gamma)
}

/// `B(beta) = Q_z(pi/2) Q_y(beta) Q_z(pi/2)`.
pub fn b_matrix(beta: f64) -> Mat3 {
    let (s, c) = beta.sin_cos();
    [[-1.0, 0.0, 0.0], [0.0, -c, s], [0.0, s, c]]
}

/// `Q(alpha, beta, gamma) = A(gamma) B(beta) A(alpha)^T`.
pub fn rotation_matrix(angles: &RotationAngles) -> Mat3 {
    let ab = mat_mul(&a_matrix(angles.gamma), &b_matrix(angles.beta));
    mat_mul(&ab, &transpose(&a_matrix(angles.alpha)))
}

/// `T_n^{m'm} = e^{-i m' gamma} H_n^{m'm}(beta) e^{i m alpha}`.
pub fn t_element(_n: usize, mp: i64, m: i64, angles: &RotationAngles, h_value: f64) -> Complex64 {
    Complex64::from_polar(1.0, m as f64 * angles.alpha - mp as f64 * angles.gamma) * h_value
}

/// Coefficients `C_n^m` of a band-limited expansion, degrees `0..p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SHExpansion {
    p: usize,
    coeffs: Vec<Complex64>,
}

impl SHExpansion {
    pub fn zeros(p: usize) -> Self {
        Self { p, coeffs: vec![Complex64::new(0.0, 0.0); p * p] }
    }

    /// Wraps `p^2` coefficients ordered by degree, then by `m = -n..=n`.
    pub fn from_coeffs(p: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != p * p {
            return Err(Error::DimensionMismatch { expected: p * p, actual: coeffs.len() });
        }
        Ok(Self { p, coeffs })
    }

    pub fn bandwidth(&self) -> usize {
        self.p
    }

    pub fn get(&self, n: usize, m: i64) -> Complex64 {
        self.coeffs[n * n + (m + n as i64) as usize]
    }

    pub fn set(&mut self, n: usize, m: i64, v: Complex64) {
        self.coeffs[n * n + (m + n as i64) as usize] = v;
    }

    pub fn degree(&self, n: usize) -> &[Complex64] {
        &self.coeffs[n * n..(n + 1) * (n + 1)]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Euclidean norm of degree `n`.
    pub fn degree_norm(&self, n: usize) -> f64 {
        self.degree(n).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A source of coefficient triangles for rotating expansions.
pub trait CoeffProvider: Sync {
    /// Number of degrees available (`None` when unbounded).
    fn bandwidth(&self) -> Option<usize>;

    fn triangle(&self, n: usize, beta: f64) -> Result<Cow<'_, CoeffTriangle>>;
}

impl CoeffProvider for Algorithm {
    fn bandwidth(&self) -> Option<usize> {
        None
    }

    fn triangle(&self, n: usize, beta: f64) -> Result<Cow<'_, CoeffTriangle>> {
        compute(*self, n, beta).map(Cow::Owned)
    }
}

/// Triangles for degrees `0..p` at one fixed angle, computed once.
#[derive(Debug, Clone)]
pub struct PrecomputedCoeffs {
    beta: f64,
    triangles: Vec<CoeffTriangle>,
}

impl PrecomputedCoeffs {
    pub fn new(p: usize, beta: f64) -> Result<Self> {
        Ok(Self { beta, triangles: compute_all(p, beta)? })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl CoeffProvider for PrecomputedCoeffs {
    fn bandwidth(&self) -> Option<usize> {
        Some(self.triangles.len())
    }

    fn triangle(&self, n: usize, beta: f64) -> Result<Cow<'_, CoeffTriangle>> {
        if beta != self.beta {
            return Err(Error::Mismatch(format!("cache holds beta = {}, asked for {beta}", self.beta)));
        }
        self.triangles
            .get(n)
            .map(Cow::Borrowed)
            .ok_or(Error::BandwidthMismatch { expansion: n + 1, provider: self.triangles.len() })
    }
}

/// Expansion coefficients in the rotated frame:
/// `C'_n^{m'} = sum_m T_n^{m'm} C_n^m`, degree by degree.
pub fn rotate_expansion(f: &SHExpansion, angles: &RotationAngles, provider: &dyn CoeffProvider) -> Result<SHExpansion> {
    let p = f.bandwidth();
    if let Some(have) = provider.bandwidth() {
        if have < p {
            return Err(Error::BandwidthMismatch { expansion: p, provider: have });
        }
    }
    let degrees = (0..p)
        .into_par_iter()
        .map(|n| {
            let tri = provider.triangle(n, angles.beta)?;
            if tri.n() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: tri.n() });
            }
            let ni = n as i64;
            let src: Vec<Complex64> =
                (-ni..=ni).map(|m| f.get(n, m) * Complex64::from_polar(1.0, m as f64 * angles.alpha)).collect();
            let mut row = vec![0.0; 2 * n + 1];
            let out: Vec<Complex64> = (-ni..=ni)
                .map(|mp| {
                    tri.row_into(mp, &mut row);
                    let acc: Complex64 = row.iter().zip(&src).map(|(h, c)| c * h).sum();
                    acc * Complex64::from_polar(1.0, -(mp as f64) * angles.gamma)
                })
                .collect();
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    SHExpansion::from_coeffs(p, degrees.concat())
}
