//! Same-subspace recursion for the rotation coefficients of one degree.
//!
//! For degree `n` only the triangle `m = 0..=n`, `m' = -m..=m` is computed; all
//! other entries follow from `H^{m'm} = H^{mm'} = H^{-m',-m}`. Layer `m' = 0`
//! comes from semi-normalized Legendre values, layer `m' = 1` from a
//! degree-raising relation, and the remaining layers from the recurrence
//!
//! ```text
//! d^{m-1} H^{m',m-1} - d^m H^{m',m+1} = d^{m'-1} H^{m'-1,m} - d^{m'} H^{m'+1,m}
//! ```
//!
//! swept outward in `m'` in both directions. Every sweep direction used here
//! satisfies the CFL condition `|c| <= 1` inside the triangle.

use rayon::prelude::*;

use crate::error::{check_beta, Error, Result};
use crate::special::{coeff_a, coeff_b, coeff_d, parity, seminorm_legendre_pair, seminorm_legendre_table};

/// Largest degree [`full_matrix`] materializes unless asked otherwise.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// `H_n^{m'm}(beta)` for one degree, stored over the computational triangle
/// `m in [0, n]`, `m' in [-m, m]`: exactly `(n + 1)^2` values.
///
/// Storage is layer-major: layer `m'` (ascending from `-n`) holds
/// `m = |m'|..=n`, which keeps every sweep contiguous in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTriangle {
    n: usize,
    beta: f64,
    data: Vec<f64>,
}

#[inline]
fn layer_offset(n: usize, mp: i64) -> usize {
    let n = n as i64;
    let off = if mp <= 0 {
        let k = mp + n;
        k * (k + 1) / 2
    } else {
        n * (n + 1) / 2 + mp * (n + 1) - mp * (mp - 1) / 2
    };
    off as usize
}

#[inline]
fn layer_len(n: usize, mp: i64) -> usize {
    n + 1 - mp.unsigned_abs() as usize
}

/// Maps any `(m', m)` with `|m'|, |m| <= n` onto the stored triangle.
#[inline]
fn to_triangle(mp: i64, m: i64) -> (i64, i64) {
    let (mp, m) = if m.abs() >= mp.abs() { (mp, m) } else { (m, mp) };
    if m >= 0 {
        (mp, m)
    } else {
        (-mp, -m)
    }
}

impl CoeffTriangle {
    /// A zero-filled triangle of degree `n`.
    pub fn zeros(n: usize, beta: f64) -> Self {
        Self { n, beta, data: vec![0.0; (n + 1) * (n + 1)] }
    }

    /// Like [`CoeffTriangle::zeros`], reporting allocation failure as an error.
    pub fn try_zeros(n: usize, beta: f64) -> Result<Self> {
        let len = (n + 1).checked_mul(n + 1).ok_or(Error::Allocation { n })?;
        let mut data = Vec::new();
        data.try_reserve_exact(len).map_err(|_| Error::Allocation { n })?;
        data.resize(len, 0.0);
        Ok(Self { n, beta, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The raw layer-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Stored values of layer `m'`, indexed by `m - |m'|`.
    pub fn layer(&self, mp: i64) -> &[f64] {
        assert!(mp.unsigned_abs() as usize <= self.n, "layer {mp} outside degree {}", self.n);
        let start = layer_offset(self.n, mp);
        &self.data[start..start + layer_len(self.n, mp)]
    }

    pub fn layer_mut(&mut self, mp: i64) -> &mut [f64] {
        assert!(mp.unsigned_abs() as usize <= self.n, "layer {mp} outside degree {}", self.n);
        let start = layer_offset(self.n, mp);
        let len = layer_len(self.n, mp);
        &mut self.data[start..start + len]
    }

    #[inline]
    fn index(&self, mp: i64, m: i64) -> usize {
        debug_assert!(m >= mp.abs() && m as usize <= self.n);
        layer_offset(self.n, mp) + (m - mp.abs()) as usize
    }

    /// Stored value at a triangle index (`|m'| <= m <= n`).
    pub fn at(&self, mp: i64, m: i64) -> f64 {
        assert!(m >= mp.abs() && m as usize <= self.n, "({mp}, {m}) is not a triangle index");
        self.data[self.index(mp, m)]
    }

    pub fn set(&mut self, mp: i64, m: i64, value: f64) {
        assert!(m >= mp.abs() && m as usize <= self.n, "({mp}, {m}) is not a triangle index");
        let i = self.index(mp, m);
        self.data[i] = value;
    }

    /// `H^{m'm}` for any `|m'|, |m| <= n`, resolved through the first two
    /// symmetries.
    pub fn get(&self, mp: i64, m: i64) -> f64 {
        let n = self.n as i64;
        assert!(mp.abs() <= n && m.abs() <= n, "({mp}, {m}) outside degree {n}");
        let (tp, t) = to_triangle(mp, m);
        self.data[self.index(tp, t)]
    }

    /// Dense row `H^{m', nu}` for `nu = -n..=n`.
    pub fn row(&self, mp: i64) -> Vec<f64> {
        let n = self.n as i64;
        let mut out = vec![0.0; 2 * self.n + 1];
        self.row_into(mp, &mut out);
        debug_assert_eq!(out.len() as i64, 2 * n + 1);
        out
    }

    pub(crate) fn row_into(&self, mp: i64, out: &mut [f64]) {
        let n = self.n as i64;
        let a = mp.abs();
        // |nu| >= |m'|: same or mirrored layer
        let own = self.layer(mp);
        let mirror = self.layer(-mp);
        for nu in a..=n {
            out[(nu + n) as usize] = own[(nu - a) as usize];
            out[(-nu + n) as usize] = mirror[(nu - a) as usize];
        }
        // |nu| < |m'|: H^{m' nu} = H^{nu m'} (or its mirror)
        for nu in (-a + 1)..a {
            let v = if mp > 0 { self.data[self.index(nu, mp)] } else { self.data[self.index(-nu, -mp)] };
            out[(nu + n) as usize] = v;
        }
    }

    /// `(m', m, value)` over the triangle, ordered by `m` then `m'`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let n = self.n as i64;
        (0..=n).flat_map(move |m| (-m..=m).map(move |mp| (mp, m, self.data[self.index(mp, m)])))
    }

    /// Largest stored magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// A materialized `(2n+1) x (2n+1)` coefficient matrix, row `m'`, column `m`,
/// both running from `-n` to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn get(&self, mp: i64, m: i64) -> f64 {
        let n = self.n as i64;
        assert!(mp.abs() <= n && m.abs() <= n);
        self.data[((mp + n) as usize) * self.dim() + (m + n) as usize]
    }

    pub fn row(&self, mp: i64) -> &[f64] {
        let n = self.n as i64;
        let d = self.dim();
        let start = ((mp + n) as usize) * d;
        &self.data[start..start + d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Expands a triangle into the full symmetric matrix.
pub fn full_matrix(triangle: &CoeffTriangle) -> Result<DenseMatrix> {
    full_matrix_capped(triangle, DEFAULT_DENSE_CAP)
}

pub fn full_matrix_capped(triangle: &CoeffTriangle, cap: usize) -> Result<DenseMatrix> {
    let n = triangle.n();
    if n > cap {
        return Err(Error::MemoryBudget { n, cap });
    }
    let d = 2 * n + 1;
    let mut data = vec![0.0; d * d];
    for (i, chunk) in data.chunks_exact_mut(d).enumerate() {
        triangle.row_into(i as i64 - n as i64, chunk);
    }
    Ok(DenseMatrix { n, data })
}

/// `H_n^{m,0}(beta) = (-1)^m Q_n^m(cos beta)` for `m = 0..=n`.
pub fn layer_m0(n: usize, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let (row, _) = seminorm_legendre_pair(n, beta.cos())?;
    Ok(signed_layer(&row))
}

fn signed_layer(q: &[f64]) -> Vec<f64> {
    q.iter().enumerate().map(|(m, v)| parity(m as i64) * v).collect()
}

/// `H_n^{1,m}(beta)` for `m = 1..=n` from the degree `n + 1` layer
/// `row0_next[m] = H_{n+1}^{0,m}`, `m = 0..=n+1`.
pub fn layer_m1(n: usize, beta: f64, row0_next: &[f64]) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if row0_next.len() != n + 2 {
        return Err(Error::DimensionMismatch { expected: n + 2, actual: row0_next.len() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let half = 0.5 * beta;
    let one_minus = half.sin().powi(2); // (1 - cos beta) / 2
    let one_plus = half.cos().powi(2); // (1 + cos beta) / 2
    let sin_beta = beta.sin();
    let np = n as i64 + 1;
    let lead = coeff_b(np, 0);
    if lead == 0.0 {
        return Err(Error::Degenerate(format!("b_{np}^0 vanishes")));
    }
    let out = (1..=n as i64)
        .map(|m| {
            let mu = m as usize;
            let rhs = coeff_b(np, -m - 1) * one_minus * row0_next[mu + 1]
                - coeff_b(np, m - 1) * one_plus * row0_next[mu - 1]
                - coeff_a(n as i64, m) * sin_beta * row0_next[mu];
            rhs / lead
        })
        .collect();
    Ok(out)
}

fn d_table(n: usize) -> Vec<f64> {
    let n = n as i64;
    (-n - 1..=n).map(|m| coeff_d(n, m)).collect()
}

/// Fills layers `m' = 2..=n` from layers 0 and 1, sweeping up in `m'`.
pub fn sweep_forward(tri: &mut CoeffTriangle) {
    let n = tri.n;
    if n < 2 {
        return;
    }
    let d = d_table(n);
    let dd = |m: i64| d[(m + n as i64 + 1) as usize];
    let ni = n as i64;

    for mp in 1..ni {
        let p = mp + 1;
        let (lower, upper) = tri.data.split_at_mut(layer_offset(n, p));
        let below = &lower[layer_offset(n, mp - 1)..layer_offset(n, mp)];
        let here = &lower[layer_offset(n, mp)..];
        let target = &mut upper[..layer_len(n, p)];
        let (d_below, inv) = (dd(mp - 1), 1.0 / dd(mp));
        // below stores m >= mp-1, here stores m >= mp, target stores m >= p
        for m in p..=ni {
            let mu = m as usize;
            let mut v = d_below * below[mu + 1 - mp as usize] - dd(m - 1) * here[mu - 1 - mp as usize];
            if m < ni {
                v += dd(m) * here[mu + 1 - mp as usize];
            }
            target[mu - p as usize] = v * inv;
        }
    }
}

/// Fills layers `m' = -1..=-n` from layers 0 and 1, sweeping down in `m'`.
pub fn sweep_backward(tri: &mut CoeffTriangle) {
    let n = tri.n;
    if n < 1 {
        return;
    }
    let d = d_table(n);
    let dd = |m: i64| d[(m + n as i64 + 1) as usize];
    let ni = n as i64;

    for mp in (-ni + 1..=0).rev() {
        let q = mp - 1;
        let (lower, upper) = tri.data.split_at_mut(layer_offset(n, mp));
        let target = &mut lower[layer_offset(n, q)..];
        let here_len = layer_len(n, mp);
        let here = &upper[..here_len];
        let above = &upper[here_len..here_len + layer_len(n, mp + 1)];
        let (a_here, a_above, a_q) = (mp.abs(), (mp + 1).abs(), q.abs());
        let (d_above, inv) = (dd(mp), 1.0 / dd(q));
        for m in a_q..=ni {
            let mu = m as usize;
            let mut v = d_above * above[(m - a_above) as usize] + dd(m - 1) * here[(m - 1 - a_here) as usize];
            if m < ni {
                v -= dd(m) * here[(m + 1 - a_here) as usize];
            }
            target[mu - a_q as usize] = v * inv;
        }
    }
}

/// Assembles a degree from `Q_n^m(cos beta)` and `Q_{n+1}^m(cos beta)`.
fn assemble(n: usize, beta: f64, q_n: &[f64], q_next: &[f64]) -> Result<CoeffTriangle> {
    let mut tri = CoeffTriangle::try_zeros(n, beta)?;
    if n == 0 {
        tri.data[0] = 1.0;
        return Ok(tri);
    }
    let row0 = signed_layer(q_n);
    let row0_next = signed_layer(q_next);
    let row1 = layer_m1(n, beta, &row0_next)?;
    tri.layer_mut(0).copy_from_slice(&row0);
    tri.layer_mut(1).copy_from_slice(&row1);
    sweep_forward(&mut tri);
    sweep_backward(&mut tri);
    Ok(tri)
}

/// All `H_n^{m'm}(beta)` of degree `n` for `beta` in `[0, pi]`.
pub fn compute_subspace(n: usize, beta: f64) -> Result<CoeffTriangle> {
    check_beta(beta)?;
    if n == 0 {
        return assemble(0, beta, &[], &[]);
    }
    let (q_n, q_next) = seminorm_legendre_pair(n, beta.cos())?;
    assemble(n, beta, &q_n, &q_next)
}

/// Degrees `0..p` at one angle, sharing a single Legendre table.
///
/// Degrees are processed in parallel; each result is bit-identical to the
/// corresponding [`compute_subspace`] call.
pub fn compute_all(p: usize, beta: f64) -> Result<Vec<CoeffTriangle>> {
    check_beta(beta)?;
    if p == 0 {
        return Err(Error::Domain("compute_all needs p >= 1".into()));
    }
    let table = seminorm_legendre_table(p, beta.cos())?;
    (0..p)
        .into_par_iter()
        .map(
            |n| {
                if n == 0 {
                    assemble(0, beta, &[], &[])
                } else {
                    assemble(n, beta, table.degree(n), table.degree(n + 1))
                }
            },
        )
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::h_direct;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn layout_covers_storage_exactly() {
        for n in 0..9usize {
            let mut tri = CoeffTriangle::zeros(n, 0.3);
            let mut k = 0.0;
            let ni = n as i64;
            for mp in -ni..=ni {
                for m in mp.abs()..=ni {
                    tri.set(mp, m, k);
                    k += 1.0;
                }
            }
            assert_eq!(k as usize, (n + 1) * (n + 1));
            let mut seen: Vec<f64> = tri.as_slice().to_vec();
            seen.sort_by(f64::total_cmp);
            let want: Vec<f64> = (0..(n + 1) * (n + 1)).map(|i| i as f64).collect();
            assert_eq!(seen, want);
            assert_eq!(layer_offset(n, ni + 1), (n + 1) * (n + 1));
        }
    }

    #[test]
    fn accessor_resolves_symmetries() {
        let tri = compute_subspace(5, 1.1).unwrap();
        for mp in -5..=5i64 {
            for m in -5..=5i64 {
                assert_eq!(tri.get(mp, m), tri.get(m, mp));
                assert_eq!(tri.get(mp, m), tri.get(-mp, -m));
            }
            let row = tri.row(mp);
            for m in -5..=5i64 {
                assert_eq!(row[(m + 5) as usize], tri.get(mp, m));
            }
        }
    }

    #[test]
    fn layer_m0_examples() {
        let beta = 0.9f64;
        let l = layer_m0(1, beta).unwrap();
        assert!((l[0] - beta.cos()).abs() < 1e-15);
        assert!((l[1] - beta.sin() / 2f64.sqrt()).abs() < 1e-15);
        assert!((layer_m0(2, FRAC_PI_2).unwrap()[0] + 0.5).abs() < 1e-15);
        let l = layer_m0(7, 0.0).unwrap();
        assert_eq!(l[0], 1.0);
        assert!(l[1..].iter().all(|&v| v == 0.0));
        assert!(layer_m0(3, -0.1).is_err());
    }

    #[test]
    fn layer_m1_examples() {
        let next = layer_m0(2, FRAC_PI_2).unwrap();
        let l1 = layer_m1(1, FRAC_PI_2, &next).unwrap();
        assert!((l1[0] + 0.5).abs() < 1e-15);

        let next = layer_m0(2, 0.0).unwrap();
        assert_eq!(layer_m1(1, 0.0, &next).unwrap()[0], -1.0);

        let next = layer_m0(3, FRAC_PI_4).unwrap();
        let l1 = layer_m1(2, FRAC_PI_4, &next).unwrap();
        for m in 1..=2i64 {
            let want = h_direct(2, 1, m, FRAC_PI_4).unwrap();
            assert!((l1[(m - 1) as usize] - want).abs() < 1e-13);
        }
        assert!(layer_m1(2, 0.3, &[0.0; 3]).is_err());
    }

    #[test]
    fn sweep_examples() {
        let t = compute_subspace(2, FRAC_PI_2).unwrap();
        assert!((t.get(2, 2) - 0.25).abs() < 1e-15);
        let t = compute_subspace(2, 0.0).unwrap();
        assert_eq!(t.get(2, 2), 1.0);

        let t = compute_subspace(1, FRAC_PI_2).unwrap();
        assert!((t.get(-1, 1) - 0.5).abs() < 1e-15);
        let t = compute_subspace(1, 0.0).unwrap();
        assert_eq!(t.get(-1, 1), 0.0);

        for &beta in &[3.0 * FRAC_PI_4, FRAC_PI_4] {
            let t = compute_subspace(8, beta).unwrap();
            for mp in -8..=8i64 {
                for m in -8..=8i64 {
                    let want = h_direct(8, mp, m, beta).unwrap();
                    assert!((t.get(mp, m) - want).abs() < 1e-12, "({mp},{m}) beta={beta}");
                }
            }
        }
    }

    #[test]
    fn subspace_examples() {
        assert_eq!(compute_subspace(0, 2.2).unwrap().as_slice(), &[1.0]);
        let t = compute_subspace(1, PI / 3.0).unwrap();
        assert!((t.get(1, 1) + 0.75).abs() < 1e-15);
        assert!((t.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((t.get(1, 0) - 3f64.sqrt() / (2.0 * 2f64.sqrt())).abs() < 1e-15);

        let t = compute_subspace(12, 2.0).unwrap();
        for mp in -12..=12i64 {
            for m in -12..=12i64 {
                assert!((t.get(mp, m) - h_direct(12, mp, m, 2.0).unwrap()).abs() < 1e-11);
            }
        }
        assert!(compute_subspace(3, 3.2).is_err());
    }

    #[test]
    fn closed_form_boundary_row() {
        // H^{m' n} = eps_{m'} sqrt((2n)!/((n-m')!(n+m')!)) cos^{n+m'}(b/2) sin^{n-m'}(b/2)
        let beta = 1.3f64;
        let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
        let n = 40i64;
        let t = compute_subspace(n as usize, beta).unwrap();
        for mp in -n..=n {
            let ln_binom = 0.5
                * (libm::lgamma((2 * n + 1) as f64)
                    - libm::lgamma((n - mp + 1) as f64)
                    - libm::lgamma((n + mp + 1) as f64));
            let mag = (ln_binom + (n + mp) as f64 * c.ln() + (n - mp) as f64 * s.ln()).exp();
            let want = crate::special::epsilon(mp) as f64 * mag;
            assert!((t.get(mp, n) - want).abs() < 1e-12, "m'={mp}");
        }
    }

    #[test]
    fn compute_all_matches_subspaces_bitwise() {
        let all = compute_all(1, 0.4).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].as_slice(), &[1.0]);

        let all = compute_all(4, FRAC_PI_2).unwrap();
        for (n, tri) in all.iter().enumerate() {
            assert_eq!(tri, &compute_subspace(n, FRAC_PI_2).unwrap());
        }
        assert!(compute_all(0, 0.1).is_err());
    }

    #[test]
    fn full_matrix_examples() {
        assert_eq!(full_matrix(&compute_subspace(0, 1.0).unwrap()).unwrap().as_slice(), &[1.0]);

        let m = full_matrix(&compute_subspace(1, FRAC_PI_2).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want_row1 = [0.5, r, -0.5];
        let want_row0 = [r, 0.0, r];
        for k in 0..3 {
            assert!((m.row(1)[k] - want_row1[k]).abs() < 1e-15);
            assert!((m.row(0)[k] - want_row0[k]).abs() < 1e-15);
        }

        let m = full_matrix(&compute_subspace(9, 0.77).unwrap()).unwrap();
        for mp in -9..=9i64 {
            for k in -9..=9i64 {
                assert_eq!(m.get(mp, k), m.get(k, mp));
            }
        }
        let big = CoeffTriangle::zeros(10, 0.1);
        assert_eq!(full_matrix_capped(&big, 8), Err(Error::MemoryBudget { n: 10, cap: 8 }));
    }

    #[test]
    fn kronecker_pattern_at_zero_and_pi() {
        let t = compute_subspace(30, 0.0).unwrap();
        for mp in -30..=30i64 {
            for m in -30..=30i64 {
                let want = if mp == m { parity(mp) } else { 0.0 };
                assert!((t.get(mp, m) - want).abs() < 1e-13);
            }
        }
        // H(pi) = (-1)^{n+m'+m} H^{-m',m}(0) = (-1)^{n+m'} delta_{m',-m}
        let t = compute_subspace(30, PI).unwrap();
        for mp in -30..=30i64 {
            for m in -30..=30i64 {
                let want = if mp == -m { parity(30 + mp) } else { 0.0 };
                assert!((t.get(mp, m) - want).abs() < 1e-13, "({mp},{m})");
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(compute_subspace(200, 1.234).unwrap(), compute_subspace(200, 1.234).unwrap());
    }
}
