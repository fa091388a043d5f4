//! Semi-normalized associated Legendre functions and the scalar coefficients
//! of the rotation-coefficient recursions.
//!
//! Throughout, `Q_n^m(x) = sqrt((n-m)!/(n+m)!) P_n^m(x)` where `P_n^m` carries
//! the Condon-Shortley phase `(-1)^m`. These values satisfy `|Q_n^m| <= 1`.

use crate::error::{Error, Result};

/// Values outside this window are rescaled by `2^RESCALE_BITS` while a
/// recursion is in flight, so that seeds far below the smallest normal double
/// survive until the recursion brings them back into range.
const RESCALE_BITS: i32 = 400;
const HIGH_WATER: f64 = 1.606_938_044_258_990_3e60; // 2^200
const LOW_WATER: f64 = 6.223_015_277_861_142e-61; // 2^-200

/// `sgn(m)`: +1 for `m >= 0`, -1 otherwise. Note that `sgn(0) = 1`.
#[inline]
pub fn sgn(m: i64) -> f64 {
    if m >= 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(-1)^k` as a float.
#[inline]
pub fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The sign symbol `eps_m`: `(-1)^m` for `m >= 0` and `1` for negative `m`.
pub fn epsilon(m: i64) -> i64 {
    if m >= 0 && m % 2 == 1 {
        -1
    } else {
        1
    }
}

/// `a_n^m`; zero whenever `n < |m|`.
pub fn coeff_a(n: i64, m: i64) -> f64 {
    if n < m.abs() {
        return 0.0;
    }
    let num = ((n + 1 + m) * (n + 1 - m)) as f64;
    let den = ((2 * n + 1) * (2 * n + 3)) as f64;
    (num / den).sqrt()
}

/// `b_n^m`; zero whenever `n < |m|`.
pub fn coeff_b(n: i64, m: i64) -> f64 {
    if n < m.abs() {
        return 0.0;
    }
    let num = ((n - m - 1) * (n - m)) as f64;
    let den = ((2 * n - 1) * (2 * n + 1)) as f64;
    if num == 0.0 {
        return 0.0;
    }
    sgn(m) * (num / den).sqrt()
}

/// Both `a_n^m` and `b_n^m`.
pub fn coeff_ab(n: i64, m: i64) -> (f64, f64) {
    (coeff_a(n, m), coeff_b(n, m))
}

/// `d_n^m = sgn(m)/2 * sqrt((n-m)(n+m+1))` for `-n-1 <= m <= n`, zero outside.
pub fn coeff_d(n: i64, m: i64) -> f64 {
    if m < -n - 1 || m > n {
        return 0.0;
    }
    0.5 * sgn(m) * (((n - m) * (n + m + 1)) as f64).sqrt()
}

/// `c_n^m = (-1)^m d_n^m`, the derivative of `H_n^{m'm}` at zero angle.
pub fn coeff_c(n: i64, m: i64) -> f64 {
    parity(m) * coeff_d(n, m)
}

/// Semi-normalized associated Legendre values `Q_n^m(x)` for `0 <= m <= n <= n_max`,
/// stored degree by degree.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreTable {
    n_max: usize,
    x: f64,
    values: Vec<f64>,
}

impl LegendreTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// `Q_n^m(x)`. Panics if `m > n` or `n > n_max`.
    pub fn get(&self, n: usize, m: usize) -> f64 {
        assert!(m <= n && n <= self.n_max, "Q_{n}^{m} outside table");
        self.values[n * (n + 1) / 2 + m]
    }

    /// All orders `m = 0..=n` of degree `n`.
    pub fn degree(&self, n: usize) -> &[f64] {
        assert!(n <= self.n_max, "degree {n} outside table");
        let start = n * (n + 1) / 2;
        &self.values[start..start + n + 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_abscissa(x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("abscissa x = {x} lies outside [-1, 1]")));
    }
    Ok(())
}

/// `q * 2^e` without intermediate overflow or premature underflow.
#[inline]
fn scaled_value(q: f64, e: i32) -> f64 {
    if e == 0 {
        return q;
    }
    let half = e / 2;
    q * 2f64.powi(half) * 2f64.powi(e - half)
}

/// Runs the fixed-order, increasing-degree recursion for every order
/// `m = 0..=n_hi` up to degree `n_hi`, reporting `(n, m, Q_n^m(x))` for every
/// `n >= n_lo`.
///
/// Diagonal seeds `Q_m^m` are carried as a mantissa plus a power-of-two
/// exponent, so columns whose seed is below the double range still recover
/// once the recursion grows them back.
fn for_each_column<F: FnMut(usize, usize, f64)>(n_lo: usize, n_hi: usize, x: f64, mut visit: F) {
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let down = 2f64.powi(-RESCALE_BITS);
    let up = 2f64.powi(RESCALE_BITS);

    // running Q_m^m as seed_q * 2^seed_e
    let mut seed_q = 1.0f64;
    let mut seed_e = 0i32;

    for m in 0..=n_hi {
        if m > 0 {
            let mf = m as f64;
            seed_q *= -s * ((2.0 * mf - 1.0) / (2.0 * mf)).sqrt();
            if seed_q != 0.0 && seed_q.abs() < LOW_WATER {
                seed_q *= up;
                seed_e -= RESCALE_BITS;
            }
        }

        let mut e = seed_e;
        let mut cur = seed_q;
        if m >= n_lo {
            visit(m, m, scaled_value(cur, e));
        }
        if m == n_hi {
            break;
        }

        let mut prev = cur;
        cur *= x * ((2 * m + 1) as f64).sqrt();
        if m + 1 >= n_lo {
            visit(m + 1, m, scaled_value(cur, e));
        }

        let mf = m as f64;
        for n in m + 2..=n_hi {
            let nf = n as f64;
            let nm = nf - mf;
            let np = nf + mf;
            let next = if m == 0 {
                // Bonnet's form keeps P_n(+-1) exact
                ((2.0 * nf - 1.0) * x * cur - (nf - 1.0) * prev) / nf
            } else {
                let alpha = (2.0 * nf - 1.0) * x / (nm * np).sqrt();
                let beta = ((np - 1.0) * (nm - 1.0) / (nm * np)).sqrt();
                alpha * cur - beta * prev
            };
            prev = cur;
            cur = next;
            if e < 0 && cur.abs() > HIGH_WATER {
                cur *= down;
                prev *= down;
                e += RESCALE_BITS;
            }
            if n >= n_lo {
                visit(n, m, scaled_value(cur, e));
            }
        }
    }
}

/// Builds the full table of `Q_n^m(x)` for `0 <= m <= n <= n_max`.
///
/// Uses the fixed-order three-term recursion in increasing degree, seeded from
/// a running product for the diagonal `Q_m^m`.
pub fn seminorm_legendre_table(n_max: usize, x: f64) -> Result<LegendreTable> {
    check_abscissa(x)?;
    let mut values = vec![0.0; (n_max + 1) * (n_max + 2) / 2];
    for_each_column(0, n_max, x, |n, m, q| values[n * (n + 1) / 2 + m] = q);
    Ok(LegendreTable { n_max, x, values })
}

/// `Q_n^m(x)` for `m = 0..=n` at a single degree, using the same recursion
/// (and therefore the same bits) as [`seminorm_legendre_table`].
pub fn seminorm_legendre_degree(n: usize, x: f64) -> Result<Vec<f64>> {
    check_abscissa(x)?;
    let mut row = vec![0.0; n + 1];
    for_each_column(n, n, x, |_, m, q| row[m] = q);
    Ok(row)
}

/// Degrees `n` and `n + 1` together: `(Q_n^m, m = 0..=n)` and
/// `(Q_{n+1}^m, m = 0..=n+1)`.
pub fn seminorm_legendre_pair(n: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_abscissa(x)?;
    let mut lo = vec![0.0; n + 1];
    let mut hi = vec![0.0; n + 2];
    for_each_column(n, n + 1, x, |deg, m, q| {
        if deg == n {
            lo[m] = q;
        } else {
            hi[m] = q;
        }
    });
    Ok((lo, hi))
}

/// Fills `out[m] = Q_n^m(x)` for `m = 0..=n` in `O(n)` work.
///
/// Runs the fixed-degree recursion in decreasing order from `m = n`, which is
/// the growing direction beyond the turning point, then fixes the scale with
/// the identity `Q_n^0(x)^2 + 2 sum_{m>=1} Q_n^m(x)^2 = 1`.
pub fn seminorm_legendre_orders(n: usize, x: f64, out: &mut [f64]) -> Result<()> {
    check_abscissa(x)?;
    seminorm_legendre_orders_sc(n, x, ((1.0 - x) * (1.0 + x)).sqrt(), out)
}

/// [`seminorm_legendre_orders`] at `x = cos(theta)` with `s = sin(theta) >= 0`
/// supplied by the caller, which avoids the cancellation in `1 - x^2` near
/// the poles.
pub fn seminorm_legendre_orders_sc(n: usize, x: f64, s: f64, out: &mut [f64]) -> Result<()> {
    check_abscissa(x)?;
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!("sine s = {s} must be non-negative")));
    }
    if out.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, actual: out.len() });
    }
    if s == 0.0 {
        out.fill(0.0);
        out[0] = if x > 0.0 || n.is_multiple_of(2) { 1.0 } else { -1.0 };
        return Ok(());
    }
    if n == 0 {
        out[0] = 1.0;
        return Ok(());
    }

    let down = 2f64.powi(-300);
    let cot2 = 2.0 * x / s;
    let nf = n as f64;
    out[n] = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut above = 0.0f64;
    for m in (1..=n).rev() {
        let mf = m as f64;
        let here = out[m];
        let v =
            -(((nf + mf + 1.0) * (nf - mf)).sqrt() * above + mf * cot2 * here) / ((nf + mf) * (nf - mf + 1.0)).sqrt();
        out[m - 1] = v;
        above = here;
        if v.abs() > 2f64.powi(300) {
            for q in &mut out[m - 1..] {
                *q *= down;
            }
            above *= down;
        }
    }

    let mut sum = out[0] * out[0];
    for q in &out[1..] {
        sum += 2.0 * q * q;
    }
    let norm = sum.sqrt().recip();
    for q in out.iter_mut() {
        *q *= norm;
    }
    Ok(())
}

/// `ln |P_n^m(0)|` for even `n + m`.
fn ln_abs_legendre_at_zero(n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    mf * std::f64::consts::LN_2 + libm::lgamma((nf + mf + 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln()
        - libm::lgamma((nf - mf) / 2.0 + 1.0)
}

fn sign_at_zero(n: usize, m: usize) -> f64 {
    if ((n + m) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `P_n^m(0)` from log-gamma magnitudes with an explicit parity sign; exactly
/// zero when `n + m` is odd.
pub fn legendre_at_zero(n: i64, m: i64) -> Result<f64> {
    if m < 0 || m > n {
        return Err(Error::Domain(format!("P_n^m(0) needs 0 <= m <= n, got n = {n}, m = {m}")));
    }
    let (n, m) = (n as usize, m as usize);
    if (n + m) % 2 == 1 {
        return Ok(0.0);
    }
    Ok(sign_at_zero(n, m) * ln_abs_legendre_at_zero(n, m).exp())
}

/// `Q_n^m(0) = sqrt((n-m)!/(n+m)!) P_n^m(0)`, with the factorial ratio taken
/// in log space so that large degrees never overflow.
pub fn seminorm_legendre_at_zero(n: usize, m: usize) -> f64 {
    assert!(m <= n, "Q_n^m(0) needs m <= n");
    if (n + m) % 2 == 1 {
        return 0.0;
    }
    let (nf, mf) = (n as f64, m as f64);
    let ln_ratio = 0.5 * (libm::lgamma(nf - mf + 1.0) - libm::lgamma(nf + mf + 1.0));
    sign_at_zero(n, m) * (ln_ratio + ln_abs_legendre_at_zero(n, m)).exp()
}
