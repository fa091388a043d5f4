//! Reference values that share no code path with the recursion: the direct
//! Wigner sum for small degrees, the conversion to the classical d-matrix and
//! the reconstruction of `H(beta)` from `H(pi/2)` by two axis flips.

use std::f64::consts::FRAC_PI_2;

use crate::engine::reduce_beta;
use crate::error::{Error, Result};
use crate::recursion::CoeffTriangle;
use crate::special::epsilon;

/// Largest degree for which the direct sum meets the `1e-12` target.
pub const DIRECT_RELIABLE_MAX: usize = 20;
/// Largest degree the direct sum accepts at all.
pub const DIRECT_MAX: usize = 32;

/// One summand of the direct Wigner sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectSumTerm {
    pub sigma: i64,
    /// `ln |term|`; `-inf` for a vanishing power of a zero half-angle function.
    pub log_magnitude: f64,
    pub sign: f64,
}

/// Trust level of a direct-sum value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accuracy {
    /// `n <= 20`: absolute error below `1e-12`.
    Reliable,
    /// `20 < n <= 32`: usable, accuracy not guaranteed.
    Warning,
}

mod dd {
    //! Minimal double-double arithmetic (value = hi + lo, |lo| <= ulp(hi)/2).

    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    #[inline]
    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    impl Dd {
        pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
        pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

        pub fn from_u128(v: u128) -> Dd {
            let hi = v as f64;
            let lo = (v as i128 - hi as u128 as i128) as f64;
            let (hi, lo) = quick_two_sum(hi, lo);
            Dd { hi, lo }
        }

        pub fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.hi, o.hi);
            let (t, f) = two_sum(self.lo, o.lo);
            let (s, e) = quick_two_sum(s, e + t);
            let (hi, lo) = quick_two_sum(s, e + f);
            Dd { hi, lo }
        }

        pub fn neg(self) -> Dd {
            Dd { hi: -self.hi, lo: -self.lo }
        }

        pub fn mul(self, o: Dd) -> Dd {
            let p = self.hi * o.hi;
            let e = self.hi.mul_add(o.hi, -p);
            let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
            Dd { hi, lo }
        }

        pub fn mul_f64(self, b: f64) -> Dd {
            let p = self.hi * b;
            let e = self.hi.mul_add(b, -p);
            let (hi, lo) = quick_two_sum(p, e + self.lo * b);
            Dd { hi, lo }
        }

        pub fn sqrt(self) -> Dd {
            if self.hi <= 0.0 {
                return Dd::ZERO;
            }
            let y = Dd { hi: self.hi.sqrt(), lo: 0.0 };
            let r = self.add(y.mul(y).neg());
            let (hi, lo) = quick_two_sum(y.hi, r.hi / (2.0 * y.hi));
            Dd { hi, lo }
        }

        pub fn powi(base: f64, e: u32) -> Dd {
            let mut acc = Dd::ONE;
            for _ in 0..e {
                acc = acc.mul_f64(base);
            }
            acc
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }
    }
}

use dd::Dd;

fn binomial(n: i64, k: i64) -> u128 {
    debug_assert!(0 <= k && k <= n && n <= 2 * DIRECT_MAX as i64);
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn sigma_range(n: i64, mp: i64, m: i64) -> std::ops::RangeInclusive<i64> {
    0.max(-(mp + m))..=(n - mp).min(n - m)
}

fn check_indices(n: usize, mp: i64, m: i64) -> Result<i64> {
    if n > DIRECT_MAX {
        return Err(Error::Domain(format!("direct sum limited to n <= {DIRECT_MAX}, got {n}")));
    }
    let ni = n as i64;
    if mp.abs() > ni || m.abs() > ni {
        return Err(Error::Domain(format!("indices ({mp}, {m}) outside degree {n}")));
    }
    Ok(ni)
}

struct TermParts {
    sign: f64,
    prod_a: u128,
    prod_b: u128,
    pow_c: u32,
    pow_s: u32,
}

fn term_parts(n: i64, mp: i64, m: i64, sigma: i64) -> TermParts {
    let k = m + mp + sigma;
    let prefix = (epsilon(mp) * epsilon(m)) as f64;
    let alt = if (n - sigma).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    TermParts {
        sign: prefix * alt,
        prod_a: binomial(n - m, sigma) * binomial(n + m, k),
        prod_b: binomial(n - mp, sigma) * binomial(n + mp, k),
        pow_c: (2 * sigma + m + mp) as u32,
        pow_s: (2 * n - 2 * sigma - m - mp) as u32,
    }
}

/// The individual summands of the direct sum at `beta` in `[0, pi]`.
pub fn direct_sum_terms(n: usize, mp: i64, m: i64, beta: f64) -> Result<Vec<DirectSumTerm>> {
    let ni = check_indices(n, mp, m)?;
    crate::error::check_beta(beta)?;
    let (ln_c, ln_s) = ((0.5 * beta).cos().ln(), (0.5 * beta).sin().ln());
    let weighted = |p: u32, l: f64| if p == 0 { 0.0 } else { p as f64 * l };
    Ok(sigma_range(ni, mp, m)
        .map(|sigma| {
            let t = term_parts(ni, mp, m, sigma);
            let log_magnitude = 0.5 * ((t.prod_a as f64).ln() + (t.prod_b as f64).ln())
                + weighted(t.pow_c, ln_c)
                + weighted(t.pow_s, ln_s);
            DirectSumTerm { sigma, log_magnitude, sign: t.sign }
        })
        .collect())
}

/// `H_n^{m'm}(beta)` by direct summation, with its trust level.
///
/// Each summand is assembled in double-double arithmetic from exact integer
/// binomials, and the summands are accumulated in double-double, so the only
/// rounding that survives cancellation is that of `cos(beta/2)` and
/// `sin(beta/2)` themselves. Any finite `beta` is accepted.
pub fn h_direct_checked(n: usize, mp: i64, m: i64, beta: f64) -> Result<(f64, Accuracy)> {
    let ni = check_indices(n, mp, m)?;
    let red = reduce_beta(beta)?;
    let (c, s) = ((0.5 * red.reduced).cos(), (0.5 * red.reduced).sin());
    let mut acc = Dd::ZERO;
    for sigma in sigma_range(ni, mp, m) {
        let t = term_parts(ni, mp, m, sigma);
        let root = Dd::from_u128(t.prod_a).sqrt().mul(Dd::from_u128(t.prod_b).sqrt());
        let term = root.mul(Dd::powi(c, t.pow_c)).mul(Dd::powi(s, t.pow_s)).mul_f64(t.sign);
        acc = acc.add(term);
    }
    let accuracy = if n <= DIRECT_RELIABLE_MAX { Accuracy::Reliable } else { Accuracy::Warning };
    Ok((red.sign(mp, m) * acc.to_f64(), accuracy))
}

/// `H_n^{m'm}(beta)` by direct summation; see [`h_direct_checked`].
pub fn h_direct(n: usize, mp: i64, m: i64, beta: f64) -> Result<f64> {
    h_direct_checked(n, mp, m, beta).map(|(v, _)| v)
}

/// Classical Wigner `d_n^{m'm}` from `H_n^{m'm}`: `eps_{m'} eps_{-m} H`.
pub fn wigner_d_from_h(_n: usize, mp: i64, m: i64, h_value: f64) -> f64 {
    (epsilon(mp) * epsilon(-m)) as f64 * h_value
}

/// Rebuilds `H_n(beta)` from the coefficients at `pi/2`:
///
/// ```text
/// H^{m'm}(beta) = sum_{nu=-n..n} H^{m'nu}(pi/2) H^{m nu}(pi/2) cos(nu beta + (m'+m) pi/2)
/// ```
///
/// folded onto `nu >= 0`.
pub fn flip_reconstruct(h_half_pi: &CoeffTriangle, n: usize, beta: f64) -> Result<CoeffTriangle> {
    if h_half_pi.n() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: h_half_pi.n() });
    }
    if (h_half_pi.beta() - FRAC_PI_2).abs() > 1e-12 {
        return Err(Error::Mismatch(format!(
            "flip reconstruction needs coefficients at pi/2, got beta = {}",
            h_half_pi.beta()
        )));
    }
    let ni = n as i64;
    let rows: Vec<Vec<f64>> = (-ni..=ni).map(|mp| h_half_pi.row(mp)).collect();
    let row = |mp: i64| &rows[(mp + ni) as usize];
    let (cos_nb, sin_nb): (Vec<f64>, Vec<f64>) =
        (0..=ni).map(|nu| (nu as f64 * beta).sin_cos()).map(|(s, c)| (c, s)).unzip();

    let mut out = CoeffTriangle::try_zeros(n, beta)?;
    for m in 0..=ni {
        let rm = row(m);
        for mp in -m..=m {
            let rp = row(mp);
            // cos(x + q pi/2) for q = m' + m mod 4
            let phase = |nu: usize| match (mp + m).rem_euclid(4) {
                0 => cos_nb[nu],
                1 => -sin_nb[nu],
                2 => -cos_nb[nu],
                _ => sin_nb[nu],
            };
            let centre = ni as usize;
            let mut acc = rp[centre] * rm[centre] * phase(0);
            for nu in 1..=n {
                acc += 2.0 * rp[centre + nu] * rm[centre + nu] * phase(nu);
            }
            out.set(mp, m, acc);
        }
    }
    Ok(out)
}
