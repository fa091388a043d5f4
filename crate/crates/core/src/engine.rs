use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fft::{compute_subspace_fft_basic, compute_subspace_fft_modified, default_theta_hat};
use crate::recursion::{compute_subspace, CoeffTriangle};
use crate::special::parity;

/// Which engine produces a coefficient triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Recursive,
    FftBasic,
    FftModified,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Recursive, Algorithm::FftBasic, Algorithm::FftModified];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Recursive => "recursive",
            Algorithm::FftBasic => "fft-basic",
            Algorithm::FftModified => "fft-modified",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown algorithm '{s}'")))
    }
}

/// Computes degree `n` at `beta` in `[0, pi]` with the chosen engine.
pub fn compute(algo: Algorithm, n: usize, beta: f64) -> Result<CoeffTriangle> {
    match algo {
        Algorithm::Recursive => compute_subspace(n, beta),
        Algorithm::FftBasic => compute_subspace_fft_basic(n, beta, default_theta_hat(n)),
        Algorithm::FftModified => compute_subspace_fft_modified(n, beta),
    }
}

/// An angle folded into `[0, pi]`, with the sign rule needed to recover the
/// original coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaReduction {
    pub original: f64,
    pub reduced: f64,
    /// When set, `H(original) = (-1)^{m'+m} H(reduced)`.
    pub negated: bool,
}

impl BetaReduction {
    /// Sign factor applied to `H^{m'm}(reduced)`.
    pub fn sign(&self, mp: i64, m: i64) -> f64 {
        if self.negated {
            parity(mp + m)
        } else {
            1.0
        }
    }
}

/// Folds any finite angle into `[0, pi]` using `2 pi` periodicity and
/// `H(-beta) = (-1)^{m'+m} H(beta)`.
pub fn reduce_beta(beta: f64) -> Result<BetaReduction> {
    if !beta.is_finite() {
        return Err(Error::Domain(format!("beta = {beta} is not finite")));
    }
    if (0.0..=PI).contains(&beta) {
        return Ok(BetaReduction { original: beta, reduced: beta, negated: false });
    }
    let wrapped = beta.rem_euclid(TAU);
    let out = if wrapped <= PI {
        BetaReduction { original: beta, reduced: wrapped, negated: false }
    } else {
        BetaReduction { original: beta, reduced: (TAU - wrapped).min(PI), negated: true }
    };
    Ok(out)
}

/// Like [`compute`] but accepts any finite angle.
pub fn compute_any_beta(algo: Algorithm, n: usize, beta: f64) -> Result<(CoeffTriangle, BetaReduction)> {
    let red = reduce_beta(beta)?;
    let mut tri = compute(algo, n, red.reduced)?;
    if red.negated {
        let ni = n as i64;
        for mp in -ni..=ni {
            let start = mp.abs();
            for (k, v) in tri.layer_mut(mp).iter_mut().enumerate() {
                *v *= parity(mp + start + k as i64);
            }
        }
    }
    Ok((tri, red))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_examples() {
        let r = reduce_beta(0.5).unwrap();
        assert_eq!((r.reduced, r.negated), (0.5, false));
        let r = reduce_beta(-0.5).unwrap();
        assert!((r.reduced - 0.5).abs() < 1e-15 && r.negated);
        let r = reduce_beta(TAU + 0.25).unwrap();
        assert!((r.reduced - 0.25).abs() < 1e-14 && !r.negated);
        let r = reduce_beta(4.0).unwrap();
        assert!((r.reduced - (TAU - 4.0)).abs() < 1e-14 && r.negated);
        assert!(reduce_beta(f64::NAN).is_err());
    }

    #[test]
    fn any_beta_matches_symmetry() {
        let (neg, _) = compute_any_beta(Algorithm::Recursive, 6, -0.7).unwrap();
        let pos = compute_subspace(6, 0.7).unwrap();
        for (mp, m, v) in pos.iter() {
            assert!((neg.get(mp, m) - parity(mp + m) * v).abs() < 1e-14);
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }
}
