//! Identity checks evaluated entirely in oracle arithmetic.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::highprec::{PoissonTable, DEFAULT_DIGITS};
use super::rational::{rational_to_f64, relative_gap, BinomialFamily, ExactBinomial, RationalProb};
use crate::{Error, Result};

/// A distribution with exact or high-precision oracle support.
#[derive(Debug, Clone)]
pub enum OracleDist {
    Binomial { n: u64, p: RationalProb },
    Poisson { mu: BigRational },
}

/// Outcome of one identity evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdentityCheck {
    /// Relative residual `|lhs - rhs| / |lhs|`.
    Residual(f64),
    /// The identity's preconditions fail at this point.
    Skipped(&'static str),
}

impl IdentityCheck {
    pub fn passes(&self, tolerance: f64) -> bool {
        match self {
            IdentityCheck::Residual(r) => *r <= tolerance,
            IdentityCheck::Skipped(_) => true,
        }
    }
}

/// Both checks from one product-identity evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductCheck {
    /// `P[X_n >= k]` against the tail at shift `ell + 1` times the product of ratios.
    pub residual: f64,
    /// At `ell = k - 1`: `P[X_n >= k] / p^k` against `prod (n-j) / E[X_{n-j} | X_{n-j} >= k-j]`.
    pub constant_residual: Option<f64>,
}

fn rational_residual(lhs: &BigRational, rhs: &BigRational) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    rational_to_f64(&((lhs - rhs).abs() / lhs.abs()))
}

/// `E[X | X >= k] = k r + E[X | X >= k+1] (1 - r)`, `r = P[X = k] / P[X >= k]`,
/// in exact rationals.
pub(crate) fn binom_recursion(table: &ExactBinomial, k: i64) -> IdentityCheck {
    if k < 1 {
        return IdentityCheck::Skipped("k must be positive");
    }
    let (Some(lhs), Some(next)) = (table.tce(k), table.tce(k + 1)) else {
        return IdentityCheck::Skipped("P[X >= k+1] = 0");
    };
    let share = table.pmf(k).into_rational() / table.sf(k).into_rational();
    let rhs = BigRational::from_integer(BigInt::from(k)) * &share
        + next * (BigRational::one() - &share);
    IdentityCheck::Residual(rational_residual(&lhs, &rhs))
}

/// Same recursion for a Poisson table in certified fixed point.
pub(crate) fn pois_recursion(table: &PoissonTable, k: i64) -> Result<IdentityCheck> {
    if k < 1 {
        return Ok(IdentityCheck::Skipped("k must be positive"));
    }
    if k as u64 > table.k_max() {
        return Err(Error::domain("pois_recursion", "table covers k + 1"));
    }
    let bits = table_bits(table)?;
    let lhs = table.tce(k)?;
    let share = table.pmf(k)?.div(&table.sf(k)?)?;
    let one = super::HighPrecReal::from_integer(1, bits);
    let kk = super::HighPrecReal::from_integer(k, bits);
    let rhs = kk.mul(&share).add(&table.tce(k + 1)?.mul(&one.sub(&share)));
    let gap = lhs.sub(&rhs).abs().div(&lhs)?;
    Ok(IdentityCheck::Residual(gap.to_f64()))
}

fn table_bits(table: &PoissonTable) -> Result<u32> {
    Ok(table.sf(0)?.frac_bits())
}

/// Tail conditional expectation recursion for integer-valued variables,
/// evaluated with oracle quantities on both sides.
pub fn verify_tce_recursion(dist: &OracleDist, k: i64) -> Result<IdentityCheck> {
    match dist {
        OracleDist::Binomial { n, p } => Ok(binom_recursion(&ExactBinomial::new(*n, p)?, k)),
        OracleDist::Poisson { mu } => {
            if k < 1 {
                return Ok(IdentityCheck::Skipped("k must be positive"));
            }
            let table = PoissonTable::new(mu, k as u64 + 1, DEFAULT_DIGITS)?;
            pois_recursion(&table, k)
        }
    }
}

/// `P[X_n >= k] E[X_n | X_n >= k] = n p P[X_{n-1} >= k-1]`, tested for exact equality.
pub(crate) fn tail_tce_identity(family: &BinomialFamily, n: u64, k: i64) -> bool {
    let full = family.get(n);
    let shorter = family.get(n - 1);
    let Some(tce) = full.tce(k) else {
        return false;
    };
    let lhs = full.sf(k).into_rational() * tce;
    let n_p = family.p().as_rational() * BigRational::from_integer(BigInt::from(n));
    let rhs = n_p * shorter.sf(k - 1).into_rational();
    lhs == rhs
}

/// Exact check of `P[X_n >= k] = n p P[X_{n-1} >= k-1] / E[X_n | X_n >= k]`
/// for `1 <= k <= n - 1`.
pub fn verify_tail_tce_identity(n: u64, p: &RationalProb, k: i64) -> Result<bool> {
    if n < 2 || k < 1 || k as u64 >= n {
        return Err(Error::domain("verify_tail_tce_identity", "1 <= k <= n - 1"));
    }
    let family = BinomialFamily::new(p, n)?;
    Ok(tail_tce_identity(&family, n, k))
}

/// Product-identity residuals for every `ell` in `0..k`, built incrementally.
///
/// In integers over common denominators (`T`, `W` are tail and tail-moment
/// numerators of `Bin(m, a/b)` over `b^m`) the identity reads
/// `T_n(k) prod_j W_{n-j}(k-j) = T_{n-l-1}(k-l-1) prod_j a (n-j) T_{n-j}(k-j)`.
pub(crate) fn product_identity_sweep(family: &BinomialFamily, n: u64, k: i64) -> Vec<ProductCheck> {
    let ku = k as u64;
    let (a, b) = family.get(n).p_parts();
    let lead = family.get(n).tail_num(k);
    let mut weights = BigUint::one();
    let mut ratios = BigUint::one();
    let mut out = Vec::with_capacity(ku as usize);
    for ell in 0..ku {
        let member = family.get(n - ell);
        let shifted = k - ell as i64;
        weights *= member.weighted_num(shifted);
        ratios *= member.tail_num(shifted) * a * (n - ell);

        let rest = family.get(n - ell - 1).tail_num(shifted - 1);
        let residual = relative_gap(&(lead * &weights), &(rest * &ratios));
        let constant_residual = (ell + 1 == ku).then(|| {
            let lhs = lead * b.pow(ku as u32) * &weights;
            let rhs = family.get(n).denom() * &ratios;
            relative_gap(&lhs, &rhs)
        });
        out.push(ProductCheck {
            residual,
            constant_residual,
        });
    }
    out
}

/// Iterated tail/expectation identity at shift `ell`, `0 <= ell <= k - 1 <= n - 1`.
pub fn verify_product_identity(n: u64, p: &RationalProb, k: i64, ell: u64) -> Result<ProductCheck> {
    if n == 0 || k < 1 || k as u64 > n || ell >= k as u64 {
        return Err(Error::domain("verify_product_identity", "0 <= ell <= k - 1 <= n - 1"));
    }
    let family = BinomialFamily::new(p, n)?;
    Ok(product_identity_sweep(&family, n, k)[ell as usize])
}
