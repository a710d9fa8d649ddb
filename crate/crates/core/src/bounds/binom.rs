//! Bounds on `P[X >= k]` and `E[X | X >= k]` for `X ~ Bin(n, p)`, `k > np`.
//!
//! Upper bounds on the tail: Chernoff-Hoeffding `exp(-n D(k/n || p))`, the
//! factorial-moment bound `p^l C(n, l) / C(k, l)` with `l = ceil((k-np)/(1-p))`,
//! and the geometric-series point bound. Lower bounds: the entropy bound
//! `exp(-n D) / sqrt(8 k (1 - k/n))` and the conditional-expectation bound
//! `p^(2(l+1)) C(n, l+1) / (2 C(k, l+1))` with `l = floor((k-np)/(1-p))`.
//!
//! The conditional-expectation bound comes from writing the tail as a product
//! of ratios `p (n-j) / E[X_{n-j} | X_{n-j} >= k-j]`, bounding each expectation
//! by [`tce_upper`], and bounding the leftover tail below the median by 1/2.

use crate::dist::{binom_pmf, BinomialParams};
use crate::{Error, Result};

/// Bernoulli relative entropy `D(a || p) = a ln(a/p) + (1-a) ln((1-a)/(1-p))`,
/// with `0 ln 0 = 0`.
pub fn kl_bernoulli(a: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("kl_bernoulli", "0 <= a <= 1 and 0 < p < 1"));
    }
    let mut d = 0.0;
    if a > 0.0 {
        d += a * libm::log(a / p);
    }
    if a < 1.0 {
        d += (1.0 - a) * libm::log((1.0 - a) / (1.0 - p));
    }
    Ok(d.max(0.0))
}

fn above_mean(params: &BinomialParams, k: i64) -> bool {
    k as f64 > params.mean()
}

fn check_upper_tail(params: &BinomialParams, k: i64, op: &'static str) -> Result<u64> {
    if !above_mean(params, k) || k as u64 > params.n() {
        return Err(Error::domain(op, "np < k <= n"));
    }
    Ok(k as u64)
}

fn check_strict_upper_tail(params: &BinomialParams, k: i64, op: &'static str) -> Result<u64> {
    if !above_mean(params, k) || k as u64 >= params.n() {
        return Err(Error::domain(op, "np < k <= n - 1"));
    }
    Ok(k as u64)
}

/// `exp(-n D(k/n || p))`
pub fn chernoff_upper(params: &BinomialParams, k: i64) -> Result<f64> {
    let k = check_upper_tail(params, k, "chernoff_upper")?;
    let n = params.n() as f64;
    let d = kl_bernoulli(k as f64 / n, params.p())?;
    Ok(libm::exp(-n * d))
}

/// Slack of `k - j >= (n - j) p`; nonnegative exactly when shift `j` keeps the
/// threshold at or above the mean of `Bin(n - j, p)`.
fn shift_slack(params: &BinomialParams, k: u64, j: u64) -> f64 {
    (k - j) as f64 - (params.n() - j) as f64 * params.p()
}

fn tie_epsilon(params: &BinomialParams) -> f64 {
    4.0 * f64::EPSILON * params.n() as f64
}

/// `max { j in 0..k : k - j >= (n - j) p }`, i.e. `floor((k - np) / (1 - p))`
/// capped at `k - 1`.
///
/// The closed form is corrected against the defining inequality with a
/// tolerance of `4 eps n`, so thresholds where `(k - np)/(1 - p)` is an exact
/// integer are not lost to rounding in `np`. At `k = n` every shift satisfies
/// the inequality and the cap gives `n - 1`.
pub fn ell_binom(params: &BinomialParams, k: i64) -> Result<u64> {
    let k = check_upper_tail(params, k, "ell_binom")?;
    let eps = tie_epsilon(params);
    let closed = libm::floor((k as f64 - params.mean()) / params.q());
    let mut j = (closed.max(0.0) as u64).min(k - 1);
    while j + 1 < k && shift_slack(params, k, j + 1) >= -eps {
        j += 1;
    }
    while j > 0 && shift_slack(params, k, j) < -eps {
        j -= 1;
    }
    Ok(j)
}

/// `ceil((k - np) / (1 - p))` with the same tie guard as [`ell_binom`]; at
/// least 1 and at most `k`.
pub fn ell_binom_ceil(params: &BinomialParams, k: i64) -> Result<u64> {
    let k = check_upper_tail(params, k, "ell_binom_ceil")?;
    let eps = tie_epsilon(params);
    let closed = libm::ceil((k as f64 - params.mean()) / params.q());
    let mut j = (closed.max(1.0) as u64).min(k);
    while j > 1 && shift_slack(params, k, j - 1) <= eps {
        j -= 1;
    }
    while j < k && shift_slack(params, k, j) > eps {
        j += 1;
    }
    Ok(j)
}

/// `ln(C(n, m) / C(k, m)) = sum_{j<m} ln(1 + (n-k)/(k-j))`
fn ln_binomial_ratio(n: u64, k: u64, m: u64) -> f64 {
    let gap = (n - k) as f64;
    (0..m).map(|j| libm::log1p(gap / (k - j) as f64)).sum()
}

/// `p^l C(n, l) / C(k, l)` with `l = ceil((k - np)/(1 - p))`.
pub fn factorial_moment_upper(params: &BinomialParams, k: i64) -> Result<f64> {
    let ell = ell_binom_ceil(params, k)?;
    let k = k as u64;
    let log = ell as f64 * libm::log(params.p()) + ln_binomial_ratio(params.n(), k, ell);
    Ok(libm::exp(log))
}

/// `exp(-n D(k/n || p)) / sqrt(8 k (1 - k/n))`, for `np < k < n`.
pub fn ash_lower(params: &BinomialParams, k: i64) -> Result<f64> {
    let k = check_strict_upper_tail(params, k, "ash_lower")?;
    let chernoff = chernoff_upper(params, k as i64)?;
    let kf = k as f64;
    let prefactor = libm::sqrt(8.0 * kf * (1.0 - kf / params.n() as f64));
    Ok(chernoff / prefactor)
}

/// Upper bound on the tail conditional expectation: `k + (n-k) p / (k - np + p)`.
pub fn tce_upper(params: &BinomialParams, k: i64) -> Result<f64> {
    let k = check_upper_tail(params, k, "tce_upper")?;
    let kf = k as f64;
    let p = params.p();
    Ok(kf + (params.n() - k) as f64 * p / (kf - params.mean() + p))
}

/// Lower bound `p^(2(l+1)) C(n, l+1) / (2 C(k, l+1))` with `l = ell_binom`,
/// for `np < k <= n - 1`.
pub fn tail_lower(params: &BinomialParams, k: i64) -> Result<f64> {
    check_strict_upper_tail(params, k, "tail_lower")?;
    let m = ell_binom(params, k)? + 1;
    let k = k as u64;
    let log = 2.0 * m as f64 * libm::log(params.p()) + ln_binomial_ratio(params.n(), k, m)
        - core::f64::consts::LN_2;
    Ok(libm::exp(log))
}

/// `p (n - k) / (k (1 - p))`, an upper bound on `P[X >= k+1] / P[X >= k]`.
pub fn tail_ratio_upper(params: &BinomialParams, k: i64) -> Result<f64> {
    let k = check_strict_upper_tail(params, k, "tail_ratio_upper")?;
    Ok(params.p() * (params.n() - k) as f64 / (k as f64 * params.q()))
}

/// `k (1 - p) / (k - np) * P[X = k]`
pub fn tail_point_upper(params: &BinomialParams, k: i64) -> Result<f64> {
    let ku = check_upper_tail(params, k, "tail_point_upper")?;
    let kf = ku as f64;
    let factor = kf * params.q() / (kf - params.mean());
    Ok(factor * binom_pmf(params, k).value())
}

/// All binomial bounds at one threshold `np < k <= n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomBoundSet {
    pub chernoff_upper: f64,
    pub factorial_moment_upper: f64,
    pub tail_point_upper: f64,
    /// Undefined at `k = n`.
    pub ash_lower: Option<f64>,
    /// Undefined at `k = n`.
    pub tail_lower: Option<f64>,
    pub tce_upper: f64,
    /// Undefined at `k = n`.
    pub tail_ratio_upper: Option<f64>,
    pub ell_floor: u64,
    pub ell_ceil: u64,
}

impl BinomBoundSet {
    pub fn evaluate(params: &BinomialParams, k: i64) -> Result<Self> {
        Ok(Self {
            chernoff_upper: chernoff_upper(params, k)?,
            factorial_moment_upper: factorial_moment_upper(params, k)?,
            tail_point_upper: tail_point_upper(params, k)?,
            ash_lower: ash_lower(params, k).ok(),
            tail_lower: tail_lower(params, k).ok(),
            tce_upper: tce_upper(params, k)?,
            tail_ratio_upper: tail_ratio_upper(params, k).ok(),
            ell_floor: ell_binom(params, k)?,
            ell_ceil: ell_binom_ceil(params, k)?,
        })
    }

    /// Tightest defined lower bound on the tail.
    pub fn best_lower(&self) -> Option<f64> {
        match (self.ash_lower, self.tail_lower) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    /// Tightest upper bound on the tail.
    pub fn best_upper(&self) -> f64 {
        self.chernoff_upper
            .min(self.factorial_moment_upper)
            .min(self.tail_point_upper)
    }
}
