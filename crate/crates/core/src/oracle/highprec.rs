//! Fixed-point reals with a certified absolute error, and a Poisson tail
//! oracle built on them.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::rational::ratio_to_f64;
use crate::{Error, Result};

/// Default working precision of the Poisson oracle, in decimal digits.
pub const DEFAULT_DIGITS: u32 = 50;

/// `ceil(digits * log2(10))` plus guard bits.
pub fn bits_for_digits(digits: u32, guard: u32) -> u32 {
    // 3.321928094887362 = log2(10); 3.33 overestimates it
    (digits as u64 * 333 / 100 + 1) as u32 + guard
}

/// `mant / 2^frac_bits`, with `|true value - mant / 2^frac_bits| <= err / 2^frac_bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HighPrecReal {
    mant: BigInt,
    frac_bits: u32,
    err: BigUint,
}

fn ceil_div(num: &BigUint, den: &BigUint) -> BigUint {
    (num + den - 1u32) / den
}

fn ceil_shr(value: BigUint, bits: u32) -> BigUint {
    let floor = &value >> bits;
    if &floor << bits == value {
        floor
    } else {
        floor + 1u32
    }
}

impl HighPrecReal {
    pub fn from_integer(value: i64, frac_bits: u32) -> Self {
        Self {
            mant: BigInt::from(value) << frac_bits,
            frac_bits,
            err: BigUint::zero(),
        }
    }

    /// Rounds `value` to the nearest representable point (half an ulp, charged as one).
    pub fn from_rational(value: &BigRational, frac_bits: u32) -> Self {
        let scaled = value.numer() << frac_bits;
        let (quot, rem) = (&scaled / value.denom(), &scaled % value.denom());
        let err = if rem.is_zero() { BigUint::zero() } else { BigUint::one() };
        Self {
            mant: quot,
            frac_bits,
            err,
        }
    }

    pub(crate) fn from_parts(mant: BigInt, frac_bits: u32, err: BigUint) -> Self {
        Self {
            mant,
            frac_bits,
            err,
        }
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// Error bound in units of `2^-frac_bits`.
    pub fn error_ulps(&self) -> &BigUint {
        &self.err
    }

    fn check_scale(&self, other: &Self) {
        assert_eq!(self.frac_bits, other.frac_bits, "mixed fixed-point scales");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_scale(other);
        Self {
            mant: &self.mant + &other.mant,
            frac_bits: self.frac_bits,
            err: &self.err + &other.err,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_scale(other);
        Self {
            mant: &self.mant - &other.mant,
            frac_bits: self.frac_bits,
            err: &self.err + &other.err,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_scale(other);
        let bits = self.frac_bits;
        let mant = (&self.mant * &other.mant) >> bits;
        let spread = self.mant.magnitude() * &other.err
            + other.mant.magnitude() * &self.err
            + &self.err * &other.err;
        Self {
            mant,
            frac_bits: bits,
            err: ceil_shr(spread, bits) + 1u32,
        }
    }

    /// Fails when the divisor's error interval contains zero.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_scale(other);
        let bits = self.frac_bits;
        let den = other.mant.magnitude();
        if den <= &other.err {
            return Err(Error::domain("HighPrecReal::div", "divisor bounded away from zero"));
        }
        let mant = (&self.mant << bits) / &other.mant;
        let spread = (&self.err * den + self.mant.magnitude() * &other.err) << bits;
        let room = den * (den - &other.err);
        Ok(Self {
            mant,
            frac_bits: bits,
            err: ceil_div(&spread, &room) + 1u32,
        })
    }

    pub fn abs(&self) -> Self {
        Self {
            mant: self.mant.abs(),
            frac_bits: self.frac_bits,
            err: self.err.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        let denom = BigUint::one() << self.frac_bits;
        let magnitude = ratio_to_f64(self.mant.magnitude(), &denom);
        if self.mant.sign() == Sign::Minus {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Upper bound on the absolute error, rounded up to `f64`.
    pub fn error_bound(&self) -> f64 {
        let denom = BigUint::one() << self.frac_bits;
        ratio_to_f64(&self.err, &denom) * (1.0 + 1e-15)
    }

    /// Whether the certified error is at most `10^-decimals`.
    pub fn error_within_decimals(&self, decimals: u32) -> bool {
        &self.err * BigUint::from(10u32).pow(decimals) <= BigUint::one() << self.frac_bits
    }

    /// Decimal expansion truncated to `digits` places after the point.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        let scaled = (self.mant.magnitude() * BigUint::from(10u32).pow(digits)) >> self.frac_bits;
        let mut text = scaled.to_str_radix(10);
        let width = digits as usize + 1;
        if text.len() < width {
            text.insert_str(0, &"0".repeat(width - text.len()));
        }
        if digits > 0 {
            text.insert(text.len() - digits as usize, '.');
        }
        if self.mant.is_negative() {
            text.insert(0, '-');
        }
        text
    }
}

impl fmt::Display for HighPrecReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string(20))
    }
}

/// Fixed-point Poisson weights `t_i = mu^i / i!` (scaled by `2^frac_bits`)
/// with suffix sums, so every tail, tail moment, and pmf up to `k_max` is a
/// quotient of two certified values. The normalizer `e^mu` is the full sum,
/// so no separate exponential is needed.
#[derive(Debug, Clone)]
pub struct PoissonTable {
    frac_bits: u32,
    terms: Vec<BigUint>,
    term_errs: Vec<BigUint>,
    /// Suffix sums of terms / their certified errors (including the truncated remainder).
    tails: Vec<BigUint>,
    tail_errs: Vec<BigUint>,
    weighted: Vec<BigUint>,
    weighted_errs: Vec<BigUint>,
}

impl PoissonTable {
    /// Weights through at least index `k_max + 1` at the working precision of
    /// `digits` decimal places.
    pub fn new(mu: &BigRational, k_max: u64, digits: u32) -> Result<Self> {
        if !mu.is_positive() {
            return Err(Error::domain("PoissonTable", "mu > 0"));
        }
        Ok(Self::build(mu, k_max, bits_for_digits(digits, 64)))
    }

    fn build(mu: &BigRational, k_max: u64, frac_bits: u32) -> Self {
        let a = mu.numer().magnitude().clone();
        let b = mu.denom().magnitude().clone();

        let mut terms = alloc::vec![BigUint::one() << frac_bits];
        let mut term_errs = alloc::vec![BigUint::zero()];
        let mut i: u64 = 0;
        loop {
            let last = &terms[i as usize];
            // next ratio mu / (i + 1) <= 1/2 bounds the remainder by the last term
            let halved = &b * (i + 1) >= &a * 2u32;
            if i > k_max && halved && last.is_zero() {
                break;
            }
            i += 1;
            let den = &b * i;
            let next = last * &a / &den;
            let next_err = ceil_div(&(&term_errs[i as usize - 1] * &a), &den) + 1u32;
            terms.push(next);
            term_errs.push(next_err);
        }

        let last = terms.len() - 1;
        let remainder = &terms[last] + &term_errs[last];
        let weighted_remainder = &remainder * (last as u64 + 2);

        let keep = (k_max as usize + 2).min(terms.len());
        let mut tails = alloc::vec![BigUint::zero(); keep];
        let mut tail_errs = alloc::vec![BigUint::zero(); keep];
        let mut weighted = alloc::vec![BigUint::zero(); keep];
        let mut weighted_errs = alloc::vec![BigUint::zero(); keep];

        let mut sum = BigUint::zero();
        let mut sum_err = remainder;
        let mut wsum = BigUint::zero();
        let mut wsum_err = weighted_remainder;
        for idx in (0..terms.len()).rev() {
            sum += &terms[idx];
            sum_err += &term_errs[idx];
            wsum += &terms[idx] * idx as u64;
            wsum_err += &term_errs[idx] * idx as u64;
            if idx < keep {
                tails[idx] = sum.clone();
                tail_errs[idx] = sum_err.clone();
                weighted[idx] = wsum.clone();
                weighted_errs[idx] = wsum_err.clone();
            }
        }

        Self {
            frac_bits,
            terms,
            term_errs,
            tails,
            tail_errs,
            weighted,
            weighted_errs,
        }
    }

    pub fn k_max(&self) -> u64 {
        self.tails.len() as u64 - 2
    }

    fn fixed(&self, value: &BigUint, err: &BigUint) -> HighPrecReal {
        HighPrecReal::from_parts(
            BigInt::from_biguint(Sign::Plus, value.clone()),
            self.frac_bits,
            err.clone(),
        )
    }

    fn slot(&self, k: i64) -> Result<usize> {
        if k < 0 || k as u64 > self.k_max() + 1 {
            return Err(Error::domain("PoissonTable", "0 <= k <= k_max + 1"));
        }
        Ok(k as usize)
    }

    fn total(&self) -> HighPrecReal {
        self.fixed(&self.tails[0], &self.tail_errs[0])
    }

    /// `P[Y >= k]`
    pub fn sf(&self, k: i64) -> Result<HighPrecReal> {
        if k <= 0 {
            return Ok(HighPrecReal::from_integer(1, self.frac_bits));
        }
        let idx = self.slot(k)?;
        self.fixed(&self.tails[idx], &self.tail_errs[idx]).div(&self.total())
    }

    /// `P[Y = k]`
    pub fn pmf(&self, k: i64) -> Result<HighPrecReal> {
        let idx = self.slot(k)?;
        self.fixed(&self.terms[idx], &self.term_errs[idx]).div(&self.total())
    }

    /// `E[Y | Y >= k]` by direct summation of `i P[Y = i]`.
    pub fn tce(&self, k: i64) -> Result<HighPrecReal> {
        let idx = self.slot(k.max(0))?;
        let tail = self.fixed(&self.tails[idx], &self.tail_errs[idx]);
        self.fixed(&self.weighted[idx], &self.weighted_errs[idx]).div(&tail)
    }
}

fn check_pois_args(k: i64, digits: u32) -> Result<()> {
    if k < 0 {
        return Err(Error::domain("poisson oracle", "k >= 0"));
    }
    if !(20..=200).contains(&digits) {
        return Err(Error::domain("poisson oracle", "20 <= digits <= 200"));
    }
    Ok(())
}

/// `P[Y >= k]` for `Y ~ Poi(mu)` with certified absolute error at most
/// `10^(5 - digits)`.
pub fn pois_sf_highprec(mu: &BigRational, k: i64, digits: u32) -> Result<HighPrecReal> {
    check_pois_args(k, digits)?;
    if !mu.is_positive() {
        return Err(Error::domain("pois_sf_highprec", "mu > 0"));
    }
    let mut guard = 64;
    loop {
        let table = PoissonTable::build(mu, k.max(0) as u64, bits_for_digits(digits, guard));
        let sf = table.sf(k)?;
        if sf.error_within_decimals(digits - 5) {
            return Ok(sf);
        }
        guard *= 2;
    }
}

/// `E[Y | Y >= k]` by direct summation, same precision contract as
/// [`pois_sf_highprec`] relative to the conditional mean.
pub fn pois_tce_highprec(mu: &BigRational, k: i64, digits: u32) -> Result<HighPrecReal> {
    check_pois_args(k, digits)?;
    PoissonTable::new(mu, k as u64, digits)?.tce(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::rational::parse_exact;

    fn mu(text: &str) -> BigRational {
        parse_exact(text).unwrap()
    }

    #[test]
    fn fixed_point_arithmetic_tracks_error() {
        let bits = 80;
        let third = HighPrecReal::from_rational(&mu("1/3"), bits);
        let three = HighPrecReal::from_integer(3, bits);
        let one = third.mul(&three);
        assert!((one.to_f64() - 1.0).abs() <= one.error_bound());
        let back = one.div(&three).unwrap();
        assert!((back.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        assert!(back.error_bound() < 1e-20);
        let zero = HighPrecReal::from_integer(0, bits);
        assert!(one.div(&zero).is_err());
        assert_eq!(three.sub(&three.add(&three)).to_f64(), -3.0);
    }

    #[test]
    fn decimal_rendering() {
        let half = HighPrecReal::from_rational(&mu("1/2"), 40);
        assert_eq!(half.to_decimal_string(3), "0.500");
        let neg = HighPrecReal::from_integer(-2, 40);
        assert_eq!(neg.to_decimal_string(2), "-2.00");
    }

    #[test]
    fn sf_spot_values() {
        let one = pois_sf_highprec(&mu("2"), 0, 50).unwrap();
        assert_eq!(one.to_f64(), 1.0);
        assert!(one.error_ulps().is_zero());

        // 1 - 5 e^-2 to 50 places
        let sf = pois_sf_highprec(&mu("2"), 3, 50).unwrap();
        assert!(sf.error_within_decimals(45));
        assert!(sf.to_decimal_string(40).starts_with("0.32332358381693654053000252513757798296"));

        let sf = pois_sf_highprec(&mu("1"), 1, 50).unwrap();
        assert!(sf.to_decimal_string(40).starts_with("0.632120558828557678404476229838539132554"));
    }

    #[test]
    fn tce_direct_summation() {
        let tce = pois_tce_highprec(&mu("2"), 3, 50).unwrap();
        assert!(tce.to_decimal_string(30).starts_with("3.67430141208924053083785005917"));
        let tce = pois_tce_highprec(&mu("0.5"), 1, 50).unwrap();
        assert!((tce.to_f64() - 1.270_747_041_268_399_1).abs() < 1e-15);
    }

    #[test]
    fn argument_checks() {
        assert!(pois_sf_highprec(&mu("0"), 1, 50).is_err());
        assert!(pois_sf_highprec(&mu("1"), -1, 50).is_err());
        assert!(pois_sf_highprec(&mu("1"), 1, 10).is_err());
        assert!(pois_sf_highprec(&mu("1"), 1, 201).is_err());
    }

    #[test]
    fn large_mean_keeps_certificate() {
        let sf = pois_sf_highprec(&mu("1000"), 1100, 30).unwrap();
        assert!(sf.error_within_decimals(25));
        assert!(sf.to_f64() > 0.0 && sf.to_f64() < 0.01);
    }
}
