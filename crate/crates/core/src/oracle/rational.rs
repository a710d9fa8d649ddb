//! Exact rational binomial probabilities for rational `p`.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Largest trial count the exact oracle accepts.
pub const EXACT_N_MAX: u64 = 500;

/// Parses a nonnegative decimal (`0.3`, `12`, `2.5e-3`) or fraction (`3/10`)
/// into an exact rational, without a binary floating-point round trip.
pub fn parse_exact(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Config(alloc::format!("not a nonnegative decimal or fraction: {text:?}"));
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_exact(num)?;
        let den = parse_exact(den)?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(num / den);
    }

    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = text[pos + 1..].parse().map_err(|_| bad())?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let mantissa = mantissa.strip_prefix('+').unwrap_or(mantissa);
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }

    let mut digits = BigUint::zero();
    for c in int_part.bytes().chain(frac_part.bytes()) {
        digits = digits * 10u32 + (c - b'0') as u32;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigUint::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(BigInt::from(digits * ten.pow(scale as u32)))
    } else {
        BigRational::new(BigInt::from(digits), BigInt::from(ten.pow(scale.unsigned_abs())))
    };
    Ok(value)
}

/// `num / den` rounded to `f64` with about 63 bits of working precision.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let q = q.to_f64().unwrap_or(f64::INFINITY);
    let shift = shift.clamp(-4000, 4000) as i32;
    libm::scalbn(q, -shift)
}

/// Signed rational to `f64`.
pub fn rational_to_f64(value: &BigRational) -> f64 {
    let magnitude = ratio_to_f64(value.numer().magnitude(), value.denom().magnitude());
    if value.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// An exact probability in `[0, 1]`, kept in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RationalProb(BigRational);

impl RationalProb {
    pub fn new(value: BigRational) -> Result<Self> {
        if value.is_negative() || value > BigRational::one() {
            return Err(Error::InvalidParams("probability must lie in [0, 1]"));
        }
        Ok(Self(value))
    }

    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParams("zero denominator"));
        }
        Self::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Decimal or fraction text, see [`parse_exact`].
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_exact(text)?)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer().magnitude()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom().magnitude()
    }

    /// `0 < p < 1`
    pub fn is_interior(&self) -> bool {
        !self.0.is_zero() && !self.0.is_one()
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(self.numer(), self.denom())
    }
}

impl fmt::Display for RationalProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn unsigned_ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from_biguint(Sign::Plus, num), BigInt::from_biguint(Sign::Plus, den))
}

/// Every pmf, tail, and first tail moment of `Bin(n, a/b)` as integers over the
/// common denominator `b^n`.
///
/// `n = 0` is admitted as the point mass at zero.
#[derive(Debug, Clone)]
pub struct ExactBinomial {
    n: u64,
    a: BigUint,
    b: BigUint,
    denom: BigUint,
    pmf: Vec<BigUint>,
    /// `tail[k] = sum_{i >= k} pmf[i]`, length `n + 2`.
    tail: Vec<BigUint>,
    /// `weighted[k] = sum_{i >= k} i pmf[i]`, length `n + 2`.
    weighted: Vec<BigUint>,
}

impl ExactBinomial {
    pub fn new(n: u64, p: &RationalProb) -> Result<Self> {
        if n > EXACT_N_MAX {
            return Err(Error::domain("exact binomial", "n <= 500"));
        }
        if !p.is_interior() {
            return Err(Error::domain("exact binomial", "0 < p < 1"));
        }
        Ok(Self::build(n, p.numer().clone(), p.denom().clone()))
    }

    fn build(n: u64, a: BigUint, b: BigUint) -> Self {
        let c = &b - &a;
        let len = n as usize + 1;
        let mut a_pow = Vec::with_capacity(len);
        let mut c_pow = Vec::with_capacity(len);
        a_pow.push(BigUint::one());
        c_pow.push(BigUint::one());
        for i in 1..len {
            a_pow.push(&a_pow[i - 1] * &a);
            c_pow.push(&c_pow[i - 1] * &c);
        }

        let mut pmf = Vec::with_capacity(len);
        let mut choose = BigUint::one();
        for i in 0..len {
            if i > 0 {
                choose = choose * (n - i as u64 + 1) / i as u64;
            }
            pmf.push(&choose * &a_pow[i] * &c_pow[len - 1 - i]);
        }

        let mut tail = alloc::vec![BigUint::zero(); len + 1];
        let mut weighted = alloc::vec![BigUint::zero(); len + 1];
        for i in (0..len).rev() {
            tail[i] = &tail[i + 1] + &pmf[i];
            weighted[i] = &weighted[i + 1] + &pmf[i] * i as u64;
        }
        let denom = b.pow(n as u32);
        Self { n, a, b, denom, pmf, tail, weighted }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Numerator and denominator of `p`.
    pub fn p_parts(&self) -> (&BigUint, &BigUint) {
        (&self.a, &self.b)
    }

    /// `b^n`
    pub fn denom(&self) -> &BigUint {
        &self.denom
    }

    fn index(&self, k: i64) -> usize {
        k.clamp(0, self.n as i64 + 1) as usize
    }

    /// Numerator of `P[X = k]` over `b^n`.
    pub fn pmf_num(&self, k: i64) -> BigUint {
        if k < 0 || k as u64 > self.n {
            return BigUint::zero();
        }
        self.pmf[k as usize].clone()
    }

    /// Numerator of `P[X >= k]` over `b^n`.
    pub fn tail_num(&self, k: i64) -> &BigUint {
        &self.tail[self.index(k)]
    }

    /// Numerator of `E[X ; X >= k]` over `b^n`.
    pub fn weighted_num(&self, k: i64) -> &BigUint {
        &self.weighted[self.index(k)]
    }

    pub fn pmf(&self, k: i64) -> RationalProb {
        RationalProb(unsigned_ratio(self.pmf_num(k), self.denom.clone()))
    }

    pub fn sf(&self, k: i64) -> RationalProb {
        RationalProb(unsigned_ratio(self.tail_num(k).clone(), self.denom.clone()))
    }

    /// `E[X | X >= k]` by direct summation; `None` when the event is empty.
    pub fn tce(&self, k: i64) -> Option<BigRational> {
        let tail = self.tail_num(k);
        if tail.is_zero() {
            return None;
        }
        Some(unsigned_ratio(self.weighted_num(k).clone(), tail.clone()))
    }

    pub fn sf_f64(&self, k: i64) -> f64 {
        ratio_to_f64(self.tail_num(k), &self.denom)
    }

    pub fn tce_f64(&self, k: i64) -> Option<f64> {
        let tail = self.tail_num(k);
        (!tail.is_zero()).then(|| ratio_to_f64(self.weighted_num(k), tail))
    }

    /// `floor(n p)` in exact arithmetic.
    pub fn floor_mean(&self) -> u64 {
        let scaled = &self.a * self.n;
        (scaled / &self.b).to_u64().unwrap_or(u64::MAX)
    }

    /// `k > n p` in exact arithmetic.
    pub fn above_mean(&self, k: i64) -> bool {
        k > 0 && &self.b * k as u64 > &self.a * self.n
    }
}

/// Exact tables for `Bin(m, p)`, `m = 0..=n_max`, sharing one `p`.
#[derive(Debug, Clone)]
pub struct BinomialFamily {
    p: RationalProb,
    members: Vec<ExactBinomial>,
}

impl BinomialFamily {
    pub fn new(p: &RationalProb, n_max: u64) -> Result<Self> {
        if n_max > EXACT_N_MAX {
            return Err(Error::domain("exact binomial", "n <= 500"));
        }
        if !p.is_interior() {
            return Err(Error::domain("exact binomial", "0 < p < 1"));
        }
        let members = (0..=n_max)
            .map(|m| ExactBinomial::build(m, p.numer().clone(), p.denom().clone()))
            .collect();
        Ok(Self {
            p: p.clone(),
            members,
        })
    }

    pub fn p(&self) -> &RationalProb {
        &self.p
    }

    pub fn n_max(&self) -> u64 {
        self.members.len() as u64 - 1
    }

    pub fn get(&self, n: u64) -> &ExactBinomial {
        &self.members[n as usize]
    }
}

fn check_exact_args(n: u64, p: &RationalProb, k: i64, k_min: i64) -> Result<()> {
    if n == 0 || n > EXACT_N_MAX {
        return Err(Error::domain("exact binomial", "1 <= n <= 500"));
    }
    if !p.is_interior() {
        return Err(Error::domain("exact binomial", "0 < p < 1"));
    }
    if k < k_min || k as u64 > n {
        return Err(Error::domain("exact binomial", "threshold inside the support"));
    }
    Ok(())
}

/// `P[X >= k] = sum_{i=k}^{n} C(n,i) p^i (1-p)^(n-i)` exactly, `0 <= k <= n`.
pub fn binom_sf_exact(n: u64, p: &RationalProb, k: i64) -> Result<RationalProb> {
    check_exact_args(n, p, k, 0)?;
    Ok(ExactBinomial::new(n, p)?.sf(k))
}

/// `E[X | X >= k]` by direct summation of `i P[X = i]`, `1 <= k <= n`.
pub fn binom_tce_exact(n: u64, p: &RationalProb, k: i64) -> Result<BigRational> {
    check_exact_args(n, p, k, 1)?;
    ExactBinomial::new(n, p)?
        .tce(k)
        .ok_or(Error::domain("binom_tce_exact", "nonempty tail"))
}

/// `|lhs - rhs| / max(lhs, rhs)`
pub(crate) fn relative_gap(lhs: &BigUint, rhs: &BigUint) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    let diff = if lhs > rhs { lhs - rhs } else { rhs - lhs };
    ratio_to_f64(&diff, lhs.max(rhs))
}
