//! Bounds on `P[Y >= k]` and `E[Y | Y >= k]` for `Y ~ Poi(mu)`, `k >= mu`.

use crate::dist::PoissonParams;
use crate::{Error, Result};

fn check_at_or_above_mean(params: &PoissonParams, k: i64, op: &'static str) -> Result<f64> {
    if k < 1 || (k as f64) < params.mu() {
        return Err(Error::domain(op, "k >= mu and k >= 1"));
    }
    Ok(k as f64)
}

/// Chernoff bound `e^(-mu) (e mu)^k / k^k` for `k > mu`.
///
/// Exceeds 1 for `k` close to `mu`.
pub fn chernoff_upper_pois(params: &PoissonParams, k: i64) -> Result<f64> {
    let mu = params.mu();
    if k < 1 || k as f64 <= mu {
        return Err(Error::domain("chernoff_upper_pois", "k > mu"));
    }
    let kf = k as f64;
    Ok(libm::exp(kf - mu + kf * libm::log(mu / kf)))
}

/// `max { j >= 0 : k - j >= mu } = floor(k - mu)`, tie-guarded like
/// [`ell_binom`](super::binom::ell_binom).
pub fn ell_pois(params: &PoissonParams, k: i64) -> Result<u64> {
    let mu = params.mu();
    if k < 0 || (k as f64) < mu {
        return Err(Error::domain("ell_pois", "k >= mu"));
    }
    let k = k as u64;
    let eps = 4.0 * f64::EPSILON * (k as f64).max(1.0);
    let slack = |j: u64| (k - j) as f64 - mu;
    let mut j = (libm::floor(k as f64 - mu).max(0.0) as u64).min(k);
    while j < k && slack(j + 1) >= -eps {
        j += 1;
    }
    while j > 0 && slack(j) < -eps {
        j -= 1;
    }
    Ok(j)
}

/// `k + mu / (k + 1 - mu)`
pub fn tce_upper_pois(params: &PoissonParams, k: i64) -> Result<f64> {
    let kf = check_at_or_above_mean(params, k, "tce_upper_pois")?;
    let mu = params.mu();
    Ok(kf + mu / (kf + 1.0 - mu))
}

/// `(1/2) (mu / (k + mu))^(l + 1)` with `l = floor(k - mu)`.
pub fn tail_lower_pois(params: &PoissonParams, k: i64) -> Result<f64> {
    let kf = check_at_or_above_mean(params, k, "tail_lower_pois")?;
    let ell = ell_pois(params, k)?;
    let mu = params.mu();
    Ok(0.5 * libm::pow(mu / (kf + mu), (ell + 1) as f64))
}

/// `mu / k`, an upper bound on `P[Y >= k] / P[Y >= k-1]`.
pub fn tail_ratio_upper_pois(params: &PoissonParams, k: i64) -> Result<f64> {
    if k < 1 {
        return Err(Error::domain("tail_ratio_upper_pois", "k >= 1"));
    }
    Ok(params.mu() / k as f64)
}

/// All Poisson bounds at one threshold `k >= max(mu, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoisBoundSet {
    /// Undefined at `k = mu`.
    pub chernoff_upper: Option<f64>,
    pub tce_upper: f64,
    pub tail_lower: f64,
    pub tail_ratio_upper: f64,
    pub ell: u64,
}

impl PoisBoundSet {
    pub fn evaluate(params: &PoissonParams, k: i64) -> Result<Self> {
        Ok(Self {
            chernoff_upper: chernoff_upper_pois(params, k).ok(),
            tce_upper: tce_upper_pois(params, k)?,
            tail_lower: tail_lower_pois(params, k)?,
            tail_ratio_upper: tail_ratio_upper_pois(params, k)?,
            ell: ell_pois(params, k)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{pois_sf, pois_tce};

    fn poi(mu: f64) -> PoissonParams {
        PoissonParams::new(mu).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn chernoff_values() {
        assert!(rel(chernoff_upper_pois(&poi(2.0), 3).unwrap(), 0.805_416_838_061_939_3) < 1e-14);
        let deep = chernoff_upper_pois(&poi(1.0), 10).unwrap();
        assert!(rel(deep, 8.103_083_927_575_384e-7) < 1e-13);
        assert!(deep >= pois_sf(&poi(1.0), 10).value());
        assert!(chernoff_upper_pois(&poi(2.0), 2).is_err());
    }

    #[test]
    fn ell_values() {
        assert_eq!(ell_pois(&poi(2.0), 3).unwrap(), 1);
        assert_eq!(ell_pois(&poi(2.5), 3).unwrap(), 0);
        assert_eq!(ell_pois(&poi(3.0), 3).unwrap(), 0);
        assert!(ell_pois(&poi(3.5), 3).is_err());
        assert_eq!(ell_pois(&poi(2.0), 5).unwrap(), 3);
        assert_eq!(ell_pois(&poi(0.7), 1).unwrap(), 0);
    }

    #[test]
    fn tce_upper_values() {
        assert_eq!(tce_upper_pois(&poi(1.0), 1).unwrap(), 2.0);
        assert_eq!(tce_upper_pois(&poi(2.0), 3).unwrap(), 4.0);
        assert_eq!(tce_upper_pois(&poi(7.0), 7).unwrap(), 14.0);
        assert!(tce_upper_pois(&poi(1.0), 1).unwrap() >= pois_tce(&poi(1.0), 1).unwrap());
        assert!(tce_upper_pois(&poi(2.0), 1).is_err());
    }

    #[test]
    fn tail_lower_values() {
        assert!(rel(tail_lower_pois(&poi(2.0), 3).unwrap(), 0.08) < 1e-15);
        assert_eq!(tail_lower_pois(&poi(4.0), 4).unwrap(), 0.25);
        let deep = tail_lower_pois(&poi(1.0), 5).unwrap();
        assert!(rel(deep, 0.5 / 7776.0) < 1e-15);
        assert!(deep <= pois_sf(&poi(1.0), 5).value());
    }

    #[test]
    fn ratio_values() {
        assert!(rel(tail_ratio_upper_pois(&poi(2.0), 3).unwrap(), 2.0 / 3.0) < 1e-15);
        assert_eq!(tail_ratio_upper_pois(&poi(1.0), 1).unwrap(), 1.0);
        assert_eq!(tail_ratio_upper_pois(&poi(5.0), 20).unwrap(), 0.25);
        assert!(tail_ratio_upper_pois(&poi(5.0), 0).is_err());
    }

    #[test]
    fn bound_set_at_tie() {
        let set = PoisBoundSet::evaluate(&poi(3.0), 3).unwrap();
        assert!(set.chernoff_upper.is_none());
        assert_eq!(set.ell, 0);
        assert!(PoisBoundSet::evaluate(&poi(3.0), 2).is_err());
    }
}
