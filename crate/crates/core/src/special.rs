//! Saddle-point building blocks for accurate log-pmf evaluation.
//!
//! `ln C(n, x) p^x q^(n-x)` computed naively from three log-gamma values loses
//! up to `|lgamma(n)| * eps` absolute accuracy to cancellation. Splitting the
//! log-gamma into its Stirling approximation plus the Stirling error
//! `stirlerr`, and the remaining logarithms into the deviance `bd0`, keeps
//! every term small so the log-pmf carries near-full relative precision.

use core::f64::consts::PI;

/// `ln(sqrt(2*pi))`
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `stirlerr(n)` for `n = 0..=15`.
const STIRLERR_TABLE: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258,
    0.041_340_695_955_409_294,
    0.027_677_925_684_998_339,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_192,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_770,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_530,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

/// Stirling error `ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)]` for integer `n`.
pub(crate) fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if n < 16 {
        return STIRLERR_TABLE[n as usize];
    }
    let x = n as f64;
    let nn = x * x;
    if n > 500 {
        (S0 - S1 / nn) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

/// Deviance term `x ln(x / m) + m - x`, evaluated by series when `x` is close to `m`.
pub(crate) fn bd0(x: f64, m: f64) -> f64 {
    let d = x - m;
    if d.abs() < 0.1 * (x + m) {
        let mut v = d / (x + m);
        let mut s = d * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        let mut j = 1.0;
        loop {
            ej *= v;
            let next = s + ej / (2.0 * j + 1.0);
            if next == s {
                return next;
            }
            s = next;
            j += 1.0;
        }
    }
    x * libm::log1p(d / m) + m - x
}

/// Natural log of the binomial pmf at `x` for `n` trials, `p + q = 1`.
///
/// `n = 0` is allowed (the point mass at zero) so that conditional
/// identities can recurse down to an empty trial count.
pub(crate) fn ln_binom_pmf(n: u64, p: f64, q: f64, x: u64) -> f64 {
    if x > n {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    if x == 0 {
        if n == 0 {
            return 0.0;
        }
        return if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * libm::log(q)
        };
    }
    if x == n {
        return if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * libm::log(p)
        };
    }
    let xf = x as f64;
    let yf = (n - x) as f64;
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xf, nf * p) - bd0(yf, nf * q);
    let lf = libm::log(2.0 * PI) + libm::log(xf) + libm::log1p(-xf / nf);
    lc - 0.5 * lf
}

/// Natural log of the Poisson pmf at `x` with mean `mu`.
pub(crate) fn ln_pois_pmf(mu: f64, x: u64) -> f64 {
    if x == 0 {
        return -mu;
    }
    let xf = x as f64;
    -stirlerr(x) - bd0(xf, mu) - LN_SQRT_2PI - 0.5 * libm::log(xf)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_factorial(n: u64) -> f64 {
        (1..=n).map(|i| libm::log(i as f64)).sum()
    }

    #[test]
    fn stirlerr_matches_definition() {
        for n in [1u64, 5, 15, 16, 30, 36, 50, 81, 100, 501, 1000] {
            let x = n as f64;
            let direct = ln_factorial(n) - ((x + 0.5) * libm::log(x) - x + LN_SQRT_2PI);
            // direct form loses ~|ln n!| * eps to cancellation
            let tol = 1e-15 * ln_factorial(n).max(1.0) * 8.0;
            assert!((stirlerr(n) - direct).abs() < tol, "n = {n}");
        }
    }

    #[test]
    fn bd0_branches_agree_near_switch() {
        for (x, m) in [(10.0, 9.0), (10.0, 8.2), (100.0, 81.9), (100.0, 82.0), (3.0, 3.0)] {
            let direct = x * libm::log(x / m) + m - x;
            assert!((bd0(x, m) - direct).abs() < 1e-12 * x, "{x} {m}");
        }
        assert_eq!(bd0(7.0, 7.0), 0.0);
    }

    #[test]
    fn compensated_sum_recovers_small_addends() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-16).abs() < 1e-30);
    }
}
