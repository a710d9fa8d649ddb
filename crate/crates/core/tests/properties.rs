use proptest::prelude::*;
use tailbounds_core::bounds::{binom, pois};
use tailbounds_core::dist::{binom_pmf, binom_sf, binom_tce, pois_pmf, pois_sf, pois_tce};
use tailbounds_core::oracle::{parse_exact, ExactBinomial, PoissonTable, RationalProb};
use tailbounds_core::{BinomialParams, PoissonParams};

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `p = milli / 1000`, exact and rounded.
fn binomial(n: u64, milli: u64) -> (BinomialParams, RationalProb) {
    let p = RationalProb::from_ratio(milli, 1000).unwrap();
    (BinomialParams::new(n, p.to_f64()).unwrap(), p)
}

fn first_above_mean(n: u64, milli: u64) -> u64 {
    n * milli / 1000 + 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binom_pmf_normalizes(n in 1u64..300, milli in 1u64..1000) {
        let (params, _) = binomial(n, milli);
        let total: f64 = (0..=n as i64).map(|k| binom_pmf(&params, k).value()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binom_sf_steps_by_pmf(n in 1u64..300, milli in 1u64..1000, k in 0u64..300) {
        let (params, _) = binomial(n, milli);
        let k = (k % (n + 1)) as i64;
        let here = binom_sf(&params, k).value();
        let next = binom_sf(&params, k + 1).value();
        prop_assert!(next <= here);
        let pmf = binom_pmf(&params, k).value();
        prop_assert!((here - next - pmf).abs() <= 1e-13 * here.max(pmf) + f64::MIN_POSITIVE);
    }

    #[test]
    fn binom_matches_exact_oracle(n in 1u64..150, milli in 1u64..1000, k in 0u64..150) {
        let (params, p) = binomial(n, milli);
        let k = (k % (n + 1)) as i64;
        let exact = ExactBinomial::new(n, &p).unwrap();
        prop_assert!(rel(binom_sf(&params, k).value(), exact.sf_f64(k)) <= 1e-12);
        if k >= 1 {
            let tce = binom_tce(&params, k).unwrap();
            prop_assert!(rel(tce, exact.tce_f64(k).unwrap()) <= 1e-10);
        }
    }

    #[test]
    fn binom_tce_brackets(n in 1u64..400, milli in 1u64..1000, k in 1u64..400) {
        let (params, _) = binomial(n, milli);
        let k = 1 + (k - 1) % n;
        let tce = binom_tce(&params, k as i64).unwrap();
        prop_assert!(tce >= k as f64 && tce <= n as f64);
        if k < n {
            prop_assert!(binom_tce(&params, k as i64 + 1).unwrap() >= tce);
        }
    }

    #[test]
    fn binom_sandwich(n in 2u64..150, milli in 1u64..1000, offset in 0u64..150) {
        let first = first_above_mean(n, milli);
        prop_assume!(first <= n);
        let k = first + offset % (n - first + 1);
        let (params, p) = binomial(n, milli);
        let ki = k as i64;
        let sf = ExactBinomial::new(n, &p).unwrap().sf_f64(ki);
        let slack = 1.0 + 1e-12;
        let chernoff = binom::chernoff_upper(&params, ki).unwrap();
        let factorial = binom::factorial_moment_upper(&params, ki).unwrap();
        prop_assert!(sf <= chernoff * slack);
        prop_assert!(sf <= factorial * slack);
        prop_assert!(factorial <= chernoff * slack);
        prop_assert!(sf <= binom::tail_point_upper(&params, ki).unwrap() * slack);
        prop_assert!(binom_tce(&params, ki).unwrap() <= binom::tce_upper(&params, ki).unwrap() * slack);
        if k < n {
            prop_assert!(binom::ash_lower(&params, ki).unwrap() <= sf * slack);
            prop_assert!(binom::tail_lower(&params, ki).unwrap() <= sf * slack);
        }
    }

    #[test]
    fn binom_shift_indices(n in 1u64..500, milli in 1u64..1000, offset in 0u64..500) {
        let first = first_above_mean(n, milli);
        prop_assume!(first <= n);
        let k = first + offset % (n - first + 1);
        let (params, _) = binomial(n, milli);
        let p = milli as f64 / 1000.0;
        let floor = binom::ell_binom(&params, k as i64).unwrap();
        let ceil = binom::ell_binom_ceil(&params, k as i64).unwrap();
        prop_assert!(floor < k);
        prop_assert!(floor <= ceil && ceil <= floor + 1);
        // exact integer form of k - j >= (n - j) p with p = milli / 1000
        let holds = |j: u64| 1000 * (k - j) >= (n - j) * milli;
        prop_assert!(holds(floor));
        prop_assert!(floor + 1 == k || !holds(floor + 1));
        prop_assert!((k as f64 - floor as f64) >= (n as f64 - floor as f64) * p - 1e-9);
    }

    #[test]
    fn pois_pmf_recursion(mu_centi in 1u64..20_000, k in 0i64..400) {
        let params = PoissonParams::new(mu_centi as f64 / 100.0).unwrap();
        let here = pois_pmf(&params, k);
        let next = pois_pmf(&params, k + 1);
        let predicted = here.log_value() + (params.mu() / (k + 1) as f64).ln();
        prop_assert!((next.log_value() - predicted).abs() <= 1e-12 * predicted.abs().max(1.0));
    }

    #[test]
    fn pois_matches_oracle(mu_centi in 1u64..10_000, k in 0u64..150) {
        let mu = parse_exact(&format!("{mu_centi}/100")).unwrap();
        let params = PoissonParams::new(mu_centi as f64 / 100.0).unwrap();
        let table = PoissonTable::new(&mu, k + 1, 60).unwrap();
        let ki = k as i64;
        let sf = table.sf(ki).unwrap();
        // the oracle's error is absolute; relative comparisons need it well below the tail
        prop_assume!(sf.error_bound() < 1e-16 * sf.to_f64());
        prop_assert!(rel(pois_sf(&params, ki).value(), sf.to_f64()) <= 1e-12);
        if k >= 1 {
            prop_assert!(rel(pois_tce(&params, ki).unwrap(), table.tce(ki).unwrap().to_f64()) <= 1e-12);
        }
    }

    #[test]
    fn pois_sandwich(mu_centi in 1u64..10_000, offset in 0u64..60) {
        let mu = mu_centi as f64 / 100.0;
        let params = PoissonParams::new(mu).unwrap();
        let k = (mu.ceil() as i64).max(1) + offset as i64;
        let sf = pois_sf(&params, k).value();
        let slack = 1.0 + 1e-12;
        let lower = pois::tail_lower_pois(&params, k).unwrap();
        prop_assert!(lower > 0.0 && lower <= 0.5);
        prop_assert!(lower <= sf * slack);
        if k as f64 > mu {
            prop_assert!(sf <= pois::chernoff_upper_pois(&params, k).unwrap() * slack);
        }
        prop_assert!(pois_tce(&params, k).unwrap() <= pois::tce_upper_pois(&params, k).unwrap() * slack);
        let ratio = sf / pois_sf(&params, k - 1).value();
        prop_assert!(ratio <= pois::tail_ratio_upper_pois(&params, k).unwrap() * slack);
    }

    #[test]
    fn relative_entropy_nonnegative(a in 0.0f64..=1.0, p in 0.001f64..0.999) {
        let d = binom::kl_bernoulli(a, p).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert_eq!(binom::kl_bernoulli(p, p).unwrap(), 0.0);
    }
}
