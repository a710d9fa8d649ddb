//! Single-threshold reports: oracle values, every bound with its domain
//! status, and a re-check of the sandwich ordering.

use std::fmt::Write as _;

use anyhow::{bail, Context as _};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use tailbounds_core::bounds::{binom, pois};
use tailbounds_core::dist::{binom_sf, binom_tce, pois_sf, pois_tce};
use tailbounds_core::oracle::rational::{ratio_to_f64, rational_to_f64, EXACT_N_MAX};
use tailbounds_core::oracle::{parse_exact, ExactBinomial, PoissonTable, RationalProb};
use tailbounds_core::{BinomialParams, Error, PoissonParams};

use crate::format::{fmt_g, serialize_sig, serialize_sig_opt, PRECISION};

/// Largest mean for which the high-precision Poisson oracle is used.
pub const POIS_ORACLE_MU_MAX: f64 = 1000.0;

/// Relative slack allowed when re-checking bound orderings.
const ORDER_SLACK: f64 = 1e-12;

/// Largest relative gap between the float path and the oracle that is not flagged.
const ORACLE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Upper bound on the tail probability.
    Upper,
    /// Lower bound on the tail probability.
    Lower,
    /// Upper bound on the tail conditional expectation.
    TceUpper,
    /// Upper bound on a ratio of consecutive tails.
    RatioUpper,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundEntry {
    #[serde(skip)]
    pub name: &'static str,
    pub kind: BoundKind,
    #[serde(serialize_with = "serialize_sig_opt")]
    pub value: Option<f64>,
    pub in_domain: bool,
    pub reason: Option<String>,
}

impl BoundEntry {
    fn new(name: &'static str, kind: BoundKind, result: tailbounds_core::Result<f64>) -> Self {
        match result {
            Ok(value) => Self { name, kind, value: Some(value), in_domain: true, reason: None },
            Err(err) => {
                let reason = match err {
                    Error::Domain { requirement, .. } => format!("requires {requirement}"),
                    other => other.to_string(),
                };
                Self { name, kind, value: None, in_domain: false, reason: Some(reason) }
            }
        }
    }
}

/// Bounds keyed by name, in evaluation order.
#[derive(Debug, Clone)]
pub struct Bounds(pub Vec<BoundEntry>);

impl Bounds {
    pub fn get(&self, name: &str) -> Option<&BoundEntry> {
        self.0.iter().find(|b| b.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(|b| b.value)
    }
}

impl Serialize for Bounds {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for entry in &self.0 {
            map.serialize_entry(entry.name, entry)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum Query {
    Binomial {
        n: u64,
        #[serde(serialize_with = "serialize_sig")]
        p: f64,
        p_exact: String,
        k: i64,
    },
    Poisson {
        #[serde(serialize_with = "serialize_sig")]
        mu: f64,
        mu_exact: String,
        threshold: String,
        k: i64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Exact {
    #[serde(serialize_with = "serialize_sig")]
    pub sf: f64,
    #[serde(serialize_with = "serialize_sig_opt")]
    pub tce: Option<f64>,
    /// `rational`, `high_precision`, or `float` when the oracle is out of budget.
    pub source: &'static str,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Meta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_floor: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell_ceil: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<u64>,
    #[serde(serialize_with = "serialize_sig")]
    pub float_sf: f64,
    #[serde(serialize_with = "serialize_sig_opt")]
    pub float_tce: Option<f64>,
    /// Exact ratio of consecutive tails matched against `tail_ratio_upper`.
    #[serde(serialize_with = "serialize_sig_opt")]
    pub exact_tail_ratio: Option<f64>,
    pub anomalies: Vec<String>,
    pub precision: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub query: Query,
    pub exact: Exact,
    pub bounds: Bounds,
    pub meta: Meta,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

impl BoundReport {
    fn check_orderings(&mut self) {
        let sf = self.exact.sf;
        let mut anomalies = Vec::new();
        for entry in &self.bounds.0 {
            let Some(value) = entry.value else { continue };
            let (lhs, rhs, what) = match entry.kind {
                BoundKind::Upper => (sf, value, "exact_sf exceeds"),
                BoundKind::Lower => (value, sf, "exact_sf falls below"),
                BoundKind::TceUpper => match self.exact.tce {
                    Some(tce) => (tce, value, "exact_tce exceeds"),
                    None => continue,
                },
                BoundKind::RatioUpper => match self.meta.exact_tail_ratio {
                    Some(ratio) => (ratio, value, "exact tail ratio exceeds"),
                    None => continue,
                },
            };
            if lhs > rhs * (1.0 + ORDER_SLACK) {
                anomalies.push(format!("{what} {}", entry.name));
            }
        }
        if relative_gap(self.meta.float_sf, sf) > ORACLE_SLACK {
            anomalies.push("float sf disagrees with the oracle".into());
        }
        if let (Some(float), Some(exact)) = (self.meta.float_tce, self.exact.tce) {
            if relative_gap(float, exact) > ORACLE_SLACK {
                anomalies.push("float tce disagrees with the oracle".into());
            }
        }
        self.meta.anomalies = anomalies;
    }

    fn any_in_domain(&self) -> bool {
        self.bounds.0.iter().any(|b| b.in_domain)
    }

    /// Aligned human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let query = match &self.query {
            Query::Binomial { n, p_exact, k, .. } => format!("binomial n={n} p={p_exact} k={k}"),
            Query::Poisson { mu_exact, threshold, k, .. } => {
                format!("poisson mu={mu_exact} threshold={threshold} k={k}")
            }
        };
        let opt = |v: Option<f64>| v.map(fmt_g).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "{:<34}{query}", "query");
        let _ = writeln!(out, "{:<34}{}", "exact_sf", fmt_g(self.exact.sf));
        let _ = writeln!(out, "{:<34}{}", "exact_tce", opt(self.exact.tce));
        let _ = writeln!(out, "{:<34}{}", "source", self.exact.source);
        let _ = writeln!(out);
        for b in &self.bounds.0 {
            let kind = serde_json::to_value(b.kind).ok();
            let kind = kind.as_ref().and_then(|v| v.as_str()).unwrap_or("");
            let value = match (&b.value, &b.reason) {
                (Some(v), _) => fmt_g(*v),
                (None, Some(reason)) => format!("out of domain ({reason})"),
                (None, None) => "out of domain".into(),
            };
            let _ = writeln!(out, "{:<34}{kind:<13}{value}", b.name);
        }
        let _ = writeln!(out);
        for (name, value) in [
            ("ell_floor", self.meta.ell_floor),
            ("ell_ceil", self.meta.ell_ceil),
            ("ell", self.meta.ell),
        ] {
            if let Some(v) = value {
                let _ = writeln!(out, "{name:<34}{v}");
            }
        }
        let anomalies = if self.meta.anomalies.is_empty() {
            "none".to_string()
        } else {
            self.meta.anomalies.join("; ")
        };
        let _ = writeln!(out, "{:<34}{anomalies}", "anomalies");
        out
    }
}

/// Parses `0 < p < 1` from a decimal or a fraction, exactly.
pub fn parse_probability(text: &str) -> anyhow::Result<RationalProb> {
    let p = RationalProb::parse(text).with_context(|| format!("cannot parse p = {text:?}"))?;
    if !p.is_interior() {
        bail!("p must lie strictly between 0 and 1, got {text}");
    }
    Ok(p)
}

fn parse_positive(text: &str, what: &str) -> anyhow::Result<BigRational> {
    let value = parse_exact(text).with_context(|| format!("cannot parse {what} = {text:?}"))?;
    if !value.is_positive() {
        bail!("{what} must be positive, got {text}");
    }
    Ok(value)
}

/// Report for `X ~ Bin(n, p)` at threshold `k`.
pub fn eval_binom(n: u64, p_text: &str, k: i64) -> anyhow::Result<BoundReport> {
    if n == 0 {
        bail!("n must be at least 1");
    }
    let p = parse_probability(p_text)?;
    if k < 0 || k as u64 > n {
        bail!("k must lie in 0..={n}, got {k}");
    }
    let params = BinomialParams::new(n, p.to_f64())?;

    let float_sf = binom_sf(&params, k).value();
    let float_tce = binom_tce(&params, k).ok();
    let (exact, exact_tail_ratio) = if n <= EXACT_N_MAX {
        let table = ExactBinomial::new(n, &p)?;
        let ratio = (k < n as i64 && k >= 0)
            .then(|| ratio_to_f64(table.tail_num(k + 1), table.tail_num(k)));
        let exact = Exact { sf: table.sf_f64(k), tce: table.tce_f64(k), source: "rational" };
        (exact, ratio)
    } else {
        let ratio = (k < n as i64).then(|| {
            (binom_sf(&params, k + 1).log_value() - binom_sf(&params, k).log_value()).exp()
        });
        (Exact { sf: float_sf, tce: float_tce, source: "float" }, ratio)
    };

    use BoundKind::*;
    let bounds = Bounds(vec![
        BoundEntry::new("chernoff_upper", Upper, binom::chernoff_upper(&params, k)),
        BoundEntry::new("factorial_upper", Upper, binom::factorial_moment_upper(&params, k)),
        BoundEntry::new("tail_point_upper", Upper, binom::tail_point_upper(&params, k)),
        BoundEntry::new("ash_lower", Lower, binom::ash_lower(&params, k)),
        BoundEntry::new("pelekis_lower", Lower, binom::tail_lower(&params, k)),
        BoundEntry::new("tce_upper", TceUpper, binom::tce_upper(&params, k)),
        BoundEntry::new("tail_ratio_upper", RatioUpper, binom::tail_ratio_upper(&params, k)),
    ]);

    let mut report = BoundReport {
        query: Query::Binomial { n, p: p.to_f64(), p_exact: p.to_string(), k },
        exact,
        bounds,
        meta: Meta {
            ell_floor: binom::ell_binom(&params, k).ok(),
            ell_ceil: binom::ell_binom_ceil(&params, k).ok(),
            float_sf,
            float_tce,
            exact_tail_ratio,
            precision: PRECISION,
            ..Meta::default()
        },
    };
    if !report.any_in_domain() {
        bail!("every bound is out of domain at k = {k}: the bounds require np < k <= n (np = {})", fmt_g(params.mean()));
    }
    report.check_orderings();
    Ok(report)
}

/// `e^(+mu) (e mu / k)^k`, the Chernoff form with the opposite sign in the
/// exponential prefactor. Valid but weaker than the standard form by `e^(2 mu)`.
pub fn chernoff_upper_positive_exponent(params: &PoissonParams, k: i64) -> tailbounds_core::Result<f64> {
    let standard = pois::chernoff_upper_pois(params, k)?;
    let mu = params.mu();
    Ok((standard.ln() + 2.0 * mu).exp())
}

/// Report for `Y ~ Poi(mu)` at threshold `ceil(t)`.
pub fn eval_pois(mu_text: &str, threshold: &str, positive_exponent: bool) -> anyhow::Result<BoundReport> {
    let mu = parse_positive(mu_text, "mu")?;
    let t = parse_exact(threshold)
        .with_context(|| format!("k must be a nonnegative number, got {threshold:?}"))?;
    let k = t
        .ceil()
        .to_integer()
        .to_i64()
        .filter(|k| *k <= 1 << 40)
        .with_context(|| format!("k = {threshold} is too large"))?;
    let mu_f = rational_to_f64(&mu);
    let params = PoissonParams::new(mu_f)?;

    let float_sf = pois_sf(&params, k).value();
    let float_tce = if k == 0 { Some(mu_f) } else { pois_tce(&params, k).ok() };
    let (exact, exact_tail_ratio) = if mu_f <= POIS_ORACLE_MU_MAX {
        let table = PoissonTable::new(&mu, k as u64 + 1, 50)?;
        let sf = table.sf(k)?;
        let ratio = if k >= 1 { Some(sf.div(&table.sf(k - 1)?)?.to_f64()) } else { None };
        let exact = Exact { sf: sf.to_f64(), tce: Some(table.tce(k)?.to_f64()), source: "high_precision" };
        (exact, ratio)
    } else {
        let ratio = (k >= 1).then(|| {
            (pois_sf(&params, k).log_value() - pois_sf(&params, k - 1).log_value()).exp()
        });
        (Exact { sf: float_sf, tce: float_tce, source: "float" }, ratio)
    };

    use BoundKind::*;
    let mut bounds = vec![BoundEntry::new("chernoff_upper", Upper, pois::chernoff_upper_pois(&params, k))];
    if positive_exponent {
        bounds.push(BoundEntry::new(
            "chernoff_upper_positive_exponent",
            Upper,
            chernoff_upper_positive_exponent(&params, k),
        ));
    }
    bounds.extend([
        BoundEntry::new("pelekis_lower", Lower, pois::tail_lower_pois(&params, k)),
        BoundEntry::new("tce_upper", TceUpper, pois::tce_upper_pois(&params, k)),
        BoundEntry::new("tail_ratio_upper", RatioUpper, pois::tail_ratio_upper_pois(&params, k)),
    ]);

    let mut report = BoundReport {
        query: Query::Poisson { mu: mu_f, mu_exact: mu.to_string(), threshold: t.to_string(), k },
        exact,
        bounds: Bounds(bounds),
        meta: Meta {
            ell: pois::ell_pois(&params, k).ok(),
            float_sf,
            float_tce,
            exact_tail_ratio,
            precision: PRECISION,
            ..Meta::default()
        },
    };
    if !report.any_in_domain() {
        bail!("every bound is out of domain at k = {k}: the bounds require k >= 1");
    }
    report.check_orderings();
    Ok(report)
}
