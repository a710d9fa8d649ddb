//! Grid certification: every inequality and identity evaluated over parameter
//! grids against the oracle, summarized as one verdict per suite.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::OnceCell;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::highprec::{HighPrecReal, PoissonTable};
use super::rational::{
    parse_exact, ratio_to_f64, rational_to_f64, BinomialFamily, RationalProb, EXACT_N_MAX,
};
use super::verify::{
    binom_recursion, pois_recursion, product_identity_sweep, tail_tce_identity, IdentityCheck,
};
use crate::bounds::{binom, pois};
use crate::dist::{binom_sf, binom_tce, pois_sf, pois_tce};
use crate::{BinomialParams, Error, PoissonParams, Result};

/// The configuration used when none is supplied.
pub const DEFAULT_CONFIG: &str = "\
# suites to run: names or the aliases all, binom-sandwich, pois-sandwich,
# identities, ratios, medians, regimes
suites = all

binom.n = 1..120
binom.p = 0.05..0.95 step 0.05

pois.mu = 0.1, 0.5, 1, 2, 5, 10, 50, 100
pois.median_mu = 0.1, 0.25..100 step 0.25
pois.regime_mu = 2..100 step 0.25
pois.digits = 50

identity.exact_n_max = 60
identity.product_n_max = 40

tolerance.bound = 1e-12
tolerance.identity = 1e-10
";

const MAX_GRID_VALUES: usize = 100_000;

/// A grid coordinate, exact for oracle use and rounded for the float path.
#[derive(Debug, Clone, PartialEq)]
pub struct GridValue {
    pub exact: BigRational,
    pub approx: f64,
}

impl GridValue {
    pub fn new(exact: BigRational) -> Self {
        let approx = rational_to_f64(&exact);
        Self { exact, approx }
    }
}

/// Named parameter tuple of a grid point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridPoint(pub Vec<(&'static str, f64)>);

/// Summary of one suite over its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVerdict {
    pub inequality_id: &'static str,
    /// Points evaluated.
    pub grid_size: u64,
    pub violations: u64,
    /// Points outside the identity's preconditions.
    pub skipped: u64,
    /// Smallest relative slack seen; negative means the inequality was crossed.
    pub worst_margin: f64,
    pub worst_point: GridPoint,
    pub tolerance: f64,
}

impl GridVerdict {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

macro_rules! suites {
    ($($variant:ident => $name:literal, $desc:literal;)*) => {
        /// A registered inequality or identity check.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Suite {
            $($variant,)*
        }

        impl Suite {
            pub const ALL: &'static [Suite] = &[$(Suite::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Suite::$variant => $name,)*
                }
            }

            pub fn description(self) -> &'static str {
                match self {
                    $(Suite::$variant => $desc,)*
                }
            }
        }
    };
}

suites! {
    BinomChernoffUpper => "binom-chernoff-upper", "P[X >= k] <= exp(-n D(k/n || p)), np < k <= n";
    BinomFactorialUpper => "binom-factorial-upper", "P[X >= k] <= factorial-moment bound, np < k <= n";
    BinomFactorialVsChernoff => "binom-factorial-vs-chernoff", "factorial-moment bound <= Chernoff bound, np < k <= n";
    BinomAshLower => "binom-ash-lower", "entropy lower bound <= P[X >= k], np < k < n";
    BinomTailLower => "binom-tail-lower", "conditional-expectation lower bound <= P[X >= k], np < k <= n - 1";
    BinomTceUpper => "binom-tce-upper", "E[X | X >= k] <= k + (n-k) p / (k - np + p), np < k <= n";
    BinomTceOracle => "binom-tce-oracle", "float E[X | X >= k] against direct exact summation, 1 <= k <= n";
    BinomSfOracle => "binom-sf-oracle", "float P[X >= k] against exact summation, 0 <= k <= n";
    BinomTailTceIdentity => "binom-tail-tce-identity", "P[X_n >= k] E[X_n | X_n >= k] = n p P[X_{n-1} >= k-1] in exact arithmetic";
    BinomTceRecursion => "binom-tce-recursion", "tail conditional expectation recursion in exact arithmetic";
    BinomProductIdentity => "binom-product-identity", "tail as iterated product of p (n-j) / E[X_{n-j} | X_{n-j} >= k-j]";
    BinomProductConstant => "binom-product-constant", "P[X_n >= k] / p^k = prod (n-j) / E[X_{n-j} | X_{n-j} >= k-j]";
    BinomPointUpper => "binom-point-upper", "P[X >= k] <= k (1-p) / (k - np) P[X = k], np < k <= n";
    BinomTailRatio => "binom-tail-ratio", "P[X >= k+1] / P[X >= k] <= p (n-k) / (k (1-p)), np < k <= n - 1";
    BinomEll => "binom-ell", "shift indices match exact floor and ceiling of (k - np) / (1 - p)";
    BinomMedian => "binom-median", "P[X >= floor(np)] >= 1/2";
    BinomSmallShift => "binom-small-shift", "lower bound >= (p/2)(1 - 1/k) >= 0.225 when p > 1/2, k >= 10, np < k < np + 1 - p";
    PoisChernoffUpper => "pois-chernoff-upper", "P[Y >= k] <= e^(-mu) (e mu / k)^k, k > mu";
    PoisTailLower => "pois-tail-lower", "(1/2) (mu / (k + mu))^(l+1) <= P[Y >= k], k >= mu";
    PoisTceUpper => "pois-tce-upper", "E[Y | Y >= k] <= k + mu / (k + 1 - mu), k >= mu";
    PoisTceOracle => "pois-tce-oracle", "float E[Y | Y >= k] against high-precision summation";
    PoisSfOracle => "pois-sf-oracle", "float P[Y >= k] against high-precision summation";
    PoisTailTceIdentity => "pois-tail-tce-identity", "P[Y >= k] = mu P[Y >= k-1] / E[Y | Y >= k] in high precision";
    PoisTceRecursion => "pois-tce-recursion", "tail conditional expectation recursion in high precision";
    PoisTelescoping => "pois-telescoping", "float P[Y >= k] = P[Y >= k-l-1] prod mu / E[Y | Y >= k-j]";
    PoisTailRatio => "pois-tail-ratio", "P[Y >= k] / P[Y >= k-1] <= mu / k";
    PoisMedian => "pois-median", "P[Y >= mu - ln 2] >= 1/2";
    PoisSmallShift => "pois-small-shift", "lower bound >= mu / (2 (2 mu + 1)) and > 1/5 when mu >= 2, mu <= k < mu + 1";
}

const ALIASES: &[(&str, &[Suite])] = &[
    (
        "binom-sandwich",
        &[
            Suite::BinomChernoffUpper,
            Suite::BinomFactorialUpper,
            Suite::BinomFactorialVsChernoff,
            Suite::BinomAshLower,
            Suite::BinomTailLower,
        ],
    ),
    (
        "pois-sandwich",
        &[Suite::PoisChernoffUpper, Suite::PoisTailLower, Suite::PoisTceUpper],
    ),
    (
        "identities",
        &[
            Suite::BinomTailTceIdentity,
            Suite::BinomTceRecursion,
            Suite::BinomProductIdentity,
            Suite::BinomProductConstant,
            Suite::PoisTailTceIdentity,
            Suite::PoisTceRecursion,
            Suite::PoisTelescoping,
        ],
    ),
    (
        "ratios",
        &[Suite::BinomPointUpper, Suite::BinomTailRatio, Suite::PoisTailRatio],
    ),
    ("medians", &[Suite::BinomMedian, Suite::PoisMedian]),
    ("regimes", &[Suite::BinomSmallShift, Suite::PoisSmallShift]),
];

impl Suite {
    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|s| s.name() == name)
    }

    fn tolerance(self, config: &GridConfig) -> f64 {
        use Suite::*;
        match self {
            BinomTceOracle | BinomTceRecursion | BinomProductIdentity | BinomProductConstant
            | PoisTceRecursion | PoisTelescoping => config.identity_tolerance,
            BinomTailTceIdentity | BinomEll | BinomMedian | PoisSmallShift => 0.0,
            _ => config.bound_tolerance,
        }
    }
}

/// Parameter ranges, suite selection, and tolerances of a certification run.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub suites: Vec<Suite>,
    pub binom_n: Vec<u64>,
    pub binom_p: Vec<GridValue>,
    pub pois_mu: Vec<GridValue>,
    pub median_mu: Vec<GridValue>,
    pub regime_mu: Vec<GridValue>,
    pub pois_digits: u32,
    /// Largest `n` for the exact tail/expectation identity and recursion.
    pub exact_n_max: u64,
    /// Largest `n` for the product identity.
    pub product_n_max: u64,
    pub bound_tolerance: f64,
    pub identity_tolerance: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::parse_over(Self::empty(), DEFAULT_CONFIG).expect("default grid configuration parses")
    }
}

fn config_error(line: usize, msg: impl core::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn parse_suites(value: &str) -> core::result::Result<Vec<Suite>, String> {
    let mut out = Vec::new();
    for name in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let expanded: &[Suite] = if name == "all" {
            Suite::ALL
        } else if let Some((_, group)) = ALIASES.iter().find(|(alias, _)| *alias == name) {
            group
        } else if let Some(pos) = Suite::ALL.iter().position(|s| s.name() == name) {
            &Suite::ALL[pos..=pos]
        } else {
            return Err(format!("unknown suite {name:?}"));
        };
        for suite in expanded {
            if !out.contains(suite) {
                out.push(*suite);
            }
        }
    }
    if out.is_empty() {
        return Err("no suites selected".into());
    }
    Ok(out)
}

/// Comma-separated items, each a number or a range `a..b [step s]` (step 1 by
/// default), all in exact arithmetic.
fn parse_values(value: &str) -> core::result::Result<Vec<BigRational>, String> {
    let number = |text: &str| parse_exact(text).map_err(|_| format!("bad number {:?}", text.trim()));
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((start, rest)) = item.split_once("..") else {
            out.push(number(item)?);
            continue;
        };
        let (end, step) = match rest.split_once("step") {
            Some((end, step)) => (number(end)?, number(step)?),
            None => (number(rest)?, BigRational::one()),
        };
        if step.is_zero() {
            return Err(format!("zero step in {item:?}"));
        }
        let mut current = number(start)?;
        while current <= end {
            if out.len() >= MAX_GRID_VALUES {
                return Err(format!("more than {MAX_GRID_VALUES} values"));
            }
            out.push(current.clone());
            current += &step;
        }
    }
    if out.is_empty() {
        return Err("empty grid".into());
    }
    Ok(out)
}

fn parse_counts(value: &str) -> core::result::Result<Vec<u64>, String> {
    parse_values(value)?
        .into_iter()
        .map(|v| {
            v.is_integer()
                .then(|| v.to_integer().to_u64())
                .flatten()
                .filter(|n| (1..=EXACT_N_MAX).contains(n))
                .ok_or_else(|| format!("trial counts must be integers in 1..={EXACT_N_MAX}"))
        })
        .collect()
}

fn parse_probabilities(value: &str) -> core::result::Result<Vec<GridValue>, String> {
    parse_values(value)?
        .into_iter()
        .map(|v| {
            if v.is_positive() && v < BigRational::one() {
                Ok(GridValue::new(v))
            } else {
                Err("probabilities must lie strictly between 0 and 1".into())
            }
        })
        .collect()
}

fn parse_means(value: &str) -> core::result::Result<Vec<GridValue>, String> {
    parse_values(value)?
        .into_iter()
        .map(|v| {
            if v.is_positive() && v <= BigRational::from_integer(BigInt::from(100_000)) {
                Ok(GridValue::new(v))
            } else {
                Err("means must lie in (0, 100000]".into())
            }
        })
        .collect()
}

fn parse_scalar<T: core::str::FromStr>(value: &str) -> core::result::Result<T, String> {
    value.trim().parse().map_err(|_| format!("bad value {:?}", value.trim()))
}

fn parse_tolerance(value: &str) -> core::result::Result<f64, String> {
    let tol: f64 = parse_scalar(value)?;
    if !(0.0..1.0).contains(&tol) {
        return Err("tolerances must lie in [0, 1)".into());
    }
    Ok(tol)
}

impl GridConfig {
    /// Parses `key = value` lines over the defaults; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_over(Self::default(), text)
    }

    fn parse_over(mut config: Self, text: &str) -> Result<Self> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(line_no, "expected key = value"))?;
            let value = value.trim();
            let applied = match key.trim() {
                "suites" => parse_suites(value).map(|v| config.suites = v),
                "binom.n" => parse_counts(value).map(|v| config.binom_n = v),
                "binom.p" => parse_probabilities(value).map(|v| config.binom_p = v),
                "pois.mu" => parse_means(value).map(|v| config.pois_mu = v),
                "pois.median_mu" => parse_means(value).map(|v| config.median_mu = v),
                "pois.regime_mu" => parse_means(value).map(|v| config.regime_mu = v),
                "pois.digits" => parse_scalar::<u32>(value).and_then(|d| {
                    if (20..=200).contains(&d) {
                        config.pois_digits = d;
                        Ok(())
                    } else {
                        Err("digits must lie in 20..=200".into())
                    }
                }),
                "identity.exact_n_max" => parse_scalar(value).map(|v| config.exact_n_max = v),
                "identity.product_n_max" => parse_scalar(value).map(|v| config.product_n_max = v),
                "tolerance.bound" => parse_tolerance(value).map(|v| config.bound_tolerance = v),
                "tolerance.identity" => {
                    parse_tolerance(value).map(|v| config.identity_tolerance = v)
                }
                other => Err(format!("unknown key {other:?}")),
            };
            applied.map_err(|msg| config_error(line_no, msg))?;
        }
        Ok(config)
    }

    fn empty() -> Self {
        Self {
            suites: Vec::new(),
            binom_n: Vec::new(),
            binom_p: Vec::new(),
            pois_mu: Vec::new(),
            median_mu: Vec::new(),
            regime_mu: Vec::new(),
            pois_digits: 50,
            exact_n_max: 0,
            product_n_max: 0,
            bound_tolerance: 0.0,
            identity_tolerance: 0.0,
        }
    }

    fn n_max(&self) -> u64 {
        self.binom_n.iter().copied().max().unwrap_or(0)
    }
}

/// Oracle tables shared by the suites of one run.
struct Context<'a> {
    config: &'a GridConfig,
    families: Vec<OnceCell<BinomialFamily>>,
    pois_tables: Vec<OnceCell<PoissonTable>>,
}

impl<'a> Context<'a> {
    fn new(config: &'a GridConfig) -> Self {
        Self {
            config,
            families: (0..config.binom_p.len()).map(|_| OnceCell::new()).collect(),
            pois_tables: (0..config.pois_mu.len()).map(|_| OnceCell::new()).collect(),
        }
    }

    fn family(&self, idx: usize) -> Result<&BinomialFamily> {
        if let Some(family) = self.families[idx].get() {
            return Ok(family);
        }
        let p = RationalProb::new(self.config.binom_p[idx].exact.clone())?;
        let family = BinomialFamily::new(&p, self.config.n_max())?;
        Ok(self.families[idx].get_or_init(|| family))
    }

    fn pois_table(&self, idx: usize) -> Result<&PoissonTable> {
        if let Some(table) = self.pois_tables[idx].get() {
            return Ok(table);
        }
        let mu = &self.config.pois_mu[idx];
        let table = PoissonTable::new(&mu.exact, pois_k_range(mu).1 + 1, self.config.pois_digits)?;
        Ok(self.pois_tables[idx].get_or_init(|| table))
    }
}

/// Thresholds `k` in `[max(ceil mu, 1), mu + 10 sqrt(mu) + 10]`.
fn pois_k_range(mu: &GridValue) -> (u64, u64) {
    let ceil = mu.exact.ceil().to_integer().to_u64().unwrap_or(u64::MAX).max(1);
    let top = libm::floor(mu.approx + 10.0 * libm::sqrt(mu.approx) + 10.0) as u64;
    (ceil, top)
}

fn relative_margin(lhs: f64, rhs: f64) -> f64 {
    let scale = libm::fmax(libm::fabs(lhs), libm::fabs(rhs));
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

fn relative_error(value: f64, reference: f64) -> f64 {
    if value == reference {
        0.0
    } else {
        libm::fabs(value - reference) / libm::fabs(reference)
    }
}

struct Tally {
    verdict: GridVerdict,
}

impl Tally {
    fn new(suite: Suite, config: &GridConfig) -> Self {
        Self {
            verdict: GridVerdict {
                inequality_id: suite.name(),
                grid_size: 0,
                violations: 0,
                skipped: 0,
                worst_margin: f64::INFINITY,
                worst_point: GridPoint::default(),
                tolerance: suite.tolerance(config),
            },
        }
    }

    fn skip(&mut self) {
        self.verdict.skipped += 1;
    }

    fn observe(&mut self, margin: f64, violated: bool, point: impl FnOnce() -> GridPoint) {
        let v = &mut self.verdict;
        let (margin, violated) = if margin.is_nan() { (-1.0, true) } else { (margin, violated) };
        v.grid_size += 1;
        if violated {
            v.violations += 1;
        }
        if margin < v.worst_margin {
            v.worst_margin = margin;
            v.worst_point = point();
        }
    }

    /// `lhs <= rhs` up to the suite's relative tolerance.
    fn at_most(&mut self, lhs: f64, rhs: f64, point: impl FnOnce() -> GridPoint) {
        let margin = relative_margin(lhs, rhs);
        let tol = self.verdict.tolerance;
        self.observe(margin, margin < -tol, point);
    }

    fn residual(&mut self, residual: f64, point: impl FnOnce() -> GridPoint) {
        let tol = self.verdict.tolerance;
        self.observe(-residual, !(residual <= tol), point);
    }

    fn identity(&mut self, check: IdentityCheck, point: impl FnOnce() -> GridPoint) {
        match check {
            IdentityCheck::Residual(r) => self.residual(r, point),
            IdentityCheck::Skipped(_) => self.skip(),
        }
    }

    fn exact(&mut self, holds: bool, margin: f64, point: impl FnOnce() -> GridPoint) {
        self.observe(if holds { margin.max(0.0) } else { margin.min(-f64::MIN_POSITIVE) }, !holds, point);
    }

    fn finish(self) -> Result<GridVerdict> {
        let mut verdict = self.verdict;
        if verdict.grid_size == 0 {
            return Err(Error::Config(format!(
                "suite {} has no grid points",
                verdict.inequality_id
            )));
        }
        verdict.worst_margin = verdict.worst_margin.min(1.0);
        Ok(verdict)
    }
}

fn binom_point(n: u64, p: &GridValue, k: u64) -> GridPoint {
    GridPoint(alloc::vec![("n", n as f64), ("p", p.approx), ("k", k as f64)])
}

fn pois_point(mu: &GridValue, k: u64) -> GridPoint {
    GridPoint(alloc::vec![("mu", mu.approx), ("k", k as f64)])
}

/// Visits `(p, n, k)` with `np < k <= n` (`k < n` when `strict`), deciding
/// the range in exact arithmetic.
fn for_upper_tail(
    ctx: &Context<'_>,
    strict: bool,
    mut visit: impl FnMut(&GridValue, &BinomialFamily, &BinomialParams, u64) -> Result<()>,
) -> Result<()> {
    for (idx, p) in ctx.config.binom_p.iter().enumerate() {
        let family = ctx.family(idx)?;
        for &n in &ctx.config.binom_n {
            let params = BinomialParams::new(n, p.approx)?;
            let first = family.get(n).floor_mean() + 1;
            let last = if strict { n - 1 } else { n };
            for k in first..=last {
                visit(p, family, &params, k)?;
            }
        }
    }
    Ok(())
}

fn for_pois(
    ctx: &Context<'_>,
    mut visit: impl FnMut(&GridValue, &PoissonTable, &PoissonParams, u64) -> Result<()>,
) -> Result<()> {
    for (idx, mu) in ctx.config.pois_mu.iter().enumerate() {
        let table = ctx.pois_table(idx)?;
        let params = PoissonParams::new(mu.approx)?;
        let (first, last) = pois_k_range(mu);
        for k in first..=last {
            visit(mu, table, &params, k)?;
        }
    }
    Ok(())
}

fn binom_suite(ctx: &Context<'_>, suite: Suite, tally: &mut Tally) -> Result<()> {
    use Suite::*;
    let config = ctx.config;
    match suite {
        BinomChernoffUpper | BinomFactorialUpper | BinomFactorialVsChernoff | BinomPointUpper => {
            for_upper_tail(ctx, false, |p, family, params, k| {
                let ki = k as i64;
                let sf = family.get(params.n()).sf_f64(ki);
                let (lhs, rhs) = match suite {
                    BinomChernoffUpper => (sf, binom::chernoff_upper(params, ki)?),
                    BinomFactorialUpper => (sf, binom::factorial_moment_upper(params, ki)?),
                    BinomFactorialVsChernoff => (
                        binom::factorial_moment_upper(params, ki)?,
                        binom::chernoff_upper(params, ki)?,
                    ),
                    _ => (sf, binom::tail_point_upper(params, ki)?),
                };
                tally.at_most(lhs, rhs, || binom_point(params.n(), p, k));
                Ok(())
            })
        }
        BinomAshLower | BinomTailLower | BinomTailRatio => {
            for_upper_tail(ctx, true, |p, family, params, k| {
                let ki = k as i64;
                let exact = family.get(params.n());
                let (lhs, rhs) = match suite {
                    BinomAshLower => (binom::ash_lower(params, ki)?, exact.sf_f64(ki)),
                    BinomTailLower => (binom::tail_lower(params, ki)?, exact.sf_f64(ki)),
                    _ => (
                        ratio_to_f64(exact.tail_num(ki + 1), exact.tail_num(ki)),
                        binom::tail_ratio_upper(params, ki)?,
                    ),
                };
                tally.at_most(lhs, rhs, || binom_point(params.n(), p, k));
                Ok(())
            })
        }
        BinomTceUpper => for_upper_tail(ctx, false, |p, _, params, k| {
            let ki = k as i64;
            let lhs = binom_tce(params, ki)?;
            tally.at_most(lhs, binom::tce_upper(params, ki)?, || binom_point(params.n(), p, k));
            Ok(())
        }),
        BinomEll => for_upper_tail(ctx, false, |p, family, params, k| {
            let ki = k as i64;
            let (a, b) = family.get(params.n()).p_parts();
            // (k - np) / (1 - p) = (k b - n a) / (b - a)
            let num = b * k - a * params.n();
            let den = b - a;
            let floor = (&num / &den).to_u64().unwrap_or(u64::MAX).min(k - 1);
            let ceil = ((&num + &den - 1u32) / &den).to_u64().unwrap_or(u64::MAX);
            let holds = binom::ell_binom(params, ki)? == floor
                && binom::ell_binom_ceil(params, ki)? == ceil;
            tally.exact(holds, 0.0, || binom_point(params.n(), p, k));
            Ok(())
        }),
        BinomSmallShift => for_upper_tail(ctx, true, |p, family, params, k| {
            let (a, b) = family.get(params.n()).p_parts();
            let n = params.n();
            // p > 1/2, k >= 10, k < np + 1 - p
            if !(a * 2u32 > *b && k >= 10 && b * k < a * n + b - a) {
                return Ok(());
            }
            let bound = binom::tail_lower(params, k as i64)?;
            let floor = p.approx / 2.0 * (1.0 - 1.0 / k as f64);
            // (p/2)(1 - 1/k) >= 9/40 <=> 20 a (k - 1) >= 9 b k
            let constant_holds = a * (20 * (k - 1)) >= b * (9 * k);
            let margin = relative_margin(floor, bound).min(relative_margin(0.225, floor));
            let holds = constant_holds && relative_margin(floor, bound) >= -tally.verdict.tolerance;
            tally.exact(holds, margin, || binom_point(n, p, k));
            Ok(())
        }),
        BinomSfOracle | BinomTceOracle => {
            for (idx, p) in config.binom_p.iter().enumerate() {
                let family = ctx.family(idx)?;
                for &n in &config.binom_n {
                    let params = BinomialParams::new(n, p.approx)?;
                    let exact = family.get(n);
                    let first = if suite == BinomSfOracle { 0 } else { 1 };
                    for k in first..=n {
                        let ki = k as i64;
                        let err = if suite == BinomSfOracle {
                            relative_error(binom_sf(&params, ki).value(), exact.sf_f64(ki))
                        } else {
                            let reference = exact.tce_f64(ki).unwrap_or(f64::NAN);
                            relative_error(binom_tce(&params, ki)?, reference)
                        };
                        tally.residual(err, || binom_point(n, p, k));
                    }
                }
            }
            Ok(())
        }
        BinomTailTceIdentity | BinomTceRecursion => {
            for (idx, p) in config.binom_p.iter().enumerate() {
                let family = ctx.family(idx)?;
                for &n in config.binom_n.iter().filter(|&&n| n <= config.exact_n_max) {
                    for k in 1..=n {
                        let ki = k as i64;
                        if suite == BinomTceRecursion {
                            let check = binom_recursion(family.get(n), ki);
                            tally.identity(check, || binom_point(n, p, k));
                        } else if k < n {
                            let holds = tail_tce_identity(family, n, ki);
                            tally.exact(holds, 0.0, || binom_point(n, p, k));
                        }
                    }
                }
            }
            Ok(())
        }
        BinomProductIdentity | BinomProductConstant => {
            for (idx, p) in config.binom_p.iter().enumerate() {
                let family = ctx.family(idx)?;
                for &n in config.binom_n.iter().filter(|&&n| n <= config.product_n_max) {
                    for k in 1..=n {
                        let sweep = product_identity_sweep(family, n, k as i64);
                        for (ell, check) in sweep.iter().enumerate() {
                            let point = || {
                                let mut point = binom_point(n, p, k);
                                point.0.push(("ell", ell as f64));
                                point
                            };
                            match (suite, check.constant_residual) {
                                (BinomProductIdentity, _) => tally.residual(check.residual, point),
                                (_, Some(r)) => tally.residual(r, point),
                                _ => {}
                            }
                        }
                    }
                }
            }
            Ok(())
        }
        BinomMedian => {
            for (idx, p) in config.binom_p.iter().enumerate() {
                let family = ctx.family(idx)?;
                for &n in &config.binom_n {
                    let exact = family.get(n);
                    let m = exact.floor_mean();
                    let tail = exact.tail_num(m as i64);
                    let holds = tail * 2u32 >= *exact.denom();
                    let margin = relative_margin(0.5, exact.sf_f64(m as i64));
                    tally.exact(holds, margin, || binom_point(n, p, m));
                }
            }
            Ok(())
        }
        _ => unreachable!("not a binomial suite"),
    }
}

fn pois_suite(ctx: &Context<'_>, suite: Suite, tally: &mut Tally) -> Result<()> {
    use Suite::*;
    let config = ctx.config;
    let bits = |table: &PoissonTable| -> Result<u32> { Ok(table.sf(0)?.frac_bits()) };
    match suite {
        PoisChernoffUpper | PoisTailLower | PoisTceUpper | PoisTailRatio => {
            for_pois(ctx, |mu, table, params, k| {
                let ki = k as i64;
                let (lhs, rhs) = match suite {
                    PoisChernoffUpper => {
                        if k as f64 <= mu.approx {
                            return Ok(());
                        }
                        (table.sf(ki)?.to_f64(), pois::chernoff_upper_pois(params, ki)?)
                    }
                    PoisTailLower => (pois::tail_lower_pois(params, ki)?, table.sf(ki)?.to_f64()),
                    PoisTceUpper => (pois_tce(params, ki)?, pois::tce_upper_pois(params, ki)?),
                    _ => (
                        table.sf(ki)?.div(&table.sf(ki - 1)?)?.to_f64(),
                        pois::tail_ratio_upper_pois(params, ki)?,
                    ),
                };
                tally.at_most(lhs, rhs, || pois_point(mu, k));
                Ok(())
            })
        }
        PoisTceOracle => for_pois(ctx, |mu, table, params, k| {
            let ki = k as i64;
            let err = relative_error(pois_tce(params, ki)?, table.tce(ki)?.to_f64());
            tally.residual(err, || pois_point(mu, k));
            Ok(())
        }),
        PoisSfOracle => {
            for (idx, mu) in config.pois_mu.iter().enumerate() {
                let table = ctx.pois_table(idx)?;
                let params = PoissonParams::new(mu.approx)?;
                for k in 0..=pois_k_range(mu).1 {
                    let ki = k as i64;
                    let err = relative_error(pois_sf(&params, ki).value(), table.sf(ki)?.to_f64());
                    tally.residual(err, || pois_point(mu, k));
                }
            }
            Ok(())
        }
        PoisTailTceIdentity => for_pois(ctx, |mu, table, _, k| {
            let ki = k as i64;
            let mu_fixed = HighPrecReal::from_rational(&mu.exact, bits(table)?);
            let lhs = table.sf(ki)?;
            let rhs = mu_fixed.mul(&table.sf(ki - 1)?).div(&table.tce(ki)?)?;
            let gap = lhs.sub(&rhs).abs().div(&lhs)?.to_f64();
            tally.residual(gap, || pois_point(mu, k));
            Ok(())
        }),
        PoisTceRecursion => for_pois(ctx, |mu, table, _, k| {
            let check = pois_recursion(table, k as i64)?;
            tally.identity(check, || pois_point(mu, k));
            Ok(())
        }),
        PoisTelescoping => for_pois(ctx, |mu, _, params, k| {
            let ki = k as i64;
            let ell = pois::ell_pois(params, ki)? as i64;
            let mut rhs = pois_sf(params, ki - ell - 1).value();
            for j in 0..=ell {
                rhs *= mu.approx / pois_tce(params, ki - j)?;
            }
            let err = relative_error(rhs, pois_sf(params, ki).value());
            tally.residual(err, || pois_point(mu, k));
            Ok(())
        }),
        PoisMedian => {
            for mu in &config.median_mu {
                let threshold = libm::ceil(mu.approx - core::f64::consts::LN_2).max(0.0) as u64;
                let table = PoissonTable::new(&mu.exact, threshold + 1, config.pois_digits)?;
                let sf = table.sf(threshold as i64)?;
                let half = HighPrecReal::from_rational(
                    &BigRational::new(BigInt::one(), BigInt::from(2)),
                    sf.frac_bits(),
                );
                let slack = sf.sub(&half);
                // certified: slack minus its error bound stays nonnegative
                let holds = slack.to_f64() >= slack.error_bound();
                let margin = relative_margin(0.5, sf.to_f64());
                tally.exact(holds, margin, || pois_point(mu, threshold));
            }
            Ok(())
        }
        PoisSmallShift => {
            let fifth = BigRational::new(BigInt::one(), BigInt::from(5));
            for mu in config.regime_mu.iter().filter(|mu| mu.approx >= 2.0) {
                let params = PoissonParams::new(mu.approx)?;
                let k = mu.exact.ceil().to_integer().to_u64().unwrap_or(u64::MAX);
                let bound = pois::tail_lower_pois(&params, k as i64)?;
                let floor = mu.approx / (2.0 * (2.0 * mu.approx + 1.0));
                // mu / (2 (2 mu + 1)) >= 1/5 <=> mu >= 2, and the bound exceeds it since k < mu + 1
                let two = BigRational::from_integer(BigInt::from(2));
                let constant = &mu.exact / (&two * (&two * &mu.exact + BigRational::one()));
                let holds = constant >= fifth && bound > 0.2 && floor <= bound;
                let margin = relative_margin(0.2, bound).min(relative_margin(floor, bound));
                tally.exact(holds, margin, || pois_point(mu, k));
            }
            Ok(())
        }
        _ => unreachable!("not a Poisson suite"),
    }
}

fn is_binomial(suite: Suite) -> bool {
    suite.name().starts_with("binom-")
}

fn run_in(ctx: &Context<'_>, suite: Suite) -> Result<GridVerdict> {
    let mut tally = Tally::new(suite, ctx.config);
    if is_binomial(suite) {
        binom_suite(ctx, suite, &mut tally)?;
    } else {
        pois_suite(ctx, suite, &mut tally)?;
    }
    tally.finish()
}

/// Evaluates one suite over the configured grid.
pub fn run_suite(config: &GridConfig, suite: Suite) -> Result<GridVerdict> {
    run_in(&Context::new(config), suite)
}

/// Evaluates every configured suite in order, sharing oracle tables.
pub fn run_grid(config: &GridConfig) -> Result<Vec<GridVerdict>> {
    let ctx = Context::new(config);
    config.suites.iter().map(|&suite| run_in(&ctx, suite)).collect()
}
