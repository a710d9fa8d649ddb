//! Bound curves over a grid of `p` at fixed `n` and `k`.

use std::io::{self, Write};

use anyhow::{bail, Context as _};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use tailbounds_core::bounds::binom;
use tailbounds_core::dist::binom_sf;
use tailbounds_core::oracle::rational::{rational_to_f64, EXACT_N_MAX};
use tailbounds_core::oracle::{parse_exact, ExactBinomial, RationalProb};
use tailbounds_core::BinomialParams;

use crate::format::cell;

/// Column order of the sweep CSV.
pub const CSV_HEADER: &str = "p,exact_sf,chernoff_upper,factorial_upper,ash_lower,pelekis_lower,delta";

const MAX_ROWS: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub n: u64,
    pub k: u64,
    /// Defaults to `0.01`.
    pub p_min: Option<String>,
    /// Defaults to `k/n - 0.01`.
    pub p_max: Option<String>,
    pub step: String,
    /// Divide the conditional-expectation lower bound by `p^2`.
    pub figure_exponent: bool,
}

impl SweepSpec {
    pub fn new(n: u64, k: u64) -> Self {
        Self { n, k, p_min: None, p_max: None, step: "0.01".into(), figure_exponent: false }
    }
}

/// One CSV row; bound columns are `None` outside their domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub exact_sf: f64,
    pub chernoff_upper: Option<f64>,
    pub factorial_upper: Option<f64>,
    pub ash_lower: Option<f64>,
    pub pelekis_lower: Option<f64>,
    /// `pelekis_lower - ash_lower` as printed.
    pub delta: Option<f64>,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        [
            cell(Some(self.p)),
            cell(Some(self.exact_sf)),
            cell(self.chernoff_upper),
            cell(self.factorial_upper),
            cell(self.ash_lower),
            cell(self.pelekis_lower),
            cell(self.delta),
        ]
        .join(",")
    }
}

/// Integer multiples of `step` inside `[p_min, p_max]`, exact.
pub fn p_grid(spec: &SweepSpec) -> anyhow::Result<Vec<BigRational>> {
    let hundredth = BigRational::new(1.into(), 100.into());
    let parse = |text: &str, what: &str| {
        parse_exact(text).with_context(|| format!("cannot parse {what} = {text:?}"))
    };
    let step = parse(&spec.step, "step")?;
    if step.is_zero() {
        bail!("step must be positive");
    }
    let p_min = match &spec.p_min {
        Some(text) => parse(text, "p-min")?,
        None => hundredth.clone(),
    };
    let p_max = match &spec.p_max {
        Some(text) => parse(text, "p-max")?,
        None => BigRational::new((spec.k as i64).into(), (spec.n as i64).into()) - &hundredth,
    };
    if p_max >= BigRational::one() {
        bail!("p-max must be below 1");
    }
    let first = (&p_min / &step).ceil().to_integer().max(1.into());
    let last = (&p_max / &step).floor().to_integer();
    if !p_max.is_positive() || first > last {
        bail!("empty p range");
    }
    let count = (&last - &first).to_usize().filter(|c| *c < MAX_ROWS);
    let Some(count) = count else {
        bail!("p range has more than {MAX_ROWS} points");
    };
    Ok((0..=count)
        .map(|i| BigRational::from_integer(&first + i) * &step)
        .collect())
}

fn row(spec: &SweepSpec, p: &BigRational) -> anyhow::Result<SweepRow> {
    let p = RationalProb::new(p.clone())?;
    let p_f = rational_to_f64(p.as_rational());
    let params = BinomialParams::new(spec.n, p_f)?;
    let k = spec.k as i64;
    let exact_sf = if spec.n <= EXACT_N_MAX {
        ExactBinomial::new(spec.n, &p)?.sf_f64(k)
    } else {
        binom_sf(&params, k).value()
    };
    let ash_lower = binom::ash_lower(&params, k).ok();
    let pelekis_lower = binom::tail_lower(&params, k)
        .ok()
        .map(|v| if spec.figure_exponent { v / (p_f * p_f) } else { v });
    let delta = match (pelekis_lower, ash_lower) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    Ok(SweepRow {
        p: p_f,
        exact_sf,
        chernoff_upper: binom::chernoff_upper(&params, k).ok(),
        factorial_upper: binom::factorial_moment_upper(&params, k).ok(),
        ash_lower,
        pelekis_lower,
        delta,
    })
}

/// Evaluates every row. Refuses a sweep in which no row has both lower bounds.
pub fn sweep_binom(spec: &SweepSpec) -> anyhow::Result<Vec<SweepRow>> {
    if spec.n == 0 || spec.k == 0 || spec.k > spec.n {
        bail!("need 1 <= k <= n");
    }
    if spec.n > 100_000_000 {
        bail!("n is too large");
    }
    let rows = p_grid(spec)?
        .iter()
        .map(|p| row(spec, p))
        .collect::<anyhow::Result<Vec<_>>>()?;
    if rows.iter().all(|r| r.delta.is_none()) {
        bail!("no p in range has both lower bounds defined (they need n p < k < n)");
    }
    Ok(rows)
}

pub fn write_csv<W: Write + ?Sized>(rows: &[SweepRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    Ok(())
}
