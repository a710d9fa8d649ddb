//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use tailbounds_core::oracle::{
    binom_sf_exact, parse_exact, pois_sf_highprec, run_suite, GridConfig, RationalProb, Suite,
};

/// Relative tolerance of the spot-value checks.
const SPOT_TOL: f64 = 1e-12;

/// Wall-clock budget of the binomial sandwich grid.
const SANDWICH_BUDGET: Duration = Duration::from_secs(300);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn suites(config: &GridConfig, list: &[Suite]) -> Outcome {
    let mut passed = true;
    let mut points = 0;
    let mut failures = Vec::new();
    for &suite in list {
        match run_suite(config, suite) {
            Ok(v) => {
                points += v.grid_size;
                if !v.passed() {
                    passed = false;
                    failures.push(format!(
                        "{}: {} violations, worst margin {:.3e} at {:?}",
                        v.inequality_id, v.violations, v.worst_margin, v.worst_point.0
                    ));
                }
            }
            Err(e) => {
                passed = false;
                failures.push(format!("{}: {e}", suite.name()));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{} suites, {points} grid points, 0 violations", list.len())
    } else {
        failures.join("; ")
    };
    Outcome::new(passed, detail)
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tailbounds").chain(args.iter().copied());
    let code = tailbounds::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).expect("utf-8 output"))
}

fn sandwich(config: &GridConfig) -> Outcome {
    let start = Instant::now();
    let outcome = suites(
        config,
        &[
            Suite::BinomChernoffUpper,
            Suite::BinomFactorialUpper,
            Suite::BinomFactorialVsChernoff,
            Suite::BinomAshLower,
            Suite::BinomTailLower,
        ],
    );
    let elapsed = start.elapsed();
    let in_budget = elapsed < SANDWICH_BUDGET;
    Outcome::new(
        outcome.passed && in_budget,
        format!("{} in {:.1}s", outcome.detail, elapsed.as_secs_f64()),
    )
}

fn spot_values() -> Outcome {
    let mut problems = Vec::new();
    fn check(problems: &mut Vec<String>, what: &str, got: Option<f64>, want: f64) {
        match got {
            Some(got) if rel(got, want) <= SPOT_TOL => {}
            other => problems.push(format!("{what}: got {other:?}, want {want}")),
        }
    }

    let (code, text) = run_cli(&["eval", "binom", "--n", "10", "--p", "0.3", "--k", "5"]);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
    let p = RationalProb::parse("3/10").expect("probability");
    let anchor = binom_sf_exact(10, &p, 5).expect("oracle").to_f64();
    check(&mut problems, "binomial exact_sf", json["exact"]["sf"].as_f64(), anchor);
    check(&mut problems, "pelekis_lower", json["bounds"]["pelekis_lower"]["value"].as_f64(), 0.004374);
    check(&mut problems, "factorial_upper", json["bounds"]["factorial_upper"]["value"].as_f64(), 0.324);
    if code != 0 {
        problems.push(format!("binomial eval exit {code}"));
    }

    let (code, text) = run_cli(&["eval", "pois", "--mu", "2", "--k", "3"]);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
    // 1 - 5 e^-2 to 50 digits
    let two = parse_exact("2").expect("mean");
    let closed = pois_sf_highprec(&two, 3, 50).expect("oracle");
    let digits = closed.to_decimal_string(40);
    let ok_prefix = digits.starts_with("0.3233235838169365405300025251");
    if !ok_prefix {
        problems.push(format!("high-precision 1 - 5e^-2 = {digits}"));
    }
    check(&mut problems, "poisson exact_sf", json["exact"]["sf"].as_f64(), closed.to_f64());
    if code != 0 {
        problems.push(format!("poisson eval exit {code}"));
    }

    if problems.is_empty() {
        Outcome::new(
            true,
            format!("exact_sf {anchor}, pelekis_lower 0.004374, factorial_upper 0.324, Poisson 1 - 5e^-2 {}", closed.to_f64()),
        )
    } else {
        Outcome::new(false, problems.join("; "))
    }
}

struct SweepFinding {
    first_positive: Option<f64>,
    close: Vec<f64>,
}

fn sweep_finding(n: &str, k: &str) -> Result<SweepFinding, String> {
    let (code, text) = run_cli(&["sweep", "binom", "--n", n, "--k", k]);
    if code != 0 {
        return Err(format!("sweep n={n} k={k} exit {code}"));
    }
    let mut finding = SweepFinding { first_positive: None, close: Vec::new() };
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let num = |i: usize| cells.get(i).and_then(|c| c.parse::<f64>().ok());
        let (Some(p), Some(ash), Some(lower), Some(delta)) = (num(0), num(4), num(5), num(6)) else {
            continue;
        };
        if delta > 0.0 {
            finding.first_positive.get_or_insert(p);
        } else if (0.1..=10.0).contains(&(lower / ash)) {
            finding.close.push(p);
        }
    }
    Ok(finding)
}

fn qualitative_sweep() -> Outcome {
    let mut details = Vec::new();
    let mut passed = true;
    for (n, k) in [("20", "15"), ("100", "90")] {
        match sweep_finding(n, k) {
            Ok(f) => {
                let ok = f.first_positive.is_some() && !f.close.is_empty();
                passed &= ok;
                let range = match (f.close.first(), f.close.last()) {
                    (Some(a), Some(b)) => format!("{a}..{b}"),
                    _ => "none".into(),
                };
                let first = f.first_positive.map_or("none".into(), |p| p.to_string());
                details.push(format!(
                    "n={n} k={k}: delta > 0 from p={first}, within 10x of the entropy bound at p in {range}"
                ));
            }
            Err(e) => {
                passed = false;
                details.push(e);
            }
        }
    }
    Outcome::new(passed, details.join("; "))
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + Send + Sync + 'a>;

fn main() -> ExitCode {
    let config = GridConfig::default();
    let config = &config;
    let criteria: Vec<(&str, Criterion)> = vec![
        ("binomial sandwich", Box::new(move || sandwich(config))),
        (
            "binomial tail conditional expectation",
            Box::new(move || suites(config, &[Suite::BinomTceUpper, Suite::BinomTceOracle])),
        ),
        (
            "identities",
            Box::new(move || {
                suites(
                    config,
                    &[
                        Suite::BinomTailTceIdentity,
                        Suite::BinomTceRecursion,
                        Suite::PoisTceRecursion,
                        Suite::BinomProductIdentity,
                        Suite::BinomProductConstant,
                        Suite::PoisTailTceIdentity,
                        Suite::PoisTelescoping,
                    ],
                )
            }),
        ),
        (
            "tail ratio bounds",
            Box::new(move || {
                suites(config, &[Suite::BinomPointUpper, Suite::BinomTailRatio, Suite::PoisTailRatio])
            }),
        ),
        (
            "medians",
            Box::new(move || suites(config, &[Suite::BinomMedian, Suite::PoisMedian])),
        ),
        (
            "Poisson sandwich and tail conditional expectation",
            Box::new(move || {
                suites(
                    config,
                    &[
                        Suite::PoisChernoffUpper,
                        Suite::PoisTailLower,
                        Suite::PoisTceUpper,
                        Suite::PoisSfOracle,
                        Suite::PoisTceOracle,
                    ],
                )
            }),
        ),
        (
            "small-shift regime constants",
            Box::new(move || suites(config, &[Suite::BinomSmallShift, Suite::PoisSmallShift])),
        ),
        ("spot values", Box::new(spot_values)),
        ("lower-bound comparison sweep", Box::new(qualitative_sweep)),
    ];

    let outcomes: Vec<Outcome> = thread::scope(|scope| {
        let handles: Vec<_> = criteria.iter().map(|(_, run)| scope.spawn(run)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Outcome::new(false, "panicked")))
            .collect()
    });

    let mut all = true;
    for (idx, ((title, _), outcome)) in criteria.iter().zip(&outcomes).enumerate() {
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {title}: {}", idx + 1, outcome.detail);
        all &= outcome.passed;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
