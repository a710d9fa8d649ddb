use std::path::PathBuf;
use std::process::{Command, Output};

fn tailbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tailbounds"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn config_path(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    root.to_string_lossy().into_owned()
}

#[test]
fn eval_binom_json_schema() {
    let out = tailbounds(&["eval", "binom", "--n", "10", "--p", "0.3", "--k", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
    for key in ["query", "exact", "bounds", "meta"] {
        assert!(keys.contains(&key.to_string()), "{key}");
    }
    assert_eq!(json["query"]["p_exact"], "3/10");
    assert_eq!(json["bounds"]["factorial_upper"]["value"], 0.324);
    assert_eq!(json["bounds"]["pelekis_lower"]["value"], 0.004374);
    assert_eq!(json["meta"]["precision"], 12);
    assert_eq!(json["meta"]["ell_floor"], 2);
    assert!(json["meta"]["anomalies"].as_array().unwrap().is_empty());
}

#[test]
fn eval_fraction_and_decimal_agree() {
    let a = tailbounds(&["eval", "binom", "--n", "12", "--p", "3/10", "--k", "6"]);
    let b = tailbounds(&["eval", "binom", "--n", "12", "--p", "0.3", "--k", "6"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn eval_top_atom_marks_lower_bounds() {
    let out = tailbounds(&["eval", "binom", "--n", "10", "--p", "0.5", "--k", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let top = 2f64.powi(-10);
    assert_eq!(json["exact"]["sf"].as_f64(), Some(top));
    assert_eq!(json["bounds"]["chernoff_upper"]["value"].as_f64(), Some(top));
    assert_eq!(json["bounds"]["factorial_upper"]["value"].as_f64(), Some(top));
    for name in ["ash_lower", "pelekis_lower"] {
        assert_eq!(json["bounds"][name]["in_domain"], false);
        assert!(json["bounds"][name]["value"].is_null());
        assert!(json["bounds"][name]["reason"].is_string());
    }
}

#[test]
fn eval_pois_text_and_sign_flag() {
    let out = tailbounds(&["eval", "pois", "--mu", "2", "--k", "3", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("0.323323583817"));
    assert!(text.lines().any(|l| l.starts_with("pelekis_lower") && l.ends_with("0.08")));
    assert!(!text.contains("positive_exponent"));
    let out = tailbounds(&["eval", "pois", "--mu", "2", "--k", "3", "--positive-exponent"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let plus = json["bounds"]["chernoff_upper_positive_exponent"]["value"].as_f64().unwrap();
    assert!(plus > 1.0);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["eval", "binom", "--n", "10", "--p", "1.5", "--k", "5"][..],
        &["eval", "binom", "--n", "10", "--p", "0.3", "--k", "3"],
        &["eval", "binom", "--n", "10", "--p", "x", "--k", "5"],
        &["eval", "binom", "--n", "10", "--p", "0.3", "--k", "-1"],
        &["eval", "pois", "--mu", "-2", "--k", "3"],
        &["eval", "pois", "--mu", "2", "--k", "0"],
        &["sweep", "binom", "--n", "10", "--k", "10"],
        &["sweep", "binom", "--n", "10", "--k", "5", "--p-min", "0.7"],
        &["verify", "--config", "missing.cfg"],
        &["frobnicate"],
        &[],
    ] {
        let out = tailbounds(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let out = tailbounds(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("sweep"));
}

#[test]
fn sweep_csv_format() {
    let out = tailbounds(&["sweep", "binom", "--n", "100", "--k", "80", "--step", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "p,exact_sf,chernoff_upper,factorial_upper,ash_lower,pelekis_lower,delta");
    assert_eq!(lines.len(), 16);
    let ps: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(ps.windows(2).all(|w| w[0] < w[1]));
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 7);
    }
    let again = tailbounds(&["sweep", "binom", "--n", "100", "--k", "80", "--step", "0.05"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn figure_exponent_divides_by_p_squared() {
    let plain = stdout(&tailbounds(&["sweep", "binom", "--n", "20", "--k", "15"]));
    let figure = stdout(&tailbounds(&["sweep", "binom", "--n", "20", "--k", "15", "--figure-exponent"]));
    let column = |text: &str| -> Vec<(f64, Option<f64>)> {
        text.lines()
            .skip(1)
            .map(|l| {
                let cells: Vec<_> = l.split(',').collect();
                (cells[0].parse().unwrap(), cells[5].parse().ok())
            })
            .collect()
    };
    let (a, b) = (column(&plain), column(&figure));
    assert_eq!(a.len(), b.len());
    let mut compared = 0;
    for ((p, x), (_, y)) in a.iter().zip(&b) {
        if let (Some(x), Some(y)) = (x, y) {
            assert!(((y * p * p) - x).abs() <= 1e-11 * x.abs());
            compared += 1;
        }
    }
    assert!(compared > 0);
}

#[test]
fn verify_only_medians() {
    let cfg = config_path("only-medians.cfg");
    let out = tailbounds(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let ids: Vec<_> = json.as_array().unwrap().iter().map(|v| v["inequality_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["binom-median", "pois-median"]);
}

#[test]
fn verify_exit_codes_for_failures_and_bad_configs() {
    let dir = std::env::temp_dir().join(format!("tailbounds-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    // at k = n the Chernoff bound equals the tail, so zero tolerance trips on rounding
    let strict = dir.join("strict.cfg");
    std::fs::write(&strict, "suites = binom-chernoff-upper\ntolerance.bound = 0\n").unwrap();
    let out = tailbounds(&["verify", "--config", strict.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json[0]["passed"], false);

    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "suites = binom-median\nbinom.n = zero\n").unwrap();
    let out = tailbounds(&["verify", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_default_grid_passes() {
    let out = tailbounds(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let verdicts = json.as_array().unwrap();
    assert_eq!(verdicts.len(), 28);
    assert!(verdicts.iter().all(|v| v["violations"] == 0 && v["passed"] == true));
    let shipped = tailbounds(&["verify", "--config", &config_path("default.cfg")]);
    assert_eq!(shipped.stdout, out.stdout);
}
