//! Grid certification runs and their JSON form.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::thread;

use anyhow::Context as _;
use serde::Serialize;
use tailbounds_core::oracle::{run_suite, GridConfig, GridVerdict, Suite};

#[derive(Debug, Clone, Serialize)]
pub struct VerdictJson {
    pub inequality_id: &'static str,
    pub description: &'static str,
    pub grid_size: u64,
    pub violations: u64,
    pub skipped: u64,
    pub worst_margin: f64,
    pub worst_point: BTreeMap<&'static str, f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl From<&GridVerdict> for VerdictJson {
    fn from(v: &GridVerdict) -> Self {
        let description = Suite::from_name(v.inequality_id).map(Suite::description).unwrap_or("");
        Self {
            inequality_id: v.inequality_id,
            description,
            grid_size: v.grid_size,
            violations: v.violations,
            skipped: v.skipped,
            worst_margin: v.worst_margin,
            worst_point: v.worst_point.0.iter().copied().collect(),
            tolerance: v.tolerance,
            passed: v.passed(),
        }
    }
}

/// The shipped grid, or the file at `path` layered over it.
pub fn load_config(path: Option<&Path>) -> anyhow::Result<GridConfig> {
    let Some(path) = path else {
        return Ok(GridConfig::default());
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    GridConfig::parse(&text).with_context(|| format!("invalid config {}", path.display()))
}

/// Runs the configured suites on scoped worker threads, one per suite,
/// returning verdicts in configuration order.
pub fn run_verify(config: &GridConfig) -> anyhow::Result<Vec<GridVerdict>> {
    let results: Vec<_> = thread::scope(|scope| {
        let handles: Vec<_> = config
            .suites
            .iter()
            .map(|&suite| scope.spawn(move || run_suite(config, suite)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite worker panicked"))
            .collect()
    });
    results.into_iter().map(|r| r.map_err(anyhow::Error::from)).collect()
}

pub fn verdicts_json(verdicts: &[GridVerdict]) -> serde_json::Result<String> {
    let rows: Vec<VerdictJson> = verdicts.iter().map(VerdictJson::from).collect();
    serde_json::to_string_pretty(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians_only_run_passes() {
        let config = GridConfig::parse("suites = medians\nbinom.n = 1..40").unwrap();
        let verdicts = run_verify(&config).unwrap();
        assert_eq!(verdicts.len(), 2);
        assert!(verdicts.iter().all(GridVerdict::passed));
        let json = verdicts_json(&verdicts).unwrap();
        assert!(json.contains("\"inequality_id\": \"binom-median\""));
    }

    #[test]
    fn parallel_run_matches_sequential() {
        let config = GridConfig::parse(
            "suites = binom-sandwich, pois-tce-upper\nbinom.n = 1..25\npois.mu = 1, 3",
        )
        .unwrap();
        let sequential = tailbounds_core::oracle::run_grid(&config).unwrap();
        assert_eq!(run_verify(&config).unwrap(), sequential);
    }

    #[test]
    fn missing_config_is_an_error() {
        assert!(load_config(Some(Path::new("/nonexistent/missing.cfg"))).is_err());
    }
}
