//! One line per acceptance criterion. Criteria 1 to 11 run individually;
//! criterion 12 reruns them as a single selftest, checks the time budget and
//! that the report is byte-identical to the one assembled from the first pass.

use std::io::Write;
use std::time::{Duration, Instant};

use hopf_forge::selftest::{run_criterion, run_selftest, SelftestReport};

/// Written to the raw stderr handle so the lines survive test output capture.
fn show(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

const SEED: u64 = 20240601;
const SELFTEST_BUDGET: Duration = Duration::from_secs(300);

#[test]
fn acceptance() {
    let mut criteria = Vec::new();
    let mut lines = Vec::new();
    for id in 1..=11 {
        let start = Instant::now();
        let r = run_criterion(id, SEED, false);
        let failed: Vec<&str> = r.checks.iter().filter(|c| c.status == hopf_forge::selftest::CheckStatus::Fail).map(|c| c.name.as_str()).collect();
        let line = format!(
            "criterion {id:>2}: {} {} ({} checks, {:.2?}){}",
            if r.passed { "PASS" } else { "FAIL" },
            r.title,
            r.checks.len(),
            start.elapsed(),
            if failed.is_empty() { String::new() } else { format!(" failing: {failed:?}") }
        );
        show(&line);
        lines.push((r.passed, line));
        criteria.push(r);
    }
    let first = SelftestReport { seed: SEED, passed: criteria.iter().all(|c| c.passed), criteria };

    let start = Instant::now();
    let second = run_selftest(SEED, false);
    let elapsed = start.elapsed();
    let identical = serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap();
    let ok12 = second.passed && elapsed < SELFTEST_BUDGET && identical;
    let line = format!(
        "criterion 12: {} selftest end to end in {elapsed:.2?} (budget {SELFTEST_BUDGET:?}), deterministic report: {identical}",
        if ok12 { "PASS" } else { "FAIL" }
    );
    show(&line);
    lines.push((ok12, line));

    let failures: Vec<&String> = lines.iter().filter(|(ok, _)| !ok).map(|(_, l)| l).collect();
    assert!(failures.is_empty(), "failing criteria: {failures:#?}");
}
