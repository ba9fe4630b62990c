//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use terascope::validation::{run_all, ValidationOptions};

fn main() -> ExitCode {
    let start = Instant::now();
    let reports = run_all(&ValidationOptions::default());
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed ({:.1} s)",
        reports.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
