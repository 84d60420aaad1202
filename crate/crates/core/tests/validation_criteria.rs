//! Acceptance criteria, one line each. Exits non-zero when any criterion fails.

use std::process::ExitCode;

use ssc_core::selftest::{run, SelftestOptions};

fn main() -> ExitCode {
    let report = run(&SelftestOptions::default());
    for check in &report.checks {
        println!("{check}");
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!("{} criteria, {failed} failed", report.checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
