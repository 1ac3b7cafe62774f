//! Runs every acceptance criterion, prints one PASS/FAIL line per criterion
//! with its sub-checks, and exits non-zero if any criterion fails.

use std::process::ExitCode;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for criterion in aqm_validation::all() {
        let v = criterion();
        let status = if v.pass() { "PASS" } else { "FAIL" };
        println!("{status} {} [{:.2?}]", v.name, v.elapsed);
        for c in &v.checks {
            println!("    {} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.label, c.detail);
        }
        if !v.pass() {
            failed.push(v.name);
        }
    }
    println!();
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed: {}", failed.len(), failed.join("; "));
        ExitCode::FAILURE
    }
}
