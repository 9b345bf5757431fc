//! The acceptance run: one PASS/FAIL line per criterion.
//!
//! Lines go straight to stdout so they show without `--nocapture`.

use std::io::Write;
use std::time::Instant;

use padic_heat::checks::{heat_identity_detail, run_acceptance, Grid, FD_STEP, SUITE_COUNT};

/// Parts that fail for reasons outside the implementation; see
/// `known_failure_is_the_step_size` for the evidence.
const KNOWN_FAILURES: &[(u32, &str)] = &[(4, "finite-difference rel residual")];

fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
    out.flush().unwrap();
}

#[test]
fn acceptance() {
    let mut unexpected = Vec::new();
    let mut fails = 0;
    for id in 1..=SUITE_COUNT {
        let start = Instant::now();
        let r = run_acceptance(id).expect("suite exists");
        emit(&format!("{r}  ({:.1}s)", start.elapsed().as_secs_f64()));
        fails += !r.passed as usize;
        for p in r.parts.iter().filter(|p| !p.passed) {
            if !KNOWN_FAILURES.contains(&(r.id, p.label.as_str())) {
                unexpected.push(format!("{} / {}", r.name, p.label));
            }
        }
    }
    emit(&format!("{} of {SUITE_COUNT} criteria pass", SUITE_COUNT as usize - fails));
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:?}");
}

/// A central difference with a fixed step has truncation error about
/// `h² |∂³Z/∂t³| / 6`, and `∂³Z/∂t³ ~ t^{-3} Z` near the origin, so a
/// step of 1e-5 cannot reach 1e-6 relative error at t = 0.01 when n/α is
/// large. Every failure sits at the smallest time, and scaling the step
/// with t removes all of them while the term-by-term identity holds.
#[test]
fn known_failure_is_the_step_size() {
    let d = heat_identity_detail(&Grid::acceptance()).unwrap();
    emit(&format!(
        "h = {FD_STEP:e}: {}/{} fail (worst {:.2e}) at t in {:?}; h = {FD_STEP:e}·t worst {:.2e}; termwise worst {:.2e}",
        d.fd_failures, d.points, d.fd_max, d.fd_failure_times, d.fd_relative_step_max, d.termwise_max
    ));
    assert!(d.termwise_max < 1e-14);
    assert!(d.fd_relative_step_max < 1e-6);
    assert!(d.fd_failure_times.iter().all(|&t| t <= 0.01), "{:?}", d.fd_failure_times);
}
