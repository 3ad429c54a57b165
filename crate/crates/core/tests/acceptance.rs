//! Full acceptance suite, one line per criterion.
//! `BOHMQ_SELFTEST_SCALE=smoke` gives a quick run; several closed-form
//! criteria are expected to fail at that size.

use std::process::ExitCode;

use bohm_qubits::selftest::{self, Scale, SelftestOptions};

fn main() -> ExitCode {
    let scale: Scale = match std::env::var("BOHMQ_SELFTEST_SCALE") {
        Ok(s) => s.parse().expect("BOHMQ_SELFTEST_SCALE is desk or smoke"),
        Err(_) => Scale::Desk,
    };
    let options = SelftestOptions { scale, ..SelftestOptions::default() };
    let outcomes = selftest::run(&options, &[]);
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    if outcomes.len() == 10 && failed.is_empty() {
        println!("acceptance: all {} criteria passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: criteria {failed:?} failed");
        ExitCode::FAILURE
    }
}
