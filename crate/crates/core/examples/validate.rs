//! Runs every invariant suite and prints one line per check.

use murmur_core::cli::validate;

fn main() {
    let checks = validate::run(None).expect("known suites");
    for c in &checks {
        println!("{:<12} {:<22} {} {}", c.suite, c.name, if c.passed { "ok  " } else { "FAIL" }, c.detail);
    }
    if checks.iter().any(|c| !c.passed) {
        std::process::exit(2);
    }
}
