use std::fmt::Write as _;

use clap::Args;
use krn_core::laws::{all_suites, DaggerFn};

use crate::{Outcome, EXIT_OK, EXIT_SELFTEST, EXIT_USAGE};

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random instances per suite.
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
}

/// Runs every law suite with `dagger` as the inversion under test.
pub fn run(args: &SelftestArgs, dagger: DaggerFn) -> Outcome {
    if args.cases == 0 {
        return Outcome::fail(EXIT_USAGE, "error: --cases must be at least 1");
    }
    let checks = all_suites(args.seed, args.cases, dagger);
    let mut out = String::new();
    let mut suites: Vec<&str> = Vec::new();
    for c in &checks {
        if !suites.contains(&c.suite) {
            suites.push(c.suite);
        }
        let _ = writeln!(out, "{c}");
    }
    out.push('\n');
    for suite in &suites {
        let mine: Vec<_> = checks.iter().filter(|c| c.suite == *suite).collect();
        let passed = mine.iter().filter(|c| c.passed()).count();
        let instances: usize = mine.iter().map(|c| c.cases).sum();
        let _ = writeln!(out, "suite {suite}: {passed}/{} laws passed over {instances} checks", mine.len());
    }
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).collect();
    if failed.is_empty() {
        let _ = writeln!(out, "all suites passed (seed {}, {} cases)", args.seed, args.cases);
        return Outcome {
            code: EXIT_OK,
            stdout: out,
            stderr: String::new(),
        };
    }
    let mut err = String::new();
    for c in failed {
        let _ = writeln!(
            err,
            "FAILED {}/{}: first failing case {} (reproduce with `krn selftest --seed {} --cases {}`)",
            c.suite,
            c.law,
            c.first_failure.map_or_else(|| "?".into(), |i| i.to_string()),
            args.seed,
            args.cases
        );
    }
    Outcome {
        code: EXIT_SELFTEST,
        stdout: out,
        stderr: err,
    }
}
