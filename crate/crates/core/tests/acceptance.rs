//! One line per acceptance criterion; failing checks are listed under their criterion.
//! `TRIPLEKIT_SEED` overrides the seed.

use std::process::ExitCode;
use std::time::Instant;

use triplekit::suites::{run_suite, SuiteConfig, SUITES};

fn main() -> ExitCode {
    let seed = std::env::var("TRIPLEKIT_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(7);
    let cfg = SuiteConfig { seed, ..SuiteConfig::default() };
    let mut failed = 0;
    for (i, name) in SUITES.iter().enumerate() {
        let start = Instant::now();
        let line = match run_suite(name, &cfg) {
            Ok(report) => {
                let checks = report.checks.len();
                let bad: Vec<_> = report.checks.iter().filter(|c| !c.pass).collect();
                let mut line = format!(
                    "criterion {} {}: {} ({}/{} checks, seed {}, {:.2}s)",
                    i + 1,
                    name,
                    if report.pass { "PASS" } else { "FAIL" },
                    checks - bad.len(),
                    checks,
                    seed,
                    start.elapsed().as_secs_f64()
                );
                for c in bad {
                    line.push_str(&format!(
                        "\n    {}: {:e} {} {:e} over {}{}",
                        c.name,
                        c.value,
                        c.relation,
                        c.threshold,
                        c.count,
                        c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
                    ));
                }
                if !report.pass {
                    failed += 1;
                }
                line
            }
            Err(e) => {
                failed += 1;
                format!("criterion {} {}: FAIL ({e})", i + 1, name)
            }
        };
        println!("{line}");
    }
    println!("acceptance: {}/{} criteria pass", SUITES.len() - failed, SUITES.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
