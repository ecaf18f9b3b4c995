//! Runs every acceptance criterion and prints one PASS/FAIL line each.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kosmann_cli::report::{Check, Data};
use kosmann_cli::selftest::{self, CRITERIA};
use kosmann_cli::CliError;

const SEED: u64 = 42;

type Criterion = fn() -> Result<Check, CliError>;

fn criteria() -> [(Criterion, Option<u64>); 9] {
    [
        (selftest::clifford, Some(1)),
        (|| selftest::reductive_decomposition(SEED), Some(5)),
        (|| selftest::kosmann_identity(SEED), Some(30)),
        (selftest::killing_battery, None),
        (|| selftest::g_killing_equivalences(SEED), None),
        (|| selftest::reductive_metric_lie_vanishes(SEED), None),
        (|| selftest::oracle_concordance(SEED), Some(60)),
        (|| selftest::penrose_reduction(SEED), None),
        (|| selftest::parser(SEED), Some(10)),
    ]
}

fn selftest_json() -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_kosmann"))
        .args(["selftest", "--seed", &SEED.to_string(), "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    if out.stdout.is_empty() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn line(n: usize, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    println!("{status} {n:>2} {:<24} {detail}", CRITERIA[n - 1]);
}

fn main() -> ExitCode {
    let mut all = true;
    for (i, (run, limit)) in criteria().into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|s| elapsed < Duration::from_secs(s));
        let budget = limit.map_or(String::new(), |s| format!(" (limit {s} s)"));
        match result {
            Ok(check) => {
                let passed = check.passed && in_time;
                line(i + 1, passed, &format!("{:.2?}{budget}", elapsed));
                for (k, v) in &check.data {
                    if let Data::Text(t) = v {
                        if !check.passed {
                            println!("        {k}: {t}");
                        }
                    }
                }
                all &= passed;
            }
            Err(e) => {
                line(i + 1, false, &format!("error: {e}"));
                all = false;
            }
        }
    }
    match (selftest_json(), selftest_json()) {
        (Ok(a), Ok(b)) => {
            let same = a == b;
            line(10, same, &format!("{} bytes per report", a.len()));
            all &= same;
        }
        (Err(e), _) | (_, Err(e)) => {
            line(10, false, &format!("error: {e}"));
            all = false;
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
