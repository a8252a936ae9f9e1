//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails or exceeds its time budget.

#[path = "../common/mod.rs"]
mod common;
mod corpus;
mod end_to_end;
mod evaluator;
mod oracles;
mod transitions;
mod ui_filtering;
mod zones;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

/// Each check returns a short summary of what it verified.
pub type Outcome = Result<String, String>;

/// Fails the enclosing check with a formatted message.
#[macro_export]
macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "string and geometry oracles", budget: Duration::from_secs(5), run: oracles::check },
        Criterion { name: "transition fixtures", budget: Duration::from_secs(10), run: transitions::check },
        Criterion { name: "ui filtering invariants", budget: Duration::from_secs(10), run: ui_filtering::check },
        Criterion { name: "zone geometry", budget: Duration::from_secs(1), run: zones::check },
        Criterion { name: "end-to-end determinism", budget: Duration::from_secs(10), run: end_to_end::check },
        Criterion { name: "evaluator fixtures", budget: Duration::from_secs(1), run: evaluator::check },
        Criterion { name: "corpus filter rules", budget: Duration::from_secs(1), run: corpus::check },
    ];

    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    let mut ran = 0;
    for c in &criteria {
        if filter.as_deref().is_some_and(|f| !c.name.contains(f)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > c.budget => Err(format!("took {:.2}s, budget {:.0}s", took.as_secs_f64(), c.budget.as_secs_f64())),
            r => r,
        };
        match result {
            Ok(summary) => println!("PASS  {:<30} {:>6.2}s  {summary}", c.name, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:<30} {:>6.2}s  {why}", c.name, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
