//! Run one validation suite and print its JSON report.
//!
//! Usage: cargo run --release --example validate_suite [selector_axioms|operator_estimates|...]
use minmax_hj::validate::{run_validate, Suite};

fn main() -> minmax_hj::Result<()> {
    let suite: Suite = std::env::args().nth(1).as_deref().unwrap_or("selector_axioms").parse()?;
    let report = run_validate(suite);
    for r in &report.records {
        eprintln!("{}", r.line());
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
