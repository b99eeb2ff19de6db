//! Trace the multivalued wavefront of H = p²/2 with u0 = cos q past the first
//! caustic, and export characteristics (with branch ids) as CSV.
//!
//! Usage: cargo run --release --example wavefront_export [out.csv]
use minmax_hj::config::ProblemConfig;
use minmax_hj::run::{export, run_solve, ExportFormat, RunMode};

const PROBLEM: &str = r#"
[hamiltonian]
name = "quadratic"
[initial]
name = "cos"
[grid]
domain = [-7.0, 7.0]
h = 0.02
[time]
T = 1.5
outputs = [0.5, 1.0, 1.5]
[operator]
n_q = 100
n_p = 100
"#;

fn main() -> minmax_hj::Result<()> {
    let cfg = ProblemConfig::parse(PROBLEM)?;
    let res = run_solve(&cfg, RunMode::Wavefront)?;
    let records = res.wavefront.as_deref().unwrap_or_default();
    for snap in &res.snapshots {
        let branches = records.iter().filter(|r| r.t == snap.t).map(|r| r.branch).max().unwrap_or(0) + 1;
        println!("t = {:.1}: {branches} branches, selected section on {} nodes", snap.t, snap.values.len());
    }
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("wavefront.csv").display().to_string());
    export(&res, ExportFormat::Csv, &out)?;
    println!("wrote {out}");
    Ok(())
}
