//! Load a problem file and solve it in every compatible mode.
//!
//! Usage: cargo run --release --example solve_config [configs/pendulum.toml]
use minmax_hj::config::load_problem;
use minmax_hj::run::{run_solve, RunMode};

fn main() -> minmax_hj::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/pendulum.toml").to_string());
    let cfg = load_problem(&path)?;
    for mode in [RunMode::Variational, RunMode::Iterated, RunMode::HopfLax, RunMode::LaxOleinik, RunMode::ViscosityFd] {
        match run_solve(&cfg, mode) {
            Ok(res) => {
                let last = res.snapshots.last().expect("one output at least");
                let g = last.to_grid()?;
                println!("{mode:<13} t = {:.2}: u(0) = {:.6}, domain {:?}", last.t, g.eval(0.0), g.domain());
            }
            Err(e) => println!("{mode:<13} skipped: {e}"),
        }
    }
    Ok(())
}
