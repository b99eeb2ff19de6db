//! The mountain-pass selector on a perturbed saddle −qp + ℓ(q, p), its witness
//! path, and the dynamic-programming cross-check.
use minmax_hj::selector::{minimax_path_oracle, sigma_mountain_pass, sigma_opposite, SaddleLandscape, Witness};

fn main() -> minmax_hj::Result<()> {
    let f = |q: f64, p: f64| -q * p + 0.3 * (1.7 * q - 0.4).sin() + 0.2 * (0.8 * p + q).cos();
    let land = SaddleLandscape::uniform((-3.0, 3.0), (-3.0, 3.0), 120, 120, (0.0, 0.0), f)?;
    let r = sigma_mountain_pass(&land)?;
    let (iq, ip) = r.pass_cell.expect("pass cell");
    println!("sigma(f)        = {:.8}", r.value);
    println!("pass cell       = (q, p) = ({:.3}, {:.3})", land.q_axis()[iq], land.p_axis()[ip]);
    if let Witness::Path(path) = &r.witness {
        let top = path.iter().map(|&(i, j)| land.at(i, j)).fold(f64::NEG_INFINITY, f64::max);
        println!("witness path    = {} cells, highest value {:.8}", path.len(), top);
    }
    println!("minimax oracle  = {:.8}", minimax_path_oracle(&land));
    println!("-sigma(-f)      = {:.8}  (cell gap {:.3e})", sigma_opposite(&land)?.value, land.cell_gap());
    Ok(())
}
