//! Nonlinear RDE driven by the Stratonovich Brownian lift, and the same
//! equation under the Itô lift.

use roughpath::brownian::{ito_lift, stratonovich_lift, BrownianSample};
use roughpath::rde::{solve_path, SolveOptions, VectorFieldSet};

fn main() -> roughpath::Result<()> {
    let fields = VectorFieldSet::parse(2, &[vec!["sin(x2)", "1"], vec!["x1", "cos(x1)"]], None)?;
    let sample = BrownianSample::new(2, 8, 1.0, 7)?;
    let strat = stratonovich_lift(&sample, 4, 2.5)?;
    let ito = ito_lift(&strat)?;
    let out: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
    let opts = SolveOptions::with_tol(1e-9);
    for (name, driver) in [("Stratonovich", &strat), ("Ito", &ito)] {
        let sol = solve_path(&fields, driver, &[0.1, 0.2], &out, opts)?;
        println!("{name}: max depth {}, converged {}", sol.max_depth, sol.converged);
        for (t, z) in sol.path.times().iter().zip(sol.path.values()) {
            println!("  t = {t:.3}  z = [{:.6}, {:.6}]", z[0], z[1]);
        }
    }
    Ok(())
}
