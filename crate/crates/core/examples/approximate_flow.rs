//! An approximate flow sewn into a flow: explicit Euler steps for x' = -x
//! converge to exp(-t) with deltas halving per dyadic level.

use roughpath::flows::{convergence_table, flow_eval, table_slope, FlowOptions, FnFlow};

fn main() -> roughpath::Result<()> {
    let euler = FnFlow::new(1, 2.0, |s: f64, t: f64, x: &[f64]| vec![x[0] * (1.0 - (t - s))])?;
    let rows = convergence_table(&euler, 0.0, 1.0, &[1.0], &(0..=12).collect::<Vec<_>>())?;
    for r in &rows {
        println!("depth {:>2}  value {:.10}  delta {:?}", r.depth, r.value[0], r.delta);
    }
    if let Some(fit) = table_slope(&rows) {
        println!("slope {:.3} (expected -(a-1) = -1)", fit.slope);
    }
    let phi = flow_eval(&euler, 0.0, 1.0, &[1.0], FlowOptions::with_tol(1e-6))?;
    println!("flow at tol 1e-6: {:.8} vs exp(-1) = {:.8}", phi.value[0], (-1.0f64).exp());
    Ok(())
}
