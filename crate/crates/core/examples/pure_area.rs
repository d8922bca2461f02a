//! The pure-area rough path drives the flow of the bracket field:
//! with V_1 = A x and V_2 = B x the solution is exp(pi (BA - AB)) x.

use roughpath::path_lift::pure_area;
use roughpath::rde::{solve_flow, SolveOptions, VectorFieldSet};

fn main() -> roughpath::Result<()> {
    let a = vec![0.0, 1.0, 0.0, 0.0];
    let b = vec![0.0, 0.0, 1.0, 0.0];
    let fields = VectorFieldSet::linear(2, &[a, b])?;
    let driver = pure_area(1.0, 4)?;
    let z = solve_flow(&fields, &driver, 0.0, 1.0, &[1.0, 1.0], SolveOptions::with_tol(1e-10))?;
    // BA - AB = diag(-1, 1)
    let pi = std::f64::consts::PI;
    println!("solution {:?}", z.value);
    println!("expected [{}, {}]", (-pi).exp(), pi.exp());
    Ok(())
}
