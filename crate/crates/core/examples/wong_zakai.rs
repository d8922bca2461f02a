//! ODEs driven by piecewise-linear Brownian paths approach the
//! Stratonovich RDE solution as the grid is refined.

use roughpath::brownian::{wong_zakai_experiment, WongZakaiOptions};
use roughpath::rde::VectorFieldSet;

fn main() -> roughpath::Result<()> {
    let fields = VectorFieldSet::parse(2, &[vec!["sin(x2)", "0.5*x1"], vec!["-0.3*x2", "cos(x1)"]], None)?;
    let rows = wong_zakai_experiment(&fields, &[0.3, -0.1], &[4, 6, 8, 10], 3, 1.0, WongZakaiOptions::default())?;
    for r in rows {
        println!("depth {:>2}  gap {:.3e}", r.depth, r.gap);
    }
    Ok(())
}
