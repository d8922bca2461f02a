//! Level-3 extension of a smooth level-2 lift, compared with the
//! level-3 signature of the same piecewise-linear path.

use roughpath::path_lift::{lyons_extend_level3, signature, LyonsOptions};
use roughpath::PiecewisePath;

fn main() -> roughpath::Result<()> {
    let h = PiecewisePath::uniform(0.0, 1.0, 64, |t| vec![(4.0 * t).sin(), t * t, (3.0 * t).cos()])?;
    let x2 = signature(&h, 2)?.with_p(2.5)?;
    let x3 = lyons_extend_level3(&x2, LyonsOptions::default())?;
    let exact = signature(&h, 3)?;
    let n = h.len() - 1;
    let diff = x3.increment(0, n).max_abs_diff(&exact.increment(0, n))?;
    println!("max level-3 difference to the exact signature: {diff:.2e}");
    Ok(())
}
