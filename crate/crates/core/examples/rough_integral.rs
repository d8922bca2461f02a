//! Rough integral of B against Brownian rough paths: the Itô lift
//! reproduces the Itô integral, the Stratonovich lift adds T/2.

use roughpath::brownian::{rough_vs_ito_integral, BrownianSample};

fn main() -> roughpath::Result<()> {
    let sample = BrownianSample::new(1, 12, 1.0, 42)?;
    let b = sample.end()[0];
    let r = rough_vs_ito_integral(&sample, |x| vec![x[0]], |_| vec![1.0], 2, 1e-12)?;
    println!("B_T = {b:.6}");
    println!("Ito lift:           {:.10}  (B^2/2 - T/2 = {:.10})", r.ito[0], 0.5 * b * b - 0.5);
    println!("Stratonovich lift:  {:.10}  (B^2/2 = {:.10})", r.stratonovich[0], 0.5 * b * b);
    println!("left Riemann sum:   {:.10}  (gap {:.2e})", r.riemann[0], r.gap);
    Ok(())
}
