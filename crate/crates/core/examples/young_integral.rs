//! Sewing an almost-additive functional: the Young integral of t against t^2.

use roughpath::sewing::{sew, young_integral_fn, AlmostAdditive, SewOptions};

fn main() -> roughpath::Result<()> {
    let mu = AlmostAdditive::new(|s: f64, t: f64| vec![s * (t * t - s * s)], 2.0, 1.0)?;
    if let Some(fit) = mu.measure_exponent(0.0, 1.0, 10) {
        println!("measured defect exponent a = {:.3}", fit.slope);
    }
    let plain = sew(&mu, 0.0, 1.0, SewOptions::with_tol(1e-6))?;
    println!("dyadic sums: {:.8} at depth {} (exact 2/3)", plain.value[0], plain.depth);

    // sums approach the limit like 2^{-(a-1) n}; extrapolate with a = 2
    let opts = SewOptions {
        tol: 1e-12,
        extrapolate: Some(2.0),
        ..SewOptions::default()
    };
    let fast = young_integral_fn(|t| vec![t], |t| vec![t * t], 1, 0.0, 1.0, opts)?;
    println!("extrapolated: {:.12} at depth {}", fast.value[0], fast.depth);
    Ok(())
}
