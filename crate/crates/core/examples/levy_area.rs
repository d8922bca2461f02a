//! Monte Carlo statistics of the Lévy area on [0, T]: mean 0, variance T^2/4.

use roughpath::brownian::levy_area_stats;

fn main() -> roughpath::Result<()> {
    let horizon = 2.0;
    let s = levy_area_stats(20_000, 10, horizon, 1)?;
    let (lo, hi) = s.variance_ci();
    println!("mean     {:+.5} ± {:.5}", s.mean, 3.0 * s.mean_stderr);
    println!("variance {:.5} in [{lo:.5}, {hi:.5}], T^2/4 = {}", s.variance, horizon * horizon / 4.0);
    Ok(())
}
