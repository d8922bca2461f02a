//! Signature of a closed square loop: zero increment, unit Lévy area.

use roughpath::brownian::levy_area;
use roughpath::path_lift::signature;
use roughpath::PiecewisePath;

fn main() -> roughpath::Result<()> {
    let square = PiecewisePath::new(
        vec![0.0, 1.0, 2.0, 3.0, 4.0],
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]],
    )?;
    let x = signature(&square, 3)?;
    let total = x.increment(0, x.len() - 1);
    println!("level 1: {:?}", total.level(1));
    println!("level 2: {:?}", total.level(2));
    println!("Levy area: {}", levy_area(&total.truncate(2)?)?);
    println!("group-like: {}", total.is_group_like(1e-12));
    // log of the loop signature is a pure Lie element
    println!("log level 2: {:?}", total.log()?.level(2));
    Ok(())
}
