//! Enumerate snake configurations on a small torus and look at their cycle
//! structure, vertical gaps and Fibonacci weights.

use fibsnake::fibonacci::fibonacci_f;
use fibsnake::lattice::{
    coarse_weight, cycle_data, enumerate_configs, fiber, nest_sum, vertical_gaps, Params,
    TorusShape,
};

fn main() -> fibsnake::Result<()> {
    let shape = TorusShape::new(3, 4)?;
    let params = Params::new(1.0, 0.5, 0.3, 0.2);

    let generalised = enumerate_configs(shape, false)?.count();
    let pure: Vec<_> = enumerate_configs(shape, true)?.collect();
    println!(
        "3x4 torus: {generalised} generalised, {} pure configurations",
        pure.len()
    );

    // a pure configuration with a long vertical gap
    let c = pure
        .iter()
        .filter(|c| c.counts().right == 3)
        .max_by_key(|c| {
            vertical_gaps(c)
                .map(|g| g.sizes().iter().sum::<usize>())
                .unwrap_or(0)
        })
        .expect("some configuration has a Right step in every column");
    println!("\n{}", c.to_grid());
    let cycles = cycle_data(c);
    println!(
        "long cycles {}, winding {:?}, occupation {}",
        cycles.long_cycles, cycles.winding, cycles.occupation
    );
    let gaps = vertical_gaps(c)?;
    println!("gap sizes {:?}", gaps.sizes());

    // the weight of the pure configuration equals the signed sum over its fiber
    let lambda = params.nest_lambda();
    println!(
        "w J = {:.12}, fiber sum = {:.12} over {} configurations",
        coarse_weight(c, &params)?,
        nest_sum(c, &params)?,
        fiber(c)?.len()
    );

    println!("\nf_n(lambda) for lambda = {lambda}:");
    for n in 0..8 {
        println!("  f_{n} = {:.12}", fibonacci_f(n, lambda));
    }
    Ok(())
}
