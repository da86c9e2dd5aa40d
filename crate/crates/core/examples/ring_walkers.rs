//! Walkers on a ring: the twisted Karlin-McGregor kernel, non-collision
//! probabilities, the conditioned chain and its stationary law.

use fibsnake::ring::{
    all_states, conditioned_rate, conditioned_transition, generator_table, noncollision_det,
    stationary_prob, RateParams, RingConstants, WalkerConfig,
};

fn main() -> fibsnake::Result<()> {
    let (n, ell) = (6, 3);
    let rates = RateParams::new(1.0, 0.3)?;
    let x = WalkerConfig::new(n, vec![0, 2, 4])?;
    let k = RingConstants::new(ell, n)?;
    println!("n = {n}, ell = {ell}: mu = {:.12}, c = {:.12}", k.mu, k.c);

    println!("\nfrom {x}, t = 0.8:");
    let mut total = 0.0;
    for y in all_states(n, ell)? {
        let survive = noncollision_det(&x, &y, rates, 0.8)?;
        let q = conditioned_transition(&x, &y, rates, 0.8)?;
        total += q;
        if q > 0.05 {
            println!("  -> {y}: no collision {survive:.6}, conditioned {q:.6}");
        }
    }
    println!("  conditioned row sums to {total:.15}");

    println!("\nstationary law Delta^2 / n^ell:");
    for h in all_states(n, ell)?.iter().take(5) {
        println!("  {h}: {:.12}", stationary_prob(h));
    }

    println!("\njump rates from {x}:");
    for j in 0..ell {
        println!(
            "  walker {j}: up {:.6}, down {:.6}",
            conditioned_rate(&x, j, true, rates),
            conditioned_rate(&x, j, false, rates)
        );
    }

    let worst = generator_table(n, ell, rates)?
        .iter()
        .map(|r| r.residual)
        .fold(0.0, f64::max);
    println!("\ngenerator identity: worst residual {worst:.2e}");
    Ok(())
}
