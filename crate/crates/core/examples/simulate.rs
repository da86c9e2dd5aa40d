//! Exact simulation of free, conditioned and exclusion walkers, compared
//! with the determinantal formulas.

use fibsnake::ring::{
    all_states, conditioned_transition, noncollision_det, RateParams, WalkerConfig,
};
use fibsnake::simulate::{
    estimate, estimate_many, simulate_asep, unit_mean_martingale_at, Dynamics, SimSpec, StartLaw,
};

fn main() -> fibsnake::Result<()> {
    let (n, ell, t) = (5, 2, 1.0);
    let rates = RateParams::new(1.0, 0.3)?;
    let x = WalkerConfig::new(n, vec![0, 1])?;

    let path = simulate_asep(&x, rates, t, 7);
    println!(
        "one exclusion path: {} jumps, final {:?}",
        path.jumps.len(),
        path.final_config()
    );

    let samples = 400_000;
    let states = all_states(n, ell)?;
    let free = SimSpec {
        dynamics: Dynamics::Free,
        start: StartLaw::Fixed(x.clone()),
        rates,
        horizon: t,
    };
    let sv = states.clone();
    let reps = estimate_many(
        move |p| {
            let y = if p.tau.is_some() {
                None
            } else {
                p.final_config()
            };
            sv.iter()
                .map(|s| (Some(s) == y.as_ref()) as u8 as f64)
                .collect()
        },
        states.len(),
        &free,
        samples,
        1,
    )?;
    println!("\nfree walkers, P(X_t = y, no collision):");
    for (y, r) in states.iter().zip(&reps).take(5) {
        let exact = noncollision_det(&x, y, rates, t)?;
        println!(
            "  {y}: {:.5} +- {:.5}, determinant {exact:.5}",
            r.estimate, r.stderr
        );
    }

    // exclusion paths reweighted by the traffic martingale give the
    // conditioned transition probabilities
    let asep = SimSpec {
        dynamics: Dynamics::Asep,
        ..free
    };
    let y = WalkerConfig::new(n, vec![2, 4])?;
    let target = y.clone();
    let r = estimate(
        move |p| {
            let m = unit_mean_martingale_at(p, rates, t).expect("exclusion path");
            if p.final_config().as_ref() == Some(&target) {
                m
            } else {
                0.0
            }
        },
        &asep,
        samples,
        2,
    )?;
    println!(
        "\nreweighted exclusion to {y}: {:.5} +- {:.5}, exact {:.5}",
        r.estimate,
        r.stderr,
        conditioned_transition(&x, &y, rates, t)?
    );
    Ok(())
}
