//! Space-time correlations of stationary conditioned walkers, and the
//! Markov property recovered from determinants alone.

use fibsnake::lattice::Step;
use fibsnake::ring::{markov_check, spacetime_correlation, RateParams, SpaceTimeEvent};

fn main() -> fibsnake::Result<()> {
    let (n, ell) = (5, 2);
    let rates = RateParams::new(1.0, 0.3)?;
    let ev = SpaceTimeEvent::new;
    for (label, events) in [
        ("site 0 occupied", vec![ev(0.0, 0, Step::Right)]),
        ("up-jump density at site 0", vec![ev(0.0, 0, Step::Up)]),
        (
            "occupied at t=0 and t=0.5",
            vec![ev(0.0, 0, Step::Right), ev(0.5, 0, Step::Right)],
        ),
        (
            "sites 0 and 1 both occupied",
            vec![ev(0.2, 0, Step::Right), ev(0.2, 1, Step::Right)],
        ),
    ] {
        println!(
            "{label:<30} {:.12}",
            spacetime_correlation(ell, n, rates, &events)?
        );
    }
    let m = markov_check(ell, 4, rates, [0.0, 0.5, 1.2])?;
    println!(
        "\nMarkov property on n = 4: residual {:.2e} over {} triples",
        m.residual, m.triples
    );
    Ok(())
}
