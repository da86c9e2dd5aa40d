//! Torus correlations approach the semi-infinite cylinder as `m1` grows.

use fibsnake::events::{Event, EventQuery};
use fibsnake::kasteleyn::correlation;
use fibsnake::lattice::{Params, Step, TorusShape};
use fibsnake::limits::{cylinder_correlation, occupation_from_beta, CylinderKernelSpec};

fn main() -> fibsnake::Result<()> {
    let (beta, gamma, delta, n) = (0.9, 0.2, 0.2, 4);
    // Right steps per column are fixed by which roots of w^n = ±1 sit
    // inside |1 + γw + δ/w| < β
    let ell = occupation_from_beta(beta, gamma, delta, n, 1).expect("generic beta");
    println!("beta = {beta}: ell = {ell} Right steps per column on n = {n}");

    let spec = CylinderKernelSpec::new(ell, n, gamma, delta)?;
    let params = Params::new(1.0, beta, gamma, delta);
    let q = EventQuery::new(vec![
        Event::new(0, 0, Step::Right),
        Event::new(1, 1, Step::Up),
    ]);
    let limit = cylinder_correlation(&spec, &q)?;
    println!("cylinder: {limit:.15}");
    for m in [16, 32, 64, 128, 256] {
        let v = correlation(TorusShape::new(m, n)?, &params, &q)?;
        println!("  m1 = {m:>3}: {v:.15}  residual {:.2e}", (v - limit).abs());
    }
    Ok(())
}
