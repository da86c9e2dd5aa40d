//! On the period-2 cylinder with one Right step per column, the sites of
//! row 0 that step vertically form a renewal process whose gaps count the
//! flips needed for two heads.

use fibsnake::events::{Event, EventQuery};
use fibsnake::lattice::Step;
use fibsnake::limits::{cylinder_correlation, CylinderKernelSpec};

fn main() -> fibsnake::Result<()> {
    let (gamma, delta) = (0.3, 0.1);
    let spec = CylinderKernelSpec::new(1, 2, gamma, delta)?;
    let p = (gamma + delta) / (1.0 + gamma + delta);
    let point = |x: i64| [Event::new(x, 0, Step::Up), Event::new(x, 0, Step::Down)];
    let prob = |ev: Vec<Event>| cylinder_correlation(&spec, &EventQuery::new(ev));

    let rho = prob(vec![point(0)[0]])? + prob(vec![point(0)[1]])?;
    println!("p = {p:.12}: density {rho:.15}, p/2 = {:.15}", p / 2.0);
    for d in 1..=6 {
        let mut two = 0.0;
        for a in point(0) {
            for b in point(d) {
                two += prob(vec![a, b])?;
            }
        }
        let renewal = rho * rho * (1.0 - (1.0 - 2.0 * p).powi(d as i32 - 1));
        println!("  d = {d}: two-point {two:.15}, renewal {renewal:.15}");
    }
    Ok(())
}
