//! The plane kernel and its reduction to the discrete sine kernel.

use std::f64::consts::PI;

use fibsnake::events::{Event, EventQuery};
use fibsnake::lattice::Step;
use fibsnake::limits::{plane_correlation, PlaneKernelSpec};

fn main() -> fibsnake::Result<()> {
    let tau = 0.35;
    let spec = PlaneKernelSpec::new(tau, 0.3, 0.0)?;
    println!("tau = {tau}, delta = 0: same-column Right kernel against sin(pi tau d)/(pi d)");
    for d in 0..6i64 {
        let (h, err) = spec.h((1, 0), (0, d))?;
        let sine = if d == 0 {
            tau
        } else {
            (PI * tau * d as f64).sin() / (PI * d as f64)
        };
        // the kernel carries the gauge factor (-1)^d
        println!(
            "  d = {d}: {:+.12} vs {:+.12} (quadrature error {err:.1e})",
            -h.re * if d % 2 == 0 { 1.0 } else { -1.0 },
            sine
        );
    }

    let general = PlaneKernelSpec::new(0.5, 0.3, 0.2)?;
    for q in [
        vec![Event::new(0, 0, Step::Right)],
        vec![Event::new(0, 0, Step::Up), Event::new(1, 1, Step::Right)],
        vec![Event::new(0, 0, Step::Fixed), Event::new(0, 1, Step::Down)],
    ] {
        let (v, err) = plane_correlation(&general, &EventQuery::new(q.clone()))?;
        println!("{q:?}: {v:.12} (+- {err:.1e})");
    }
    Ok(())
}
