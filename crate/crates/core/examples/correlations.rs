//! Event probabilities on the torus from kernel determinants, with the
//! exhaustive weighted frequency alongside.

use fibsnake::events::{Event, EventQuery};
use fibsnake::kasteleyn::{correlation, correlation_report, sector_measure};
use fibsnake::lattice::{Params, PureMeasure, Step, TorusShape, DEFAULT_ENUMERATION_CAP};

fn main() -> fibsnake::Result<()> {
    let shape = TorusShape::new(3, 3)?;
    let params = Params::new(1.0, 0.5, 0.2, 0.2);
    let exhaustive = PureMeasure::new(shape, &params, DEFAULT_ENUMERATION_CAP)?;

    let queries = [
        vec![Event::new(0, 0, Step::Right)],
        vec![Event::new(0, 0, Step::Fixed), Event::new(0, 1, Step::Fixed)],
        vec![Event::new(0, 0, Step::Up), Event::new(1, 1, Step::Right)],
        vec![
            Event::new(0, 0, Step::Right),
            Event::new(1, 0, Step::Right),
            Event::new(2, 2, Step::Down),
        ],
    ];
    for q in queries {
        let v = correlation(shape, &params, &EventQuery::new(q.clone()))?;
        println!(
            "{:<40} kernel {v:.15}  enumeration {:.15}",
            format!("{q:?}").chars().take(40).collect::<String>(),
            exhaustive.probability(&q)
        );
    }

    let q = EventQuery::new(vec![
        Event::new(0, 0, Step::Up),
        Event::new(1, 2, Step::Fixed),
    ]);
    let report = correlation_report(shape, &params, &q)?;
    println!("\nsector breakdown ({} words):", report.words.len());
    for s in &report.sectors {
        println!(
            "  ({}, {}): {:+.12}",
            s.sector.theta1, s.sector.theta2, s.contribution.re
        );
    }

    // conditioned on one occupation parity; on long thin tori one class
    // carries almost no weight and the conditional value loses precision
    let big = TorusShape::new(24, 6)?;
    for theta2 in [0, 1] {
        let v = sector_measure(
            theta2,
            big,
            &params,
            &EventQuery::new(vec![Event::new(0, 0, Step::Right)]),
        )?;
        println!("24x6, theta2 = {theta2}: P(Right) = {v:.12}");
    }
    Ok(())
}
