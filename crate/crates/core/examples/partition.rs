//! The partition function as a signed sum of four Kasteleyn determinants,
//! checked against exhaustive enumeration.

use fibsnake::kasteleyn::{partition_function, SectorWeights, ThetaSector};
use fibsnake::lattice::{brute_force_partition, Params, TorusShape};

fn main() -> fibsnake::Result<()> {
    let params = Params::new(1.0, 0.5, 0.3, 0.2);
    for (m1, m2) in [(2, 3), (3, 3), (3, 4), (4, 4)] {
        let shape = TorusShape::new(m1, m2)?;
        let z = partition_function(shape, &params)?;
        let brute = brute_force_partition(shape, &params)?;
        println!("{m1}x{m2}: Z = {z:.15}  enumeration = {brute:.15}");
    }

    // the determinants are evaluated in log form, so large tori are fine
    let shape = TorusShape::new(200, 40)?;
    let w = SectorWeights::compute(shape, &params)?;
    println!("\n200x40: log Z = {:.10}", w.z.log_abs);
    for (i, s) in ThetaSector::ALL.iter().enumerate() {
        println!(
            "  theta = ({}, {}): C = {:+}, log|det K| = {:.10}, share of Z = {:+.3e}",
            s.theta1,
            s.theta2,
            w.c[i],
            w.dets[i].log_abs,
            w.lambda(i).re
        );
    }
    Ok(())
}
