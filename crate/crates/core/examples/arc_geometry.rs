//! Phase diagram: where |1 + γw + δ/w| exceeds β on the unit circle, and the
//! sign of each sector determinant that goes with it.

use fibsnake::kasteleyn::{c_coeff, det_k_log, ThetaSector};
use fibsnake::lattice::{Params, TorusShape};
use fibsnake::limits::{arc_geometry, predicted_sector_sign};

fn main() -> fibsnake::Result<()> {
    let (gamma, delta) = (0.3, 0.2);
    println!("gamma = {gamma}, delta = {delta}");
    for beta in [0.3, 0.6, 0.9, 1.2, 1.4, 1.8] {
        let g = arc_geometry(beta, gamma, delta);
        println!(
            "  beta = {beta}: {:?}, half-angle {:.6}",
            g.phase,
            g.t_beta.unwrap_or(f64::NAN)
        );
    }

    let shape = TorusShape::new(30, 12)?;
    println!("\nsign of C det K on 30x12:");
    for beta in [0.3, 1.0, 1.8] {
        let params = Params::new(1.0, beta, gamma, delta);
        let signs: Vec<String> = ThetaSector::ALL
            .iter()
            .map(|&s| {
                let v = (det_k_log(s, shape, &params).phase * c_coeff(s, shape)).re;
                let p = predicted_sector_sign(s, shape, beta, gamma, delta);
                format!("{:+}/{:+}", v.signum(), p.unwrap_or(f64::NAN))
            })
            .collect();
        println!("  beta = {beta}: computed/predicted {}", signs.join("  "));
    }
    Ok(())
}
