use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::kasteleyn::{c_coeff, phase, ThetaSector};
use crate::lattice::TorusShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcPhase {
    /// `β` below the ellipse: every root is to the right, `ℓ = 0`.
    Full,
    /// Circle and ellipse intersect.
    Partial,
    /// `β` above the ellipse: every root is to the left, `ℓ = n`.
    Empty,
}

/// Position of the circle `|w| = 1` relative to `|1 + γw + δ/w| = β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcGeometry {
    pub intersects: bool,
    pub phase: ArcPhase,
    /// Half-angle of the arc `{e^{it} : |t| < t_β}` where `|1+γw+δ/w| > β`.
    pub t_beta: Option<f64>,
}

/// `|1 + γ e^{it} + δ e^{-it}|²` as a function of `c = cos t`.
fn modulus_sq(c: f64, gamma: f64, delta: f64) -> f64 {
    1.0 + (gamma - delta).powi(2) + 2.0 * (gamma + delta) * c + 4.0 * gamma * delta * c * c
}

/// Requires `4γδ ≤ 1`, under which the modulus is increasing in `cos t`.
pub fn arc_geometry(beta: f64, gamma: f64, delta: f64) -> ArcGeometry {
    let b2 = beta * beta;
    let lo = modulus_sq(-1.0, gamma, delta);
    let hi = modulus_sq(1.0, gamma, delta);
    if b2 < lo {
        return ArcGeometry {
            intersects: false,
            phase: ArcPhase::Full,
            t_beta: Some(PI),
        };
    }
    if b2 > hi {
        return ArcGeometry {
            intersects: false,
            phase: ArcPhase::Empty,
            t_beta: Some(0.0),
        };
    }
    // solve 4γδ c² + 2(γ+δ) c + (1 + (γ-δ)² - β²) = 0 for c in [-1, 1] by bisection
    let (mut a, mut b) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if modulus_sq(m, gamma, delta) < b2 {
            a = m;
        } else {
            b = m;
        }
    }
    let c = 0.5 * (a + b);
    ArcGeometry {
        intersects: true,
        phase: ArcPhase::Partial,
        t_beta: Some(c.clamp(-1.0, 1.0).acos()),
    }
}

/// Roots of `w^n = (-1)^parity` with `|1+γw+δ/w| < β` (the right steps per
/// column selected by `β`), or `None` when some root sits within `1e-9` of
/// the circle `|1+γw+δ/w| = β`.
pub fn occupation_from_beta(
    beta: f64,
    gamma: f64,
    delta: f64,
    n: usize,
    parity: u8,
) -> Option<usize> {
    let mut count = 0;
    for k in 0..n {
        let w = phase(2 * k as i64 + parity as i64, n);
        let m = (1.0 + gamma * w + delta / w).norm();
        if (m - beta).abs() < 1e-9 {
            return None;
        }
        if m < beta {
            count += 1;
        }
    }
    Some(count)
}

/// Sign of `C_θ det K_θ` at `α = 1` predicted from the position of `β`
/// relative to `1 ± (γ+δ)`. `None` when `β` is within `1e-9` of either bound.
pub fn predicted_sector_sign(
    sector: ThetaSector,
    shape: TorusShape,
    beta: f64,
    gamma: f64,
    delta: f64,
) -> Option<f64> {
    let (lo, hi) = (1.0 - gamma - delta, 1.0 + gamma + delta);
    if (beta - lo).abs() < 1e-9 || (beta - hi).abs() < 1e-9 {
        return None;
    }
    if beta < lo {
        Some(c_coeff(sector, shape).signum())
    } else if beta < hi {
        Some(1.0)
    } else {
        let e = (shape.m1 + sector.theta1 as usize + 1) * (sector.theta2 as usize + 1);
        Some(if e.is_multiple_of(2) { 1.0 } else { -1.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_quarter_unit_beta() {
        let g = arc_geometry(1.0, 0.25, 0.25);
        assert!(g.intersects);
        assert!((g.t_beta.unwrap() - PI / 2.0).abs() < 1e-12);
        assert_eq!(arc_geometry(1.6, 0.3, 0.2).phase, ArcPhase::Empty);
        assert_eq!(arc_geometry(0.4, 0.3, 0.2).phase, ArcPhase::Full);
    }
}
