use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::error::{Error, Result};
use crate::events::{expand_events, EventQuery, Periods};
use crate::lattice::Step;
use crate::linalg::det_complex;

/// The `m1, m2 → ∞` limit with right-step density `τ`.
///
/// The arc endpoint is `w_τ = -e^{-iπτ}`, so `τ` is both the angle to the
/// negative real axis in units of `π` and the density of right steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneKernelSpec {
    pub tau: f64,
    pub gamma: f64,
    pub delta: f64,
    pub tol: f64,
}

impl PlaneKernelSpec {
    pub fn new(tau: f64, gamma: f64, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::UnsupportedParameters(format!(
                "tau = {tau} outside [0, 1]"
            )));
        }
        if gamma < 0.0 || delta < 0.0 || 4.0 * gamma * delta > 1.0 {
            return Err(Error::OutsideRegime);
        }
        if gamma + delta >= 1.0 {
            return Err(Error::UnsupportedParameters(
                "plane kernel needs gamma + delta < 1 (pole on the unit circle)".into(),
            ));
        }
        Ok(Self {
            tau,
            gamma,
            delta,
            tol: 1e-10,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        assert!(tol > 0.0);
        self.tol = tol;
        self
    }

    pub fn w_tau(&self) -> Complex64 {
        -Complex64::from_polar(1.0, -PI * self.tau)
    }

    /// `H_τ(x, y)` and its quadrature error estimate.
    pub fn h(&self, x: (i64, i64), y: (i64, i64)) -> Result<(Complex64, f64)> {
        let d1 = y.0 - x.0;
        let d2 = y.1 - x.1;
        let power = -(d1 + 1) as i32;
        let (g, dl) = (self.gamma, self.delta);
        let f = move |phi: f64| {
            let w = Complex64::from_polar(1.0, phi);
            let den = 1.0 + g * w + dl / w;
            Complex64::from_polar(1.0, -(d2 as f64) * phi) * den.powi(power) / (2.0 * PI)
        };
        let a = PI * (1.0 - self.tau);
        if d1 >= 0 {
            integrate(&f, -a, a, self.tol)
        } else {
            let (v, e) = integrate(&f, a, 2.0 * PI - a, self.tol)?;
            Ok((-v, e))
        }
    }

    pub fn prefactor(&self, step: Step) -> f64 {
        match step {
            Step::Fixed => 1.0,
            Step::Right => -1.0,
            Step::Up => self.gamma,
            Step::Down => self.delta,
        }
    }
}

/// Correlation of step events on `Z²`, and the summed quadrature error of
/// the kernel entries used.
pub fn plane_correlation(spec: &PlaneKernelSpec, query: &EventQuery) -> Result<(f64, f64)> {
    let words = expand_events(query, Periods::plane())?;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in &words {
        let k = w.factors.len();
        let mut m = Vec::with_capacity(k * k);
        for fi in &w.factors {
            for fj in &w.factors {
                let (v, e) = spec.h(fi.target(), (fj.x1, fj.x2))?;
                err += e;
                m.push(spec.prefactor(fi.step) * v);
            }
        }
        total += w.coefficient as f64 * det_complex(m, k);
    }
    if total.im.abs() > 1e-8 * (1.0 + total.re.abs()) {
        return Err(Error::NonReal {
            re: total.re,
            im: total.im,
        });
    }
    Ok((total.re, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_density_is_tau() {
        for tau in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let s = PlaneKernelSpec::new(tau, 0.3, 0.2).unwrap();
            let (h, _) = s.h((1, 0), (0, 0)).unwrap();
            assert!((-h.re - tau).abs() < 1e-10 && h.im.abs() < 1e-10);
            let free = PlaneKernelSpec::new(tau, 0.0, 0.0).unwrap();
            let (d, _) = free.h((0, 0), (0, 0)).unwrap();
            assert!((d.re - (1.0 - tau)).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_poles_on_circle() {
        assert!(PlaneKernelSpec::new(0.3, 0.5, 0.5).is_err());
    }
}
