use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::roots::{root_sets, RootSets};
use crate::error::{Error, Result};
use crate::events::{expand_events, EventQuery, Periods, RWord};
use crate::lattice::Step;
use crate::linalg::det_complex;

/// The `m1 → ∞` limit of the torus with `ℓ` right steps per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderKernelSpec {
    pub ell: usize,
    pub n: usize,
    pub gamma: f64,
    pub delta: f64,
    #[serde(skip)]
    roots: Option<RootSets>,
}

impl CylinderKernelSpec {
    pub fn new(ell: usize, n: usize, gamma: f64, delta: f64) -> Result<Self> {
        if n == 0 || ell > n {
            return Err(Error::UnsupportedParameters(format!(
                "need 0 <= ell <= n, got ell={ell}, n={n}"
            )));
        }
        if 4.0 * gamma * delta > 1.0 || gamma < 0.0 || delta < 0.0 {
            return Err(Error::OutsideRegime);
        }
        Ok(Self {
            ell,
            n,
            gamma,
            delta,
            roots: Some(root_sets(ell, n)),
        })
    }

    pub fn roots(&self) -> RootSets {
        self.roots
            .clone()
            .unwrap_or_else(|| root_sets(self.ell, self.n))
    }

    fn denom(&self, w: Complex64) -> Complex64 {
        1.0 + self.gamma * w + self.delta / w
    }

    /// `H_{ℓ,n}(x, y)` for unreduced vertical coordinates.
    pub fn h(&self, x: (i64, i64), y: (i64, i64)) -> Result<Complex64> {
        let d1 = y.0 - x.0;
        let d2 = y.1 - x.1;
        let roots = self.roots();
        let (set, sign) = if d1 >= 0 {
            (&roots.right, 1.0)
        } else {
            (&roots.left, -1.0)
        };
        let power = d1 + 1;
        let mut total = Complex64::new(0.0, 0.0);
        for &w in set {
            let den = self.denom(w);
            if power > 0 && den.norm() < 1e-14 {
                return Err(Error::VanishingDenominator { re: w.re, im: w.im });
            }
            total += w.powi(-d2 as i32) * den.powi(-power as i32);
        }
        Ok(sign * total / self.n as f64)
    }

    /// Row prefactor: `-1` for Right, `γ` for Up, `δ` for Down.
    pub fn prefactor(&self, step: Step) -> f64 {
        match step {
            Step::Fixed => 1.0,
            Step::Right => -1.0,
            Step::Up => self.gamma,
            Step::Down => self.delta,
        }
    }

    pub fn word_expectation(&self, word: &RWord) -> Result<Complex64> {
        let k = word.factors.len();
        let mut m = Vec::with_capacity(k * k);
        for fi in &word.factors {
            let p = self.prefactor(fi.step);
            for fj in &word.factors {
                m.push(p * self.h(fi.target(), (fj.x1, fj.x2))?);
            }
        }
        Ok(det_complex(m, k))
    }
}

/// `P_{ℓ,n}^{γ,δ}(∩ {σx^i = x^i + f^i})` on `Z × Z_n`.
pub fn cylinder_correlation(spec: &CylinderKernelSpec, query: &EventQuery) -> Result<f64> {
    let words = expand_events(query, Periods::cylinder(spec.n))?;
    let mut total = Complex64::new(0.0, 0.0);
    for w in &words {
        total += w.coefficient as f64 * spec.word_expectation(w)?;
    }
    if total.im.abs() > 1e-9 * (1.0 + total.re.abs()) {
        return Err(Error::NonReal {
            re: total.re,
            im: total.im,
        });
    }
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::Event;

    #[test]
    fn right_density() {
        for (ell, n) in [(0, 3), (1, 3), (2, 4), (3, 5), (5, 5)] {
            let s = CylinderKernelSpec::new(ell, n, 0.2, 0.3).unwrap();
            let v = cylinder_correlation(&s, &EventQuery::new(vec![Event::new(4, 1, Step::Right)]))
                .unwrap();
            assert!((v - ell as f64 / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn single_site_probabilities_sum_to_one() {
        let s = CylinderKernelSpec::new(2, 5, 0.25, 0.4).unwrap();
        let total: f64 = Step::ALL
            .iter()
            .map(|&st| {
                cylinder_correlation(&s, &EventQuery::new(vec![Event::new(0, 0, st)])).unwrap()
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
