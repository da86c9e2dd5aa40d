use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kasteleyn::phase;

/// The `n` roots of `w^n = (-1)^{n-ℓ+1}` split into the `ℓ` of least real
/// part and the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSets {
    pub ell: usize,
    pub n: usize,
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
}

/// Roots are compared through their exact angle numerators, so the split is
/// deterministic: conjugate pairs stay together, and any remaining tie is
/// broken by larger principal argument first.
pub fn root_sets(ell: usize, n: usize) -> RootSets {
    assert!(n >= 1 && ell <= n, "need 0 <= ell <= n, n >= 1");
    let s = ((n - ell + 1) % 2) as i64;
    let two_n = 2 * n as i64;
    // angle π a / n with a in (-n, n]
    let mut nums: Vec<i64> = (0..n as i64)
        .map(|k| {
            let a = (2 * k + s).rem_euclid(two_n);
            if a > n as i64 {
                a - two_n
            } else {
                a
            }
        })
        .collect();
    nums.sort_by(|a, b| b.abs().cmp(&a.abs()).then(b.cmp(a)));
    let all: Vec<Complex64> = nums.iter().map(|&a| phase(a, n)).collect();
    RootSets {
        ell,
        n,
        left: all[..ell].to_vec(),
        right: all[ell..].to_vec(),
    }
}

/// `μ_{ℓ,n} = sin(πℓ/n) / sin(π/n)`.
pub fn mu(ell: usize, n: usize) -> f64 {
    use std::f64::consts::PI;
    if n == 1 {
        return ell as f64;
    }
    (PI * ell as f64 / n as f64).sin() / (PI / n as f64).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        let r = root_sets(0, 5);
        assert!(r.left.is_empty() && r.right.len() == 5);
        for w in &r.right {
            assert!((w.powi(5) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let r = root_sets(1, 6);
        assert!((r.left[0] + 1.0).norm() < 1e-15);
        let r = root_sets(4, 4);
        assert!(r.left.iter().sum::<Complex64>().norm() < 1e-12);
    }
}
