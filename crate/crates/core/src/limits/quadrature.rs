//! Adaptive Gauss–Legendre quadrature for smooth complex integrands.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let (x, w) = rule();
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(&xi, &wi)| f(c + h * xi) * wi)
        .sum::<Complex64>()
        * h
}

/// Integral of `f` over `[a, b]` with absolute tolerance `tol`, and the
/// accumulated error estimate.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    fn rec<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Result<(Complex64, f64)> {
        let m = 0.5 * (a + b);
        let l = panel(f, a, m);
        let r = panel(f, m, b);
        let err = (l + r - whole).norm();
        if err <= tol {
            return Ok((l + r, err));
        }
        if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailed { tol, err });
        }
        let (lv, le) = rec(f, a, m, l, 0.5 * tol, depth + 1)?;
        let (rv, re) = rec(f, m, b, r, 0.5 * tol, depth + 1)?;
        Ok((lv + rv, le + re))
    }
    if a == b {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let whole = panel(f, a, b);
    rec(f, a, b, whole, tol, 0)
}
