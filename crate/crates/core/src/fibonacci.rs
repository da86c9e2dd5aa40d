//! The Fibonacci polynomials `f_n(λ)` that count signed snakelet nests.

use num_complex::Complex64;

/// `f_n(λ)` via `f_0 = f_1 = 1`, `f_n = f_{n-1} + λ f_{n-2}`.
pub fn fibonacci_f(n: usize, lambda: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0);
    for _ in 1..n {
        let next = cur + lambda * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Closed form through the roots `(1 ± c)/2` with `c = sqrt(1 + 4λ)`.
///
/// Uses complex arithmetic so that `λ < -1/4` works; the double root at
/// `λ = -1/4` is handled by its limit `(n+1) 2^{-n}`.
pub fn fibonacci_closed(n: usize, lambda: f64) -> f64 {
    let c = Complex64::new(1.0 + 4.0 * lambda, 0.0).sqrt();
    if c.norm() < 1e-12 {
        return (n as f64 + 1.0) * 0.5f64.powi(n as i32);
    }
    let p = (1.0 + c) / 2.0;
    let q = (1.0 - c) / 2.0;
    let e = n as i32 + 1;
    ((p.powi(e) - q.powi(e)) / c).re
}

/// `Σ_k C(n-k, k) λ^k`.
pub fn fibonacci_binomial(n: usize, lambda: f64) -> f64 {
    let mut total = 0.0;
    let mut k = 0;
    while 2 * k <= n {
        total += binomial(n - k, k) * lambda.powi(k as i32);
        k += 1;
    }
    total
}

/// Signed matching polynomial of a cycle of `n` sites, used for a column
/// that is entirely fixed and wraps around the torus.
///
/// For `n ≥ 3` this is `f_n(λ) + λ f_{n-2}(λ)`. Cycles of length 1 or 2
/// admit no snakelet and give 1.
pub fn cyclic_fibonacci(n: usize, lambda: f64) -> f64 {
    if n < 3 {
        1.0
    } else {
        fibonacci_f(n, lambda) + lambda * fibonacci_f(n - 2, lambda)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}
