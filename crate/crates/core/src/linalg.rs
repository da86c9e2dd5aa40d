//! Small dense determinants with partial pivoting.

use num_complex::Complex64;

/// Determinant of a row-major `n × n` complex matrix.
pub fn det_complex(mut a: Vec<Complex64>, n: usize) -> Complex64 {
    assert_eq!(a.len(), n * n);
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .unwrap();
        if a[pivot * n + col] == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
        }
    }
    det
}

/// Determinant of a row-major `n × n` real matrix.
pub fn det_real(mut a: Vec<f64>, n: usize) -> f64 {
    assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
        }
    }
    det
}

/// Inverse of a row-major complex matrix by Gauss–Jordan elimination.
pub fn inverse_complex(a: &[Complex64], n: usize) -> Option<Vec<Complex64>> {
    let mut m = a.to_vec();
    let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        inv[i * n + i] = Complex64::new(1.0, 0.0);
    }
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))?;
        if m[pivot * n + col].norm() == 0.0 {
            return None;
        }
        for k in 0..n {
            m.swap(pivot * n + k, col * n + k);
            inv.swap(pivot * n + k, col * n + k);
        }
        let p = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= p;
            inv[col * n + k] /= p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                let (mv, iv) = (m[col * n + k], inv[col * n + k]);
                m[row * n + k] -= f * mv;
                inv[row * n + k] -= f * iv;
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_and_complex_agree() {
        let a = vec![2.0, 1.0, 0.5, -1.0, 3.0, 2.0, 0.0, 1.0, 4.0];
        let d = det_real(a.clone(), 3);
        let dc = det_complex(a.iter().map(|&x| Complex64::new(x, 0.0)).collect(), 3);
        assert!((d - dc.re).abs() < 1e-12 && dc.im.abs() < 1e-12);
        assert!((d - 23.5).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        let a: Vec<Complex64> = [1.0, 2.0, 0.0, 1.0]
            .iter()
            .map(|&x| Complex64::new(x, 0.5))
            .collect();
        let inv = inverse_complex(&a, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: Complex64 = (0..2).map(|k| a[i * 2 + k] * inv[k * 2 + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - Complex64::new(e, 0.0)).norm() < 1e-12);
            }
        }
    }
}
