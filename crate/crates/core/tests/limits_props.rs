mod common;

use std::f64::consts::PI;

use fibsnake::events::{Event, EventQuery};
use fibsnake::kasteleyn::{c_coeff, det_k_log, is_singular, ThetaSector};
use fibsnake::lattice::{Params, Step, TorusShape};
use fibsnake::limits::{
    arc_geometry, cylinder_correlation, mu, occupation_from_beta, plane_correlation,
    predicted_sector_sign, root_sets, ArcPhase, CylinderKernelSpec, PlaneKernelSpec,
};
use fibsnake::linalg::det_complex;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn root_sums_equal_minus_mu() {
    for n in 1..=64usize {
        for ell in 1..=n {
            let r = root_sets(ell, n);
            assert_eq!(r.left.len(), ell);
            assert_eq!(r.right.len(), n - ell);
            let target = (-1.0f64).powi((n - ell + 1) as i32);
            for w in r.left.iter().chain(&r.right) {
                assert!((w.powi(n as i32) - target).norm() < 1e-9);
            }
            let max_left = r
                .left
                .iter()
                .map(|w| w.re)
                .fold(f64::NEG_INFINITY, f64::max);
            let min_right = r.right.iter().map(|w| w.re).fold(f64::INFINITY, f64::min);
            assert!(max_left <= min_right + 1e-12);
            let s: Complex64 = r.left.iter().sum();
            let si: Complex64 = r.left.iter().map(|w| w.inv()).sum();
            for v in [s, si] {
                assert!(v.im.abs() < 1e-12, "n={n} ell={ell}");
                assert!((v.re + mu(ell, n)).abs() < 1e-12, "n={n} ell={ell}");
            }
            if ell < n {
                assert!(
                    (mu(ell, n) - (PI * ell as f64 / n as f64).sin() / (PI / n as f64).sin()).abs()
                        < 1e-12
                );
            }
        }
    }
    assert!(root_sets(0, 5).left.is_empty());
    let one = root_sets(1, 7);
    assert!((one.left[0] + 1.0).norm() < 1e-12);
}

#[test]
fn root_sets_keep_conjugates_together() {
    for n in 2..=20usize {
        for ell in 0..=n {
            let r = root_sets(ell, n);
            let lonely = r
                .left
                .iter()
                .filter(|w| {
                    w.im.abs() > 1e-12 && !r.left.iter().any(|v| (v - w.conj()).norm() < 1e-12)
                })
                .count();
            assert!(lonely <= 1);
        }
    }
}

#[test]
fn symmetric_hopping_gives_conjugate_kernel() {
    for (ell, n) in [(1, 3), (2, 4), (3, 7), (2, 5)] {
        let spec = CylinderKernelSpec::new(ell, n, 0.3, 0.3).unwrap();
        for d1 in -2..=2i64 {
            for d2 in -4..=4i64 {
                let a = spec.h((0, 0), (d1, d2)).unwrap();
                let b = spec.h((0, 0), (d1, -d2)).unwrap();
                assert!((a - b.conj()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn cylinder_kernel_without_hopping() {
    let spec = CylinderKernelSpec::new(2, 5, 0.0, 0.0).unwrap();
    let r = spec.roots();
    for d1 in 0..3i64 {
        for d2 in -3..=3i64 {
            let direct: Complex64 = r
                .right
                .iter()
                .map(|w| w.powi(-d2 as i32))
                .sum::<Complex64>()
                / 5.0;
            assert!((spec.h((1, 1), (1 + d1, 1 + d2)).unwrap() - direct).norm() < 1e-12);
        }
    }
}

#[test]
fn cylinder_right_density() {
    for n in 2..=9usize {
        for ell in 0..=n {
            let spec = CylinderKernelSpec::new(ell, n, 0.2, 0.35).unwrap();
            let q = EventQuery::new(vec![Event::new(3, 1, Step::Right)]);
            let v = cylinder_correlation(&spec, &q).unwrap();
            assert!((v - ell as f64 / n as f64).abs() < 1e-12);
        }
    }
}

fn cylinder_battery(n: i64) -> Vec<EventQuery> {
    let mut out = Vec::new();
    for a in Step::ALL {
        out.push(EventQuery::new(vec![Event::new(0, 0, a)]));
        for b in Step::ALL {
            for (d1, d2) in [(0, 1), (1, 0), (1, 2), (2, n - 1)] {
                out.push(EventQuery::new(vec![
                    Event::new(0, 0, a),
                    Event::new(d1, d2, b),
                ]));
            }
        }
    }
    out.push(EventQuery::new(vec![
        Event::new(0, 0, Step::Right),
        Event::new(0, 2, Step::Up),
        Event::new(1, 1, Step::Fixed),
    ]));
    out
}

#[test]
fn cylinder_probabilities_in_unit_interval() {
    for (ell, n, g, d) in [
        (1, 3, 0.2, 0.4),
        (2, 4, 0.5, 0.5),
        (3, 5, 0.0, 0.7),
        (0, 4, 0.3, 0.1),
        (4, 4, 0.3, 0.1),
    ] {
        let spec = CylinderKernelSpec::new(ell, n, g, d).unwrap();
        for q in cylinder_battery(n as i64) {
            if q.check_distinct(fibsnake::events::Periods::cylinder(n))
                .is_err()
            {
                continue;
            }
            let v = cylinder_correlation(&spec, &q).unwrap();
            assert!((-1e-8..=1.0 + 1e-8).contains(&v), "{q:?} -> {v}");
        }
        let single: f64 = Step::ALL
            .iter()
            .filter(|&&s| n > 2 || s != Step::Down)
            .map(|&s| {
                cylinder_correlation(&spec, &EventQuery::new(vec![Event::new(0, 0, s)])).unwrap()
            })
            .sum();
        assert!((single - 1.0).abs() < 1e-10);
    }
}

/// `K(h, h') = -H((1, h), (0, h'))`, the Right-event kernel on one column.
fn plane_right_kernel(spec: &PlaneKernelSpec, h: i64, hp: i64) -> Complex64 {
    -spec.h((1, h), (0, hp)).unwrap().0
}

fn sine(tau: f64, d: i64) -> f64 {
    if d == 0 {
        tau
    } else {
        (PI * tau * d as f64).sin() / (PI * d as f64)
    }
}

#[test]
fn sine_kernel_entries_up_to_gauge() {
    for tau in [0.2, 0.5, 0.7] {
        for gamma in [0.0, 0.3, 0.6] {
            let spec = PlaneKernelSpec::new(tau, gamma, 0.0).unwrap();
            for d in -10..=10i64 {
                let k = plane_right_kernel(&spec, 0, d);
                let gauge = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                assert!(
                    (k - gauge * sine(tau, d)).norm() < 1e-8,
                    "tau={tau} g={gamma} d={d} k={k}"
                );
            }
        }
    }
}

#[test]
fn sine_kernel_determinants() {
    let hs = [0i64, 1, 3, 4, 8];
    for tau in [0.2, 0.5, 0.7] {
        let spec = PlaneKernelSpec::new(tau, 0.4, 0.0).unwrap();
        for k in 1..=hs.len() {
            let pts = &hs[..k];
            let mut a = Vec::new();
            let mut b = Vec::new();
            for &x in pts {
                for &y in pts {
                    a.push(plane_right_kernel(&spec, x, y));
                    b.push(Complex64::new(sine(tau, y - x), 0.0));
                }
            }
            let (da, db) = (det_complex(a, k), det_complex(b, k));
            assert!((da - db).norm() < 1e-8);
            let events = pts.iter().map(|&h| Event::new(0, h, Step::Right)).collect();
            let (v, _) = plane_correlation(&spec, &EventQuery::new(events)).unwrap();
            assert!((v - db.re).abs() < 1e-8);
        }
    }
}

#[test]
fn plane_degenerate_tau() {
    // all steps Right: the right arc is empty
    let full = PlaneKernelSpec::new(1.0, 0.2, 0.3).unwrap();
    for (d1, d2) in [(0, 1), (1, 0), (2, -1), (0, 0)] {
        assert!(full.h((0, 0), (d1, d2)).unwrap().0.norm() < 1e-12);
    }
    // no Right steps: the left arc is empty
    let none = PlaneKernelSpec::new(0.0, 0.2, 0.3).unwrap();
    for (d1, d2) in [(-1, 0), (-1, 1), (-3, 2)] {
        assert!(none.h((0, 0), (d1, d2)).unwrap().0.norm() < 1e-12);
    }
    assert!(PlaneKernelSpec::new(0.5, 0.6, 0.4).is_err());
}

#[test]
fn cylinder_approaches_plane() {
    let (gamma, delta) = (0.3, 0.2);
    let tau = 0.4;
    let plane = PlaneKernelSpec::new(tau, gamma, delta).unwrap();
    let offsets = [(0, 0), (0, 1), (1, -1), (2, 3), (-1, 0), (-2, 1), (-1, -2)];
    let mut prev = f64::INFINITY;
    for n in [25usize, 100, 400] {
        let ell = (tau * n as f64).floor() as usize;
        let cyl = CylinderKernelSpec::new(ell, n, gamma, delta).unwrap();
        let err = offsets
            .iter()
            .map(|&(d1, d2)| {
                (cyl.h((0, 0), (d1, d2)).unwrap() - plane.h((0, 0), (d1, d2)).unwrap().0).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < prev, "n={n} err={err}");
        prev = err;
    }
    assert!(prev < 2e-2, "residual {prev}");
}

#[test]
fn arc_matches_sampled_circle() {
    let grid = [0.0, 0.1, 0.25, 0.4, 0.5, 0.8, 1.0];
    let samples = 10_000;
    for &g in &grid {
        for &d in &grid {
            if 4.0 * g * d > 1.0 {
                continue;
            }
            for bi in 1..=30 {
                let beta = 0.1 * bi as f64;
                let geo = arc_geometry(beta, g, d);
                let modulus: Vec<f64> = (0..samples)
                    .map(|k| {
                        let t = -PI + 2.0 * PI * (k as f64 + 0.5) / samples as f64;
                        let w = Complex64::from_polar(1.0, t);
                        (1.0 + g * w + d / w).norm()
                    })
                    .collect();
                if modulus.iter().any(|m| (m - beta).abs() < 1e-9) && g + d == 0.0 {
                    // constant modulus equal to β: no arc to speak of
                    continue;
                }
                let above: Vec<bool> = modulus.iter().map(|&m| m > beta).collect();
                let switches = (0..samples)
                    .filter(|&k| above[k] != above[(k + 1) % samples])
                    .count();
                assert!(switches <= 2, "g={g} d={d} beta={beta}");
                for k in 0..samples {
                    assert_eq!(above[k], above[samples - 1 - k], "asymmetric arc");
                }
                match geo.phase {
                    ArcPhase::Full => assert!(above.iter().all(|&a| a)),
                    ArcPhase::Empty => assert!(above.iter().all(|&a| !a)),
                    ArcPhase::Partial => {
                        let tb = geo.t_beta.unwrap();
                        for (k, &a) in above.iter().enumerate() {
                            let t = -PI + 2.0 * PI * (k as f64 + 0.5) / samples as f64;
                            if (t.abs() - tb).abs() > 1e-3 {
                                assert_eq!(a, t.abs() < tb, "g={g} d={d} beta={beta} t={t}");
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn arc_shrinks_as_beta_grows() {
    let mut last = PI + 1.0;
    for k in 0..200 {
        let beta = 0.4 + 0.006 * k as f64;
        let t = arc_geometry(beta, 0.3, 0.2).t_beta.unwrap();
        assert!(t <= last + 1e-15);
        last = t;
    }
}

#[test]
fn occupation_counts_roots_inside() {
    assert_eq!(occupation_from_beta(0.9, 0.2, 0.2, 4, 0), Some(1));
    assert_eq!(occupation_from_beta(0.9, 0.2, 0.2, 4, 1), Some(2));
    assert_eq!(occupation_from_beta(2.0, 0.2, 0.2, 6, 1), Some(6));
    assert_eq!(occupation_from_beta(0.1, 0.2, 0.2, 6, 1), Some(0));
    // |1 + 0.5 cos t| = 1 exactly at t = π/2, a fourth root of unity
    assert_eq!(occupation_from_beta(1.0, 0.25, 0.25, 4, 0), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sector_sign_table(
        m1 in 1usize..40,
        m2 in 3usize..40,
        si in 0usize..4,
        gamma in 0.0f64..1.0,
        ratio in 0.0f64..1.0,
        band in 0usize..3,
        u in 0.02f64..0.98,
    ) {
        let delta = if gamma > 0.25 { ratio / (4.0 * gamma) } else { ratio };
        prop_assume!(4.0 * gamma * delta <= 1.0);
        let (lo, hi) = (1.0 - gamma - delta, 1.0 + gamma + delta);
        let beta = match band {
            0 => {
                prop_assume!(lo > 0.05);
                u * lo
            }
            1 => lo.max(0.0) + u * (hi - lo.max(0.0)),
            _ => hi * (1.0 + u),
        };
        let shape = TorusShape::new(m1, m2).unwrap();
        let sector = ThetaSector::ALL[si];
        let params = Params::new(1.0, beta, gamma, delta);
        prop_assume!(!is_singular(sector, shape, &params));
        let predicted = predicted_sector_sign(sector, shape, beta, gamma, delta);
        prop_assume!(predicted.is_some());
        let d = det_k_log(sector, shape, &params);
        let v = d.phase * c_coeff(sector, shape);
        prop_assert!(v.im.abs() < 1e-8, "non-real {v}");
        prop_assert_eq!(v.re.signum(), predicted.unwrap());
    }
}
