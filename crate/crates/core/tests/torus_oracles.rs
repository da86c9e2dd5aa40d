mod common;

use common::*;
use fibsnake::events::{Event, EventQuery, RWord};
use fibsnake::kasteleyn::*;
use fibsnake::lattice::{brute_force_partition, Params, Site, Step};
use num_complex::Complex64;

const SHAPES: [(usize, usize); 9] = [
    (1, 1),
    (1, 3),
    (2, 1),
    (2, 2),
    (2, 3),
    (3, 2),
    (3, 3),
    (2, 4),
    (1, 4),
];

fn param_grid() -> Vec<Params> {
    vec![
        Params::new(1.0, 0.5, 0.2, 0.2),
        Params::new(1.0, 0.7, 0.5, 0.5),
        Params::new(1.3, 1.2, 0.3, 0.1),
        Params::new(0.8, 0.0, 0.3, 0.5),
    ]
}

#[test]
fn partition_matches_enumeration() {
    for (m1, m2) in SHAPES {
        for p in param_grid() {
            let s = shape(m1, m2);
            let z = partition_function(s, &p).unwrap();
            let bf = brute_force_partition(s, &p).unwrap();
            assert!(
                (z - bf).abs() <= 1e-9 * bf.abs().max(1.0),
                "{m1}x{m2} {p:?}: {z} vs {bf}"
            );
        }
    }
}

#[test]
fn partition_of_unit_one_by_one() {
    let s = shape(1, 1);
    let p = Params::new(1.0, 1.0, 1.0, 1.0);
    assert!((partition_function(s, &p).unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn dense_determinant_agrees_with_product() {
    for (m1, m2) in [(2, 2), (2, 3), (3, 3), (3, 4), (4, 4), (1, 3)] {
        let s = shape(m1, m2);
        let p = Params::new(1.0, 0.6, 0.35, 0.25);
        for t in ThetaSector::ALL {
            let a = det_k(t, s, &p);
            let b = det_k_dense(t, s, &p);
            assert!(
                (a - b).norm() <= 1e-9 * a.norm().max(1e-300),
                "{m1}x{m2} {t:?}"
            );
        }
    }
}

#[test]
fn kernel_inverts_operator() {
    for (m1, m2) in [(2, 2), (2, 3), (3, 3), (3, 4), (4, 4), (1, 2), (4, 1)] {
        let s = shape(m1, m2);
        let p = Params::new(1.0, 0.6, 0.35, 0.25);
        for t in ThetaSector::ALL {
            let table = KernelTable::new(t, s, &p).unwrap();
            for x in s.sites() {
                for x2 in s.sites() {
                    let v: Complex64 = s
                        .sites()
                        .map(|y| k_entry(t, s, &p, x, y) * table.k_inverse(y, x2))
                        .sum();
                    let e = if x == x2 { 1.0 } else { 0.0 };
                    assert!((v - Complex64::new(e, 0.0)).norm() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn kernel_joint_periodicity() {
    let s = shape(3, 4);
    let p = Params::new(1.0, 0.6, 0.35, 0.25);
    for t in ThetaSector::ALL {
        let table = KernelTable::new(t, s, &p).unwrap();
        let a = table.h((0, 1), (2, 3));
        let b = table.h((3, 1), (5, 3));
        let c = table.h((0, 5), (2, 7));
        assert!((a - b).norm() < 1e-14 && (a - c).norm() < 1e-14);
    }
}

#[test]
fn eigenfunctions() {
    use std::f64::consts::PI;
    for (m1, m2) in [(2, 3), (3, 3), (4, 4), (3, 4)] {
        let s = shape(m1, m2);
        let p = Params::new(1.0, 0.6, 0.35, 0.25);
        let n = (m1 * m2) as f64;
        for t in ThetaSector::ALL {
            for a in 0..m1 {
                for b in 0..m2 {
                    let z = Complex64::from_polar(1.0, 2.0 * PI * a as f64 / m1 as f64);
                    let w = Complex64::from_polar(1.0, 2.0 * PI * b as f64 / m2 as f64);
                    let zt = z * Complex64::from_polar(1.0, PI * t.theta1 as f64 / m1 as f64);
                    let wt = w * Complex64::from_polar(1.0, PI * t.theta2 as f64 / m2 as f64);
                    let lam = p.alpha + p.beta * zt + p.gamma * wt + p.delta * wt.conj();
                    let phi = |x: Site| z.powi(x.x1 as i32) * w.powi(x.x2 as i32) / n.sqrt();
                    for x in s.sites() {
                        let kphi: Complex64 =
                            s.sites().map(|y| k_entry(t, s, &p, x, y) * phi(y)).sum();
                        assert!((kphi - lam * phi(x)).norm() < 1e-10);
                    }
                    let norm: f64 = s.sites().map(|x| phi(x).norm_sqr()).sum();
                    assert!((norm - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn jacobi_oracle_for_signed_correlation() {
    let p = Params::new(1.0, 0.55, 0.3, 0.2);
    for (m1, m2) in [(2, 3), (3, 3), (1, 3), (2, 2)] {
        let s = shape(m1, m2);
        let evs = all_events(s);
        let mut words: Vec<Vec<Event>> = vec![vec![]];
        for (i, a) in evs.iter().enumerate() {
            words.push(vec![*a]);
            for b in evs.iter().skip(i + 1).step_by(3) {
                if (a.x1, a.x2) != (b.x1, b.x2) {
                    words.push(vec![*a, *b]);
                }
            }
        }
        for t in ThetaSector::ALL {
            let table = KernelTable::new(t, s, &p).unwrap();
            let det = det_k(t, s, &p);
            for w in &words {
                let word = RWord {
                    coefficient: 1,
                    factors: w.clone(),
                };
                let kernel = signed_correlation(&table, &word);
                let direct = brute_signed_sum(t, s, &p, w) / det;
                assert!(
                    (kernel - direct).norm() < 1e-10,
                    "{m1}x{m2} {t:?} {w:?}: {kernel} vs {direct}"
                );
                let dense = constrained_det(t, s, &p, &word) / det;
                assert!((dense - direct).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn word_expectation_matches_generalised_enumeration() {
    let p = Params::new(1.0, 0.5, 0.2, 0.2);
    for (m1, m2) in [(3, 3), (2, 4), (1, 3), (3, 1)] {
        let s = shape(m1, m2);
        for e in all_events(s) {
            let word = RWord {
                coefficient: 1,
                factors: vec![e],
            };
            let a = word_expectation(s, &p, &word).unwrap();
            let b = brute_word_expectation(s, &p, &[e]);
            assert!((a - b).abs() < 1e-10, "{m1}x{m2} {e:?}: {a} vs {b}");
        }
    }
}

#[test]
fn single_event_probabilities() {
    for p in [
        Params::new(1.0, 0.5, 0.2, 0.2),
        Params::new(1.0, 0.7, 0.5, 0.5),
    ] {
        for (m1, m2) in [(3, 3), (2, 4), (2, 3), (2, 2), (1, 3), (3, 1), (1, 1)] {
            let s = shape(m1, m2);
            for x in s.sites() {
                let mut total = 0.0;
                for &st in steps_of(s) {
                    let e = Event::new(x.x1 as i64, x.x2 as i64, st);
                    let v = correlation(s, &p, &EventQuery::new(vec![e])).unwrap();
                    let b = brute_pure_probability(s, &p, &[e]);
                    assert!((v - b).abs() < 1e-10, "{m1}x{m2} {e:?} {p:?}: {v} vs {b}");
                    total += v;
                }
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn pair_events_match_enumeration() {
    let p = Params::new(1.0, 0.5, 0.2, 0.2);
    for (m1, m2) in [(3, 3), (2, 4), (2, 3)] {
        let s = shape(m1, m2);
        let evs = all_events(s);
        for (i, a) in evs.iter().enumerate() {
            for b in evs.iter().skip(i + 1).step_by(5) {
                if (a.x1, a.x2) == (b.x1, b.x2) {
                    continue;
                }
                let v = correlation(s, &p, &EventQuery::new(vec![*a, *b])).unwrap();
                let bf = brute_pure_probability(s, &p, &[*a, *b]);
                assert!((v - bf).abs() < 1e-10, "{m1}x{m2} {a:?} {b:?}: {v} vs {bf}");
            }
        }
    }
}

#[test]
fn right_events_through_g() {
    let s = shape(3, 3);
    let p = Params::new(1.0, 0.5, 0.2, 0.2);
    let sites = [Site::new(0, 0), Site::new(1, 2)];
    let g = right_events_via_g(s, &p, &sites).unwrap();
    let q = EventQuery::new(
        sites
            .iter()
            .map(|x| Event::new(x.x1 as i64, x.x2 as i64, Step::Right))
            .collect(),
    );
    assert!((g - correlation(s, &p, &q).unwrap()).abs() < 1e-12);
}

#[test]
fn sector_measures() {
    use fibsnake::lattice::{coarse_weight, cycle_data, enumerate_configs};
    let p = Params::new(1.0, 0.5, 0.2, 0.2);
    for (m1, m2) in [(2, 3), (3, 3), (2, 4)] {
        let s = shape(m1, m2);
        let z = partition_function(s, &p).unwrap();
        let z0 = sector_partition(0, s, &p).unwrap();
        let z1 = sector_partition(1, s, &p).unwrap();
        assert!((z0 + z1 - z).abs() < 1e-12 * z);
        for theta2 in 0..2u8 {
            let zt = if theta2 == 0 { z0 } else { z1 };
            let mut class_z = 0.0;
            for c in enumerate_configs(s, true).unwrap() {
                if (cycle_data(&c).occupation + theta2 as usize + m2 + 1).is_multiple_of(2) {
                    class_z += coarse_weight(&c, &p).unwrap();
                }
            }
            assert!(
                (class_z - zt).abs() < 1e-10,
                "{m1}x{m2} θ2={theta2}: {class_z} vs {zt}"
            );
            let e = Event::new(0, 0, Step::Right);
            let v = sector_measure(theta2, s, &p, &EventQuery::new(vec![e])).unwrap();
            let mut hit = 0.0;
            for c in enumerate_configs(s, true).unwrap() {
                if (cycle_data(&c).occupation + theta2 as usize + m2 + 1).is_multiple_of(2)
                    && holds(&c, &[e])
                {
                    hit += coarse_weight(&c, &p).unwrap();
                }
            }
            assert!((v - hit / class_z).abs() < 1e-10);
        }
    }
}

#[test]
fn singular_sector_falls_back_to_dense() {
    // α + βz + γw + δ/w vanishes at z = -1, w = 1 when β = α + γ + δ
    let s = shape(1, 3);
    let p = Params::new(1.0, 1.6, 0.3, 0.3);
    assert!(is_singular(ThetaSector::new(1, 0), s, &p));
    let e = Event::new(0, 1, Step::Right);
    let v = correlation(s, &p, &EventQuery::new(vec![e])).unwrap();
    let b = brute_pure_probability(s, &p, &[e]);
    assert!((v - b).abs() < 1e-10, "{v} vs {b}");
}

#[test]
fn sign_representation() {
    use fibsnake::lattice::enumerate_configs;
    for m1 in 1..=4usize {
        for m2 in 1..=4usize {
            let s = shape(m1, m2);
            for c in enumerate_configs(s, false).unwrap() {
                let lhs = sector_sign_sum(s, c.counts());
                let n = if c.snakelet_count() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                let rhs = n * perm_sign(&c);
                assert_eq!(c.permutation_sign() as f64, perm_sign(&c));
                assert!(
                    (lhs - Complex64::new(rhs, 0.0)).norm() < 1e-12,
                    "{m1}x{m2}\n{}: {lhs} vs {rhs}",
                    c.to_grid()
                );
            }
        }
    }
}
