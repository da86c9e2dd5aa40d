use fibsnake::ring::*;
use fibsnake::simulate::*;

fn cfg(n: usize, p: &[usize]) -> WalkerConfig {
    WalkerConfig::new(n, p.to_vec()).unwrap()
}

fn rates() -> RateParams {
    RateParams::new(1.0, 0.3).unwrap()
}

fn fixed(dynamics: Dynamics, x: WalkerConfig, horizon: f64) -> SimSpec {
    SimSpec {
        dynamics,
        start: StartLaw::Fixed(x),
        rates: rates(),
        horizon,
    }
}

#[test]
fn same_seed_same_path() {
    let x = cfg(6, &[0, 2, 3]);
    for d in [Dynamics::Free, Dynamics::Conditioned, Dynamics::Asep] {
        let a = simulate_with(d, &x, rates(), 5.0, &mut replica_rng(9, 3));
        let b = simulate_with(d, &x, rates(), 5.0, &mut replica_rng(9, 3));
        assert_eq!(a, b);
        let c = simulate_with(d, &x, rates(), 5.0, &mut replica_rng(9, 4));
        assert_ne!(a, c);
    }
}

#[test]
fn estimates_do_not_depend_on_threads() {
    let spec = fixed(Dynamics::Conditioned, cfg(5, &[0, 1]), 1.0);
    let f = |p: &PathRecord| p.jumps.len() as f64;
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = one.install(|| estimate(f, &spec, 20_000, 5).unwrap());
    let b = four.install(|| estimate(f, &spec, 20_000, 5).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
}

#[test]
fn constant_functional_has_zero_stderr() {
    let spec = fixed(Dynamics::Asep, cfg(4, &[1]), 1.0);
    let r = estimate(|_| 2.5, &spec, 100, 1).unwrap();
    assert_eq!(r.estimate, 2.5);
    assert_eq!(r.stderr, 0.0);
    assert!(estimate(|_| 1.0, &spec, 1, 1).is_err());
}

#[test]
fn no_rates_no_jumps() {
    let r = RateParams::new(0.0, 0.0).unwrap();
    let p = simulate_free(&cfg(5, &[0, 1, 2]), r, 3.0, 0);
    assert!(p.jumps.is_empty());
    assert_eq!(p.tau, None);
}

#[test]
fn free_jump_counts_are_poisson() {
    let r = RateParams::new(1.0, 0.5).unwrap();
    let spec = SimSpec {
        dynamics: Dynamics::Free,
        start: StartLaw::Fixed(cfg(7, &[0, 3])),
        rates: r,
        horizon: 1.0,
    };
    let reps = estimate_many(
        |p| {
            (0..2)
                .map(|i| p.jumps.iter().filter(|j| j.particle == i).count() as f64)
                .collect()
        },
        2,
        &spec,
        100_000,
        11,
    )
    .unwrap();
    for rep in reps {
        assert!(rep.z_score(1.5) < 3.0, "{rep:?}");
    }
}

#[test]
fn paths_are_valid_and_windings_add_up() {
    let x = cfg(5, &[0, 1, 3]);
    for d in [Dynamics::Free, Dynamics::Conditioned, Dynamics::Asep] {
        for seed in 0..50 {
            let p = simulate_with(d, &x, rates(), 10.0, &mut replica_rng(seed, 0));
            assert!(p.jumps.windows(2).all(|w| w[0].time < w[1].time));
            assert_eq!(p.winding.iter().sum::<i64>(), p.net_crossings());
            if d == Dynamics::Free {
                if let Some(tau) = p.tau {
                    assert!(p.config_at(tau).is_none());
                    let before = p
                        .jumps
                        .iter()
                        .filter(|j| j.time < tau)
                        .map(|j| j.time)
                        .fold(0.0, f64::max);
                    assert!(p.config_at(before).is_some());
                }
                continue;
            }
            assert_eq!(p.tau, None);
            for j in &p.jumps {
                assert!(p.config_at(j.time).is_some(), "{d:?} collided");
            }
        }
    }
}

#[test]
fn one_walker_ignores_the_dynamics() {
    let x = cfg(6, &[4]);
    for seed in 0..20 {
        let f = simulate_with(Dynamics::Free, &x, rates(), 8.0, &mut replica_rng(seed, 1));
        for d in [Dynamics::Conditioned, Dynamics::Asep] {
            let g = simulate_with(d, &x, rates(), 8.0, &mut replica_rng(seed, 1));
            assert_eq!(f.jumps, g.jumps);
        }
    }
}

#[test]
fn full_ring_exclusion_is_frozen() {
    let p = simulate_asep(&cfg(4, &[0, 1, 2, 3]), rates(), 100.0, 3);
    assert!(p.jumps.is_empty());
}

/// Kolmogorov–Smirnov statistic of `xs` against `Exp(rate)`.
fn ks_exponential(mut xs: Vec<f64>, rate: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn holding_times_are_exponential() {
    let x = cfg(6, &[0, 1, 4]);
    for d in [Dynamics::Free, Dynamics::Conditioned, Dynamics::Asep] {
        let total: f64 = match d {
            Dynamics::Free => 3.0 * rates().total(),
            Dynamics::Conditioned => (0..3)
                .flat_map(|j| [true, false].map(|up| conditioned_rate(&x, j, up, rates())))
                .sum(),
            Dynamics::Asep => {
                let mut s = 0.0;
                for j in 0..3 {
                    if x.moved(j, true).is_some() {
                        s += rates().t;
                    }
                    if x.moved(j, false).is_some() {
                        s += rates().tp;
                    }
                }
                s
            }
        };
        let waits: Vec<f64> = (0..10_000)
            .map(|i| {
                let p = simulate_with(d, &x, rates(), 30.0 / total, &mut replica_rng(2024, i));
                p.jumps[0].time
            })
            .collect();
        let dn = ks_exponential(waits, total);
        // p = 0.01 critical value
        assert!(dn < 1.628 / 100.0, "{d:?}: D = {dn}");
    }
}

#[test]
fn first_jump_frequencies_match_rates() {
    let x = cfg(5, &[0, 2]);
    let r = rates();
    let mut targets = Vec::new();
    for j in 0..2 {
        for up in [true, false] {
            if let Some(y) = x.moved(j, up) {
                targets.push((y, conditioned_rate(&x, j, up, r)));
            }
        }
    }
    let total: f64 = targets.iter().map(|t| t.1).sum();
    let spec = fixed(Dynamics::Conditioned, x.clone(), 50.0);
    let tv = targets.clone();
    let reps = estimate_many(
        move |p| {
            let first = p.config_at(p.jumps[0].time).unwrap();
            tv.iter()
                .map(|(y, _)| if *y == first { 1.0 } else { 0.0 })
                .collect()
        },
        targets.len(),
        &spec,
        100_000,
        8,
    )
    .unwrap();
    for (rep, (_, rate)) in reps.iter().zip(&targets) {
        assert!(
            rep.z_score(rate / total) < 3.0,
            "{rep:?} vs {}",
            rate / total
        );
    }
}

#[test]
fn conditioned_walkers_preserve_the_stationary_law() {
    let (n, ell) = (5, 2);
    let states = all_states(n, ell).unwrap();
    let spec = SimSpec {
        dynamics: Dynamics::Conditioned,
        start: StartLaw::Stationary { n, ell },
        rates: rates(),
        horizon: 1.0,
    };
    let sv = states.clone();
    let reps = estimate_many(
        move |p| {
            let y = p.final_config().unwrap();
            sv.iter().map(|s| if *s == y { 1.0 } else { 0.0 }).collect()
        },
        states.len(),
        &spec,
        200_000,
        21,
    )
    .unwrap();
    for (rep, s) in reps.iter().zip(&states) {
        assert!(rep.z_score(stationary_prob(s)) < 3.0, "{s}: {rep:?}");
    }
}

#[test]
fn long_run_occupation() {
    let (n, ell) = (5, 2);
    let states = all_states(n, ell).unwrap();
    let horizon = 200.0;
    let burn = 20.0;
    let spec = fixed(Dynamics::Conditioned, cfg(n, &[0, 1]), horizon);
    let sv = states.clone();
    let reps = estimate_many(
        move |p| {
            let mut occ = vec![0.0; sv.len() + 1];
            let mut t0 = 0.0;
            p.for_each_segment(horizon, |pos, dt| {
                let (a, b) = (t0, t0 + dt);
                t0 = b;
                let w = (b.min(horizon) - a.max(burn)).max(0.0);
                if w == 0.0 {
                    return;
                }
                let c = WalkerConfig::new(n, pos.to_vec()).unwrap();
                let k = sv.iter().position(|s| *s == c).unwrap();
                occ[k] += w / (horizon - burn);
                if c.contains(0) {
                    occ[sv.len()] += w / (horizon - burn);
                }
            });
            occ
        },
        states.len() + 1,
        &spec,
        2_000,
        4,
    )
    .unwrap();
    for (rep, s) in reps.iter().zip(&states) {
        assert!(rep.z_score(stationary_prob(s)) < 3.0, "{s}: {rep:?}");
    }
    assert!(reps[states.len()].z_score(ell as f64 / n as f64) < 3.0);
}

#[test]
fn exclusion_stationary_law_is_uniform() {
    let (n, ell) = (5, 2);
    let states = all_states(n, ell).unwrap();
    let spec = SimSpec {
        dynamics: Dynamics::Asep,
        start: StartLaw::Uniform { n, ell },
        rates: rates(),
        horizon: 2.0,
    };
    let sv = states.clone();
    let reps = estimate_many(
        move |p| {
            let y = p.final_config().unwrap();
            sv.iter().map(|s| if *s == y { 1.0 } else { 0.0 }).collect()
        },
        states.len(),
        &spec,
        100_000,
        17,
    )
    .unwrap();
    for rep in &reps {
        assert!(rep.z_score(1.0 / states.len() as f64) < 3.0, "{rep:?}");
    }
}

#[test]
fn free_walkers_match_noncollision_determinant() {
    let (n, ell, t) = (5, 2, 0.5);
    let r = rates();
    let x = cfg(n, &[0, 2]);
    let states = all_states(n, ell).unwrap();
    let spec = SimSpec {
        dynamics: Dynamics::Free,
        start: StartLaw::Fixed(x.clone()),
        rates: r,
        horizon: t,
    };
    let sv = states.clone();
    let reps = estimate_many(
        move |p| {
            let y = if p.tau.is_some() {
                None
            } else {
                p.final_config()
            };
            sv.iter()
                .map(|s| if Some(s) == y.as_ref() { 1.0 } else { 0.0 })
                .collect()
        },
        states.len(),
        &spec,
        200_000,
        99,
    )
    .unwrap();
    for (rep, y) in reps.iter().zip(&states) {
        let exact = noncollision_det(&x, y, r, t).unwrap();
        assert!(rep.z_score(exact) < 3.0, "{y}: {rep:?} vs {exact}");
    }
}

#[test]
fn exclusion_martingale_has_unit_mean() {
    let x = cfg(5, &[0, 1]);
    let r = rates();
    let spec = SimSpec {
        dynamics: Dynamics::Asep,
        start: StartLaw::Fixed(x.clone()),
        rates: r,
        horizon: 1.0,
    };
    let reps = estimate_many(
        |p| {
            vec![
                unit_mean_martingale_at(p, r, 0.4).unwrap(),
                unit_mean_martingale_at(p, r, 1.0).unwrap(),
            ]
        },
        2,
        &spec,
        100_000,
        3,
    )
    .unwrap();
    for rep in reps {
        assert!(rep.z_score(1.0) < 3.0, "{rep:?}");
    }
    let p = simulate_asep(&x, r, 1.0, 5);
    assert_eq!(unit_mean_martingale_at(&p, r, 0.0).unwrap(), 1.0);
    let m = traffic_martingale(&p, r).unwrap();
    assert!((m * unit_mean_martingale_at(&p, r, 1.0).unwrap() - 1.0).abs() < 1e-12);
    let free = simulate_free(&x, r, 1.0, 5);
    assert!(traffic_martingale(&free, r).is_err());
}

#[test]
fn reweighted_exclusion_gives_conditioned_transitions() {
    let (n, ell, t) = (5, 2, 1.0);
    let r = rates();
    let x = cfg(n, &[0, 1]);
    let states = all_states(n, ell).unwrap();
    let spec = SimSpec {
        dynamics: Dynamics::Asep,
        start: StartLaw::Fixed(x.clone()),
        rates: r,
        horizon: t,
    };
    let sv = states.clone();
    let reps = estimate_many(
        move |p| {
            let m = unit_mean_martingale_at(p, r, t).unwrap();
            let y = p.final_config().unwrap();
            sv.iter().map(|s| if *s == y { m } else { 0.0 }).collect()
        },
        states.len(),
        &spec,
        200_000,
        12,
    )
    .unwrap();
    for (rep, y) in reps.iter().zip(&states) {
        let exact = conditioned_transition(&x, y, r, t).unwrap();
        assert!(rep.z_score(exact) < 3.0, "{y}: {rep:?} vs {exact}");
    }
}
