#![allow(dead_code)]

use fibsnake::events::Event;
use fibsnake::kasteleyn::{step_twist, ThetaSector};
use fibsnake::lattice::{
    coarse_weight, enumerate_configs, weight, Params, Site, SnakeConfig, Step, TorusShape,
};
use num_complex::Complex64;

pub fn shape(m1: usize, m2: usize) -> TorusShape {
    TorusShape::new(m1, m2).unwrap()
}

/// Sign of the permutation `x ↦ x + step(x)`.
pub fn perm_sign(c: &SnakeConfig) -> f64 {
    let s = c.shape();
    let n = s.n_sites();
    let mut seen = vec![false; n];
    let mut sign = 1.0;
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let mut len = 0;
        let mut cur = s.site(i);
        while !seen[s.index(cur)] {
            seen[s.index(cur)] = true;
            len += 1;
            cur = c.image(cur);
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

pub fn holds(c: &SnakeConfig, events: &[Event]) -> bool {
    events
        .iter()
        .all(|e| c.step(Site::new(e.x1 as usize, e.x2 as usize)) == e.step)
}

/// Exhaustive probability of pure events under `P_m`.
pub fn brute_pure_probability(s: TorusShape, p: &Params, events: &[Event]) -> f64 {
    let mut z = 0.0;
    let mut hit = 0.0;
    for c in enumerate_configs(s, true).unwrap() {
        let w = coarse_weight(&c, p).unwrap();
        z += w;
        if holds(&c, events) {
            hit += w;
        }
    }
    hit / z
}

/// Exhaustive expectation of labelled-step indicators under the signed
/// generalised measure.
pub fn brute_word_expectation(s: TorusShape, p: &Params, events: &[Event]) -> f64 {
    let p = p.effective(s);
    let mut z = 0.0;
    let mut hit = 0.0;
    for c in enumerate_configs(s, false).unwrap() {
        let w = weight(&c, &p);
        z += w;
        if holds(&c, events) {
            hit += w;
        }
    }
    hit / z
}

/// `Σ_{σ̄ ⊇ events} sgn(σ̄) ∏ K_θ(x, σ̄x)` by enumeration.
pub fn brute_signed_sum(
    sector: ThetaSector,
    s: TorusShape,
    p: &Params,
    events: &[Event],
) -> Complex64 {
    let p = p.effective(s);
    let mut total = Complex64::new(0.0, 0.0);
    for c in enumerate_configs(s, false).unwrap() {
        if !holds(&c, events) {
            continue;
        }
        let mut prod = Complex64::new(perm_sign(&c), 0.0);
        for x in s.sites() {
            let st = c.step(x);
            prod *= step_twist(sector, s, st) * p.step_weight(st);
        }
        total += prod;
    }
    total
}

pub fn all_events(s: TorusShape) -> Vec<Event> {
    let mut v = Vec::new();
    for x in s.sites() {
        for &st in s.allowed_steps() {
            v.push(Event::new(x.x1 as i64, x.x2 as i64, st));
        }
    }
    v
}

pub fn steps_of(s: TorusShape) -> &'static [Step] {
    s.allowed_steps()
}
