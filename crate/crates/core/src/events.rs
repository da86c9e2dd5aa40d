//! Step events and their expansion into products of labelled-step indicators.
//!
//! A pure event `{σx = x + f}` is a statement about the shape of a
//! generalised configuration. It is rewritten as a signed sum of words in
//! the indicators `R_x^f` of the generalised configuration, whose
//! expectations are determinants.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Step;

/// Which coordinates wrap, and with what period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Periods {
    pub horizontal: Option<i64>,
    pub vertical: Option<i64>,
}

impl Periods {
    pub fn torus(m1: usize, m2: usize) -> Self {
        Self {
            horizontal: Some(m1 as i64),
            vertical: Some(m2 as i64),
        }
    }

    pub fn cylinder(n: usize) -> Self {
        Self {
            horizontal: None,
            vertical: Some(n as i64),
        }
    }

    pub fn plane() -> Self {
        Self {
            horizontal: None,
            vertical: None,
        }
    }

    pub fn canonical(&self, x1: i64, x2: i64) -> (i64, i64) {
        let r = |v: i64, p: Option<i64>| p.map_or(v, |p| v.rem_euclid(p));
        (r(x1, self.horizontal), r(x2, self.vertical))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub x1: i64,
    pub x2: i64,
    pub step: Step,
}

impl Event {
    pub fn new(x1: i64, x2: i64, step: Step) -> Self {
        Self { x1, x2, step }
    }

    /// The lattice point `x + f`, not reduced.
    pub fn target(&self) -> (i64, i64) {
        let (d1, d2) = self.step.displacement();
        (self.x1 + d1, self.x2 + d2)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventQuery {
    pub events: Vec<Event>,
}

impl EventQuery {
    pub fn new(events: Vec<Event>) -> Self {
        Self { events }
    }

    pub fn check_distinct(&self, periods: Periods) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for e in &self.events {
            if !seen.insert(periods.canonical(e.x1, e.x2)) {
                return Err(Error::DuplicateSites);
            }
        }
        Ok(())
    }
}

/// `coefficient · ∏ R_{x}^{f}` with pairwise distinct canonical sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RWord {
    pub coefficient: i64,
    pub factors: Vec<Event>,
}

fn t_expansion(e: Event) -> Vec<(i64, Vec<Event>)> {
    let at = |dx2: i64, step| Event::new(e.x1, e.x2 + dx2, step);
    match e.step {
        Step::Right => vec![(1, vec![e])],
        Step::Fixed => vec![
            (1, vec![e]),
            (1, vec![at(0, Step::Up), at(1, Step::Down)]),
            (1, vec![at(0, Step::Down), at(-1, Step::Up)]),
        ],
        Step::Up => vec![(1, vec![e]), (-1, vec![e, at(1, Step::Down)])],
        Step::Down => vec![(1, vec![e]), (-1, vec![e, at(-1, Step::Up)])],
    }
}

/// Multiply a word by further factors, returning `None` when two different
/// steps land on one site.
fn extend(
    word: &BTreeMap<(i64, i64), Step>,
    extra: &[Event],
    periods: Periods,
) -> Option<BTreeMap<(i64, i64), Step>> {
    let mut w = word.clone();
    for f in extra {
        let key = periods.canonical(f.x1, f.x2);
        match w.get(&key) {
            Some(&s) if s != f.step => return None,
            Some(_) => {}
            None => {
                w.insert(key, f.step);
            }
        }
    }
    Some(w)
}

/// Expand `∏ T_{x^i}^{f^i}` into simplified, merged words.
///
/// Words are returned sorted by their factor lists; factors within a word
/// keep canonical coordinates and are sorted by site.
pub fn expand_events(query: &EventQuery, periods: Periods) -> Result<Vec<RWord>> {
    query.check_distinct(periods)?;
    let mut words: BTreeMap<Vec<Event>, i64> = BTreeMap::new();
    words.insert(Vec::new(), 1);
    for &e in &query.events {
        let e = {
            let (a, b) = periods.canonical(e.x1, e.x2);
            Event::new(a, b, e.step)
        };
        let mut next: BTreeMap<Vec<Event>, i64> = BTreeMap::new();
        for (factors, coef) in &words {
            let base: BTreeMap<(i64, i64), Step> =
                factors.iter().map(|f| ((f.x1, f.x2), f.step)).collect();
            for (c, extra) in t_expansion(e) {
                if let Some(w) = extend(&base, &extra, periods) {
                    let key: Vec<Event> = w
                        .into_iter()
                        .map(|((a, b), s)| Event::new(a, b, s))
                        .collect();
                    *next.entry(key).or_insert(0) += coef * c;
                }
            }
        }
        next.retain(|_, c| *c != 0);
        words = next;
    }
    Ok(words
        .into_iter()
        .map(|(factors, coefficient)| RWord {
            coefficient,
            factors,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_right() {
        let q = EventQuery::new(vec![Event::new(0, 0, Step::Right)]);
        let w = expand_events(&q, Periods::torus(3, 3)).unwrap();
        assert_eq!(
            w,
            vec![RWord {
                coefficient: 1,
                factors: vec![Event::new(0, 0, Step::Right)]
            }]
        );
    }

    #[test]
    fn single_up() {
        let q = EventQuery::new(vec![Event::new(1, 2, Step::Up)]);
        let w = expand_events(&q, Periods::torus(3, 3)).unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.contains(&RWord {
            coefficient: 1,
            factors: vec![Event::new(1, 2, Step::Up)]
        }));
        assert!(w.contains(&RWord {
            coefficient: -1,
            factors: vec![Event::new(1, 0, Step::Down), Event::new(1, 2, Step::Up)]
        }));
    }

    #[test]
    fn up_then_down_collapses() {
        // a pure shape never holds Up at x and Down at x + e2
        let q = EventQuery::new(vec![
            Event::new(0, 0, Step::Up),
            Event::new(0, 1, Step::Down),
        ]);
        let w = expand_events(&q, Periods::torus(2, 4)).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn duplicate_sites_rejected() {
        let q = EventQuery::new(vec![
            Event::new(0, 0, Step::Up),
            Event::new(0, 3, Step::Right),
        ]);
        assert_eq!(
            expand_events(&q, Periods::torus(2, 3)),
            Err(Error::DuplicateSites)
        );
    }
}
