//! Exact (Gillespie) simulation of walkers on the ring, with reproducible
//! per-replica random streams and Monte Carlo estimators.
//!
//! Replica `i` of a run with master seed `s` draws from the ChaCha20 stream
//! number `i` keyed by `s`, so results do not depend on how replicas are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::mu;
use crate::ring::{
    all_states, conditioned_rate, stationary_prob, traffic, vandermonde_delta, RateParams,
    WalkerConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    /// Independent walkers; collisions allowed and recorded.
    Free,
    /// Walkers conditioned never to collide (Doob transform by `Δ`).
    Conditioned,
    /// Simple exclusion: jumps onto occupied sites are suppressed.
    Asep,
}

impl std::str::FromStr for Dynamics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Dynamics::Free),
            "conditioned" => Ok(Dynamics::Conditioned),
            "asep" => Ok(Dynamics::Asep),
            _ => Err(Error::Parse(format!("unknown dynamics '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub particle: usize,
    /// `+1` or `-1`.
    pub dir: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub dynamics: Dynamics,
    pub initial: WalkerConfig,
    pub jumps: Vec<Jump>,
    pub horizon: f64,
    /// Per particle: jumps `n-1 → 0` minus jumps `0 → n-1`.
    pub winding: Vec<i64>,
    /// First time two walkers share a site.
    pub tau: Option<f64>,
}

impl PathRecord {
    fn n(&self) -> usize {
        self.initial.n()
    }

    /// Labelled positions just after all jumps at times `<= t`.
    pub fn positions_at(&self, t: f64) -> Vec<usize> {
        let n = self.n();
        let mut p = self.initial.positions().to_vec();
        for j in self.jumps.iter().take_while(|j| j.time <= t) {
            p[j.particle] = step(p[j.particle], j.dir, n);
        }
        p
    }

    /// The occupied set at time `t`, or `None` if two walkers coincide.
    pub fn config_at(&self, t: f64) -> Option<WalkerConfig> {
        WalkerConfig::new(self.n(), self.positions_at(t)).ok()
    }

    pub fn final_config(&self) -> Option<WalkerConfig> {
        self.config_at(self.horizon)
    }

    /// Net crossings of the `n-1 ↔ 0` edge recomputed from the jump list.
    pub fn net_crossings(&self) -> i64 {
        let n = self.n();
        let mut p = self.initial.positions().to_vec();
        let mut w = 0;
        for j in &self.jumps {
            let from = p[j.particle];
            if j.dir > 0 && from == n - 1 {
                w += 1;
            } else if j.dir < 0 && from == 0 {
                w -= 1;
            }
            p[j.particle] = step(from, j.dir, n);
        }
        w
    }

    /// Calls `f(positions, duration)` for each constant stretch in `[0, t]`.
    pub fn for_each_segment(&self, t: f64, mut f: impl FnMut(&[usize], f64)) {
        let n = self.n();
        let t = t.min(self.horizon);
        let mut p = self.initial.positions().to_vec();
        let mut last = 0.0;
        for j in self.jumps.iter().take_while(|j| j.time <= t) {
            f(&p, j.time - last);
            last = j.time;
            p[j.particle] = step(p[j.particle], j.dir, n);
        }
        f(&p, t - last);
    }
}

fn step(h: usize, dir: i8, n: usize) -> usize {
    if dir > 0 {
        (h + 1) % n
    } else {
        (h + n - 1) % n
    }
}

/// The random stream used by replica `replica` of a run seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(replica);
    r
}

fn exp_sample<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    // 1 - U lies in (0, 1]
    -(1.0 - rng.gen::<f64>()).ln() / rate
}

/// Simulate up to `horizon` with the given dynamics and random source.
pub fn simulate_with<R: Rng>(
    dynamics: Dynamics,
    x: &WalkerConfig,
    rates: RateParams,
    horizon: f64,
    rng: &mut R,
) -> PathRecord {
    let n = x.n();
    let ell = x.ell();
    let mut pos = x.positions().to_vec();
    let mut rec = PathRecord {
        dynamics,
        initial: x.clone(),
        jumps: Vec::new(),
        horizon,
        winding: vec![0; ell],
        tau: None,
    };
    let mut t = 0.0;
    // candidate moves (particle, dir, rate)
    let mut moves: Vec<(usize, i8, f64)> = Vec::with_capacity(2 * ell);
    loop {
        moves.clear();
        match dynamics {
            Dynamics::Free => {
                for j in 0..ell {
                    moves.push((j, 1, rates.t));
                    moves.push((j, -1, rates.tp));
                }
            }
            Dynamics::Asep => {
                for j in 0..ell {
                    for (dir, r) in [(1i8, rates.t), (-1, rates.tp)] {
                        let target = step(pos[j], dir, n);
                        if !pos.contains(&target) {
                            moves.push((j, dir, r));
                        }
                    }
                }
            }
            Dynamics::Conditioned => {
                let cfg =
                    WalkerConfig::new(n, pos.clone()).expect("conditioned walkers never collide");
                for j in 0..ell {
                    // index of this walker in the sorted configuration
                    let k = cfg.positions().binary_search(&pos[j]).unwrap();
                    for (dir, up) in [(1i8, true), (-1, false)] {
                        moves.push((j, dir, conditioned_rate(&cfg, k, up, rates)));
                    }
                }
            }
        }
        let total: f64 = moves.iter().map(|m| m.2).sum();
        if total <= 0.0 {
            break;
        }
        t += exp_sample(rng, total);
        if t > horizon {
            break;
        }
        let mut u = rng.gen::<f64>() * total;
        let mut chosen = moves.len() - 1;
        for (i, m) in moves.iter().enumerate() {
            if u < m.2 {
                chosen = i;
                break;
            }
            u -= m.2;
        }
        // guard against a zero-rate move selected by rounding
        while moves[chosen].2 == 0.0 {
            chosen -= 1;
        }
        let (j, dir, _) = moves[chosen];
        let from = pos[j];
        if dir > 0 && from == n - 1 {
            rec.winding[j] += 1;
        } else if dir < 0 && from == 0 {
            rec.winding[j] -= 1;
        }
        pos[j] = step(from, dir, n);
        rec.jumps.push(Jump {
            time: t,
            particle: j,
            dir,
        });
        if rec.tau.is_none() && pos.iter().enumerate().any(|(i, &p)| i != j && p == pos[j]) {
            rec.tau = Some(t);
        }
    }
    rec
}

pub fn simulate_free(x: &WalkerConfig, rates: RateParams, horizon: f64, seed: u64) -> PathRecord {
    simulate_with(Dynamics::Free, x, rates, horizon, &mut replica_rng(seed, 0))
}

pub fn simulate_conditioned(
    x: &WalkerConfig,
    rates: RateParams,
    horizon: f64,
    seed: u64,
) -> PathRecord {
    simulate_with(
        Dynamics::Conditioned,
        x,
        rates,
        horizon,
        &mut replica_rng(seed, 0),
    )
}

pub fn simulate_asep(x: &WalkerConfig, rates: RateParams, horizon: f64, seed: u64) -> PathRecord {
    simulate_with(Dynamics::Asep, x, rates, horizon, &mut replica_rng(seed, 0))
}

fn integrated_traffic(path: &PathRecord, t: f64) -> f64 {
    let n = path.initial.n();
    let mut acc = 0.0;
    path.for_each_segment(t, |p, dt| {
        let cfg = WalkerConfig::new(n, p.to_vec()).expect("exclusion paths stay valid");
        acc += traffic(&cfg) as f64 * dt;
    });
    acc
}

fn require_asep(path: &PathRecord) -> Result<()> {
    if path.dynamics != Dynamics::Asep {
        return Err(Error::UnsupportedParameters(format!(
            "{:?} path given where an exclusion path is required",
            path.dynamics
        )));
    }
    Ok(())
}

/// `(Δ(X_0)/Δ(X_t)) exp((T+T') ∫_0^t (Traffic(X_s) - c_{ℓ,n}) ds)` at the
/// horizon: the density of the conditioned law against exclusion.
pub fn traffic_martingale(path: &PathRecord, rates: RateParams) -> Result<f64> {
    Ok(1.0 / unit_mean_martingale_at(path, rates, path.horizon)?)
}

/// `(Δ(X_t)/Δ(X_0)) exp(-(T+T') ∫_0^t (μ - ℓ + Traffic(X_s)) ds)`, which has
/// mean one under the exclusion dynamics.
pub fn unit_mean_martingale_at(path: &PathRecord, rates: RateParams, t: f64) -> Result<f64> {
    require_asep(path)?;
    let t = t.min(path.horizon);
    let n = path.initial.n();
    let ell = path.initial.ell() as f64;
    let xt = path.config_at(t).expect("exclusion paths stay valid");
    let integral = integrated_traffic(path, t) + (mu(path.initial.ell(), n) - ell) * t;
    Ok(vandermonde_delta(&xt) / vandermonde_delta(&path.initial)
        * (-rates.total() * integral).exp())
}

/// Running mean and variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        let total = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / total as f64;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / total as f64;
        self.count = total;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl EstimatorReport {
    /// `|estimate - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.estimate - target).abs();
        if self.stderr == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.stderr
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StartLaw {
    Fixed(WalkerConfig),
    /// Drawn from `Δ(h)² / n^ℓ`.
    Stationary {
        n: usize,
        ell: usize,
    },
    /// Uniform over all `ℓ`-subsets.
    Uniform {
        n: usize,
        ell: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub dynamics: Dynamics,
    pub start: StartLaw,
    pub rates: RateParams,
    pub horizon: f64,
}

impl SimSpec {
    /// Replica `i`: the start is drawn first, then the path, from one stream.
    /// `states` is the table from [`SimSpec::start_distribution`].
    pub fn replica(&self, seed: u64, i: u64, states: &[(WalkerConfig, f64)]) -> PathRecord {
        let mut rng = replica_rng(seed, i);
        let start = match &self.start {
            StartLaw::Fixed(x) => x.clone(),
            StartLaw::Stationary { .. } | StartLaw::Uniform { .. } => {
                let mut u = rng.gen::<f64>();
                let mut pick = &states[states.len() - 1].0;
                for (s, p) in states {
                    if u < *p {
                        pick = s;
                        break;
                    }
                    u -= p;
                }
                pick.clone()
            }
        };
        simulate_with(self.dynamics, &start, self.rates, self.horizon, &mut rng)
    }

    /// Start states with their probabilities; empty for a fixed start.
    pub fn start_distribution(&self) -> Result<Vec<(WalkerConfig, f64)>> {
        match &self.start {
            StartLaw::Fixed(_) => Ok(Vec::new()),
            StartLaw::Stationary { n, ell } => Ok(all_states(*n, *ell)?
                .into_iter()
                .map(|s| {
                    let p = stationary_prob(&s);
                    (s, p)
                })
                .collect()),
            StartLaw::Uniform { n, ell } => {
                let states = all_states(*n, *ell)?;
                let p = 1.0 / states.len() as f64;
                Ok(states.into_iter().map(|s| (s, p)).collect())
            }
        }
    }
}

/// Estimate `k` functionals of one path from `n_samples` independent
/// replicas. Values are reduced in replica order, so the reports are
/// bit-identical for a given seed whatever the thread count.
pub fn estimate_many<F>(
    f: F,
    k: usize,
    spec: &SimSpec,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<EstimatorReport>>
where
    F: Fn(&PathRecord) -> Vec<f64> + Sync,
{
    if n_samples < 2 {
        return Err(Error::UnsupportedParameters(
            "need at least 2 samples".into(),
        ));
    }
    let states = spec.start_distribution()?;
    const CHUNK: u64 = 4096;
    let chunks: Vec<Vec<Welford>> = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Welford::default(); k];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let vals = f(&spec.replica(seed, i, &states));
                assert_eq!(
                    vals.len(),
                    k,
                    "functional returned the wrong number of values"
                );
                for (a, v) in acc.iter_mut().zip(vals) {
                    a.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Welford::default(); k];
    for chunk in &chunks {
        for (t, c) in total.iter_mut().zip(chunk) {
            t.merge(c);
        }
    }
    Ok(total
        .into_iter()
        .map(|w| EstimatorReport {
            estimate: w.mean,
            stderr: w.stderr(),
            n_samples,
            seed,
        })
        .collect())
}

pub fn estimate<F>(f: F, spec: &SimSpec, n_samples: u64, seed: u64) -> Result<EstimatorReport>
where
    F: Fn(&PathRecord) -> f64 + Sync,
{
    Ok(estimate_many(|p| vec![f(p)], 1, spec, n_samples, seed)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut a = Welford::default();
        xs.iter().for_each(|&x| a.push(x));
        let mut b = Welford::default();
        let mut c = Welford::default();
        xs[..37].iter().for_each(|&x| b.push(x));
        xs[37..].iter().for_each(|&x| c.push(x));
        b.merge(&c);
        assert!((a.mean - b.mean).abs() < 1e-14 && (a.m2 - b.m2).abs() < 1e-12);
    }

    #[test]
    fn frozen_without_rates() {
        let x = WalkerConfig::new(5, vec![0, 2]).unwrap();
        let r = RateParams::new(0.0, 0.0).unwrap();
        let p = simulate_free(&x, r, 10.0, 1);
        assert!(p.jumps.is_empty() && p.tau.is_none());
    }
}
