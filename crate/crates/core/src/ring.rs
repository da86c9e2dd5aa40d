//! Poisson walkers on the ring `Z_n`: the cyclic Karlin–McGregor kernel,
//! the walkers conditioned never to collide, their space-time determinantal
//! structure, and the traffic identity linking them to exclusion dynamics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Step;
use crate::limits::{mu, root_sets};
use crate::linalg::{det_complex, det_real};

/// Largest state space enumerated for transition matrices.
pub const STATE_CAP: usize = 3000;

/// Occupied sites of the ring, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawWalkers")]
pub struct WalkerConfig {
    n: usize,
    positions: Vec<usize>,
}

#[derive(Deserialize)]
struct RawWalkers {
    n: usize,
    positions: Vec<usize>,
}

impl TryFrom<RawWalkers> for WalkerConfig {
    type Error = Error;
    fn try_from(r: RawWalkers) -> Result<Self> {
        WalkerConfig::new(r.n, r.positions)
    }
}

impl WalkerConfig {
    /// Positions may be given in any order; they are stored sorted.
    pub fn new(n: usize, mut positions: Vec<usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidWalkers(format!("ring size {n} < 2")));
        }
        if positions.is_empty() || positions.len() > n {
            return Err(Error::InvalidWalkers(format!(
                "need 1..={n} walkers, got {}",
                positions.len()
            )));
        }
        if let Some(&p) = positions.iter().find(|&&p| p >= n) {
            return Err(Error::InvalidWalkers(format!(
                "position {p} outside [0, {n})"
            )));
        }
        positions.sort_unstable();
        if positions.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidWalkers("positions must be distinct".into()));
        }
        Ok(Self { n, positions })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn contains(&self, h: usize) -> bool {
        self.positions.binary_search(&h).is_ok()
    }

    /// Walker `j` moved by `±1`, or `None` if the target is occupied.
    pub fn moved(&self, j: usize, up: bool) -> Option<WalkerConfig> {
        let h = self.positions[j];
        let t = if up {
            (h + 1) % self.n
        } else {
            (h + self.n - 1) % self.n
        };
        if self.contains(t) {
            return None;
        }
        let mut p = self.positions.clone();
        p[j] = t;
        p.sort_unstable();
        Some(WalkerConfig {
            n: self.n,
            positions: p,
        })
    }

    /// Rotation of every position by `+1`.
    pub fn rotated(&self) -> WalkerConfig {
        let mut p: Vec<usize> = self.positions.iter().map(|&h| (h + 1) % self.n).collect();
        p.sort_unstable();
        WalkerConfig {
            n: self.n,
            positions: p,
        }
    }
}

impl std::fmt::Display for WalkerConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.positions.iter().map(|h| h.to_string()).collect();
        write!(f, "{{{}}} mod {}", s.join(","), self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    /// Rate of `x → x+1`.
    pub t: f64,
    /// Rate of `x → x-1`.
    pub tp: f64,
}

impl RateParams {
    pub fn new(t: f64, tp: f64) -> Result<Self> {
        if !(t >= 0.0 && tp >= 0.0) {
            return Err(Error::UnsupportedParameters(format!(
                "rates must be non-negative, got T={t}, T'={tp}"
            )));
        }
        Ok(Self { t, tp })
    }

    pub fn total(&self) -> f64 {
        self.t + self.tp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingConstants {
    pub mu: f64,
    /// `ℓ - μ`.
    pub c: f64,
    /// `n^{-ℓ} Σ_y Δ(y)`.
    pub cln: f64,
}

impl RingConstants {
    pub fn new(ell: usize, n: usize) -> Result<Self> {
        let m = mu(ell, n);
        let states = all_states(n, ell)?;
        let cln = states.iter().map(vandermonde_delta).sum::<f64>() / (n as f64).powi(ell as i32);
        Ok(Self {
            mu: m,
            c: ell as f64 - m,
            cln,
        })
    }
}

/// `C(n, k)` as a float, to test against the cap without overflow.
fn binom_f(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All `ℓ`-subsets of `[n]` in lexicographic order.
pub fn all_states(n: usize, ell: usize) -> Result<Vec<WalkerConfig>> {
    if n < 2 || ell == 0 || ell > n {
        return Err(Error::InvalidWalkers(format!(
            "need 1 <= ell <= n, n >= 2; got ell={ell}, n={n}"
        )));
    }
    let count = binom_f(n, ell);
    if count > STATE_CAP as f64 {
        return Err(Error::Intractable(format!(
            "C({n},{ell}) = {count} states exceeds {STATE_CAP}"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut idx: Vec<usize> = (0..ell).collect();
    loop {
        out.push(WalkerConfig {
            n,
            positions: idx.clone(),
        });
        let mut i = ell;
        while i > 0 && idx[i - 1] == n - ell + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for k in i..ell {
            idx[k] = idx[k - 1] + 1;
        }
    }
    Ok(out)
}

/// `Δ(h) = ∏_{j<k} |ω^{h_k} - ω^{h_j}|`, `ω = e^{2πi/n}`.
pub fn vandermonde_delta(h: &WalkerConfig) -> f64 {
    let n = h.n as f64;
    let p = &h.positions;
    let mut d = 1.0;
    for j in 0..p.len() {
        for k in j + 1..p.len() {
            // |ω^a - ω^b| = 2 |sin(π(a-b)/n)|
            d *= 2.0 * (PI * (p[k] as f64 - p[j] as f64) / n).sin().abs();
        }
    }
    d
}

/// The roots `z_k = ω^{(n-ℓ+1)/2 + k - 1}`, `k = 1..=ℓ`.
pub fn phi_roots(ell: usize, n: usize) -> Vec<Complex64> {
    (0..ell)
        .map(|k| {
            Complex64::from_polar(1.0, PI * ((n - ell + 1) as f64 + 2.0 * k as f64) / n as f64)
        })
        .collect()
}

/// `φ(h) = det[z_k^{h_j}]` for an ordered tuple `h` of integers.
pub fn phi_det(n: usize, h: &[i64]) -> Complex64 {
    let ell = h.len();
    let z = phi_roots(ell, n);
    let mut a = Vec::with_capacity(ell * ell);
    for &hj in h {
        for zk in &z {
            a.push(zk.powi(hj as i32));
        }
    }
    det_complex(a, ell)
}

/// `p_t^ℓ(x, y) = (1/n) Σ_{z^n = (-1)^{ℓ+1}} z^{-(y-x)} e^{(Tz + T'/z - T - T')t}`.
pub fn km_kernel(n: usize, ell: usize, rates: RateParams, x: i64, y: i64, t: f64) -> f64 {
    let theta = ((ell + 1) % 2) as f64;
    let d = (y - x).rem_euclid(n as i64);
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let z = Complex64::from_polar(1.0, PI * (2.0 * k as f64 + theta) / n as f64);
        s += z.powi(-(d as i32)) * ((rates.t * z + rates.tp / z - rates.total()) * t).exp();
    }
    // the wrap of y - x into [0, n) costs (-1)^{(ℓ+1) ⌊(y-x)/n⌋}
    let wraps = (y - x).div_euclid(n as i64);
    let sign = if (ell + 1) % 2 == 1 && wraps % 2 != 0 {
        -1.0
    } else {
        1.0
    };
    sign * s.re / n as f64
}

fn clamp_probability(v: f64, what: &str) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -1e-12 {
        log::warn!("{what}: clamped {v:e} to 0");
        Ok(0.0)
    } else {
        Err(Error::NegativeProbability(v))
    }
}

fn check_pair(x: &WalkerConfig, y: &WalkerConfig) -> Result<()> {
    if x.n != y.n || x.ell() != y.ell() {
        return Err(Error::InvalidWalkers(format!(
            "configurations {x} and {y} differ in n or ell"
        )));
    }
    Ok(())
}

/// `P_x(X_t = y as a set, τ > t) = det[p_t^ℓ(x_i, y_j)]` for free walkers.
pub fn noncollision_det(
    x: &WalkerConfig,
    y: &WalkerConfig,
    rates: RateParams,
    t: f64,
) -> Result<f64> {
    check_pair(x, y)?;
    let (n, ell) = (x.n, x.ell());
    let mut a = Vec::with_capacity(ell * ell);
    for &xi in &x.positions {
        for &yj in &y.positions {
            a.push(km_kernel(n, ell, rates, xi as i64, yj as i64, t));
        }
    }
    clamp_probability(det_real(a, ell), "non-collision determinant")
}

/// Transition probability of the walkers conditioned never to collide.
pub fn conditioned_transition(
    x: &WalkerConfig,
    y: &WalkerConfig,
    rates: RateParams,
    t: f64,
) -> Result<f64> {
    check_pair(x, y)?;
    let (n, ell) = (x.n, x.ell());
    let growth = ((ell as f64 - mu(ell, n)) * rates.total() * t).exp();
    let d = noncollision_det(x, y, rates, t)?;
    Ok(vandermonde_delta(y) / vandermonde_delta(x) * growth * d)
}

/// `Δ(h)² / n^ℓ`.
pub fn stationary_prob(h: &WalkerConfig) -> f64 {
    vandermonde_delta(h).powi(2) / (h.n as f64).powi(h.ell() as i32)
}

/// `#{(j, k) : h_k = h_j + 1 mod n}`.
pub fn traffic(h: &WalkerConfig) -> usize {
    h.positions
        .iter()
        .filter(|&&p| h.contains((p + 1) % h.n))
        .count()
}

/// Jump rate of walker `j` under the conditioned dynamics.
pub fn conditioned_rate(h: &WalkerConfig, j: usize, up: bool, rates: RateParams) -> f64 {
    match h.moved(j, up) {
        None => 0.0,
        Some(g) => {
            let r = if up { rates.t } else { rates.tp };
            r * vandermonde_delta(&g) / vandermonde_delta(h)
        }
    }
}

/// `(𝒢^{ASEP} Δ)(h)` and `(T+T')(μ - ℓ + Traffic(h)) Δ(h)`.
pub fn generator_pair(h: &WalkerConfig, rates: RateParams) -> (f64, f64) {
    let d = vandermonde_delta(h);
    let mut lhs = 0.0;
    for j in 0..h.ell() {
        for (up, r) in [(true, rates.t), (false, rates.tp)] {
            if let Some(g) = h.moved(j, up) {
                lhs += r * (vandermonde_delta(&g) - d);
            }
        }
    }
    let rhs = rates.total() * (mu(h.ell(), h.n) - h.ell() as f64 + traffic(h) as f64) * d;
    (lhs, rhs)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorRow {
    pub state: WalkerConfig,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// The generator identity evaluated on every state.
pub fn generator_table(n: usize, ell: usize, rates: RateParams) -> Result<Vec<GeneratorRow>> {
    Ok(all_states(n, ell)?
        .into_iter()
        .map(|state| {
            let (lhs, rhs) = generator_pair(&state, rates);
            GeneratorRow {
                state,
                lhs,
                rhs,
                residual: (lhs - rhs).abs(),
            }
        })
        .collect())
}

/// Dense transition matrix `Q_t` over [`all_states`], row-major.
pub fn transition_matrix(
    n: usize,
    ell: usize,
    rates: RateParams,
    t: f64,
) -> Result<(Vec<WalkerConfig>, Vec<f64>)> {
    let states = all_states(n, ell)?;
    let s = states.len();
    let mut q = vec![0.0; s * s];
    for (i, x) in states.iter().enumerate() {
        for (j, y) in states.iter().enumerate() {
            q[i * s + j] = conditioned_transition(x, y, rates, t)?;
        }
    }
    Ok((states, q))
}

/// One event of the stationary conditioned process: at time `t`, site `h`
/// is empty (`Fixed`), occupied (`Right`), or a walker jumps from `h` to
/// `h ± 1` (`Up` / `Down`, a density per unit time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeEvent {
    pub t: f64,
    pub h: usize,
    pub step: Step,
}

impl SpaceTimeEvent {
    pub fn new(t: f64, h: usize, step: Step) -> Self {
        Self { t, h, step }
    }
}

/// `H_{ℓ,n}(f, (s, h), (s', h'))`.
pub fn spacetime_kernel(
    ell: usize,
    n: usize,
    rates: RateParams,
    f: Step,
    from: (f64, i64),
    to: (f64, i64),
) -> Complex64 {
    let roots = root_sets(ell, n);
    let (s, h) = from;
    let (sp, hp) = to;
    let shift = match f {
        Step::Down => 1,
        Step::Up => -1,
        _ => 0,
    };
    let exponent = -(hp - h + shift) as i32;
    let later = sp > s || (sp == s && f != Step::Right);
    let (set, sign) = if later {
        (&roots.right, 1.0)
    } else {
        (&roots.left, -1.0)
    };
    let dt = sp - s;
    let total: Complex64 = set
        .iter()
        .map(|&w| w.powi(exponent) * (-(rates.t * w + rates.tp / w) * dt).exp())
        .sum();
    sign * total / n as f64
}

fn spacetime_prefactor(f: Step, rates: RateParams) -> f64 {
    match f {
        Step::Fixed => 1.0,
        Step::Right => -1.0,
        Step::Up => rates.t,
        Step::Down => rates.tp,
    }
}

/// Joint probability (or density, one factor per jump event) of space-time
/// events under the stationary conditioned process.
///
/// Repeated identical events are merged. Two different events at the same
/// `(t, h)` are incompatible and give 0 with a warning.
pub fn spacetime_correlation(
    ell: usize,
    n: usize,
    rates: RateParams,
    events: &[SpaceTimeEvent],
) -> Result<f64> {
    if n < 2 || ell == 0 || ell > n {
        return Err(Error::InvalidWalkers(format!(
            "need 1 <= ell <= n, n >= 2; got ell={ell}, n={n}"
        )));
    }
    let mut evs: Vec<SpaceTimeEvent> = Vec::with_capacity(events.len());
    for e in events {
        if e.h >= n {
            return Err(Error::SiteOutOfRange {
                x1: 0,
                x2: e.h as i64,
            });
        }
        match evs.iter().find(|o| o.t == e.t && o.h == e.h) {
            Some(o) if o.step == e.step => {}
            Some(o) => {
                log::warn!(
                    "events {:?} and {:?} share a space-time point; correlation is 0",
                    o.step,
                    e.step
                );
                return Ok(0.0);
            }
            None => evs.push(*e),
        }
    }
    let k = evs.len();
    if k == 0 {
        return Ok(1.0);
    }
    let mut a = Vec::with_capacity(k * k);
    for ei in &evs {
        let pre = spacetime_prefactor(ei.step, rates);
        for ej in &evs {
            a.push(
                pre * spacetime_kernel(
                    ell,
                    n,
                    rates,
                    ei.step,
                    (ei.t, ei.h as i64),
                    (ej.t, ej.h as i64),
                ),
            );
        }
    }
    let d = det_complex(a, k);
    if d.im.abs() > 1e-9 * (1.0 + d.re.abs()) {
        return Err(Error::NonReal { re: d.re, im: d.im });
    }
    Ok(d.re)
}

/// Events saying the configuration at time `t` is exactly `h`.
pub fn state_events(h: &WalkerConfig, t: f64) -> Vec<SpaceTimeEvent> {
    (0..h.n)
        .map(|x| {
            SpaceTimeEvent::new(
                t,
                x,
                if h.contains(x) {
                    Step::Right
                } else {
                    Step::Fixed
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkovReport {
    pub residual: f64,
    pub triples: usize,
    pub worst: Option<[WalkerConfig; 3]>,
}

/// `max |P(X_{t3}=c | X_{t2}=b, X_{t1}=a) - P(X_{t3}=c | X_{t2}=b)|` over
/// all state triples, from space-time determinants alone.
pub fn markov_check(
    ell: usize,
    n: usize,
    rates: RateParams,
    times: [f64; 3],
) -> Result<MarkovReport> {
    if !(times[0] < times[1] && times[1] < times[2]) {
        return Err(Error::UnsupportedParameters(
            "times must be strictly increasing".into(),
        ));
    }
    let states = all_states(n, ell)?;
    let s = states.len();
    if s.pow(3) > 1_000_000 {
        return Err(Error::Intractable(format!("{s}^3 state triples")));
    }
    let joint = |parts: &[(&WalkerConfig, f64)]| -> Result<f64> {
        let evs: Vec<SpaceTimeEvent> = parts
            .iter()
            .flat_map(|&(h, t)| state_events(h, t))
            .collect();
        spacetime_correlation(ell, n, rates, &evs)
    };
    let mut report = MarkovReport {
        residual: 0.0,
        triples: 0,
        worst: None,
    };
    for b in &states {
        let pb = joint(&[(b, times[1])])?;
        if pb < 1e-12 {
            continue;
        }
        for a in &states {
            let pab = joint(&[(a, times[0]), (b, times[1])])?;
            if pab < 1e-12 {
                continue;
            }
            for c in &states {
                let pbc = joint(&[(b, times[1]), (c, times[2])])?;
                let pabc = joint(&[(a, times[0]), (b, times[1]), (c, times[2])])?;
                let r = (pabc / pab - pbc / pb).abs();
                report.triples += 1;
                if report.worst.is_none() || r > report.residual {
                    report.residual = r;
                    report.worst = Some([a.clone(), b.clone(), c.clone()]);
                }
            }
        }
    }
    Ok(report)
}
