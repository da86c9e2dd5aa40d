//! The acceptance battery: ten criteria, each a list of named checks with a
//! measured value and a tolerance.
//!
//! Reports are deterministic for a given seed. Wall-clock time is kept out
//! of the serialized form.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Event, EventQuery};
use crate::fibonacci::{fibonacci_binomial, fibonacci_closed, fibonacci_f};
use crate::kasteleyn::{
    c_coeff, correlation, det_k_log, is_singular, partition_function, sector_sign_sum, ThetaSector,
};
use crate::lattice::{enumerate_configs, CoarsePolynomial, Params, PureMeasure, Step, TorusShape};
use crate::limits::{
    arc_geometry, cylinder_correlation, plane_correlation, predicted_sector_sign, ArcPhase,
    CylinderKernelSpec, PlaneKernelSpec,
};
use crate::linalg::det_complex;
use crate::ring::{
    all_states, conditioned_transition, generator_table, markov_check, noncollision_det,
    spacetime_correlation, stationary_prob, transition_matrix, RateParams, SpaceTimeEvent,
    WalkerConfig,
};
use crate::simulate::{estimate_many, unit_mean_martingale_at, Dynamics, SimSpec, StartLaw};

/// Shapes used for exhaustive enumeration in criterion 1.
pub const PARTITION_SHAPES: [(usize, usize); 9] = [
    (2, 2),
    (2, 3),
    (3, 2),
    (3, 3),
    (2, 4),
    (4, 2),
    (3, 4),
    (4, 3),
    (4, 4),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Partition,
    Correlation,
    Sign,
    Cylinder,
    Renewal,
    Sine,
    Ring,
    MonteCarlo,
    Fibonacci,
    Geometry,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 11] = [
        "partition",
        "correlation",
        "sign",
        "cylinder",
        "renewal",
        "sine",
        "ring",
        "montecarlo",
        "fibonacci",
        "geometry",
        "all",
    ];

    pub fn criteria(self) -> Vec<u8> {
        match self {
            Suite::All => (1..=10).collect(),
            s => vec![s as u8 + 1],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use Suite::*;
        let all = [
            Partition,
            Correlation,
            Sign,
            Cylinder,
            Renewal,
            Sine,
            Ring,
            MonteCarlo,
            Fibonacci,
            Geometry,
            All,
        ];
        Suite::NAMES
            .iter()
            .position(|&n| n == s)
            .map(|i| all[i])
            .ok_or_else(|| {
                Error::UnsupportedParameters(format!(
                    "unknown suite '{s}', expected one of {}",
                    Suite::NAMES.join(", ")
                ))
            })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(Suite::NAMES[*self as usize])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Paths per Monte Carlo estimate.
    pub mc_paths: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            mc_paths: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Known not to hold as stated; see the criterion note.
    pub unattainable: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            unattainable: false,
        }
    }

    fn unattainable(mut self) -> Self {
        self.unattainable = true;
        self
    }

    /// `measured / tolerance`, the quantity used to pick the worst check.
    pub fn ratio(&self) -> f64 {
        if self.measured.is_nan() {
            f64::INFINITY
        } else if self.tolerance > 0.0 {
            self.measured / self.tolerance
        } else if self.measured > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub known_unattainable: bool,
    pub checks: Vec<Check>,
    pub time_limit_secs: Option<f64>,
    pub note: String,
    #[serde(skip)]
    pub elapsed_secs: f64,
}

impl CriterionReport {
    fn new(id: u8, checks: Vec<Check>, note: impl Into<String>) -> Self {
        let known_unattainable = checks.iter().any(|c| c.unattainable);
        Self {
            id,
            name: criterion_name(id).to_string(),
            passed: checks.iter().all(|c| c.passed),
            known_unattainable,
            checks,
            time_limit_secs: None,
            note: note.into(),
            elapsed_secs: 0.0,
        }
    }

    fn failed(id: u8, err: Error) -> Self {
        let mut r = Self::new(id, Vec::new(), format!("error: {err}"));
        r.passed = false;
        r
    }

    /// The check furthest from its tolerance.
    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .max_by(|a, b| a.ratio().total_cmp(&b.ratio()))
    }

    /// Checks not flagged as unattainable all pass.
    pub fn attainable_passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.unattainable || c.passed)
    }

    pub fn within_time(&self) -> bool {
        self.time_limit_secs.is_none_or(|l| self.elapsed_secs <= l)
    }

    /// One human-readable status line.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let worst = match self.worst() {
            Some(c) => format!(
                "{}: measured {:.3e}, tolerance {:.1e}",
                c.name, c.measured, c.tolerance
            ),
            None => self.note.clone(),
        };
        format!(
            "criterion {:>2} {status} {} [{worst}] ({:.1}s)",
            self.id, self.name, self.elapsed_secs
        )
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "partition function identity",
        2 => "correlation identity",
        3 => "sign lemma",
        4 => "cylinder limit",
        5 => "n=2 renewal reduction",
        6 => "sine-kernel reduction",
        7 => "ring exact identities",
        8 => "Monte Carlo vs determinants",
        9 => "Fibonacci suite",
        10 => "geometry properties",
        _ => "unknown",
    }
}

/// Run one criterion by number.
pub fn run_criterion(id: u8, opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let result = match id {
        1 => partition_identity(),
        2 => correlation_identity(opts.seed),
        3 => sign_lemma(),
        4 => cylinder_limit(),
        5 => renewal_reduction(),
        6 => sine_reduction(),
        7 => ring_identities(),
        8 => monte_carlo(opts),
        9 => fibonacci_suite(),
        10 => geometry(opts.seed),
        _ => Err(Error::UnsupportedParameters(format!("no criterion {id}"))),
    };
    let mut report = result.unwrap_or_else(|e| CriterionReport::failed(id, e));
    report.elapsed_secs = start.elapsed().as_secs_f64();
    report.time_limit_secs = match id {
        1 => Some(300.0),
        8 => Some(600.0),
        _ => None,
    };
    report.passed &= report.within_time();
    report
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Vec<CriterionReport> {
    suite
        .criteria()
        .into_iter()
        .map(|id| run_criterion(id, opts))
        .collect()
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a: f64, b| {
        if a.is_nan() || b.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    })
}

fn partition_identity() -> Result<CriterionReport> {
    let levels = [0.0, 0.3, 0.5];
    let mut grid = Vec::new();
    for beta in [0.0, 0.5, 1.2] {
        for gamma in levels {
            for delta in levels {
                let p = Params::new(1.0, beta, gamma, delta);
                if p.probabilistic() {
                    grid.push(p);
                }
            }
        }
    }
    let mut worst = 0.0f64;
    for (m1, m2) in PARTITION_SHAPES {
        let shape = TorusShape::new(m1, m2)?;
        let brute = CoarsePolynomial::build(shape, shape.n_sites())?;
        for p in &grid {
            let z = partition_function(shape, p)?;
            let b = brute.evaluate(p);
            worst = max_of([worst, (z - b).abs() / z.abs().max(1.0)]);
        }
    }
    Ok(CriterionReport::new(
        1,
        vec![Check::new(
            "relative error of the determinant sum",
            worst,
            1e-9,
        )],
        format!(
            "{} shapes x {} parameter points",
            PARTITION_SHAPES.len(),
            grid.len()
        ),
    ))
}

fn correlation_identity(seed: u64) -> Result<CriterionReport> {
    let points = [
        Params::new(1.0, 0.5, 0.2, 0.2),
        Params::new(1.0, 0.7, 0.5, 0.5),
        Params::new(1.0, 1.2, 0.3, 0.1),
        Params::new(1.0, 0.3, 0.0, 0.4),
    ];
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut single, mut multi, mut sums) = (0.0f64, 0.0f64, 0.0f64);
    let mut n_queries = 0;
    for (m1, m2) in [(3, 3), (2, 4)] {
        let shape = TorusShape::new(m1, m2)?;
        let steps = shape.allowed_steps();
        for p in &points {
            let brute = PureMeasure::new(shape, p, shape.n_sites())?;
            for x in shape.sites() {
                let mut total = 0.0;
                for &st in steps {
                    let e = Event::new(x.x1 as i64, x.x2 as i64, st);
                    let v = correlation(shape, p, &EventQuery::new(vec![e]))?;
                    single = max_of([single, (v - brute.probability(&[e])).abs()]);
                    total += v;
                    n_queries += 1;
                }
                sums = max_of([sums, (total - 1.0).abs()]);
            }
            for _ in 0..20 {
                let k = rng.gen_range(2..=3);
                let mut idx: Vec<usize> = Vec::new();
                while idx.len() < k {
                    let i = rng.gen_range(0..shape.n_sites());
                    if !idx.contains(&i) {
                        idx.push(i);
                    }
                }
                let events: Vec<Event> = idx
                    .iter()
                    .map(|&i| {
                        let s = shape.site(i);
                        let st = steps[rng.gen_range(0..steps.len())];
                        Event::new(s.x1 as i64, s.x2 as i64, st)
                    })
                    .collect();
                let v = correlation(shape, p, &EventQuery::new(events.clone()))?;
                multi = max_of([multi, (v - brute.probability(&events)).abs()]);
                n_queries += 1;
            }
        }
    }
    Ok(CriterionReport::new(
        2,
        vec![
            Check::new("single events vs enumeration", single, 1e-9),
            Check::new("random 2-3 event queries vs enumeration", multi, 1e-9),
            Check::new("single-site probabilities sum to one", sums, 1e-9),
        ],
        format!("{n_queries} queries on 3x3 and 2x4"),
    ))
}

fn sign_lemma() -> Result<CriterionReport> {
    let mut failures = 0usize;
    let mut checked = 0usize;
    let mut shapes: Vec<(usize, usize)> = (1..=3)
        .flat_map(|m1| (1..=4).map(move |m2| (m1, m2)))
        .collect();
    shapes.push((4, 4));
    for (m1, m2) in shapes {
        let shape = TorusShape::new(m1, m2)?;
        for c in enumerate_configs(shape, false)? {
            let lhs = sector_sign_sum(shape, c.counts());
            let n = if c.snakelet_count() % 2 == 0 { 1 } else { -1 };
            let rhs = n * c.permutation_sign() as i32;
            let rounded = lhs.re.round();
            if (lhs - Complex64::new(rounded, 0.0)).norm() > 1e-12 || rounded as i32 != rhs {
                failures += 1;
            }
            checked += 1;
        }
    }
    Ok(CriterionReport::new(
        3,
        vec![Check::new("sign mismatches", failures as f64, 0.0)],
        format!("{checked} generalised configurations, shapes up to 3x4 and 4x4"),
    ))
}

/// Ten queries on the `n = 4` cylinder, anchored near the origin.
pub fn cylinder_battery() -> Vec<EventQuery> {
    use Step::*;
    let q = |v: &[(i64, i64, Step)]| {
        EventQuery::new(v.iter().map(|&(a, b, s)| Event::new(a, b, s)).collect())
    };
    vec![
        q(&[(0, 0, Right)]),
        q(&[(0, 0, Up)]),
        q(&[(0, 1, Fixed)]),
        q(&[(0, 2, Down)]),
        q(&[(0, 0, Right), (1, 1, Up)]),
        q(&[(0, 0, Down), (2, 3, Fixed)]),
        q(&[(0, 0, Fixed), (1, 0, Right)]),
        q(&[(0, 1, Up), (0, 3, Down)]),
        q(&[(0, 3, Up), (3, 0, Right)]),
        q(&[(0, 0, Right), (1, 1, Right), (2, 2, Fixed)]),
    ]
}

fn cylinder_limit() -> Result<CriterionReport> {
    let (ell, n, gamma, delta, beta) = (2usize, 4usize, 0.2, 0.2, 0.9);
    let spec = CylinderKernelSpec::new(ell, n, gamma, delta)?;
    let params = Params::new(1.0, beta, gamma, delta);
    let battery = cylinder_battery();
    let targets: Vec<f64> = battery
        .iter()
        .map(|q| cylinder_correlation(&spec, q))
        .collect::<Result<_>>()?;
    let mut residuals = Vec::new();
    for m in [64usize, 128, 256] {
        let shape = TorusShape::new(m, n)?;
        let mut r = 0.0f64;
        for (q, t) in battery.iter().zip(&targets) {
            r = max_of([r, (correlation(shape, &params, q)? - t).abs()]);
        }
        residuals.push(r);
    }
    let density = (targets[0] - ell as f64 / n as f64).abs();
    Ok(CriterionReport::new(
        4,
        vec![
            Check::new("residual at m=256", residuals[2], 1e-3),
            Check::new("residual at m=128 below m=64", residuals[1], residuals[0]),
            Check::new("residual at m=256 below m=128", residuals[2], residuals[1]),
            Check::new("cylinder Right density is ell/n", density, 1e-12),
        ],
        format!(
            "beta={beta}, gamma=delta={gamma}, ell={ell}, n={n}; residuals {:.3e} {:.3e} {:.3e}",
            residuals[0], residuals[1], residuals[2]
        ),
    ))
}

/// Vertical-step points on row 0 of the `n = 2` cylinder.
struct RenewalRow {
    spec: CylinderKernelSpec,
}

impl RenewalRow {
    fn point(x: i64) -> [Event; 2] {
        [Event::new(x, 0, Step::Up), Event::new(x, 0, Step::Down)]
    }

    fn empty(x: i64) -> [Event; 2] {
        [Event::new(x, 0, Step::Fixed), Event::new(x, 0, Step::Right)]
    }

    /// Probability that row 0 shows the given point/no-point pattern on
    /// `0..pattern.len()`.
    fn pattern(&self, pattern: &[bool]) -> Result<f64> {
        let mut total = 0.0;
        for mask in 0..1u32 << pattern.len() {
            let events: Vec<Event> = pattern
                .iter()
                .enumerate()
                .map(|(x, &pt)| {
                    let pick = (mask >> x & 1) as usize;
                    if pt {
                        Self::point(x as i64)[pick]
                    } else {
                        Self::empty(x as i64)[pick]
                    }
                })
                .collect();
            total += cylinder_correlation(&self.spec, &EventQuery::new(events))?;
        }
        Ok(total)
    }

    fn two_point(&self, d: usize) -> Result<f64> {
        let mut total = 0.0;
        for a in Self::point(0) {
            for b in Self::point(d as i64) {
                total += cylinder_correlation(&self.spec, &EventQuery::new(vec![a, b]))?;
            }
        }
        Ok(total)
    }
}

fn renewal_reduction() -> Result<CriterionReport> {
    let (mut lit_density, mut lit_pair) = (0.0f64, 0.0f64);
    let (mut density, mut pair, mut gaps) = (0.0f64, 0.0f64, 0.0f64);
    for (gamma, delta) in [(0.3, 0.1), (0.5, 0.2)] {
        let row = RenewalRow {
            spec: CylinderKernelSpec::new(1, 2, gamma, delta)?,
        };
        let p = (gamma + delta) / (1.0 + gamma + delta);
        let rho = row.pattern(&[true])?;
        let lit = |d: usize| (1.0 - p) / (1.0 + p) * p.powi(d as i32);
        lit_density = max_of([lit_density, (rho - lit(0)).abs()]);
        density = max_of([density, (rho - p / 2.0).abs()]);
        let r = 1.0 - 2.0 * p;
        for d in 1..=10usize {
            let two = row.two_point(d)?;
            lit_pair = max_of([lit_pair, (two - (lit(0).powi(2) - lit(d).powi(2))).abs()]);
            let renewal = rho * rho * (1.0 - r.powi(d as i32 - 1));
            pair = max_of([pair, (two - renewal).abs()]);
        }
        for d in 1..=6usize {
            let mut pat = vec![false; d + 1];
            pat[0] = true;
            pat[d] = true;
            let gap = row.pattern(&pat)? / rho;
            let nb = (d as f64 - 1.0) * p * p * (1.0 - p).powi(d as i32 - 2);
            gaps = max_of([gaps, (gap - nb).abs()]);
        }
    }
    Ok(CriterionReport::new(
        5,
        vec![
            Check::new("literal kernel: density", lit_density, 1e-10).unattainable(),
            Check::new(
                "literal kernel: two-point function, |d| <= 10",
                lit_pair,
                1e-10,
            )
            .unattainable(),
            Check::new("renewal density p/2", density, 1e-10),
            Check::new("renewal two-point function, |d| <= 10", pair, 1e-10),
            Check::new("negative-binomial gap law, d <= 6", gaps, 1e-10),
        ],
        "the kernel ((1-p)/(1+p)) p^|d| has density (1-p)/(1+p) and charges gaps of \
         length 1, so it cannot describe the NB(2,p) renewal process; the vertical-step \
         points on row 0 follow the NB(2,p) renewal law exactly",
    ))
}

fn sine(tau: f64, d: i64) -> f64 {
    if d == 0 {
        tau
    } else {
        (PI * tau * d as f64).sin() / (PI * d as f64)
    }
}

fn sine_reduction() -> Result<CriterionReport> {
    let (mut entries, mut dets) = (0.0f64, 0.0f64);
    for tau in [0.2, 0.5, 0.7] {
        for gamma in [0.0, 0.3] {
            let spec = PlaneKernelSpec::new(tau, gamma, 0.0)?;
            let k = |h: i64, hp: i64| -> Result<Complex64> { Ok(-spec.h((1, h), (0, hp))?.0) };
            for d in -10..=10i64 {
                let gauge = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                entries = max_of([entries, (gauge * k(0, d)? - sine(tau, d)).norm()]);
            }
            let hs = [0i64, 1, 3, 4, 8];
            for len in 1..=hs.len() {
                let pts = &hs[..len];
                let mut b = Vec::new();
                for &x in pts {
                    for &y in pts {
                        b.push(Complex64::new(sine(tau, y - x), 0.0));
                    }
                }
                let want = det_complex(b, len).re;
                let events = pts.iter().map(|&h| Event::new(0, h, Step::Right)).collect();
                let (v, _) = plane_correlation(&spec, &EventQuery::new(events))?;
                dets = max_of([dets, (v - want).abs()]);
            }
        }
    }
    Ok(CriterionReport::new(
        6,
        vec![
            Check::new("kernel entries, |dh| <= 10", entries, 1e-8),
            Check::new("Right-event probabilities vs sine determinants", dets, 1e-8),
        ],
        "same-column Right kernel equals the sine kernel up to the gauge (-1)^dh",
    ))
}

fn matmul(a: &[f64], b: &[f64], s: usize) -> Vec<f64> {
    let mut c = vec![0.0; s * s];
    for i in 0..s {
        for k in 0..s {
            let aik = a[i * s + k];
            for j in 0..s {
                c[i * s + j] += aik * b[k * s + j];
            }
        }
    }
    c
}

fn ring_identities() -> Result<CriterionReport> {
    let rates = RateParams::new(1.0, 0.3)?;
    let (mut mass, mut marginal, mut beads) = (0.0f64, 0.0f64, 0.0f64);
    for n in 2..=8usize {
        for ell in 1..=n {
            let states = all_states(n, ell)?;
            mass = max_of([
                mass,
                (states.iter().map(stationary_prob).sum::<f64>() - 1.0).abs(),
            ]);
            let occ: f64 = states
                .iter()
                .filter(|h| h.contains(0))
                .map(stationary_prob)
                .sum();
            marginal = max_of([marginal, (occ - ell as f64 / n as f64).abs()]);
            let s = (PI * ell as f64 / n as f64).sin() / (PI / n as f64).sin();
            let up =
                spacetime_correlation(ell, n, rates, &[SpaceTimeEvent::new(0.0, 1, Step::Up)])?;
            beads = max_of([beads, (up - rates.t / n as f64 * s).abs()]);
        }
    }
    let (mut stationarity, mut ck) = (0.0f64, 0.0f64);
    for n in 2..=6usize {
        for ell in 1..=n {
            let (states, q) = transition_matrix(n, ell, rates, 0.7)?;
            let s = states.len();
            for j in 0..s {
                let v: f64 = (0..s)
                    .map(|i| stationary_prob(&states[i]) * q[i * s + j])
                    .sum();
                stationarity = max_of([stationarity, (v - stationary_prob(&states[j])).abs()]);
            }
            let (_, a) = transition_matrix(n, ell, rates, 0.4)?;
            let (_, b) = transition_matrix(n, ell, rates, 0.9)?;
            let (_, c) = transition_matrix(n, ell, rates, 1.3)?;
            let ab = matmul(&a, &b, s);
            ck = max_of(std::iter::once(ck).chain(ab.iter().zip(&c).map(|(x, y)| (x - y).abs())));
        }
    }
    let mut generator = 0.0f64;
    for n in 2..=7usize {
        for ell in 1..=n {
            generator = max_of(
                std::iter::once(generator)
                    .chain(generator_table(n, ell, rates)?.iter().map(|r| r.residual)),
            );
        }
    }
    let markov = markov_check(2, 4, rates, [0.0, 0.5, 1.2])?.residual;
    Ok(CriterionReport::new(
        7,
        vec![
            Check::new("stationary law sums to one, n <= 8", mass, 1e-12),
            Check::new("occupied marginal ell/n, n <= 8", marginal, 1e-12),
            Check::new(
                "up-bead density (T/n) sin(pi ell/n)/sin(pi/n)",
                beads,
                1e-12,
            ),
            Check::new(
                "stationarity of the transition kernel, n <= 6",
                stationarity,
                1e-8,
            ),
            Check::new("Chapman-Kolmogorov, n <= 6", ck, 1e-8),
            Check::new("generator identity, n <= 7", generator, 1e-10),
            Check::new("Markov property, n=4, ell=2", markov, 1e-8),
        ],
        "T=1, T'=0.3",
    ))
}

fn monte_carlo(opts: &VerifyOptions) -> Result<CriterionReport> {
    let (n, ell) = (5usize, 2usize);
    let rates = RateParams::new(1.0, 0.3)?;
    let states = all_states(n, ell)?;
    let paths = opts.mc_paths;
    let indicator = |states: &[WalkerConfig], y: Option<&WalkerConfig>, v: f64| -> Vec<f64> {
        states
            .iter()
            .map(|s| if Some(s) == y { v } else { 0.0 })
            .collect()
    };
    let worst_z = |reps: &[crate::simulate::EstimatorReport], exact: &[f64]| {
        max_of(reps.iter().zip(exact).map(|(r, &e)| r.z_score(e)))
    };

    let x = WalkerConfig::new(n, vec![0, 2])?;
    let t = 1.0;
    let spec = SimSpec {
        dynamics: Dynamics::Free,
        start: StartLaw::Fixed(x.clone()),
        rates,
        horizon: t,
    };
    let reps = estimate_many(
        |p| {
            let y = if p.tau.is_some() {
                None
            } else {
                p.final_config()
            };
            indicator(&states, y.as_ref(), 1.0)
        },
        states.len(),
        &spec,
        paths,
        opts.seed,
    )?;
    let exact: Vec<f64> = states
        .iter()
        .map(|y| noncollision_det(&x, y, rates, t))
        .collect::<Result<_>>()?;
    let free = worst_z(&reps, &exact);

    let spec = SimSpec {
        dynamics: Dynamics::Conditioned,
        start: StartLaw::Stationary { n, ell },
        rates,
        horizon: t,
    };
    let reps = estimate_many(
        |p| indicator(&states, p.final_config().as_ref(), 1.0),
        states.len(),
        &spec,
        paths,
        opts.seed.wrapping_add(1),
    )?;
    let exact: Vec<f64> = states.iter().map(stationary_prob).collect();
    let stationary = worst_z(&reps, &exact);

    let x = WalkerConfig::new(n, vec![0, 1])?;
    let spec = SimSpec {
        dynamics: Dynamics::Asep,
        start: StartLaw::Fixed(x.clone()),
        rates,
        horizon: t,
    };
    let reps = estimate_many(
        |p| {
            let m = unit_mean_martingale_at(p, rates, t).expect("exclusion path");
            indicator(&states, p.final_config().as_ref(), m)
        },
        states.len(),
        &spec,
        paths,
        opts.seed.wrapping_add(2),
    )?;
    let exact: Vec<f64> = states
        .iter()
        .map(|y| conditioned_transition(&x, y, rates, t))
        .collect::<Result<_>>()?;
    let reweighted = worst_z(&reps, &exact);

    let reps = estimate_many(
        |p| {
            vec![
                unit_mean_martingale_at(p, rates, 0.5).expect("exclusion path"),
                unit_mean_martingale_at(p, rates, 1.0).expect("exclusion path"),
            ]
        },
        2,
        &spec,
        paths,
        opts.seed.wrapping_add(3),
    )?;
    let martingale = worst_z(&reps, &[1.0, 1.0]);

    Ok(CriterionReport::new(
        8,
        vec![
            Check::new("free walkers vs non-collision determinant (z)", free, 3.0),
            Check::new(
                "conditioned walkers keep the stationary law (z)",
                stationary,
                3.0,
            ),
            Check::new(
                "reweighted exclusion vs conditioned transitions (z)",
                reweighted,
                3.0,
            ),
            Check::new("unit-mean martingale (z)", martingale, 3.0),
        ],
        format!(
            "n={n}, ell={ell}, T=1, T'=0.3, t=1, {paths} paths per estimate, seed {}",
            opts.seed
        ),
    ))
}

fn fibonacci_suite() -> Result<CriterionReport> {
    let lambdas: [f64; 14] = [
        -4.0, -1.0, -0.5, -0.3, -0.25, -0.2, -0.1, 0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0,
    ];
    let mut agreement = 0.0f64;
    for &l in &lambdas {
        for n in 0..=64usize {
            let scale = fibonacci_f(n, l.abs());
            let r = fibonacci_f(n, l);
            agreement = max_of([
                agreement,
                (r - fibonacci_closed(n, l)).abs() / scale,
                (r - fibonacci_binomial(n, l)).abs() / scale,
            ]);
        }
    }
    let mut fib_misses = 0usize;
    let (mut a, mut b) = (1u64, 1u64);
    for n in 0..=20usize {
        let want = a as f64;
        if fibonacci_f(n, 1.0) != want || fibonacci_binomial(n, 1.0) != want {
            fib_misses += 1;
        }
        (a, b) = (b, a + b);
    }
    let mut quarter_misses = 0usize;
    for n in 0..=30usize {
        let want = (n as f64 + 1.0) * 0.5f64.powi(n as i32);
        if fibonacci_f(n, -0.25) != want || fibonacci_closed(n, -0.25) != want {
            quarter_misses += 1;
        }
    }
    Ok(CriterionReport::new(
        9,
        vec![
            Check::new(
                "recurrence vs closed form and binomial sum, n <= 64",
                agreement,
                1e-12,
            ),
            Check::new(
                "f_n(1) differs from Fibonacci numbers, n <= 20",
                fib_misses as f64,
                0.0,
            ),
            Check::new(
                "f_n(-1/4) differs from (n+1)2^-n, n <= 30",
                quarter_misses as f64,
                0.0,
            ),
        ],
        "relative error is measured against f_n(|lambda|)",
    ))
}

/// Count sample-level violations of the single-arc description of
/// `{t : |1 + γe^{it} + δe^{-it}| > β}`.
fn arc_violations(beta: f64, gamma: f64, delta: f64, samples: usize) -> usize {
    let geo = arc_geometry(beta, gamma, delta);
    let angle = |k: usize| -PI + 2.0 * PI * (k as f64 + 0.5) / samples as f64;
    let above: Vec<bool> = (0..samples)
        .map(|k| {
            let w = Complex64::from_polar(1.0, angle(k));
            (1.0 + gamma * w + delta / w).norm() > beta
        })
        .collect();
    let mut bad = 0;
    let switches = (0..samples)
        .filter(|&k| above[k] != above[(k + 1) % samples])
        .count();
    if switches > 2 {
        bad += 1;
    }
    bad += (0..samples)
        .filter(|&k| above[k] != above[samples - 1 - k])
        .count();
    bad += match geo.phase {
        ArcPhase::Full => above.iter().filter(|&&a| !a).count(),
        ArcPhase::Empty => above.iter().filter(|&&a| a).count(),
        ArcPhase::Partial => {
            let tb = geo.t_beta.unwrap_or(f64::NAN);
            (0..samples)
                .filter(|&k| {
                    let t = angle(k);
                    (t.abs() - tb).abs() > 1e-3 && above[k] != (t.abs() < tb)
                })
                .count()
        }
    };
    bad
}

fn geometry(seed: u64) -> Result<CriterionReport> {
    let levels = [0.0, 0.1, 0.25, 0.4, 0.5, 0.8, 1.0];
    let mut arc_bad = 0usize;
    let mut arcs = 0usize;
    for &g in &levels {
        for &d in &levels {
            if 4.0 * g * d > 1.0 {
                continue;
            }
            for bi in 1..=30 {
                let beta = 0.1 * bi as f64;
                if g + d == 0.0 && (beta - 1.0).abs() < 1e-9 {
                    // the modulus is identically β
                    continue;
                }
                arc_bad += arc_violations(beta, g, d, 10_000);
                arcs += 1;
            }
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut drawn, mut sign_bad) = (0usize, 0usize);
    while drawn < 200 {
        let m1 = rng.gen_range(1..40usize);
        let m2 = rng.gen_range(3..40usize);
        let sector = ThetaSector::ALL[rng.gen_range(0..4)];
        let gamma: f64 = rng.gen_range(0.0..1.0);
        let ratio: f64 = rng.gen_range(0.0..1.0);
        let delta = if gamma > 0.25 {
            ratio / (4.0 * gamma)
        } else {
            ratio
        };
        let (lo, hi) = (1.0 - gamma - delta, 1.0 + gamma + delta);
        let u: f64 = rng.gen_range(0.02..0.98);
        let beta = match rng.gen_range(0..3) {
            0 if lo > 0.05 => u * lo,
            0 => continue,
            1 => lo.max(0.0) + u * (hi - lo.max(0.0)),
            _ => hi * (1.0 + u),
        };
        let shape = TorusShape::new(m1, m2)?;
        let params = Params::new(1.0, beta, gamma, delta);
        if is_singular(sector, shape, &params) {
            continue;
        }
        let Some(predicted) = predicted_sector_sign(sector, shape, beta, gamma, delta) else {
            continue;
        };
        let v = det_k_log(sector, shape, &params).phase * c_coeff(sector, shape);
        if v.im.abs() > 1e-8 || v.re.signum() != predicted {
            sign_bad += 1;
        }
        drawn += 1;
    }
    Ok(CriterionReport::new(
        10,
        vec![
            Check::new("arc property violations", arc_bad as f64, 0.0),
            Check::new("sector sign mismatches in 200 draws", sign_bad as f64, 0.0),
        ],
        format!("{arcs} (beta, gamma, delta) points at 10^4 circle samples"),
    ))
}
