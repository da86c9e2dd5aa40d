//! Snake configurations on the discrete torus `Z_{m1} × Z_{m2}`.
//!
//! A configuration assigns one of four steps to every site so that the
//! induced map `x ↦ x + step(x)` is a bijection. Steps are labelled: on
//! degenerate tori two labels may induce the same map, and they are still
//! counted as different configurations.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::Event;
use crate::fibonacci::{cyclic_fibonacci, fibonacci_f};

/// Default bound on `m1 * m2` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusShape {
    pub m1: usize,
    pub m2: usize,
}

impl TorusShape {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidShape { m1, m2 });
        }
        Ok(Self { m1, m2 })
    }

    pub fn n_sites(&self) -> usize {
        self.m1 * self.m2
    }

    /// Column-major index of a site.
    pub fn index(&self, s: Site) -> usize {
        s.x1 * self.m2 + s.x2
    }

    pub fn site(&self, idx: usize) -> Site {
        Site {
            x1: idx / self.m2,
            x2: idx % self.m2,
        }
    }

    /// Reduce an arbitrary lattice point onto the torus.
    pub fn wrap(&self, x1: i64, x2: i64) -> Site {
        Site {
            x1: x1.rem_euclid(self.m1 as i64) as usize,
            x2: x2.rem_euclid(self.m2 as i64) as usize,
        }
    }

    pub fn shift(&self, s: Site, step: Step) -> Site {
        let (d1, d2) = step.displacement();
        self.wrap(s.x1 as i64 + d1, s.x2 as i64 + d2)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.n_sites()).map(move |i| self.site(i))
    }

    /// Steps admissible on this torus (no Down when `m2 = 2`).
    pub fn allowed_steps(&self) -> &'static [Step] {
        if self.m2 == 2 {
            &[Step::Fixed, Step::Right, Step::Up]
        } else {
            &Step::ALL
        }
    }

    pub fn allows(&self, step: Step) -> bool {
        !(self.m2 == 2 && step == Step::Down)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x1: usize,
    pub x2: usize,
}

impl Site {
    pub fn new(x1: usize, x2: usize) -> Self {
        Self { x1, x2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Fixed,
    Right,
    Up,
    Down,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::Fixed, Step::Right, Step::Up, Step::Down];

    pub fn displacement(self) -> (i64, i64) {
        match self {
            Step::Fixed => (0, 0),
            Step::Right => (1, 0),
            Step::Up => (0, 1),
            Step::Down => (0, -1),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Step::Fixed => '.',
            Step::Right => '>',
            Step::Up => '^',
            Step::Down => 'v',
        }
    }

    pub fn from_symbol(c: char) -> Option<Step> {
        match c {
            '.' => Some(Step::Fixed),
            '>' => Some(Step::Right),
            '^' => Some(Step::Up),
            'v' => Some(Step::Down),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Option<Step> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" | "f" | "0" => Some(Step::Fixed),
            "right" | "r" | "e1" => Some(Step::Right),
            "up" | "u" | "e2" => Some(Step::Up),
            "down" | "d" | "-e2" => Some(Step::Down),
            _ => None,
        }
    }
}

/// Weight quadruple `(α, β, γ, δ)` for fixed, right, up and down steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Params {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    pub fn probabilistic(&self) -> bool {
        self.alpha * self.alpha - 4.0 * self.gamma * self.delta >= 0.0
    }

    /// Parameters as seen on a given torus: δ is dropped when `m2 = 2`.
    pub fn effective(&self, shape: TorusShape) -> Params {
        if shape.m2 == 2 {
            Params {
                delta: 0.0,
                ..*self
            }
        } else {
            *self
        }
    }

    pub fn step_weight(&self, step: Step) -> f64 {
        match step {
            Step::Fixed => self.alpha,
            Step::Right => self.beta,
            Step::Up => self.gamma,
            Step::Down => self.delta,
        }
    }

    /// `λ = -γδ/α²`, the argument of the gap polynomials.
    pub fn nest_lambda(&self) -> f64 {
        -self.gamma * self.delta / (self.alpha * self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct SnakeConfig {
    shape: TorusShape,
    steps: Vec<Step>,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    shape: TorusShape,
    steps: Vec<Step>,
}

impl TryFrom<RawConfig> for SnakeConfig {
    type Error = Error;
    fn try_from(raw: RawConfig) -> Result<Self> {
        SnakeConfig::new(raw.shape, raw.steps)
    }
}

impl From<SnakeConfig> for RawConfig {
    fn from(c: SnakeConfig) -> Self {
        RawConfig {
            shape: c.shape,
            steps: c.steps,
        }
    }
}

impl SnakeConfig {
    /// Build from a column-major step list, checking the bijection.
    pub fn new(shape: TorusShape, steps: Vec<Step>) -> Result<Self> {
        TorusShape::new(shape.m1, shape.m2)?;
        if steps.len() != shape.n_sites() {
            return Err(Error::StepCount {
                expected: shape.n_sites(),
                got: steps.len(),
            });
        }
        if steps.iter().any(|&s| !shape.allows(s)) {
            return Err(Error::DownOnPeriodTwo);
        }
        let mut hit = vec![false; steps.len()];
        for (i, &st) in steps.iter().enumerate() {
            let t = shape.index(shape.shift(shape.site(i), st));
            if hit[t] {
                return Err(Error::NotBijective);
            }
            hit[t] = true;
        }
        Ok(Self { shape, steps })
    }

    pub fn all_fixed(shape: TorusShape) -> Self {
        Self {
            shape,
            steps: vec![Step::Fixed; shape.n_sites()],
        }
    }

    pub fn shape(&self) -> TorusShape {
        self.shape
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn step(&self, s: Site) -> Step {
        self.steps[self.shape.index(s)]
    }

    pub fn image(&self, s: Site) -> Site {
        self.shape.shift(s, self.step(s))
    }

    fn is_snakelet_base(&self, s: Site) -> bool {
        self.shape.m2 >= 3
            && self.step(s) == Step::Up
            && self.step(self.shape.shift(s, Step::Up)) == Step::Down
    }

    /// Number of two-cycles (Up at `x`, Down at `x + e2`).
    pub fn snakelet_count(&self) -> usize {
        self.shape
            .sites()
            .filter(|&s| self.is_snakelet_base(s))
            .count()
    }

    pub fn is_pure(&self) -> bool {
        self.snakelet_count() == 0
    }

    pub fn counts(&self) -> StepCounts {
        let mut c = StepCounts::default();
        for &s in &self.steps {
            match s {
                Step::Fixed => c.fixed += 1,
                Step::Right => c.right += 1,
                Step::Up => c.up += 1,
                Step::Down => c.down += 1,
            }
        }
        c
    }

    /// Sign of the permutation `x ↦ σx`: `-1` to the number of even cycles.
    pub fn permutation_sign(&self) -> i8 {
        let n = self.shape.n_sites();
        let mut seen = vec![false; n];
        let mut sign = 1;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut cur = self.shape.site(start);
            while !seen[self.shape.index(cur)] {
                seen[self.shape.index(cur)] = true;
                len += 1;
                cur = self.image(cur);
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    /// Right steps in each column.
    pub fn column_right_counts(&self) -> Vec<usize> {
        (0..self.shape.m1)
            .map(|x1| {
                (0..self.shape.m2)
                    .filter(|&x2| self.step(Site::new(x1, x2)) == Step::Right)
                    .count()
            })
            .collect()
    }

    /// Text grid, top row is `x2 = m2 - 1`.
    pub fn to_grid(&self) -> String {
        let mut out = String::new();
        for x2 in (0..self.shape.m2).rev() {
            for x1 in 0..self.shape.m1 {
                out.push(self.step(Site::new(x1, x2)).symbol());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_grid(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let m2 = rows.len();
        let m1 = rows.first().map(|r| r.trim().chars().count()).unwrap_or(0);
        let shape = TorusShape::new(m1, m2)?;
        let mut steps = vec![Step::Fixed; shape.n_sites()];
        for (r, row) in rows.iter().enumerate() {
            let x2 = m2 - 1 - r;
            let chars: Vec<char> = row.trim().chars().collect();
            if chars.len() != m1 {
                return Err(Error::Parse(format!(
                    "row {r} has {} cells, expected {m1}",
                    chars.len()
                )));
            }
            for (x1, &c) in chars.iter().enumerate() {
                let st = Step::from_symbol(c)
                    .ok_or_else(|| Error::Parse(format!("unknown cell symbol {c:?}")))?;
                steps[shape.index(Site::new(x1, x2))] = st;
            }
        }
        SnakeConfig::new(shape, steps)
    }
}

impl fmt::Display for SnakeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_grid())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepCounts {
    pub fixed: usize,
    pub right: usize,
    pub up: usize,
    pub down: usize,
}

/// Winding of a cycle: horizontal and vertical wraps per traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Winding {
    pub q1: i64,
    pub q2: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleData {
    /// Non-trivial cycles that are not snakelets.
    pub long_cycles: usize,
    pub snakelets: usize,
    /// Winding shared by the long cycles; absent when there are none.
    pub winding: Option<Winding>,
    /// Winding of every long cycle, in discovery order.
    pub cycle_windings: Vec<Winding>,
    /// Whether all long cycles share one winding.
    pub coherent: bool,
    /// Occupation number: Right steps per column.
    pub occupation: usize,
    pub counts: StepCounts,
}

/// Cycle decomposition with windings counted as signed boundary crossings.
pub fn cycle_data(config: &SnakeConfig) -> CycleData {
    let shape = config.shape();
    let n = shape.n_sites();
    let mut seen = vec![false; n];
    let mut windings = Vec::new();
    let mut snakelets = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let s0 = shape.site(start);
        if config.step(s0) == Step::Fixed {
            seen[start] = true;
            continue;
        }
        let (mut q1, mut q2, mut len) = (0i64, 0i64, 0usize);
        let mut cur = s0;
        loop {
            let i = shape.index(cur);
            if seen[i] {
                break;
            }
            seen[i] = true;
            len += 1;
            match config.step(cur) {
                Step::Right if cur.x1 == shape.m1 - 1 => q1 += 1,
                Step::Up if cur.x2 == shape.m2 - 1 => q2 += 1,
                Step::Down if cur.x2 == 0 => q2 -= 1,
                _ => {}
            }
            cur = config.image(cur);
        }
        let is_snakelet = len == 2
            && (config.is_snakelet_base(s0)
                || config.is_snakelet_base(shape.shift(s0, Step::Down)));
        if is_snakelet {
            snakelets += 1;
        } else {
            windings.push(Winding { q1, q2 });
        }
    }
    let coherent = windings.windows(2).all(|w| w[0] == w[1]);
    CycleData {
        long_cycles: windings.len(),
        snakelets,
        winding: windings.first().copied(),
        coherent,
        occupation: config.column_right_counts()[0],
        counts: config.counts(),
        cycle_windings: windings,
    }
}

/// A maximal vertical run of fixed sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub column: usize,
    pub start: usize,
    pub len: usize,
    /// The whole column is fixed, so the run closes up on itself.
    pub wrapped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GapDecomposition {
    pub gaps: Vec<Gap>,
}

impl GapDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.gaps.iter().map(|g| g.len).collect();
        v.sort_unstable();
        v
    }

    /// `J(σ)`: product of gap polynomials at `λ`.
    pub fn nest_factor(&self, lambda: f64) -> f64 {
        self.gaps
            .iter()
            .map(|g| {
                if g.wrapped {
                    cyclic_fibonacci(g.len, lambda)
                } else {
                    fibonacci_f(g.len, lambda)
                }
            })
            .product()
    }
}

pub fn vertical_gaps(config: &SnakeConfig) -> Result<GapDecomposition> {
    if !config.is_pure() {
        return Err(Error::NotPure);
    }
    let shape = config.shape();
    let m2 = shape.m2;
    let mut gaps = Vec::new();
    for x1 in 0..shape.m1 {
        let fixed: Vec<bool> = (0..m2)
            .map(|x2| config.step(Site::new(x1, x2)) == Step::Fixed)
            .collect();
        if fixed.iter().all(|&f| f) {
            gaps.push(Gap {
                column: x1,
                start: 0,
                len: m2,
                wrapped: true,
            });
            continue;
        }
        let anchor = fixed.iter().position(|&f| !f).unwrap();
        let mut run: Option<(usize, usize)> = None;
        for k in 1..=m2 {
            let x2 = (anchor + k) % m2;
            if fixed[x2] {
                run = Some(match run {
                    Some((s, l)) => (s, l + 1),
                    None => (x2, 1),
                });
            } else if let Some((s, l)) = run.take() {
                gaps.push(Gap {
                    column: x1,
                    start: s,
                    len: l,
                    wrapped: false,
                });
            }
        }
    }
    Ok(GapDecomposition { gaps })
}

/// Signed weight `(-1)^N α^F β^R γ^U δ^D`.
pub fn weight(config: &SnakeConfig, params: &Params) -> f64 {
    let c = config.counts();
    let sign = if config.snakelet_count().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    sign * params.alpha.powi(c.fixed as i32)
        * params.beta.powi(c.right as i32)
        * params.gamma.powi(c.up as i32)
        * params.delta.powi(c.down as i32)
}

/// `w(σ) J(σ)`: the total weight of all generalised configurations that
/// project onto the pure configuration `σ`.
pub fn coarse_weight(config: &SnakeConfig, params: &Params) -> Result<f64> {
    let gaps = vertical_gaps(config)?;
    let p = params.effective(config.shape());
    let w = weight(config, &p);
    if gaps.gaps.is_empty() {
        return Ok(w);
    }
    if p.alpha == 0.0 {
        if p.gamma * p.delta == 0.0 {
            return Ok(w);
        }
        return Err(Error::UnsupportedParameters(
            "alpha = 0 with gamma*delta > 0 and fixed sites present".into(),
        ));
    }
    Ok(w * gaps.nest_factor(p.nest_lambda()))
}

/// Delete every two-cycle.
pub fn shape_projection(config: &SnakeConfig) -> SnakeConfig {
    let shape = config.shape();
    let mut steps = config.steps().to_vec();
    for s in shape.sites() {
        if config.is_snakelet_base(s) {
            steps[shape.index(s)] = Step::Fixed;
            steps[shape.index(shape.shift(s, Step::Up))] = Step::Fixed;
        }
    }
    SnakeConfig { shape, steps }
}

/// All generalised configurations projecting onto a pure `config`,
/// obtained by placing disjoint snakelets on vertically adjacent fixed pairs.
pub fn fiber(config: &SnakeConfig) -> Result<Vec<SnakeConfig>> {
    if !config.is_pure() {
        return Err(Error::NotPure);
    }
    let shape = config.shape();
    let mut out = Vec::new();
    if shape.m2 < 3 {
        out.push(config.clone());
        return Ok(out);
    }
    let pairs: Vec<(usize, usize)> = shape
        .sites()
        .filter_map(|s| {
            let t = shape.shift(s, Step::Up);
            (config.step(s) == Step::Fixed && config.step(t) == Step::Fixed)
                .then(|| (shape.index(s), shape.index(t)))
        })
        .collect();
    fn rec(
        k: usize,
        pairs: &[(usize, usize)],
        used: &mut Vec<bool>,
        steps: &mut Vec<Step>,
        shape: TorusShape,
        out: &mut Vec<SnakeConfig>,
    ) {
        if k == pairs.len() {
            out.push(SnakeConfig {
                shape,
                steps: steps.clone(),
            });
            return;
        }
        rec(k + 1, pairs, used, steps, shape, out);
        let (a, b) = pairs[k];
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            steps[a] = Step::Up;
            steps[b] = Step::Down;
            rec(k + 1, pairs, used, steps, shape, out);
            steps[a] = Step::Fixed;
            steps[b] = Step::Fixed;
            used[a] = false;
            used[b] = false;
        }
    }
    let mut used = vec![false; shape.n_sites()];
    let mut steps = config.steps().to_vec();
    rec(0, &pairs, &mut used, &mut steps, shape, &mut out);
    Ok(out)
}

/// `Σ_{σ̄ ∈ sh⁻¹(σ)} w(σ̄)` by explicit snakelet placement.
pub fn nest_sum(config: &SnakeConfig, params: &Params) -> Result<f64> {
    let p = params.effective(config.shape());
    Ok(fiber(config)?.iter().map(|c| weight(c, &p)).sum())
}

/// Backtracking enumerator of configurations in deterministic order.
pub struct ConfigIter {
    shape: TorusShape,
    pure_only: bool,
    allowed: &'static [Step],
    targets: Vec<Vec<usize>>,
    deadlines: Vec<Vec<usize>>,
    used: Vec<bool>,
    choice: Vec<Option<usize>>,
    depth: usize,
    done: bool,
}

impl ConfigIter {
    fn new(shape: TorusShape, pure_only: bool) -> Self {
        let n = shape.n_sites();
        let allowed = shape.allowed_steps();
        let targets: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                allowed
                    .iter()
                    .map(|&st| shape.index(shape.shift(shape.site(i), st)))
                    .collect()
            })
            .collect();
        let mut last_source = vec![0usize; n];
        for (i, ts) in targets.iter().enumerate() {
            for &t in ts {
                last_source[t] = last_source[t].max(i);
            }
        }
        let mut deadlines = vec![Vec::new(); n];
        for (t, &i) in last_source.iter().enumerate() {
            deadlines[i].push(t);
        }
        Self {
            shape,
            pure_only,
            allowed,
            targets,
            deadlines,
            used: vec![false; n],
            choice: vec![None; n],
            depth: 0,
            done: false,
        }
    }

    fn creates_snakelet(&self, d: usize, step: Step) -> bool {
        if !self.pure_only || self.shape.m2 < 3 {
            return false;
        }
        let s = self.shape.site(d);
        let (other, want) = match step {
            Step::Up => (self.shape.shift(s, Step::Up), Step::Down),
            Step::Down => (self.shape.shift(s, Step::Down), Step::Up),
            _ => return false,
        };
        let j = self.shape.index(other);
        j < d && self.choice[j].map(|c| self.allowed[c]) == Some(want)
    }
}

impl Iterator for ConfigIter {
    type Item = SnakeConfig;

    fn next(&mut self) -> Option<SnakeConfig> {
        let n = self.shape.n_sites();
        loop {
            if self.done {
                return None;
            }
            if self.depth == n {
                let steps = self
                    .choice
                    .iter()
                    .map(|c| self.allowed[c.unwrap()])
                    .collect();
                self.depth = n - 1;
                return Some(SnakeConfig {
                    shape: self.shape,
                    steps,
                });
            }
            let d = self.depth;
            let start = match self.choice[d] {
                Some(c) => {
                    self.used[self.targets[d][c]] = false;
                    c + 1
                }
                None => 0,
            };
            let next = (start..self.allowed.len()).find(|&c| {
                !self.used[self.targets[d][c]] && !self.creates_snakelet(d, self.allowed[c])
            });
            match next {
                Some(c) => {
                    self.choice[d] = Some(c);
                    self.used[self.targets[d][c]] = true;
                    if self.deadlines[d].iter().all(|&t| self.used[t]) {
                        self.depth += 1;
                    }
                }
                None => {
                    self.choice[d] = None;
                    if d == 0 {
                        self.done = true;
                    } else {
                        self.depth -= 1;
                    }
                }
            }
        }
    }
}

/// Stream every configuration on `shape`, optionally only pure ones.
pub fn enumerate_configs(shape: TorusShape, pure_only: bool) -> Result<ConfigIter> {
    enumerate_configs_capped(shape, pure_only, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_configs_capped(
    shape: TorusShape,
    pure_only: bool,
    cap: usize,
) -> Result<ConfigIter> {
    TorusShape::new(shape.m1, shape.m2)?;
    if shape.n_sites() > cap {
        return Err(Error::EnumerationTooLarge {
            sites: shape.n_sites(),
            cap,
        });
    }
    Ok(ConfigIter::new(shape, pure_only))
}

/// Brute-force partition function as `(Σ_σ̄ w(σ̄), Σ_σ w(σ) J(σ))`.
pub fn brute_force_partition_pair(
    shape: TorusShape,
    params: &Params,
    cap: usize,
) -> Result<(f64, f64)> {
    let p = params.effective(shape);
    let generalised = enumerate_configs_capped(shape, false, cap)?
        .map(|c| weight(&c, &p))
        .sum();
    let mut coarse = 0.0;
    for c in enumerate_configs_capped(shape, true, cap)? {
        coarse += coarse_weight(&c, &p)?;
    }
    Ok((generalised, coarse))
}

/// Brute-force partition function; both sums are computed and must agree.
pub fn brute_force_partition(shape: TorusShape, params: &Params) -> Result<f64> {
    let (g, c) = brute_force_partition_pair(shape, params, DEFAULT_ENUMERATION_CAP)?;
    assert!(
        (g - c).abs() <= 1e-9 * g.abs().max(1.0),
        "generalised sum {g} and coarse sum {c} disagree"
    );
    Ok(g)
}

/// The pure measure `P_m` held as an explicit list of weighted
/// configurations, for exhaustive event probabilities.
#[derive(Debug, Clone)]
pub struct PureMeasure {
    configs: Vec<(SnakeConfig, f64)>,
    total: f64,
}

impl PureMeasure {
    pub fn new(shape: TorusShape, params: &Params, cap: usize) -> Result<Self> {
        let p = params.effective(shape);
        let mut configs = Vec::new();
        let mut total = 0.0;
        for c in enumerate_configs_capped(shape, true, cap)? {
            let w = coarse_weight(&c, &p)?;
            total += w;
            configs.push((c, w));
        }
        if total == 0.0 {
            return Err(Error::ZeroPartition);
        }
        Ok(Self { configs, total })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Weighted frequency of configurations satisfying every event; sites
    /// are reduced modulo the periods.
    pub fn probability(&self, events: &[Event]) -> f64 {
        let hit: f64 = self
            .configs
            .iter()
            .filter(|(c, _)| {
                let s = c.shape();
                events.iter().all(|e| c.step(s.wrap(e.x1, e.x2)) == e.step)
            })
            .map(|(_, w)| w)
            .sum();
        hit / self.total
    }
}

/// Generalised configurations grouped by `(F, R, U, D, N)`, so that the
/// brute-force partition function can be evaluated at many parameters
/// after a single enumeration.
#[derive(Debug, Clone, Default)]
pub struct WeightPolynomial {
    pub shape: Option<TorusShape>,
    pub terms: HashMap<(usize, usize, usize, usize, usize), u64>,
}

impl WeightPolynomial {
    pub fn build(shape: TorusShape, cap: usize) -> Result<Self> {
        let mut terms = HashMap::new();
        for c in enumerate_configs_capped(shape, false, cap)? {
            let k = c.counts();
            *terms
                .entry((k.fixed, k.right, k.up, k.down, c.snakelet_count()))
                .or_insert(0) += 1;
        }
        Ok(Self {
            shape: Some(shape),
            terms,
        })
    }

    pub fn evaluate(&self, params: &Params) -> f64 {
        let p = match self.shape {
            Some(s) => params.effective(s),
            None => *params,
        };
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort();
        keys.into_iter()
            .map(|(&(f, r, u, d, nn), &count)| {
                let sign = if nn % 2 == 0 { 1.0 } else { -1.0 };
                sign * count as f64
                    * p.alpha.powi(f as i32)
                    * p.beta.powi(r as i32)
                    * p.gamma.powi(u as i32)
                    * p.delta.powi(d as i32)
            })
            .sum()
    }

    pub fn n_configs(&self) -> u64 {
        self.terms.values().sum()
    }
}

/// Pure configurations grouped by step counts and gap structure; evaluates
/// `Σ_σ w(σ) J(σ)` at any parameters after one enumeration.
#[derive(Debug, Clone, Default)]
pub struct CoarsePolynomial {
    pub shape: Option<TorusShape>,
    pub terms: HashMap<(StepCountsKey, Vec<usize>, usize), u64>,
}

pub type StepCountsKey = (usize, usize, usize, usize);

impl CoarsePolynomial {
    pub fn build(shape: TorusShape, cap: usize) -> Result<Self> {
        let mut terms = HashMap::new();
        for c in enumerate_configs_capped(shape, true, cap)? {
            let k = c.counts();
            let gaps = vertical_gaps(&c)?;
            let wrapped = gaps.gaps.iter().filter(|g| g.wrapped).count();
            let open: Vec<usize> = {
                let mut v: Vec<usize> = gaps
                    .gaps
                    .iter()
                    .filter(|g| !g.wrapped)
                    .map(|g| g.len)
                    .collect();
                v.sort_unstable();
                v
            };
            *terms
                .entry(((k.fixed, k.right, k.up, k.down), open, wrapped))
                .or_insert(0) += 1;
        }
        Ok(Self {
            shape: Some(shape),
            terms,
        })
    }

    pub fn evaluate(&self, params: &Params) -> f64 {
        let shape = self.shape.expect("built polynomial");
        let p = params.effective(shape);
        let lambda = if p.gamma * p.delta == 0.0 {
            0.0
        } else {
            p.nest_lambda()
        };
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort();
        keys.into_iter()
            .map(|(((f, r, u, d), open, wrapped), &count)| {
                let j: f64 = open
                    .iter()
                    .map(|&g| fibonacci_f(g, lambda))
                    .product::<f64>()
                    * cyclic_fibonacci(shape.m2, lambda).powi(*wrapped as i32);
                count as f64
                    * j
                    * p.alpha.powi(*f as i32)
                    * p.beta.powi(*r as i32)
                    * p.gamma.powi(*u as i32)
                    * p.delta.powi(*d as i32)
            })
            .sum()
    }
}
