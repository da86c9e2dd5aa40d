//! Twisted Kasteleyn operators on the torus and the determinantal
//! correlation engine built from them.
//!
//! Determinants are kept as a log-modulus and a unit phase so that tori with
//! thousands of sites can be handled without overflow.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{expand_events, EventQuery, Periods, RWord};
use crate::lattice::{Params, Site, Step, StepCounts, TorusShape};
use crate::linalg::det_complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThetaSector {
    pub theta1: u8,
    pub theta2: u8,
}

impl ThetaSector {
    pub const ALL: [ThetaSector; 4] = [
        ThetaSector {
            theta1: 0,
            theta2: 0,
        },
        ThetaSector {
            theta1: 0,
            theta2: 1,
        },
        ThetaSector {
            theta1: 1,
            theta2: 0,
        },
        ThetaSector {
            theta1: 1,
            theta2: 1,
        },
    ];

    pub fn new(theta1: u8, theta2: u8) -> Self {
        assert!(theta1 < 2 && theta2 < 2);
        Self { theta1, theta2 }
    }
}

/// `e^{iπ k / m}` with `k` reduced modulo `2m` before the trig call.
pub(crate) fn phase(k: i64, m: usize) -> Complex64 {
    let m2 = 2 * m as i64;
    let r = k.rem_euclid(m2);
    Complex64::from_polar(1.0, PI * r as f64 / m as f64)
}

/// Twist multiplying the edge of a given step in sector `θ`.
pub fn step_twist(sector: ThetaSector, shape: TorusShape, step: Step) -> Complex64 {
    match step {
        Step::Fixed => Complex64::new(1.0, 0.0),
        Step::Right => phase(sector.theta1 as i64, shape.m1),
        Step::Up => phase(sector.theta2 as i64, shape.m2),
        Step::Down => phase(-(sector.theta2 as i64), shape.m2),
    }
}

/// Entry `K_θ(x, y)`; contributions of steps with coinciding targets add.
pub fn k_entry(
    sector: ThetaSector,
    shape: TorusShape,
    params: &Params,
    x: Site,
    y: Site,
) -> Complex64 {
    let p = params.effective(shape);
    shape
        .allowed_steps()
        .iter()
        .filter(|&&st| shape.shift(x, st) == y)
        .map(|&st| step_twist(sector, shape, st) * p.step_weight(st))
        .sum()
}

/// Dense row-major `K_θ` in column-major site order.
pub fn k_matrix(sector: ThetaSector, shape: TorusShape, params: &Params) -> Vec<Complex64> {
    let n = shape.n_sites();
    let p = params.effective(shape);
    let mut k = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let x = shape.site(i);
        for &st in shape.allowed_steps() {
            let j = shape.index(shape.shift(x, st));
            k[i * n + j] += step_twist(sector, shape, st) * p.step_weight(st);
        }
    }
    k
}

/// The roots `z^{m} = (-1)^θ`, i.e. `e^{iπ(2j+θ)/m}`.
pub fn twisted_roots(theta: u8, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|j| phase(2 * j as i64 + theta as i64, m))
        .collect()
}

/// `α + βz + γw + δ/w`.
pub fn symbol(params: &Params, z: Complex64, w: Complex64) -> Complex64 {
    params.alpha + params.beta * z + params.gamma * w + params.delta / w
}

/// A complex number stored as `exp(log_abs) · phase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_abs: f64,
    pub phase: Complex64,
}

impl LogComplex {
    pub fn zero() -> Self {
        Self {
            log_abs: f64::NEG_INFINITY,
            phase: Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.log_abs.exp()
        }
    }
}

/// `det K_θ` as the product of its eigenvalues, in log form.
pub fn det_k_log(sector: ThetaSector, shape: TorusShape, params: &Params) -> LogComplex {
    let p = params.effective(shape);
    let zs = twisted_roots(sector.theta1, shape.m1);
    let ws = twisted_roots(sector.theta2, shape.m2);
    let mut log_abs = 0.0;
    let mut ph = Complex64::new(1.0, 0.0);
    for &z in &zs {
        for &w in &ws {
            let e = symbol(&p, z, w);
            let r = e.norm();
            if r == 0.0 {
                return LogComplex::zero();
            }
            log_abs += r.ln();
            ph *= e / r;
            ph /= ph.norm();
        }
    }
    LogComplex { log_abs, phase: ph }
}

pub fn det_k(sector: ThetaSector, shape: TorusShape, params: &Params) -> Complex64 {
    det_k_log(sector, shape, params).to_complex()
}

/// `det K_θ` by dense LU; a test oracle for small tori.
pub fn det_k_dense(sector: ThetaSector, shape: TorusShape, params: &Params) -> Complex64 {
    det_complex(k_matrix(sector, shape, params), shape.n_sites())
}

/// `C_θ = ½ (-1)^{(θ1+m1+1)(θ2+m2+1)}`.
pub fn c_coeff(sector: ThetaSector, shape: TorusShape) -> f64 {
    let e = (sector.theta1 as usize + shape.m1 + 1) * (sector.theta2 as usize + shape.m2 + 1);
    if e.is_multiple_of(2) {
        0.5
    } else {
        -0.5
    }
}

/// `Σ_θ C_θ exp(πi [θ1 R/m1 + θ2 (U - D)/m2])` for a configuration with the
/// given step counts; equals `(-1)^N sgn(σ̄)`.
pub fn sector_sign_sum(shape: TorusShape, counts: StepCounts) -> Complex64 {
    ThetaSector::ALL
        .iter()
        .map(|&t| {
            let arg = t.theta1 as f64 * counts.right as f64 / shape.m1 as f64
                + t.theta2 as f64 * (counts.up as f64 - counts.down as f64) / shape.m2 as f64;
            c_coeff(t, shape) * Complex64::from_polar(1.0, PI * arg)
        })
        .sum()
}

/// Whether some eigenvalue of `K_θ` is below `1e-12` times the largest one.
pub fn is_singular(sector: ThetaSector, shape: TorusShape, params: &Params) -> bool {
    let p = params.effective(shape);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for z in twisted_roots(sector.theta1, shape.m1) {
        for w in twisted_roots(sector.theta2, shape.m2) {
            let r = symbol(&p, z, w).norm();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    lo <= 1e-12 * hi
}

fn assert_real(z: Complex64) -> Result<f64> {
    if z.im.abs() <= 1e-9 * (1.0 + z.re.abs()) {
        Ok(z.re)
    } else {
        Err(Error::NonReal { re: z.re, im: z.im })
    }
}

/// The four sector determinants with their signs, normalised together.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorWeights {
    pub shape: TorusShape,
    pub dets: [LogComplex; 4],
    pub c: [f64; 4],
    /// `Σ_θ C_θ det K_θ` in log form.
    pub z: LogComplex,
}

impl SectorWeights {
    pub fn compute(shape: TorusShape, params: &Params) -> Result<Self> {
        let dets = ThetaSector::ALL.map(|s| det_k_log(s, shape, params));
        let c = ThetaSector::ALL.map(|s| c_coeff(s, shape));
        let top = dets
            .iter()
            .map(|d| d.log_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Ok(Self {
                shape,
                dets,
                c,
                z: LogComplex::zero(),
            });
        }
        let sum: Complex64 = (0..4)
            .filter(|&i| !dets[i].is_zero())
            .map(|i| c[i] * dets[i].phase * (dets[i].log_abs - top).exp())
            .sum();
        let re = assert_real(sum)?;
        let z = if re == 0.0 {
            LogComplex::zero()
        } else {
            LogComplex {
                log_abs: re.abs().ln() + top,
                phase: Complex64::new(re.signum(), 0.0),
            }
        };
        Ok(Self { shape, dets, c, z })
    }

    /// `C_θ det K_θ / Z` for the sector with index `i` in [`ThetaSector::ALL`].
    pub fn lambda(&self, i: usize) -> Complex64 {
        if self.dets[i].is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.c[i] * self.dets[i].phase / self.z.phase
            * (self.dets[i].log_abs - self.z.log_abs).exp()
    }

    /// `Z_{θ2} / Z`.
    pub fn theta2_share(&self, theta2: u8) -> f64 {
        (0..4)
            .filter(|&i| ThetaSector::ALL[i].theta2 == theta2)
            .map(|i| self.lambda(i))
            .sum::<Complex64>()
            .re
    }
}

/// `Z_m = Σ_θ C_θ det K_θ`.
pub fn partition_function(shape: TorusShape, params: &Params) -> Result<f64> {
    let w = SectorWeights::compute(shape, params)?;
    Ok(w.z.to_complex().re)
}

/// `Z_{θ2,m} = Σ_{θ1} C_θ det K_θ`.
pub fn sector_partition(theta2: u8, shape: TorusShape, params: &Params) -> Result<f64> {
    let s: Complex64 = ThetaSector::ALL
        .iter()
        .filter(|s| s.theta2 == theta2)
        .map(|&s| c_coeff(s, shape) * det_k(s, shape, params))
        .sum();
    assert_real(s)
}

/// Precomputed inverse-symbol grid for one sector; evaluates `H_θ`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub sector: ThetaSector,
    pub shape: TorusShape,
    pub params: Params,
    inv: Vec<Complex64>,
}

impl KernelTable {
    pub fn new(sector: ThetaSector, shape: TorusShape, params: &Params) -> Result<Self> {
        let p = params.effective(shape);
        if is_singular(sector, shape, &p) {
            return Err(Error::SingularSector {
                theta1: sector.theta1,
                theta2: sector.theta2,
            });
        }
        let zs = twisted_roots(sector.theta1, shape.m1);
        let ws = twisted_roots(sector.theta2, shape.m2);
        let mut inv = Vec::with_capacity(shape.n_sites());
        for &z in &zs {
            for &w in &ws {
                inv.push(1.0 / symbol(&p, z, w));
            }
        }
        Ok(Self {
            sector,
            shape,
            params: p,
            inv,
        })
    }

    /// `H_θ(x, x') = (1/m1m2) Σ z^{-(x'1-x1)} w^{-(x'2-x2)} / (α+βz+γw+δ/w)`
    /// for unreduced lattice points.
    pub fn h(&self, x: (i64, i64), xp: (i64, i64)) -> Complex64 {
        let (m1, m2) = (self.shape.m1, self.shape.m2);
        let d1 = xp.0 - x.0;
        let d2 = xp.1 - x.1;
        let zp: Vec<Complex64> = (0..m1)
            .map(|j| phase(-(2 * j as i64 + self.sector.theta1 as i64) * d1, m1))
            .collect();
        let wp: Vec<Complex64> = (0..m2)
            .map(|k| phase(-(2 * k as i64 + self.sector.theta2 as i64) * d2, m2))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (j, zj) in zp.iter().enumerate() {
            let row = &self.inv[j * m2..(j + 1) * m2];
            let inner: Complex64 = row.iter().zip(&wp).map(|(a, b)| a * b).sum();
            total += zj * inner;
        }
        total / (m1 * m2) as f64
    }

    /// The true inverse `K_θ^{-1}(x, x')` on canonical sites.
    pub fn k_inverse(&self, x: Site, xp: Site) -> Complex64 {
        let d1 = xp.x1 as i64 - x.x1 as i64;
        let d2 = xp.x2 as i64 - x.x2 as i64;
        let g = phase(self.sector.theta1 as i64 * d1, self.shape.m1)
            * phase(self.sector.theta2 as i64 * d2, self.shape.m2);
        g * self.h((x.x1 as i64, x.x2 as i64), (xp.x1 as i64, xp.x2 as i64))
    }

    /// `G(x, y) = β H(x + e1, y)`.
    pub fn g(&self, x: (i64, i64), y: (i64, i64)) -> Complex64 {
        self.params.beta * self.h((x.0 + 1, x.1), y)
    }
}

/// `∏ K_00(x^i, x^i+f^i) · det[H_θ(x^i + f^i, x^j)]`.
pub fn signed_correlation(table: &KernelTable, word: &RWord) -> Complex64 {
    let k = word.factors.len();
    let mut pref = Complex64::new(1.0, 0.0);
    for f in &word.factors {
        pref *= table.params.step_weight(f.step);
    }
    if k == 0 || pref == Complex64::new(0.0, 0.0) {
        return pref;
    }
    let mut m = Vec::with_capacity(k * k);
    for fi in &word.factors {
        for fj in &word.factors {
            m.push(table.h(fi.target(), (fj.x1, fj.x2)));
        }
    }
    pref * det_complex(m, k)
}

/// `Σ_{σ̄ ⊇ word} sgn(σ̄) ∏_x K_θ(x, σ̄x)`, computed as the determinant of
/// `K_θ` with the rows of the constrained sites replaced by their single
/// labelled entry. Valid also when `K_θ` is singular.
pub fn constrained_det(
    sector: ThetaSector,
    shape: TorusShape,
    params: &Params,
    word: &RWord,
) -> Complex64 {
    let n = shape.n_sites();
    let p = params.effective(shape);
    let mut k = k_matrix(sector, shape, &p);
    for f in &word.factors {
        let x = shape.wrap(f.x1, f.x2);
        let i = shape.index(x);
        for j in 0..n {
            k[i * n + j] = Complex64::new(0.0, 0.0);
        }
        let j = shape.index(shape.shift(x, f.step));
        k[i * n + j] = step_twist(sector, shape, f.step) * p.step_weight(f.step);
    }
    det_complex(k, n)
}

/// Largest torus on which a singular sector is handled by a dense determinant.
const DENSE_FALLBACK_SITES: usize = 400;

/// Per-sector contributions `λ_θ · E_θ[word]` for a batch of words.
fn sector_terms(
    shape: TorusShape,
    params: &Params,
    weights: &SectorWeights,
    words: &[RWord],
    sectors: &[usize],
) -> Result<Vec<Vec<Complex64>>> {
    let mut out = Vec::new();
    for &i in sectors {
        let sector = ThetaSector::ALL[i];
        let lam = weights.lambda(i);
        let terms = match KernelTable::new(sector, shape, params) {
            Ok(t) => words
                .iter()
                .map(|w| lam * signed_correlation(&t, w))
                .collect(),
            Err(Error::SingularSector { .. }) if shape.n_sites() <= DENSE_FALLBACK_SITES => {
                let scale = weights.c[i] / weights.z.phase * (-weights.z.log_abs).exp();
                words
                    .iter()
                    .map(|w| scale * constrained_det(sector, shape, params, w))
                    .collect()
            }
            Err(e) => return Err(e),
        };
        out.push(terms);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorReport {
    pub sector: ThetaSector,
    pub c: f64,
    pub log_abs_det: f64,
    pub det_phase: Complex64,
    pub lambda: Complex64,
    pub contribution: Complex64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub value: f64,
    pub sectors: Vec<SectorReport>,
    pub words: Vec<RWord>,
}

fn validate(shape: TorusShape, query: &EventQuery) -> Result<()> {
    for e in &query.events {
        if e.x1 < 0 || e.x2 < 0 || e.x1 >= shape.m1 as i64 || e.x2 >= shape.m2 as i64 {
            return Err(Error::SiteOutOfRange { x1: e.x1, x2: e.x2 });
        }
        if !shape.allows(e.step) {
            return Err(Error::DownOnPeriodTwo);
        }
    }
    Ok(())
}

/// `P_m(∩ {σx^i = x^i + f^i})` for the pure model, with a sector breakdown.
pub fn correlation_report(
    shape: TorusShape,
    params: &Params,
    query: &EventQuery,
) -> Result<CorrelationReport> {
    if !params.probabilistic() {
        return Err(Error::OutsideRegime);
    }
    signed_report(shape, params, query, &[0, 1, 2, 3], None)
}

fn signed_report(
    shape: TorusShape,
    params: &Params,
    query: &EventQuery,
    sectors: &[usize],
    normaliser: Option<f64>,
) -> Result<CorrelationReport> {
    validate(shape, query)?;
    let words = expand_events(query, Periods::torus(shape.m1, shape.m2))?;
    let weights = SectorWeights::compute(shape, params)?;
    if weights.z.is_zero() {
        return Err(Error::ZeroPartition);
    }
    let terms = sector_terms(shape, params, &weights, &words, sectors)?;
    let rescale = normaliser.unwrap_or(1.0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut reports = Vec::new();
    for (slot, &i) in sectors.iter().enumerate() {
        let contribution: Complex64 = words
            .iter()
            .zip(&terms[slot])
            .map(|(w, t)| w.coefficient as f64 * t)
            .sum::<Complex64>()
            / rescale;
        total += contribution;
        reports.push(SectorReport {
            sector: ThetaSector::ALL[i],
            c: weights.c[i],
            log_abs_det: weights.dets[i].log_abs,
            det_phase: weights.dets[i].phase,
            lambda: weights.lambda(i) / rescale,
            contribution,
        });
    }
    Ok(CorrelationReport {
        value: assert_real(total)?,
        sectors: reports,
        words,
    })
}

pub fn correlation(shape: TorusShape, params: &Params, query: &EventQuery) -> Result<f64> {
    Ok(correlation_report(shape, params, query)?.value)
}

/// Expectation of a single word of labelled steps under the signed
/// generalised measure.
pub fn word_expectation(shape: TorusShape, params: &Params, word: &RWord) -> Result<f64> {
    let weights = SectorWeights::compute(shape, params)?;
    if weights.z.is_zero() {
        return Err(Error::ZeroPartition);
    }
    let terms = sector_terms(
        shape,
        params,
        &weights,
        std::slice::from_ref(word),
        &[0, 1, 2, 3],
    )?;
    assert_real(terms.iter().map(|t| t[0]).sum::<Complex64>() * word.coefficient as f64)
}

/// Correlation under the sector measure `P_{θ2,m}`, i.e. conditioned on
/// `L ≡ θ2 + m2 + 1 (mod 2)`.
pub fn sector_measure(
    theta2: u8,
    shape: TorusShape,
    params: &Params,
    query: &EventQuery,
) -> Result<f64> {
    let weights = SectorWeights::compute(shape, params)?;
    if weights.z.is_zero() {
        return Err(Error::ZeroPartition);
    }
    let share = weights.theta2_share(theta2);
    if share.abs() < 1e-300 {
        return Err(Error::ZeroPartition);
    }
    let sectors: Vec<usize> = (0..4)
        .filter(|&i| ThetaSector::ALL[i].theta2 == theta2)
        .collect();
    Ok(signed_report(shape, params, query, &sectors, Some(share))?.value)
}

/// All-Right probability through the `G = β H(x + e1, ·)` determinant.
pub fn right_events_via_g(shape: TorusShape, params: &Params, sites: &[Site]) -> Result<f64> {
    let weights = SectorWeights::compute(shape, params)?;
    let k = sites.len();
    let mut total = Complex64::new(0.0, 0.0);
    for (i, &sector) in ThetaSector::ALL.iter().enumerate() {
        let t = KernelTable::new(sector, shape, params)?;
        let mut m = Vec::with_capacity(k * k);
        for a in sites {
            for b in sites {
                m.push(t.g((a.x1 as i64, a.x2 as i64), (b.x1 as i64, b.x2 as i64)));
            }
        }
        total += weights.lambda(i) * det_complex(m, k);
    }
    assert_real(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(m1: usize, m2: usize) -> TorusShape {
        TorusShape::new(m1, m2).unwrap()
    }

    #[test]
    fn entries() {
        let s = shape(3, 4);
        let p = Params::new(1.0, 0.5, 0.3, 0.2);
        let x = Site::new(1, 1);
        assert_eq!(
            k_entry(ThetaSector::new(1, 1), s, &p, x, x),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            k_entry(ThetaSector::new(0, 0), s, &p, x, Site::new(1, 2)),
            Complex64::new(0.3, 0.0)
        );
        let v = k_entry(ThetaSector::new(0, 1), s, &p, x, Site::new(1, 0));
        assert!((v - 0.2 * Complex64::from_polar(1.0, -PI / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn c_coefficients_sum_to_one() {
        for m1 in 1..=8 {
            for m2 in 1..=8 {
                let s: f64 = ThetaSector::ALL
                    .iter()
                    .map(|&t| c_coeff(t, shape(m1, m2)))
                    .sum();
                assert_eq!(s, 1.0);
            }
        }
        assert_eq!(c_coeff(ThetaSector::new(1, 1), shape(2, 4)), 0.5);
        assert_eq!(c_coeff(ThetaSector::new(0, 0), shape(3, 3)), 0.5);
    }

    #[test]
    fn det_small_product() {
        let p = Params::new(1.0, 2.0, 2.0, 0.0);
        let d = det_k(ThetaSector::new(0, 0), shape(2, 2), &p);
        // (1+2+2)(1+2-2)(1-2+2)(1-2-2)
        assert!((d - Complex64::new(-15.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn diagonal_operator() {
        let s = shape(3, 2);
        let p = Params::new(1.7, 0.0, 0.0, 0.0);
        assert!((partition_function(s, &p).unwrap() - 1.7f64.powi(6)).abs() < 1e-12);
        let t = KernelTable::new(ThetaSector::new(1, 0), s, &p).unwrap();
        assert!((t.h((0, 0), (0, 0)) - Complex64::new(1.0 / 1.7, 0.0)).norm() < 1e-14);
        assert!(t.h((0, 0), (1, 0)).norm() < 1e-14);
    }
}
