//! Coefficient families, detailed-balance weights and equilibria.
//!
//! A model fixes the coagulation rates `a_i`, the fragmentation rates `b_i`
//! and through them the detailed-balance weights
//! `Q_1 = 1`, `Q_{i+1} = a_i Q_i / b_{i+1}`. Everything is evaluated lazily
//! and in log space.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type RateFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// A positive rate sequence indexed from 1.
#[derive(Clone)]
pub enum RateSeq {
    /// Finite table; indices past the end repeat the last entry.
    Table(Arc<[f64]>),
    Func(RateFn),
}

impl RateSeq {
    fn get(&self, i: usize) -> f64 {
        match self {
            RateSeq::Table(t) => t[(i - 1).min(t.len() - 1)],
            RateSeq::Func(f) => f(i),
        }
    }
}

impl fmt::Debug for RateSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateSeq::Table(t) => write!(f, "Table(len={})", t.len()),
            RateSeq::Func(_) => write!(f, "Func"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    /// `a_i = i^gamma`, `b_i = a_i (zs + q i^(mu-1))`.
    PowerLawPT { gamma: f64, zs: f64, q: f64, mu: f64 },
    /// `a_i = i^gamma`, `b_i = zs (i-1)^gamma exp(sigma i^mu - sigma (i-1)^mu)`.
    PowerLawCF { gamma: f64, zs: f64, sigma: f64, mu: f64 },
    /// `a` gives `a_i`; `b_next` gives `b_{i+1}` at index `i`.
    Custom { a: RateSeq, b_next: RateSeq, zs: Option<f64> },
}

/// Rates plus derived detailed-balance data. Cheap to clone.
#[derive(Clone)]
pub struct CoefficientModel {
    family: Family,
    gamma: f64,
    /// `alpha_i` is known to be non-increasing (built-in families and their companions).
    alpha_monotone: bool,
    zs_cache: Arc<OnceLock<Option<f64>>>,
}

impl fmt::Debug for CoefficientModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientModel")
            .field("family", &self.family)
            .field("gamma", &self.gamma)
            .finish()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0,1], got {gamma}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl CoefficientModel {
    pub fn power_law_pt(gamma: f64, zs: f64, q: f64, mu: f64) -> Result<Self> {
        check_gamma(gamma)?;
        check_positive("zs", zs)?;
        check_positive("q", q)?;
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::invalid(format!("mu must lie in (0,1), got {mu}")));
        }
        Ok(Self::from_family(Family::PowerLawPT { gamma, zs, q, mu }, gamma, true))
    }

    pub fn power_law_cf(gamma: f64, zs: f64, sigma: f64, mu: f64) -> Result<Self> {
        check_gamma(gamma)?;
        check_positive("zs", zs)?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be non-negative, got {sigma}")));
        }
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::invalid(format!("mu must lie in (0,1), got {mu}")));
        }
        Ok(Self::from_family(Family::PowerLawCF { gamma, zs, sigma, mu }, gamma, true))
    }

    /// Tables `a = [a_1, a_2, ...]` and `b = [b_2, b_3, ...]`. Past the end of
    /// a table the last entry is repeated.
    pub fn custom_tables(gamma: f64, a: Vec<f64>, b: Vec<f64>, zs: Option<f64>) -> Result<Self> {
        check_gamma(gamma)?;
        if a.is_empty() || b.is_empty() {
            return Err(Error::invalid("a_table and b_table must be non-empty"));
        }
        for (k, &v) in a.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("a_table[{k}] = {v} is not positive")));
            }
        }
        for (k, &v) in b.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("b_table[{k}] = {v} is not positive")));
            }
        }
        if let Some(z) = zs {
            check_positive("zs", z)?;
        }
        let family = Family::Custom {
            a: RateSeq::Table(a.into()),
            b_next: RateSeq::Table(b.into()),
            zs,
        };
        Ok(Self::from_family(family, gamma, false))
    }

    /// Closure-defined rates: `a(i) = a_i` and `b(i) = b_i` for `i >= 2`.
    /// Positivity is checked on the first thousand indices.
    pub fn custom_fn<A, B>(gamma: f64, a: A, b: B, zs: Option<f64>) -> Result<Self>
    where
        A: Fn(usize) -> f64 + Send + Sync + 'static,
        B: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        check_gamma(gamma)?;
        for i in 1..=1000 {
            let (ai, bi) = (a(i), b(i + 1));
            if !(ai > 0.0 && ai.is_finite()) {
                return Err(Error::invalid(format!("a({i}) = {ai} is not positive")));
            }
            if !(bi > 0.0 && bi.is_finite()) {
                return Err(Error::invalid(format!("b({}) = {bi} is not positive", i + 1)));
            }
        }
        if let Some(z) = zs {
            check_positive("zs", z)?;
        }
        let b = Arc::new(b);
        let family = Family::Custom {
            a: RateSeq::Func(Arc::new(a)),
            b_next: RateSeq::Func(Arc::new(move |i| b(i + 1))),
            zs,
        };
        Ok(Self::from_family(family, gamma, false))
    }

    fn from_family(family: Family, gamma: f64, alpha_monotone: bool) -> Self {
        CoefficientModel { family, gamma, alpha_monotone, zs_cache: Arc::new(OnceLock::new()) }
    }

    /// Same detailed-balance weights, coagulation rates replaced by `a_i = i`.
    pub fn linear_companion(&self) -> Result<Self> {
        let zs = self.zs()?;
        let orig = self.clone();
        let family = Family::Custom {
            a: RateSeq::Func(Arc::new(|i| i as f64)),
            b_next: RateSeq::Func(Arc::new(move |i| i as f64 * (-orig.log_ratio(i)).exp())),
            zs: Some(zs),
        };
        Ok(Self::from_family(family, 1.0, self.alpha_monotone))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.family, Family::Custom { .. })
    }

    pub fn alpha_known_monotone(&self) -> bool {
        self.alpha_monotone
    }

    pub fn a(&self, i: usize) -> f64 {
        debug_assert!(i >= 1);
        match &self.family {
            Family::PowerLawPT { gamma, .. } | Family::PowerLawCF { gamma, .. } => (i as f64).powf(*gamma),
            Family::Custom { a, .. } => a.get(i),
        }
    }

    /// Fragmentation rate `b_i`, defined for `i >= 2` (b_1 never enters the dynamics).
    pub fn b(&self, i: usize) -> f64 {
        debug_assert!(i >= 2);
        match &self.family {
            Family::PowerLawPT { gamma, zs, q, mu } => {
                let x = i as f64;
                x.powf(*gamma) * (zs + q * x.powf(mu - 1.0))
            }
            Family::PowerLawCF { gamma, zs, sigma, mu } => {
                let x = i as f64;
                let y = x - 1.0;
                zs * y.powf(*gamma) * (sigma * (x.powf(*mu) - y.powf(*mu))).exp()
            }
            Family::Custom { b_next, .. } => b_next.get(i - 1),
        }
    }

    /// `log(Q_{i+1} / Q_i) = log a_i - log b_{i+1}`.
    pub fn log_ratio(&self, i: usize) -> f64 {
        match &self.family {
            Family::PowerLawPT { gamma, zs, q, mu } => {
                let x = i as f64;
                let y = x + 1.0;
                gamma * (x / y).ln() - (zs + q * y.powf(mu - 1.0)).ln()
            }
            Family::PowerLawCF { zs, sigma, mu, .. } => {
                let x = i as f64;
                -zs.ln() - sigma * ((x + 1.0).powf(*mu) - x.powf(*mu))
            }
            Family::Custom { a, b_next, .. } => a.get(i).ln() - b_next.get(i).ln(),
        }
    }

    /// `log Q_i` for a single index.
    pub fn log_q(&self, i: usize) -> f64 {
        match &self.family {
            Family::PowerLawCF { zs, sigma, mu, .. } => {
                (1.0 - i as f64) * zs.ln() - sigma * ((i as f64).powf(*mu) - 1.0)
            }
            _ => LogQIter::new(self).nth(i - 1).expect("infinite iterator"),
        }
    }

    pub fn q(&self, i: usize) -> f64 {
        self.log_q(i).exp()
    }

    /// `[log Q_1, ..., log Q_n]`.
    pub fn log_q_table(&self, n: usize) -> Vec<f64> {
        LogQIter::new(self).take(n).collect()
    }

    pub fn a_table(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.a(i)).collect()
    }

    /// `[b_2, ..., b_{n+1}]`.
    pub fn b_next_table(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.b(i + 1)).collect()
    }

    /// Critical monomer density. Built-in families read it from their
    /// parameters; custom models use the supplied value or a root-test estimate.
    pub fn zs(&self) -> Result<f64> {
        match &self.family {
            Family::PowerLawPT { zs, .. } | Family::PowerLawCF { zs, .. } => Ok(*zs),
            Family::Custom { zs: Some(z), .. } => Ok(*z),
            Family::Custom { zs: None, .. } => self
                .zs_cache
                .get_or_init(|| estimate_zs(self))
                .ok_or_else(|| Error::NotConverged("root-test estimate of zs did not stabilise".into())),
        }
    }

    pub fn log_alpha(&self, i: usize) -> Result<f64> {
        Ok(self.log_q(i) + (i as f64 - 1.0) * self.zs()?.ln())
    }

    pub fn alpha(&self, i: usize) -> Result<f64> {
        Ok(self.log_alpha(i)?.exp())
    }

    /// Diagnostics about the standing hypotheses, checked on `1..=n`.
    pub fn hypothesis_flags(&self, n: usize) -> Vec<String> {
        let mut flags = Vec::new();
        if self.gamma == 0.0 {
            flags.push("gamma-zero".to_string());
        }
        if !self.alpha_monotone {
            if let Ok(zs) = self.zs() {
                let lz = zs.ln();
                let increasing = LogQIter::new(self)
                    .take(n.max(2))
                    .enumerate()
                    .map(|(k, lq)| lq + k as f64 * lz)
                    .collect::<Vec<_>>()
                    .windows(2)
                    .any(|w| w[1] > w[0] + 1e-12 * w[0].abs().max(1.0));
                if increasing {
                    flags.push("hypothesis-violated: alpha not non-increasing".to_string());
                }
            }
        }
        flags
    }

    /// `sup_i Q_i/Q_{i+1}` and `inf_i Q_i/Q_{i+1}` over `i <= n`, with the
    /// limiting value `zs` folded in.
    pub fn q_ratio_bounds(&self, n: usize) -> Result<(f64, f64)> {
        let zs = self.zs()?;
        let mut hi = zs;
        let mut lo = zs;
        for i in 1..=n {
            let r = (-self.log_ratio(i)).exp();
            hi = hi.max(r);
            lo = lo.min(r);
        }
        Ok((hi, lo))
    }

    /// `sup_j alpha_j / alpha_{j+1}` over `j <= n` (at least 1, the limit).
    pub fn alpha_ratio_sup(&self, n: usize) -> Result<f64> {
        let lz = self.zs()?.ln();
        let mut sup = 1.0f64;
        for j in 1..=n {
            sup = sup.max((-(self.log_ratio(j) + lz)).exp());
        }
        Ok(sup)
    }

    /// `sup_i a_i / a_{i+1}` and `inf_i a_i / a_{i+1}` over `i <= n`; for
    /// non-decreasing rates the supremum includes the limit 1.
    pub fn a_ratio_bounds(&self, n: usize) -> (f64, f64) {
        let mut hi = f64::MIN;
        let mut lo = f64::MAX;
        for i in 1..=n {
            let r = self.a(i) / self.a(i + 1);
            hi = hi.max(r);
            lo = lo.min(r);
        }
        if self.is_builtin() {
            hi = hi.max(1.0);
        }
        (hi, lo)
    }
}

/// Lazily yields `log Q_1, log Q_2, ...`.
pub struct LogQIter<'a> {
    model: &'a CoefficientModel,
    i: usize,
    cur: f64,
}

impl<'a> LogQIter<'a> {
    pub fn new(model: &'a CoefficientModel) -> Self {
        LogQIter { model, i: 0, cur: 0.0 }
    }
}

impl Iterator for LogQIter<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        self.i += 1;
        if self.i > 1 {
            self.cur = match &self.model.family {
                Family::PowerLawCF { .. } => self.model.log_q(self.i),
                _ => self.cur + self.model.log_ratio(self.i - 1),
            };
        }
        Some(self.cur)
    }
}

/// Root-test estimate of `zs` with two rounds of Richardson extrapolation on
/// the dyadic ladder `i = 2^k`.
fn estimate_zs(model: &CoefficientModel) -> Option<f64> {
    const K_MIN: u32 = 4;
    const K_MAX: u32 = 20;
    let mut g = Vec::new();
    let mut next = 1usize << K_MIN;
    for (k, lq) in LogQIter::new(model).take(1 << K_MAX).enumerate() {
        let i = k + 1;
        if i == next {
            g.push(-lq / (i as f64 - 1.0));
            next <<= 1;
        }
    }
    let r1: Vec<f64> = g.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let r2: Vec<f64> = r1.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let n = r2.len();
    if n < 3 {
        return None;
    }
    let last = &r2[n - 3..];
    let scale = last[2].abs().max(1.0);
    let spread = last.iter().cloned().fold(f64::MIN, f64::max) - last.iter().cloned().fold(f64::MAX, f64::min);
    if spread <= 1e-8 * scale {
        Some(last[2].exp())
    } else {
        None
    }
}

/// Weight `f(i)` multiplying `Q_i z^i` in a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    /// `i^k` for `k` in `0..=2`.
    Pow(u8),
    /// The coagulation rate `a_i`, assumed to satisfy `a_i / i` non-increasing.
    Rate,
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesSum {
    pub value: f64,
    /// Index of the last summed term.
    pub last: usize,
    pub tail_bound: f64,
    pub converged: bool,
}

/// `sum_{i > n} i^k x^i` in closed form.
pub fn geometric_tail(k: u8, n: usize, x: f64) -> f64 {
    let m = n as f64 + 1.0;
    let xm = (m * x.ln()).exp();
    let d = 1.0 - x;
    match k {
        0 => xm / d,
        1 => xm * (m - (m - 1.0) * x) / (d * d),
        2 => xm * (m * m - (2.0 * m * m - 2.0 * m - 1.0) * x + (m - 1.0) * (m - 1.0) * x * x) / (d * d * d),
        _ => panic!("geometric_tail supports k <= 2"),
    }
}

const SERIES_MAX_TERMS: usize = 1 << 25;

/// `sum_{i > start} f(i) Q_i z^i` for `0 < z < zs`, truncated once the
/// envelope `alpha_n zs sum_{i>n} f(i) (z/zs)^i` drops below `rel_tol` times
/// the partial sum.
pub fn series(model: &CoefficientModel, z: f64, weight: Weight, start: usize, rel_tol: f64) -> Result<SeriesSum> {
    let zs = model.zs()?;
    if !(z > 0.0 && z < zs) {
        return Err(Error::invalid(format!("series needs 0 < z < zs, got z = {z}, zs = {zs}")));
    }
    let (lz, lzs) = (z.ln(), zs.ln());
    let x = z / zs;
    let mut it = LogQIter::new(model);
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut tail = f64::INFINITY;
    let mut i = 0usize;
    while i < SERIES_MAX_TERMS {
        i += 1;
        let lq = it.next().expect("infinite iterator");
        if i <= start {
            continue;
        }
        let f = match weight {
            Weight::Pow(k) => (i as f64).powi(k as i32),
            Weight::Rate => model.a(i),
        };
        let term = f * (lq + i as f64 * lz).exp();
        // Kahan summation keeps the tiny tail terms
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if i % 8 == 0 || i == start + 1 {
            let alpha_n = (lq + (i as f64 - 1.0) * lzs).exp();
            tail = match weight {
                Weight::Pow(k) => alpha_n * zs * geometric_tail(k, i, x),
                Weight::Rate => alpha_n * zs * (model.a(i) / i as f64) * geometric_tail(1, i, x),
            };
            if tail <= rel_tol * sum || (sum == 0.0 && tail == 0.0) {
                return Ok(SeriesSum { value: sum, last: i, tail_bound: tail, converged: true });
            }
        }
    }
    Ok(SeriesSum { value: sum, last: i, tail_bound: tail, converged: false })
}

/// Saturation mass `rho_s = sum i Q_i zs^i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Saturation {
    Finite(f64),
    Infinite,
    Undetermined,
}

impl Serialize for Saturation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Saturation::Finite(v) => s.serialize_f64(*v),
            Saturation::Infinite => s.serialize_str("infinite"),
            Saturation::Undetermined => s.serialize_str("undetermined"),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CriticalInfo {
    pub zs: f64,
    pub rho_s: Saturation,
}

const DIVERGENCE_START: usize = 1_000;
const DIVERGENCE_WINDOW: usize = 10_000;
const DIVERGENCE_FLOOR: f64 = 1e-6;
const SATURATION_MAX_TERMS: usize = 1 << 24;

/// Critical density and saturation mass.
pub fn critical_density(model: &CoefficientModel, tol: f64) -> Result<CriticalInfo> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let zs = model.zs()?;
    let lzs = zs.ln();
    let mut it = LogQIter::new(model);
    let mut partial = 0.0;
    let mut run = 0usize;
    let mut half_term = 0.0;
    let mut checkpoint = 16usize;
    for i in 1..=SATURATION_MAX_TERMS {
        let lq = it.next().expect("infinite iterator");
        let term = i as f64 * (lq + i as f64 * lzs).exp();
        partial += term;
        if i > DIVERGENCE_START && term >= DIVERGENCE_FLOOR {
            run += 1;
            if run >= DIVERGENCE_WINDOW {
                return Ok(CriticalInfo { zs, rho_s: Saturation::Infinite });
            }
        } else {
            run = 0;
        }
        if i == checkpoint / 2 {
            half_term = term;
        }
        if i == checkpoint {
            checkpoint *= 2;
            if term == 0.0 {
                return Ok(CriticalInfo { zs, rho_s: Saturation::Finite(partial) });
            }
            // local power-law exponent of the summand
            let p = (half_term / term).ln() / std::f64::consts::LN_2;
            if p > 1.05 {
                let tail = term * i as f64 / (p - 1.0);
                if tail <= tol * partial {
                    return Ok(CriticalInfo { zs, rho_s: Saturation::Finite(partial + tail) });
                }
            }
        }
    }
    Ok(CriticalInfo { zs, rho_s: Saturation::Undetermined })
}

/// Equilibrium at a prescribed mass.
#[derive(Clone, Debug)]
pub struct EquilibriumInfo {
    pub z_bar: f64,
    pub rho: f64,
    pub z_s: f64,
    pub rho_s: Saturation,
    pub flags: Vec<String>,
    model: CoefficientModel,
}

impl EquilibriumInfo {
    pub fn model(&self) -> &CoefficientModel {
        &self.model
    }

    /// `[Q_i z_bar^i]` for `i = 1..=n`.
    pub fn profile(&self, n: usize) -> Vec<f64> {
        let lz = self.z_bar.ln();
        LogQIter::new(&self.model)
            .take(n)
            .enumerate()
            .map(|(k, lq)| (lq + (k + 1) as f64 * lz).exp())
            .collect()
    }

    /// Mass of the equilibrium beyond size `n`.
    pub fn tail_mass(&self, n: usize) -> Result<f64> {
        let s = series(&self.model, self.z_bar, Weight::Pow(1), n, 1e-12)?;
        Ok(s.value + s.tail_bound)
    }

    /// Smallest `n` whose equilibrium tail mass is below `rel * rho`.
    pub fn truncation_for(&self, rel: f64) -> Result<usize> {
        let s = series(&self.model, self.z_bar, Weight::Pow(1), 0, rel)?;
        let mut n = s.last;
        // the envelope is conservative; shrink while the tail stays small
        let prof = self.profile(n);
        let mut tail = s.tail_bound;
        while n > 2 {
            let add = n as f64 * prof[n - 1];
            if tail + add > rel * self.rho {
                break;
            }
            tail += add;
            n -= 1;
        }
        Ok(n)
    }
}

/// Mass of the equilibrium `Q_i z^i`, or `None` when the truncation cap was hit
/// without deciding on which side of `target` the mass lies.
fn equilibrium_mass(model: &CoefficientModel, z: f64, target: f64, tol: f64) -> Result<MassEval> {
    let s = series(model, z, Weight::Pow(1), 0, tol * 1e-3)?;
    if s.converged {
        return Ok(MassEval::Value(s.value));
    }
    if s.value > target {
        Ok(MassEval::Above)
    } else if s.value + s.tail_bound < target {
        Ok(MassEval::Below)
    } else {
        Ok(MassEval::Above)
    }
}

enum MassEval {
    Value(f64),
    Above,
    Below,
}

const BISECTION_MAX_ITER: usize = 200;
const BISECTION_Z_TOL: f64 = 1e-14;

/// Solves `sum i Q_i z^i = rho` for `z` in `(0, zs)` by bisection.
pub fn equilibrium_monomer_density(model: &CoefficientModel, rho: f64, tol: f64) -> Result<EquilibriumInfo> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let crit = critical_density(model, 1e-10)?;
    if let Saturation::Finite(rho_s) = crit.rho_s {
        if rho >= rho_s {
            return Err(Error::SupercriticalMass { rho, rho_s });
        }
    }
    let zs = crit.zs;
    let (mut lo, mut hi) = (0.0f64, zs);
    let mut best: Option<(f64, f64)> = None;
    let mut flags = model.hypothesis_flags(64);
    let mut undecided = false;
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match equilibrium_mass(model, mid, rho, tol)? {
            MassEval::Value(m) => {
                if best.map_or(true, |(_, e)| (m - rho).abs() < e) {
                    best = Some((mid, (m - rho).abs()));
                }
                if m > rho {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if (m - rho).abs() <= tol * rho && hi - lo <= BISECTION_Z_TOL {
                    break;
                }
            }
            MassEval::Above => {
                undecided = true;
                hi = mid;
            }
            MassEval::Below => lo = mid,
        }
    }
    if undecided {
        flags.push("series truncation cap reached near zs".to_string());
    }
    match best {
        Some((z_bar, err)) if err <= tol * rho => Ok(EquilibriumInfo {
            z_bar,
            rho,
            z_s: zs,
            rho_s: crit.rho_s,
            flags,
            model: model.clone(),
        }),
        Some((_, err)) => Err(Error::NotConverged(format!(
            "bisection for z_bar stopped with relative mass error {:.3e}",
            err / rho
        ))),
        None => Err(Error::NotConverged("no evaluable bisection point for z_bar".into())),
    }
}
