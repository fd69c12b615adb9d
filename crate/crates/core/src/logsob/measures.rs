//! Weight pairs `(mu, nu)` on the positive integers.

use crate::error::{Error, Result};
use crate::model::{CoefficientModel, LogQIter};

const TAIL_REL: f64 = 1e-16;
const MAX_LEN: usize = 1 << 23;

/// Probability weight `mu` and positive weight `nu`, stored on `1..=n`.
///
/// Pairs built from a model carry the geometric ratio of the frozen tail, so
/// suprema over `k` can be compared with their limit.
#[derive(Clone, Debug)]
pub struct WeightPair {
    mu: Vec<f64>,
    nu: Vec<f64>,
    mu_tail: f64,
    tail_ratio: Option<f64>,
    /// `suffix[k] = sum_{i > k} mu_i` for `k = 0..=n`.
    suffix: Vec<f64>,
    /// `prefix[k] = sum_{i <= k} mu_i` for `k = 0..=n`.
    prefix: Vec<f64>,
}

impl WeightPair {
    /// A finitely supported pair. `mu` must sum to one.
    pub fn new(mu: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        Self::with_tail(mu, nu, 0.0, None)
    }

    fn with_tail(mu: Vec<f64>, nu: Vec<f64>, mu_tail: f64, tail_ratio: Option<f64>) -> Result<Self> {
        if mu.is_empty() || mu.len() != nu.len() {
            return Err(Error::invalid("mu and nu must be non-empty and of equal length"));
        }
        if mu.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
            return Err(Error::invalid("mu must be non-negative"));
        }
        if nu.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("nu must be positive"));
        }
        let n = mu.len();
        let mut suffix = vec![0.0; n + 1];
        suffix[n] = mu_tail;
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + mu[k];
        }
        let mut prefix = vec![0.0; n + 1];
        for k in 0..n {
            prefix[k + 1] = prefix[k] + mu[k];
        }
        if (suffix[0] - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("mu must sum to one, got {}", suffix[0])));
        }
        Ok(WeightPair { mu, nu, mu_tail, tail_ratio, suffix, prefix })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// `[mu_1, ..., mu_n]`.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Mass of `mu` beyond the stored range.
    pub fn mu_tail(&self) -> f64 {
        self.mu_tail
    }

    /// `mu_{i+1}/mu_i` beyond the stored range, when the pair has a geometric tail.
    pub fn tail_ratio(&self) -> Option<f64> {
        self.tail_ratio
    }

    /// `sum_{i > k} mu_i`.
    pub fn tail_mass(&self, k: usize) -> f64 {
        self.suffix[k.min(self.len())]
    }

    /// `sum_{i <= k} mu_i`.
    pub fn head_mass(&self, k: usize) -> f64 {
        if k >= self.len() {
            1.0 - self.mu_tail
        } else {
            self.prefix[k]
        }
    }
}

/// `mu_i ~ Q_i c1^i` and `nu_i ~ a_i Q_i c1^i`, both normalised. Beyond the
/// stored range the weights are continued with `alpha` frozen at its last
/// value; the range grows past `n` until that tail is below `1e-16`.
pub fn measures_from_state(model: &CoefficientModel, c1: f64, n: usize) -> Result<WeightPair> {
    measures_with_rate(model, c1, n, |i| model.a(i))
}

/// As [`measures_from_state`] with `nu_i ~ rate(i) Q_i c1^i`.
pub fn measures_with_rate(
    model: &CoefficientModel,
    c1: f64,
    n: usize,
    rate: impl Fn(usize) -> f64,
) -> Result<WeightPair> {
    let zs = model.zs()?;
    if !(c1 > 0.0 && c1 < zs) {
        return Err(Error::invalid(format!("c1 = {c1} must lie in (0, zs = {zs})")));
    }
    let x = c1 / zs;
    let (lc1, lx) = (c1.ln(), x.ln());
    let mut log_w = Vec::with_capacity(n.max(16));
    let mut it = LogQIter::new(model);
    let mut max_lw = f64::NEG_INFINITY;
    let mut i = 0usize;
    loop {
        i += 1;
        let lw = it.next().expect("infinite iterator") + i as f64 * lc1;
        max_lw = max_lw.max(lw);
        log_w.push(lw);
        if i >= n.max(2) {
            // tail of Q_i c1^i relative to the largest term, alpha frozen
            let rel = (lw - max_lw + lx - (1.0 - x).ln()).exp();
            if rel < TAIL_REL || i >= MAX_LEN {
                break;
            }
        }
    }
    let len = log_w.len();
    let w: Vec<f64> = log_w.iter().map(|lw| (lw - max_lw).exp()).collect();
    let last = w[len - 1];
    let w_tail = last * x / (1.0 - x);
    let rates: Vec<f64> = (1..=len).map(&rate).collect();
    let slope = rates[len - 1] / len as f64;
    // sum_{i > len} i x^(i - len)
    let m = len as f64 + 1.0;
    let aw_tail = last * slope * x * (m - (m - 1.0) * x) / ((1.0 - x) * (1.0 - x));
    let z: f64 = w.iter().rev().sum::<f64>() + w_tail;
    let za: f64 = w.iter().zip(&rates).rev().map(|(v, r)| v * r).sum::<f64>() + aw_tail;
    let mu: Vec<f64> = w.iter().map(|v| v / z).collect();
    let nu: Vec<f64> = w.iter().zip(&rates).map(|(v, r)| v * r / za).collect();
    let pair = WeightPair::with_tail(mu, nu, w_tail / z, Some(x))?;
    if pair.nu.iter().any(|v| *v == 0.0) {
        return Err(Error::Overflow("nu underflows on the stored range".into()));
    }
    Ok(pair)
}

/// Smallest `m` with `max(sum_{i<m} mu_i, sum_{i>m} mu_i) < 2/3`.
pub fn approximate_median(pair: &WeightPair) -> usize {
    let two_thirds = 2.0 / 3.0;
    let mut m = 1;
    loop {
        if pair.head_mass(m - 1) < two_thirds && pair.tail_mass(m) < two_thirds {
            return m;
        }
        m += 1;
    }
}
