//! Log-Sobolev and Hardy constants of a weight pair.

use serde::Serialize;

use super::measures::{approximate_median, WeightPair};
use crate::error::{Error, Result};
use crate::functionals::{entropy, psi_inv};

/// The running maximum must have been stable for this many indices.
const STABLE_WINDOW: usize = 50;

/// A supremum over `k` with its convergence status.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Supremum {
    pub value: f64,
    /// Index attaining the running maximum.
    pub argmax: usize,
    pub converged: bool,
    /// The large-`k` limit was larger than every evaluated term and was used.
    pub used_limit: bool,
}

impl Supremum {
    fn new() -> Self {
        Supremum { value: 0.0, argmax: 0, converged: true, used_limit: false }
    }

    fn push(&mut self, k: usize, v: f64) {
        if v > self.value {
            self.value = v;
            self.argmax = k;
        }
    }

    /// Closes the scan at index `last`. A scan over the whole support is
    /// exact; otherwise the running maximum must be stable and at least the
    /// large-`k` limit, which replaces it when larger.
    fn finish(mut self, last: usize, limit: Option<f64>) -> Self {
        let Some(l) = limit else {
            return self;
        };
        let stable = last >= self.argmax + STABLE_WINDOW;
        if l > self.value {
            self.value = l;
            self.used_limit = true;
            self.converged = false;
        } else {
            self.converged = stable;
        }
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LogSobReport {
    pub m: usize,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    pub lambda: f64,
    pub d1_sup: Supremum,
    pub b1_sup: Supremum,
    pub flags: Vec<String>,
}

/// Limit of `(sum_{i>k} mu) log(1/sum_{i>k} mu) (sum_{i<=k} 1/nu)` as `k -> inf`
/// for a geometric tail, with the rate ratio frozen at the last stored index.
fn geometric_limit(pair: &WeightPair) -> Option<f64> {
    let x = pair.tail_ratio()?;
    let n = pair.len();
    let ratio = pair.mu()[n - 1] / pair.nu()[n - 1];
    Some(ratio * x * (1.0 / x).ln() / ((1.0 - x) * (1.0 - x)))
}

/// Constants `D1, D2, B1, B2` and `Lambda = min(120 (D2 + 4 D1), 40 (B2 + 4 B1))`.
pub fn logsob_constants(pair: &WeightPair) -> Result<LogSobReport> {
    let m = approximate_median(pair);
    let n = pair.len();
    let nu = pair.nu();
    let inv_head: f64 = nu[..m - 1].iter().map(|v| 1.0 / v).sum();
    let head = pair.head_mass(m - 1);
    let (d2, b2) = if m == 1 || head == 0.0 {
        (0.0, 0.0)
    } else {
        (-head * head.ln() * inv_head, inv_head / psi_inv(1.0 / head)?)
    };

    let mut d1 = Supremum::new();
    let mut b1 = Supremum::new();
    let mut inv = inv_head;
    let mut last = m;
    for k in m..=n {
        inv += 1.0 / nu[k - 1];
        let s = pair.tail_mass(k);
        if s <= 0.0 {
            break;
        }
        last = k;
        d1.push(k, -s * s.ln() * inv);
        b1.push(k, inv / psi_inv(1.0 / s)?);
    }
    let limit = geometric_limit(pair);
    let d1 = d1.finish(last, limit);
    let b1 = b1.finish(last, limit);

    let mut flags = Vec::new();
    for (name, s) in [("D1", &d1), ("B1", &b1)] {
        if s.used_limit {
            flags.push(format!("{name}: large-k limit exceeds the evaluated terms and was used"));
        } else if !s.converged {
            flags.push(format!("{name}: supremum not converged, value is a lower bound"));
        }
    }
    let lambda = (120.0 * (d2 + 4.0 * d1.value)).min(40.0 * (b2 + 4.0 * b1.value));
    Ok(LogSobReport { m, d1: d1.value, d2, b1: b1.value, b2, lambda, d1_sup: d1, b1_sup: b1, flags })
}

/// `Ent_mu(f^2) / sum nu_i (f_{i+1} - f_i)^2` for `f` held constant past its
/// last entry. Zero for constant `f`.
pub fn lsi_ratio(pair: &WeightPair, f: &[f64]) -> Result<f64> {
    let k = f.len();
    if k == 0 || k > pair.len() {
        return Err(Error::invalid(format!("test function length must be in 1..={}, got {k}", pair.len())));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("test function must be finite"));
    }
    let mut mu = pair.mu()[..k - 1].to_vec();
    mu.push(pair.tail_mass(k - 1));
    let g: Vec<f64> = f.iter().map(|v| v * v).collect();
    let ent = entropy(&mu, &g)?;
    let dir: f64 = (0..k - 1).map(|i| pair.nu()[i] * (f[i + 1] - f[i]).powi(2)).sum();
    // a vanishing Dirichlet form means f is constant and Ent(f^2) = 0 up to rounding
    Ok(if dir > 0.0 { ent / dir } else { 0.0 })
}

/// Hardy constants around the index `m`.
#[derive(Clone, Debug, Serialize)]
pub struct HardyConstants {
    pub m: usize,
    /// `sup_{k>=m} (sum_{i>=k} mu_i)(sum_{i=m}^k 1/nu_i)`.
    pub b1m: f64,
    /// `sup_{k>=m} (sum_{i>k} mu_i)(sum_{i=m}^k 1/nu_i)`.
    pub b1_sup: f64,
    /// The first constant at `m + 1`.
    pub b1m_next: f64,
    /// `sum_{i<m} mu_i sum_{j=i}^{m-1} 1/nu_j`.
    pub b2m: f64,
    /// `sup_{k<=m-1} (sum_{i<=k} mu_i)(sum_{j=k}^{m-1} 1/nu_j)`.
    pub b2m_lower: f64,
    pub converged: bool,
}

fn tail_hardy(pair: &WeightPair, m: usize, strict: bool) -> Supremum {
    let nu = pair.nu();
    let mut sup = Supremum::new();
    let mut inv = 0.0;
    let mut last = m;
    for k in m..=pair.len() {
        inv += 1.0 / nu[k - 1];
        let s = if strict { pair.tail_mass(k) } else { pair.tail_mass(k - 1) };
        if s <= 0.0 {
            break;
        }
        last = k;
        sup.push(k, s * inv);
    }
    // terms decay like the tail of mu over nu, so no limit value enters
    sup.finish(last, pair.tail_ratio().map(|_| 0.0))
}

pub fn hardy_constants(pair: &WeightPair, m: usize) -> Result<HardyConstants> {
    if m == 0 || m >= pair.len() {
        return Err(crate::error::Error::invalid(format!("m = {m} outside 1..{}", pair.len())));
    }
    let b1m = tail_hardy(pair, m, false);
    let b1_sup = tail_hardy(pair, m, true);
    let b1m_next = tail_hardy(pair, m + 1, false);
    let nu = pair.nu();
    let mu = pair.mu();
    // sigma_j = sum_{i=j}^{m-1} 1/nu_i
    let mut sigma = vec![0.0; m + 1];
    for j in (1..m).rev() {
        sigma[j] = sigma[j + 1] + 1.0 / nu[j - 1];
    }
    let b2m = (1..m).map(|i| mu[i - 1] * sigma[i]).fold(0.0, |acc, v| acc + v);
    let b2m_lower = (1..m).map(|k| pair.head_mass(k) * sigma[k]).fold(0.0, f64::max);
    Ok(HardyConstants {
        m,
        b1m: b1m.value,
        b1_sup: b1_sup.value,
        b1m_next: b1m_next.value,
        b2m,
        b2m_lower,
        converged: b1m.converged && b1_sup.converged && b1m_next.converged,
    })
}
