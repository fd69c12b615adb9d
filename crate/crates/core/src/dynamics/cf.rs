//! Truncated coagulation-fragmentation system and its moment bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::ClusterState;
use crate::model::CoefficientModel;

/// One unordered reacting pair `i <= j` with `i + j <= N`.
#[derive(Clone, Copy, Debug)]
struct Pair {
    i: u32,
    j: u32,
    a: f64,
    b: f64,
}

/// Kernel choices for [`CfSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CfKernel {
    /// `a_ij = i^gamma j^eta + i^eta j^gamma`.
    Power { gamma: f64, eta: f64 },
    /// Becker-Doring rates embedded as a kernel supported on `min(i, j) = 1`.
    BdEmbedding,
}

/// Reactions `i + j <-> i + j` for `i + j <= N`; pairs leaving the range are
/// dropped in both directions so mass is conserved exactly.
#[derive(Clone, Debug)]
pub struct CfSystem {
    n: usize,
    pairs: Vec<Pair>,
    /// Model supplying `Q` when the kernel satisfies detailed balance.
    q_model: Option<CoefficientModel>,
    /// `(gamma, eta)` of a power kernel.
    exponents: Option<(f64, f64)>,
}

impl CfSystem {
    /// Kernel `a_ij = i^gamma j^eta + i^eta j^gamma` with `b_ij = a_ij Q_i Q_j / Q_{i+j}`.
    pub fn power(gamma: f64, eta: f64, q_model: &CoefficientModel, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) || !(0.0..=1.0).contains(&eta) || gamma + eta > 1.0 {
            return Err(Error::invalid(format!(
                "kernel exponents need 0 <= gamma, eta and gamma + eta <= 1, got ({gamma}, {eta})"
            )));
        }
        check_n(n)?;
        let lq = q_model.log_q_table(n);
        let mut pairs = Vec::with_capacity(n * n / 4);
        for i in 1..=n / 2 {
            for j in i..=n - i {
                let (x, y) = (i as f64, j as f64);
                let a = x.powf(gamma) * y.powf(eta) + x.powf(eta) * y.powf(gamma);
                let b = a * (lq[i - 1] + lq[j - 1] - lq[i + j - 1]).exp();
                pairs.push(Pair { i: i as u32, j: j as u32, a, b });
            }
        }
        Ok(CfSystem { n, pairs, q_model: Some(q_model.clone()), exponents: Some((gamma, eta)) })
    }

    /// The Becker-Doring model as a kernel: `a_11 = 2 a_1`, `a_i1 = a_i`,
    /// `b_11 = 2 b_2`, `b_i1 = b_{i+1}`.
    pub fn bd_embedding(model: &CoefficientModel, n: usize) -> Result<Self> {
        check_n(n)?;
        let mut pairs = vec![Pair { i: 1, j: 1, a: 2.0 * model.a(1), b: 2.0 * model.b(2) }];
        for j in 2..n {
            pairs.push(Pair { i: 1, j: j as u32, a: model.a(j), b: model.b(j + 1) });
        }
        Ok(CfSystem { n, pairs, q_model: Some(model.clone()), exponents: None })
    }

    pub fn from_kernel(kernel: CfKernel, q_model: &CoefficientModel, n: usize) -> Result<Self> {
        match kernel {
            CfKernel::Power { gamma, eta } => Self::power(gamma, eta, q_model, n),
            CfKernel::BdEmbedding => Self::bd_embedding(q_model, n),
        }
    }

    /// Kernel from full `N x N` matrices; entries with `i + j > N` are ignored.
    pub fn from_matrices(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        check_n(n)?;
        if b.len() != n || a.iter().chain(b).any(|r| r.len() != n) {
            return Err(Error::invalid("kernel matrices must both be N x N"));
        }
        let mut pairs = Vec::new();
        for i in 1..=n / 2 {
            for j in i..=n - i {
                let (aij, bij) = (a[i - 1][j - 1], b[i - 1][j - 1]);
                if aij != a[j - 1][i - 1] || bij != b[j - 1][i - 1] {
                    return Err(Error::invalid(format!("kernel is not symmetric at ({i}, {j})")));
                }
                if !(aij >= 0.0 && bij >= 0.0) {
                    return Err(Error::invalid(format!("negative kernel entry at ({i}, {j})")));
                }
                pairs.push(Pair { i: i as u32, j: j as u32, a: aij, b: bij });
            }
        }
        Ok(CfSystem { n, pairs, q_model: None, exponents: None })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn q_model(&self) -> Option<&CoefficientModel> {
        self.q_model.as_ref()
    }

    pub fn exponents(&self) -> Option<(f64, f64)> {
        self.exponents
    }

    pub fn rhs(&self, c: &[f64], dc: &mut [f64]) {
        dc.iter_mut().for_each(|d| *d = 0.0);
        for p in &self.pairs {
            let (i, j) = (p.i as usize, p.j as usize);
            let w = p.a * c[i - 1] * c[j - 1] - p.b * c[i + j - 1];
            if i == j {
                dc[2 * i - 1] += 0.5 * w;
                dc[i - 1] -= w;
            } else {
                dc[i + j - 1] += w;
                dc[i - 1] -= w;
                dc[j - 1] -= w;
            }
        }
    }

    /// `D = 1/2 sum_{i,j} W_ij log(a_ij c_i c_j / (b_ij c_{i+j}))`; `None` when
    /// a zero concentration makes a term undefined.
    pub fn dissipation(&self, c: &[f64]) -> Option<f64> {
        let mut d = 0.0;
        for p in &self.pairs {
            let (i, j) = (p.i as usize, p.j as usize);
            let fwd = p.a * c[i - 1] * c[j - 1];
            let back = p.b * c[i + j - 1];
            if fwd == back {
                continue;
            }
            if fwd == 0.0 || back == 0.0 {
                return None;
            }
            let t = (fwd - back) * (fwd.ln() - back.ln());
            d += if i == j { 0.5 * t } else { t };
        }
        Some(d)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("coagulation-fragmentation system needs N >= 2, got {n}")));
    }
    Ok(())
}

/// `dc/dt` of the truncated system at `state`.
pub fn cf_rhs(state: &ClusterState, sys: &CfSystem) -> Result<Vec<f64>> {
    if state.len() != sys.len() {
        return Err(Error::invalid(format!("state has {} sizes, kernel has {}", state.len(), sys.len())));
    }
    let mut dc = vec![0.0; sys.len()];
    sys.rhs(state.c(), &mut dc);
    Ok(dc)
}

/// Which closed form to use for the moment bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    /// Integrated from `dM/dt <= (2^k-2) rho^((k-lambda)/(k-1)) M^((k+lambda-2)/(k-1))`.
    #[default]
    Derived,
    /// `(M0 + q (2^k-2) rho^((1-gamma)/(k-1)) t)^(1/q)`, and
    /// `M0 exp(2 (2^k-2) rho t)` when `lambda = 1`. Valid as a bound when `M0 >= 1`
    /// and `rho = 1`.
    Printed,
}

/// Upper bound on `M_k(t)` along solutions with kernel `i^gamma j^eta + i^eta j^gamma`,
/// `lambda = gamma + eta`, mass `rho` and `M_k(0) = m0`.
pub fn cf_moment_bound(k: f64, gamma: f64, eta: f64, rho: f64, m0: f64, t: f64, form: BoundForm) -> Result<f64> {
    let lambda = gamma + eta;
    if !(k > 1.0) {
        return Err(Error::invalid(format!("moment order must exceed 1, got {k}")));
    }
    if !(0.0..=1.0).contains(&lambda) || gamma < 0.0 || eta < 0.0 {
        return Err(Error::invalid(format!("need 0 <= gamma + eta <= 1, got {lambda}")));
    }
    if !(rho > 0.0 && m0 > 0.0 && t >= 0.0) {
        return Err(Error::invalid("rho, M_k(0) must be positive and t non-negative"));
    }
    let growth = 2f64.powf(k) - 2.0;
    if lambda == 1.0 {
        let rate = match form {
            BoundForm::Derived => growth * rho,
            BoundForm::Printed => 2.0 * growth * rho,
        };
        return Ok(m0 * (rate * t).exp());
    }
    let q = (1.0 - lambda) / (k - 1.0);
    Ok(match form {
        BoundForm::Derived => {
            let a = growth * rho.powf((k - lambda) / (k - 1.0));
            (m0.powf(q) + q * a * t).powf(1.0 / q)
        }
        BoundForm::Printed => {
            let a = growth * rho.powf((1.0 - gamma) / (k - 1.0));
            (m0 + q * a * t).powf(1.0 / q)
        }
    })
}
