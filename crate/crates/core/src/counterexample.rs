//! A family of states of fixed mass along which `D/H -> 0` when `a_i = i^gamma`,
//! `gamma < 1`: half the mass sits in a fixed geometric profile, the other half
//! spreads into an ever slower geometric mode.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::ClusterState;
use crate::model::{equilibrium_monomer_density, CoefficientModel};

/// Relative size of the neglected slow-mode tail.
const TAIL_TOL: f64 = 1e-14;

pub const DEFAULT_GRID: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

/// `Q_i = e^(-lambda (i-1))`, `a_i = i^gamma`, and states
/// `c_i = e^lambda e^(-xi i) + A_eps e^(-eps i)` of mass `rho`.
#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleFamily {
    pub lambda: f64,
    pub rho: f64,
    pub gamma: f64,
    /// Rate of the fixed profile, `rho/2 = e^(lambda - xi) / (1 - e^(-xi))^2`.
    pub xi: f64,
}

/// Solves `(rho/2) (1 - x)^2 = e^lambda x` for `x = e^(-xi)` in `(0, 1)`.
pub fn solve_xi(lambda: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite() && lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("need rho > 0 and lambda >= 0, got ({rho}, {lambda})")));
    }
    let e = lambda.exp();
    let s = rho + e;
    // smaller root of rho x^2 - 2 (rho + e) x + rho = 0, in the stable form
    let x = rho / (s + (s * s - rho * rho).sqrt());
    Ok(-x.ln())
}

/// `log(e^u + e^v)`.
fn log_add(u: f64, v: f64) -> f64 {
    let (hi, lo) = if u > v { (u, v) } else { (v, u) };
    hi + (lo - hi).exp().ln_1p()
}

impl CounterexampleFamily {
    pub fn new(lambda: f64, rho: f64, gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::invalid(format!("gamma must lie in [0, 1), got {gamma}")));
        }
        let xi = solve_xi(lambda, rho)?;
        Ok(CounterexampleFamily { lambda, rho, gamma, xi })
    }

    /// The model `a_i = i^gamma`, `b_{i+1} = i^gamma e^lambda`, `z_s = e^lambda`.
    pub fn model(&self) -> Result<CoefficientModel> {
        let (g, l) = (self.gamma, self.lambda);
        CoefficientModel::custom_fn(
            g,
            move |i| (i as f64).powf(g),
            move |i| ((i - 1) as f64).powf(g) * l.exp(),
            Some(l.exp()),
        )
    }

    /// `A_eps = (rho/2) e^eps (1 - e^(-eps))^2`, so the slow mode carries mass `rho/2`.
    pub fn amplitude(&self, eps: f64) -> f64 {
        0.5 * self.rho * eps.exp() * (-(-eps).exp_m1()).powi(2)
    }

    /// Truncation with slow-mode tail `A_eps e^(-eps N) / eps` below `1e-14 / 40`.
    pub fn truncation(&self, eps: f64) -> usize {
        let a = self.amplitude(eps);
        let n = (a.ln() - TAIL_TOL.ln() + (40.0 / eps).ln()) / eps;
        n.max(1.0).ceil() as usize + 10
    }

    pub fn log_concentration(&self, i: usize, eps: f64) -> f64 {
        let x = i as f64;
        let slow = if eps > 0.0 { self.amplitude(eps).ln() - eps * x } else { f64::NEG_INFINITY };
        log_add(self.lambda - self.xi * x, slow)
    }

    /// The state on `1..=n`, by default up to [`truncation`](Self::truncation).
    pub fn build_state(&self, eps: f64, n: Option<usize>) -> Result<ClusterState> {
        check_eps(eps)?;
        if eps >= self.xi {
            return Err(Error::invalid(format!("epsilon = {eps} must be below xi = {}", self.xi)));
        }
        let n = n.unwrap_or_else(|| self.truncation(eps));
        ClusterState::new((1..=n).map(|i| self.log_concentration(i, eps).exp()).collect())
    }

    /// Mass of the full state, with both tails past `n` in closed form.
    pub fn mass_with_tail(&self, eps: f64, n: usize) -> f64 {
        let head: f64 = (1..=n).rev().map(|i| i as f64 * self.log_concentration(i, eps).exp()).sum();
        let tail = |amp: f64, r: f64| {
            let x = (-r).exp();
            amp * crate::model::geometric_tail(1, n, x)
        };
        head + tail(self.lambda.exp(), self.xi) + if eps > 0.0 { tail(self.amplitude(eps), eps) } else { 0.0 }
    }

    /// Sign condition on the fluxes used in the decay argument:
    /// `1 - 2 e^(-(xi - eps)) - A_eps e^(-lambda) > 0`.
    pub fn flux_condition(&self, eps: f64) -> f64 {
        1.0 - 2.0 * (-(self.xi - eps)).exp() - self.amplitude(eps) * (-self.lambda).exp()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {eps}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatioRow {
    pub eps: f64,
    pub n: usize,
    pub amplitude: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub ratio: f64,
    pub ratio_s2: f64,
    pub ratio_s5: f64,
    pub mass: f64,
    pub flux_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioStudy {
    pub family: CounterexampleFamily,
    pub z_bar: f64,
    /// `H` of the fixed profile alone, the limit of `H` along the family.
    pub h_limit: f64,
    pub rows: Vec<RatioRow>,
    pub flags: Vec<String>,
}

impl RatioStudy {
    /// Whether `ratio` strictly decreases down the grid.
    pub fn ratio_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].ratio < w[0].ratio)
    }
}

/// `(D, H)` at a given `eps` (or the fixed profile alone for `eps = 0`),
/// computed in log space with `H` taken against `Q_i z_bar^i`.
fn evaluate(f: &CounterexampleFamily, eps: f64, n: usize, log_z: f64) -> (f64, f64) {
    let lc: Vec<f64> = (1..=n).map(|i| f.log_concentration(i, eps)).collect();
    let log_q = |i: usize| -f.lambda * (i as f64 - 1.0);
    let mut h = 0.0;
    for i in (1..=n).rev() {
        let l = lc[i - 1];
        let lq = log_q(i) + log_z * i as f64;
        h += l.exp() * (l - lq) - l.exp() + lq.exp();
    }
    // equilibrium tail past n
    let y = (log_z - f.lambda).exp();
    h += f.lambda.exp() * crate::model::geometric_tail(0, n, y);
    let mut d = 0.0;
    for i in (1..n).rev() {
        let lx = lc[0] + lc[i - 1] - log_q(i);
        let ly = lc[i] - log_q(i + 1);
        // a_i Q_i (e^lx - e^ly) (lx - ly)
        let diff = ly.exp() * (lx - ly).exp_m1();
        d += (i as f64).powf(f.gamma) * log_q(i).exp() * diff * (lx - ly);
    }
    (d, h)
}

/// Evaluates `D`, `H`, `D/H`, `D/H^2` and `D/H^5` along a strictly decreasing grid.
pub fn ratio_study(family: &CounterexampleFamily, grid: &[f64]) -> Result<RatioStudy> {
    if grid.is_empty() {
        return Err(Error::invalid("epsilon grid is empty"));
    }
    for &e in grid {
        check_eps(e)?;
        if e >= family.xi {
            return Err(Error::invalid(format!("eps = {e} must be below xi = {}", family.xi)));
        }
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("epsilon grid must be strictly decreasing"));
    }
    let model = family.model()?;
    let eq = equilibrium_monomer_density(&model, family.rho, 1e-14)?;
    let log_z = eq.z_bar.ln();
    let mut flags = vec!["saturation mass is infinite for this family".to_string()];
    let rows: Vec<RatioRow> = grid
        .par_iter()
        .map(|&eps| {
            let n = family.truncation(eps);
            let (d, h) = evaluate(family, eps, n, log_z);
            RatioRow {
                eps,
                n,
                amplitude: family.amplitude(eps),
                d,
                h,
                ratio: d / h,
                ratio_s2: d / (h * h),
                ratio_s5: d / h.powi(5),
                mass: family.mass_with_tail(eps, n),
                flux_ok: family.flux_condition(eps) > 0.0,
            }
        })
        .collect();
    let bad: Vec<String> = rows.iter().filter(|r| !r.flux_ok).map(|r| format!("{:e}", r.eps)).collect();
    if !bad.is_empty() {
        flags.push(format!("flux sign condition fails at eps = {}", bad.join(", ")));
    }
    let n0 = (((TAIL_TOL.ln() - family.lambda) / -family.xi).ceil() as usize).max(2) + 10;
    let (_, h_limit) = evaluate(family, 0.0, n0, log_z);
    Ok(RatioStudy { family: family.clone(), z_bar: eq.z_bar, h_limit, rows, flags })
}

/// `B = sum_{i>=1} i^gamma e^(-eps i)` with a rigorous tail bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BSum {
    pub value: f64,
    pub tail_bound: f64,
    /// `eps^(1+gamma) B`, of order one as `eps -> 0`.
    pub scaled: f64,
}

pub fn b_eps_gamma(eps: f64, gamma: f64) -> Result<BSum> {
    check_eps(eps)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be non-negative, got {gamma}")));
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut i = 0usize;
    loop {
        i += 1;
        let x = i as f64;
        let term = (gamma * x.ln() - eps * x).exp();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        // log f is concave, so past i the terms fall at least like e^(-(eps - gamma/i) k)
        let slope = eps - gamma / x;
        if slope > 0.0 {
            let tail = term / (-(-slope).exp_m1()) - term;
            if tail <= 1e-15 * sum {
                return Ok(BSum { value: sum, tail_bound: tail, scaled: eps.powf(1.0 + gamma) * sum });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn xi_for_unit_weights() {
        assert_relative_eq!(solve_xi(0.0, 4.0).unwrap(), 2f64.ln(), max_relative = 1e-15);
        for (l, r) in [(0.0, 1.0), (0.7, 3.0), (2.0, 0.1)] {
            let x = (-solve_xi(l, r).unwrap()).exp();
            assert_relative_eq!(0.5 * r, l.exp() * x / (1.0 - x).powi(2), max_relative = 1e-12);
        }
    }

    #[test]
    fn amplitude_value() {
        let f = CounterexampleFamily::new(0.0, 4.0, 0.5).unwrap();
        let e = 0.1f64;
        assert_relative_eq!(f.amplitude(e), 2.0 * e.exp() * (1.0 - (-e).exp()).powi(2), max_relative = 1e-14);
        assert!((f.amplitude(0.1) - 0.020017).abs() < 1e-6);
    }

    #[test]
    fn mass_is_rho() {
        let f = CounterexampleFamily::new(0.5, 3.0, 0.5).unwrap();
        for eps in DEFAULT_GRID {
            let n = f.truncation(eps);
            assert!((f.mass_with_tail(eps, n) - 3.0).abs() < 1e-10);
            // the truncated state alone is within the tail tolerance
            let s = f.build_state(eps, None).unwrap();
            assert!((s.mass() - 3.0).abs() < 1e-10, "{}", s.mass());
        }
    }

    #[test]
    fn ratio_falls_for_unit_weights() {
        let f = CounterexampleFamily::new(0.0, 4.0, 0.5).unwrap();
        let st = ratio_study(&f, &DEFAULT_GRID).unwrap();
        assert_relative_eq!(st.h_limit, 0.1651242978779935, max_relative = 1e-10);
        assert!(st.ratio_decreasing());
        let (first, last) = (st.rows[0], st.rows[st.rows.len() - 1]);
        assert!(last.ratio / first.ratio < 0.2);
        assert!(st.rows.iter().filter(|r| r.eps <= 1e-2).all(|r| r.h >= 0.5 * st.h_limit));
        assert!(st.rows.windows(2).all(|w| w[1].ratio_s2 < w[0].ratio_s2));
        assert!(st.rows.iter().all(|r| !r.flux_ok));
        assert!(st.flags.iter().any(|s| s.contains("flux")));
    }

    #[test]
    fn matches_direct_functionals() {
        use crate::functionals::{dissipation, relative_free_energy};
        let f = CounterexampleFamily::new(0.3, 2.0, 0.5).unwrap();
        let m = f.model().unwrap();
        let eps = 0.1;
        let s = f.build_state(eps, None).unwrap();
        let z = equilibrium_monomer_density(&m, 2.0, 1e-14).unwrap().z_bar;
        let (d, h) = evaluate(&f, eps, s.len(), z.ln());
        assert_relative_eq!(d, dissipation(&s, &m).unwrap(), max_relative = 1e-9);
        assert_relative_eq!(h, relative_free_energy(&s, &m, z).unwrap(), max_relative = 1e-9);
    }

    #[test]
    fn eps_must_stay_below_xi() {
        let f = CounterexampleFamily::new(0.0, 4.0, 0.5).unwrap();
        assert!(f.build_state(0.7, None).is_err());
        assert_eq!(f.build_state(0.1, Some(50)).unwrap().len(), 50);
    }

    #[test]
    fn rejects_bad_grids() {
        let f = CounterexampleFamily::new(0.0, 4.0, 0.5).unwrap();
        assert!(ratio_study(&f, &[1e-2, 1e-1]).is_err());
        assert!(ratio_study(&f, &[]).is_err());
        assert!(ratio_study(&f, &[0.1, 0.0]).is_err());
        assert!(ratio_study(&f, &[0.8, 0.1]).is_err());
    }

    #[test]
    fn b_sum_closed_form() {
        let b = b_eps_gamma(0.01, 1.0).unwrap();
        let e = (-0.01f64).exp();
        assert_relative_eq!(b.value, e / (1.0 - e).powi(2), max_relative = 1e-12);
        assert!((b.value - 9999.9167).abs() < 1e-3);
    }

    #[test]
    fn b_sum_scaling() {
        let s: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|e| b_eps_gamma(*e, 0.5).unwrap().scaled).collect();
        for w in s.windows(2) {
            let r = w[1] / w[0];
            assert!((0.5..=2.0).contains(&r), "{s:?}");
        }
        let b: Vec<f64> = [0.05, 0.1, 0.2, 0.5].iter().map(|e| b_eps_gamma(*e, 0.5).unwrap().value).collect();
        assert!(b.windows(2).all(|w| w[1] < w[0]), "{b:?}");
    }
}
