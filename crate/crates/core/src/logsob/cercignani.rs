//! Certified lower bounds for the dissipation in terms of the relative free
//! energy, near and far from equilibrium.

use std::f64::consts::{E, LN_2};

use serde::Serialize;

use super::constants::logsob_constants;
use super::measures::measures_with_rate;
use crate::error::{Error, Result};
use crate::model::{
    equilibrium_monomer_density, series, CoefficientModel, EquilibriumInfo, LogQIter, Saturation, Weight,
};

/// Range over which model sequences are scanned for suprema and infima.
const SCAN: usize = 100_000;
/// Subintervals of the monomer window for the uniform constant.
const WINDOW_CELLS: usize = 256;
const SERIES_TOL: f64 = 1e-13;
const LARGE_SCAN_CAP: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Gamma1,
    GammaLt1,
    SmallOrLargeC1,
    ExpMoment,
}

#[derive(Clone, Debug, Serialize)]
pub struct CercignaniReport {
    pub regime: Regime,
    #[serde(rename = "K")]
    pub k: f64,
    pub exponent: f64,
    pub gamma: f64,
    pub epsilon: Option<f64>,
    /// Log-Sobolev constant used for `K`.
    pub lambda: f64,
    pub m: usize,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    pub flags: Vec<String>,
    pub beta: Option<f64>,
    pub mu: Option<f64>,
    #[serde(rename = "K1")]
    pub k1: Option<f64>,
    #[serde(rename = "K2")]
    pub k2: Option<f64>,
    /// Monomer window `(lo, hi)` on which `K` holds.
    pub window: (f64, f64),
    /// Closed form for `K` at the evaluation point, when the saturation mass is finite.
    pub k_closed_form: Option<f64>,
    /// `K` at the evaluation point with the numerically computed log-Sobolev constant.
    pub k_numeric: Option<f64>,
    pub lambda_numeric: Option<f64>,
}

/// `1 + sup_k k (1 + log(k/2)) eta^(k/2) + 2 eta / (1 - eta)`.
pub fn c_eta(eta: f64) -> f64 {
    let mut best = 0.0f64;
    let mut prev = 0.0f64;
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        let t = kf * (1.0 + (kf / 2.0).ln()) * (0.5 * kf * eta.ln()).exp();
        best = best.max(t);
        if k > 3 && t < prev && t < 1e-12 * best {
            break;
        }
        prev = t;
        k += 1;
    }
    1.0 + best + 2.0 * eta / (1.0 - eta)
}

/// `sup_{k >= 1} |log alpha_{k+1}| / (k + 1)` over the scan range.
pub fn log_alpha_rate(model: &CoefficientModel) -> Result<f64> {
    let lzs = model.zs()?.ln();
    Ok(LogQIter::new(model)
        .take(SCAN)
        .enumerate()
        .skip(1)
        .map(|(k, lq)| (lq + k as f64 * lzs).abs() / (k + 1) as f64)
        .fold(0.0, f64::max))
}

/// Explicit log-Sobolev constant for `c1 <= eta1 zs`, rates `a_i = i`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExplicitLambda {
    pub lambda: f64,
    pub eta1: f64,
    pub c_eta: f64,
    pub log_alpha_rate: f64,
}

pub fn explicit_lambda(model: &CoefficientModel, eta1: f64) -> Result<ExplicitLambda> {
    if !(eta1 > 0.0 && eta1 < 1.0) {
        return Err(Error::invalid(format!("eta1 = {eta1} must lie in (0, 1)")));
    }
    let c = c_eta(eta1);
    let s = log_alpha_rate(model)?;
    let om = 1.0 - eta1;
    let bracket = 3.0 * eta1 + 4.0 * (1.0 + 2.0 * E * eta1 * s + E * eta1 * (1.0 / om).ln());
    let lambda = 120.0 * c / (E * om * om * om) * bracket;
    Ok(ExplicitLambda { lambda, eta1, c_eta: c, log_alpha_rate: s })
}

/// `c1^3 A / (Lambda S (c1^2 + 2 rho S))` with `S = sum Q_i c1^i`, `A = sum i Q_i c1^i`.
pub fn k_at(model: &CoefficientModel, rho: f64, c1: f64, lambda: f64) -> Result<f64> {
    let s = series(model, c1, Weight::Pow(0), 0, SERIES_TOL)?;
    let a = series(model, c1, Weight::Pow(1), 0, SERIES_TOL)?;
    let s_up = s.value + s.tail_bound;
    Ok(c1.powi(3) * a.value / (lambda * s_up * (c1 * c1 + 2.0 * rho * s_up)))
}

/// Lower bound of [`k_at`] over `c1` in `[lo, hi]`, from monotone bounds on
/// geometric cells.
pub fn window_k(model: &CoefficientModel, rho: f64, lo: f64, hi: f64, lambda: f64) -> Result<f64> {
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::invalid(format!("empty window ({lo}, {hi})")));
    }
    let r = (hi / lo).ln() / WINDOW_CELLS as f64;
    let pts: Vec<f64> = (0..=WINDOW_CELLS).map(|j| if j == WINDOW_CELLS { hi } else { lo * (r * j as f64).exp() }).collect();
    let mut s_up = Vec::with_capacity(pts.len());
    let mut a_lo = Vec::with_capacity(pts.len());
    for &u in &pts {
        let s = series(model, u, Weight::Pow(0), 0, SERIES_TOL)?;
        let a = series(model, u, Weight::Pow(1), 0, SERIES_TOL)?;
        s_up.push(s.value + s.tail_bound);
        a_lo.push(a.value);
    }
    let mut k = f64::INFINITY;
    for j in 0..WINDOW_CELLS {
        let (u, v) = (pts[j], pts[j + 1]);
        let cell = u.powi(3) * a_lo[j] / (lambda * s_up[j + 1] * (v * v + 2.0 * rho * s_up[j + 1]));
        k = k.min(cell);
    }
    Ok(k)
}

/// `inf_i a_i / i^g` and `sup_i a_i / i^g` (exactly 1 for the built-in families).
fn rate_bounds(model: &CoefficientModel, g: f64) -> (f64, f64) {
    if model.is_builtin() && (model.gamma() - g).abs() < 1e-15 {
        return (1.0, 1.0);
    }
    (1..=SCAN).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
        let r = model.a(i) / (i as f64).powf(g);
        (lo.min(r), hi.max(r))
    })
}

fn equilibrium(model: &CoefficientModel, rho: f64) -> Result<EquilibriumInfo> {
    equilibrium_monomer_density(model, rho, 1e-12)
}

struct LinearK {
    k: f64,
    lambda: ExplicitLambda,
}

/// Uniform constant on `[lo, hi]` for the rates `a_i = i` with the weights of `model`.
fn linear_k(model: &CoefficientModel, rho: f64, lo: f64, hi: f64, eta1: f64) -> Result<LinearK> {
    let lin = model.linear_companion()?;
    let lambda = explicit_lambda(&lin, eta1)?;
    let k = window_k(&lin, rho, lo, hi, lambda.lambda)?;
    Ok(LinearK { k, lambda })
}

struct Numeric {
    m: usize,
    d1: f64,
    d2: f64,
    b1: f64,
    b2: f64,
    lambda: f64,
    k: f64,
    flags: Vec<String>,
}

fn numeric_at(model: &CoefficientModel, rho: f64, c1: f64) -> Result<Numeric> {
    let pair = measures_with_rate(model, c1, 64, |i| i as f64)?;
    let ls = logsob_constants(&pair)?;
    let k = k_at(model, rho, c1, ls.lambda)?;
    Ok(Numeric { m: ls.m, d1: ls.d1, d2: ls.d2, b1: ls.b1, b2: ls.b2, lambda: ls.lambda, k, flags: ls.flags })
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

/// Linear inequality `D_bar >= K H` for `delta < c1 < zs - delta`, `gamma = 1`.
///
/// `K` is uniform over the window. The numerical log-Sobolev data are
/// evaluated at `c1`, or at the equilibrium monomer density when `c1` is `None`.
pub fn cercignani_gamma1(model: &CoefficientModel, rho: f64, delta: f64, c1: Option<f64>) -> Result<CercignaniReport> {
    if model.gamma() != 1.0 {
        return Err(Error::invalid(format!(
            "linear inequality needs gamma = 1, got {}",
            model.gamma()
        )));
    }
    check_rho(rho)?;
    let eq = equilibrium(model, rho)?;
    let zs = eq.z_s;
    let (lo, hi) = (delta, zs - delta);
    if !(delta > 0.0 && lo < hi) {
        return Err(Error::invalid(format!("delta = {delta} leaves no window below zs = {zs}")));
    }
    if eq.z_bar + delta >= zs {
        return Err(Error::invalid(format!("z_bar + delta = {} is not below zs", eq.z_bar + delta)));
    }
    if let Some(c) = c1 {
        if !(c > lo && c < hi) {
            return Err(Error::invalid(format!("c1 = {c} outside ({lo}, {hi})")));
        }
    }
    let eta1 = (eq.z_bar + delta).max(hi) / zs;
    let lin = linear_k(model, rho, lo, hi, eta1)?;
    let (rate_lo, _) = rate_bounds(model, 1.0);
    let mut flags = eq.flags.clone();
    if !model.is_builtin() {
        flags.push("custom rates: inf a_i/i taken over the scan range".into());
    }
    let at = c1.unwrap_or(eq.z_bar);
    let num = numeric_at(model, rho, at)?;
    flags.extend(num.flags);
    let k_closed_form = match eq.rho_s {
        Saturation::Finite(rs) => Some(
            rate_lo * zs * zs * at * at / (lin.lambda.lambda * (zs + rs) * (zs * zs + 2.0 * rho * (zs + rs))),
        ),
        _ => None,
    };
    Ok(CercignaniReport {
        regime: Regime::Gamma1,
        k: rate_lo * lin.k,
        exponent: 1.0,
        gamma: 1.0,
        epsilon: None,
        lambda: lin.lambda.lambda,
        m: num.m,
        d1: num.d1,
        d2: num.d2,
        b1: num.b1,
        b2: num.b2,
        flags,
        beta: None,
        mu: None,
        k1: None,
        k2: None,
        window: (lo, hi),
        k_closed_form,
        k_numeric: Some(rate_lo * num.k),
        lambda_numeric: Some(num.lambda),
    })
}

fn check_sublinear(model: &CoefficientModel) -> Result<()> {
    if !(model.gamma() < 1.0) {
        return Err(Error::invalid("this regime needs gamma < 1"));
    }
    Ok(())
}

/// `(K1^((beta-gamma)/(1-gamma)) / (B M))^((1-gamma)/(beta-1))` in log space.
fn interpolate_k(k1: f64, gamma: f64, beta: f64, b_m: f64) -> f64 {
    let p = (beta - gamma) / (beta - 1.0);
    let q = (1.0 - gamma) / (beta - 1.0);
    (p * k1.ln() - q * b_m.ln()).exp()
}

/// `D_bar >= K H^((beta-gamma)/(beta-1))` for `delta < c1 < zs - delta`,
/// `gamma < 1`, on states with `M_beta <= m_beta`.
pub fn cercignani_gamma_lt1(
    model: &CoefficientModel,
    rho: f64,
    delta: f64,
    beta: f64,
    m_beta: f64,
) -> Result<CercignaniReport> {
    check_sublinear(model)?;
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must exceed 1, got {beta}")));
    }
    if !(m_beta > 0.0 && m_beta.is_finite()) {
        return Err(Error::invalid(format!("M_beta must be positive and finite, got {m_beta}")));
    }
    let lin = model.linear_companion()?;
    let base = cercignani_gamma1(&lin, rho, delta, None)?;
    let gamma = model.gamma();
    let zs = model.zs()?;
    let (q_sup, _) = model.q_ratio_bounds(SCAN)?;
    let b = 2.0 * (zs - delta + q_sup);
    let (rate_lo, _) = rate_bounds(model, gamma);
    let k = rate_lo * interpolate_k(base.k, gamma, beta, b * m_beta);
    let mut flags = base.flags.clone();
    flags.extend(model.hypothesis_flags(64));
    Ok(CercignaniReport {
        regime: Regime::GammaLt1,
        k,
        exponent: (beta - gamma) / (beta - 1.0),
        gamma,
        beta: Some(beta),
        k_closed_form: None,
        k_numeric: None,
        flags,
        ..base
    })
}

/// Lower bound of the dissipation for small monomer concentration.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmallC1Bound {
    /// States with `c1 < delta1` satisfy `D_bar >= epsilon`.
    pub delta1: f64,
    pub epsilon: f64,
    /// Value of the defining expression at `delta = 0`.
    pub limit: f64,
}

/// Power moment `M_beta <= m_beta` or exponential moment `M_mu^exp <= m_exp`
/// assumed along the states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MomentBound {
    None,
    Power { beta: f64, m_beta: f64 },
    Exp { mu: f64, m_exp: f64 },
}

impl MomentBound {
    /// A bound on `M_2` implied by the moment, when one is available.
    fn as_power(self) -> Option<(f64, f64)> {
        match self {
            MomentBound::None => None,
            MomentBound::Power { beta, m_beta } => Some((beta, m_beta)),
            // i^2 <= (2 / (mu e))^2 e^(mu i)
            MomentBound::Exp { mu, m_exp } => Some((2.0, 4.0 * m_exp / (mu * E).powi(2))),
        }
    }
}

/// Largest `delta` with
/// `Qlo alo (m_low - a_1 delta) - 2 sqrt(delta) sqrt(Qhi ahi) s_up >= Qlo alo m_low / 2`.
pub fn uniform_bound_small_c1(model: &CoefficientModel, rho: f64, moment: MomentBound) -> Result<SmallC1Bound> {
    check_rho(rho)?;
    let gamma = model.gamma();
    let (q_hi, q_lo) = model.q_ratio_bounds(SCAN)?;
    let (a_hi, a_lo) = model.a_ratio_bounds(SCAN);
    let (r_lo, r_hi) = rate_bounds(model, gamma);
    let m_gamma_low = if gamma == 1.0 {
        rho
    } else {
        let (beta, m_beta) = moment
            .as_power()
            .ok_or_else(|| Error::invalid("gamma < 1 needs a moment bound"))?;
        if !(beta > 1.0) {
            return Err(Error::invalid(format!("beta must exceed 1, got {beta}")));
        }
        rho.powf((beta - gamma) / (beta - 1.0)) / m_beta.powf((1.0 - gamma) / (beta - 1.0))
    };
    let m_low = r_lo * m_gamma_low;
    let s_up = r_hi * rho;
    let a1 = model.a(1);
    let head = q_lo * a_lo;
    let g = |d: f64| head * (m_low - a1 * d) - 2.0 * d.sqrt() * (q_hi * a_hi).sqrt() * s_up;
    let target = 0.5 * head * m_low;
    let (mut lo, mut hi) = (0.0, m_low / a1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !(lo > 0.0) {
        return Err(Error::NotConverged("no positive delta meets the small-c1 target".into()));
    }
    Ok(SmallC1Bound { delta1: lo, epsilon: target, limit: g(0.0) })
}

/// Lower bound of the dissipation for `c1 > z_bar + delta`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LargeC1Bound {
    pub delta: f64,
    pub epsilon1: f64,
    /// `min_{i <= I} a_i Q_i x^(i-1) (z_bar + delta)(sqrt(z_bar + delta) - sqrt(x))^2`.
    pub direct: f64,
    /// The same bound routed through the mass excess `sum i^2 Q_i z_bar^(i-1) delta / 2`.
    pub chain: f64,
    /// Largest index at which the first small ratio `c_{i+1}/Q_{i+1} < x c_i/Q_i` can occur.
    pub i_star: usize,
    pub x: f64,
}

pub fn uniform_bound_large_c1(model: &CoefficientModel, rho: f64, delta: f64) -> Result<LargeC1Bound> {
    check_rho(rho)?;
    let eq = equilibrium(model, rho)?;
    large_c1_from(model, &eq, delta)
}

fn large_c1_from(model: &CoefficientModel, eq: &EquilibriumInfo, delta: f64) -> Result<LargeC1Bound> {
    let (zb, zs, rho) = (eq.z_bar, eq.z_s, eq.rho);
    if !(delta > 0.0 && zb + delta < zs) {
        return Err(Error::invalid(format!("need 0 < delta and z_bar + delta < zs, got delta = {delta}")));
    }
    let x = zb + 0.5 * delta;
    let lx = x.ln();
    // G(i) = sum_{j > i} j Q_j x^(j-1)
    let g0 = series(model, x, Weight::Pow(1), 0, SERIES_TOL)?.value / x;
    let threshold = g0 - rho / (zb + delta);
    let mut g = g0;
    let mut i_star = 0usize;
    let mut min_direct = f64::INFINITY;
    let mut min_a = f64::INFINITY;
    let mut max_c = 0.0f64;
    for (k, lq) in LogQIter::new(model).enumerate() {
        let i = k + 1;
        let qx = (lq + (i as f64 - 1.0) * lx).exp();
        g -= i as f64 * qx;
        if g < threshold && i > 1 {
            break;
        }
        if g >= threshold {
            i_star = i;
        }
        let a = model.a(i);
        min_a = min_a.min(a);
        min_direct = min_direct.min(a * qx);
        max_c = max_c.max(g / (qx * x));
        if i >= LARGE_SCAN_CAP {
            return Err(Error::NotConverged("large-c1 index bound did not settle".into()));
        }
    }
    let top = zb + delta;
    let gap = (top.sqrt() - x.sqrt()).powi(2);
    let direct = min_direct * top * gap;
    let excess = series(model, zb, Weight::Pow(2), 0, SERIES_TOL)?.value / zb * 0.5 * delta;
    let chain = excess / max_c * min_a * gap / x;
    let epsilon1 = direct.max(chain);
    Ok(LargeC1Bound { delta, epsilon1, direct, chain, i_star, x })
}

/// Certified lower bound `D_bar >= rate(H)` valid for every state of mass
/// `rho` satisfying the moment bound.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub report: CercignaniReport,
    pub small: SmallC1Bound,
    pub large: LargeC1Bound,
    pub z_bar: f64,
}

impl Certificate {
    pub fn window(&self) -> (f64, f64) {
        self.report.window
    }

    pub fn epsilon(&self) -> f64 {
        self.report.epsilon.expect("certificates carry epsilon")
    }

    pub fn in_window(&self, c1: f64) -> bool {
        let (lo, hi) = self.window();
        c1 > lo && c1 < hi
    }

    /// Lower bound on `D_bar` at a state with relative free energy `h`,
    /// valid inside the window.
    pub fn window_rate(&self, h: f64) -> f64 {
        let r = &self.report;
        match r.regime {
            Regime::ExpMoment => {
                let (k1, k2) = (r.k1.unwrap(), r.k2.unwrap());
                let u = (1.0 / (k2 * h)).ln();
                if u <= (4.0f64).ln() {
                    // never attained inside the window
                    return f64::INFINITY;
                }
                k1 * h / u.powf(1.0 - r.gamma)
            }
            _ => r.k * h.powf(r.exponent),
        }
    }

    /// Lower bound on `D_bar` valid for every admissible state.
    pub fn rate(&self, h: f64) -> f64 {
        self.window_rate(h).min(self.epsilon())
    }
}

/// Clamp for the exponential moment rate.
fn clamp_mu(mu: f64, flags: &mut Vec<String>) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    let cap = 4.0 * LN_2 * (1.0 - 1e-9);
    if mu >= cap {
        flags.push(format!("mu = {mu} clamped to {cap}"));
        Ok(cap)
    } else {
        Ok(mu)
    }
}

/// Bound for the exponential-moment regime:
/// `D_bar >= min(K1 H / |log(K2 H)|^(1-gamma), epsilon)`.
pub fn exp_regime(model: &CoefficientModel, rho: f64, mu: f64, m_exp: f64, delta: f64) -> Result<CercignaniReport> {
    Ok(certify(model, rho, delta, MomentBound::Exp { mu, m_exp })?.report)
}

/// Builds the full certificate: the window constant from the near-equilibrium
/// bound, and `epsilon` covering both exits from the window.
///
/// The window is `(delta_w, z_bar + delta_l)` with `delta_w = min(delta, delta1)`
/// and `delta_l = min(zs - delta_w - z_bar, (zs - z_bar) / 2)`.
pub fn certify(model: &CoefficientModel, rho: f64, delta: f64, moment: MomentBound) -> Result<Certificate> {
    check_rho(rho)?;
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    let gamma = model.gamma();
    let mut flags = Vec::new();
    let moment = match moment {
        MomentBound::Exp { mu, m_exp } => MomentBound::Exp { mu: clamp_mu(mu, &mut flags)?, m_exp },
        other => other,
    };
    if gamma < 1.0 && moment == MomentBound::None {
        return Err(Error::invalid("gamma < 1 needs a moment bound (beta with M_beta, or mu with M_exp)"));
    }
    let eq = equilibrium(model, rho)?;
    let (zb, zs) = (eq.z_bar, eq.z_s);
    let small = uniform_bound_small_c1(model, rho, moment)?;
    let dw = delta.min(small.delta1);
    let dl = (zs - dw - zb).min(0.5 * (zs - zb));
    if !(dl > 0.0) {
        return Err(Error::invalid("window collapses: z_bar too close to zs"));
    }
    let large = large_c1_from(model, &eq, dl)?;
    let epsilon = small.epsilon.min(large.epsilon1);
    let (lo, hi) = (dw, zb + dl);
    let lin = linear_k(model, rho, lo, hi, hi / zs)?;
    flags.extend(eq.flags.iter().cloned());
    flags.extend(model.hypothesis_flags(64));
    let num = numeric_at(model, rho, zb)?;
    flags.extend(num.flags.iter().cloned());
    let (rate_lo, _) = rate_bounds(model, gamma);
    if !model.is_builtin() {
        flags.push("custom rates: rate ratios taken over the scan range".into());
    }
    let mut report = CercignaniReport {
        regime: Regime::Gamma1,
        k: rate_lo * lin.k,
        exponent: 1.0,
        gamma,
        epsilon: Some(epsilon),
        lambda: lin.lambda.lambda,
        m: num.m,
        d1: num.d1,
        d2: num.d2,
        b1: num.b1,
        b2: num.b2,
        flags,
        beta: None,
        mu: None,
        k1: None,
        k2: None,
        window: (lo, hi),
        k_closed_form: None,
        k_numeric: Some(rate_lo * num.k),
        lambda_numeric: Some(num.lambda),
    };
    let (q_sup, _) = model.q_ratio_bounds(SCAN)?;
    match moment {
        MomentBound::None => {}
        MomentBound::Power { beta, m_beta } if gamma < 1.0 => {
            if !(beta > 1.0) {
                return Err(Error::invalid(format!("beta must exceed 1, got {beta}")));
            }
            let b = 2.0 * (hi + q_sup);
            report.regime = Regime::GammaLt1;
            report.k = rate_lo * interpolate_k(lin.k, gamma, beta, b * m_beta);
            report.exponent = (beta - gamma) / (beta - 1.0);
            report.beta = Some(beta);
            report.k_numeric = None;
        }
        MomentBound::Exp { mu, m_exp } if gamma < 1.0 => {
            let f = 2.0 * (zs + q_sup) * m_exp;
            let k = lin.k;
            report.regime = Regime::ExpMoment;
            report.k = k;
            report.k1 = Some(rate_lo * k / (2.0 * (2.0 / mu).powf(1.0 - gamma)));
            report.k2 = Some(mu * E * k / (4.0 * f));
            report.mu = Some(mu);
            report.k_numeric = None;
        }
        _ => {}
    }
    Ok(Certificate { report, small, large, z_bar: zb })
}

/// Same constants as [`certify`], labelled as the far-from-equilibrium regime.
pub fn far_from_equilibrium(model: &CoefficientModel, rho: f64, delta: f64, moment: MomentBound) -> Result<CercignaniReport> {
    let mut r = certify(model, rho, delta, moment)?.report;
    r.regime = Regime::SmallOrLargeC1;
    Ok(r)
}

/// Lower bound on `M_gamma(f)` from `M_1(f)` and `M_mu^exp(f)`:
/// `M_1 / (2 ((2/mu) log(4 M_exp / (mu e M_1)))^(1-gamma))`, for `mu < 4 log 2`.
pub fn exp_moment_interpolation(m1: f64, m_exp: f64, mu: f64, gamma: f64) -> f64 {
    let l = (2.0 / mu) * (4.0 * m_exp / (mu * E * m1)).ln();
    m1 / (2.0 * l.powf(1.0 - gamma))
}
