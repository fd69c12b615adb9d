//! Explicit decay envelopes `H(t) <= envelope(t)` built from certified constants.

use serde::Serialize;

use super::cf::{cf_moment_bound, BoundForm};
use crate::error::{Error, Result};
use crate::logsob::{certify, Certificate, MomentBound, Regime};
use crate::model::CoefficientModel;

/// Closed-form shape of an envelope; `eval` uses the sharper piecewise curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeKind {
    /// `C e^(-K t)`.
    Exponential { c: f64, k: f64 },
    /// `(C + p K t)^(-1/p)` with `p = (1 - gamma) / (beta - 1)`.
    Algebraic { c: f64, k: f64, beta: f64, gamma: f64 },
    /// `C e^(-K t^(1/(2-gamma)))` once the linear phase is over.
    StretchedExp { c: f64, k: f64, gamma: f64 },
    /// `(C1 + C2 log(1 + s t))^(-1/q)`, valid up to a finite horizon.
    Logarithmic { c1: f64, c2: f64, s: f64, q: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayEnvelope {
    pub kind: EnvelopeKind,
    pub h0: f64,
    /// End of the phase where `H` falls at least at the uniform rate `epsilon`.
    pub t0: f64,
    pub epsilon: f64,
    /// Envelope value at `t0`.
    pub h_t0: f64,
    /// Last time for which the envelope is certified.
    pub horizon: Option<f64>,
    /// `K1, K2` of the stretched regime.
    stretched: Option<(f64, f64)>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn check_h0(h0: f64) -> Result<()> {
    if !(h0 >= 0.0 && h0.is_finite()) {
        return Err(Error::invalid(format!("H0 must be non-negative, got {h0}")));
    }
    Ok(())
}

impl DecayEnvelope {
    /// `D_bar >= min(K H, eps)`: linear decay at rate `eps` until `H = eps/K`,
    /// exponential afterwards.
    pub fn exponential(h0: f64, k: f64, eps: f64) -> Result<Self> {
        check_h0(h0)?;
        check_positive("K", k)?;
        check_positive("epsilon", eps)?;
        let thr = eps / k;
        let (t0, c) = if h0 <= thr { (0.0, h0) } else { ((h0 - thr) / eps, thr * (k * (h0 - thr) / eps).exp()) };
        Ok(DecayEnvelope {
            kind: EnvelopeKind::Exponential { c, k },
            h0,
            t0,
            epsilon: eps,
            h_t0: h0.min(thr),
            horizon: None,
            stretched: None,
        })
    }

    /// `D_bar >= min(K H^((beta-gamma)/(beta-1)), eps)`.
    pub fn algebraic(h0: f64, k: f64, eps: f64, beta: f64, gamma: f64) -> Result<Self> {
        check_h0(h0)?;
        check_positive("K", k)?;
        check_positive("epsilon", eps)?;
        if !(beta > 1.0 && (0.0..1.0).contains(&gamma)) {
            return Err(Error::invalid(format!("need beta > 1 and 0 <= gamma < 1, got ({beta}, {gamma})")));
        }
        let p = (1.0 - gamma) / (beta - 1.0);
        let thr = (eps / k).powf((beta - 1.0) / (beta - gamma));
        let t0 = ((h0 - thr) / eps).max(0.0);
        let h_t0 = h0.min(thr);
        let c = h_t0.powf(-p) - p * k * t0;
        Ok(DecayEnvelope {
            kind: EnvelopeKind::Algebraic { c, k, beta, gamma },
            h0,
            t0,
            epsilon: eps,
            h_t0,
            horizon: None,
            stretched: None,
        })
    }

    /// `D_bar >= min(K1 H / log(1/(K2 H))^(1-gamma), eps)` for `H < 1/(4 K2)`.
    pub fn stretched(h0: f64, k1: f64, k2: f64, eps: f64, gamma: f64) -> Result<Self> {
        check_h0(h0)?;
        check_positive("K1", k1)?;
        check_positive("K2", k2)?;
        check_positive("epsilon", eps)?;
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::invalid(format!("need 0 <= gamma < 1, got {gamma}")));
        }
        // g is increasing on (0, 1/K2); below h_star the window rate is the smaller one
        let g = |h: f64| k1 * h / (1.0 / (k2 * h)).ln().powf(1.0 - gamma);
        let cap = 0.25 / k2;
        let h_star = if g(cap) <= eps {
            cap
        } else {
            let (mut lo, mut hi) = (0.0, cap);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid) <= eps {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let t0 = ((h0 - h_star) / eps).max(0.0);
        let h_t0 = h0.min(h_star);
        let r = 2.0 - gamma;
        Ok(DecayEnvelope {
            kind: EnvelopeKind::StretchedExp { c: 1.0 / k2, k: (r * k1).powf(1.0 / r), gamma },
            h0,
            t0,
            epsilon: eps,
            h_t0,
            horizon: None,
            stretched: Some((k1, k2)),
        })
    }

    /// Envelope matching the regime of a certificate.
    pub fn from_certificate(cert: &Certificate, h0: f64) -> Result<Self> {
        let r = &cert.report;
        let eps = cert.epsilon();
        match r.regime {
            Regime::GammaLt1 => {
                let beta = r.beta.ok_or_else(|| Error::invalid("certificate lacks beta"))?;
                Self::algebraic(h0, r.k, eps, beta, r.gamma)
            }
            Regime::ExpMoment => {
                let (k1, k2) = r.k1.zip(r.k2).ok_or_else(|| Error::invalid("certificate lacks K1, K2"))?;
                Self::stretched(h0, k1, k2, eps, r.gamma)
            }
            _ => Self::exponential(h0, r.k, eps),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < self.t0 {
            return self.h0 - self.epsilon * t;
        }
        let s = t - self.t0;
        match self.kind {
            EnvelopeKind::Exponential { c, k } => c * (-k * t).exp(),
            EnvelopeKind::Algebraic { k, beta, gamma, .. } => {
                if self.h_t0 == 0.0 {
                    return 0.0;
                }
                let p = (1.0 - gamma) / (beta - 1.0);
                (self.h_t0.powf(-p) + p * k * s).powf(-1.0 / p)
            }
            EnvelopeKind::StretchedExp { gamma, .. } => {
                let (k1, k2) = self.stretched.expect("stretched constants");
                if self.h_t0 == 0.0 {
                    return 0.0;
                }
                let r = 2.0 - gamma;
                let u0 = (1.0 / (k2 * self.h_t0)).ln();
                (-(u0.powf(r) + r * k1 * s).powf(1.0 / r)).exp() / k2
            }
            EnvelopeKind::Logarithmic { c1, c2, s: rate, q } => (c1 + c2 * (rate * t).ln_1p()).powf(-1.0 / q),
        }
    }
}

/// Inputs of the logarithmic-rate envelope for the kernel `i^gamma + j^gamma`.
#[derive(Clone, Debug)]
pub struct CfEnvelopeInput<'a> {
    /// Model supplying the detailed-balance weights `Q`.
    pub q_model: &'a CoefficientModel,
    pub gamma: f64,
    /// Moment order `k > 1`.
    pub k: f64,
    pub rho: f64,
    pub delta: f64,
    pub h0: f64,
    /// `M_k` of the initial state.
    pub m0: f64,
    /// The envelope is certified on `[0, horizon]`.
    pub horizon: f64,
}

/// Logarithmic-rate envelope for the coagulation-fragmentation system.
///
/// The dissipation dominates the Becker-Doring one with `a_i = i^gamma`, so the
/// certificate of that model applies with the moment bound at the horizon fixing
/// the window. Along the run `M_k(t)` obeys the derived moment bound, and the
/// resulting inequality `H' <= -C0 H^(1+q) / (M0^q + q A t)` integrates to
/// `H <= (H0^(-q) + (C0/A) log(1 + q A t / M0^q))^(-1/q)`.
pub fn cf_log_envelope(input: &CfEnvelopeInput) -> Result<DecayEnvelope> {
    let CfEnvelopeInput { q_model, gamma, k, rho, delta, h0, m0, horizon } = *input;
    check_h0(h0)?;
    check_positive("horizon", horizon)?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid(format!("the logarithmic envelope needs 0 <= gamma < 1, got {gamma}")));
    }
    let m_max = cf_moment_bound(k, gamma, 0.0, rho, m0, horizon, BoundForm::Derived)?;
    let bd = comparison_model(q_model, gamma)?;
    let cert = certify(&bd, rho, delta, MomentBound::Power { beta: k, m_beta: m_max })?;
    let q = (1.0 - gamma) / (k - 1.0);
    let scale = m_max.powf(q);
    let k_window = cert.report.k * scale;
    let e_small = cert.small.epsilon * scale;
    let e_large = cert.large.epsilon1 * rho.powf(q);
    let c0 = if h0 > 0.0 { k_window.min(e_small.min(e_large) / h0.powf(1.0 + q)) } else { k_window };
    let a = (2f64.powf(k) - 2.0) * rho.powf((k - gamma) / (k - 1.0));
    let m0q = m0.powf(q);
    Ok(DecayEnvelope {
        kind: EnvelopeKind::Logarithmic { c1: h0.powf(-q), c2: c0 / a, s: q * a / m0q, q },
        h0,
        t0: 0.0,
        epsilon: e_small.min(e_large),
        h_t0: h0,
        horizon: Some(horizon),
        stretched: None,
    })
}

/// Becker-Doring model with `a_i = i^gamma` and the weights `Q` of `q_model`.
fn comparison_model(q_model: &CoefficientModel, gamma: f64) -> Result<CoefficientModel> {
    let zs = q_model.zs()?;
    let qm = q_model.clone();
    CoefficientModel::custom_fn(
        gamma,
        move |i| (i as f64).powf(gamma),
        move |i| ((i - 1) as f64).powf(gamma) * (-qm.log_ratio(i - 1)).exp(),
        Some(zs),
    )
}
