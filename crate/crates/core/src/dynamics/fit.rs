//! Least-squares fits of decay laws to a sampled `H(t)`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Samples with `H` at or below this value are ignored.
pub const FIT_FLOOR: f64 = 1e-13;
const MIN_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayLaw {
    /// `log H = log C - K t`.
    Exponential,
    /// `log H = log C - K log(1 + t)`; `K` is the algebraic exponent.
    Algebraic,
    /// `log H = log C - K t^(1/(2-gamma))`.
    StretchedExp,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LawFit {
    pub law: DecayLaw,
    pub rate: f64,
    pub log_c: f64,
    /// Root mean square residual in `log H`.
    pub rms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub best: LawFit,
    pub fits: Vec<LawFit>,
    pub samples_used: usize,
}

impl DecayFit {
    pub fn get(&self, law: DecayLaw) -> LawFit {
        *self.fits.iter().find(|f| f.law == law).expect("all laws are fitted")
    }
}

/// Line fit `y = c - rate x`, returning `(rate, c, rms)`.
fn line(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let slope = sxy / sxx;
    let c = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - c - slope * u).powi(2)).sum();
    Some((-slope, c, (rss / n).sqrt()))
}

/// Fits all three laws to `(t, H)` and picks the one with the smallest residual.
/// `gamma` sets the stretched exponent.
pub fn fit_decay(t: &[f64], h: &[f64], gamma: f64) -> Result<DecayFit> {
    if t.len() != h.len() {
        return Err(Error::invalid("t and H must have equal length"));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let (ts, ys): (Vec<f64>, Vec<f64>) =
        t.iter().zip(h).filter(|(_, v)| **v > FIT_FLOOR && v.is_finite()).map(|(s, v)| (*s, v.ln())).unzip();
    if ts.len() < MIN_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_SAMPLES} samples with H > {FIT_FLOOR:e}, got {}", ts.len())));
    }
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(spread > 1e-12) {
        return Err(Error::invalid("H is constant over the samples; no decay to fit"));
    }
    let r = 1.0 / (2.0 - gamma);
    let laws: [(DecayLaw, Box<dyn Fn(f64) -> f64>); 3] = [
        (DecayLaw::Exponential, Box::new(|s| s)),
        (DecayLaw::Algebraic, Box::new(|s: f64| s.ln_1p())),
        (DecayLaw::StretchedExp, Box::new(move |s: f64| s.powf(r))),
    ];
    let mut fits = Vec::with_capacity(3);
    for (law, map) in laws.iter() {
        let xs: Vec<f64> = ts.iter().map(|s| map(*s)).collect();
        let (rate, log_c, rms) = line(&xs, &ys).ok_or_else(|| Error::invalid("sample times are all equal"))?;
        fits.push(LawFit { law: *law, rate, log_c, rms });
    }
    let best = *fits.iter().min_by(|a, b| a.rms.total_cmp(&b.rms)).unwrap();
    Ok(DecayFit { best, fits, samples_used: ts.len() })
}
