//! Time integration of the truncated systems with entropy diagnostics.

pub mod bd;
pub mod cf;
pub mod envelope;
pub mod fit;
pub mod integrator;

use serde::Serialize;

pub use bd::{bd_rhs, BdSystem};
pub use cf::{cf_moment_bound, cf_rhs, BoundForm, CfKernel, CfSystem};
pub use envelope::{cf_log_envelope, CfEnvelopeInput, DecayEnvelope, EnvelopeKind};
pub use fit::{fit_decay, DecayFit, DecayLaw, LawFit};
pub use integrator::{integrate, StepOptions, StepStats};

use crate::error::{Error, Result};
use crate::functionals::{exp_moment, mass, moment, weighted_kernel, ClusterState};
use crate::logsob::Certificate;
use crate::model::{equilibrium_monomer_density, series, CoefficientModel, LogQIter, Weight};

/// Moment recorded alongside each sample.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentTrack {
    #[default]
    None,
    /// `M_beta = sum i^beta c_i`.
    Power(f64),
    /// `sum e^(mu i) c_i`.
    Exp(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct RunOptions {
    pub t_end: f64,
    pub cadence: f64,
    pub step: StepOptions,
    pub moment: MomentTrack,
    /// Entries of the initial state below this value are raised to it.
    pub positivity_floor: Option<f64>,
    /// Form of the moment bound attached to coagulation-fragmentation runs.
    pub bound_form: BoundForm,
}

impl RunOptions {
    pub fn new(t_end: f64, cadence: f64) -> Self {
        RunOptions {
            t_end,
            cadence,
            step: StepOptions::default(),
            moment: MomentTrack::None,
            positivity_floor: None,
            bound_form: BoundForm::Derived,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sample {
    pub t: f64,
    pub c1: f64,
    pub mass: f64,
    pub h_rel: f64,
    pub d: Option<f64>,
    pub d_lower: Option<f64>,
    pub moment: Option<f64>,
    pub envelope: Option<f64>,
    pub moment_bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunMeta {
    pub n: usize,
    pub mass0: f64,
    /// Monomer density of the reference equilibrium for `H_rel`.
    pub z_ref: f64,
    pub steps: usize,
    pub rejected: usize,
    pub negative_rejections: usize,
    /// `max |mass(t) - mass(0)| / mass(0)` over the samples.
    pub mass_drift: f64,
    pub moment: MomentTrack,
    pub flags: Vec<String>,
    /// Set when the run stopped before `t_end`.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub meta: RunMeta,
    #[serde(skip)]
    pub final_state: Vec<f64>,
}

/// Centered difference of `H` against `-D` at one interior sample.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FdCheck {
    pub t: f64,
    pub dh_dt: f64,
    pub d: f64,
    pub rel_err: f64,
}

/// Outcome of checking a certificate along a run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CertCheck {
    pub in_window: usize,
    pub outside: usize,
    /// `(t, D_lower, bound)` at failing samples.
    pub violations: Vec<(f64, f64, f64)>,
}

impl Trajectory {
    /// `Err(NotConverged)` when the run stopped early.
    pub fn check(&self) -> Result<()> {
        match &self.meta.error {
            Some(e) => Err(Error::NotConverged(e.clone())),
            None => Ok(()),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn h_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.h_rel).collect()
    }

    /// Number of samples where `H_rel` rose by more than `slack`.
    pub fn monotonicity_violations(&self, slack: f64) -> usize {
        self.samples.windows(2).filter(|w| w[1].h_rel > w[0].h_rel + slack).count()
    }

    /// Largest observed moment.
    pub fn moment_sup(&self) -> Option<f64> {
        self.samples.iter().filter_map(|s| s.moment).reduce(f64::max)
    }

    /// Fills the envelope column for samples within the envelope's horizon.
    pub fn attach_envelope(&mut self, env: &DecayEnvelope) {
        for s in &mut self.samples {
            s.envelope = match env.horizon {
                Some(h) if s.t > h => None,
                _ => Some(env.eval(s.t)),
            };
        }
    }

    /// Samples with `H_rel > envelope (1 + rel) + abs`.
    pub fn envelope_violations(&self, rel: f64, abs: f64) -> Vec<Sample> {
        self.samples
            .iter()
            .filter(|s| s.envelope.is_some_and(|e| s.h_rel > e * (1.0 + rel) + abs))
            .copied()
            .collect()
    }

    /// Samples whose moment exceeds the attached bound by more than `rel`.
    pub fn moment_bound_violations(&self, rel: f64) -> Vec<Sample> {
        self.samples
            .iter()
            .filter(|s| matches!((s.moment, s.moment_bound), (Some(m), Some(b)) if m > b * (1.0 + rel)))
            .copied()
            .collect()
    }

    /// Centered differences of `H` at interior samples, skipping those where the
    /// change of `H` across the stencil is below `min_change` (rounding dominated).
    pub fn fd_checks(&self, min_change: f64) -> Vec<FdCheck> {
        self.samples
            .windows(3)
            .filter_map(|w| {
                let d = w[1].d?;
                let dh = w[2].h_rel - w[0].h_rel;
                if dh.abs() < min_change {
                    return None;
                }
                let dh_dt = dh / (w[2].t - w[0].t);
                Some(FdCheck { t: w[1].t, dh_dt, d, rel_err: (dh_dt + d).abs() / d.abs().max(f64::MIN_POSITIVE) })
            })
            .collect()
    }

    /// Checks `D_lower >= rate(H)` at every sample, with the window bound inside
    /// the monomer window and `epsilon` outside.
    pub fn certify(&self, cert: &Certificate) -> CertCheck {
        let mut out = CertCheck::default();
        for s in &self.samples {
            let Some(dl) = s.d_lower else { continue };
            let bound = if cert.in_window(s.c1) {
                out.in_window += 1;
                cert.window_rate(s.h_rel)
            } else {
                out.outside += 1;
                cert.epsilon()
            };
            if dl < bound * (1.0 - 1e-12) {
                out.violations.push((s.t, dl, bound));
            }
        }
        out
    }
}

/// `H(c | Q z^i)` on a fixed truncation, with the equilibrium tail beyond it.
struct EntropyRef {
    lqz: Vec<f64>,
    tail: f64,
    z: f64,
}

impl EntropyRef {
    fn new(model: &CoefficientModel, rho: f64, n: usize, flags: &mut Vec<String>) -> Result<Self> {
        let (z, tail) = match equilibrium_monomer_density(model, rho, 1e-13) {
            Ok(eq) => {
                flags.extend(eq.flags.iter().cloned());
                (eq.z_bar, series(model, eq.z_bar, Weight::Pow(0), n, 1e-14)?.value)
            }
            Err(Error::SupercriticalMass { rho, rho_s }) => {
                flags.push(format!(
                    "mass {rho} is not below the saturation mass {rho_s}; H_rel is taken against the critical profile on the truncated range"
                ));
                (model.zs()?, 0.0)
            }
            Err(e) => return Err(e),
        };
        let lz = z.ln();
        let lqz = LogQIter::new(model).take(n).enumerate().map(|(k, lq)| lq + (k + 1) as f64 * lz).collect();
        Ok(EntropyRef { lqz, tail, z })
    }

    fn h(&self, c: &[f64]) -> f64 {
        let terms: Vec<f64> = c.iter().zip(&self.lqz).map(|(&v, &l)| weighted_kernel(v, l)).collect();
        terms.iter().rev().sum::<f64>() + self.tail
    }
}

fn sample_moment(c: &[f64], track: MomentTrack) -> Option<f64> {
    match track {
        MomentTrack::None => None,
        MomentTrack::Power(beta) => Some(moment(c, beta)),
        MomentTrack::Exp(mu) => exp_moment(c, mu).ok(),
    }
}

fn prepare(state0: &ClusterState, opts: &RunOptions, flags: &mut Vec<String>) -> Result<Vec<f64>> {
    if state0.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 cluster sizes, got {}", state0.len())));
    }
    if let MomentTrack::Power(b) | MomentTrack::Exp(b) = opts.moment {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!("moment parameter must be positive, got {b}")));
        }
    }
    match opts.positivity_floor {
        Some(f) => {
            if !(f > 0.0) {
                return Err(Error::invalid(format!("positivity floor must be positive, got {f}")));
            }
            let raised = state0.c().iter().filter(|v| **v < f).count();
            if raised > 0 {
                flags.push(format!("{raised} initial entries raised to the positivity floor {f:e}"));
            }
            Ok(ClusterState::with_floor(state0.c().to_vec(), f)?.into_inner())
        }
        None => {
            if let Some(k) = state0.c().iter().position(|v| *v <= 0.0) {
                return Err(Error::invalid(format!(
                    "initial state must be strictly positive (c_{} = 0); set a positivity floor",
                    k + 1
                )));
            }
            Ok(state0.c().to_vec())
        }
    }
}

fn finish(
    samples: Vec<Sample>,
    run: integrator::Integration,
    n: usize,
    mass0: f64,
    z_ref: f64,
    moment: MomentTrack,
    flags: Vec<String>,
) -> Trajectory {
    let mass_drift = samples.iter().map(|s| (s.mass - mass0).abs() / mass0).fold(0.0, f64::max);
    Trajectory {
        samples,
        meta: RunMeta {
            n,
            mass0,
            z_ref,
            steps: run.stats.steps,
            rejected: run.stats.rejected,
            negative_rejections: run.stats.negative_rejections,
            mass_drift,
            moment,
            flags,
            error: run.failure,
        },
        final_state: run.y,
    }
}

/// Integrates the truncated Becker-Doring system. A run that stops early is
/// returned with `meta.error` set; see [`Trajectory::check`].
pub fn integrate_bd(state0: &ClusterState, model: &CoefficientModel, opts: &RunOptions) -> Result<Trajectory> {
    let mut flags = Vec::new();
    let c0 = prepare(state0, opts, &mut flags)?;
    let n = c0.len();
    let mass0 = mass(&c0);
    let sys = BdSystem::new(model, n)?;
    let href = EntropyRef::new(model, mass0, n, &mut flags)?;
    let (a, b) = (model.a_table(n - 1), model.b_next_table(n - 1));
    let mut samples = Vec::new();
    let run = integrate(
        |y, dy| sys.rhs(y, dy),
        c0,
        opts.t_end,
        opts.cadence,
        &opts.step,
        |t, c| {
            let (d, dl) = bd_dissipations(c, &a, &b);
            samples.push(Sample {
                t,
                c1: c[0],
                mass: mass(c),
                h_rel: href.h(c),
                d,
                d_lower: Some(dl),
                moment: sample_moment(c, opts.moment),
                envelope: None,
                moment_bound: None,
            });
            true
        },
    )?;
    Ok(finish(samples, run, n, mass0, href.z, opts.moment, flags))
}

/// `(D, D_lower)` with tables `a_1..a_{N-1}`, `b_2..b_N`.
fn bd_dissipations(c: &[f64], a: &[f64], b: &[f64]) -> (Option<f64>, f64) {
    let mut d = Some(0.0);
    let mut dl = 0.0;
    for i in 0..a.len() {
        let fwd = a[i] * c[0] * c[i];
        let back = b[i] * c[i + 1];
        let s = fwd.sqrt() - back.sqrt();
        dl += s * s;
        if fwd == back {
            continue;
        }
        if fwd == 0.0 || back == 0.0 {
            d = None;
        } else if let Some(v) = d.as_mut() {
            *v += (fwd - back) * (fwd.ln() - back.ln());
        }
    }
    (d, dl)
}

/// Integrates the truncated coagulation-fragmentation system. With a power
/// kernel and a tracked power moment `k > 1`, the moment bound is attached to
/// every sample and violations are flagged.
pub fn integrate_cf(state0: &ClusterState, sys: &CfSystem, opts: &RunOptions) -> Result<Trajectory> {
    let mut flags = Vec::new();
    let c0 = prepare(state0, opts, &mut flags)?;
    let n = c0.len();
    if n != sys.len() {
        return Err(Error::invalid(format!("state has {n} sizes, kernel has {}", sys.len())));
    }
    let mass0 = mass(&c0);
    let href = match sys.q_model() {
        Some(m) => Some(EntropyRef::new(m, mass0, n, &mut flags)?),
        None => {
            flags.push("kernel without detailed-balance weights: H_rel is not defined".into());
            None
        }
    };
    let bound = match (sys.exponents(), opts.moment) {
        (Some((gamma, eta)), MomentTrack::Power(k)) if k > 1.0 => {
            let m0 = moment(&c0, k);
            let form = opts.bound_form;
            Some(move |t: f64| cf_moment_bound(k, gamma, eta, mass0, m0, t, form))
        }
        _ => None,
    };
    let mut samples = Vec::new();
    let mut bound_err = None;
    let run = integrate(
        |y, dy| sys.rhs(y, dy),
        c0,
        opts.t_end,
        opts.cadence,
        &opts.step,
        |t, c| {
            let moment_bound = match &bound {
                Some(f) => match f(t) {
                    Ok(v) => Some(v),
                    Err(e) => {
                        bound_err = Some(e);
                        return false;
                    }
                },
                None => None,
            };
            samples.push(Sample {
                t,
                c1: c[0],
                mass: mass(c),
                h_rel: href.as_ref().map_or(f64::NAN, |h| h.h(c)),
                d: sys.dissipation(c),
                d_lower: None,
                moment: sample_moment(c, opts.moment),
                envelope: None,
                moment_bound,
            });
            true
        },
    )?;
    if let Some(e) = bound_err {
        return Err(e);
    }
    let z_ref = href.as_ref().map_or(f64::NAN, |h| h.z);
    let mut traj = finish(samples, run, n, mass0, z_ref, opts.moment, flags);
    // 1e-7 covers the integrator tolerance on the moment
    let bad = traj.moment_bound_violations(1e-7).len();
    if bad > 0 {
        traj.meta.flags.push(format!("moment bound violated at {bad} samples"));
    }
    Ok(traj)
}
