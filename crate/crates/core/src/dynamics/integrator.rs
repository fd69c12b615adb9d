//! Dormand-Prince 5(4) with PI step control and positivity rejection.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepOptions {
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_steps: usize,
    /// Reject steps that produce a negative component.
    pub keep_positive: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions { rtol: 1e-8, atol: 1e-14, dt_init: 1e-6, dt_min: 1e-12, dt_max: f64::INFINITY, max_steps: 50_000_000, keep_positive: true }
    }
}

impl StepOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0 && self.atol > 0.0 && self.dt_init > 0.0 && self.dt_min > 0.0 && self.dt_max > 0.0;
        if !ok {
            return Err(Error::invalid("integrator tolerances and step bounds must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct StepStats {
    pub steps: usize,
    pub rejected: usize,
    /// Rejections caused by a negative component rather than the error estimate.
    pub negative_rejections: usize,
    pub rhs_evals: usize,
}

// Butcher tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Outcome of [`integrate`].
#[derive(Clone, Debug)]
pub struct Integration {
    pub y: Vec<f64>,
    pub t: f64,
    pub stats: StepStats,
    /// Set when stepping stopped early.
    pub failure: Option<String>,
}

/// Integrates `y' = f(y)` from `t = 0` to `t_end`, calling `sample(t, y)` at
/// `t = 0` and at every multiple of `cadence`. Steps are shortened to land
/// exactly on those times. `sample` returns `false` to stop the run.
pub fn integrate<F, S>(
    mut f: F,
    y0: Vec<f64>,
    t_end: f64,
    cadence: f64,
    opts: &StepOptions,
    mut sample: S,
) -> Result<Integration>
where
    F: FnMut(&[f64], &mut [f64]),
    S: FnMut(f64, &[f64]) -> bool,
{
    opts.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid(format!("t_end must be positive, got {t_end}")));
    }
    if !(cadence > 0.0) {
        return Err(Error::invalid(format!("cadence must be positive, got {cadence}")));
    }
    let n = y0.len();
    let mut y = y0;
    let mut stats = StepStats::default();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err_vec = vec![0.0; n];

    let mut t = 0.0;
    let mut dt = opts.dt_init.min(cadence);
    let mut err_prev = 1e-4f64;
    let mut just_rejected = false;
    let mut next_sample = 1usize;
    let n_samples = (t_end / cadence).round().max(1.0) as usize;
    let sample_time = |j: usize| if j == n_samples { t_end } else { cadence * j as f64 };

    if !sample(0.0, &y) {
        return Ok(Integration { y, t, stats, failure: None });
    }
    f(&y, &mut k[0]);
    stats.rhs_evals += 1;

    while next_sample <= n_samples {
        if stats.steps + stats.rejected >= opts.max_steps {
            return Ok(Integration { y, t, stats, failure: Some("maximum number of steps reached".into()) });
        }
        let target = sample_time(next_sample);
        let mut h = dt.min(opts.dt_max);
        let mut lands = false;
        if t + h >= target * (1.0 - 1e-14) {
            h = target - t;
            lands = true;
        }

        macro_rules! stage {
            ($dst:expr, $($a:expr => $src:expr),+) => {{
                for i in 0..n {
                    tmp[i] = y[i] + h * (0.0 $(+ $a * k[$src][i])+);
                }
                f(&tmp, &mut k[$dst]);
            }};
        }
        stage!(1, A21 => 0);
        stage!(2, A31 => 0, A32 => 1);
        stage!(3, A41 => 0, A42 => 1, A43 => 2);
        stage!(4, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
        stage!(5, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
        for i in 0..n {
            y_new[i] = y[i] + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        f(&y_new, &mut k[6]);
        stats.rhs_evals += 6;

        let mut acc = 0.0;
        for i in 0..n {
            err_vec[i] = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            acc += (err_vec[i] / sc).powi(2);
        }
        let err = (acc / n as f64).sqrt();
        let negative = opts.keep_positive && y_new.iter().any(|v| *v < 0.0);

        if err <= 1.0 && !negative {
            stats.steps += 1;
            t = if lands { target } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            let e = err.max(1e-10);
            let fac = 0.9 * e.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            err_prev = e;
            // no growth right after a rejection
            let grown = h * fac.clamp(0.2, if just_rejected { 1.0 } else { 5.0 });
            just_rejected = false;
            // keep the step the controller wanted, not the one clipped to a sample
            dt = if lands { dt.max(grown) } else { grown };
            if lands {
                next_sample += 1;
                if !sample(t, &y) {
                    break;
                }
            }
        } else {
            stats.rejected += 1;
            just_rejected = true;
            if negative && err <= 1.0 {
                stats.negative_rejections += 1;
                dt = 0.5 * h;
            } else {
                let fac = 0.9 * err.powf(-1.0 / 5.0);
                dt = h * fac.clamp(0.1, 0.5);
            }
            if dt < opts.dt_min {
                return Ok(Integration {
                    y,
                    t,
                    stats,
                    failure: Some(format!("step size fell below {:e} at t = {t}", opts.dt_min)),
                });
            }
        }
    }
    Ok(Integration { y, t, stats, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_hits_samples() {
        let mut times = Vec::new();
        let mut vals = Vec::new();
        let out = integrate(
            |y, dy| dy[0] = -2.0 * y[0],
            vec![1.0],
            1.0,
            0.25,
            &StepOptions::default(),
            |t, y| {
                times.push(t);
                vals.push(y[0]);
                true
            },
        )
        .unwrap();
        assert!(out.failure.is_none());
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for (t, v) in times.iter().zip(&vals) {
            assert!((v - (-2.0 * t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let opts = StepOptions { atol: 1e-12, rtol: 1e-10, keep_positive: false, ..Default::default() };
        let out = integrate(|y, dy| {
            dy[0] = y[1];
            dy[1] = -y[0];
        }, vec![1.0, 0.0], 10.0, 10.0, &opts, |_, _| true)
        .unwrap();
        assert!((out.y[0] - 10f64.cos()).abs() < 1e-7, "{}", out.y[0] - 10f64.cos());
    }

    #[test]
    fn reports_step_collapse() {
        // y' = -1 drives y negative at t = 1; positivity rejection stalls the run
        let out = integrate(|_, dy| dy[0] = -1.0, vec![1.0], 2.0, 2.0, &StepOptions::default(), |_, _| true).unwrap();
        assert!(out.failure.is_some());
        assert!(out.t <= 1.0);
        assert!(out.stats.negative_rejections > 0);
    }

    #[test]
    fn rejects_bad_options() {
        let opts = StepOptions { rtol: 0.0, ..Default::default() };
        assert!(integrate(|_, _| {}, vec![1.0], 1.0, 0.1, &opts, |_, _| true).is_err());
    }
}
