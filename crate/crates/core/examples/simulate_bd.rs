//! Becker-Doring relaxation with the certified exponential envelope.

use bdkin::dynamics::{fit_decay, integrate_bd, DecayEnvelope, RunOptions};
use bdkin::functionals::ClusterState;
use bdkin::logsob::{certify, MomentBound};
use bdkin::model::CoefficientModel;

fn main() -> bdkin::Result<()> {
    let model = CoefficientModel::power_law_pt(1.0, 1.0, 1.0, 0.5)?;
    let c: Vec<f64> = (1..=200).map(|i| 0.3 * 0.6f64.powi(i) + 0.002 * 0.95f64.powi(i)).collect();
    let state = ClusterState::new(c)?;

    let mut traj = integrate_bd(&state, &model, &RunOptions::new(20.0, 0.1))?;
    traj.check()?;
    let cert = certify(&model, traj.meta.mass0, 0.05, MomentBound::None)?;
    let check = traj.certify(&cert);
    traj.attach_envelope(&DecayEnvelope::from_certificate(&cert, traj.samples[0].h_rel)?);

    for s in traj.samples.iter().step_by(40) {
        println!("t = {:5.1}  H = {:.4e}  D = {:.4e}  envelope = {:.4e}", s.t, s.h_rel, s.d.unwrap_or(f64::NAN), s.envelope.unwrap());
    }
    println!("certificate violations: {}, envelope violations: {}", check.violations.len(), traj.envelope_violations(1e-6, 0.0).len());
    let fit = fit_decay(&traj.times(), &traj.h_values(), 1.0)?;
    println!("best fit: {:?} rate {:.4}", fit.best.law, fit.best.rate);
    Ok(())
}
