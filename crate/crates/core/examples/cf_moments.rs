//! Coagulation-fragmentation run with the power kernel and the moment bound.

use bdkin::dynamics::{integrate_cf, BoundForm, CfSystem, MomentTrack, RunOptions};
use bdkin::functionals::ClusterState;
use bdkin::model::CoefficientModel;

fn main() -> bdkin::Result<()> {
    let q = CoefficientModel::custom_tables(0.5, vec![1.0], vec![1.0], Some(1.0))?;
    let n = 150;
    let c: Vec<f64> = (1..=n).map(|i| 0.25f64 * 0.5f64.powi(i as i32 - 1)).collect();
    let state = ClusterState::new(c)?;
    let sys = CfSystem::power(0.5, 0.0, &q, n)?;
    for form in [BoundForm::Derived, BoundForm::Printed] {
        let mut opts = RunOptions::new(5.0, 0.5);
        opts.moment = MomentTrack::Power(2.0);
        opts.bound_form = form;
        let traj = integrate_cf(&state, &sys, &opts)?;
        println!("{form:?} bound");
        for s in &traj.samples {
            println!("  t = {:3.1}  M_2 = {:.6}  bound = {:.6}  H = {:.4e}", s.t, s.moment.unwrap(), s.moment_bound.unwrap(), s.h_rel);
        }
    }
    Ok(())
}
