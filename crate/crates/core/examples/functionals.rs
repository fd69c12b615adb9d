//! Free energy, dissipation and the Csiszar-Kullback bound on one state.

use bdkin::functionals::{dissipation, l1_distance, lower_dissipation, relative_free_energy, ClusterState};
use bdkin::model::{equilibrium_monomer_density, CoefficientModel};

fn main() -> bdkin::Result<()> {
    let model = CoefficientModel::power_law_pt(1.0, 1.0, 1.0, 0.5)?;
    let c: Vec<f64> = (1..=300).map(|i| 0.3 * 0.7f64.powi(i)).collect();
    let state = ClusterState::new(c)?;
    let rho = state.mass();
    let z = equilibrium_monomer_density(&model, rho, 1e-14)?.z_bar;

    let h = relative_free_energy(&state, &model, z)?;
    let l1 = l1_distance(&state, &model, z)?;
    println!("rho = {rho:.6}, z_bar = {z:.6}");
    println!("H(c|Q)  = {h:.6e}");
    println!("D       = {:.6e}", dissipation(&state, &model)?);
    println!("D_lower = {:.6e}", lower_dissipation(&state, &model));
    println!("|c - Q|_1 = {l1:.6e} <= sqrt(2 rho H) = {:.6e}", (2.0 * rho * h).sqrt());
    Ok(())
}
