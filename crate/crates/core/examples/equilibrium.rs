//! Equilibrium monomer density for a few coefficient models.

use bdkin::model::{critical_density, equilibrium_monomer_density, CoefficientModel};

fn main() -> bdkin::Result<()> {
    let unit = CoefficientModel::custom_tables(1.0, vec![1.0], vec![1.0], None)?;
    for rho in [0.5, 1.0, 2.0, 10.0] {
        let eq = equilibrium_monomer_density(&unit, rho, 1e-14)?;
        println!("Q_i = 1, rho = {rho:5}: z_bar = {:.15}", eq.z_bar);
    }

    let pt = CoefficientModel::power_law_pt(1.0, 1.0, 1.0, 0.5)?;
    let crit = critical_density(&pt, 1e-10)?;
    println!("b_i = a_i (1 + i^-0.5): zs = {}, rho_s = {:?}", crit.zs, crit.rho_s);
    for rho in [0.5, 2.0] {
        let eq = equilibrium_monomer_density(&pt, rho, 1e-14)?;
        println!("  rho = {rho}: z_bar = {:.15}, N for 1e-12 tail = {}", eq.z_bar, eq.truncation_for(1e-12)?);
    }
    if let Err(e) = equilibrium_monomer_density(&pt, 3.0, 1e-14) {
        println!("  rho = 3: {e}");
    }
    Ok(())
}
