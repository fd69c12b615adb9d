//! Certified entropy-dissipation constants in the linear and sublinear regimes.

use bdkin::logsob::{certify, MomentBound};
use bdkin::model::CoefficientModel;

fn main() -> bdkin::Result<()> {
    let linear = CoefficientModel::power_law_pt(1.0, 1.0, 1.0, 0.5)?;
    let cert = certify(&linear, 1.0, 0.05, MomentBound::None)?;
    let r = &cert.report;
    println!("gamma = 1: K = {:.4e}, epsilon = {:.4e}, window = {:?}", r.k, cert.epsilon(), r.window);

    let sub = CoefficientModel::power_law_pt(0.5, 1.0, 1.0, 0.5)?;
    let cert = certify(&sub, 1.0, 0.05, MomentBound::Power { beta: 2.0, m_beta: 10.0 })?;
    let r = &cert.report;
    println!("gamma = 0.5, M_2 <= 10: K = {:.4e}, exponent = {:.4}, epsilon = {:.4e}", r.k, r.exponent, cert.epsilon());
    for h in [1e-1, 1e-3, 1e-6] {
        println!("  D_bar >= {:.4e} at H = {h:e}", cert.rate(h));
    }
    Ok(())
}
