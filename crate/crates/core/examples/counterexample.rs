//! The ratio D/H along the counterexample family tends to zero.

use bdkin::counterexample::{b_eps_gamma, ratio_study, CounterexampleFamily, DEFAULT_GRID};

fn main() -> bdkin::Result<()> {
    let family = CounterexampleFamily::new(0.0, 4.0, 0.5)?;
    let study = ratio_study(&family, &DEFAULT_GRID)?;
    println!("xi = {:.6}, z_bar = {:.6}, H limit = {:.6}", family.xi, study.z_bar, study.h_limit);
    for r in &study.rows {
        println!("eps = {:7.0e}  H = {:.4}  D = {:.4e}  D/H = {:.4e}  D/H^2 = {:.4e}", r.eps, r.h, r.d, r.ratio, r.ratio_s2);
    }
    println!("strictly decreasing: {}", study.ratio_decreasing());
    let b = b_eps_gamma(0.01, 1.0)?;
    println!("B(0.01, 1) = {:.4}", b.value);
    Ok(())
}
