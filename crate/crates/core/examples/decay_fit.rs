//! Classifies decay laws from sampled curves.

use bdkin::dynamics::fit_decay;

fn main() -> bdkin::Result<()> {
    let t: Vec<f64> = (0..200).map(|k| 0.05 * k as f64).collect();
    let curves: [(&str, fn(f64) -> f64); 3] = [
        ("exp(-2t)", |t| (-2.0 * t).exp()),
        ("(1+t)^-3", |t| (1.0 + t).powf(-3.0)),
        ("exp(-t^0.5)", |t| (-t.sqrt()).exp()),
    ];
    for (name, f) in curves {
        let h: Vec<f64> = t.iter().map(|&x| f(x)).collect();
        let fit = fit_decay(&t, &h, 0.5)?;
        println!("{name:12} -> {:?} (rate {:.3}, rms {:.2e})", fit.best.law, fit.best.rate, fit.best.rms);
    }
    Ok(())
}
