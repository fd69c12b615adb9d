//! Log-Sobolev and Hardy constants of the weights built from a monomer density,
//! checked against random test functions.

use bdkin::logsob::{hardy_constants, logsob_constants, lsi_ratio, measures_from_state};
use bdkin::model::CoefficientModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> bdkin::Result<()> {
    let model = CoefficientModel::power_law_pt(1.0, 1.0, 1.0, 0.5)?;
    for c1 in [0.2, 0.5, 0.8] {
        let pair = measures_from_state(&model, c1, 400)?;
        let r = logsob_constants(&pair)?;
        let hardy = hardy_constants(&pair, r.m)?;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let worst = (0..2000)
            .map(|_| {
                let k = rng.gen_range(2..40);
                let f: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
                lsi_ratio(&pair, &f)
            })
            .try_fold(0.0f64, |m, r| r.map(|v| m.max(v)))?;
        println!(
            "c1 = {c1}: m = {}, D1 = {:.4}, B1 = {:.4}, Lambda = {:.4e}, worst sampled ratio = {worst:.4}, B(1)_m = {:.4}",
            r.m, r.d1, r.b1, r.lambda, hardy.b1m
        );
    }
    Ok(())
}
