//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bdkin::counterexample::{ratio_study, CounterexampleFamily, DEFAULT_GRID};
use bdkin::dynamics::{
    cf_moment_bound, fit_decay, integrate_bd, integrate_cf, BoundForm, CfSystem, DecayEnvelope, DecayLaw, MomentTrack, RunOptions,
    Trajectory,
};
use bdkin::functionals::{
    dissipation, entropy, entropy_translated_square, exp_moment, lower_dissipation, moment, psi, psi_inv,
    relative_free_energy, sup_translate_entropy, ClusterState,
};
use bdkin::logsob::{
    certify, cercignani_gamma1, cercignani_gamma_lt1, exp_moment_interpolation, hardy_constants, logsob_constants,
    lsi_ratio, measures_from_state, uniform_bound_large_c1, uniform_bound_small_c1, MomentBound, WeightPair,
};
use bdkin::model::{equilibrium_monomer_density, CoefficientModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `a_i = i^gamma`, `b_i = (i-1)^gamma`, so `Q_i = 1`.
fn unit_q(gamma: f64) -> CoefficientModel {
    CoefficientModel::custom_fn(gamma, move |i| (i as f64).powf(gamma), move |i| ((i - 1) as f64).powf(gamma), Some(1.0))
        .unwrap()
}

/// Mass `rho`, monomers `c1`, the rest from two geometric profiles with ratios below `r_max`.
fn random_state(rng: &mut ChaCha8Rng, c1: f64, rho: f64, n: usize, r_max: f64) -> ClusterState {
    let (r1, r2): (f64, f64) = (rng.gen_range(0.05..r_max), rng.gen_range(0.05..r_max));
    let w = rng.gen_range(0.0..1.0);
    let mut c: Vec<f64> = (1..=n).map(|i| w * r1.powi(i as i32) + (1.0 - w) * r2.powi(i as i32)).collect();
    c[0] = 0.0;
    let m: f64 = c.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v).sum();
    let scale = (rho - c1) / m;
    c.iter_mut().for_each(|v| *v *= scale);
    c[0] = c1;
    ClusterState::new(c).unwrap()
}

/// Positive geometric mixture of mass `rho`.
fn mixture(n: usize, rho: f64) -> ClusterState {
    let c: Vec<f64> = (1..=n).map(|i| 0.6f64.powi(i as i32) + 0.2 * 0.9f64.powi(i as i32)).collect();
    let m: f64 = c.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v).sum();
    ClusterState::new(c.into_iter().map(|v| v * rho / m).collect()).unwrap()
}

fn linear_run() -> Result<Trajectory, String> {
    let model = unit_q(1.0);
    let opts = RunOptions::new(50.0, 0.01);
    let traj = integrate_bd(&mixture(1000, 2.0), &model, &opts).map_err(err)?;
    traj.check().map_err(err)?;
    Ok(traj)
}

fn c1_conservation(traj: &Trajectory) -> Check {
    let drift = traj.meta.mass_drift;
    ensure(drift <= 1e-9, || format!("mass drift {drift:e}"))?;
    let mono = traj.monotonicity_violations(1e-9);
    ensure(mono == 0, || format!("{mono} increases of H"))?;
    let h0 = traj.samples[0].h_rel;
    let fd = traj.fd_checks(1e-8 * h0);
    let worst = fd.iter().map(|c| c.rel_err).fold(0.0, f64::max);
    ensure(fd.len() > 100, || format!("only {} finite-difference samples", fd.len()))?;
    ensure(worst <= 0.02, || format!("finite-difference mismatch {worst:.3e}"))?;
    Ok(format!("drift {drift:.1e}, {} FD samples, worst rel err {worst:.2e}", fd.len()))
}

fn c2_linear_certificate(traj: &Trajectory) -> Check {
    let model = unit_q(1.0);
    let delta = 0.05;
    let r = cercignani_gamma1(&model, 2.0, delta, None).map_err(err)?;
    let zs = 1.0;
    let mut checked = 0;
    let mut bad = 0;
    for s in &traj.samples {
        if s.c1 > delta && s.c1 < zs - delta {
            checked += 1;
            if s.d_lower.unwrap() < r.k * s.h_rel {
                bad += 1;
            }
        }
    }
    ensure(checked > 0, || "no samples in the window".into())?;
    ensure(bad == 0, || format!("{bad} of {checked} window samples violate D_lower >= K H"))?;
    let fit = fit_decay(&traj.times(), &traj.h_values(), 1.0).map_err(err)?;
    let rate = fit.get(DecayLaw::Exponential).rate;
    ensure(rate >= r.k, || format!("fitted rate {rate} below K = {}", r.k))?;
    Ok(format!("K = {:.3e}, {checked} window samples, fitted rate {rate:.3}", r.k))
}

fn c3_sublinear() -> Check {
    let model = unit_q(0.5);
    let (rho, delta, beta, m_beta) = (2.0, 0.05, 2.0, 50.0);
    let r = cercignani_gamma_lt1(&model, rho, delta, beta, m_beta).map_err(err)?;
    let z = equilibrium_monomer_density(&model, rho, 1e-14).map_err(err)?.z_bar;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut done, mut bad) = (0, 0);
    while done < 1000 {
        let c1 = rng.gen_range(delta..1.0 - delta);
        let s = random_state(&mut rng, c1, rho, 400, 0.9);
        if s.moment(beta) > m_beta {
            continue;
        }
        done += 1;
        let h = relative_free_energy(&s, &model, z).map_err(err)?;
        if lower_dissipation(&s, &model) < r.k * h.powf(r.exponent) {
            bad += 1;
        }
    }
    ensure(bad == 0, || format!("{bad} violations"))?;
    Ok(format!("K = {:.3e}, exponent {}, 1000 states", r.k, r.exponent))
}

fn c4_far_from_equilibrium() -> Check {
    let model = unit_q(1.0);
    let rho = 2.0;
    let small = uniform_bound_small_c1(&model, rho, MomentBound::None).map_err(err)?;
    let large = uniform_bound_large_c1(&model, rho, 0.05).map_err(err)?;
    let z = equilibrium_monomer_density(&model, rho, 1e-14).map_err(err)?.z_bar;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = 0;
    for _ in 0..100 {
        let c1 = rng.gen_range(0.0..1.0) * small.delta1;
        let s = random_state(&mut rng, c1, rho, 400, 0.9);
        if lower_dissipation(&s, &model) < small.epsilon {
            bad += 1;
        }
    }
    for _ in 0..100 {
        let c1 = rng.gen_range(z + large.delta..1.99);
        let s = random_state(&mut rng, c1, rho, 400, 0.9);
        if lower_dissipation(&s, &model) < large.epsilon1 {
            bad += 1;
        }
    }
    ensure(bad == 0, || format!("{bad} violations"))?;
    Ok(format!("delta1 = {:.4}, eps = {:.3e}, eps1 = {:.3e}", small.delta1, small.epsilon, large.epsilon1))
}

fn c5_log_sobolev() -> Check {
    let pair = measures_from_state(&unit_q(1.0), 0.5, 64).map_err(err)?;
    let r = logsob_constants(&pair).map_err(err)?;
    ensure(r.b1 <= 3.0 * r.d1 && r.b2 <= 3.0 * r.d2, || format!("B > 3D: {:?}", (r.b1, r.d1, r.b2, r.d2)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for j in 0..10_000 {
        let k = rng.gen_range(1..=40);
        let shift = if j % 2 == 0 { 0.0 } else { rng.gen_range(-50.0..50.0) };
        let f: Vec<f64> = (0..k)
            .map(|_| if rng.gen_bool(0.3) { shift } else { shift + rng.gen_range(-3.0..3.0) })
            .collect();
        worst = worst.max(lsi_ratio(&pair, &f).map_err(err)?);
    }
    ensure(worst <= r.lambda * (1.0 + 1e-9), || format!("ratio {worst} above Lambda {}", r.lambda))?;
    Ok(format!("Lambda = {:.3}, worst sampled ratio {worst:.4}", r.lambda))
}

/// Direct evaluation of the tail and head constants.
fn hardy_oracle(pair: &WeightPair, m: usize) -> (f64, f64) {
    let (mu, nu) = (pair.mu(), pair.nu());
    let mut b1 = 0.0f64;
    for k in m..=pair.len() {
        let inv: f64 = (m..=k).map(|j| 1.0 / nu[j - 1]).sum();
        b1 = b1.max(pair.tail_mass(k) * inv);
    }
    let b2: f64 = (1..m).map(|i| mu[i - 1] * (i..m).map(|j| 1.0 / nu[j - 1]).sum::<f64>()).sum();
    (b1, b2)
}

fn c6_hardy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut msgs = Vec::new();
    for c1 in [0.5, 0.9] {
        let pair = measures_from_state(&unit_q(1.0), c1, 200).map_err(err)?;
        let m = logsob_constants(&pair).map_err(err)?.m;
        let h = hardy_constants(&pair, m).map_err(err)?;
        let (b1, b2) = hardy_oracle(&pair, m);
        ensure((h.b1_sup - b1).abs() <= 1e-10 * b1, || format!("B1sup {} vs direct {b1}", h.b1_sup))?;
        ensure((h.b2m - b2).abs() <= 1e-10 * b2.max(1e-300), || format!("B2m {} vs direct {b2}", h.b2m))?;
        let (mu, nu) = (pair.mu(), pair.nu());
        // tail: sum_{i>m} mu_i (f_i - f_m)^2 <= 4 B1sup sum_{j>=m} nu_j (f_{j+1} - f_j)^2
        let mut tail_max: f64 = 0.0;
        for _ in 0..2000 {
            let last = rng.gen_range(m + 1..=(m + 60).min(pair.len()));
            let mut f = vec![0.0; last + 1];
            for i in m + 1..=last {
                f[i] = f[i - 1] + rng.gen_range(-1.0..1.0) * rng.gen_range(0.0..1.0f64).powi(3);
            }
            let num: f64 =
                (m + 1..last).map(|i| mu[i - 1] * (f[i] - f[m]).powi(2)).sum::<f64>() + pair.tail_mass(last - 1) * (f[last] - f[m]).powi(2);
            let den: f64 = (m..last).map(|j| nu[j - 1] * (f[j + 1] - f[j]).powi(2)).sum();
            if den > 0.0 {
                tail_max = tail_max.max(num / den);
            }
        }
        ensure(tail_max <= 4.0 * h.b1_sup, || format!("tail quotient {tail_max} above 4 B1sup"))?;
        // head: the sigma-weighted Cauchy-Schwarz gives the constant B2m, at least the supremum form
        ensure(h.b2m >= h.b2m_lower * (1.0 - 1e-12), || format!("B2m {} below {}", h.b2m, h.b2m_lower))?;
        let mut head_max: f64 = 0.0;
        for _ in 0..2000 {
            if m < 2 {
                break;
            }
            let f: Vec<f64> = (0..=m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let num: f64 = (1..m).map(|i| mu[i - 1] * (f[i] - f[m]).powi(2)).sum();
            let den: f64 = (1..m).map(|j| nu[j - 1] * (f[j + 1] - f[j]).powi(2)).sum();
            if den > 0.0 {
                head_max = head_max.max(num / den);
            }
        }
        ensure(head_max <= h.b2m * (1.0 + 1e-10), || format!("head quotient {head_max} above B2m {}", h.b2m))?;
        msgs.push(format!("c1 = {c1}: m = {m}, B1sup = {:.4}, tail max {tail_max:.4}, B2m = {:.4}", h.b1_sup, h.b2m));
    }
    Ok(msgs.join("; "))
}

fn c7_psi_inverse() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let t = (1.5f64.ln() + (1e9f64.ln() - 1.5f64.ln()) * k as f64 / 999.0).exp();
        let x = psi_inv(t).map_err(err)?;
        let (lo, hi) = (t / (3.0 * t.ln()), 2.0 * t / t.ln());
        ensure(lo <= x && x <= hi, || format!("t = {t}: {x} outside [{lo}, {hi}]"))?;
        worst = worst.max((psi(x) - t).abs() / t);
    }
    ensure(worst <= 1e-10, || format!("roundtrip residual {worst:e}"))?;
    Ok(format!("worst roundtrip residual {worst:.1e}"))
}

fn c8_l_functional() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_lim: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(2..30);
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let s: f64 = w.iter().sum();
        let mu: Vec<f64> = w.iter().map(|v| v / s).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g: Vec<f64> = f.iter().map(|v| v * v).collect();
        let ent = entropy(&mu, &g).map_err(err)?;
        let mean_sq: f64 = mu.iter().zip(&g).map(|(m, v)| m * v).sum();
        let l = sup_translate_entropy(&mu, &f, None).map_err(err)?;
        ensure(ent <= l.value * (1.0 + 1e-12) + 1e-15, || format!("Ent {ent} above L {}", l.value))?;
        ensure(l.value <= (ent + 2.0 * mean_sq) * (1.0 + 1e-12), || format!("L {} above Ent + 2<f^2>", l.value))?;
        let far = entropy_translated_square(&mu, &f, 1e4);
        let rel = (far - l.asymptote).abs() / l.asymptote;
        ensure(rel <= 0.01, || format!("translated entropy {far} vs 2 Var {}", l.asymptote))?;
        worst_lim = worst_lim.max(rel);
    }
    Ok(format!("200 functions, worst large-translation gap {worst_lim:.1e}"))
}

fn c9_counterexample() -> Check {
    let family = CounterexampleFamily::new(0.0, 4.0, 0.5).map_err(err)?;
    let st = ratio_study(&family, &DEFAULT_GRID).map_err(err)?;
    ensure(st.ratio_decreasing(), || "D/H not strictly decreasing".into())?;
    let (first, last) = (st.rows[0], st.rows[st.rows.len() - 1]);
    let fall = last.ratio / first.ratio;
    ensure(fall < 0.2, || format!("final/initial {fall}"))?;
    ensure(
        st.rows.iter().filter(|r| r.eps <= 1e-2).all(|r| r.h >= 0.5 * st.h_limit),
        || "H below half the limit".into(),
    )?;
    ensure(st.rows.windows(2).all(|w| w[1].ratio_s2 < w[0].ratio_s2), || "D/H^2 not decreasing".into())?;
    let fall2 = last.ratio_s2 / first.ratio_s2;
    ensure(fall2 < 0.2, || format!("D/H^2 final/initial {fall2}"))?;
    // direct evaluation on the explicitly truncated state
    let model = family.model().map_err(err)?;
    let row = st.rows[2];
    let s = family.build_state(row.eps, None).map_err(err)?;
    let d = dissipation(&s, &model).map_err(err)?;
    let h = relative_free_energy(&s, &model, st.z_bar).map_err(err)?;
    ensure((d / h - row.ratio).abs() <= 1e-6 * row.ratio, || format!("direct D/H {} vs {}", d / h, row.ratio))?;
    Ok(format!("D/H {:.3e} -> {:.3e} (x{fall:.3}), D/H^2 x{fall2:.3}", first.ratio, last.ratio))
}

fn c10_exp_moment() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut bad = 0;
    for _ in 0..500 {
        let n = rng.gen_range(1..60);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-6..1.0)).collect();
        let (mu, gamma) = (rng.gen_range(0.05..2.7), rng.gen_range(0.0..1.0));
        let (m1, mg, me) = (moment(&f, 1.0), moment(&f, gamma), exp_moment(&f, mu).map_err(err)?);
        if mg < exp_moment_interpolation(m1, me, mu, gamma) * (1.0 - 1e-12) {
            bad += 1;
        }
    }
    ensure(bad == 0, || format!("{bad} interpolation violations"))?;
    let model = unit_q(0.5);
    let (rho, mu, m_exp) = (2.0, 0.5, 100.0);
    let cert = certify(&model, rho, 0.05, MomentBound::Exp { mu, m_exp }).map_err(err)?;
    let (lo, hi) = cert.window();
    let (mut done, mut bad) = (0, 0);
    while done < 300 {
        let c1 = rng.gen_range(lo..hi);
        let s = random_state(&mut rng, c1, rho, 400, 0.55);
        if s.exp_moment(mu).map_err(err)? > m_exp {
            continue;
        }
        done += 1;
        let h = relative_free_energy(&s, &model, cert.z_bar).map_err(err)?;
        if lower_dissipation(&s, &model) < cert.rate(h) {
            bad += 1;
        }
    }
    ensure(bad == 0, || format!("{bad} dissipation violations"))?;
    let r = &cert.report;
    Ok(format!("K1 = {:.3e}, K2 = {:.3e}, eps = {:.3e}", r.k1.unwrap(), r.k2.unwrap(), cert.epsilon()))
}

fn c11_cf_moments() -> Check {
    let q = CoefficientModel::custom_tables(0.5, vec![1.0], vec![1.0], Some(1.0)).map_err(err)?;
    let n = 300;
    // mass sum_i i 0.25 0.5^(i-1) = 1
    let state = ClusterState::new((1..=n).map(|i| 0.25 * 0.5f64.powi(i as i32 - 1)).collect()).map_err(err)?;
    let m0 = state.moment(2.0);
    let mut msgs = Vec::new();
    for (gamma, eta) in [(0.5, 0.0), (0.5, 0.5)] {
        let sys = CfSystem::power(gamma, eta, &q, n).map_err(err)?;
        let mut opts = RunOptions::new(5.0, 0.05);
        opts.moment = MomentTrack::Power(2.0);
        let traj = integrate_cf(&state, &sys, &opts).map_err(err)?;
        traj.check().map_err(err)?;
        ensure(traj.meta.mass_drift <= 1e-9, || format!("mass drift {:e}", traj.meta.mass_drift))?;
        // the trajectory does not depend on the bound form, only the comparison does
        for form in [BoundForm::Derived, BoundForm::Printed] {
            let mut bad = 0;
            let mut last = (0.0, 0.0);
            for s in &traj.samples {
                let bound = cf_moment_bound(2.0, gamma, eta, traj.meta.mass0, m0, s.t, form).map_err(err)?;
                let m2 = s.moment.unwrap();
                if m2 > bound * (1.0 + 1e-7) {
                    bad += 1;
                }
                last = (m2, bound);
            }
            ensure(bad == 0, || format!("gamma {gamma}, eta {eta}, {form:?}: {bad} violations"))?;
            msgs.push(format!("({gamma},{eta},{form:?}) M2 {:.3} <= {:.3}", last.0, last.1));
        }
    }
    Ok(msgs.join("; "))
}

fn envelope_check(name: &str, traj: &mut Trajectory, moment: MomentBound, model: &CoefficientModel) -> Check {
    let cert = certify(model, traj.meta.mass0, 0.05, moment).map_err(err)?;
    let env = DecayEnvelope::from_certificate(&cert, traj.samples[0].h_rel).map_err(err)?;
    traj.attach_envelope(&env);
    let bad = traj.envelope_violations(1e-9, 0.0).len();
    ensure(bad == 0, || format!("{name}: {bad} samples above the envelope"))?;
    let cc = traj.certify(&cert);
    ensure(cc.violations.is_empty(), || format!("{name}: {} certificate violations", cc.violations.len()))?;
    let s = traj.samples.last().unwrap();
    Ok(format!("{name}: H(T) {:.2e} <= {:.3e}", s.h_rel, s.envelope.unwrap()))
}

fn c12_envelopes(linear: &mut Trajectory) -> Check {
    let mut msgs = vec![envelope_check("gamma 1", linear, MomentBound::None, &unit_q(1.0))?];

    let sub = unit_q(0.5);
    let mut opts = RunOptions::new(50.0, 0.05);
    opts.moment = MomentTrack::Power(2.0);
    let mut traj = integrate_bd(&mixture(300, 2.0), &sub, &opts).map_err(err)?;
    traj.check().map_err(err)?;
    let m_beta = traj.moment_sup().unwrap() * 1.01;
    msgs.push(envelope_check("gamma 0.5, beta 2", &mut traj, MomentBound::Power { beta: 2.0, m_beta }, &sub)?);

    let mu = 0.5;
    // finite exponential moment at rate mu, away from equilibrium
    let c: Vec<f64> = (1..=300).map(|i| 0.3f64.powi(i) + 0.5 * 0.55f64.powi(i)).collect();
    let m: f64 = c.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v).sum();
    let state = ClusterState::new(c.into_iter().map(|v| v * 2.0 / m).collect()).map_err(err)?;
    opts.moment = MomentTrack::Exp(mu);
    let mut traj = integrate_bd(&state, &sub, &opts).map_err(err)?;
    traj.check().map_err(err)?;
    let m_exp = traj.moment_sup().unwrap() * 1.01;
    msgs.push(envelope_check("gamma 0.5, exp moment", &mut traj, MomentBound::Exp { mu, m_exp }, &sub)?);
    Ok(msgs.join("; "))
}

fn cli(bin: &Path, args: &[&str], threads: &str) -> Result<i32, String> {
    let status = Command::new(bin).args(args).env("BDKIN_THREADS", threads).status().map_err(err)?;
    Ok(status.code().unwrap_or(-1))
}

fn c13_determinism() -> Check {
    let bin = Path::new(env!("CARGO_BIN_EXE_bdkin"));
    let dir = tempfile::tempdir().map_err(err)?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let model = ["--family", "pt", "--gamma", "1", "--zs", "1", "--q", "1", "--mu", "0.5"];
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "4"].iter().enumerate() {
        let sim = path(&format!("sim{k}.csv"));
        let mut args: Vec<&str> = vec!["simulate"];
        args.extend(model);
        args.extend(["--rho", "0.5", "--N", "100", "--t-end", "5", "--cadence", "0.05", "--seed", "7", "--certify", "--out", &sim]);
        let code = cli(bin, &args, threads)?;
        ensure(code == 0, || format!("simulate exit {code}"))?;
        let ce = path(&format!("ce{k}.csv"));
        let code = cli(bin, &["counterexample", "--lambda", "0", "--rho", "4", "--gamma", "0.5", "--out", &ce], threads)?;
        ensure(code == 0, || format!("counterexample exit {code}"))?;
        let read = |p: &str| std::fs::read(p).map_err(err);
        outputs.push((read(&sim)?, read(&ce)?));
    }
    ensure(outputs[0] == outputs[1], || "CSV artifacts differ between runs".into())?;
    let side: serde_json::Value =
        serde_json::from_slice(&std::fs::read(path("sim0.json")).map_err(err)?).map_err(err)?;
    ensure(side["certification"]["passed"] == true, || "certification JSON does not pass".into())?;
    let csv = String::from_utf8(outputs[0].1.clone()).map_err(err)?;
    let ratios: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    ensure(ratios.windows(2).all(|w| w[1] < w[0]), || "ratio column not decreasing".into())?;
    let code = cli(bin, &["simulate", "--family", "pt", "--gamma", "1", "--zs", "1", "--q", "1", "--mu", "0.5", "--rho", "1", "--beta", "2"], "1")?;
    ensure(code == 2, || format!("conflicting options exit {code}"))?;
    Ok(format!("{} + {} bytes identical across runs and thread counts", outputs[0].0.len(), outputs[0].1.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, start: Instant, r: Check| {
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("PASS {id:2} {name} ({secs:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id:2} {name} ({secs:.1}s): {msg}");
            }
        }
    };

    let t = Instant::now();
    match linear_run() {
        Ok(mut traj) => {
            report(1, "mass conservation and entropy monotonicity", t, c1_conservation(&traj));
            let t = Instant::now();
            report(2, "linear certificate along the run", t, c2_linear_certificate(&traj));
            let t = Instant::now();
            report(12, "decay envelopes", t, c12_envelopes(&mut traj));
        }
        Err(e) => {
            for (id, name) in [(1, "mass conservation and entropy monotonicity"), (2, "linear certificate along the run"), (12, "decay envelopes")] {
                report(id, name, t, Err(format!("run failed: {e}")));
            }
        }
    }
    let checks: [(usize, &str, fn() -> Check); 10] = [
        (3, "sublinear inequality on random states", c3_sublinear),
        (4, "far-from-equilibrium bounds", c4_far_from_equilibrium),
        (5, "log-Sobolev constant", c5_log_sobolev),
        (6, "Hardy brackets", c6_hardy),
        (7, "Psi inverse bracket", c7_psi_inverse),
        (8, "translated entropy bracket", c8_l_functional),
        (9, "counterexample ratio study", c9_counterexample),
        (10, "exponential-moment inequality", c10_exp_moment),
        (11, "coagulation-fragmentation moment bound", c11_cf_moments),
        (13, "CLI determinism", c13_determinism),
    ];
    for (id, name, f) in checks {
        let t = Instant::now();
        report(id, name, t, f());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
