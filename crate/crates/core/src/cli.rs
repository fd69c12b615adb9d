//! Command-line front end.
//!
//! Exit codes: 0 success, 1 certification failure, 2 validation error,
//! 3 numerical non-convergence (partial artifacts are still written).

use std::ffi::OsString;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::counterexample::{ratio_study, CounterexampleFamily, DEFAULT_GRID};
use crate::dynamics::{
    cf_log_envelope, fit_decay, integrate_bd, integrate_cf, CfEnvelopeInput, CfSystem, DecayEnvelope, MomentTrack,
    RunOptions, StepOptions, Trajectory,
};
use crate::error::{Error, Result};
use crate::functionals::{moment, ClusterState};
use crate::io;
use crate::logsob::{certify, hardy_constants, logsob_constants, lsi_ratio, measures_from_state, MomentBound};
use crate::model::{equilibrium_monomer_density, CoefficientModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

const DEFAULT_N: usize = 200;
const DEFAULT_T_END: f64 = 10.0;
const DEFAULT_CADENCE: f64 = 0.1;
const DEFAULT_DELTA: f64 = 0.05;
const LSI_SAMPLES: usize = 1000;
/// Relative slack on certified bounds along a run, covering the integrator tolerance.
const RUN_SLACK: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "bdkin", version, about = "Becker-Doring and coagulation-fragmentation kinetics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct CommandArgs {
    /// TOML file with the same keys as the flags; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub opts: RunConfig,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium monomer density at mass rho.
    Equilibrium(CommandArgs),
    /// Certified entropy-dissipation constants.
    Constants(CommandArgs),
    /// Log-Sobolev and Hardy constants, checked on random test functions.
    Logsob(CommandArgs),
    /// Becker-Doring trajectory.
    Simulate(CommandArgs),
    /// Coagulation-fragmentation trajectory with a power kernel.
    Cf(CommandArgs),
    /// Ratio study along the counterexample family.
    Counterexample(CommandArgs),
}

/// What a command produced.
struct Outcome {
    primary: String,
    sidecar: Option<Value>,
    code: i32,
}

impl Outcome {
    fn ok(primary: String) -> Self {
        Outcome { primary, sidecar: None, code: EXIT_OK }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let threads = match std::env::var("BDKIN_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                eprintln!("error: BDKIN_THREADS must be a positive integer, got `{v}`");
                return EXIT_INVALID;
            }
        },
        Err(_) => None,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_INVALID;
        }
    };
    pool.install(|| match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    })
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged(_) | Error::Overflow(_) => EXIT_NOT_CONVERGED,
        _ => EXIT_INVALID,
    }
}

fn execute(command: Command) -> Result<i32> {
    let (args, f): (CommandArgs, fn(&RunConfig) -> Result<Outcome>) = match command {
        Command::Equilibrium(a) => (a, equilibrium),
        Command::Constants(a) => (a, constants),
        Command::Logsob(a) => (a, logsob),
        Command::Simulate(a) => (a, simulate),
        Command::Cf(a) => (a, cf),
        Command::Counterexample(a) => (a, counterexample),
    };
    let cfg = match &args.config {
        Some(p) => RunConfig::load(p)?.overlay(args.opts),
        None => args.opts,
    };
    cfg.validate()?;
    let sinks = Sinks::open(cfg.out.as_deref())?;
    let outcome = f(&cfg)?;
    sinks.write(&outcome)?;
    Ok(outcome.code)
}

/// Output files, created before any work so unwritable paths fail early.
struct Sinks {
    out: Option<(PathBuf, PathBuf)>,
}

impl Sinks {
    fn open(out: Option<&Path>) -> Result<Self> {
        let Some(out) = out else { return Ok(Sinks { out: None }) };
        let mut side = out.with_extension("json");
        if side == out {
            side = out.with_extension("meta.json");
        }
        File::create(out)?;
        Ok(Sinks { out: Some((out.to_path_buf(), side)) })
    }

    fn write(&self, o: &Outcome) -> Result<()> {
        match &self.out {
            Some((out, side)) => {
                io::write_text(out, &o.primary)?;
                if let Some(v) = &o.sidecar {
                    io::write_text(side, &(io::to_json(v)? + "\n"))?;
                }
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(o.primary.as_bytes())?;
                if let Some(flags) = o.sidecar.as_ref().and_then(|v| v.get("flags")).and_then(Value::as_array) {
                    for f in flags {
                        eprintln!("flag: {}", f.as_str().unwrap_or_default());
                    }
                }
            }
        }
        Ok(())
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Config(format!("JSON serialisation failed: {e}")))
}

/// Scalar report as JSON, or as `key,value` rows with nested keys joined by dots.
fn render_report(value: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(io::to_json(value)? + "\n"),
        Format::Csv => {
            let mut rows = vec!["key,value".to_string()];
            flatten("", value, &mut rows);
            Ok(rows.join("\n") + "\n")
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<String>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().map(scalar).collect();
            rows.push(format!("{prefix},{}", items.join(";")));
        }
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        _ => rows.push(format!("{prefix},{}", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.is_f64() => io::fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) if s.contains(',') => format!("\"{s}\""),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn equilibrium(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.model()?;
    let eq = equilibrium_monomer_density(&model, cfg.require_rho()?, 1e-14)?;
    let v = json!({
        "z_bar": eq.z_bar,
        "rho": eq.rho,
        "z_s": eq.z_s,
        "rho_s": eq.rho_s,
        "flags": eq.flags,
    });
    Ok(Outcome::ok(render_report(&v, cfg.format.unwrap_or_default())?))
}

/// Moment assumption for the certificate; `sup` is the monitored supremum along a run.
fn moment_bound(cfg: &RunConfig, model: &CoefficientModel, sup: Option<f64>, flags: &mut Vec<String>) -> Result<MomentBound> {
    if model.gamma() >= 1.0 {
        return Ok(MomentBound::None);
    }
    let pick = |given: Option<f64>, name: &str, flags: &mut Vec<String>| -> Result<f64> {
        match (given, sup) {
            (Some(m), _) => Ok(m),
            (None, Some(s)) => {
                flags.push(format!("{name} taken as the monitored supremum times 1.01"));
                Ok(s * 1.01)
            }
            (None, None) => Err(Error::invalid(format!("gamma < 1 needs --{name}"))),
        }
    };
    match (cfg.beta, cfg.exp_mu) {
        (Some(beta), None) => Ok(MomentBound::Power { beta, m_beta: pick(cfg.m_beta, "m-beta", flags)? }),
        (None, Some(mu)) => Ok(MomentBound::Exp { mu, m_exp: pick(cfg.m_exp, "m-exp", flags)? }),
        _ => Err(Error::invalid("gamma < 1 needs --beta or --exp-mu")),
    }
}

fn constants(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.model()?;
    let mut flags = Vec::new();
    let mb = moment_bound(cfg, &model, None, &mut flags)?;
    let cert = certify(&model, cfg.require_rho()?, cfg.delta.unwrap_or(DEFAULT_DELTA), mb)?;
    let mut v = to_value(&cert.report)?;
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("z_bar".into(), json!(cert.z_bar));
    obj.insert("small_c1".into(), to_value(&cert.small)?);
    obj.insert("large_c1".into(), to_value(&cert.large)?);
    if let Some(Value::Array(f)) = obj.get_mut("flags") {
        f.extend(flags.into_iter().map(Value::String));
    }
    Ok(Outcome::ok(render_report(&v, cfg.format.unwrap_or_default())?))
}

fn logsob(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.model()?;
    let c1 = match (cfg.c1, cfg.rho) {
        (Some(c1), _) => c1,
        (None, Some(rho)) => equilibrium_monomer_density(&model, rho, 1e-14)?.z_bar,
        (None, None) => return Err(Error::invalid("logsob needs --c1 or --rho")),
    };
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let pair = measures_from_state(&model, c1, n)?;
    let report = logsob_constants(&pair)?;
    let hardy = hardy_constants(&pair, report.m)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let mut worst: f64 = 0.0;
    for _ in 0..LSI_SAMPLES {
        let k = rng.gen_range(1..=n.min(60));
        let shift = rng.gen_range(-5.0..5.0);
        let f: Vec<f64> = (0..k).map(|_| shift + rng.gen_range(-3.0..3.0)).collect();
        worst = worst.max(lsi_ratio(&pair, &f)?);
    }
    let holds = worst <= report.lambda * (1.0 + 1e-9);
    let mut v = to_value(&report)?;
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("c1".into(), json!(c1));
    obj.insert("hardy".into(), to_value(&hardy)?);
    obj.insert("lsi_samples".into(), json!(LSI_SAMPLES));
    obj.insert("lsi_worst_ratio".into(), json!(worst));
    obj.insert("lsi_holds".into(), json!(holds));
    let code = if holds { EXIT_OK } else { EXIT_CERT_FAILED };
    Ok(Outcome { primary: render_report(&v, cfg.format.unwrap_or_default())?, sidecar: None, code })
}

/// Positive state of mass `rho`: a mixture of three geometric profiles with
/// random rates below `r_max` and random weights.
pub fn random_state(seed: u64, n: usize, rho: f64, r_max: f64) -> Result<ClusterState> {
    if !(rho > 0.0) || !(r_max > 0.0) || n < 2 {
        return Err(Error::invalid("random state needs rho > 0, r_max > 0 and N >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parts: Vec<(f64, f64)> =
        (0..3).map(|_| (rng.gen_range(0.1..1.0), r_max * rng.gen_range(0.2..0.95))).collect();
    let c: Vec<f64> = (1..=n)
        .map(|i| parts.iter().map(|(w, r)| w * r.powi(i as i32)).sum::<f64>().max(1e-300))
        .collect();
    let m: f64 = c.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v).sum();
    ClusterState::new(c.into_iter().map(|v| v * rho / m).collect())
}

fn initial_state(cfg: &RunConfig, model: &CoefficientModel) -> Result<ClusterState> {
    match &cfg.init {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            io::read_state_csv(&text)
        }
        None => {
            let r_max = model.zs()?.min(1.0);
            random_state(cfg.seed.unwrap_or(0), cfg.n.unwrap_or(DEFAULT_N), cfg.require_rho()?, r_max)
        }
    }
}

fn run_options(cfg: &RunConfig, moment: MomentTrack) -> Result<RunOptions> {
    let mut opts = RunOptions::new(cfg.t_end.unwrap_or(DEFAULT_T_END), cfg.cadence.unwrap_or(DEFAULT_CADENCE));
    let defaults = StepOptions::default();
    opts.step = StepOptions { rtol: cfg.rtol.unwrap_or(defaults.rtol), atol: cfg.atol.unwrap_or(defaults.atol), ..defaults };
    opts.moment = moment;
    opts.positivity_floor = cfg.positivity_floor;
    if let Some(b) = cfg.bound_form {
        opts.bound_form = b.into();
    }
    Ok(opts)
}

/// Trajectory artifacts. Non-convergence wins over certification failure.
fn trajectory_outcome(cfg: &RunConfig, traj: &Trajectory, with_bound: bool, extra: Map<String, Value>, cert_ok: bool) -> Result<Outcome> {
    let mut flags = traj.meta.flags.clone();
    if let Some(e) = &traj.meta.error {
        flags.push(format!("not converged: {e}"));
    }
    if let Some(Value::Array(f)) = extra.get("flags") {
        flags.extend(f.iter().filter_map(|v| v.as_str().map(String::from)));
    }
    let mut side = Map::new();
    side.insert("meta".into(), to_value(&traj.meta)?);
    for (k, v) in extra {
        if k != "flags" {
            side.insert(k, v);
        }
    }
    side.insert("flags".into(), json!(flags));
    let code = if traj.meta.error.is_some() {
        EXIT_NOT_CONVERGED
    } else if !cert_ok {
        EXIT_CERT_FAILED
    } else {
        EXIT_OK
    };
    let primary = match cfg.format.unwrap_or_default() {
        Format::Csv => io::trajectory_csv(traj, with_bound),
        Format::Json => {
            let mut all = side.clone();
            all.insert("samples".into(), to_value(&traj.samples)?);
            io::to_json(&Value::Object(all))? + "\n"
        }
    };
    Ok(Outcome { primary, sidecar: Some(Value::Object(side)), code })
}

fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.model()?;
    let state0 = initial_state(cfg, &model)?;
    let track = match (model.gamma() < 1.0, cfg.beta, cfg.exp_mu) {
        (true, Some(b), _) => MomentTrack::Power(b),
        (true, None, Some(mu)) => MomentTrack::Exp(mu),
        _ => MomentTrack::None,
    };
    let mut traj = integrate_bd(&state0, &model, &run_options(cfg, track)?)?;
    let mut extra = Map::new();
    let mut flags = Vec::new();
    if let Ok(fit) = fit_decay(&traj.times(), &traj.h_values(), model.gamma()) {
        extra.insert("fit".into(), to_value(&fit)?);
    }
    let mut cert_ok = true;
    if cfg.certify.unwrap_or(false) {
        let mb = moment_bound(cfg, &model, traj.moment_sup(), &mut flags)?;
        let cert = certify(&model, traj.meta.mass0, cfg.delta.unwrap_or(DEFAULT_DELTA), mb)?;
        let check = traj.certify(&cert);
        let env = DecayEnvelope::from_certificate(&cert, traj.samples[0].h_rel)?;
        traj.attach_envelope(&env);
        let env_bad = traj.envelope_violations(RUN_SLACK, 1e-14);
        cert_ok = check.violations.is_empty() && env_bad.is_empty();
        if !check.violations.is_empty() {
            flags.push(format!("certified bound violated at {} samples", check.violations.len()));
        }
        if !env_bad.is_empty() {
            flags.push(format!("decay envelope violated at {} samples", env_bad.len()));
        }
        extra.insert(
            "certification".into(),
            json!({
                "passed": cert_ok,
                "report": to_value(&cert.report)?,
                "z_bar": cert.z_bar,
                "window_samples": check.in_window,
                "outside_samples": check.outside,
                "violations": check.violations.iter().take(20).collect::<Vec<_>>(),
                "envelope": to_value(&env)?,
                "envelope_violations": env_bad.len(),
            }),
        );
    }
    extra.insert("flags".into(), json!(flags));
    trajectory_outcome(cfg, &traj, false, extra, cert_ok)
}

fn cf(cfg: &RunConfig) -> Result<Outcome> {
    let q_model = cfg.model()?;
    let gamma = q_model.gamma();
    let eta = cfg.eta.unwrap_or(0.0);
    let k = cfg.beta.unwrap_or(2.0);
    let state0 = initial_state(cfg, &q_model)?;
    let sys = CfSystem::power(gamma, eta, &q_model, state0.len())?;
    let mut traj = integrate_cf(&state0, &sys, &run_options(cfg, MomentTrack::Power(k))?)?;
    let mut extra = Map::new();
    let mut flags = Vec::new();
    let moment_bad = traj.moment_bound_violations(1e-7).len();
    let mut cert_ok = true;
    if cfg.certify.unwrap_or(false) {
        cert_ok = moment_bad == 0;
        if eta == 0.0 && gamma < 1.0 {
            let h0 = traj.samples[0].h_rel;
            let input = CfEnvelopeInput {
                q_model: &q_model,
                gamma,
                k,
                rho: traj.meta.mass0,
                delta: cfg.delta.unwrap_or(DEFAULT_DELTA),
                h0,
                m0: moment(state0.c(), k),
                horizon: cfg.t_end.unwrap_or(DEFAULT_T_END),
            };
            let env = cf_log_envelope(&input)?;
            traj.attach_envelope(&env);
            let env_bad = traj.envelope_violations(RUN_SLACK, 1e-14).len();
            if env_bad > 0 {
                flags.push(format!("decay envelope violated at {env_bad} samples"));
                cert_ok = false;
            }
            extra.insert("envelope".into(), to_value(&env)?);
        } else {
            flags.push("no decay envelope for this kernel; only the moment bound is certified".into());
        }
        extra.insert("certification".into(), json!({ "passed": cert_ok, "moment_violations": moment_bad }));
    }
    extra.insert("kernel".into(), json!({ "gamma": gamma, "eta": eta, "k": k }));
    extra.insert("flags".into(), json!(flags));
    trajectory_outcome(cfg, &traj, true, extra, cert_ok)
}

fn counterexample(cfg: &RunConfig) -> Result<Outcome> {
    let gamma = cfg.gamma.ok_or_else(|| Error::invalid("counterexample needs --gamma"))?;
    let family = CounterexampleFamily::new(cfg.lambda.unwrap_or(0.0), cfg.require_rho()?, gamma)?;
    let grid = cfg.eps_grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec());
    let study = ratio_study(&family, &grid)?;
    let decreasing = study.ratio_decreasing();
    let rows: Vec<Value> = study
        .rows
        .iter()
        .map(|r| json!({ "eps": r.eps, "A_eps": r.amplitude, "N": r.n, "mass": r.mass, "flux_ok": r.flux_ok }))
        .collect();
    let side = json!({
        "lambda": family.lambda,
        "rho": family.rho,
        "gamma": family.gamma,
        "xi": family.xi,
        "z_bar": study.z_bar,
        "h_limit": study.h_limit,
        "ratio_decreasing": decreasing,
        "rows": rows,
        "flags": study.flags,
    });
    let primary = match cfg.format.unwrap_or_default() {
        Format::Csv => io::counterexample_csv(&study),
        Format::Json => io::to_json(&study)? + "\n",
    };
    let code = if cfg.certify.unwrap_or(false) && !decreasing { EXIT_CERT_FAILED } else { EXIT_OK };
    Ok(Outcome { primary, sidecar: Some(side), code })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("bdkin".to_string()).chain(s.split_whitespace().map(String::from)).collect()
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from(args("equilibrium --family custom --a-table 1,2,3 --b-table 1,2,3 --rho 2 --N 50 --certify")).unwrap();
        let Command::Equilibrium(a) = cli.command else { panic!() };
        assert_eq!(a.opts.a_table, Some(vec![1.0, 2.0, 3.0]));
        assert_eq!(a.opts.n, Some(50));
        assert_eq!(a.opts.certify, Some(true));
    }

    #[test]
    fn unknown_flag_is_validation_error() {
        assert_eq!(run(args("equilibrium --bogus 1")), EXIT_INVALID);
        assert_eq!(run(args("equilibrium --family custom --a-table 1 --b-table 1 --rho -1")), EXIT_INVALID);
        assert_eq!(run(args("constants --family pt --gamma 1 --zs 1 --q 1 --mu 0.5 --rho 1 --beta 2")), EXIT_INVALID);
    }

    #[test]
    fn equilibrium_report() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("eq.json");
        let cmd = format!(
            "equilibrium --family custom --a-table 1,2,3 --b-table 1,2,3 --rho 2 --format json --out {}",
            out.display()
        );
        assert_eq!(run(args(&cmd)), EXIT_OK);
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert!((v["z_bar"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(v["rho_s"], "infinite");
    }

    #[test]
    fn csv_report_rows() {
        let v = json!({ "a": 1.0, "b": { "c": "x,y" }, "f": ["p", "q"], "n": null });
        let s = render_report(&v, Format::Csv).unwrap();
        assert_eq!(s, "key,value\na,1.0000000000000000e0\nb.c,\"x,y\"\nf,p;q\nn,\n");
    }

    #[test]
    fn random_state_is_seeded() {
        let a = random_state(7, 30, 2.0, 1.0).unwrap();
        let b = random_state(7, 30, 2.0, 1.0).unwrap();
        let c = random_state(8, 30, 2.0, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.mass() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unwritable_output_fails_early() {
        let code = run(args("equilibrium --family custom --a-table 1 --b-table 1 --rho 2 --out /nonexistent/dir/x.json"));
        assert_eq!(code, EXIT_INVALID);
    }
}
