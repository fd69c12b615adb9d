//! CSV and JSON emission. Floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::counterexample::RatioStudy;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::functionals::ClusterState;

pub const TRAJECTORY_HEADER: &str = "t,c1,mass,H_rel,D,D_lower,M_beta,envelope";
pub const COUNTEREXAMPLE_HEADER: &str = "eps,D,H,ratio,ratio_s2,ratio_s5";

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => fmt_f64(x),
        _ => String::new(),
    }
}

/// Reads a state from CSV with header `i,c`. Sizes missing from the file are zero.
pub fn read_state_csv(text: &str) -> Result<ClusterState> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Config("state CSV is empty".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["i", "c"] {
        return Err(Error::Config(format!("state CSV header must be `i,c`, got `{header}`")));
    }
    let mut entries = Vec::new();
    for (k, line) in lines.enumerate() {
        let bad = || Error::Config(format!("state CSV line {}: `{line}`", k + 2));
        let (i, c) = line.split_once(',').ok_or_else(bad)?;
        let i: usize = i.trim().parse().map_err(|_| bad())?;
        let c: f64 = c.trim().parse().map_err(|_| bad())?;
        if i == 0 {
            return Err(bad());
        }
        entries.push((i, c));
    }
    let n = entries.iter().map(|e| e.0).max().ok_or_else(|| Error::Config("state CSV has no rows".into()))?;
    let mut c = vec![0.0; n];
    for (i, v) in entries {
        c[i - 1] = v;
    }
    ClusterState::new(c)
}

pub fn state_csv(state: &ClusterState) -> String {
    let mut s = String::from("i,c\n");
    for (k, v) in state.c().iter().enumerate() {
        let _ = writeln!(s, "{},{}", k + 1, fmt_f64(*v));
    }
    s
}

/// Trajectory rows; `with_bound` appends a `moment_bound` column.
pub fn trajectory_csv(traj: &Trajectory, with_bound: bool) -> String {
    let mut s = String::from(TRAJECTORY_HEADER);
    if with_bound {
        s.push_str(",moment_bound");
    }
    s.push('\n');
    for p in &traj.samples {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.c1),
            fmt_f64(p.mass),
            fmt_opt(Some(p.h_rel)),
            fmt_opt(p.d),
            fmt_opt(p.d_lower),
            fmt_opt(p.moment),
            fmt_opt(p.envelope)
        );
        if with_bound {
            let _ = write!(s, ",{}", fmt_opt(p.moment_bound));
        }
        s.push('\n');
    }
    s
}

pub fn counterexample_csv(study: &RatioStudy) -> String {
    let mut s = format!("{COUNTEREXAMPLE_HEADER}\n");
    for r in &study.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f64(r.eps),
            fmt_f64(r.d),
            fmt_f64(r.h),
            fmt_f64(r.ratio),
            fmt_f64(r.ratio_s2),
            fmt_f64(r.ratio_s5)
        );
    }
    s
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Config(format!("JSON serialisation failed: {e}")))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_roundtrip() {
        let s = ClusterState::new(vec![0.5, 0.25, 1e-300, 0.0]).unwrap();
        let back = read_state_csv(&state_csv(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn gaps_are_zero() {
        let s = read_state_csv("i,c\n3,0.5\n1,1.0\n").unwrap();
        assert_eq!(s.c(), &[1.0, 0.0, 0.5]);
    }

    #[test]
    fn bad_state_files() {
        assert!(read_state_csv("").is_err());
        assert!(read_state_csv("k,c\n1,1\n").is_err());
        assert!(read_state_csv("i,c\n0,1\n").is_err());
        assert!(read_state_csv("i,c\n1,x\n").is_err());
        assert!(read_state_csv("i,c\n1,-1\n").is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_opt(None), "");
        assert_eq!(fmt_opt(Some(f64::NAN)), "");
    }
}
