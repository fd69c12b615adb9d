//! Becker-Doring and coagulation-fragmentation kinetics: equilibria, entropy
//! functionals, log-Sobolev and Hardy constants, certified decay envelopes.

pub mod error;
pub mod cli;
pub mod config;
pub mod counterexample;
pub mod dynamics;
pub mod functionals;
pub mod io;
pub mod logsob;
pub mod model;

pub use error::{Error, Result};
