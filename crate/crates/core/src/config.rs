//! Run configuration. The same flat key set is read from a TOML file and from
//! command-line flags; flags win.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::dynamics::BoundForm;
use crate::error::{Error, Result};
use crate::model::CoefficientModel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    /// `a_i = i^gamma`, `b_i = a_i (zs + q i^(mu-1))`.
    Pt,
    /// `a_i = i^gamma`, `b_i = zs (i-1)^gamma exp(sigma i^mu - sigma (i-1)^mu)`.
    Cf,
    /// Rate tables, last entry repeated.
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BoundFormName {
    Derived,
    Printed,
}

impl From<BoundFormName> for BoundForm {
    fn from(b: BoundFormName) -> Self {
        match b {
            BoundFormName::Derived => BoundForm::Derived,
            BoundFormName::Printed => BoundForm::Printed,
        }
    }
}

/// Every option of every command. Unset options fall back to the config file,
/// then to the command's default.
#[derive(Clone, Debug, Default, PartialEq, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub zs: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Power-law exponent of the built-in families.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Comma list `a_1,a_2,...`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a_table: Option<Vec<f64>>,
    /// Comma list `b_2,b_3,...`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub b_table: Option<Vec<f64>>,

    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Power-moment order.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Bound on the power moment; defaults to the monitored supremum plus 1%.
    #[arg(long)]
    pub m_beta: Option<f64>,
    /// Rate of the exponential moment.
    #[arg(long)]
    pub exp_mu: Option<f64>,
    #[arg(long)]
    pub m_exp: Option<f64>,
    /// Monomer density for `logsob`; defaults to the equilibrium one.
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Second kernel exponent of the coagulation-fragmentation run.
    #[arg(long)]
    pub eta: Option<f64>,

    #[serde(rename = "N")]
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub cadence: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps_grid: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub bound_form: Option<BoundFormName>,
    #[arg(long)]
    pub positivity_floor: Option<f64>,
    /// Initial state as CSV with columns `i,c`.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub certify: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        RunConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RunConfig {
    pub fn parse_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_toml(&text)
    }

    /// `top` wins wherever it is set.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        overlay!(
            self, top, family, gamma, zs, q, mu, sigma, a_table, b_table, rho, delta, beta, m_beta, exp_mu, m_exp,
            c1, lambda, eta, n, t_end, cadence, rtol, atol, eps_grid, bound_form, positivity_floor, init, seed,
            certify, out, format
        )
    }

    /// Range checks shared by all commands.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("zs", self.zs),
            ("q", self.q),
            ("rho", self.rho),
            ("delta", self.delta),
            ("beta", self.beta),
            ("m_beta", self.m_beta),
            ("exp_mu", self.exp_mu),
            ("m_exp", self.m_exp),
            ("c1", self.c1),
            ("t_end", self.t_end),
            ("cadence", self.cadence),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("positivity_floor", self.positivity_floor),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
                }
            }
        }
        for (name, v) in [("gamma", self.gamma), ("mu", self.mu), ("sigma", self.sigma), ("lambda", self.lambda), ("eta", self.eta)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::invalid(format!("{name} must be finite, got {v}")));
                }
            }
        }
        if let Some(n) = self.n {
            if n < 2 {
                return Err(Error::invalid(format!("N must be at least 2, got {n}")));
            }
        }
        if self.gamma == Some(1.0) && self.beta.is_some() {
            return Err(Error::invalid("conflicting regime options: --beta applies only when gamma < 1"));
        }
        if self.gamma == Some(1.0) && self.exp_mu.is_some() {
            return Err(Error::invalid("conflicting regime options: --exp-mu applies only when gamma < 1"));
        }
        if self.beta.is_some() && self.exp_mu.is_some() {
            return Err(Error::invalid("conflicting regime options: --beta and --exp-mu"));
        }
        Ok(())
    }

    /// Builds the coefficient model. Parameters foreign to the family are rejected.
    pub fn model(&self) -> Result<CoefficientModel> {
        let family = self.family.ok_or_else(|| Error::invalid("missing --family (pt, cf or custom)"))?;
        let need = |name: &str, v: Option<f64>| v.ok_or_else(|| Error::invalid(format!("family {family:?} needs --{name}")));
        let forbid = |names: &[(&str, bool)]| -> Result<()> {
            match names.iter().find(|(_, set)| *set) {
                Some((name, _)) => Err(Error::invalid(format!("--{name} does not apply to family {family:?}"))),
                None => Ok(()),
            }
        };
        let tables = self.a_table.is_some() || self.b_table.is_some();
        match family {
            FamilyName::Pt => {
                forbid(&[("sigma", self.sigma.is_some()), ("a-table/b-table", tables)])?;
                CoefficientModel::power_law_pt(
                    need("gamma", self.gamma)?,
                    need("zs", self.zs)?,
                    need("q", self.q)?,
                    need("mu", self.mu)?,
                )
            }
            FamilyName::Cf => {
                forbid(&[("q", self.q.is_some()), ("a-table/b-table", tables)])?;
                CoefficientModel::power_law_cf(
                    need("gamma", self.gamma)?,
                    need("zs", self.zs)?,
                    need("sigma", self.sigma)?,
                    need("mu", self.mu)?,
                )
            }
            FamilyName::Custom => {
                forbid(&[("q", self.q.is_some()), ("sigma", self.sigma.is_some()), ("mu", self.mu.is_some())])?;
                let a = self.a_table.clone().ok_or_else(|| Error::invalid("family custom needs --a-table"))?;
                let b = self.b_table.clone().ok_or_else(|| Error::invalid("family custom needs --b-table"))?;
                CoefficientModel::custom_tables(self.gamma.unwrap_or(1.0), a, b, self.zs)
            }
        }
    }

    pub fn require_rho(&self) -> Result<f64> {
        self.rho.ok_or_else(|| Error::invalid("missing --rho"))
    }
}
