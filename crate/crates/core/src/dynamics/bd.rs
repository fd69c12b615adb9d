//! Truncated Becker-Doring system with closure `W_N = 0`.

use crate::error::{Error, Result};
use crate::functionals::ClusterState;
use crate::model::CoefficientModel;

/// Rate tables for `N` cluster sizes.
#[derive(Clone, Debug)]
pub struct BdSystem {
    /// `a_1..a_{N-1}`.
    a: Vec<f64>,
    /// `b_2..b_N`.
    b: Vec<f64>,
}

impl BdSystem {
    pub fn new(model: &CoefficientModel, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("Becker-Doring system needs N >= 2, got {n}")));
        }
        Ok(BdSystem { a: model.a_table(n - 1), b: model.b_next_table(n - 1) })
    }

    /// Builds the system from explicit tables `a_1..a_{N-1}` and `b_2..b_N`.
    pub fn from_tables(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::invalid("rate tables must be non-empty and of equal length"));
        }
        Ok(BdSystem { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fluxes `W_1..W_{N-1}`.
    pub fn fluxes(&self, c: &[f64], w: &mut [f64]) {
        let c1 = c[0];
        for i in 0..self.a.len() {
            w[i] = self.a[i] * c1 * c[i] - self.b[i] * c[i + 1];
        }
    }

    pub fn rhs(&self, c: &[f64], dc: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(c.len(), n);
        let c1 = c[0];
        let mut prev = 0.0;
        let mut total = 0.0;
        for i in 0..n - 1 {
            let w = self.a[i] * c1 * c[i] - self.b[i] * c[i + 1];
            total += w;
            if i > 0 {
                dc[i] = prev - w;
            }
            prev = w;
        }
        dc[n - 1] = prev;
        // W_1 is counted once more: a monomer is consumed on both sides
        dc[0] = -total - self.a[0] * c1 * c1 + self.b[0] * c[1];
    }
}

/// `dc/dt` of the truncated system at `state`.
pub fn bd_rhs(state: &ClusterState, model: &CoefficientModel) -> Result<Vec<f64>> {
    let sys = BdSystem::new(model, state.len())?;
    let mut dc = vec![0.0; state.len()];
    sys.rhs(state.c(), &mut dc);
    Ok(dc)
}
