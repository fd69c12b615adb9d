//! Log-Sobolev and Hardy constants for weighted `N`, and the certified
//! entropy-dissipation constants built from them.

pub mod cercignani;
pub mod constants;
pub mod measures;

pub use cercignani::*;
pub use constants::{hardy_constants, logsob_constants, lsi_ratio, HardyConstants, LogSobReport, Supremum};
pub use measures::{approximate_median, measures_from_state, measures_with_rate, WeightPair};
