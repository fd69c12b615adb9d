//! Scalar functionals of cluster states and of functions on weighted `N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{series, CoefficientModel, LogQIter, Weight};

/// Truncated non-negative concentrations `c_1..c_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterState {
    c: Vec<f64>,
    mass: f64,
}

impl ClusterState {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::invalid("cluster state must have at least one entry"));
        }
        if let Some(k) = c.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(format!("c_{} = {} is not a non-negative number", k + 1, c[k])));
        }
        let mass = mass(&c);
        Ok(ClusterState { c, mass })
    }

    /// Raises every entry to at least `floor`.
    pub fn with_floor(c: Vec<f64>, floor: f64) -> Result<Self> {
        if !(floor >= 0.0 && floor.is_finite()) {
            return Err(Error::invalid(format!("positivity floor must be non-negative, got {floor}")));
        }
        Self::new(c.into_iter().map(|v| if v < floor { floor } else { v }).collect())
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.c
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn c1(&self) -> f64 {
        self.c[0]
    }

    pub fn moment(&self, beta: f64) -> f64 {
        moment(&self.c, beta)
    }

    pub fn exp_moment(&self, mu: f64) -> Result<f64> {
        exp_moment(&self.c, mu)
    }
}

/// `sum i c_i`, summed from the tail so the small terms are not lost.
pub fn mass(c: &[f64]) -> f64 {
    c.iter().enumerate().rev().map(|(k, v)| (k + 1) as f64 * v).sum()
}

/// `sum i^beta c_i`.
pub fn moment(c: &[f64], beta: f64) -> f64 {
    c.iter().enumerate().rev().map(|(k, v)| ((k + 1) as f64).powf(beta) * v).sum()
}

/// `sum e^(mu i) c_i`.
pub fn exp_moment(c: &[f64], mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("exponential moment needs mu > 0, got {mu}")));
    }
    if mu * c.len() as f64 > 700.0 {
        return Err(Error::Overflow(format!(
            "e^(mu N) overflows for mu = {mu}, N = {}; use a smaller mu or N",
            c.len()
        )));
    }
    Ok(c.iter().enumerate().rev().map(|(k, v)| (mu * (k + 1) as f64).exp() * v).sum())
}

/// `phi(r) = r log r - r + 1` with `phi(0) = 1`.
pub fn free_energy_kernel(r: f64) -> f64 {
    let d = r - 1.0;
    if d.abs() < 0.1 {
        // sum_{n>=2} (-1)^n d^n / (n (n-1))
        let mut term = d * d;
        let mut sum = 0.0;
        for n in 2..40 {
            let nf = n as f64;
            sum += term / (nf * (nf - 1.0));
            term *= -d;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else if r == 0.0 {
        1.0
    } else {
        r * r.ln() - r + 1.0
    }
}

/// `Q phi(c/Q)` from `c` and `log Q`.
pub(crate) fn weighted_kernel(c: f64, log_q: f64) -> f64 {
    if c == 0.0 {
        return log_q.exp();
    }
    if log_q < -700.0 {
        return c * (c.ln() - log_q) - c + log_q.exp();
    }
    let q = log_q.exp();
    q * free_energy_kernel(c / q)
}

fn check_z(model: &CoefficientModel, z: f64) -> Result<()> {
    let zs = model.zs()?;
    if !(z > 0.0 && z < zs) {
        return Err(Error::invalid(format!("monomer density {z} outside (0, {zs})")));
    }
    Ok(())
}

/// `H(c | Q_z) = sum Q_i z^i phi(c_i / (Q_i z^i))`, with the equilibrium
/// tail past the truncation added in closed form.
pub fn relative_free_energy(state: &ClusterState, model: &CoefficientModel, z: f64) -> Result<f64> {
    check_z(model, z)?;
    let lz = z.ln();
    let head: f64 = LogQIter::new(model)
        .zip(state.c())
        .enumerate()
        .map(|(k, (lq, &c))| weighted_kernel(c, lq + (k + 1) as f64 * lz))
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .sum();
    let tail = series(model, z, Weight::Pow(0), state.len(), 1e-14)?;
    Ok(head + tail.value)
}

/// Free energy `sum c_i (log(c_i / Q_i) - 1)`.
pub fn free_energy(state: &ClusterState, model: &CoefficientModel) -> f64 {
    LogQIter::new(model)
        .zip(state.c())
        .map(|(lq, &c)| if c == 0.0 { 0.0 } else { c * (c.ln() - lq - 1.0) })
        .sum()
}

/// `sum |c_i - Q_i z^i|` including the equilibrium tail.
pub fn l1_distance(state: &ClusterState, model: &CoefficientModel, z: f64) -> Result<f64> {
    check_z(model, z)?;
    let lz = z.ln();
    let head: f64 = LogQIter::new(model)
        .zip(state.c())
        .enumerate()
        .map(|(k, (lq, &c))| (c - (lq + (k + 1) as f64 * lz).exp()).abs())
        .sum();
    Ok(head + series(model, z, Weight::Pow(0), state.len(), 1e-14)?.value)
}

/// Per-reaction terms `W_i log(a_i c_1 c_i / (b_{i+1} c_{i+1}))` for `i < N`.
pub fn dissipation_terms(state: &ClusterState, model: &CoefficientModel) -> Result<Vec<f64>> {
    let c = state.c();
    if let Some(k) = c.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroConcentration { index: k + 1 });
    }
    let lc1 = c[0].ln();
    Ok((1..c.len())
        .map(|i| {
            let (a, b) = (model.a(i), model.b(i + 1));
            let w = a * c[0] * c[i - 1] - b * c[i];
            if w == 0.0 {
                return 0.0;
            }
            let log_ratio = a.ln() + lc1 + c[i - 1].ln() - b.ln() - c[i].ln();
            w * log_ratio
        })
        .collect())
}

/// Entropy dissipation `D(c)`; needs strictly positive concentrations.
pub fn dissipation(state: &ClusterState, model: &CoefficientModel) -> Result<f64> {
    Ok(dissipation_terms(state, model)?.iter().sum())
}

/// Per-reaction terms `(sqrt(a_i c_1 c_i) - sqrt(b_{i+1} c_{i+1}))^2`.
pub fn lower_dissipation_terms(state: &ClusterState, model: &CoefficientModel) -> Vec<f64> {
    let c = state.c();
    (1..c.len())
        .map(|i| {
            let d = (model.a(i) * c[0] * c[i - 1]).sqrt() - (model.b(i + 1) * c[i]).sqrt();
            d * d
        })
        .collect()
}

/// Lower dissipation `D_bar(c)`; zeros allowed.
pub fn lower_dissipation(state: &ClusterState, model: &CoefficientModel) -> f64 {
    lower_dissipation_terms(state, model).iter().sum()
}

/// Lower dissipation with the coagulation rate replaced by `rate(i)`, keeping
/// the detailed-balance weights of `model`.
pub fn lower_dissipation_with_rate(
    state: &ClusterState,
    model: &CoefficientModel,
    rate: impl Fn(usize) -> f64,
) -> f64 {
    let c = state.c();
    (1..c.len())
        .map(|i| {
            let r = rate(i);
            let back = r * (-model.log_ratio(i)).exp();
            let d = (r * c[0] * c[i - 1]).sqrt() - (back * c[i]).sqrt();
            d * d
        })
        .sum()
}

/// Lower dissipation written against the equilibrium profile `Q_z`:
/// `sum a_i (Q_z)_1 (Q_z)_i (sqrt(c_1 c_i / ((Q_z)_1 (Q_z)_i)) - sqrt(c_{i+1} / (Q_z)_{i+1}))^2`.
/// Independent of `z`; kept as a cross-check of [`lower_dissipation`].
pub fn lower_dissipation_at(state: &ClusterState, model: &CoefficientModel, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::invalid("z must be positive"));
    }
    let c = state.c();
    let lq = model.log_q_table(c.len());
    let qz = |i: usize| (lq[i - 1] + i as f64 * z.ln()).exp();
    Ok((1..c.len())
        .map(|i| {
            let (q1, qi, qn) = (qz(1), qz(i), qz(i + 1));
            let d = (c[0] * c[i - 1] / (q1 * qi)).sqrt() - (c[i] / qn).sqrt();
            model.a(i) * qi * q1 * d * d
        })
        .sum())
}

fn check_normalized(mu: &[f64]) -> Result<()> {
    let s: f64 = mu.iter().sum();
    if (s - 1.0).abs() > 1e-9 || mu.iter().any(|&m| !(m >= 0.0)) {
        return Err(Error::invalid(format!("weights must be a probability vector (sum = {s})")));
    }
    Ok(())
}

/// `Ent_mu(g) = sum mu_i g_i log(g_i / <g>)` with `0 log 0 = 0`.
pub fn entropy(mu: &[f64], g: &[f64]) -> Result<f64> {
    check_normalized(mu)?;
    if mu.len() != g.len() {
        return Err(Error::invalid("mu and g have different lengths"));
    }
    if g.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::invalid("entropy needs g >= 0"));
    }
    let mean: f64 = mu.iter().zip(g).map(|(m, v)| m * v).sum();
    if mean == 0.0 {
        return Ok(0.0);
    }
    Ok(mean * mu.iter().zip(g).map(|(m, v)| m * free_energy_kernel(v / mean)).sum::<f64>())
}

/// `Ent_mu((f + alpha)^2)`, evaluated through the relative deviations so that
/// large translations do not cancel catastrophically.
pub fn entropy_translated_square(mu: &[f64], f: &[f64], alpha: f64) -> f64 {
    let m1: f64 = mu.iter().zip(f).map(|(m, v)| m * v).sum();
    let m2: f64 = mu.iter().zip(f).map(|(m, v)| m * v * v).sum();
    let mean = m2 + 2.0 * alpha * m1 + alpha * alpha;
    if mean <= 0.0 {
        return 0.0;
    }
    let sum: f64 = mu
        .iter()
        .zip(f)
        .map(|(m, v)| {
            let d = ((v * v - m2) + 2.0 * alpha * (v - m1)) / mean;
            m * free_energy_kernel(1.0 + d)
        })
        .sum();
    (mean * sum).max(0.0)
}

/// Young function `Psi(x) = |x| log(1 + |x|)`.
pub fn psi(x: f64) -> f64 {
    let a = x.abs();
    a * a.ln_1p()
}

/// Young function `Phi(x) = Psi(x^2)`.
pub fn phi(x: f64) -> f64 {
    psi(x * x)
}

fn dpsi(y: f64) -> f64 {
    y.ln_1p() + y / (1.0 + y)
}

/// Inverse of `Psi` on `(0, inf)`.
pub fn psi_inv(t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("psi_inv needs t > 0, got {t}")));
    }
    let (mut lo, mut hi) = if t >= 1.5 {
        let l = t.ln();
        (t / (3.0 * l), 2.0 * t / l)
    } else {
        (0.0, t.max(2.0))
    };
    let tol = 1e-12 * t.max(1.0);
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = psi(y) - t;
        if r.abs() <= 0.25 * tol {
            break;
        }
        if r > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let newton = y - r / dpsi(y);
        y = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(y)
}

/// Inverse of `Phi`.
pub fn phi_inv(t: f64) -> Result<f64> {
    Ok(psi_inv(t)?.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Young {
    Psi,
    Phi,
}

impl Young {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Young::Psi => psi(x),
            Young::Phi => phi(x),
        }
    }

    pub fn inv(self, t: f64) -> Result<f64> {
        match self {
            Young::Psi => psi_inv(t),
            Young::Phi => phi_inv(t),
        }
    }
}

/// Luxemburg norm `inf { k > 0 : sum mu_i Y(|f_i| / k) <= 1 }`.
pub fn orlicz_norm(mu: &[f64], f: &[f64], young: Young) -> Result<f64> {
    if mu.len() != f.len() {
        return Err(Error::invalid("mu and f have different lengths"));
    }
    let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if fmax == 0.0 {
        return Ok(0.0);
    }
    let modular = |k: f64| -> f64 { mu.iter().zip(f).map(|(m, v)| m * young.eval(v.abs() / k)).sum() };
    let mut lo = 0.0f64;
    for (m, v) in mu.iter().zip(f) {
        if *m > 0.0 && *v != 0.0 {
            lo = lo.max(v.abs() / young.inv(1.0 / m)?);
        }
    }
    let mut hi = fmax / young.inv(1.0)?;
    if modular(hi) > 1.0 {
        // only possible when mu sums to more than one
        while modular(hi) > 1.0 {
            hi *= 2.0;
        }
    }
    let (mut llo, mut lhi) = (lo.max(hi * 1e-300).ln(), hi.ln());
    for _ in 0..200 {
        if lhi - llo <= 1e-14 {
            break;
        }
        let mid = 0.5 * (llo + lhi);
        if modular(mid.exp()) > 1.0 {
            llo = mid;
        } else {
            lhi = mid;
        }
    }
    Ok(lhi.exp())
}

/// `||f||_{L^p_mu}`.
pub fn lp_norm(mu: &[f64], f: &[f64], p: f64) -> f64 {
    mu.iter().zip(f).map(|(m, v)| m * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Result of maximising `alpha -> Ent((f + alpha)^2)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TranslateEntropy {
    pub value: f64,
    /// Maximiser found on the search window.
    pub alpha: f64,
    /// `2 ||f - <f>||^2`, the value approached as `|alpha| -> inf`.
    pub asymptote: f64,
}

const L_GRID: usize = 512;

/// `sup_alpha Ent_mu((f + alpha)^2)`: grid search on `[-A, A]`, golden-section
/// refinement and the large-translation limit. A lower bound of the true sup.
pub fn sup_translate_entropy(mu: &[f64], f: &[f64], window: Option<f64>) -> Result<TranslateEntropy> {
    check_normalized(mu)?;
    if mu.len() != f.len() {
        return Err(Error::invalid("mu and f have different lengths"));
    }
    let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let m1: f64 = mu.iter().zip(f).map(|(m, v)| m * v).sum();
    let var: f64 = mu.iter().zip(f).map(|(m, v)| m * (v - m1) * (v - m1)).sum();
    let asymptote = 2.0 * var;
    if fmax == 0.0 {
        return Ok(TranslateEntropy { value: 0.0, alpha: 0.0, asymptote });
    }
    let a = window.unwrap_or(10.0 * fmax);
    let ent = |alpha: f64| entropy_translated_square(mu, f, alpha);
    let h = 2.0 * a / (L_GRID - 1) as f64;
    let mut best = (0.0, ent(0.0));
    for k in 0..L_GRID {
        let x = -a + h * k as f64;
        let v = ent(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    // golden-section on the neighbouring cells
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (ent(x1), ent(x2));
    while hi - lo > 1e-10 * a.max(1.0) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = ent(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = ent(x1);
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(TranslateEntropy { value: best.1.max(asymptote), alpha: best.0, asymptote })
}

/// A named functional value for JSON output.
#[derive(Clone, Debug, Serialize)]
pub struct FunctionalRecord {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::equilibrium_monomer_density;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_q() -> CoefficientModel {
        CoefficientModel::custom_fn(1.0, |i| i as f64, |i| (i - 1) as f64, Some(1.0)).unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> ClusterState {
        let decay: f64 = rng.gen_range(0.2..0.8);
        let c = (1..=n).map(|i| rng.gen_range(0.2..1.8) * decay.powi(i as i32)).collect();
        ClusterState::new(c).unwrap()
    }

    #[test]
    fn mass_examples() {
        assert_eq!(mass(&[2.0, 0.0, 0.0]), 2.0);
        assert_eq!(mass(&[1.0, 1.0, 0.0]), 3.0);
        let c: Vec<f64> = (1..=50).map(|i| 0.5f64.powi(i)).collect();
        let exact = 2.0 - 52.0 * 0.5f64.powi(50);
        assert!((mass(&c) - exact).abs() < 1e-13);
        assert!((mass(&c) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn moment_examples() {
        assert_eq!(moment(&[1.0, 1.0], 2.0), 5.0);
        assert_eq!(moment(&[0.3, 0.2, 0.1], 0.0), 0.6000000000000001);
        assert_relative_eq!(exp_moment(&[1.0, 1.0], 2f64.ln()).unwrap(), 6.0, epsilon = 1e-14);
        assert!(matches!(exp_moment(&vec![1.0; 2000], 1.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn free_energy_kernel_branches_agree() {
        for r in [0.9, 0.95, 1.0, 1.05, 1.1, 1.0 + 1e-9] {
            let direct = r * f64::ln(r) - r + 1.0;
            assert!((free_energy_kernel(r) - direct).abs() < 1e-15);
        }
        assert_eq!(free_energy_kernel(0.0), 1.0);
    }

    #[test]
    fn relative_free_energy_closed_form() {
        let m = unit_q();
        let z = (3.0 - 5f64.sqrt()) / 2.0;
        let mut c = vec![0.0; 10];
        c[0] = 1.0;
        let s = ClusterState::new(c).unwrap();
        let h = relative_free_energy(&s, &m, z).unwrap();
        let closed = -z.ln() - 1.0 + z + z * z / (1.0 - z);
        // oracle: direct summation to N = 10^4
        let oracle = (z - 1.0 - z.ln()) + (2..=10_000).map(|i| z.powi(i)).sum::<f64>();
        assert_relative_eq!(closed, oracle, max_relative = 1e-13);
        assert_relative_eq!(h, oracle, max_relative = 1e-12);
        assert_relative_eq!(h, 0.580458, epsilon = 1e-6);
    }

    #[test]
    fn relative_free_energy_vanishes_at_equilibrium() {
        let m = unit_q();
        let e = equilibrium_monomer_density(&m, 2.0, 1e-13).unwrap();
        let s = ClusterState::new(e.profile(80)).unwrap();
        assert!(relative_free_energy(&s, &m, e.z_bar).unwrap() < 1e-15 + e.tail_mass(80).unwrap());
        assert!(dissipation(&s, &m).unwrap().abs() < 1e-14);
        assert!(lower_dissipation(&s, &m) < 1e-28);
    }

    #[test]
    fn dissipation_needs_positivity() {
        let m = unit_q();
        let s = ClusterState::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(dissipation(&s, &m), Err(Error::ZeroConcentration { index: 3 })));
        let floored = ClusterState::with_floor(vec![1.0, 1.0, 0.0], 1e-30).unwrap();
        let terms = dissipation_terms(&floored, &m).unwrap();
        assert_eq!(terms[0], 0.0);
        assert!(terms[1] > 100.0);
    }

    #[test]
    fn lower_dissipation_two_terms() {
        let m = unit_q();
        let s = ClusterState::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(lower_dissipation(&s, &m), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn lower_dissipation_profile_invariance() {
        let m = CoefficientModel::power_law_pt(1.0, 1.0, 1.0, 0.5).unwrap();
        let e = equilibrium_monomer_density(&m, 1.0, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = random_state(&mut rng, 40);
            let direct = lower_dissipation(&s, &m);
            for z in [e.z_bar, 0.5] {
                assert_relative_eq!(lower_dissipation_at(&s, &m, z).unwrap(), direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn dissipation_dominates_lower_termwise() {
        let m = CoefficientModel::power_law_pt(0.5, 1.0, 1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let s = random_state(&mut rng, 30);
            let d = dissipation_terms(&s, &m).unwrap();
            let dl = lower_dissipation_terms(&s, &m);
            for (a, b) in d.iter().zip(&dl) {
                assert!(a + 1e-15 * a.abs() >= *b, "{a} < {b}");
            }
        }
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.5, 0.5], &[3.0, 3.0]).unwrap(), 0.0);
        assert_relative_eq!(entropy(&[0.5, 0.5], &[2.0, 0.0]).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert!(entropy(&[0.5, 0.6], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn psi_examples() {
        assert_relative_eq!(psi(1.0), 2f64.ln(), epsilon = 1e-16);
        assert_relative_eq!(psi_inv(psi(3.0)).unwrap(), 3.0, epsilon = 1e-10);
        for t in [1.5, 10.0, 1e6] {
            let y = psi_inv(t).unwrap();
            assert!(t / (3.0 * t.ln()) <= y && y <= 2.0 * t / t.ln());
        }
        // small arguments, where the solution exceeds t
        for t in [1e-8, 0.3, 1.0, 1.49] {
            let y = psi_inv(t).unwrap();
            assert!((psi(y) - t).abs() <= 1e-12 * t.max(1.0));
        }
        assert!(psi_inv(0.0).is_err());
    }

    #[test]
    fn orlicz_tail_indicator() {
        // oracle: the indicator of a set of mass m has norm 1 / Psi^{-1}(1/m)
        let m_t = 1.0 / (2.0 * 3f64.ln());
        let mu = [1.0 - m_t, m_t];
        let f = [0.0, 1.0];
        assert_relative_eq!(orlicz_norm(&mu, &f, Young::Psi).unwrap(), 0.5, max_relative = 1e-12);
        assert_eq!(orlicz_norm(&mu, &[0.0, 0.0], Young::Psi).unwrap(), 0.0);
    }

    #[test]
    fn translate_entropy_constant_is_zero() {
        let mu = [0.25; 4];
        let l = sup_translate_entropy(&mu, &[2.0; 4], None).unwrap();
        assert!(l.value.abs() < 1e-14);
    }

    fn prob_vec(raw: &[f64]) -> Vec<f64> {
        let s: f64 = raw.iter().sum();
        raw.iter().map(|v| v / s).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn entropy_homogeneous(raw in proptest::collection::vec(0.01f64..1.0, 2..12), scale in 0.01f64..50.0, seed in 0u64..1000) {
            let mu = prob_vec(&raw);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g: Vec<f64> = mu.iter().map(|_| rng.gen_range(0.0..3.0)).collect();
            let sg: Vec<f64> = g.iter().map(|v| v * scale).collect();
            let (e1, e2) = (entropy(&mu, &g).unwrap(), entropy(&mu, &sg).unwrap());
            prop_assert!(e1 >= 0.0);
            prop_assert!((e2 - scale * e1).abs() <= 1e-10 * (1.0 + scale * e1));
        }

        #[test]
        fn squares_in_psi_are_phi_squared(raw in proptest::collection::vec(0.01f64..1.0, 2..10), seed in 0u64..1000) {
            let mu = prob_vec(&raw);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f: Vec<f64> = mu.iter().map(|_| rng.gen_range(-5.0..5.0)).collect();
            let f2: Vec<f64> = f.iter().map(|v| v * v).collect();
            let a = orlicz_norm(&mu, &f2, Young::Psi).unwrap();
            let b = orlicz_norm(&mu, &f, Young::Phi).unwrap();
            prop_assert!((a - b * b).abs() <= 1e-9 * a);
        }

        #[test]
        fn norm_chain(raw in proptest::collection::vec(0.01f64..1.0, 2..10), seed in 0u64..1000) {
            let mu = prob_vec(&raw);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f: Vec<f64> = mu.iter().map(|_| rng.gen_range(-5.0..5.0)).collect();
            let l1 = lp_norm(&mu, &f, 1.0);
            let l2 = lp_norm(&mu, &f, 2.0);
            let lphi = orlicz_norm(&mu, &f, Young::Phi).unwrap();
            prop_assert!(l1 <= l2 * (1.0 + 1e-12));
            prop_assert!(l2 <= 1.5f64.sqrt() * lphi * (1.0 + 1e-9));
        }

        #[test]
        fn translate_entropy_bracket(raw in proptest::collection::vec(0.01f64..1.0, 2..10), seed in 0u64..1000) {
            let mu = prob_vec(&raw);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f: Vec<f64> = mu.iter().map(|_| rng.gen_range(-3.0..3.0)).collect();
            let f2: Vec<f64> = f.iter().map(|v| v * v).collect();
            let ent = entropy(&mu, &f2).unwrap();
            let l = sup_translate_entropy(&mu, &f, None).unwrap().value;
            let second: f64 = mu.iter().zip(&f2).map(|(m, v)| m * v).sum();
            prop_assert!(ent <= l * (1.0 + 1e-12) + 1e-15);
            prop_assert!(l <= ent + 2.0 * second + 1e-12);
        }

        #[test]
        fn relative_free_energy_minimal_at_equilibrium(seed in 0u64..1000) {
            let m = CoefficientModel::power_law_pt(1.0, 1.0, 1.0, 0.5).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw = random_state(&mut rng, 40);
            let s = ClusterState::new(raw.c().iter().map(|v| v / raw.mass()).collect()).unwrap();
            let e = equilibrium_monomer_density(&m, s.mass(), 1e-13).unwrap();
            let h = relative_free_energy(&s, &m, e.z_bar).unwrap();
            for z in [e.z_bar / 2.0, (e.z_bar + 1.0) / 2.0] {
                prop_assert!(h <= relative_free_energy(&s, &m, z).unwrap() + 1e-12);
            }
            // Csiszar-Kullback
            let l1 = l1_distance(&s, &m, e.z_bar).unwrap();
            prop_assert!(l1 <= (2.0 * s.mass() * h).sqrt() * (1.0 + 1e-9) + 1e-12);
        }

        #[test]
        fn mass_cache_matches(c in proptest::collection::vec(0.0f64..10.0, 1..50)) {
            let s = ClusterState::new(c.clone()).unwrap();
            let direct: f64 = c.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v).sum();
            prop_assert!((s.mass() - direct).abs() <= 1e-14 * direct.max(1e-300) * 50.0);
        }
    }
}
