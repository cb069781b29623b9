//! Generating-function numerics.
//!
//! Everything here is expressed through the probability generating function
//! `f` of a degree law and a handful of scalar root solves. Most quantities
//! are parametrized by `u = f^{-1}(1 - alpha)` internally because the
//! defining equations are monotone in `u`.

pub mod closed_form;
mod profile;

pub use profile::{limit_profile, ProfileCurve, ProfileSummary};

use crate::degree::{DegreeDistribution, Family};
use crate::error::{Error, Result};

/// Slack allowed when a caller passes a parameter sitting on a domain edge.
const EDGE_SLACK: f64 = 1e-12;

/// How `f` and its derivatives are evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Exact formulas for poisson, dirac, binomial and geometric laws.
    ClosedForm(Family),
    /// Horner evaluation of the truncated mass vector.
    Series,
}

/// Quantities that only exist for supercritical laws.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Critical {
    rho_pi: f64,
    xi: f64,
    u_c: f64,
    alpha_c: f64,
}

/// Generating function of a degree law with its derived constants cached.
#[derive(Clone, Debug)]
pub struct GenFun {
    masses: Vec<f64>,
    method: Method,
    mean: f64,
    second_factorial: f64,
    critical: Option<Critical>,
}

impl GenFun {
    /// Uses closed forms where the family has them, the truncated series otherwise.
    pub fn new(dist: &DegreeDistribution) -> Result<Self> {
        let method = match dist.family() {
            Some(Family::PowerLaw { .. }) | None => Method::Series,
            Some(family) => Method::ClosedForm(family),
        };
        Self::build(dist.masses().to_vec(), method)
    }

    /// Forces the generic truncated-series path, ignoring any family tag.
    pub fn series(dist: &DegreeDistribution) -> Result<Self> {
        Self::build(dist.masses().to_vec(), Method::Series)
    }

    fn build(masses: Vec<f64>, method: Method) -> Result<Self> {
        let mut gf = GenFun {
            masses,
            method,
            mean: 0.0,
            second_factorial: 0.0,
            critical: None,
        };
        gf.mean = gf.deriv(1, 1.0);
        gf.second_factorial = gf.deriv(2, 1.0);
        if !(gf.mean > 0.0) {
            return Err(Error::InvalidDistribution(
                "mean degree is zero; the size-biased law does not exist".into(),
            ));
        }
        if gf.second_factorial / gf.mean > 1.0 + EDGE_SLACK {
            gf.critical = Some(gf.solve_critical()?);
        }
        Ok(gf)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `f'(1)`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `f''(1)`.
    pub fn second_factorial_moment(&self) -> f64 {
        self.second_factorial
    }

    /// `f''(1) / f'(1)`, the mean of the size-biased law minus one.
    pub fn size_biased_mean(&self) -> f64 {
        self.second_factorial / self.mean
    }

    pub fn is_supercritical(&self) -> bool {
        self.critical.is_some()
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.deriv(0, s)
    }

    /// `f^{(n)}(s)`.
    pub fn deriv(&self, n: u32, s: f64) -> f64 {
        match self.method {
            Method::ClosedForm(family) => closed_deriv(family, n, s),
            Method::Series => series_deriv(&self.masses, n, s),
        }
    }

    /// `f'(s) / f'(1)`.
    pub fn size_biased(&self, s: f64) -> f64 {
        self.deriv(1, s) / self.mean
    }

    /// `f^{-1}(y)` for `y` in `[f(0), 1]`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let lo_val = self.eval(0.0);
        if !(y >= lo_val - EDGE_SLACK && y <= 1.0 + EDGE_SLACK) {
            return Err(Error::Domain(format!("f^-1({y}) outside [{lo_val}, 1]")));
        }
        if y >= 1.0 {
            return Ok(1.0);
        }
        if y <= lo_val {
            return Ok(0.0);
        }
        if let Method::ClosedForm(family) = self.method {
            if let Some(u) = closed_inverse(family, y) {
                return Ok(u.clamp(0.0, 1.0));
            }
        }
        Ok(bisect(0.0, 1.0, |s| self.eval(s) < y))
    }

    fn critical(&self) -> Result<&Critical> {
        self.critical.as_ref().ok_or(Error::Subcritical {
            size_biased_mean: self.size_biased_mean(),
        })
    }

    fn solve_critical(&self) -> Result<Critical> {
        let rho_pi =
            survival_probability(|x| self.size_biased(x), |x| self.deriv(2, x) / self.mean);
        let xi = 1.0 - self.eval(1.0 - rho_pi);
        // f'' is increasing, so f''(u)/f'(1) = 1 has a single root in u.
        let u_c = bisect(0.0, 1.0, |u| self.deriv(2, u) < self.mean);
        let alpha_c = 1.0 - self.eval(u_c);
        Ok(Critical {
            rho_pi,
            xi,
            u_c,
            alpha_c,
        })
    }

    /// Survival probability of the size-biased Galton-Watson tree.
    pub fn solve_rho(&self) -> Result<f64> {
        Ok(self.critical()?.rho_pi)
    }

    /// Asymptotic fraction of vertices in the giant component.
    pub fn xi(&self) -> Result<f64> {
        Ok(self.critical()?.xi)
    }

    /// Explored fraction at which the unexplored graph becomes critical.
    pub fn alpha_c(&self) -> Result<f64> {
        Ok(self.critical()?.alpha_c)
    }

    /// `f^{-1}(1 - alpha_c)`.
    pub fn u_c(&self) -> Result<f64> {
        Ok(self.critical()?.u_c)
    }

    /// Returns `(u, b)` with `u = f^{-1}(1 - alpha)` and `b = f'(u)/f'(1)`.
    fn affine_at(&self, alpha: f64) -> Result<(f64, f64)> {
        let alpha_c = self.alpha_c()?;
        if !(alpha >= -EDGE_SLACK && alpha <= alpha_c + EDGE_SLACK) {
            return Err(Error::Domain(format!(
                "alpha = {alpha} outside [0, {alpha_c}]"
            )));
        }
        let u = self.inverse(1.0 - alpha.max(0.0))?;
        Ok((u, self.deriv(1, u) / self.mean))
    }

    fn inner_argument(u: f64, b: f64, s: f64) -> Result<f64> {
        if !(-EDGE_SLACK..=1.0 + EDGE_SLACK).contains(&s) {
            return Err(Error::Domain(format!("s = {s} outside [0, 1]")));
        }
        let arg = u - (1.0 - s) * b;
        if arg < -EDGE_SLACK {
            return Err(Error::Domain(format!("inner argument {arg} is negative")));
        }
        Ok(arg.clamp(0.0, 1.0))
    }

    /// Generating function of the unexplored-degree law after exploring `alpha`.
    pub fn g_alpha(&self, alpha: f64, s: f64) -> Result<f64> {
        let (u, b) = self.affine_at(alpha)?;
        let arg = Self::inner_argument(u, b, s)?;
        Ok(self.eval(arg) / (1.0 - alpha))
    }

    /// Size-biased version of [`GenFun::g_alpha`].
    pub fn g_hat_alpha(&self, alpha: f64, s: f64) -> Result<f64> {
        let (u, b) = self.affine_at(alpha)?;
        let arg = Self::inner_argument(u, b, s)?;
        Ok(self.deriv(1, arg) / self.deriv(1, u))
    }

    /// `d/ds g_hat(alpha, s)` at `s = 1`, i.e. `f''(u)/f'(1)`.
    pub fn g_hat_alpha_slope(&self, alpha: f64) -> Result<f64> {
        let (u, _) = self.affine_at(alpha)?;
        Ok(self.deriv(2, u) / self.mean)
    }

    /// Solves `1 - rho = g_hat(alpha, 1 - rho)` for `alpha` in `[0, alpha_c]`.
    pub fn alpha_of_rho(&self, rho: f64) -> Result<f64> {
        let crit = *self.critical()?;
        if !(rho >= -EDGE_SLACK && rho <= crit.rho_pi + EDGE_SLACK) {
            return Err(Error::Domain(format!(
                "rho = {rho} outside [0, {}]",
                crit.rho_pi
            )));
        }
        if rho <= 0.0 {
            return Ok(crit.alpha_c);
        }
        let rho = rho.min(crit.rho_pi);
        let excess = |u: f64| {
            let d1 = self.deriv(1, u);
            let arg = (u - rho * d1 / self.mean).max(0.0);
            self.deriv(1, arg) / d1 - (1.0 - rho)
        };
        let at_crit = excess(crit.u_c);
        let at_one = excess(1.0);
        if at_crit < -1e-12 || at_one > 1e-12 {
            return Err(Error::NoRoot(format!(
                "alpha(rho = {rho}) not bracketed: {at_crit} at alpha_c, {at_one} at 0"
            )));
        }
        let u = bisect(crit.u_c, 1.0, |u| excess(u) > 0.0);
        Ok((1.0 - self.eval(u)).clamp(0.0, crit.alpha_c))
    }

    /// Coefficients `0..=max_degree` of `g(alpha, .)`, the law `pi_alpha`.
    pub fn alpha_law(&self, alpha: f64, max_degree: usize) -> Result<Vec<f64>> {
        let (u, b) = self.affine_at(alpha)?;
        let a = (u - b).max(0.0);
        let scale = 1.0 / (1.0 - alpha);
        Ok(affine_coefficients(&self.masses, a, b, max_degree)
            .into_iter()
            .map(|c| c * scale)
            .collect())
    }

    /// `n`-th factorial moment of `pi_alpha`: `b^n f^{(n)}(u) / (1 - alpha)`.
    pub fn heavy_tail_factorial_moment(&self, alpha: f64, n: u32) -> Result<f64> {
        let (u, b) = self.affine_at(alpha)?;
        Ok(b.powi(n as i32) * self.deriv(n, u) / (1.0 - alpha))
    }
}

/// Coefficients in `s` of `sum_k masses[k] (a + b s)^k`, truncated at `max_degree`.
pub fn affine_coefficients(masses: &[f64], a: f64, b: f64, max_degree: usize) -> Vec<f64> {
    let top = masses.len().saturating_sub(1);
    let mut ln_fact = vec![0.0f64; top + 1];
    for k in 1..=top {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let (ln_a, ln_b) = (a.ln(), b.ln());
    (0..=max_degree)
        .map(|i| {
            if i > top {
                return 0.0;
            }
            if b == 0.0 {
                return if i == 0 {
                    series_deriv(masses, 0, a)
                } else {
                    0.0
                };
            }
            if a == 0.0 {
                return masses[i] * b.powi(i as i32);
            }
            masses[i..]
                .iter()
                .enumerate()
                .filter(|(_, m)| **m > 0.0)
                .map(|(j, m)| {
                    let k = i + j;
                    let ln_choose = ln_fact[k] - ln_fact[i] - ln_fact[j];
                    m * (ln_choose + j as f64 * ln_a + i as f64 * ln_b).exp()
                })
                .sum()
        })
        .collect()
}

/// Largest `rho` in `[0, 1]` with `1 - rho = fhat(1 - rho)` for a convex PGF `fhat`.
///
/// Returns 0 when `fhat'(1) <= 1`.
pub fn survival_probability(fhat: impl Fn(f64) -> f64, fhat_prime: impl Fn(f64) -> f64) -> f64 {
    if fhat_prime(1.0) <= 1.0 {
        return 0.0;
    }
    if fhat(0.0) <= 0.0 {
        return 1.0;
    }
    // fhat(x) - x is convex, positive at 0 and negative just left of 1;
    // its minimum sits where fhat' = 1.
    let x_min = bisect(0.0, 1.0, |x| fhat_prime(x) < 1.0);
    let x = bisect(0.0, x_min, |x| fhat(x) > x);
    1.0 - x
}

/// Survival probability of the size-biased law of an unnormalized density vector,
/// with the slope of the size-biased PGF at the fixed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalSolve {
    pub rho: f64,
    /// `ghat'(1)`.
    pub slope_at_one: f64,
    /// `ghat'(1 - rho)`.
    pub slope_at_root: f64,
}

pub fn survival_of_densities(z: &[f64]) -> Option<SurvivalSolve> {
    let total: f64 = z.iter().enumerate().map(|(i, zi)| i as f64 * zi).sum();
    if !(total > 0.0) {
        return None;
    }
    let fhat = |x: f64| series_deriv(z, 1, x) / total;
    let fhat_prime = |x: f64| series_deriv(z, 2, x) / total;
    let slope_at_one = fhat_prime(1.0);
    let rho = survival_probability(fhat, fhat_prime);
    Some(SurvivalSolve {
        rho,
        slope_at_one,
        slope_at_root: fhat_prime(1.0 - rho),
    })
}

/// Bisection on `[lo, hi]` where `below(x)` holds left of the boundary.
/// Runs until the bracket stops shrinking in floating point.
fn bisect(mut lo: f64, mut hi: f64, below: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `sum_{k >= n} k (k-1) ... (k-n+1) m_k s^{k-n}` by Horner.
pub(crate) fn series_deriv(masses: &[f64], n: u32, s: f64) -> f64 {
    let n = n as usize;
    if masses.len() <= n {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in (n..masses.len()).rev() {
        let mut falling = 1.0;
        for j in 0..n {
            falling *= (k - j) as f64;
        }
        acc = acc * s + falling * masses[k];
    }
    acc
}

fn falling_factorial(k: u32, n: u32) -> f64 {
    (0..n).map(|j| (k as f64) - j as f64).product()
}

fn closed_deriv(family: Family, n: u32, s: f64) -> f64 {
    match family {
        Family::Poisson { c } => c.powi(n as i32) * (c * (s - 1.0)).exp(),
        Family::Dirac { d } => {
            if n > d {
                0.0
            } else {
                falling_factorial(d, n) * s.powi((d - n) as i32)
            }
        }
        Family::Binomial { d, p } => {
            if n > d {
                0.0
            } else {
                falling_factorial(d, n) * p.powi(n as i32) * (1.0 - p + p * s).powi((d - n) as i32)
            }
        }
        Family::Geometric { p } => {
            let q = 1.0 - p;
            let n_fact: f64 = (1..=n).map(|j| j as f64).product();
            n_fact * p * q.powi(n as i32) / (1.0 - q * s).powi(n as i32 + 1)
        }
        Family::PowerLaw { .. } => unreachable!("power laws are evaluated as series"),
    }
}

fn closed_inverse(family: Family, y: f64) -> Option<f64> {
    match family {
        Family::Poisson { c } => Some(1.0 + y.ln() / c),
        Family::Dirac { d } if d > 0 => Some(y.powf(1.0 / d as f64)),
        Family::Binomial { d, p } if d > 0 && p > 0.0 => {
            Some((y.powf(1.0 / d as f64) - (1.0 - p)) / p)
        }
        Family::Geometric { p } if p < 1.0 => Some((1.0 - p / y) / (1.0 - p)),
        _ => None,
    }
}
