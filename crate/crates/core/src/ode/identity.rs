//! Numerical check of the generating-function identity for the truncated
//! explored-fraction system.
//!
//! With `E(t) = sum_i i zeta_i(t)` taken from the untruncated solution, the
//! truncated system is linear and its generating function equals
//! `f_Delta((s sqrt(E(t)) - Z(t)) / sqrt(E(0)))`, where `f_Delta` is the
//! initial law cut at degree `Delta` and `Z' = E' / (2 sqrt(E)) + 1 / sqrt(E)`.

use serde::{Deserialize, Serialize};

use super::solve::rk4_step;
use super::TruncationSpec;
use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::genfun::GenFun;

const S_GRID: usize = 33;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub t: f64,
    pub dt: f64,
    pub steps: usize,
    pub delta_cap: usize,
    /// `sup_s` of the identity residual on 33 points of `[0, 1]`.
    pub residual: f64,
    /// `Z(t)` from quadrature alongside the system.
    pub z_quadrature: f64,
    /// `Z(t)` from the explicit solution.
    pub z_closed_form: f64,
}

/// `E(t)` and `E'(t)` of the untruncated solution.
fn mean_and_slope(gf: &GenFun, t: f64) -> Result<(f64, f64)> {
    let u = gf.inverse(1.0 - t)?;
    let m = gf.mean();
    let f1 = gf.deriv(1, u);
    Ok((f1 * f1 / m, -2.0 * gf.deriv(2, u) / m))
}

/// Integrates the truncated linear system and `Z` to time `t` with RK4 steps
/// of at most `dt`, then measures the identity residual.
pub fn verify_truncated_identity(
    initial: &DegreeDistribution,
    trunc: &TruncationSpec,
    t: f64,
    dt: f64,
) -> Result<IdentityReport> {
    let gf = GenFun::new(initial)?;
    let alpha_c = gf.alpha_c()?;
    if !(0.0..alpha_c).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, {alpha_c})")));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dt = {dt} must be positive")));
    }
    let f_delta = trunc.initial_state(initial);
    let len = f_delta.len();
    let rhs = |time: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (e, e_slope) = mean_and_slope(&gf, time)?;
        let c = (1.0 + 0.5 * e_slope) / e;
        let mut out: Vec<f64> = (0..len)
            .map(|i| {
                let fi = i as f64;
                let next = if i + 1 < len {
                    (fi + 1.0) * y[i + 1]
                } else {
                    0.0
                };
                -fi * y[i] / e + c * (fi * y[i] - next)
            })
            .collect();
        let root = e.sqrt();
        out.push(e_slope / (2.0 * root) + 1.0 / root);
        Ok(out)
    };
    let steps = if t == 0.0 {
        0
    } else {
        (t / dt).ceil() as usize
    };
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };
    let mut y = f_delta.clone();
    y.push(0.0);
    for k in 0..steps {
        y = rk4_step(&rhs, k as f64 * h, &y, h)?;
    }
    let z = y[len];
    let (e, _) = mean_and_slope(&gf, t)?;
    let e0 = gf.mean();
    let poly = |coeffs: &[f64], x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let residual = (0..S_GRID)
        .map(|j| {
            let s = j as f64 / (S_GRID - 1) as f64;
            let lhs = poly(&y[..len], s);
            let rhs = poly(&f_delta, (s * e.sqrt() - z) / e0.sqrt());
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max);
    let u = gf.inverse(1.0 - t)?;
    let b = gf.deriv(1, u) / e0;
    Ok(IdentityReport {
        t,
        dt,
        steps,
        delta_cap: trunc.delta_cap,
        residual,
        z_quadrature: z,
        z_closed_form: e0.sqrt() * (b - u),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_at_time_zero() {
        let dist = DegreeDistribution::poisson(3.0).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-3).unwrap();
        let report = verify_truncated_identity(&dist, &trunc, 0.0, 1e-3).unwrap();
        assert!(report.residual < 1e-12);
        assert_eq!(report.steps, 0);
    }

    #[test]
    fn poisson_residual_small() {
        let dist = DegreeDistribution::poisson(3.0).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-3).unwrap();
        let report = verify_truncated_identity(&dist, &trunc, 0.3, 1e-3).unwrap();
        assert!(report.residual < 1e-6, "{report:?}");
        assert!((report.z_quadrature - report.z_closed_form).abs() < 1e-9);
    }

    #[test]
    fn fourth_order_convergence() {
        let dist = DegreeDistribution::poisson(3.0).unwrap();
        let trunc = TruncationSpec::new(&dist, 0.1).unwrap();
        let r: Vec<f64> = [0.02, 0.01, 0.005]
            .iter()
            .map(|&dt| {
                verify_truncated_identity(&dist, &trunc, 0.3, dt)
                    .unwrap()
                    .residual
            })
            .collect();
        for w in r.windows(2) {
            let ratio = w[0] / w[1];
            assert!((12.0..20.0).contains(&ratio), "{r:?}");
        }
    }

    #[test]
    fn rejects_times_past_criticality() {
        let dist = DegreeDistribution::poisson(2.0).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-2).unwrap();
        assert!(verify_truncated_identity(&dist, &trunc, 0.6, 1e-3).is_err());
    }
}
