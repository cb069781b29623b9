//! Fluid limits of the exploration along its ladder times.
//!
//! A state is a vector of per-degree sleeping-vertex densities `z_i`
//! (fractions of `N`). [`drift_t`] and [`drift_ni`] are the expected
//! increments of the ladder time and of each density per ladder step;
//! [`solve_system`] integrates them, and [`solve_system_prime`] integrates the
//! same field multiplied by `rho`, which runs in explored-fraction time.

mod identity;
mod solve;

pub use identity::{verify_truncated_identity, IdentityReport};
pub use solve::{
    closed_form_coeffs, solve_system, solve_system_prime, time_change, TimeChange, Trajectory,
};

use serde::{Deserialize, Serialize};

use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::genfun::{survival_of_densities, SurvivalSolve};

/// Below this survival probability the drift is treated as divergent.
pub const MIN_RHO: f64 = 1e-6;

/// Truncation level `Delta(epsilon) = floor(sqrt(E[D^2] / epsilon))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub epsilon: f64,
    pub delta_cap: usize,
}

impl TruncationSpec {
    pub fn new(dist: &DegreeDistribution, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon = {epsilon} must be positive"
            )));
        }
        let delta_cap = (dist.second_moment() / epsilon).sqrt().floor() as usize;
        Ok(Self { epsilon, delta_cap })
    }

    /// Length of the state vector for `dist`: degrees `0..=Delta`, cut further
    /// at the top of the support since densities above it stay zero.
    pub fn state_len(&self, dist: &DegreeDistribution) -> usize {
        (self.delta_cap + 1).min(dist.masses().len())
    }

    /// Initial densities `pi_0, ..., pi_Delta`.
    pub fn initial_state(&self, dist: &DegreeDistribution) -> Vec<f64> {
        dist.masses()[..self.state_len(dist)].to_vec()
    }
}

/// Densities at ladder-index time `t` with their survival probability.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidState {
    pub z: Vec<f64>,
    pub t: f64,
    pub rho: f64,
}

impl FluidState {
    pub fn new(z: Vec<f64>, t: f64) -> Result<Self> {
        let rho = state_survival(&z)?.rho;
        Ok(Self { z, t, rho })
    }

    pub fn drift_t(&self) -> f64 {
        (2.0 - self.rho) / self.rho
    }
}

/// `sum_j j z_j` and `sum_j j (j - 1) z_j`.
fn moments(z: &[f64]) -> (f64, f64) {
    z.iter().enumerate().fold((0.0, 0.0), |(m1, m2), (j, zj)| {
        let j = j as f64;
        (m1 + j * zj, m2 + j * (j - 1.0) * zj)
    })
}

/// Survival probability of the size-biased law of `z`; errors once the state
/// is no longer supercritical or `rho` falls below [`MIN_RHO`].
pub fn state_survival(z: &[f64]) -> Result<SurvivalSolve> {
    let solve = survival_of_densities(z).ok_or(Error::SubcriticalState { rho: 0.0 })?;
    if solve.slope_at_one <= 1.0 || solve.rho < MIN_RHO {
        return Err(Error::SubcriticalState { rho: solve.rho });
    }
    Ok(solve)
}

/// Expected ladder-time increment `(2 - rho) / rho`.
pub fn drift_t(z: &[f64]) -> Result<f64> {
    let rho = state_survival(z)?.rho;
    Ok((2.0 - rho) / rho)
}

/// Expected increment of `z_i` per ladder step, written over `sum_j j z_j`.
pub fn drift_ni(z: &[f64], i: usize) -> Result<f64> {
    let rho = state_survival(z)?.rho;
    Ok(drift_ni_with(z, i, rho))
}

fn drift_ni_with(z: &[f64], i: usize, rho: f64) -> f64 {
    let (m1, m2) = moments(z);
    let zi = z.get(i).copied().unwrap_or(0.0);
    let zn = z.get(i + 1).copied().unwrap_or(0.0);
    let fi = i as f64;
    -(1.0 / rho) * fi * zi / m1
        + (1.0 / rho) * (1.0 - m2 / m1) * (fi * zi / m1 - (fi + 1.0) * zn / m1)
}

/// Same drift written with the size-biased masses `p_hat_{i-1} = i z_i / sum_j j z_j`
/// and `ghat'(1) = sum_j j (j - 1) z_j / sum_j j z_j`.
pub fn drift_ni_size_biased(z: &[f64], i: usize) -> Result<f64> {
    let rho = state_survival(z)?.rho;
    let (m1, _) = moments(z);
    let p_hat = |k: usize| {
        let j = k + 1;
        j as f64 * z.get(j).copied().unwrap_or(0.0) / m1
    };
    let slope: f64 = (1..z.len()).map(|k| k as f64 * p_hat(k)).sum();
    let below = if i == 0 { 0.0 } else { p_hat(i - 1) };
    Ok(-below / rho + (1.0 - slope) * (below - p_hat(i)) / rho)
}

/// Right-hand side of the explored-fraction system, i.e. `rho` times the
/// ladder-time drift. Needs no survival solve.
pub fn drift_prime(z: &[f64]) -> Vec<f64> {
    let (m1, m2) = moments(z);
    let c = 1.0 - m2 / m1;
    (0..z.len())
        .map(|i| {
            let fi = i as f64;
            let zi = z[i];
            let zn = z.get(i + 1).copied().unwrap_or(0.0);
            -fi * zi / m1 + c * (fi * zi - (fi + 1.0) * zn) / m1
        })
        .collect()
}

/// All ladder-time drifts `(f_0, ..., f_Delta)` plus the ladder-time drift.
fn drift_all(z: &[f64]) -> Result<(Vec<f64>, f64)> {
    let rho = state_survival(z)?.rho;
    let mut out = drift_prime(z);
    out.iter_mut().for_each(|x| *x /= rho);
    Ok((out, (2.0 - rho) / rho))
}
