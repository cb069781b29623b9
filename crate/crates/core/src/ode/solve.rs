//! Classical RK4 integration of the fluid systems.

use std::io::Write;

use super::{drift_all, drift_prime, moments, state_survival, TruncationSpec};
use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::genfun::GenFun;

/// Largest accepted step.
const MAX_DT: f64 = 1e-3;
const MAX_HALVINGS: u32 = 10;
/// Negative densities above this are rounding noise and get clamped to zero.
const CLAMP: f64 = 1e-9;
/// Beyond this a stage has genuinely left the invariant region.
const STAGE_SLACK: f64 = 1e-6;
/// Integration stops when the fixed-point slope gets this close to one.
const CRITICAL_SLOPE_GAP: f64 = 1e-6;

/// Sampled solution of one of the fluid systems.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// Densities `z_0..z_Delta` at each time.
    pub states: Vec<Vec<f64>>,
    /// Ladder-time companion `z(t)`; empty for the explored-fraction system.
    pub companion: Vec<f64>,
    /// Survival probability of each state.
    pub rho: Vec<f64>,
    /// True when integration stopped at the edge of the supercritical region
    /// before reaching the requested end time.
    pub reached_max: bool,
}

impl Trajectory {
    pub fn t_last(&self) -> f64 {
        *self.t.last().expect("trajectory has its initial point")
    }

    /// Linear interpolation of the densities at time `t` inside the trajectory.
    pub fn densities_at(&self, t: f64) -> Option<Vec<f64>> {
        let (k, w) = self.bracket(t)?;
        if w == 0.0 {
            return Some(self.states[k].clone());
        }
        Some(
            self.states[k]
                .iter()
                .zip(&self.states[k + 1])
                .map(|(a, b)| a + w * (b - a))
                .collect(),
        )
    }

    /// Linear interpolation of the companion `z(t)`.
    pub fn companion_at(&self, t: f64) -> Option<f64> {
        if self.companion.is_empty() {
            return None;
        }
        let (k, w) = self.bracket(t)?;
        if w == 0.0 {
            return Some(self.companion[k]);
        }
        Some(self.companion[k] + w * (self.companion[k + 1] - self.companion[k]))
    }

    fn bracket(&self, t: f64) -> Option<(usize, f64)> {
        if !(t >= 0.0 && t <= self.t_last()) {
            return None;
        }
        let k = self.t.partition_point(|&x| x <= t).saturating_sub(1);
        if k + 1 >= self.t.len() {
            return Some((k, 0.0));
        }
        Some((k, (t - self.t[k]) / (self.t[k + 1] - self.t[k])))
    }

    /// Writes `t,z,z_0..z_Delta,rho`; `z` is empty for the explored-fraction system.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let width = self.states.first().map_or(0, Vec::len);
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "z".to_string()];
        header.extend((0..width).map(|i| format!("z_{i}")));
        header.push("rho".into());
        wtr.write_record(&header)?;
        for k in 0..self.t.len() {
            let mut row = vec![self.t[k].to_string()];
            row.push(
                self.companion
                    .get(k)
                    .map_or(String::new(), |c| c.to_string()),
            );
            row.extend(self.states[k].iter().map(|x| x.to_string()));
            row.push(self.rho[k].to_string());
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// One classical RK4 step.
pub(crate) fn rk4_step(
    f: &impl Fn(f64, &[f64]) -> Result<Vec<f64>>,
    t: f64,
    y: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let shifted =
        |k: &[f64], c: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &shifted(&k1, 0.5 * h))?;
    let k3 = f(t + 0.5 * h, &shifted(&k2, 0.5 * h))?;
    let k4 = f(t + h, &shifted(&k3, h))?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::InvalidConfig(format!(
            "dt = {dt} must lie in (0, {MAX_DT}]"
        )));
    }
    Ok(())
}

/// Whether a density vector is still inside the invariant region.
fn admissible(z: &[f64]) -> bool {
    z.iter().all(|&x| x >= -STAGE_SLACK) && z.iter().sum::<f64>() <= 1.0 + STAGE_SLACK
}

/// Accepted steps may only carry rounding-level negativity, which is zeroed.
fn clamp_step(z: &mut [f64]) -> bool {
    if z.iter().any(|&x| x < -CLAMP) || z.iter().sum::<f64>() > 1.0 + STAGE_SLACK {
        return false;
    }
    z.iter_mut().filter(|x| **x < 0.0).for_each(|x| *x = 0.0);
    true
}

/// Integrates `y' = rhs(y)` with step halving; `density_len` leading
/// components are densities. `accept` maps an accepted state to its `rho`
/// and whether the run has reached criticality; a subcritical state ends the
/// run without being kept.
fn integrate(
    y0: Vec<f64>,
    density_len: usize,
    t_end: f64,
    dt: f64,
    rhs: impl Fn(f64, &[f64]) -> Result<Vec<f64>>,
    accept: impl Fn(&[f64]) -> Result<(f64, bool)>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>, bool)> {
    let (rho0, _) = accept(&y0[..density_len])?;
    let mut ts = vec![0.0];
    let mut ys = vec![y0];
    let mut rhos = vec![rho0];
    let mut t = 0.0;
    let mut reached_max = false;
    let guarded = |t: f64, y: &[f64]| {
        if !admissible(&y[..density_len]) {
            return Err(Error::StepSize { t, halvings: 0 });
        }
        rhs(t, y)
    };
    'outer: while t < t_end - 1e-12 {
        let y = ys.last().expect("non-empty").clone();
        let mut h = dt.min(t_end - t);
        let mut halvings = 0;
        let next = loop {
            match rk4_step(&guarded, t, &y, h) {
                Ok(mut next) => {
                    if clamp_step(&mut next[..density_len]) {
                        break next;
                    }
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(Error::StepSize { t, halvings });
                    }
                    h *= 0.5;
                }
                Err(Error::SubcriticalState { .. }) => {
                    reached_max = true;
                    break 'outer;
                }
                Err(Error::StepSize { .. }) => {
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(Error::StepSize { t, halvings });
                    }
                    h *= 0.5;
                }
                Err(e) => return Err(e),
            }
        };
        match accept(&next[..density_len]) {
            Ok((rho, at_edge)) => {
                t += h;
                ts.push(t);
                ys.push(next);
                rhos.push(rho);
                if at_edge {
                    reached_max = true;
                    break;
                }
            }
            Err(Error::SubcriticalState { .. }) => {
                reached_max = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((ts, ys, rhos, reached_max))
}

/// Ladder-time system with the companion `z' = (2 - rho)/rho`, `z(0) = 0`.
pub fn solve_system(
    initial: &DegreeDistribution,
    trunc: &TruncationSpec,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    check_dt(dt)?;
    let mut y0 = trunc.initial_state(initial);
    let len = y0.len();
    y0.push(0.0);
    let rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (mut d, dt_drift) = drift_all(&y[..len])?;
        d.push(dt_drift);
        Ok(d)
    };
    let accept = |z: &[f64]| -> Result<(f64, bool)> {
        let solve = state_survival(z)?;
        Ok((solve.rho, solve.slope_at_root > 1.0 - CRITICAL_SLOPE_GAP))
    };
    let (t, ys, rho, reached_max) = integrate(y0, len, t_end, dt, rhs, accept)?;
    let companion = ys.iter().map(|y| y[len]).collect();
    let states = ys.into_iter().map(|mut y| {
        y.truncate(len);
        y
    });
    Ok(Trajectory {
        t,
        states: states.collect(),
        companion,
        rho,
        reached_max,
    })
}

/// Explored-fraction system; valid while the state stays supercritical.
pub fn solve_system_prime(
    initial: &DegreeDistribution,
    trunc: &TruncationSpec,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    check_dt(dt)?;
    let y0 = trunc.initial_state(initial);
    let len = y0.len();
    let rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (m1, m2) = moments(y);
        if !(m1 > 0.0) || m2 / m1 <= 1.0 {
            return Err(Error::SubcriticalState { rho: 0.0 });
        }
        Ok(drift_prime(y))
    };
    let accept = |z: &[f64]| -> Result<(f64, bool)> {
        let (m1, m2) = moments(z);
        if !(m1 > 0.0) || m2 / m1 <= 1.0 + CRITICAL_SLOPE_GAP {
            return Err(Error::SubcriticalState { rho: 0.0 });
        }
        let rho = crate::genfun::survival_of_densities(z).map_or(0.0, |s| s.rho);
        Ok((rho, false))
    };
    let (t, states, rho, reached_max) = integrate(y0, len, t_end, dt, rhs, accept)?;
    Ok(Trajectory {
        t,
        states,
        companion: Vec::new(),
        rho,
        reached_max,
    })
}

/// Coefficients `0..=max_degree` of the explicit explored-fraction solution
/// at time `t`, which equal `(1 - t)` times the law `pi_t`.
pub fn closed_form_coeffs(gf: &GenFun, t: f64, max_degree: usize) -> Result<Vec<f64>> {
    let law = gf.alpha_law(t, max_degree)?;
    Ok(law.into_iter().map(|c| c * (1.0 - t)).collect())
}

/// Map from ladder-index time to explored fraction `(t + z(t)) / 2`.
#[derive(Clone, Debug)]
pub struct TimeChange {
    /// Ladder-index times.
    pub t: Vec<f64>,
    /// Explored fraction at each time; strictly increasing.
    pub explored: Vec<f64>,
    trajectory: Trajectory,
}

pub fn time_change(trajectory: &Trajectory) -> Result<TimeChange> {
    if trajectory.companion.len() != trajectory.t.len() {
        return Err(Error::InvalidConfig(
            "time change needs the ladder-time companion".into(),
        ));
    }
    let explored: Vec<f64> = trajectory
        .t
        .iter()
        .zip(&trajectory.companion)
        .map(|(t, z)| 0.5 * (t + z))
        .collect();
    if explored.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "explored fraction is not increasing".into(),
        ));
    }
    Ok(TimeChange {
        t: trajectory.t.clone(),
        explored,
        trajectory: trajectory.clone(),
    })
}

impl TimeChange {
    pub fn max_explored(&self) -> f64 {
        *self.explored.last().expect("non-empty")
    }

    /// Ladder-index time at which the explored fraction reaches `alpha`.
    pub fn inverse(&self, alpha: f64) -> Option<f64> {
        if !(alpha >= 0.0 && alpha <= self.max_explored()) {
            return None;
        }
        let k = self
            .explored
            .partition_point(|&x| x <= alpha)
            .saturating_sub(1);
        if k + 1 >= self.t.len() {
            return Some(self.t[k]);
        }
        let w = (alpha - self.explored[k]) / (self.explored[k + 1] - self.explored[k]);
        Some(self.t[k] + w * (self.t[k + 1] - self.t[k]))
    }

    /// Densities `z_i` at the ladder time where the explored fraction is `alpha`.
    pub fn densities_at(&self, alpha: f64) -> Option<Vec<f64>> {
        self.trajectory.densities_at(self.inverse(alpha)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_is_fourth_order_on_exponential() {
        let f = |_t: f64, y: &[f64]| -> Result<Vec<f64>> { Ok(vec![-y[0]]) };
        let err = |h: f64| {
            let mut y = vec![1.0];
            let n = (1.0 / h).round() as usize;
            for k in 0..n {
                y = rk4_step(&f, k as f64 * h, &y, h).unwrap();
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn rejects_large_steps() {
        let dist = DegreeDistribution::poisson(3.0).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-3).unwrap();
        assert!(solve_system(&dist, &trunc, 0.1, 1e-2).is_err());
    }

    #[test]
    fn prime_system_conserves_mass_and_tracks_closed_form() {
        let dist = DegreeDistribution::poisson(3.0).unwrap();
        let gf = GenFun::new(&dist).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-4).unwrap();
        let traj = solve_system_prime(&dist, &trunc, 0.5, 1e-3).unwrap();
        assert!(!traj.reached_max);
        assert_eq!(traj.states[0], trunc.initial_state(&dist));
        for (t, z) in traj.t.iter().zip(&traj.states) {
            assert!((z.iter().sum::<f64>() - (1.0 - t)).abs() < 1e-8);
        }
        let z = traj.states.last().unwrap();
        let exact = closed_form_coeffs(&gf, traj.t_last(), z.len() - 1).unwrap();
        for (a, b) in z.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn prime_system_stops_at_criticality() {
        let dist = DegreeDistribution::poisson(2.0).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-3).unwrap();
        let traj = solve_system_prime(&dist, &trunc, 0.9, 1e-3).unwrap();
        assert!(traj.reached_max);
        assert!((traj.t_last() - 0.5).abs() < 2e-3, "{}", traj.t_last());
    }

    #[test]
    fn ladder_system_matches_explored_fraction_solution() {
        let dist = DegreeDistribution::poisson(3.0).unwrap();
        let gf = GenFun::new(&dist).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-4).unwrap();
        let traj = solve_system(&dist, &trunc, 1.0, 1e-3).unwrap();
        assert!(traj.reached_max);
        assert_eq!(traj.companion[0], 0.0);
        assert!(traj.companion.windows(2).all(|w| w[1] > w[0]));
        let change = time_change(&traj).unwrap();
        assert_eq!(change.explored[0], 0.0);
        for (k, &t) in traj.t.iter().enumerate() {
            let alpha = change.explored[k];
            let z = &traj.states[k];
            assert!((z.iter().sum::<f64>() - (1.0 - alpha)).abs() < 1e-8);
            if t <= 0.8 * traj.t_last() {
                let exact = closed_form_coeffs(&gf, alpha, z.len() - 1).unwrap();
                let err = z
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-4, "t = {t}: {err}");
            }
        }
        // the ladder horizon approaches the profile peak height
        let h_max = crate::genfun::limit_profile(&gf, 128)
            .unwrap()
            .summary
            .h_max;
        assert!(
            (traj.t_last() - h_max).abs() < 0.02,
            "{} vs {h_max}",
            traj.t_last()
        );
    }

    #[test]
    fn composed_densities_reproduce_the_alpha_law() {
        let dist = DegreeDistribution::poisson(3.0).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-4).unwrap();
        let traj = solve_system(&dist, &trunc, 1.0, 1e-3).unwrap();
        let change = time_change(&traj).unwrap();
        for alpha in [0.0, 0.1, 0.2, 0.3, 0.4] {
            let z = change.densities_at(alpha).unwrap();
            assert!((z.iter().sum::<f64>() - (1.0 - alpha)).abs() < 1e-6);
            for k in 0..=10 {
                let s = k as f64 / 10.0;
                let pgf: f64 = z.iter().rev().fold(0.0, |acc, c| acc * s + c) / (1.0 - alpha);
                let exact = crate::genfun::closed_form::poisson::g(3.0, alpha, s);
                assert!((pgf - exact).abs() < 1e-4, "alpha {alpha} s {s}");
            }
        }
        assert!(change.inverse(change.max_explored() + 0.1).is_none());
    }

    #[test]
    fn regular_closed_form_matches_direct_expansion() {
        let gf = GenFun::new(&DegreeDistribution::dirac(4).unwrap()).unwrap();
        let t: f64 = 0.2;
        // ((1-t)^{1/4} - (1-s)(1-t)^{3/4})^4 = (a + b s)^4
        let b = (1.0 - t).powf(0.75);
        let a = (1.0 - t).powf(0.25) - b;
        let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
        let coeffs = closed_form_coeffs(&gf, t, 4).unwrap();
        for k in 0..=4 {
            let direct = binom[k] * a.powi(4 - k as i32) * b.powi(k as i32);
            assert!((coeffs[k] - direct).abs() < 1e-12, "k = {k}");
        }
        assert!((coeffs.iter().sum::<f64>() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn mean_slope_identity_along_trajectory() {
        let dist = DegreeDistribution::dirac(5).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-4).unwrap();
        let traj = solve_system_prime(&dist, &trunc, 0.5, 1e-3).unwrap();
        let mean = |z: &[f64]| moments(z).0;
        for k in 1..traj.t.len() - 1 {
            let h = traj.t[k + 1] - traj.t[k - 1];
            let slope = (mean(&traj.states[k + 1]) - mean(&traj.states[k - 1])) / h;
            let (m1, m2) = moments(&traj.states[k]);
            assert!((slope + 2.0 * m2 / m1).abs() < 1e-5, "t = {}", traj.t[k]);
        }
    }

    #[test]
    fn trajectory_csv() {
        let dist = DegreeDistribution::dirac(4).unwrap();
        let trunc = TruncationSpec::new(&dist, 1e-2).unwrap();
        let traj = solve_system(&dist, &trunc, 0.01, 1e-3).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,z,z_0,z_1,z_2,z_3,z_4,rho");
        assert_eq!(text.lines().count(), traj.t.len() + 1);
    }
}
