//! Limiting contour profile of the depth-first exploration.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::GenFun;
use crate::error::{Error, Result};

/// Largest acceptable gap between the grid and doubled-grid peak heights.
pub const RICHARDSON_TOLERANCE: f64 = 1e-5;

/// Scalar constants attached to a profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub rho_pi: f64,
    pub xi_pi: f64,
    pub alpha_c: f64,
    pub h_max: f64,
}

/// Parametric up and down branches sampled on an endpoint-clustered `rho` grid,
/// ascending from `rho = 0` (the peak) to `rho = rho_pi`.
#[derive(Clone, Debug)]
pub struct ProfileCurve {
    pub rho: Vec<f64>,
    pub alpha: Vec<f64>,
    pub x_up: Vec<f64>,
    pub y_up: Vec<f64>,
    pub x_down: Vec<f64>,
    pub y_down: Vec<f64>,
    pub summary: ProfileSummary,
    knots_x: Vec<f64>,
    knots_y: Vec<f64>,
}

/// Samples the profile on `grid_size + 1` nodes (`grid_size` even, at least 64).
pub fn limit_profile(gf: &GenFun, grid_size: usize) -> Result<ProfileCurve> {
    if grid_size < 64 || grid_size % 2 == 1 {
        return Err(Error::InvalidConfig(format!(
            "profile grid size {grid_size} must be even and at least 64"
        )));
    }
    let rho_pi = gf.solve_rho()?;
    let xi_pi = gf.xi()?;
    let alpha_c = gf.alpha_c()?;

    // Evaluate alpha on the doubled grid; the even nodes form the requested grid.
    let fine = 2 * grid_size;
    let mut fine_rho = Vec::with_capacity(fine + 1);
    let mut fine_alpha = Vec::with_capacity(fine + 1);
    for j in 0..=fine {
        let rho = if j == fine {
            rho_pi
        } else {
            rho_pi * node(j, fine).0
        };
        fine_rho.push(rho);
        fine_alpha.push(gf.alpha_of_rho(rho)?);
    }
    let integrand = |alpha: &[f64], m: usize| -> Vec<f64> {
        (0..=m).map(|j| alpha[j] * rho_pi * node(j, m).1).collect()
    };
    let step = |m: usize| std::f64::consts::PI / m as f64;
    let fine_cum = cumulative_simpson(&integrand(&fine_alpha, fine), step(fine));

    let rho: Vec<f64> = fine_rho.iter().step_by(2).copied().collect();
    let alpha: Vec<f64> = fine_alpha.iter().step_by(2).copied().collect();
    let coarse = cumulative_simpson(&integrand(&alpha, grid_size), step(grid_size))[grid_size];
    let h_max = fine_cum[fine];
    if (coarse - h_max).abs() > RICHARDSON_TOLERANCE {
        return Err(Error::Quadrature {
            coarse,
            fine: h_max,
        });
    }
    // Requested nodes sit on even fine nodes, where the running integral is
    // made of whole Simpson panels.
    let cum: Vec<f64> = fine_cum.iter().step_by(2).copied().collect();

    let mut x_up = Vec::with_capacity(grid_size + 1);
    let mut y_up = Vec::with_capacity(grid_size + 1);
    let mut x_down = Vec::with_capacity(grid_size + 1);
    for j in 0..=grid_size {
        // integral of alpha from rho_j to rho_pi
        let tail = h_max - cum[j];
        let (r, a) = (rho[j], alpha[j]);
        let xu = (2.0 - r) * a - tail;
        x_up.push(xu);
        y_up.push(r * a + tail);
        let giant = if j == 0 {
            0.0
        } else {
            1.0 - gf.g_alpha(a, 1.0 - r)?
        };
        x_down.push(xu + 2.0 * (1.0 - a) * giant);
    }
    // Pin the exact endpoint values that rounding would otherwise smear.
    x_up[grid_size] = 0.0;
    y_up[grid_size] = 0.0;
    let y_down = y_up.clone();

    let mut knots_x = Vec::with_capacity(2 * grid_size + 1);
    let mut knots_y = Vec::with_capacity(2 * grid_size + 1);
    for j in (0..=grid_size).rev() {
        knots_x.push(x_up[j]);
        knots_y.push(y_up[j]);
    }
    for j in 1..=grid_size {
        knots_x.push(x_down[j]);
        knots_y.push(y_down[j]);
    }

    Ok(ProfileCurve {
        rho,
        alpha,
        x_up,
        y_up,
        x_down,
        y_down,
        summary: ProfileSummary {
            rho_pi,
            xi_pi,
            alpha_c,
            h_max,
        },
        knots_x,
        knots_y,
    })
}

/// Node `j` of `m` on `[0, 1]` and the derivative of the map there.
///
/// A cosine map composed with itself: near both ends the spacing shrinks like
/// the fourth power of the distance in the uniform variable, which smooths
/// root-type endpoint behaviour of `alpha(rho)` for the quadrature.
fn node(j: usize, m: usize) -> (f64, f64) {
    use std::f64::consts::PI;
    let phi = PI * j as f64 / m as f64;
    let theta = 0.5 * PI * (1.0 - phi.cos());
    let x = 0.5 * (1.0 - theta.cos());
    let dx = 0.5 * theta.sin() * 0.5 * PI * phi.sin();
    (x, dx)
}

/// Running composite Simpson integral of equally spaced samples (even count of
/// intervals); odd nodes use the three-point partial-panel rule.
fn cumulative_simpson(values: &[f64], h: f64) -> Vec<f64> {
    let m = values.len() - 1;
    let mut cum = vec![0.0; m + 1];
    let mut j = 0;
    while j + 2 <= m {
        let (f0, f1, f2) = (values[j], values[j + 1], values[j + 2]);
        cum[j + 1] = cum[j] + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2);
        cum[j + 2] = cum[j] + h / 3.0 * (f0 + 4.0 * f1 + f2);
        j += 2;
    }
    cum
}

impl ProfileCurve {
    /// Limiting rescaled contour height at rescaled time `t`.
    pub fn h(&self, t: f64) -> f64 {
        let xs = &self.knots_x;
        let ys = &self.knots_y;
        let last = xs.len() - 1;
        if t < 0.0 || t > xs[last] {
            return 0.0;
        }
        let idx = xs.partition_point(|&x| x < t);
        if xs[idx] == t {
            // ties resolve to the larger height
            let mut best = ys[idx];
            let mut k = idx + 1;
            while k <= last && xs[k] == t {
                best = best.max(ys[k]);
                k += 1;
            }
            return best;
        }
        let (x0, x1, y0, y1) = (xs[idx - 1], xs[idx], ys[idx - 1], ys[idx]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    /// Right end of the support of `h`, `2 xi`.
    pub fn support_end(&self) -> f64 {
        self.knots_x[self.knots_x.len() - 1]
    }

    /// Peak of the up branch, reached at `rho = 0`.
    pub fn peak(&self) -> (f64, f64) {
        (self.x_up[0], self.y_up[0])
    }

    /// Writes `rho,x_up,y_up,x_down,y_down`.
    pub fn write_curve_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["rho", "x_up", "y_up", "x_down", "y_down"])?;
        for j in 0..self.rho.len() {
            wtr.serialize((
                self.rho[j],
                self.x_up[j],
                self.y_up[j],
                self.x_down[j],
                self.y_down[j],
            ))?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Writes `t,h` on `points + 1` equally spaced times in `[0, 2]`.
    pub fn write_height_csv<W: Write>(&self, out: W, points: usize) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "h"])?;
        for k in 0..=points {
            let t = 2.0 * k as f64 / points as f64;
            wtr.serialize((t, self.h(t)))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::DegreeDistribution;

    fn profile(dist: DegreeDistribution, grid: usize) -> ProfileCurve {
        limit_profile(&GenFun::new(&dist).unwrap(), grid).unwrap()
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let h = 0.1;
        let values: Vec<f64> = (0..=10).map(|j| (j as f64 * h).powi(3)).collect();
        let cum = cumulative_simpson(&values, h);
        for (j, c) in cum.iter().enumerate() {
            let x = j as f64 * h;
            // the partial panel is exact up to quadratics only
            let tol = if j % 2 == 0 { 1e-14 } else { 1e-4 };
            assert!((c - x.powi(4) / 4.0).abs() < tol, "{j}");
        }
    }

    #[test]
    fn endpoints_and_geometry() {
        let curve = profile(DegreeDistribution::poisson(3.0).unwrap(), 128);
        let s = curve.summary;
        let last = curve.rho.len() - 1;
        assert_eq!((curve.x_up[last], curve.y_up[last]), (0.0, 0.0));
        assert!((curve.y_up[0] - s.h_max).abs() < 1e-14);
        assert!((curve.x_down[last] - 2.0 * s.xi_pi).abs() < 1e-9);
        assert!((curve.x_down[0] - curve.x_up[0]).abs() < 1e-15);
        assert_eq!(curve.y_down, curve.y_up);
        for j in 0..last {
            assert!(
                curve.x_up[j] > curve.x_up[j + 1],
                "x_up not decreasing in rho at {j}"
            );
            assert!(
                curve.x_down[j] < curve.x_down[j + 1],
                "x_down not increasing in rho at {j}"
            );
            assert!(curve.x_down[j] >= curve.x_up[j]);
            assert!(curve.alpha[j] >= curve.alpha[j + 1] - 1e-9);
        }
    }

    #[test]
    fn height_function() {
        let curve = profile(DegreeDistribution::poisson(3.0).unwrap(), 128);
        let (xp, yp) = curve.peak();
        assert!((curve.h(xp) - yp).abs() < 1e-14);
        assert_eq!(curve.h(0.0), 0.0);
        let end = curve.support_end();
        for t in [end, end + 1e-9, 1.99, 2.0] {
            assert!(curve.h(t).abs() < 1e-12);
        }
        // continuity across the peak junction
        let gap = (curve.h(xp - 1e-9) - curve.h(xp + 1e-9)).abs();
        assert!(gap < 2.0 / 128.0);
        let mut prev = 0.0;
        for k in 0..=1000 {
            let t = xp * k as f64 / 1000.0;
            let h = curve.h(t);
            assert!(h >= prev - 1e-12);
            prev = h;
        }
    }

    #[test]
    fn regular_peak_is_grid_stable() {
        let coarse = profile(DegreeDistribution::dirac(5).unwrap(), 64)
            .summary
            .h_max;
        let fine = profile(DegreeDistribution::dirac(5).unwrap(), 256)
            .summary
            .h_max;
        assert!((coarse - fine).abs() < 1e-6, "{coarse} vs {fine}");
    }

    #[test]
    fn rejects_small_grid() {
        let gf = GenFun::new(&DegreeDistribution::poisson(3.0).unwrap()).unwrap();
        assert!(limit_profile(&gf, 32).is_err());
        assert!(limit_profile(&gf, 65).is_err());
        let critical = GenFun::new(&DegreeDistribution::dirac(2).unwrap()).unwrap();
        assert!(matches!(
            limit_profile(&critical, 64),
            Err(Error::Subcritical { .. })
        ));
    }

    #[test]
    fn csv_exports() {
        let curve = profile(DegreeDistribution::dirac(4).unwrap(), 64);
        let mut buf = Vec::new();
        curve.write_curve_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("rho,x_up,y_up,x_down,y_down\n"));
        assert_eq!(text.lines().count(), 66);
        let mut buf = Vec::new();
        curve.write_height_csv(&mut buf, 10).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 12);
    }
}
