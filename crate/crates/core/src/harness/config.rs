use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::degree::DistSpec;
use crate::error::{Error, Result};

/// Thresholds for every comparison. None of these come from a convergence
/// rate; they are calibrated against pilot runs at `N = 10^4..10^5`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Median of `sup_t |X_ceil(tN) / N - h(t)|`.
    pub contour_sup: f64,
    /// Median giant-component fraction against `xi`.
    pub giant: f64,
    /// Total variation between a sleeping-degree histogram and `pi_alpha`.
    pub snapshot_tv: f64,
    /// Required `(max X - 1) / N` as a fraction of `H_max`.
    pub longest_path_ratio: f64,
    /// `sup_k |T_k / N - z(k / N)|`.
    pub ladder_time_sup: f64,
    /// `sup_k |N_i(k) / N - z_i(k / N)|` over small degrees.
    pub ladder_degree_sup: f64,
    /// Median second-largest component fraction.
    pub second_component: f64,
    /// Survival and per-degree extinction fractions of half-edges.
    pub half_edge: f64,
    /// Snapshots closer than this to `alpha_c` are skipped.
    pub alpha_margin: f64,
    /// Fraction of replicates that must pass per-replicate criteria.
    pub pass_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            contour_sup: 0.03,
            giant: 0.01,
            snapshot_tv: 0.02,
            longest_path_ratio: 0.9,
            ladder_time_sup: 0.05,
            ladder_degree_sup: 0.03,
            second_component: 0.01,
            half_edge: 0.03,
            alpha_margin: 0.02,
            pass_fraction: 0.8,
        }
    }
}

fn default_replicates() -> usize {
    10
}
fn default_delta() -> f64 {
    0.3
}
fn default_alphas() -> Vec<f64> {
    vec![0.1, 0.3]
}
fn default_grid() -> usize {
    512
}
fn default_epsilon() -> f64 {
    1e-4
}
fn default_dt() -> f64 {
    1e-3
}
fn default_ladder_degrees() -> usize {
    6
}
fn default_ladder_range() -> f64 {
    0.8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dist: DistSpec,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Explored fractions at which sleeping-degree histograms are compared.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    /// Number of profile intervals; the quadrature check uses twice as many.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Truncation level of the fluid system.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Degrees `0..=ladder_degrees` enter the fluid-density comparison.
    #[serde(default = "default_ladder_degrees")]
    pub ladder_degrees: usize,
    /// Fraction of the empirical ladder horizon compared against the fluid limit.
    #[serde(default = "default_ladder_range")]
    pub ladder_range: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(dist: DistSpec, n: usize) -> Self {
        Self {
            dist,
            n,
            replicates: default_replicates(),
            seed: 0,
            delta: default_delta(),
            alphas: default_alphas(),
            grid: default_grid(),
            epsilon: default_epsilon(),
            dt: default_dt(),
            ladder_degrees: default_ladder_degrees(),
            ladder_range: default_ladder_range(),
            tolerances: Tolerances::default(),
            out_dir: None,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: Self = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 100 {
            return fail(format!("N = {} must be at least 100", self.n));
        }
        if self.replicates == 0 {
            return fail("at least one replicate is required".into());
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return fail(format!("delta = {} outside (0, 0.5)", self.delta));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return fail(format!("snapshot alpha {a} outside [0, 1)"));
        }
        if self.grid < 64 || self.grid % 2 == 1 {
            return fail(format!("grid = {} must be even and at least 64", self.grid));
        }
        if !(self.ladder_range > 0.0 && self.ladder_range <= 1.0) {
            return fail(format!("ladder range {} outside (0, 1]", self.ladder_range));
        }
        let t = &self.tolerances;
        if !(t.pass_fraction > 0.0 && t.pass_fraction <= 1.0) {
            return fail(format!("pass fraction {} outside (0, 1]", t.pass_fraction));
        }
        if t.alpha_margin < 0.0 {
            return fail("alpha margin must be non-negative".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_fill_in() {
        let config: ExperimentConfig = serde_json::from_str(
            r#"{"dist": {"family": "poisson", "params": {"c": 3.0}}, "N": 1000}"#,
        )
        .unwrap();
        assert_eq!(
            config,
            ExperimentConfig::new("poisson:3".parse().unwrap(), 1000)
        );
        config.validate().unwrap();
    }

    #[test]
    fn partial_tolerances() {
        let config: ExperimentConfig = serde_json::from_str(
            r#"{"dist": {"explicit": [0.0, 0.5, 0.5]}, "N": 500, "tolerances": {"giant": 0.05}}"#,
        )
        .unwrap();
        assert_eq!(config.tolerances.giant, 0.05);
        assert_eq!(config.tolerances.contour_sup, 0.03);
    }

    #[test]
    fn validation() {
        let base = ExperimentConfig::new("dirac:3".parse().unwrap(), 1000);
        assert!(ExperimentConfig {
            n: 99,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            replicates: 0,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            delta: 0.5,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            grid: 65,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            alphas: vec![1.0],
            ..base.clone()
        }
        .validate()
        .is_err());
        base.validate().unwrap();
    }
}
