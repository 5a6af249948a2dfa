//! Numerical knobs shared across the solvers.
//!
//! Every threshold lives here so the command-line front end can override it
//! from a JSON file. Defaults are the values the test-suite is pinned to.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Environment variable naming a JSON config file.
pub const CONFIG_ENV: &str = "STAR_SPECTRAL_CONFIG";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Config {
    /// Highest supported lambda-derivative order of the kernel functions.
    pub nu_max: usize,
    /// Shells below this index are located by argument-principle subdivision.
    pub n_low: usize,
    /// Half-height in Im(rho) of the low-shell search rectangle.
    pub low_im_extent: f64,
    /// Half-height in Im(rho) of the per-shell counting windows.
    pub shell_im_extent: f64,
    /// Verify every Newton shell with an argument-principle count.
    pub verify_shell_counts: bool,
    pub newton_max_iter: usize,
    /// Relative step size at which Newton is declared converged.
    pub newton_step_tol: f64,
    /// Eigenvalues closer than `cluster_radius * (1 + |lambda|)` are merged.
    pub cluster_radius: f64,
    /// Number of nodes on Cauchy circles used for lambda-derivatives.
    pub cauchy_points: usize,
    pub n_direct: usize,
    pub n_tail: usize,
    /// Output cosine dictionary size of the edge-wise reconstruction.
    pub k_out: usize,
    /// Cosine dictionary size of the joint (Riesz-basis) reconstruction.
    pub k_dict: usize,
    /// Guard on |phi_s(pi, mu)| relative to its shell scale.
    pub denominator_guard: f64,
    /// Below this relative size phi_s(pi, lambda) is treated as zero.
    pub case_zero_tol: f64,
    /// Between `case_zero_tol` and this value the case is ambiguous.
    pub case_ambiguous_tol: f64,
    pub zh_depth: usize,
    pub zh_tol: f64,
    /// Ill-conditioning warning threshold for least-squares solves.
    pub condition_limit: f64,
    /// Plateau ratio below which a remainder profile counts as square-summable.
    pub plateau_ratio: f64,
    /// Below this many shells the admissibility verdict is indeterminate.
    pub min_shells_verdict: usize,
    /// Matching tolerance (relative to the shell scale) for split mu copies.
    pub split_tol: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            nu_max: 4,
            n_low: 3,
            low_im_extent: 5.0,
            shell_im_extent: 1.0,
            verify_shell_counts: true,
            newton_max_iter: 60,
            newton_step_tol: 1e-15,
            cluster_radius: 1e-7,
            cauchy_points: 32,
            n_direct: 300,
            n_tail: 3000,
            k_out: 64,
            k_dict: 32,
            denominator_guard: 1e-6,
            case_zero_tol: 1e-8,
            case_ambiguous_tol: 1e-6,
            zh_depth: 20,
            zh_tol: 1e-8,
            condition_limit: 1e10,
            plateau_ratio: 0.05,
            min_shells_verdict: 50,
            split_tol: 1e-6,
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads the file named by [`CONFIG_ENV`], or returns the defaults.
    pub fn from_env() -> Result<Self> {
        match std::env::var(CONFIG_ENV) {
            Ok(path) => Self::from_json(&std::fs::read_to_string(path)?),
            Err(_) => Ok(Self::default()),
        }
    }
}
