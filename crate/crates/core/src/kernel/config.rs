use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical settings shared by the curvature evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Radius of the gradient-subtracted core around the evaluation point.
    pub pv_inner_radius: f64,
    /// Starting outer cutoff; raised by decades until the analytic tail
    /// bound fits the tolerance budget.
    pub truncation_radius: f64,
    pub target_tolerance: f64,
    /// Panel budget of each adaptive integration, and the cap on tail
    /// escalation steps.
    pub max_subdivisions: usize,
    /// Monte Carlo sample budget of the direct oracle.
    pub oracle_samples: usize,
    pub seed: u64,
    /// Monte Carlo errors are reported as `mc_confidence` standard errors.
    pub mc_confidence: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            pv_inner_radius: 0.1,
            truncation_radius: 1e3,
            target_tolerance: 1e-6,
            max_subdivisions: 2000,
            oracle_samples: 1_000_000,
            seed: 0,
            mc_confidence: 4.0,
        }
    }
}

impl QuadratureConfig {
    /// Defaults with the core radius tied to a barrier height `epsilon`.
    pub fn for_barrier(epsilon: f64) -> Self {
        Self { pv_inner_radius: (0.5 * epsilon).min(0.1), ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.pv_inner_radius > 0.0) {
            return bad("pv_inner_radius", format!("must be positive, got {}", self.pv_inner_radius));
        }
        if !(self.truncation_radius > self.pv_inner_radius) {
            return bad("truncation_radius", "must exceed pv_inner_radius".into());
        }
        if !(self.target_tolerance > 0.0) {
            return bad("target_tolerance", format!("must be positive, got {}", self.target_tolerance));
        }
        if self.max_subdivisions == 0 {
            return bad("max_subdivisions", "must be positive".into());
        }
        if self.oracle_samples == 0 {
            return bad("oracle_samples", "must be positive".into());
        }
        if !(self.mc_confidence > 0.0) {
            return bad("mc_confidence", "must be positive".into());
        }
        Ok(())
    }
}

/// A curvature value with its error budget split by source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureResult {
    pub value: f64,
    /// Near-field error: quadrature error of the subtracted core, or the
    /// analytic bound on the part of the oracle below its innermost shell.
    pub error_core: f64,
    /// Quadrature error between core and cutoff, or the Monte Carlo error.
    pub error_midfield: f64,
    /// Bound on everything beyond the truncation radius (not in `value`).
    pub error_tail: f64,
    pub truncation_radius: f64,
    pub converged: bool,
}

impl CurvatureResult {
    pub fn total_error(&self) -> f64 {
        self.error_core + self.error_midfield + self.error_tail
    }

    /// `value - total_error`: positive only when positivity is certified
    /// at the reported error level.
    pub fn lower_bound(&self) -> f64 {
        self.value - self.total_error()
    }

    pub fn upper_bound(&self) -> f64 {
        self.value + self.total_error()
    }
}
