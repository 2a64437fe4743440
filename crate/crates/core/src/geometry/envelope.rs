use serde::Serialize;

use super::RadialProfile;
use crate::error::{Error, Result};

const MODULUS_FLOOR: f64 = 1e-12;
const DEFAULT_GRID: usize = 200_000;

/// A positive profile `phi` with `phi(r) / r -> 0`, confining a candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct SublinearEnvelope {
    phi: RadialProfile,
}

/// Result of the sublinearity modulus computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusReport {
    pub delta: f64,
    pub r_max: f64,
    /// Smallest `C` with `phi(r) <= C + delta r` on the grid, floored at 1e-12.
    pub c_delta: f64,
    /// Grid radius where `phi(r) - delta r` is largest.
    pub argmax_r: f64,
    /// False when the maximum sits on the last grid point, i.e. the range is
    /// too short to witness sublinearity at this slope.
    pub sublinear_on_range: bool,
}

impl SublinearEnvelope {
    pub fn new(phi: RadialProfile) -> Self {
        Self { phi }
    }

    pub fn phi(&self) -> &RadialProfile {
        &self.phi
    }

    /// `max_r (phi(r) - delta r)` on a uniform grid of `[0, r_max]`.
    pub fn modulus(&self, delta: f64, r_max: f64) -> Result<ModulusReport> {
        self.modulus_on_grid(delta, r_max, DEFAULT_GRID)
    }

    pub fn modulus_on_grid(&self, delta: f64, r_max: f64, points: usize) -> Result<ModulusReport> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter { name: "delta", reason: format!("must be positive, got {delta}") });
        }
        if !(r_max > 0.0) || points < 2 {
            return Err(Error::InvalidParameter { name: "r_max", reason: format!("must be positive, got {r_max}") });
        }
        let mut best = f64::NEG_INFINITY;
        let mut best_i = 0;
        for i in 0..=points {
            let r = r_max * i as f64 / points as f64;
            let p = self.phi.value(r);
            if !p.is_finite() || p < 0.0 || (p == 0.0 && r > 0.0) {
                return Err(Error::InvalidEnvelope(format!("phi({r}) = {p} is not positive")));
            }
            let g = p - delta * r;
            if g > best {
                best = g;
                best_i = i;
            }
        }
        Ok(ModulusReport {
            delta,
            r_max,
            c_delta: best.max(MODULUS_FLOOR),
            argmax_r: r_max * best_i as f64 / points as f64,
            sublinear_on_range: best_i < points,
        })
    }

    /// Largest `|p(r)| - phi(r)` on a grid; non-positive when `p` fits inside.
    pub fn excess(&self, p: &RadialProfile, r_max: f64, points: usize) -> f64 {
        (0..=points)
            .map(|i| r_max * i as f64 / points as f64)
            .map(|r| p.value(r).abs() - self.phi.value(r))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
